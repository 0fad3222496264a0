import math

import numpy as np
import pytest

from stokestab import dno
from stokestab.dispersion import build_context
from stokestab.stokes import build_tables


@pytest.fixture(scope="module")
def setup1(ctx1, tables1):
    return ctx1, tables1


def test_r0_deep_limit():
    for k in (0, 1, 3):
        assert abs(dno.r0_coeff(k, 2.0, 50.0)
                   - math.sqrt(k * k + 2.0)) < 1e-10


def test_r0_values():
    assert dno.r0_coeff(0, 1.0, 1.0) == pytest.approx(math.tanh(1.0), rel=1e-15)
    assert abs(dno.r0_coeff(2, 1e-12, 1.0) - 2.0 * math.tanh(2.0)) < 1e-8


def test_r1_self_adjoint_pairing(ctx1):
    beta = ctx1.beta_star
    for k in range(-5, 6):
        bm_neg, _ = dno.r1_coeffs(-k, beta, 1.0)
        _, bp = dno.r1_coeffs(k, beta, 1.0)
        assert abs(bm_neg - bp) < 1e-12


def test_r1_deep_limits():
    beta = 1.7
    for k in range(-4, 5):
        bm, bp = dno.r1_coeffs(k, beta, 50.0)
        dm, dp = dno.r1_coeffs_deep(k, beta)
        assert abs(bm - dm) < 1e-8
        assert abs(bp - dp) < 1e-8


@pytest.mark.parametrize("h", [0.3, 1.0, 3.0])
def test_cascade_reproduces_order_one(h):
    ctx = build_context(h)
    tables = build_tables(ctx)
    for k in range(-6, 7):
        row = dno.cascade_row(1, k, ctx.beta_star, h, tables)
        bm, bp = dno.r1_coeffs(k, ctx.beta_star, h)
        assert abs(row[-1] - bm) < 1e-10
        assert abs(row[1] - bp) < 1e-10


def test_cascade_order_two_support(setup1):
    ctx, tables = setup1
    row, _ = dno.cascade_solve(2, 3, ctx.beta_star, 1.0, tables)
    assert sorted(row) == [-2, 0, 2]


def test_cascade_mirror_symmetry(setup1):
    ctx, tables = setup1
    for j in (2, 3):
        for k in range(-4, 5):
            row = dno.cascade_row(j, k, ctx.beta_star, 1.0, tables)
            mirror = dno.cascade_row(j, -k, ctx.beta_star, 1.0, tables)
            for s in row:
                assert abs(row[s] - mirror[-s]) < 1e-9


def test_bvp_residual_and_boundaries(setup1):
    ctx, tables = setup1
    h = 1.0
    tree = dno.cascade_profiles(1, ctx.beta_star, h, tables)
    zs = np.linspace(-h, 0.0, 100)
    for (j, k), prof in tree.profiles.items():
        if j == 0:
            continue
        for z in zs:
            assert abs(tree.residual(j, k, z)) < 1e-9, (j, k, z)
        assert abs(dno.profile_value(prof, 0.0)) < 1e-10, (j, k)
        dprof = dno.profile_derivative(prof)
        assert abs(dno.profile_value(dprof, -h)
                   - tree.neumann_value(j, k)) < 1e-10, (j, k)


def test_deep_strip_cascade_is_finite():
    ctx = build_context(50.0)
    tables = build_tables(ctx)
    for k in (-10, -2, 0, 1, 10):
        row = dno.cascade_row(3, k, ctx.beta_star, 50.0, tables)
        assert all(math.isfinite(v) for v in row.values())


def test_secular_branch_engaged(setup1):
    """The return-path forcing is exactly resonant, so order >= 2 profiles
    must carry z-weighted terms."""
    ctx, tables = setup1
    tree = dno.cascade_profiles(0, ctx.beta_star, 1.0, tables)
    assert any(t.secular_power == 1 for t in tree.profiles[(2, 0)])


def test_oracle_flat_multiplier(setup1):
    ctx, tables = setup1
    out = dno.elliptic_oracle_G(0.0, ctx.beta_star, 1.0, {2: 1.0}, tables)
    assert abs(out[2].real - dno.r0_coeff(2, ctx.beta_star, 1.0)) < 1e-9
    assert max(abs(v) for k, v in out.items() if k != 2) < 1e-12


def test_oracle_reflection_symmetry(setup1):
    """conj-reflecting the data conj-reflects the output."""
    ctx, tables = setup1
    f = {1: 0.3 + 0.2j, 2: -0.1 + 0.05j, -1: 0.07j}
    f_refl = {-k: np.conj(v) for k, v in f.items()}
    out = dno.elliptic_oracle_G(0.02, ctx.beta_star, 1.0, f, tables)
    out_refl = dno.elliptic_oracle_G(0.02, ctx.beta_star, 1.0, f_refl, tables)
    for k, v in out.items():
        if -k in out_refl:
            assert abs(out_refl[-k] - np.conj(v)) < 1e-10


def test_oracle_self_adjoint(setup1):
    ctx, tables = setup1
    rng = np.random.default_rng(3)
    f = {k: complex(rng.normal(), rng.normal()) for k in range(-3, 4)}
    g = {k: complex(rng.normal(), rng.normal()) for k in range(-3, 4)}
    modes = range(-14, 15)
    solver = dno.StripSolver(0.02, ctx.beta_star, 1.0, tables, modes)
    gf, gg = solver.solve([f, g])
    pair = lambda a, b: 2 * math.pi * sum(
        a.get(k, 0.0) * np.conj(b.get(k, 0.0)) for k in modes)
    lhs = pair(gf, g)
    rhs = pair(f, gg)
    assert abs(lhs - rhs) < 1e-8 * max(1.0, abs(lhs))


def test_oracle_truncation_order(setup1):
    """Defect against the cubic multiplier sum scales like eps^4."""
    ctx, tables = setup1
    beta, h = ctx.beta_star, 1.0

    def max_defect(eps):
        out = dno.elliptic_oracle_G(eps, beta, h, {1: 1.0}, tables)
        worst = 0.0
        for k, v in out.items():
            series = 0.0
            for j in (0, 1, 2, 3):
                row = dno.cascade_row(j, k, beta, h, tables)
                if 1 - k in row:
                    series += eps ** j * row[1 - k]
            worst = max(worst, abs(v.real - series))
        return worst

    d1, d2 = max_defect(0.01), max_defect(0.02)
    assert d2 / d1 == pytest.approx(16.0, rel=0.35)


def test_extraction_matches_closed_forms(setup1):
    ctx, tables = setup1
    row0 = dno.extract_Rj_from_oracle(0, 2, ctx.beta_star, 1.0, tables)
    assert abs(row0[0] - dno.r0_coeff(2, ctx.beta_star, 1.0)) < 1e-9
    row1 = dno.extract_Rj_from_oracle(1, 2, ctx.beta_star, 1.0, tables)
    bm, bp = dno.r1_coeffs(2, ctx.beta_star, 1.0)
    assert abs(row1[-1] - bm) < 1e-7
    assert abs(row1[1] - bp) < 1e-7


def test_extraction_matches_cascade_order_three(setup1):
    ctx, tables = setup1
    row = dno.extract_Rj_from_oracle(3, 2, ctx.beta_star, 1.0, tables)
    cascade = dno.cascade_row(3, 2, ctx.beta_star, 1.0, tables)
    assert abs(row[-3] - cascade[-3]) < 1e-6


def test_extraction_noise_gate(setup1):
    ctx, tables = setup1
    with pytest.raises(dno.OracleAccuracyError) as err:
        dno.extract_Rj_from_oracle(3, 2, ctx.beta_star, 1.0, tables, tol=1e-12)
    assert err.value.achievable


def test_multiplier_coeffs_container(setup1):
    ctx, tables = setup1
    m = dno.multiplier_coeffs(1, ctx.beta_star, 1.0, tables)
    assert m.A0 >= 0.0
    bm, bp = dno.r1_coeffs(1, ctx.beta_star, 1.0)
    assert m.Bm1 == bm and m.Bp1 == bp


def test_resonant_secular_forcing_rejected():
    with pytest.raises(dno.CascadeError):
        dno.particular_solution(
            [dno.HyperbolicTerm(dno.COSH, 2.0, 0.0, 1.0, 1)], 2.0)
