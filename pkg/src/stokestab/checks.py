"""Named invariant checks shared by the CLI --seed-check switch and tests."""

import math

import numpy as np

from . import dno, isola, kato, validator
from .dispersion import build_context, lambda0, resonance_residual, spectrum_gap
from .stokes import build_tables, profile_series, r_consistency_residual


def _dispersion_checks(h):
    ctx = build_context(h)
    yield "beta_star inside (0, 3)", 0.0 < ctx.beta_star < 3.0
    yield "collision frequency consistent", abs(
        (ctx.c0 - ctx.gamma1) - (-2.0 * ctx.c0 + ctx.gamma2)) < 1e-11
    yield "resonance residual at root", abs(
        resonance_residual(ctx.beta_star, h)) < 1e-11
    lam = lambda0(0, 1.0, 50.0, 1)
    yield "deep-limit branch value", abs(lam - 1j) < 1e-10
    yield "spectral gap positive", spectrum_gap(ctx) > 0.0


def _stokes_checks(h):
    ctx = build_context(h)
    t = build_tables(ctx)
    yield "q20 is exactly one", t.q20 == 1.0
    yield "r-table consistent with q, zeta", r_consistency_residual(t) < 1e-10
    x = np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)
    eta = profile_series(t, "eta")
    yield "surface profile even", np.allclose(
        eta.evaluate(0.01, x), eta.evaluate(0.01, -x), atol=1e-15)
    psi = profile_series(t, "psi")
    yield "potential profile odd", np.allclose(
        psi.evaluate(0.01, x), -psi.evaluate(0.01, -x), atol=1e-15)


def _dno_checks(h):
    ctx = build_context(h)
    t = build_tables(ctx)
    beta = ctx.beta_star
    worst = 0.0
    for k in range(-4, 5):
        row = dno.cascade_row(1, k, beta, h, t)
        bm, bp = dno.r1_coeffs(k, beta, h)
        worst = max(worst, abs(row[-1] - bm), abs(row[1] - bp))
    yield "cascade order 1 matches closed form", worst < 1e-10
    mirror = 0.0
    for j in (2, 3):
        for k in range(-4, 5):
            row = dno.cascade_row(j, k, beta, h, t)
            back = dno.cascade_row(j, -k, beta, h, t)
            mirror = max(mirror, *(abs(row[s] - back[-s]) for s in row))
    yield "multiplier rows self-adjoint", mirror < 1e-9
    tree = dno.cascade_profiles(1, beta, h, t)
    res = max(abs(tree.residual(3, 0, z))
              for z in np.linspace(-h, 0.0, 50))
    yield "vertical problems satisfied pointwise", res < 1e-9


def _kato_checks(h):
    ctx = build_context(h)
    t = build_tables(ctx)
    km = kato.assemble_matrix_coeffs(ctx, t)
    d = km.diagnostics
    scale = d["coefficient_scale"]
    yield "reduced matrix purely imaginary", d["imag_residue"] < 1e-9 * scale
    yield "off-diagonal antisymmetry", d["antisym_residue"] < 1e-10 * scale
    yield "forbidden B orders vanish", d["b_forbidden_orders"] < 1e-9 * scale
    yield "a01 < 0 < c01", km.a01 < 0.0 < km.c01
    yield "detuning slopes match closed form", (
        abs(km.a01 + ctx.tau1 / (2 * ctx.gamma1)) < 1e-9
        and abs(km.c01 - ctx.tau2 / (2 * ctx.gamma2)) < 1e-9)
    asm = kato.KatoAssembler(ctx, t)
    u1 = asm.U[1]
    yield "order-zero projector fixes eigenvectors", (
        asm.projector0(u1) - u1).norm() < 1e-10


def _isola_checks(h):
    ctx = build_context(h)
    t = build_tables(ctx)
    km = kato.assemble_matrix_coeffs(ctx, t)
    lp, lm = isola.eigenvalues(km, 0.0, 0.0)
    yield "unperturbed pair at the collision", (
        abs(lp - 1j * km.sigma) < 1e-14 and abs(lm - 1j * km.sigma) < 1e-14)
    eps = 0.01
    samples, geo = isola.isola_curve(km, eps, n_samples=11)
    worst = max(max(geo.ellipse_residual(a), geo.ellipse_residual(b))
                for _, a, b in samples)
    yield "samples on the predicted ellipse", worst < 1e-10
    lp, lm = isola.eigenvalues(km, eps, isola.delta_of_theta(km, eps, 0.0))
    tr = lp + lm
    expect = 2j * (km.sigma + 0.5 * (km.A(eps, isola.delta_of_theta(km, eps, 0.0))
                                     + km.C(eps, isola.delta_of_theta(km, eps, 0.0))))
    yield "trace identity", abs(tr - expect) < 1e-13


def _validator_checks(h):
    ctx = build_context(h)
    t = build_tables(ctx)
    op0 = validator.build_operator(0.0, ctx.beta_star, h, K=16, tables=t)
    ok, worst = validator.flat_spectrum_check(op0, tol=1e-9)
    yield "flat-spectrum eigenvalues", ok
    gapd, res = validator.eigenspace_match_residual(op0, ctx)
    yield "double eigenvalue at the collision", gapd < 1e-10 and res < 1e-9
    yield "conjugate-pair symmetry", validator.conjugate_pair_residual(op0) < 1e-9


_SUITES = {
    "dispersion": _dispersion_checks,
    "stokes": _stokes_checks,
    "dno": _dno_checks,
    "kato": _kato_checks,
    "isola": _isola_checks,
    "validator": _validator_checks,
}


def run_checks(module_names, h=1.0):
    """Run the named suites; returns (passed, failed, report_lines)."""
    passed = failed = 0
    lines = []
    for name in module_names:
        suite = _SUITES.get(name)
        if suite is None:
            lines.append(f"[skip] unknown suite {name}")
            continue
        for label, ok in suite(h):
            if ok:
                passed += 1
                lines.append(f"[pass] {name}: {label}")
            else:
                failed += 1
                lines.append(f"[FAIL] {name}: {label}")
    return passed, failed, lines
