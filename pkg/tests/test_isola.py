import math

import pytest

from stokestab.isola import (
    BracketError,
    DegenerateIsolaError,
    delta_of_theta,
    eigenvalues,
    find_h_crit,
    isola_curve,
    isola_geometry,
    kappa1,
    lambda_pair_theta,
    scan_h,
)


def test_unperturbed_pair(km1):
    lp, lm = eigenvalues(km1, 0.0, 0.0)
    assert lp == 1j * km1.sigma
    assert lm == 1j * km1.sigma


def test_growth_at_tuned_detuning(km1):
    eps = 0.01
    lp, _ = eigenvalues(km1, eps, delta_of_theta(km1, eps, 0.0))
    assert lp.real > 0.0
    assert lp.real == pytest.approx(abs(km1.b30) * eps ** 3, rel=0.05)


def test_no_growth_beyond_the_window(km1):
    eps = 0.01
    for theta in (kappa1(km1), -kappa1(km1)):
        lp, lm = lambda_pair_theta(km1, eps, theta)
        # leading discriminant vanishes at the window edge
        assert abs(lp.real) <= 10.0 * eps ** 3.5
        assert abs(lm.real) <= 10.0 * eps ** 3.5


def test_characteristic_polynomial_identities(km1):
    eps, delta = 0.01, 1e-3
    lp, lm = eigenvalues(km1, eps, delta)
    a, b, c = km1.A(eps, delta), km1.B(eps, delta), km1.C(eps, delta)
    trace = 2j * (km1.sigma + 0.5 * (a + c))
    assert abs((lp + lm) - trace) < 1e-15
    for lam in (lp, lm):
        mu = lam - 1j * km1.sigma
        residual = mu * mu - 1j * (a + c) * mu - (a * c + b * b)
        assert abs(residual) < 1e-12


def test_eigenvalue_guard(km1):
    with pytest.raises(ValueError):
        eigenvalues(km1, 0.06, 0.0)


def test_isola_samples_on_ellipse(km1):
    samples, geo = isola_curve(km1, 0.01, n_samples=17)
    for _, lp, lm in samples:
        assert geo.ellipse_residual(lp) < 1e-9
        assert geo.ellipse_residual(lm) < 1e-9
    assert geo.semi_axis_real > 0.0
    assert geo.semi_axis_imag > 0.0
    assert geo.kappa1 == pytest.approx(
        2 * abs(km1.b30) / abs(km1.a01 - km1.c01), rel=1e-14)


def test_isola_mirror_branches(km1):
    samples, _ = isola_curve(km1, 0.01, n_samples=9)
    for _, lp, lm in samples:
        assert abs(lp.real + lm.real) < 1e-15
        assert abs(lp.imag - lm.imag) < 1e-15


def test_theta_zero_extremal(km1):
    samples, _ = isola_curve(km1, 0.01, n_samples=21)
    reals = [abs(lp.real) for _, lp, _ in samples]
    mid = len(reals) // 2
    assert reals[mid] == max(reals)
    assert reals[mid] == pytest.approx(abs(km1.b30) * 1e-6, rel=1e-12)


def test_growth_rate_cubic_scaling(km1):
    rates = {eps: eigenvalues(km1, eps, delta_of_theta(km1, eps, 0.0))[0].real
             for eps in (0.005, 0.01, 0.02)}
    assert rates[0.01] / rates[0.005] == pytest.approx(8.0, rel=0.15)
    assert rates[0.02] / rates[0.01] == pytest.approx(8.0, rel=0.15)


def test_degenerate_isola_error(km1):
    import dataclasses
    degenerate = dataclasses.replace(km1, b30=1e-9)
    with pytest.raises(DegenerateIsolaError):
        isola_geometry(degenerate, 0.01)


def test_scan_beta_star_respects_asymptotes():
    rows = scan_h([0.05, 0.1, 8.0, 10.0], "beta_star")
    values = {h: v for h, v, err in rows if not err}
    assert len(values) == 4
    assert values[0.05] == pytest.approx((4.0 / 3.0) * 0.05 ** 2, rel=0.05)
    assert values[10.0] == pytest.approx(2.7275, abs=1e-3)
    assert values[0.05] < values[0.1] < values[8.0] < values[10.0]


def test_scan_records_failures():
    rows = scan_h([1.0, -2.0], "beta_star")
    assert rows[0][2] == ""
    assert rows[1][1] is None and rows[1][2] != ""


def test_scan_b30_sign_change():
    hs = [0.2, 0.24, 0.26, 0.3, 0.5, 1.0, 2.0, 4.0]
    rows = scan_h(hs, "b30")
    vals = [v for _, v, err in rows if not err]
    assert len(vals) == len(hs)
    signs = [math.copysign(1.0, v) for v in vals]
    flips = sum(1 for a, b in zip(signs, signs[1:]) if a != b)
    assert flips == 1
    assert signs[0] > 0 and signs[-1] < 0


def test_find_h_crit_no_sign_change():
    with pytest.raises(BracketError):
        find_h_crit((1.0, 2.0), tol=1e-3)


def test_find_h_crit_interval_contract():
    hc = find_h_crit((0.24, 0.26), tol=1e-3)
    assert abs(hc - 0.2506) < 2e-3
