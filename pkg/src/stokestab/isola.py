"""Instability predictions from the reduced-matrix Taylor table.

The reduced matrix i*sigma*I + i*[[A, B], [-B, C]] has eigenvalues

    lambda_pm = i (sigma + (A + C)/2) +- sqrt(-(A - C)^2 + 4 B^2) / 2,

so real parts appear exactly when the discriminant is positive. Tuning the
transverse detuning to delta = kappa0 eps^2 + theta eps^3 cancels the
second-order mismatch of A - C; the surviving eigenvalue pair then sweeps an
ellipse of semi-axes O(eps^3) as theta crosses (-kappa1, kappa1).
"""

import cmath
import math
from dataclasses import dataclass

from .dispersion import build_context
from .kato import assemble_matrix_coeffs, b30_coefficient
from .stokes import build_tables


class DegenerateIsolaError(RuntimeError):
    """b30 below the noise floor: no third-order instability at this depth."""


class BracketError(ValueError):
    """Root bracket without a sign change."""


B30_DEGENERACY_FLOOR = 1e-8


def eigenvalues(km, eps, delta):
    """The reduced-matrix eigenvalue pair at one (amplitude, detuning)."""
    if abs(eps) > 0.05 or abs(delta) > 0.05:
        raise ValueError("Taylor table is trusted only for |eps|, |delta| <= 0.05")
    a, b, c = km.A(eps, delta), km.B(eps, delta), km.C(eps, delta)
    disc = -(a - c) ** 2 + 4.0 * b * b
    center = 1j * (km.sigma + 0.5 * (a + c))
    root = 0.5 * cmath.sqrt(complex(disc))
    return center + root, center - root


def kappa0(km):
    """Detuning curvature that cancels the second-order diagonal mismatch."""
    return (km.c20 - km.a20) / (km.a01 - km.c01)


def kappa1(km):
    return 2.0 * abs(km.b30) / abs(km.a01 - km.c01)


def center_drift(km):
    """Second-order drift of the isola center along the imaginary axis."""
    return (km.a01 * km.c20 - km.a20 * km.c01) / (km.a01 - km.c01)


@dataclass(frozen=True)
class IsolaGeometry:
    eps: float
    center_imag: float
    semi_axis_real: float
    semi_axis_imag: float
    kappa0: float
    kappa1: float

    def ellipse_residual(self, lam):
        """Defect of the ellipse equation at one eigenvalue sample."""
        x = lam.real / self.semi_axis_real
        y = (lam.imag - self.center_imag) / self.semi_axis_imag
        return abs(x * x + y * y - 1.0)


def isola_geometry(km, eps):
    if abs(km.b30) < B30_DEGENERACY_FLOOR:
        raise DegenerateIsolaError(
            f"|b30| = {abs(km.b30):.2e} at h = {km.h}: the depth sits at (or "
            "numerically at) the critical depth where the third-order "
            "instability degenerates"
        )
    e3 = abs(eps) ** 3
    return IsolaGeometry(
        eps=eps,
        center_imag=km.sigma + center_drift(km) * eps * eps,
        semi_axis_real=abs(km.b30) * e3,
        semi_axis_imag=abs(km.b30 * (km.a01 + km.c01) / (km.a01 - km.c01)) * e3,
        kappa0=kappa0(km),
        kappa1=kappa1(km),
    )


def lambda_pair_theta(km, eps, theta):
    """Third-order eigenvalue pair at detuning delta(eps, theta).

    This is the closed-form expansion (real part from the square root of the
    leading discriminant), exact on the predicted ellipse.
    """
    e3 = abs(eps) ** 3
    imag = (km.sigma + center_drift(km) * eps * eps
            + 0.5 * (km.a01 + km.c01) * theta * e3)
    rad = 4.0 * km.b30 ** 2 - (km.a01 - km.c01) ** 2 * theta * theta
    root = 0.5 * cmath.sqrt(complex(rad)) * e3
    return 1j * imag + root, 1j * imag - root


def isola_curve(km, eps, n_samples=41):
    """Sampled eigenvalue pair along the isola plus its closed-form geometry.

    Returns (samples, geometry) where samples is a list of rows
    (theta, lambda_plus, lambda_minus).
    """
    geo = isola_geometry(km, eps)
    k1 = geo.kappa1
    samples = []
    for i in range(n_samples):
        theta = -k1 + 2.0 * k1 * i / (n_samples - 1) if n_samples > 1 else 0.0
        lp, lm = lambda_pair_theta(km, eps, theta)
        samples.append((theta, lp, lm))
    return samples, geo


def delta_of_theta(km, eps, theta):
    return kappa0(km) * eps * eps + theta * eps ** 3


SCAN_QUANTITIES = ("beta_star", "b30", "kappa0", "kappa1")


def scan_h(h_grid, quantity, progress=None, max_workers=1):
    """Evaluate one pipeline quantity per depth; failures are recorded rows.

    Returns a list of (h, value_or_None, error_message_or_"") rows in grid
    order. beta_star needs only the resonance solve; the rest run the
    contour pipeline (b30 the amplitude-only fast path, kappas the full
    table).
    """
    if quantity not in SCAN_QUANTITIES:
        raise ValueError(f"unknown scan quantity {quantity!r}")

    def one(h):
        ctx = build_context(h)
        if quantity == "beta_star":
            return ctx.beta_star
        tables = build_tables(ctx)
        if quantity == "b30":
            return b30_coefficient(ctx, tables)
        km = assemble_matrix_coeffs(ctx, tables)
        return kappa0(km) if quantity == "kappa0" else kappa1(km)

    rows = []
    if max_workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            futures = [pool.submit(one, h) for h in h_grid]
            for h, fut in zip(h_grid, futures):
                try:
                    rows.append((h, fut.result(), ""))
                except Exception as exc:  # recorded, scan continues
                    rows.append((h, None, f"{type(exc).__name__}: {exc}"))
    else:
        for h in h_grid:
            try:
                rows.append((h, one(h), ""))
            except Exception as exc:
                rows.append((h, None, f"{type(exc).__name__}: {exc}"))
            if progress:
                progress(rows[-1])
    return rows


def default_h_grid(h_min=0.1, h_max=10.0, points=200):
    """Logarithmic grid plus the extreme endpoints used by the depth scans."""
    grid = [0.05] if h_min > 0.05 else []
    ratio = (h_max / h_min) ** (1.0 / (points - 1))
    grid += [h_min * ratio ** i for i in range(points)]
    if h_max < 100.0:
        grid.append(100.0)
    return grid


def find_h_crit(bracket=(0.2, 0.3), tol=1e-5, max_iter=200):
    """Bisection for the depth where b30 changes sign."""

    def b30_at(h):
        ctx = build_context(h)
        return b30_coefficient(ctx, build_tables(ctx))

    lo, hi = bracket
    if not 0.0 < lo < hi:
        raise BracketError(f"bad bracket {bracket}")
    flo, fhi = b30_at(lo), b30_at(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if math.copysign(1.0, flo) == math.copysign(1.0, fhi):
        raise BracketError(
            f"b30 does not change sign on {bracket}: "
            f"b30({lo}) = {flo:.4e}, b30({hi}) = {fhi:.4e}"
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol:
            return mid
        fmid = b30_at(mid)
        if fmid == 0.0:
            return mid
        if math.copysign(1.0, fmid) == math.copysign(1.0, flo):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)
