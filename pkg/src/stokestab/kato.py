"""Contour-integral reduction of the spectral problem to a 2x2 matrix.

Near the double eigenvalue i*sigma the linearized operator is similar to a
2x2 matrix acting on a perturbed basis. The basis corrections come from
derivatives of the spectral projection, each a contour integral of resolvent
and expansion-block compositions over a circle inside the spectral gap; the
matrix entries then follow from a finite ledger of inner products. The
composition chains under each integral are generated directly from the
Neumann series of the resolvent, so every order is assembled by one rule.

Conventions: S_lam is the flat resolvent (L0 - lam)^{-1}; the reduced matrix
is written i*sigma*I + i*[[A, B], [-B, C]] with A, B, C real; the Taylor
coefficients of A, B, C in (amplitude, transverse detuning) are the outputs.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import dno
from .dispersion import spectrum_gap
from .modealg import (DEFAULT_CUTOFF, ModeVector, base_eigenvectors, compose_J,
                      inner, operator_family)


class PoleError(RuntimeError):
    """Resolvent evaluated on (or numerically at) the flat spectrum."""

    def __init__(self, message, wavenumber):
        super().__init__(message)
        self.wavenumber = wavenumber


class ContourError(RuntimeError):
    """Quadrature failed to converge while doubling nodes."""


class AssemblyError(RuntimeError):
    """A structural identity of the reduced matrix failed."""


@dataclass(frozen=True)
class ContourSpec:
    """Circle around i*sigma used for every projection integral.

    tol is the target relative stability under node doubling. When the gap
    (hence the radius) is small, resolvent-chain roundoff puts a jitter
    floor above tol; refinements that stall twice in a row are accepted at
    that floor provided it stays under plateau_cap relative, and the
    achieved level is recorded on the assembler.
    """

    center: complex
    radius: float
    nodes: int = 64
    max_nodes: int = 1024
    tol: float = 1e-11
    plateau_cap: float = 1e-4

    def validate(self, gap):
        if not 0.0 < self.radius < gap:
            raise ValueError(
                f"contour radius {self.radius} must lie inside the spectral "
                f"gap {gap}"
            )
        if self.nodes < 32 or self.nodes % 2:
            raise ValueError("need an even node count of at least 32")
        return self


def default_contour(ctx, K=DEFAULT_CUTOFF, nodes=64):
    gap = spectrum_gap(ctx, K)
    return ContourSpec(center=1j * ctx.sigma, radius=0.5 * gap,
                       nodes=nodes).validate(gap)


def _compositions(m, n):
    """Ordered tuples of nonzero order pairs summing to (m, n)."""
    if (m, n) == (0, 0):
        return [()]
    out = []
    for a in range(m + 1):
        for b in range(n + 1):
            if (a, b) == (0, 0):
                continue
            for tail in _compositions(m - a, n - b):
                out.append(((a, b),) + tail)
    return out


class KatoAssembler:
    """Builds basis corrections and the reduced-matrix Taylor table."""

    def __init__(self, ctx, tables, contour=None, K=DEFAULT_CUTOFF):
        self.ctx = ctx
        self.tables = tables
        self.K = K
        self.H = operator_family(ctx, tables, K=K)
        self.JH = {key: compose_J(op) for key, op in self.H.items()}
        self.contour = contour or default_contour(ctx, K=K)
        self.achieved_tol = 0.0
        self._res_cache = {}
        u1, u2 = base_eigenvectors(ctx, K=K)
        self.U = {1: u1, 2: u2}
        self._chains = {}

    # -- resolvent ------------------------------------------------------

    def _resolvent_block(self, lam, k):
        key = (lam, k)
        blk = self._res_cache.get(key)
        if blk is None:
            d = 1j * self.ctx.c0 * k - lam
            a0 = dno.r0_coeff(k, self.ctx.beta_star, self.ctx.h)
            det = d * d + a0
            if abs(det) < 1e-12 * (abs(d) ** 2 + abs(a0)):
                raise PoleError(
                    f"resolvent point {lam} is numerically on the spectrum "
                    f"at wavenumber {k}", k)
            blk = np.array([[d, -a0], [1.0, d]], dtype=complex) / det
            self._res_cache[key] = blk
        return blk

    def resolvent_apply(self, lam, v):
        """(L0 - lam)^{-1} v, mode-diagonal 2x2 solves."""
        out = ModeVector(K=v.K)
        for k, val in v.entries.items():
            out.entries[k] = self._resolvent_block(lam, k) @ val
        return out

    # -- contour quadrature ----------------------------------------------

    def _contour(self, integrand):
        """(1/2 pi i) closed-circle integral with node doubling until stable."""
        spec = self.contour
        center, radius = spec.center, spec.radius

        def partial(nodes, stride_offset, stride):
            total = None
            for q in range(stride_offset, nodes, stride):
                theta = 2.0 * math.pi * q / nodes
                w = cmath.exp(1j * theta)
                term = integrand(center + radius * w).scale(w * radius / nodes)
                total = term if total is None else total + term
            return total

        nodes = spec.nodes
        total = partial(nodes, 0, 1)
        best_err = math.inf
        stalls = 0
        while True:
            nodes *= 2
            refined = total.scale(0.5) + partial(nodes, 1, 2)
            err = (refined - total).norm()
            scale = 1.0 + refined.norm()
            rel = err / scale
            if rel <= spec.tol:
                self.achieved_tol = max(self.achieved_tol, rel)
                return refined
            stalls = stalls + 1 if err > 0.5 * best_err else 0
            at_cap = nodes >= spec.max_nodes
            if (stalls >= 2 or at_cap) and rel <= spec.plateau_cap:
                # quadrature converged; the remaining motion is the roundoff
                # floor of the resolvent chains at this radius
                self.achieved_tol = max(self.achieved_tol, rel)
                return refined
            if at_cap:
                raise ContourError(
                    f"contour integral still moving by {rel:.2e} relative at "
                    f"{nodes} nodes; the circle may be too close to the "
                    "spectrum"
                )
            best_err = min(best_err, err)
            total = refined

    def projector0(self, v):
        """Order-zero spectral projector onto span{U1, U2}."""
        return self._contour(lambda lam: self.resolvent_apply(lam, v).scale(-1.0))

    def chains(self, m, n):
        key = (m, n)
        if key not in self._chains:
            self._chains[key] = _compositions(m, n)
        return self._chains[key]

    def apply_P(self, m, n, v):
        """m-th amplitude, n-th detuning derivative of the projection, on v.

        Assembled from the resolvent Neumann series: every ordered
        composition (a_1 .. a_r) of (m, n) contributes
        (-1)^(r+1) S L^{a_1} S ... L^{a_r} S v under the contour integral,
        weighted m! n!.
        """
        chains = self.chains(m, n)
        weight = math.factorial(m) * math.factorial(n)

        def integrand(lam):
            base = self.resolvent_apply(lam, v)
            total = None
            for chain in chains:
                w = base
                for a in reversed(chain):
                    w = self.resolvent_apply(lam, self.JH[a].apply(w))
                w = w.scale(float(weight * (-1) ** (len(chain) + 1)))
                total = w if total is None else total + w
            return total

        return self._contour(integrand)

    # -- perturbed basis --------------------------------------------------

    def basis_corrections(self, j, eps_only=False):
        """U_j^{(m,n)} for every 1 <= m + n <= 3 (or only n = 0 terms).

        The combinations implement the symmetrized square-root similarity
        transformation; repeated projection-derivative applications are
        reused across orders.
        """
        U = self.U[j]
        P = self.apply_P
        p10 = P(1, 0, U)
        p10p10 = P(1, 0, p10)
        out = {(1, 0): p10}
        p20 = P(2, 0, U)
        out[(2, 0)] = 0.5 * (p20 + p10p10)
        p30 = P(3, 0, U)
        out[(3, 0)] = (1.0 / 6.0) * p30 + 0.25 * (P(2, 0, p10) + P(1, 0, p20)) \
            + 0.5 * P(1, 0, p10p10)
        if eps_only:
            return out
        p01 = P(0, 1, U)
        p02 = P(0, 2, U)
        p11 = P(1, 1, U)
        p01p01 = P(0, 1, p01)
        p01p10 = P(0, 1, p10)
        p10p01 = P(1, 0, p01)
        out[(0, 1)] = p01
        out[(0, 2)] = 0.5 * (p02 + p01p01)
        out[(1, 1)] = p11 + 0.5 * (p01p10 + p10p01)
        out[(0, 3)] = (1.0 / 6.0) * P(0, 3, U) \
            + 0.25 * (P(0, 1, p02) + P(0, 2, p01)) + 0.5 * P(0, 1, p01p01)
        out[(2, 1)] = 0.5 * P(2, 1, U) \
            + 0.25 * (P(0, 1, p20) + P(2, 0, p01)) \
            + 0.5 * (P(1, 0, p11) + P(1, 1, p10)) \
            + 0.5 * (P(1, 0, p01p10) + P(0, 1, p10p10)) \
            + 0.5 * P(1, 0, p10p01)
        out[(1, 2)] = 0.5 * P(1, 2, U) \
            + 0.25 * (P(1, 0, p02) + P(0, 2, p10)) \
            + 0.5 * (P(0, 1, p11) + P(1, 1, p01)) \
            + 0.5 * (P(1, 0, p01p01) + P(0, 1, p10p01)) \
            + 0.5 * P(0, 1, p01p10)
        return out

    def inner_product_table(self, basis_j, basis_k, orders):
        """(H V_j^{eps,delta}, V_k^{eps,delta}) Taylor coefficients.

        basis_* map (m, n) -> U_*^{(m,n)} including the (0, 0) base vector;
        the (m, n) entry sums (H^{a} V^{(b)}, V^{(c)}) over a + b + c = (m, n).
        """
        out = {}
        for (m, n) in orders:
            total = 0.0 + 0.0j
            for am in range(m + 1):
                for an in range(n + 1):
                    Hop = self.H.get((am, an))
                    if Hop is None:
                        continue
                    for bm in range(m - am + 1):
                        for bn in range(n - an + 1):
                            vb = basis_j.get((bm, bn))
                            vc = basis_k.get((m - am - bm, n - an - bn))
                            if vb is None or vc is None:
                                continue
                            total += inner(Hop.apply(vb), vc)
            out[(m, n)] = total
        return out


ALL_ORDERS = tuple((m, n) for m in range(4) for n in range(4)
                   if 1 <= m + n <= 3)


@dataclass
class KatoMatrix:
    """Reduced 2x2 matrix: Taylor table of its real entry functions."""

    h: float
    beta_star: float
    sigma: float
    gamma1: float
    gamma2: float
    a01: float
    a20: float
    a02: float
    a21: float
    a03: float
    c01: float
    c20: float
    c02: float
    c21: float
    c03: float
    b30: float
    diagnostics: dict = field(default_factory=dict)

    def A(self, eps, delta):
        return (self.a01 * delta + self.a20 * eps ** 2 + self.a02 * delta ** 2
                + self.a21 * eps ** 2 * delta + self.a03 * delta ** 3)

    def B(self, eps, delta):
        return self.b30 * eps ** 3

    def C(self, eps, delta):
        return (self.c01 * delta + self.c20 * eps ** 2 + self.c02 * delta ** 2
                + self.c21 * eps ** 2 * delta + self.c03 * delta ** 3)

    def L(self, eps, delta):
        a, b, c = self.A(eps, delta), self.B(eps, delta), self.C(eps, delta)
        return np.array([[1j * (self.sigma + a), 1j * b],
                         [-1j * b, 1j * (self.sigma + c)]])

    def as_dict(self):
        return {
            "h": self.h, "beta_star": self.beta_star, "sigma": self.sigma,
            "a01": self.a01, "a20": self.a20, "a02": self.a02,
            "a21": self.a21, "a03": self.a03,
            "c01": self.c01, "c20": self.c20, "c02": self.c02,
            "c21": self.c21, "c03": self.c03, "b30": self.b30,
        }


def _structural_residues(ip11, ip22, ip12, ip21):
    imag_res = max(abs(v.imag) for table in (ip11, ip22, ip12, ip21)
                   for v in table.values()) / (4.0 * math.pi)
    antisym = max(abs(ip12[o] - ip21[o]) for o in ip12) / (4.0 * math.pi)
    b_forbidden = max(abs(ip12[o]) for o in ip12 if o != (3, 0)) / (4.0 * math.pi)
    return imag_res, antisym, b_forbidden


def assemble_matrix_coeffs(ctx, tables, contour=None, K=DEFAULT_CUTOFF,
                           check_tol=(1e-9, 1e-10, 1e-9)):
    """Full third-order Taylor table of the reduced matrix at one depth.

    check_tol = (imaginary residue, off-diagonal antisymmetry, forbidden
    B-orders); each is scaled by the magnitude of the extracted coefficients
    before gating, so deep or shallow extremes fail only on genuine
    structural violations. Raises AssemblyError naming the broken identity.
    """
    asm = KatoAssembler(ctx, tables, contour=contour, K=K)
    basis = {}
    for j in (1, 2):
        corr = asm.basis_corrections(j)
        corr[(0, 0)] = asm.U[j]
        g = math.sqrt(asm.ctx.gamma1 if j == 1 else asm.ctx.gamma2)
        basis[j] = {order: vec.scale(1.0 / g) for order, vec in corr.items()}
    ip11 = asm.inner_product_table(basis[1], basis[1], ALL_ORDERS)
    ip22 = asm.inner_product_table(basis[2], basis[2], ALL_ORDERS)
    ip12 = asm.inner_product_table(basis[1], basis[2], ALL_ORDERS)
    ip21 = asm.inner_product_table(basis[2], basis[1], ALL_ORDERS)

    w = 1.0 / (4.0 * math.pi)
    a = {o: float(-w * ip11[o].real) for o in ip11}
    c = {o: float(+w * ip22[o].real) for o in ip22}
    b30 = float(w * ip12[(3, 0)].real)

    km = KatoMatrix(
        h=ctx.h, beta_star=ctx.beta_star, sigma=ctx.sigma,
        gamma1=ctx.gamma1, gamma2=ctx.gamma2,
        a01=a[(0, 1)], a20=a[(2, 0)], a02=a[(0, 2)],
        a21=a[(2, 1)], a03=a[(0, 3)],
        c01=c[(0, 1)], c20=c[(2, 0)], c02=c[(0, 2)],
        c21=c[(2, 1)], c03=c[(0, 3)], b30=b30,
    )
    imag_res, antisym, b_forbidden = _structural_residues(ip11, ip22, ip12, ip21)
    w4 = 1.0 / (4.0 * math.pi)
    scale = max(1.0, *(abs(v) for v in km.as_dict().values()),
                *(abs(v) * w4 for table in (ip11, ip22, ip12, ip21)
                  for v in table.values()))
    km.diagnostics = {
        "imag_residue": imag_res,
        "antisym_residue": antisym,
        "b_forbidden_orders": b_forbidden,
        "a_forbidden_orders": max(abs(a[o]) for o in
                                  ((1, 0), (1, 1), (3, 0), (1, 2))),
        "coefficient_scale": scale,
        "contour_radius": asm.contour.radius,
        "contour_achieved_tol": asm.achieved_tol,
    }
    names = ("purely imaginary matrix", "off-diagonal antisymmetry",
             "no B terms below third order in amplitude")
    for res, tol, name in zip((imag_res, antisym, b_forbidden), check_tol, names):
        allowed = max(tol, 10.0 * asm.achieved_tol) * scale
        if res > allowed:
            raise AssemblyError(
                f"violated identity: {name} (residue {res:.3e}, "
                f"allowed {allowed:.3e})"
            )
    if not km.a01 < 0.0 < km.c01:
        raise AssemblyError(
            f"violated identity: detuning slopes must satisfy a01 < 0 < c01 "
            f"(got a01={km.a01}, c01={km.c01})"
        )
    return km


def resolvent_apply(lam, v, ctx, K=DEFAULT_CUTOFF):
    """(L0 - lam)^{-1} v at the resonant transverse parameter."""
    from .stokes import build_tables
    return KatoAssembler(ctx, build_tables(ctx), K=K).resolvent_apply(lam, v)


def contour_P(mn, j, ctx, tables, contour=None, K=DEFAULT_CUTOFF):
    """P^{(m,n)} U_j: one projection derivative applied to a base eigenvector."""
    asm = KatoAssembler(ctx, tables, contour=contour, K=K)
    return asm.apply_P(mn[0], mn[1], asm.U[j])


def perturbed_basis(mn, j, ctx, tables, contour=None, K=DEFAULT_CUTOFF):
    """U_j^{(m,n)} (or the normalized V version via scale(1/sqrt(gamma_j)))."""
    asm = KatoAssembler(ctx, tables, contour=contour, K=K)
    return asm.basis_corrections(j)[tuple(mn)]


def b30_coefficient(ctx, tables, contour=None, K=DEFAULT_CUTOFF):
    """Fast path: only the (3, 0) off-diagonal coefficient (for depth scans)."""
    asm = KatoAssembler(ctx, tables, contour=contour, K=K)
    basis = {}
    for j in (1, 2):
        corr = asm.basis_corrections(j, eps_only=True)
        corr[(0, 0)] = asm.U[j]
        g = math.sqrt(asm.ctx.gamma1 if j == 1 else asm.ctx.gamma2)
        basis[j] = {order: vec.scale(1.0 / g) for order, vec in corr.items()}
    ip12 = asm.inner_product_table(basis[1], basis[2], orders=[(3, 0)])
    return float(ip12[(3, 0)].real) / (4.0 * math.pi)
