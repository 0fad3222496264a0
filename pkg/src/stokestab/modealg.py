"""Finite Fourier-mode algebra for the expansion blocks of the Hamiltonian.

State vectors live on integer modes k in [-K, K], two complex components per
mode; operators are banded in the mode index with a 2x2 block per (k, offset).
The Hamiltonian blocks H[j, l] collect the order-(eps^j, delta^l) pieces of
the linearized problem: cosine multipliers and first-order derivative terms
in the corners, Fourier-multiplier rows of the surface operator in the
lower-right slot (differentiated l times in the transverse parameter).
"""

import math
import warnings

import numpy as np

from .util import Jet
from . import dno


DEFAULT_CUTOFF = 12  # three shifts of <= 3 from modes {1, -2}, plus margin


class ModeVector:
    """Map from integer wavenumber to a 2-component complex amplitude."""

    __slots__ = ("entries", "K")

    def __init__(self, entries=None, K=DEFAULT_CUTOFF):
        self.K = K
        self.entries = {}
        if entries:
            for k, val in entries.items():
                arr = np.asarray(val, dtype=complex)
                if arr.shape != (2,):
                    raise ValueError("each mode entry must have two components")
                if abs(k) <= K:
                    self.entries[k] = arr.copy()

    def copy(self):
        out = ModeVector(K=self.K)
        out.entries = {k: v.copy() for k, v in self.entries.items()}
        return out

    def support(self):
        return sorted(k for k, v in self.entries.items()
                      if np.any(np.abs(v) > 0.0))

    def support_above(self, tol):
        return sorted(k for k, v in self.entries.items()
                      if np.max(np.abs(v)) > tol)

    def get(self, k):
        return self.entries.get(k, np.zeros(2, dtype=complex))

    def __add__(self, other):
        out = self.copy()
        for k, v in other.entries.items():
            if k in out.entries:
                out.entries[k] = out.entries[k] + v
            else:
                out.entries[k] = v.copy()
        return out

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def scale(self, factor):
        out = ModeVector(K=self.K)
        out.entries = {k: v * factor for k, v in self.entries.items()}
        return out

    def __mul__(self, factor):
        return self.scale(factor)

    __rmul__ = __mul__

    def norm(self):
        return math.sqrt(sum(float(np.sum(np.abs(v) ** 2))
                             for v in self.entries.values()))


def inner(u, v):
    """L2(T) pairing (u, v) = 2*pi * sum_k <u_k, conj(v_k)>."""
    total = 0.0 + 0.0j
    for k, uv in u.entries.items():
        vv = v.entries.get(k)
        if vv is not None:
            total += uv[0] * np.conj(vv[0]) + uv[1] * np.conj(vv[1])
    return 2.0 * math.pi * total


def apply_J(v):
    """Symplectic rotation J [a, b] = [b, -a], mode by mode."""
    out = ModeVector(K=v.K)
    out.entries = {k: np.array([val[1], -val[0]], dtype=complex)
                   for k, val in v.entries.items()}
    return out


def symplectic_pairing(u, v):
    return inner(apply_J(u), v)


class ModeOperator:
    """Banded operator: (A u)_k = sum_offsets block(k, o) @ u_{k+o}."""

    def __init__(self, offsets, block_fn, provenance=None, K=DEFAULT_CUTOFF):
        self.offsets = tuple(offsets)
        self._block_fn = block_fn
        self._cache = {}
        self.provenance = provenance
        self.K = K

    def block(self, k, o):
        key = (k, o)
        blk = self._cache.get(key)
        if blk is None:
            blk = np.asarray(self._block_fn(k, o), dtype=complex)
            self._cache[key] = blk
        return blk

    def apply(self, v):
        out = ModeVector(K=min(self.K, v.K))
        for q, val in v.entries.items():
            for o in self.offsets:
                k = q - o
                if abs(k) > out.K:
                    continue
                contrib = self.block(k, o) @ val
                if k in out.entries:
                    out.entries[k] += contrib
                else:
                    out.entries[k] = contrib
        return out


def compose_J(op):
    """The operator J @ H given H (2x2 block rotation of every block)."""
    def block_fn(k, o):
        b = op.block(k, o)
        return np.array([b[1], -b[0]])
    return ModeOperator(op.offsets, block_fn,
                        provenance=("J",) + tuple([op.provenance]), K=op.K)


def base_eigenvectors(ctx, K=DEFAULT_CUTOFF):
    """The two colliding eigenvectors U1 (mode 1) and U2 (mode -2)."""
    u1 = ModeVector({1: [1j * ctx.gamma1, 1.0]}, K=K)
    u2 = ModeVector({-2: [-1j * ctx.gamma2, 1.0]}, K=K)
    return u1, u2


# ----------------------------------------------------------------------
# Fourier-multiplier rows and their transverse Taylor coefficients

class RowProvider:
    """Order-j multiplier rows and their delta-Taylor coefficients at beta*.

    Orders 0 and 1 are differentiated exactly through jet arithmetic of the
    closed forms; orders 2 and 3 fall back to Richardson-refined central
    differences of the cascade (only the first derivative is ever consumed
    by the third-order expansions, but higher ones are available).
    """

    def __init__(self, ctx, tables, fd_step=None):
        self.ctx = ctx
        self.tables = tables
        self.beta = ctx.beta_star
        self.h = ctx.h
        self.step = fd_step if fd_step is not None else max(1e-4, 1e-4 * self.beta)
        self._cache = {}

    def taylor(self, j, ell, k):
        """dict offset -> ell-th Taylor coefficient of the order-j row at k."""
        key = (j, ell, k)
        if key in self._cache:
            return self._cache[key]
        if j == 0:
            jet = dno.r0_coeff(k, Jet.variable(self.beta), self.h)
            out = {0: jet.coeff(ell)}
        elif j == 1:
            bm, bp = dno.r1_coeffs(k, Jet.variable(self.beta), self.h)
            out = {-1: bm.coeff(ell), 1: bp.coeff(ell)}
        elif ell == 0:
            out = dno.cascade_row(j, k, self.beta, self.h, self.tables)
        else:
            out = self._fd_taylor(j, ell, k)
        self._cache[key] = out
        return out

    def _fd_taylor(self, j, ell, k):
        t = self.step
        rows = {m: dno.cascade_row(j, k, self.beta + m * t, self.h, self.tables)
                for m in (-2, -1, 0, 1, 2)}
        out = {}
        for s in dno.shifts(j):
            f = {m: rows[m][s] for m in rows}
            if ell == 1:
                refined = (8 * (f[1] - f[-1]) - (f[2] - f[-2])) / (12 * t)
                plain = (f[1] - f[-1]) / (2 * t)
                val, est = refined, abs(refined - plain)
            elif ell == 2:
                refined = (16 * (f[1] + f[-1]) - (f[2] + f[-2]) - 30 * f[0]) \
                    / (12 * t * t)
                plain = (f[1] - 2 * f[0] + f[-1]) / (t * t)
                val, est = refined / 2.0, abs(refined - plain) / 2.0
            elif ell == 3:
                refined = (f[2] - 2 * f[1] + 2 * f[-1] - f[-2]) / (2 * t ** 3)
                val, est = refined / 6.0, abs(refined) * 1e-8 / 6.0
            else:
                raise ValueError("transverse Taylor order must be 1..3")
            if est > 1e-6:
                warnings.warn(
                    f"finite-difference Taylor coefficient (j={j}, l={ell}, "
                    f"k={k}, shift={s}) estimated error {est:.2e}",
                    RuntimeWarning,
                )
            out[s] = val
        return out


def beta_derivative(j, ell, k, h, ctx=None, tables=None, offset=None):
    """Taylor coefficient in the transverse parameter of the order-j row.

    Returns the full offset -> value dict, or a single value when offset is
    given (order 0 rows are diagonal, so offset defaults to 0 there).
    """
    from .dispersion import build_context
    from .stokes import build_tables
    if ctx is None:
        ctx = build_context(h)
    if tables is None:
        tables = build_tables(ctx)
    row = RowProvider(ctx, tables).taylor(j, ell, k)
    if offset is None and j == 0:
        offset = 0
    return row if offset is None else row[offset]


# ----------------------------------------------------------------------
# Hamiltonian expansion blocks

def _cosine_content(j, tables):
    """[(m, r_m, p_m)] cosine amplitudes of the order-j corner coefficients."""
    t = tables
    if j == 0:
        return [(0, 1.0, t.c0)]
    if j == 1:
        return [(1, t.r11, t.p11)]
    if j == 2:
        return [(0, t.r20, t.p20), (2, t.r22, t.p22)]
    if j == 3:
        return [(1, t.r31, t.p31), (3, t.r33, t.p33)]
    raise ValueError("amplitude orders are 0..3")


def build_H(j, ell, ctx, tables, rows=None, K=DEFAULT_CUTOFF):
    """The (eps^j, delta^ell) block of the self-adjoint operator.

    For ell >= 1 only the lower-right multiplier survives (the corner
    coefficients do not depend on the transverse parameter).
    """
    if rows is None:
        rows = RowProvider(ctx, tables)
    mult_row = lambda k: rows.taylor(j, ell, k)

    if ell > 0:
        offsets = dno.shifts(j)

        def block_fn(k, o, _row=mult_row):
            b = np.zeros((2, 2), dtype=complex)
            b[1, 1] = _row(k)[o]
            return b

        return ModeOperator(offsets, block_fn, provenance=(j, ell), K=K)

    content = _cosine_content(j, tables)
    cos_offsets = sorted({off for m, _, _ in content
                          for off in ((0,) if m == 0 else (-m, m))})
    offsets = sorted(set(cos_offsets) | set(dno.shifts(j)))
    amp = {}
    for m, r_m, p_m in content:
        if m == 0:
            amp[0] = (r_m, p_m)
        else:
            amp[m] = (0.5 * r_m, 0.5 * p_m)
            amp[-m] = (0.5 * r_m, 0.5 * p_m)

    def block_fn(k, o):
        b = np.zeros((2, 2), dtype=complex)
        if o in amp:
            r_m, p_m = amp[o]
            b[0, 0] = r_m
            b[0, 1] = -p_m * 1j * (k + o)   # -p cos(mx) d/dx
            b[1, 0] = p_m * 1j * k          # d/dx (p cos(mx) . )
        row = mult_row(k)
        if o in row:
            b[1, 1] += row[o]
        return b

    return ModeOperator(tuple(offsets), block_fn, provenance=(j, ell), K=K)


def operator_family(ctx, tables, K=DEFAULT_CUTOFF, max_total=3):
    """All H[j, l] blocks with j + l <= max_total, sharing one row provider."""
    rows = RowProvider(ctx, tables)
    fam = {}
    for j in range(0, max_total + 1):
        for ell in range(0, max_total + 1 - j):
            fam[(j, ell)] = build_H(j, ell, ctx, tables, rows=rows, K=K)
    return fam
