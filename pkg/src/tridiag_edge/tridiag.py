"""Symmetric tridiagonal linear algebra.

Eigenvalues are located by Sturm-sequence bisection. The kernel is written
against numpy broadcasting so that one Python-level sweep over the matrix
rows serves any number of shifts and any number of matrices at once; this is
what makes Monte Carlo over ~10^5 matrices of size ~10^3 affordable.

Indices into arrays are 0-based everywhere except
:func:`laplacian_resolvent_entry`, which takes the 1-based ``(i, j)`` of the
closed-form Green's function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DENSE_CAP",
    "NearSingularError",
    "SpectralParameter",
    "TridiagonalMatrix",
    "batched_sturm_count",
    "batched_top_eigenvalues",
    "dense_eigenvalues",
    "gershgorin_bounds",
    "laplacian_resolvent_entry",
    "sturm_count",
    "top_k_eigenvalues",
    "tridiagonal_solve",
]

PIVOT_FLOOR = 1e-300
DENSE_CAP = 2000
DEFAULT_RELTOL = 1e-10


class NearSingularError(ArithmeticError):
    """A pivot of a tridiagonal factorisation fell below the safety threshold."""


@dataclass(frozen=True)
class TridiagonalMatrix:
    """Real symmetric tridiagonal matrix stored as its two diagonals.

    Parameters
    ----------
    diag : array_like, shape (N,)
        Main diagonal.
    offdiag : array_like, shape (N - 1,)
        First super-/sub-diagonal.
    """

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        diag = np.array(self.diag, dtype=float).ravel()
        offdiag = np.array(self.offdiag, dtype=float).ravel()
        if diag.size < 1:
            raise ValueError("a tridiagonal matrix needs at least one row")
        if offdiag.size != diag.size - 1:
            raise ValueError(
                f"offdiag has length {offdiag.size}, expected {diag.size - 1}"
            )
        if not (np.all(np.isfinite(diag)) and np.all(np.isfinite(offdiag))):
            raise ValueError("tridiagonal entries must be finite")
        diag.setflags(write=False)
        offdiag.setflags(write=False)
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "offdiag", offdiag)

    @classmethod
    def free_laplacian(cls, n: int) -> "TridiagonalMatrix":
        """The free discrete Laplacian: zero diagonal, unit off-diagonal."""
        return cls(np.zeros(n), np.ones(n - 1))

    @property
    def n(self) -> int:
        return self.diag.size

    def with_diag(self, diag) -> "TridiagonalMatrix":
        return TridiagonalMatrix(diag, self.offdiag)

    def to_dense(self) -> np.ndarray:
        a = np.diag(self.diag)
        if self.n > 1:
            idx = np.arange(self.n - 1)
            a[idx, idx + 1] = self.offdiag
            a[idx + 1, idx] = self.offdiag
        return a

    def bounds(self) -> tuple[float, float]:
        lo, hi = gershgorin_bounds(self.diag, self.offdiag)
        return float(lo), float(hi)


@dataclass(frozen=True)
class SpectralParameter:
    """A spectral parameter ``lam > 2`` outside the free Laplacian's spectrum.

    ``lambda_star = arccosh(lam / 2)`` is the decay rate of the free
    Green's function at energy ``lam``.
    """

    lam: float

    def __post_init__(self):
        if not self.lam > 2.0:
            raise ValueError(f"spectral parameter must exceed 2, got {self.lam}")

    @property
    def lambda_star(self) -> float:
        return math.acosh(0.5 * self.lam)


def gershgorin_bounds(diag, offdiag):
    """Gershgorin enclosure of the spectrum, batched along trailing axes.

    ``diag`` has shape ``(N, ...)``; ``offdiag`` has shape ``(N - 1,)`` (shared)
    or ``(N - 1, ...)``. Returns ``(lo, hi)`` with the trailing shape.
    """
    diag = np.asarray(diag, dtype=float)
    absoff = np.abs(np.asarray(offdiag, dtype=float))
    if absoff.ndim == 1 and diag.ndim > 1:
        absoff = absoff.reshape(absoff.shape + (1,) * (diag.ndim - 1))
    radius = np.zeros(diag.shape)
    if diag.shape[0] > 1:
        radius[1:] += absoff
        radius[:-1] += absoff
    return (diag - radius).min(axis=0), (diag + radius).max(axis=0)


def _off_squared(diag, offdiag):
    off2 = np.square(np.asarray(offdiag, dtype=float))
    if off2.ndim == 1 and diag.ndim > 1:
        off2 = off2.reshape(off2.shape + (1,) * (diag.ndim - 1))
    return off2


def _sturm_sweep(diag, off2, shifts):
    # Pivots q_i = d_i - x - e_{i-1}^2 / q_{i-1}; #negative pivots = #eig < x.
    # A zero pivot is nudged to +PIVOT_FLOOR, i.e. the shift is moved
    # infinitesimally down, so exact hits are not counted (strictly below).
    n = diag.shape[0]
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        q = np.array(diag[0] - shifts, dtype=float, ndmin=1)
        q[np.abs(q) < PIVOT_FLOOR] = PIVOT_FLOOR
        count = (q < 0).astype(np.int64)
        for i in range(1, n):
            q = diag[i] - shifts - off2[i - 1] / q
            q[np.abs(q) < PIVOT_FLOOR] = PIVOT_FLOOR
            count += q < 0
    return count


def batched_sturm_count(diag, offdiag, shifts) -> np.ndarray:
    """Number of eigenvalues strictly below each shift, for many matrices.

    Parameters
    ----------
    diag : ndarray, shape (N,) or (N, B)
        Diagonals, one column per matrix.
    offdiag : ndarray, shape (N - 1,) or (N - 1, B)
        Off-diagonals, shared or one column per matrix.
    shifts : ndarray
        Any shape broadcastable against ``diag[0]``; e.g. ``(B,)`` or
        ``(K, B)`` for K shifts per matrix.
    """
    diag = np.asarray(diag, dtype=float)
    shifts = np.asarray(shifts, dtype=float)
    count = _sturm_sweep(diag, _off_squared(diag, offdiag), shifts)
    return count.reshape(np.broadcast_shapes(diag.shape[1:], shifts.shape))


def sturm_count(T: TridiagonalMatrix, x):
    """Number of eigenvalues of ``T`` strictly below ``x``.

    ``x`` may be a scalar (an ``int`` is returned) or an array of shifts.
    """
    xs = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xs)):
        raise ValueError("sturm_count needs finite shifts")
    count = batched_sturm_count(T.diag, T.offdiag, xs)
    return int(count) if xs.ndim == 0 else count


def _default_tol(lo, hi):
    return DEFAULT_RELTOL * np.maximum(1.0, np.maximum(np.abs(lo), np.abs(hi)))


def _bisect(diag, off2, index, lo, hi, tol):
    # Each lane stops on its own tolerance so results do not depend on
    # which other lanes share the sweep.
    index, lo, hi, tol = np.broadcast_arrays(index, lo, hi, tol)
    lo = lo.astype(float)
    hi = hi.astype(float)
    while True:
        mid = 0.5 * (lo + hi)
        active = ((hi - lo) > tol) & (mid > lo) & (mid < hi)
        if not active.any():
            break
        below = _sturm_sweep(diag, off2, mid) <= index
        lo = np.where(active & below, mid, lo)
        hi = np.where(active & ~below, mid, hi)
    return 0.5 * (lo + hi)


def batched_top_eigenvalues(diag, offdiag, k: int = 1, tol=None) -> np.ndarray:
    """Top ``k`` eigenvalues of each matrix in a batch, descending.

    ``diag`` has shape ``(N, B)``; returns shape ``(B, k)``. ``tol`` defaults
    to ``1e-10 * max(1, spectral radius bound)`` per matrix.
    """
    diag = np.asarray(diag, dtype=float)
    if diag.ndim == 1:
        diag = diag[:, None]
    n = diag.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    lo, hi = gershgorin_bounds(diag, offdiag)
    # Widen by a hair so the ends are strict brackets.
    pad = 1e-12 * np.maximum(1.0, np.maximum(np.abs(lo), np.abs(hi)))
    lo, hi = lo - pad, hi + pad
    if tol is None:
        tol = _default_tol(lo, hi)
    index = (n - 1 - np.arange(k))[:, None]
    vals = _bisect(diag, _off_squared(diag, offdiag), index, lo, hi, tol)
    return vals.T


def top_k_eigenvalues(T: TridiagonalMatrix, k: int, tol: float | None = None) -> np.ndarray:
    """Largest ``k`` eigenvalues of ``T`` by Sturm bisection, descending."""
    if not 1 <= k <= T.n:
        raise ValueError(f"k must lie in [1, {T.n}], got {k}")
    if tol is not None and not tol > 0:
        raise ValueError("tol must be positive")
    return batched_top_eigenvalues(T.diag[:, None], T.offdiag, k, tol)[0]


def dense_eigenvalues(T: TridiagonalMatrix, cap: int = DENSE_CAP) -> np.ndarray:
    """Full spectrum from a dense symmetric eigensolver, descending.

    This is the reference the bisection path is checked against, so it
    deliberately goes through LAPACK's dense driver rather than any Sturm
    based routine.
    """
    if T.n > cap:
        raise ValueError(f"N = {T.n} exceeds the dense cap {cap}")
    return np.linalg.eigvalsh(T.to_dense())[::-1]


def tridiagonal_solve(T: TridiagonalMatrix, shift: float, rhs, pivot_tol: float = 1e-13):
    """Solve ``(shift * I - T) y = rhs`` by an unpivoted LDL^T sweep.

    Meant for ``shift`` above the spectrum of ``T``, where the system is
    positive definite and no pivoting is needed. ``rhs`` may have shape
    ``(N,)`` or ``(N, m)``.

    Raises
    ------
    NearSingularError
        If a pivot falls below ``pivot_tol`` times the matrix scale.
    """
    b = np.asarray(rhs, dtype=float)
    n = T.n
    if b.shape[0] != n:
        raise ValueError(f"rhs has {b.shape[0]} rows, expected {n}")
    a = shift - T.diag
    e = T.offdiag
    scale = max(1.0, float(np.max(np.abs(a))) + 2.0 * float(np.max(np.abs(e), initial=0.0)))
    floor = pivot_tol * scale

    piv = np.empty(n)
    z = np.empty_like(b)
    piv[0] = a[0]
    z[0] = b[0]
    for i in range(1, n):
        if abs(piv[i - 1]) < floor:
            raise NearSingularError(f"pivot {i - 1} = {piv[i - 1]:.3e} below {floor:.3e}")
        m = e[i - 1] / piv[i - 1]
        piv[i] = a[i] - m * e[i - 1]
        z[i] = b[i] + m * z[i - 1]
    if abs(piv[n - 1]) < floor:
        raise NearSingularError(f"pivot {n - 1} = {piv[n - 1]:.3e} below {floor:.3e}")
    y = np.empty_like(b)
    y[n - 1] = z[n - 1] / piv[n - 1]
    for i in range(n - 2, -1, -1):
        y[i] = (z[i] + e[i] * y[i + 1]) / piv[i]
    return y


def laplacian_resolvent_entry(n: int, sp: SpectralParameter | float, i, j):
    """Entry ``(i, j)`` (1-based) of ``(lam I - H_n)^{-1}`` for the free Laplacian.

    The textbook form is a ratio of hyperbolic cosines and sines of arguments
    up to ``(n + 1) * lambda_star``, which overflows for n of a few hundred.
    Dividing through by ``exp((n + 1) * lambda_star)`` gives

        exp(-|i-j| s) (1 - exp(-(A - |B|) s)) (1 - exp(-(A + |B|) s))
        -------------------------------------------------------------
                   2 sinh(s) (1 - exp(-2 L s))

    with ``L = n + 1``, ``A = L - |i - j|``, ``B = L - i - j``, ``s = lambda_star``;
    every exponent is non-positive. Accepts array ``i``/``j`` (broadcast).
    """
    if not isinstance(sp, SpectralParameter):
        sp = SpectralParameter(float(sp))
    i = np.asarray(i)
    j = np.asarray(j)
    if np.any(i < 1) or np.any(i > n) or np.any(j < 1) or np.any(j > n):
        raise ValueError(f"indices must lie in [1, {n}]")
    s = sp.lambda_star
    big_l = n + 1
    dist = np.abs(i - j)
    a = big_l - dist
    b = np.abs(big_l - i - j)
    num = np.exp(-dist * s) * -np.expm1(-(a - b) * s) * -np.expm1(-(a + b) * s)
    den = 2.0 * math.sinh(s) * -math.expm1(-2.0 * big_l * s)
    out = num / den
    return float(out) if out.ndim == 0 else out
