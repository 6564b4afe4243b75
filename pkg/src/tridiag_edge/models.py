"""Random operators: the decaying-disorder Laplacian H, the G model and its
beta-ensemble relative, Haar rotations, and finite-rank spiked spectra.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .laws import PotentialLaw, RandomStream, as_generator, sample, sample_chi
from .tridiag import DEFAULT_RELTOL, TridiagonalMatrix, tridiagonal_solve

__all__ = [
    "DENSE_CAP",
    "LOW_RANK_CAP",
    "ConvergenceError",
    "LowRankSpectrum",
    "ModelKind",
    "ModelSpec",
    "SpikeProfile",
    "build_G_beta",
    "build_G_dense",
    "build_G_inf",
    "build_H",
    "g_inf_eigh",
    "haar_columns",
    "sample_haar_orthogonal",
    "secular_determinant_G",
    "spiked_G_dense",
    "spiked_G_top_eigenvalue",
]

DENSE_CAP = 2000
LOW_RANK_CAP = 64

# Substream layout inside one trial's RandomStream.
POTENTIALS, HAAR, BASE = 0, 1, 2


class ConvergenceError(RuntimeError):
    pass


class ModelKind(str, Enum):
    H = "H"
    G = "G"
    G_BETA = "Gbeta"


@dataclass(frozen=True)
class ModelSpec:
    """Everything needed to draw one random operator.

    ``seed`` addresses the draw; Monte Carlo drivers replace its
    ``stream_id`` by the trial index.
    """

    kind: ModelKind
    N: int
    alpha: float
    law: PotentialLaw
    seed: RandomStream = RandomStream()
    beta_ens: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise ValueError(f"alpha must be nonnegative, got {self.alpha}")
        if not self.beta_ens > 0:
            raise ValueError(f"beta_ens must be positive, got {self.beta_ens}")

    def for_trial(self, trial: int) -> "ModelSpec":
        return ModelSpec(self.kind, self.N, self.alpha, self.law, self.seed.child(trial), self.beta_ens)

    def potentials(self) -> np.ndarray:
        """The scaled diagonal ``N^-alpha a(i)``."""
        raw = sample(self.law, self.seed.generator(POTENTIALS), self.N)
        return raw * float(self.N) ** -self.alpha


@dataclass(frozen=True)
class SpikeProfile:
    """A deterministic diagonal profile and its extreme-value summary."""

    values: np.ndarray
    cutoff_c: float = 0.25
    M1: float = field(init=False)
    M2: float = field(init=False)
    gap: float = field(init=False)
    argmax: int = field(init=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        if vals.size < 1:
            raise ValueError("empty spike profile")
        if not 0 < self.cutoff_c < 1:
            raise ValueError("cutoff_c must lie in (0, 1)")
        vals.setflags(write=False)
        am = int(np.argmax(vals))
        m1 = float(vals[am])
        m2 = float(np.max(np.delete(vals, am))) if vals.size > 1 else -math.inf
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "argmax", am)
        object.__setattr__(self, "M1", m1)
        object.__setattr__(self, "M2", m2)
        object.__setattr__(self, "gap", m1 - m2)

    @classmethod
    def planted(cls, n: int, heights, positions=None, cutoff_c: float = 0.25) -> "SpikeProfile":
        """Zero profile with ``heights`` planted at ``positions`` (default: middle)."""
        heights = np.atleast_1d(np.asarray(heights, dtype=float))
        if positions is None:
            positions = [n // 2]
        vals = np.zeros(n)
        vals[np.asarray(positions, dtype=int)] = heights
        return cls(vals, cutoff_c)

    @property
    def N(self) -> int:
        return self.values.size


def build_H(spec: ModelSpec) -> TridiagonalMatrix:
    """Free Laplacian plus the scaled random diagonal of ``spec``."""
    if spec.kind is not ModelKind.H:
        raise ValueError(f"build_H needs an H model, got {spec.kind.value}")
    return TridiagonalMatrix(spec.potentials(), np.ones(spec.N - 1))


@functools.lru_cache(maxsize=8)
def _g_inf_offdiag(n: int) -> np.ndarray:
    k = np.arange(1, n)
    off = np.sqrt((n - k) / n)
    off.setflags(write=False)
    return off


def build_G_inf(n: int) -> TridiagonalMatrix:
    """Zero diagonal with off-diagonal ``sqrt((N - k) / N)``, k = 1..N-1."""
    if n < 2:
        raise ValueError("N must be at least 2")
    return TridiagonalMatrix(np.zeros(n), _g_inf_offdiag(n))


@functools.lru_cache(maxsize=4)
def g_inf_eigh(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Cached eigen-decomposition ``(mu ascending, Q)`` of ``G_inf``."""
    from scipy.linalg import eigh_tridiagonal

    mu, q = eigh_tridiagonal(np.zeros(n), _g_inf_offdiag(n))
    mu.setflags(write=False)
    q.setflags(write=False)
    return mu, q


def build_G_beta(n: int, beta_ens: float, stream) -> TridiagonalMatrix:
    """Dumitriu-Edelman tridiagonal model scaled to have spectrum near [-2, 2].

    Diagonal N(0, 2), off-diagonal chi_{(N-k) beta}, all divided by
    ``sqrt(N beta)``.
    """
    if not beta_ens > 0:
        raise ValueError("beta_ens must be positive")
    rng = as_generator(stream)
    norm = math.sqrt(n * beta_ens)
    diag = rng.normal(0.0, math.sqrt(2.0), n) / norm
    dof = (n - np.arange(1, n)) * beta_ens
    off = np.atleast_1d(sample_chi(rng, dof)) / norm
    return TridiagonalMatrix(diag, off)


def haar_columns(n: int, r: int, stream) -> np.ndarray:
    """First ``r`` columns of a Haar orthogonal ``n x n`` matrix.

    QR of a Gaussian matrix with the sign of each ``R_kk`` pushed into the
    corresponding column of Q. The Gaussians are drawn column by column, so
    for the same stream the result is the leading block of
    ``haar_columns(n, n, stream)``.
    """
    if not 0 <= r <= n:
        raise ValueError(f"r must lie in [0, {n}]")
    rng = as_generator(stream)
    if r == 0:
        return np.zeros((n, 0))
    z = rng.standard_normal((r, n)).T
    q, rr = np.linalg.qr(z)
    q *= np.where(np.diag(rr) < 0, -1.0, 1.0)
    return q


def sample_haar_orthogonal(n: int, stream) -> np.ndarray:
    """Haar distributed ``n x n`` orthogonal matrix."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return haar_columns(n, n, stream)


def _base_matrix(spec: ModelSpec) -> TridiagonalMatrix:
    if spec.kind is ModelKind.G_BETA:
        return build_G_beta(spec.N, spec.beta_ens, spec.seed.generator(BASE))
    return build_G_inf(spec.N)


def build_G_dense(spec: ModelSpec, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense ``G + U Lambda U^T`` for a G (or G-beta) model spec.

    Columns of the Haar matrix are handed out in order of decreasing
    ``|Lambda_i|``; the assignment depends only on Lambda, so the rotation
    stays Haar and the leading columns coincide with the ones the low-rank
    path draws for the same trial.
    """
    if spec.kind is ModelKind.H:
        raise ValueError("build_G_dense needs a G model")
    if spec.N > cap:
        raise ValueError(f"N = {spec.N} exceeds the dense cap {cap}")
    lam = spec.potentials()
    order = np.argsort(-np.abs(lam), kind="stable")
    u = haar_columns(spec.N, spec.N, spec.seed.generator(HAAR))
    a = _base_matrix(spec).to_dense() + (u * lam[order]) @ u.T
    return 0.5 * (a + a.T)


def spiked_G_dense(n: int, spikes, stream) -> np.ndarray:
    """Dense ``G_inf + V diag(spikes) V^T`` with the same V as the low-rank path."""
    spikes = np.atleast_1d(np.asarray(spikes, dtype=float))
    v = haar_columns(n, spikes.size, stream)
    a = build_G_inf(n).to_dense() + (v * spikes) @ v.T
    return 0.5 * (a + a.T)


class LowRankSpectrum:
    """Eigenvalues of ``B + V diag(theta) V^T`` above the top of ``B``.

    ``B`` is given by its eigen-decomposition ``(mu, Q)``. For ``x > max(mu)``
    write ``S(x) = diag(1/theta) - W^T (x - mu)^-1 W`` with ``W = Q^T V``.
    By Haynsworth inertia additivity the number of eigenvalues of the
    perturbed matrix above ``x`` equals ``#neg(S(x)) - #neg(theta)``, a
    monotone counting function that bisection can use like a Sturm count.
    Zero spikes are dropped.
    """

    def __init__(self, mu, q, v, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        keep = theta != 0
        self.mu = np.asarray(mu)
        self.edge = float(self.mu[-1])
        self.theta = theta[keep]
        if self.theta.size > LOW_RANK_CAP:
            raise ValueError(f"rank {self.theta.size} exceeds the low-rank cap {LOW_RANK_CAP}")
        self.w = np.asarray(q).T @ np.asarray(v)[:, keep]
        self._inv_theta = np.diag(1.0 / self.theta)
        self._n_neg = int(np.sum(self.theta < 0))

    @property
    def rank(self) -> int:
        return self.theta.size

    def count_above(self, x: float) -> int:
        s = self._inv_theta - (self.w.T * (1.0 / (x - self.mu))) @ self.w
        return int(np.sum(np.linalg.eigvalsh(s) < 0)) - self._n_neg

    def _bracket(self):
        pos = self.theta[self.theta > 0]
        lo = self.edge + 1e-13 * max(1.0, abs(self.edge))
        hi = self.edge + (float(pos.max()) if pos.size else 0.0) + 1e-9 * max(1.0, abs(self.edge))
        # Weyl puts every outlier below hi; expand anyway in case of roundoff.
        for _ in range(64):
            if self.count_above(hi) == 0:
                return lo, hi
            hi = self.edge + 2.0 * (hi - self.edge)
        raise ConvergenceError("could not bracket the secular roots from above")

    def outliers(self, k: int = 1, tol: float | None = None) -> np.ndarray:
        """Top ``k`` eigenvalues above the base edge; NaN where none remain."""
        out = np.full(k, np.nan)
        if self.rank == 0:
            return out
        lo0, hi0 = self._bracket()
        n_out = self.count_above(lo0)
        if tol is None:
            tol = DEFAULT_RELTOL * max(1.0, abs(hi0))
        for j in range(min(k, n_out)):
            lo, hi = lo0, hi0
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if not lo < mid < hi:
                    break
                if self.count_above(mid) > j:
                    lo = mid
                else:
                    hi = mid
            out[j] = 0.5 * (lo + hi)
        return out

    def top(self, tol: float | None = None) -> float:
        """Largest eigenvalue; the base edge if nothing pops out."""
        val = self.outliers(1, tol)[0]
        return self.edge if np.isnan(val) else float(val)


def spiked_G_top_eigenvalue(n: int, spikes, stream, tol: float | None = None) -> float:
    """Top eigenvalue of ``G_inf + V diag(spikes) V^T`` via the r x r secular problem.

    ``V`` holds ``r = len(spikes)`` Haar orthonormal columns drawn from
    ``stream``. Returns ``max eig(G_inf)`` when no root lies above it.
    """
    spikes = np.atleast_1d(np.asarray(spikes, dtype=float))
    if spikes.size > LOW_RANK_CAP:
        raise ValueError(f"at most {LOW_RANK_CAP} spikes, got {spikes.size}")
    if tol is not None and not tol > 0:
        raise ValueError("tol must be positive")
    mu, q = g_inf_eigh(n)
    v = haar_columns(n, spikes.size, stream)
    return LowRankSpectrum(mu, q, v, spikes).top(tol)


def secular_determinant_G(lam: float, spikes, v, base: TridiagonalMatrix | None = None) -> float:
    """``det(I_r - diag(spikes) V^T (lam I - B)^-1 V)`` with tridiagonal solves.

    ``B`` defaults to ``G_inf`` of matching size. This is the direct form of
    the secular equation, kept as an independent check on
    :class:`LowRankSpectrum`.
    """
    v = np.asarray(v, dtype=float)
    spikes = np.atleast_1d(np.asarray(spikes, dtype=float))
    if base is None:
        base = build_G_inf(v.shape[0])
    y = tridiagonal_solve(base, lam, v)
    m = np.eye(spikes.size) - spikes[:, None] * (v.T @ y)
    return float(np.linalg.det(m))
