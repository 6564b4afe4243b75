"""Deterministic edge predictions: outlier maps, rate functions, limit CDFs,
the diagonal secular product for spiked Laplacians, and regime bookkeeping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate

from .laws import FrechetLaw, LawKind, PotentialLaw, frechet_cdf
from .models import SpikeProfile
from .tridiag import laplacian_resolvent_entry

__all__ = [
    "Regime",
    "RegimeLabel",
    "SpikeCheck",
    "arcsine_left_gap",
    "check_spike_assumptions",
    "classify_regime",
    "critical_G_cdf",
    "critical_H_cdf",
    "f_of_lambda",
    "poisson_intensity_integral",
    "predict_G_top",
    "predict_H_top",
    "rate_G",
    "rate_H",
    "secular_determinant_H",
    "secular_roots_H",
    "subcritical_prefactor_G",
    "subcritical_prefactor_H",
]


def _need_above_two(lam):
    if not lam > 2:
        raise ValueError(f"lambda must exceed 2, got {lam}")


def predict_H_top(M: float) -> float:
    """Outlier ``sqrt(M^2 + 4)`` created by an isolated diagonal spike ``M > 0``."""
    if not M > 0:
        raise ValueError(f"M must be positive, got {M}")
    return math.hypot(M, 2.0)


def predict_G_top(M: float) -> float:
    """BBP map: ``M + 1/M`` for ``M >= 1`` and 2 below."""
    if not M >= 0:
        raise ValueError(f"M must be nonnegative, got {M}")
    return M + 1.0 / M if M >= 1 else 2.0


def f_of_lambda(lam: float) -> float:
    """The root ``f >= 1`` of ``f + 1/f = lam``."""
    if not lam >= 2:
        raise ValueError(f"lambda must be at least 2, got {lam}")
    return 0.5 * (lam + math.sqrt((lam - 2.0) * (lam + 2.0)))


def rate_H(lam: float, C: float, beta: float) -> float:
    """``C (lam^2 - 4)^(beta/2)``, the upper-tail speed of the H model."""
    _need_above_two(lam)
    return C * ((lam - 2.0) * (lam + 2.0)) ** (0.5 * beta)


def rate_G(lam: float, C: float, beta: float) -> float:
    """``C f(lam)^beta``, the upper-tail speed of the G model."""
    _need_above_two(lam)
    return C * f_of_lambda(lam) ** beta


def subcritical_prefactor_H(lam: float, beta: float) -> float:
    """``(lam^2 - 4)^(-beta/2)``; multiply by the law's C for the tail limit."""
    _need_above_two(lam)
    return ((lam - 2.0) * (lam + 2.0)) ** (-0.5 * beta)


def subcritical_prefactor_G(lam: float, beta: float) -> float:
    """``f(lam)^-beta``; multiply by the law's C for the tail limit."""
    _need_above_two(lam)
    return f_of_lambda(lam) ** -beta


def critical_H_cdf(x, f: FrechetLaw):
    """CDF of ``sqrt(xi^2 + 4)`` with ``xi ~ f``."""
    x = np.asarray(x, dtype=float)
    arg = np.sqrt(np.maximum(x * x - 4.0, 0.0))
    out = np.where(x > 2, frechet_cdf(f, arg), 0.0)
    return float(out) if out.ndim == 0 else out


def critical_G_cdf(x, f: FrechetLaw):
    """CDF of the BBP image of ``xi ~ f``: an atom ``F(1)`` at 2, then ``F(f(x))``."""
    x = np.asarray(x, dtype=float)
    xx = np.maximum(x, 2.0)
    fx = 0.5 * (xx + np.sqrt((xx - 2.0) * (xx + 2.0)))
    out = np.where(x >= 2, frechet_cdf(f, fx), 0.0)
    return float(out) if out.ndim == 0 else out


def _active(profile: SpikeProfile, n: int):
    vals = profile.values
    idx = np.flatnonzero(np.abs(vals) >= float(n) ** -profile.cutoff_c)
    return idx, vals[idx]


def secular_determinant_H(lam: float, profile: SpikeProfile, n: int | None = None) -> float:
    """Diagonal approximation ``prod_i (1 - lambda_i R_ii(lam))`` of the secular determinant.

    Only sites with ``|lambda_i| >= N^-c`` enter the product; ``R`` is the
    exact resolvent of the free Laplacian.
    """
    _need_above_two(lam)
    n = profile.N if n is None else n
    if n != profile.N:
        raise ValueError(f"profile has {profile.N} entries, expected {n}")
    idx, vals = _active(profile, n)
    if idx.size == 0:
        return 1.0
    r = laplacian_resolvent_entry(n, lam, idx + 1, idx + 1)
    return float(np.prod(1.0 - vals * r))


def secular_roots_H(profile: SpikeProfile, tol: float = 1e-12) -> np.ndarray:
    """All roots above 2 of :func:`secular_determinant_H`, descending.

    Each factor ``1 - lambda_i R_ii(lam)`` is strictly increasing in ``lam``
    for ``lambda_i > 0`` (``R_ii`` decreases to 0), so it has at most one root
    above 2, found by bisection on ``(2, 2 + lambda_i + 1]``.
    """
    n = profile.N
    idx, vals = _active(profile, n)
    roots = []
    for i, m in zip(idx, vals):
        if m <= 0:
            continue
        g = lambda x: 1.0 - m * laplacian_resolvent_entry(n, x, i + 1, i + 1)  # noqa: E731
        lo, hi = 2.0 + 1e-14, 2.0 + m + 1.0
        if g(lo) >= 0:
            continue
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if not lo < mid < hi:
                break
            if g(mid) < 0:
                lo = mid
            else:
                hi = mid
        roots.append(0.5 * (lo + hi))
    return np.sort(np.array(roots))[::-1]


@dataclass(frozen=True)
class SpikeCheck:
    passed: bool
    violations: tuple = ()
    argmax_in_bulk: bool = True

    def __bool__(self):
        return self.passed


def check_spike_assumptions(profile: SpikeProfile, n: int | None = None, m_bound: float = 1e6) -> SpikeCheck:
    """Check the structural conditions under which outliers follow ``sqrt(M^2+4)``.

    (i) unique maximum with positive gap and bounded ``M``; (ii) no two sites
    closer than ``N^(2c)`` that both exceed ``N^-c``; (iii) at most
    ``N^(1.5c)`` such sites. Violated clause labels are returned.
    """
    n = profile.N if n is None else n
    c = profile.cutoff_c
    bad = []
    if not (profile.gap > 0 and 0 < profile.M1 <= m_bound):
        bad.append("i")
    idx, _ = _active(profile, n)
    if idx.size > 1 and np.min(np.diff(idx)) < float(n) ** (2 * c):
        bad.append("ii")
    if idx.size > float(n) ** (1.5 * c):
        bad.append("iii")
    margin = float(n) ** (2 * c)
    in_bulk = margin <= profile.argmax < n - margin
    return SpikeCheck(not bad, tuple(bad), bool(in_bulk))


def _arcsine_gap_closed(l1: float) -> float:
    # Antiderivative in theta (x = 2 sin theta) of (2 sin theta - l1)^2 / pi.
    def prim(t):
        return 2 * t - math.sin(2 * t) + 4 * l1 * math.cos(t) + l1 * l1 * t

    return (prim(math.pi / 2) - prim(math.asin(l1 / 2))) / math.pi


def arcsine_left_gap(lambda1: float) -> float:
    """``int_{lambda1}^2 (x - lambda1)^2 / (pi sqrt(4 - x^2)) dx``.

    Evaluated by adaptive quadrature after ``x = 2 sin theta`` removes the
    edge singularity. For ``lambda1 < -2`` the squared distance to the
    support, ``(-2 - lambda1)^2``, is returned instead.
    """
    l1 = float(lambda1)
    if l1 < -2:
        return (-2.0 - l1) ** 2
    if l1 >= 2:
        return 0.0
    val, _ = integrate.quad(
        lambda t: (2.0 * math.sin(t) - l1) ** 2 / math.pi,
        math.asin(l1 / 2.0),
        math.pi / 2,
        epsabs=1e-13,
        epsrel=1e-12,
    )
    return val


class Regime(str, Enum):
    WEIBULL_LD = "WeibullLD"
    SUBCRITICAL = "SubCritical"
    CRITICAL = "Critical"
    RANDOMNESS_DOMINATING = "RandomnessDominating"
    DETERMINISTIC = "Deterministic"


@dataclass(frozen=True)
class RegimeLabel:
    kind: Regime
    C: float = 1.0
    beta: float = 1.0
    alpha: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Regime(self.kind))
        ab = self.alpha * self.beta
        if self.kind is Regime.SUBCRITICAL and not ab > 1:
            raise ValueError("sub-critical regime needs alpha*beta > 1")
        if self.kind is Regime.CRITICAL and not math.isclose(ab, 1.0, rel_tol=1e-12):
            raise ValueError("critical regime needs beta = 1/alpha")
        if self.kind is Regime.RANDOMNESS_DOMINATING and not ab < 1:
            raise ValueError("randomness-dominating regime needs beta < 1/alpha")

    def __str__(self):
        return f"{self.kind.value}(C={self.C!r},beta={self.beta!r},alpha={self.alpha!r})"


def classify_regime(law: PotentialLaw, alpha: float) -> RegimeLabel:
    """Regime of the right tail of ``law`` under decay exponent ``alpha``."""
    tail = law.right_tail
    if tail is None:
        return RegimeLabel(Regime.DETERMINISTIC, 0.0, 1.0, alpha)
    C, beta = tail
    base = law.inner if law.kind is LawKind.SIGNED else law
    if base.kind is LawKind.WEIBULL:
        return RegimeLabel(Regime.WEIBULL_LD, C, beta, alpha)
    ab = alpha * beta
    if math.isclose(ab, 1.0, rel_tol=1e-12):
        return RegimeLabel(Regime.CRITICAL, C, beta, alpha)
    if ab > 1:
        return RegimeLabel(Regime.SUBCRITICAL, C, beta, alpha)
    return RegimeLabel(Regime.RANDOMNESS_DOMINATING, C, beta, alpha)


def poisson_intensity_integral(regime: RegimeLabel, c: float, d: float = math.inf) -> float:
    """Expected number of limit points in ``(c, d)``.

    Critical: intensity ``C / (alpha x^(1/alpha + 1))``; randomness
    dominating: ``C beta / x^(beta + 1)``.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    if not d > c:
        raise ValueError("d must exceed c")
    if regime.kind is Regime.CRITICAL:
        k = 1.0 / regime.alpha
    elif regime.kind is Regime.RANDOMNESS_DOMINATING:
        k = regime.beta
    else:
        raise ValueError(f"no Poisson limit in the {regime.kind.value} regime")
    upper = 0.0 if math.isinf(d) else d**-k
    return regime.C * (c**-k - upper)
