"""Extreme eigenvalues as point processes, and Poisson goodness-of-fit."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..laws import as_generator
from ..models import ModelKind, ModelSpec
from ..theory import Regime, RegimeLabel, classify_regime, poisson_intensity_integral
from ..tridiag import _bisect, _off_squared, batched_sturm_count, gershgorin_bounds
from .montecarlo import CHUNK, TrialFailure, _h_diags, _run_chunks, g_trial_top, scale_power

__all__ = [
    "IntervalFit",
    "PointProcessSample",
    "extract_point_process",
    "extract_point_processes",
    "poisson_fit_test",
    "sample_poisson_process",
]


@dataclass(frozen=True)
class PointProcessSample:
    """Scaled top eigenvalues of one draw, strictly descending.

    ``preimages`` (critical H regime) holds ``sqrt(x^2 - 4)`` of each point,
    the values whose limit is a Poisson process.
    """

    points: np.ndarray
    scaling: float
    N: int
    preimages: np.ndarray | None = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).ravel()
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        if pts.size > 1 and not np.all(np.diff(pts) < 0):
            raise ValueError("points must be strictly descending")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.preimages is not None:
            pre = np.array(self.preimages, dtype=float).ravel()
            pre.setflags(write=False)
            object.__setattr__(self, "preimages", pre)

    @property
    def test_points(self) -> np.ndarray:
        """Points on the scale where the Poisson limit lives."""
        return self.points if self.preimages is None else self.preimages


def _make_sample(vals: np.ndarray, power: float, n: int, critical_h: bool) -> PointProcessSample:
    pre = np.sqrt(np.maximum(vals * vals - 4.0, 0.0)) if critical_h else None
    return PointProcessSample(vals, power, n, pre)


def _h_top_above(diag: np.ndarray, k: int, thr: float) -> list[np.ndarray]:
    """Eigenvalues above ``thr`` (at most ``k``) for each column of ``diag``."""
    n, b = diag.shape
    ones = np.ones(n - 1)
    above = n - batched_sturm_count(diag, ones, np.full(b, thr))
    kk = int(min(k, above.max(initial=0)))
    if kk == 0:
        return [np.empty(0) for _ in range(b)]
    _, hi = gershgorin_bounds(diag, ones)
    hi = hi + 1e-12 * np.maximum(1.0, np.abs(hi))
    lo = np.full(b, thr)
    tol = 1e-10 * np.maximum(1.0, np.abs(hi))
    index = (n - 1 - np.arange(kk))[:, None]
    vals = _bisect(diag, _off_squared(diag, ones), index, lo, hi, tol).T
    return [vals[j, : min(kk, int(above[j]))] for j in range(b)]


def extract_point_processes(
    spec: ModelSpec, trials: int, top_d: int, threshold: float, workers: int = 1, chunk: int = CHUNK
) -> list[PointProcessSample]:
    """One :class:`PointProcessSample` per trial.

    Eigenvalues are multiplied by ``N^p`` with ``p`` from :func:`scale_power`
    and only those above ``threshold`` (on the scaled axis) are kept, at most
    ``top_d`` of them.
    """
    if not 1 <= top_d <= spec.N:
        raise ValueError(f"top_d must lie in [1, {spec.N}]")
    power = scale_power(spec)
    factor = float(spec.N) ** power
    reg = classify_regime(spec.law, spec.alpha)
    critical_h = spec.kind is ModelKind.H and reg.kind is Regime.CRITICAL
    thr = threshold / factor

    if spec.kind is ModelKind.H:

        def fn(a, b):
            try:
                return _h_top_above(_h_diags(spec, a, b), top_d, thr)
            except Exception as exc:  # pragma: no cover - solver is total
                raise TrialFailure(a, exc) from exc

    else:

        def fn(a, b):
            out = []
            for t in range(a, b):
                try:
                    v = g_trial_top(spec.for_trial(t), top_d)
                except Exception as exc:
                    raise TrialFailure(t, exc) from exc
                out.append(v[v > thr])
            return out

    raw = [v for part in _run_chunks(fn, trials, workers, chunk) for v in part]
    return [_make_sample(v * factor, power, spec.N, critical_h) for v in raw]


def extract_point_process(spec: ModelSpec, top_d: int, threshold: float) -> PointProcessSample:
    """Point-process sample of the single draw addressed by ``spec.seed``."""
    if not 1 <= top_d <= spec.N:
        raise ValueError(f"top_d must lie in [1, {spec.N}]")
    power = scale_power(spec)
    factor = float(spec.N) ** power
    reg = classify_regime(spec.law, spec.alpha)
    thr = threshold / factor
    if spec.kind is ModelKind.H:
        vals = _h_top_above(spec.potentials()[:, None], top_d, thr)[0]
    else:
        vals = g_trial_top(spec, top_d)
        vals = vals[vals > thr]
    return _make_sample(vals * factor, power, spec.N, spec.kind is ModelKind.H and reg.kind is Regime.CRITICAL)


def sample_poisson_process(regime: RegimeLabel, c: float, d: float, stream) -> np.ndarray:
    """Points on ``(c, d)`` of the limiting Poisson process, descending."""
    if regime.kind is Regime.CRITICAL:
        k = 1.0 / regime.alpha
    elif regime.kind is Regime.RANDOMNESS_DOMINATING:
        k = regime.beta
    else:
        raise ValueError(f"no Poisson limit in the {regime.kind.value} regime")
    rng = as_generator(stream)
    n = rng.poisson(poisson_intensity_integral(regime, c, d))
    # Invert the normalised mass x -> (c^-k - x^-k) / (c^-k - d^-k).
    lo = c**-k
    hi = 0.0 if math.isinf(d) else d**-k
    u = rng.random(n)
    return np.sort((lo - u * (lo - hi)) ** (-1.0 / k))[::-1]


@dataclass(frozen=True)
class IntervalFit:
    interval: tuple[float, float]
    mean: float
    variance: float
    expected: float
    chi2_p: float

    @property
    def dispersion(self) -> float:
        """Variance over mean; 1 for a Poisson count."""
        return self.variance / self.mean if self.mean > 0 else math.nan


def _chi2_poisson(counts: np.ndarray, mu: float) -> float:
    n = counts.size
    if mu <= 0:
        return 1.0 if np.all(counts == 0) else 0.0
    kmax = int(max(counts.max(), stats.poisson.ppf(1 - 1e-12, mu))) + 1
    probs = stats.poisson.pmf(np.arange(kmax), mu)
    probs[-1] += stats.poisson.sf(kmax - 1, mu)
    obs = np.bincount(np.minimum(counts, kmax - 1), minlength=kmax).astype(float)
    # Merge bins from the right until every expected count reaches 5.
    e_bins, o_bins = [], []
    e_acc = o_acc = 0.0
    for e, o in zip(n * probs[::-1], obs[::-1]):
        e_acc += e
        o_acc += o
        if e_acc >= 5:
            e_bins.append(e_acc)
            o_bins.append(o_acc)
            e_acc = o_acc = 0.0
    if e_bins:
        e_bins[-1] += e_acc
        o_bins[-1] += o_acc
    if len(e_bins) < 2:
        return 1.0
    return float(stats.chisquare(o_bins, e_bins).pvalue)


def poisson_fit_test(samples, intervals, regime: RegimeLabel) -> list[IntervalFit]:
    """Compare per-interval counts with Poisson laws of the limiting intensity.

    Counts use :attr:`PointProcessSample.test_points`. Each interval gets the
    empirical mean and variance of its count, the expected count, and a
    chi-square p-value on Poisson bins merged to expected size at least 5.
    """
    ivs = sorted((float(c), float(d)) for c, d in intervals)
    for c, d in ivs:
        if not 0 < c < d:
            raise ValueError(f"bad interval ({c}, {d})")
    for (c1, d1), (c2, _) in zip(ivs, ivs[1:]):
        if c2 < d1:
            raise ValueError("intervals overlap")
    pts = [s.test_points for s in samples]
    out = []
    for c, d in [(float(c), float(d)) for c, d in intervals]:
        counts = np.array([np.sum((p > c) & (p <= d)) for p in pts], dtype=int)
        mu = poisson_intensity_integral(regime, c, d)
        var = float(counts.var(ddof=1)) if counts.size > 1 else 0.0
        out.append(IntervalFit((c, d), float(counts.mean()), var, mu, _chi2_poisson(counts, mu)))
    return out
