"""Monte Carlo engine for the top of the spectrum.

Trial ``t`` of a run draws everything from ``spec.seed.child(t)``, so the
output is a pure function of ``(spec, trials)`` no matter how trials are
chunked or spread over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.linalg import eigh_tridiagonal

from ..laws import FrechetLaw, max_scaled_survival
from ..models import (
    BASE,
    DENSE_CAP,
    HAAR,
    LOW_RANK_CAP,
    LowRankSpectrum,
    ModelKind,
    ModelSpec,
    build_G_beta,
    build_G_dense,
    g_inf_eigh,
    haar_columns,
)
from ..theory import (
    Regime,
    RegimeLabel,
    classify_regime,
    critical_G_cdf,
    critical_H_cdf,
    f_of_lambda,
    subcritical_prefactor_G,
    subcritical_prefactor_H,
)
from ..tridiag import batched_sturm_count, batched_top_eigenvalues

__all__ = [
    "TRUNCATION",
    "TailReport",
    "TrialFailure",
    "exceedance_counts",
    "ks_critical_value",
    "ks_distance",
    "mc_distribution",
    "mc_tail",
    "scale_power",
    "theory_tail",
    "top_eigenvalues",
    "wilson_interval",
]

# Potentials of magnitude below this are dropped on the low-rank G path;
# by Weyl's inequality the top eigenvalue moves by at most this much.
TRUNCATION = 1e-3
CHUNK = 256
Z95 = 1.959963984540054


class TrialFailure(RuntimeError):
    """A solver failure inside one Monte Carlo trial."""

    def __init__(self, trial: int, cause: BaseException):
        super().__init__(f"trial {trial}: {cause}")
        self.trial = trial
        self.cause = cause


def wilson_interval(hits: int, trials: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1 or not 0 <= hits <= trials:
        raise ValueError("need 0 <= hits <= trials and trials >= 1")
    p = hits / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    centre = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    lo = 0.0 if hits == 0 else max(0.0, min(p, centre - half))
    hi = 1.0 if hits == trials else min(1.0, max(p, centre + half))
    return lo, hi


@dataclass(frozen=True)
class TailReport:
    """Empirical ``P(lambda_1 > lambda)`` next to its regime prediction.

    ``theory`` includes the law's tail constant C; ``theory_literal`` drops
    it in the sub-critical regime and equals ``theory`` elsewhere.
    """

    lam: float
    trials: int
    hits: int
    p_hat: float
    ci_low: float
    ci_high: float
    theory: float
    theory_literal: float
    regime: RegimeLabel

    def __post_init__(self):
        if not (0 <= self.hits <= self.trials):
            raise ValueError("hits must lie in [0, trials]")
        if not (0 <= self.ci_low <= self.p_hat <= self.ci_high <= 1):
            raise ValueError("inconsistent confidence interval")

    @property
    def std_error(self) -> float:
        return math.sqrt(max(self.p_hat * (1 - self.p_hat), 1.0 / self.trials) / self.trials)


def scale_power(spec: ModelSpec) -> float:
    """Power p in the natural scaling ``N^p lambda_1``: ``alpha - 1/beta``
    in the randomness-dominating regime and 0 otherwise."""
    reg = classify_regime(spec.law, spec.alpha)
    if reg.kind is Regime.RANDOMNESS_DOMINATING:
        return spec.alpha - 1.0 / reg.beta
    return 0.0


def _chunks(trials: int, chunk: int):
    return [(s, min(s + chunk, trials)) for s in range(0, trials, chunk)]


def _run_chunks(fn, trials: int, workers: int, chunk: int):
    bounds = _chunks(trials, chunk)
    if workers <= 1 or len(bounds) == 1:
        return [fn(a, b) for a, b in bounds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda ab: fn(*ab), bounds))


def _h_diags(spec: ModelSpec, a: int, b: int) -> np.ndarray:
    out = np.empty((spec.N, b - a))
    for j, t in enumerate(range(a, b)):
        out[:, j] = spec.for_trial(t).potentials()
    return out


def _base_eigh(spec: ModelSpec):
    if spec.kind is ModelKind.G_BETA:
        base = build_G_beta(spec.N, spec.beta_ens, spec.seed.generator(BASE))
        return eigh_tridiagonal(base.diag, base.offdiag)
    return g_inf_eigh(spec.N)


def g_trial_top(spec: ModelSpec, k: int = 1, dense_cap: int = DENSE_CAP) -> np.ndarray:
    """Top ``k`` eigenvalues of one G draw (``spec`` already addresses the trial).

    Uses the low-rank secular path when at most ``LOW_RANK_CAP`` potentials
    reach ``TRUNCATION`` and the dense path otherwise. On the low-rank path
    ranks that do not separate from the base spectrum are NaN, except rank 1
    which falls back to the base edge.
    """
    lam = spec.potentials()
    order = np.argsort(-np.abs(lam), kind="stable")
    lam = lam[order]
    r = int(np.sum(np.abs(lam) >= TRUNCATION))
    if r > LOW_RANK_CAP:
        a = build_G_dense(spec, cap=dense_cap)
        return np.linalg.eigvalsh(a)[::-1][:k]
    mu, q = _base_eigh(spec)
    v = haar_columns(spec.N, r, spec.seed.generator(HAAR))
    spec_lr = LowRankSpectrum(mu, q, v, lam[:r])
    out = spec_lr.outliers(k)
    if np.isnan(out[0]):
        out[0] = spec_lr.edge
    return out


def top_eigenvalues(
    spec: ModelSpec, trials: int, k: int = 1, workers: int = 1, chunk: int = CHUNK, tol=None
) -> np.ndarray:
    """Top ``k`` eigenvalues for trials ``0..trials-1``; shape ``(trials, k)``."""
    if trials < 1:
        raise ValueError("trials must be at least 1")

    if spec.kind is ModelKind.H:
        ones = np.ones(spec.N - 1)

        def fn(a, b):
            try:
                return batched_top_eigenvalues(_h_diags(spec, a, b), ones, k, tol)
            except Exception as exc:  # pragma: no cover - solver is total
                raise TrialFailure(a, exc) from exc

    else:

        def fn(a, b):
            rows = []
            for t in range(a, b):
                try:
                    rows.append(g_trial_top(spec.for_trial(t), k))
                except Exception as exc:
                    raise TrialFailure(t, exc) from exc
            return np.array(rows)

    return np.vstack(_run_chunks(fn, trials, workers, chunk))


def exceedance_counts(spec: ModelSpec, lam: float, trials: int, workers: int = 1, chunk: int = CHUNK) -> np.ndarray:
    """Number of eigenvalues above ``lam`` in each H trial (one Sturm sweep each)."""
    if spec.kind is not ModelKind.H:
        raise ValueError("exceedance_counts is for the H model")
    ones = np.ones(spec.N - 1)

    def fn(a, b):
        below = batched_sturm_count(_h_diags(spec, a, b), ones, np.full(b - a, float(lam)))
        return spec.N - below

    return np.concatenate(_run_chunks(fn, trials, workers, chunk))


def _deterministic_top(spec: ModelSpec) -> float:
    v = spec.law.value
    if spec.kind is ModelKind.H:
        return v * spec.N**-spec.alpha + 2 * math.cos(math.pi / (spec.N + 1))
    if spec.kind is ModelKind.G:
        return v * spec.N**-spec.alpha + float(g_inf_eigh(spec.N)[0][-1])
    return math.nan


def theory_tail(spec: ModelSpec, lam: float) -> tuple[float, float, RegimeLabel]:
    """Regime prediction for ``P(lambda_1 > lam)``: ``(with C, literal, regime)``."""
    reg = classify_regime(spec.law, spec.alpha)
    N, is_h = spec.N, spec.kind is ModelKind.H
    if reg.kind is Regime.DETERMINISTIC:
        val = float(_deterministic_top(spec) > lam)
        return val, val, reg
    if lam <= 2:
        return 1.0, 1.0, reg
    if reg.kind is Regime.SUBCRITICAL:
        pref = subcritical_prefactor_H(lam, reg.beta) if is_h else subcritical_prefactor_G(lam, reg.beta)
        lit = N ** (1 - spec.alpha * reg.beta) * pref
        return reg.C * lit, lit, reg
    if reg.kind is Regime.CRITICAL:
        fr = FrechetLaw(reg.C, 1.0 / reg.alpha)
        val = 1.0 - (critical_H_cdf(lam, fr) if is_h else critical_G_cdf(lam, fr))
        return val, val, reg
    if reg.kind is Regime.RANDOMNESS_DOMINATING:
        fr = FrechetLaw(reg.C, reg.beta)
        val = 1.0 - fr.cdf(N ** (spec.alpha - 1.0 / reg.beta) * lam)
        return val, val, reg
    # Weibull tails: the law of the largest scaled potential pushed through the outlier map.
    t = math.sqrt(lam * lam - 4) if is_h else f_of_lambda(lam)
    val = max_scaled_survival(spec.law, N, spec.alpha, t)
    return val, val, reg


def mc_tail(spec: ModelSpec, lam: float, trials: int, workers: int = 1, chunk: int = CHUNK) -> TailReport:
    """Estimate ``P(lambda_1 > lam)`` over ``trials`` independent draws."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not math.isfinite(lam):
        raise ValueError("lambda must be finite")
    if spec.kind is ModelKind.H:
        hits = int(np.sum(exceedance_counts(spec, lam, trials, workers, chunk) > 0))
    else:
        hits = int(np.sum(top_eigenvalues(spec, trials, 1, workers, chunk)[:, 0] > lam))
    lo, hi = wilson_interval(hits, trials)
    theory, literal, reg = theory_tail(spec, lam)
    return TailReport(float(lam), trials, hits, hits / trials, lo, hi, theory, literal, reg)


def mc_distribution(
    spec: ModelSpec, trials: int, power: float | None = None, workers: int = 1, chunk: int = CHUNK
) -> np.ndarray:
    """Top eigenvalue of each trial, multiplied by ``N^power`` (identity if None)."""
    vals = top_eigenvalues(spec, trials, 1, workers, chunk)[:, 0]
    if power is not None and power != 0:
        vals = vals * float(spec.N) ** power
    return vals


def ks_distance(sample, cdf) -> float:
    """Two-sided Kolmogorov-Smirnov statistic of ``sample`` against ``cdf``."""
    return float(stats.kstest(np.asarray(sample, dtype=float), cdf).statistic)


def ks_critical_value(n: int, level: float = 0.05) -> float:
    """Exact two-sided one-sample KS critical value at ``n`` samples."""
    return float(stats.kstwo.ppf(1.0 - level, n))
