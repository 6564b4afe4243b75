"""Deterministic sweeps: planted spikes and the exact Weibull max-statistic."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..laws import PotentialLaw, RandomStream, log_max_scaled_survival
from ..models import SpikeProfile, spiked_G_top_eigenvalue
from ..theory import predict_G_top, predict_H_top, rate_H
from ..tridiag import TridiagonalMatrix, top_k_eigenvalues

__all__ = ["RateCheck", "SweepRow", "planted_spike_sweep", "weibull_rate_check"]


@dataclass(frozen=True)
class SweepRow:
    M: float
    predicted: float
    computed: float
    abs_err: float


def planted_spike_sweep(n: int, m_grid, model: str = "H", stream=None) -> list[SweepRow]:
    """Top eigenvalue against the outlier prediction for single planted spikes.

    H: one diagonal entry ``M`` at the middle site of the free Laplacian.
    G: a rank-one Haar spike ``M v v^T`` on ``G_inf``, every ``M`` using the
    same ``v`` drawn from ``stream``.
    """
    m_grid = np.atleast_1d(np.asarray(m_grid, dtype=float))
    if np.any(m_grid <= 0):
        raise ValueError("spike heights must be positive")
    model = model.upper()
    if model not in ("H", "G"):
        raise ValueError(f"model must be H or G, got {model!r}")
    stream = RandomStream() if stream is None else stream
    rows = []
    for m in map(float, m_grid):
        if model == "H":
            prof = SpikeProfile.planted(n, [m])
            got = float(top_k_eigenvalues(TridiagonalMatrix(prof.values, np.ones(n - 1)), 1)[0])
            pred = predict_H_top(m)
        else:
            got = spiked_G_top_eigenvalue(n, [m], stream)
            pred = predict_G_top(m)
        rows.append(SweepRow(m, pred, got, abs(got - pred)))
    return rows


@dataclass(frozen=True)
class RateCheck:
    N: int
    lam: float
    normalized_log_prob: float
    limit: float

    @property
    def rel_err(self) -> float:
        return abs(self.normalized_log_prob - self.limit) / abs(self.limit)


def weibull_rate_check(C: float, beta: float, alpha: float, lam: float, n: int) -> RateCheck:
    """``log P(max_i N^-alpha a(i) > sqrt(lam^2 - 4)) / N^(alpha beta)`` for
    ``a ~ weibull(C, beta)``, next to its limit ``-rate_H(lam)``."""
    law = PotentialLaw.weibull(C, beta)
    t = math.sqrt(lam * lam - 4.0)
    val = log_max_scaled_survival(law, n, alpha, t) / float(n) ** (alpha * beta)
    return RateCheck(n, lam, val, -rate_H(lam, C, beta))
