"""Disorder laws, limit laws and seeded random streams.

Every law satisfies its tail identity exactly (not just up to constants):

* ``weibull(C, beta)``:  P(a > t) = exp(-C t^beta) for t >= 0
* ``pareto(C, beta)``:   P(a > t) = C t^-beta for t >= C^(1/beta), 1 below
* ``constant(v)``:       a = v
* ``signed(law)``:       +/- a sample of ``law`` with probability 1/2 each

Random numbers come from counter-based Philox generators keyed by
``(seed, stream_id, substream)`` so any trial can be regenerated on its own.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "FrechetLaw",
    "LawKind",
    "PotentialLaw",
    "RandomStream",
    "as_generator",
    "cdf",
    "frechet_cdf",
    "frechet_sample",
    "log_max_scaled_survival",
    "log_survival",
    "max_scaled_survival",
    "parse_law",
    "sample",
    "sample_chi",
    "survival",
]

_U64 = 2**64


@dataclass(frozen=True)
class RandomStream:
    """Address of an independent random stream.

    The output of :meth:`generator` is a pure function of
    ``(seed, stream_id, substream)``.
    """

    seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not (isinstance(v, (int, np.integer)) and 0 <= v < _U64):
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {v!r}")

    def generator(self, substream: int = 0) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id), int(substream)))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, stream_id: int) -> "RandomStream":
        return RandomStream(self.seed, stream_id)


def as_generator(stream, substream: int = 0) -> np.random.Generator:
    """Accept a :class:`RandomStream` or an existing ``numpy`` Generator."""
    if isinstance(stream, np.random.Generator):
        return stream
    if isinstance(stream, RandomStream):
        return stream.generator(substream)
    raise TypeError(f"expected RandomStream or numpy Generator, got {type(stream).__name__}")


class LawKind(str, Enum):
    WEIBULL = "weibull"
    PARETO = "pareto"
    CONSTANT = "constant"
    SIGNED = "signed"


@dataclass(frozen=True)
class PotentialLaw:
    """Distribution of the i.i.d. diagonal disorder.

    Use the constructors :meth:`weibull`, :meth:`pareto`, :meth:`constant`
    and :meth:`signed` (or :func:`parse_law`) rather than filling fields.
    """

    kind: LawKind
    C: float = 1.0
    beta: float = 1.0
    value: float = 0.0
    inner: "PotentialLaw | None" = None

    def __post_init__(self):
        object.__setattr__(self, "kind", LawKind(self.kind))
        if self.kind in (LawKind.WEIBULL, LawKind.PARETO):
            if not (math.isfinite(self.C) and self.C > 0):
                raise ValueError(f"tail constant C must be positive, got {self.C}")
            if not (math.isfinite(self.beta) and self.beta > 0):
                raise ValueError(f"tail exponent beta must be positive, got {self.beta}")
        elif self.kind is LawKind.CONSTANT:
            if not math.isfinite(self.value):
                raise ValueError("constant law needs a finite value")
        elif self.inner is None:
            raise ValueError("signed law needs an inner law")

    @classmethod
    def weibull(cls, C: float, beta: float) -> "PotentialLaw":
        return cls(LawKind.WEIBULL, C=float(C), beta=float(beta))

    @classmethod
    def pareto(cls, C: float, beta: float) -> "PotentialLaw":
        return cls(LawKind.PARETO, C=float(C), beta=float(beta))

    @classmethod
    def constant(cls, value: float) -> "PotentialLaw":
        return cls(LawKind.CONSTANT, value=float(value))

    @classmethod
    def signed(cls, inner: "PotentialLaw") -> "PotentialLaw":
        if inner.kind is LawKind.SIGNED:
            return inner
        return cls(LawKind.SIGNED, inner=inner)

    @property
    def right_tail(self) -> "tuple[float, float] | None":
        """``(C, beta)`` of the right tail, or None for a constant law."""
        if self.kind is LawKind.SIGNED:
            base = self.inner.right_tail
            return None if base is None else (0.5 * base[0], base[1])
        if self.kind is LawKind.CONSTANT:
            return None
        return self.C, self.beta

    @property
    def left_tail_constant(self) -> float:
        """Constant of the left tail P(a < -t); zero unless signed."""
        tail = self.right_tail
        return tail[0] if (self.kind is LawKind.SIGNED and tail is not None) else 0.0

    def __str__(self) -> str:
        if self.kind is LawKind.SIGNED:
            return f"signed({self.inner})"
        if self.kind is LawKind.CONSTANT:
            return f"constant({self.value!r})"
        return f"{self.kind.value}({self.C!r},{self.beta!r})"


_CALL = re.compile(r"^\s*([a-z]+)\s*\((.*)\)\s*$", re.S)


def parse_law(text: str) -> PotentialLaw:
    """Parse ``weibull(C,beta)``, ``pareto(C,beta)``, ``constant(v)``, ``signed(<law>)``.

    Case-insensitive; arguments are finite decimal reals.

    Raises
    ------
    ValueError
        On malformed text or out-of-domain parameters.
    """
    m = _CALL.match(text.lower())
    if m is None:
        raise ValueError(f"cannot parse law {text!r}")
    name, body = m.group(1), m.group(2)
    if name == "signed":
        return PotentialLaw.signed(parse_law(body))
    try:
        args = [float(x) for x in body.split(",")]
    except ValueError:
        raise ValueError(f"law arguments must be decimal reals: {text!r}") from None
    if not all(math.isfinite(x) for x in args):
        raise ValueError(f"law arguments must be finite: {text!r}")
    arity = {"weibull": 2, "pareto": 2, "constant": 1}
    if name not in arity:
        raise ValueError(f"unknown law {name!r}")
    if len(args) != arity[name]:
        raise ValueError(f"{name} takes {arity[name]} argument(s), got {len(args)}")
    return getattr(PotentialLaw, name)(*args)


def sample(law: PotentialLaw, stream, n: int) -> np.ndarray:
    """Draw ``n`` i.i.d. values by inversion."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = as_generator(stream)
    if law.kind is LawKind.CONSTANT:
        return np.full(n, law.value)
    if law.kind is LawKind.WEIBULL:
        return (rng.standard_exponential(n) / law.C) ** (1.0 / law.beta)
    if law.kind is LawKind.PARETO:
        u = 1.0 - rng.random(n)  # in (0, 1]
        return (law.C / u) ** (1.0 / law.beta)
    mags = sample(law.inner, rng, n)
    return np.where(rng.random(n) < 0.5, -mags, mags)


def _survival(law, t, strict=True):
    # strict: P(a > t); otherwise P(a >= t). Only atoms tell them apart.
    if law.kind is LawKind.CONSTANT:
        return np.where(law.value > t if strict else law.value >= t, 1.0, 0.0)
    if law.kind is LawKind.WEIBULL:
        tp = np.maximum(t, 0.0)
        return np.where(t < 0, 1.0, np.exp(-law.C * tp**law.beta))
    if law.kind is LawKind.PARETO:
        start = law.C ** (1.0 / law.beta)
        with np.errstate(divide="ignore", over="ignore"):
            tail = law.C * np.maximum(t, start) ** -law.beta
        return np.where(t < start, 1.0, tail)
    # P(X > t) = P(Y > t)/2 + P(Y < -t)/2 and P(Y < -t) = 1 - P(Y >= -t).
    up = _survival(law.inner, t, strict)
    down = 1.0 - _survival(law.inner, -t, not strict)
    return 0.5 * (up + down)


def survival(law: PotentialLaw, t):
    """Exact survival function ``P(a > t)``; vectorised over ``t``."""
    t = np.asarray(t, dtype=float)
    out = _survival(law, t)
    return float(out) if out.ndim == 0 else out


def cdf(law: PotentialLaw, t):
    """``P(a <= t)``, computed without cancellation for Weibull tails."""
    t = np.asarray(t, dtype=float)
    if law.kind is LawKind.WEIBULL:
        tp = np.maximum(t, 0.0)
        out = np.where(t < 0, 0.0, -np.expm1(-law.C * tp**law.beta))
    else:
        out = 1.0 - _survival(law, t)
    return float(out) if np.ndim(out) == 0 else out


def log_survival(law: PotentialLaw, t) -> float:
    """``log P(a > t)`` without underflow for the two tail families."""
    t = float(t)
    if law.kind is LawKind.WEIBULL and t >= 0:
        return -law.C * t**law.beta
    if law.kind is LawKind.PARETO and t >= law.C ** (1.0 / law.beta):
        return math.log(law.C) - law.beta * math.log(t)
    p = survival(law, t)
    return math.log(p) if p > 0 else -math.inf


def max_scaled_survival(law: PotentialLaw, n: int, alpha: float, lam: float) -> float:
    """``P(max_i n^-alpha a(i) > lam) = 1 - (1 - P(a > n^alpha lam))^n``.

    Evaluated as ``-expm1(n log1p(-p))`` so that p down to ~1e-300 keeps
    full relative accuracy.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    p = survival(law, n**alpha * lam)
    if p >= 1.0:
        return 1.0
    return float(-math.expm1(n * math.log1p(-p)))


def log_max_scaled_survival(law: PotentialLaw, n: int, alpha: float, lam: float) -> float:
    """Logarithm of :func:`max_scaled_survival`, valid far past underflow."""
    if n < 1:
        raise ValueError("n must be at least 1")
    lp = log_survival(law, n**alpha * lam)
    if lp == -math.inf:
        return -math.inf
    if lp > -700.0:
        y = n * math.log1p(-math.exp(lp))
        if y < -1e-300:
            return math.log(-math.expm1(y))
    # p underflows: 1 - (1 - p)^n = n p (1 + O(n p)).
    return math.log(n) + lp


@dataclass(frozen=True)
class FrechetLaw:
    """Frechet law with CDF ``exp(-C x^-exponent)`` on ``x > 0``."""

    C: float
    exponent: float

    def __post_init__(self):
        if not (self.C > 0 and self.exponent > 0):
            raise ValueError("Frechet parameters must be positive")

    def cdf(self, x):
        return frechet_cdf(self, x)

    def sample(self, stream, n: int) -> np.ndarray:
        return frechet_sample(self, stream, n)


def frechet_cdf(f: FrechetLaw, x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        out = np.where(x > 0, np.exp(-f.C * np.where(x > 0, x, 1.0) ** -f.exponent), 0.0)
    return float(out) if out.ndim == 0 else out


def frechet_sample(f: FrechetLaw, stream, n: int) -> np.ndarray:
    rng = as_generator(stream)
    return (f.C / rng.standard_exponential(n)) ** (1.0 / f.exponent)


def sample_chi(stream, k, size=None):
    """Chi variates with ``k`` degrees of freedom (``k`` may be an array)."""
    k_arr = np.asarray(k, dtype=float)
    if np.any(k_arr <= 0):
        raise ValueError("chi degrees of freedom must be positive")
    rng = as_generator(stream)
    out = np.sqrt(rng.chisquare(k_arr, size=size))
    return float(out) if np.ndim(out) == 0 else out
