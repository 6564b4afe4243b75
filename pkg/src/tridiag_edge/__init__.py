"""Extreme eigenvalues of tridiagonal operators with decaying random potentials.

Submodules
----------
tridiag      Sturm bisection, dense reference solver, tridiagonal solves, free resolvent.
laws         Disorder laws, Frechet limits, seeded counter-based random streams.
models       The H, G and G-beta operators, Haar rotations, spiked spectra.
theory       Outlier maps, rate functions, limit CDFs, secular products, regimes.
experiments  Monte Carlo tails and distributions, point processes, transport.
cli          Configuration-driven command line (``tridiag-edge``).
"""

from .laws import FrechetLaw, PotentialLaw, RandomStream, parse_law
from .models import ModelKind, ModelSpec, SpikeProfile
from .tridiag import SpectralParameter, TridiagonalMatrix

__version__ = "0.1.0"

__all__ = [
    "FrechetLaw",
    "ModelKind",
    "ModelSpec",
    "PotentialLaw",
    "RandomStream",
    "SpectralParameter",
    "SpikeProfile",
    "TridiagonalMatrix",
    "__version__",
    "parse_law",
]
