"""Monte Carlo, point-process, transport and sweep experiments."""

from .montecarlo import (
    TRUNCATION,
    TailReport,
    TrialFailure,
    exceedance_counts,
    ks_critical_value,
    ks_distance,
    mc_distribution,
    mc_tail,
    scale_power,
    theory_tail,
    top_eigenvalues,
    wilson_interval,
)
from .pointprocess import (
    IntervalFit,
    PointProcessSample,
    extract_point_process,
    extract_point_processes,
    poisson_fit_test,
    sample_poisson_process,
)
from .sweeps import RateCheck, SweepRow, planted_spike_sweep, weibull_rate_check
from .transport import (
    Arcsine,
    CouplingReport,
    PointMass,
    ReferenceLaw,
    Semicircle,
    coupling_bound_check,
    empirical_wasserstein2,
    free_laplacian_spectrum,
    wasserstein2,
)

__all__ = [
    "Arcsine",
    "CouplingReport",
    "IntervalFit",
    "PointMass",
    "PointProcessSample",
    "RateCheck",
    "ReferenceLaw",
    "Semicircle",
    "SweepRow",
    "TRUNCATION",
    "TailReport",
    "TrialFailure",
    "coupling_bound_check",
    "empirical_wasserstein2",
    "exceedance_counts",
    "extract_point_process",
    "extract_point_processes",
    "free_laplacian_spectrum",
    "ks_critical_value",
    "ks_distance",
    "mc_distribution",
    "mc_tail",
    "planted_spike_sweep",
    "poisson_fit_test",
    "sample_poisson_process",
    "scale_power",
    "theory_tail",
    "top_eigenvalues",
    "wasserstein2",
    "weibull_rate_check",
]
