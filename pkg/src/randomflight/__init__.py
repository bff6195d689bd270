"""Planar random flights: distance algebra, reproducible Monte Carlo
estimators, quadrature oracles and statistical verification suites."""

from .distributions import (
    Constant,
    Exponential,
    LogNormal,
    StepDistribution,
    TwoPoint,
    UniformInterval,
    parse_distribution,
    quantile,
    sample_length,
)
from .errors import DomainError, HypothesisError, UsageError
from .geometry import (
    TriangleSides,
    combine_pair,
    interior_angles,
    triangle_event_probability,
    walk_distance,
)
from .montecarlo import (
    ComparisonSpec,
    DistanceSource,
    Draw,
    ProportionEstimate,
    Walk,
    WalkSpec,
    estimate_dominance_probability,
    estimate_farther_probability,
    estimate_return_probability,
    sample_source,
    simulate_walk_distance,
    wilson_interval,
)
from .oracles import (
    QuadratureConfig,
    exact_farther_probability,
    exact_return_probability,
    quadrature_farther_probability,
    quadrature_return_probability,
)
from .streams import RandomStream, StreamSeed, derive_stream, sample_angle
from .verification import (
    CheckResult,
    SuiteReport,
    render_report,
    run_additivity_suite,
    run_lemma_suite,
    run_rayleigh_suite,
    run_theorem_suite,
)

__version__ = "0.1.0"
