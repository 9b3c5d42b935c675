"""Bridge/LASSO-penalized change-point regression and a Monte Carlo lemma harness."""

__version__ = "0.1.0"

from .kernels import BACKEND
from .model import (
    ConfigurationError,
    Dataset,
    NoiseSpec,
    PenaltySpec,
    Segmentation,
    SegmentFit,
    ShapeError,
    TrueModel,
    assumption_diagnostics,
    segment_bounds,
)
from .solvers import SolverSettings, bridge_fit, ols_fit, segment_cost, segment_objective
from .segmentation import SegmentationConfig, exhaustive_oracle, fit_known_k, total_penalized_sum
from .simulation import DesignSpec, TwoSegmentSpec, gen_errors, make_two_segment, simulate
from .lemma import (
    ExperimentSummary,
    LemmaRunConfig,
    check_counterexample,
    pooled_estimate,
    pooled_objective,
    run_boundedness_experiment,
    run_rate_experiment,
    t_n,
    t_n_s,
    z_n,
    z_n_s,
)
