"""Moment-based estimation for two-component mixture regressions.

The estimator recovers the slope of the covariate-driven component, the
mixing proportion, and the component intercept from two weighted moment
regressions, with influence-function standard errors. A Gaussian EM
baseline, scenario generators, and a Monte Carlo harness accompany it.
"""

from . import _kernels
from .asymptotics import AsymptoticSummary, summarize
from .em import GaussianMixFit, em_fit
from .errors import (
    ColumnNotFound,
    DegenerateComponent,
    DegenerateMixture,
    DegenerateWeights,
    DimensionMismatch,
    FileNotFound,
    InvalidBound,
    InvalidData,
    MommixError,
    NonFiniteEvaluation,
    NonIdentifiable,
    ParseError,
    RankDeficient,
)
from .moments import Dataset, MomentFit, fit
from .simulation import (
    MonteCarloReport,
    ScenarioSpec,
    efficiency_bound,
    generate,
    run_study,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticSummary",
    "ColumnNotFound",
    "Dataset",
    "DegenerateComponent",
    "DegenerateMixture",
    "DegenerateWeights",
    "DimensionMismatch",
    "FileNotFound",
    "GaussianMixFit",
    "InvalidBound",
    "InvalidData",
    "MomentFit",
    "MommixError",
    "MonteCarloReport",
    "NonFiniteEvaluation",
    "NonIdentifiable",
    "ParseError",
    "RankDeficient",
    "ScenarioSpec",
    "efficiency_bound",
    "em_fit",
    "fit",
    "generate",
    "run_study",
    "summarize",
    "_kernels",
    "__version__",
]
