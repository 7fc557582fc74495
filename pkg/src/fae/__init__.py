"""Faster amplitude estimation with near-Heisenberg query scaling."""

from ._backend import DEFAULT as BACKEND, HAVE_COMPILED
from .confidence import ConfidenceInterval, atan_ext, atan_error_bound, chernoff
from .errors import DegenerateNuError, DomainError
from .estimator import EstimationResult, EstimatorConfig, run_fae, trace_diagnostics
from .oracle import ProblemSpec, QueryLedger, attenuate, measure_cos, substream

__all__ = [
    "BACKEND", "HAVE_COMPILED", "ConfidenceInterval", "DegenerateNuError", "DomainError",
    "EstimationResult", "EstimatorConfig", "ProblemSpec", "QueryLedger", "atan_error_bound",
    "atan_ext", "attenuate", "chernoff", "measure_cos", "run_fae", "substream",
    "trace_diagnostics",
]
__version__ = "0.1.0"
