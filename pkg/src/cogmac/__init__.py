"""Rate-region bounds, power allocation and Monte-Carlo checks for a
two-user multiple-access channel whose transmitters and receiver are each
switched on or off by primary-user activity."""

__version__ = "0.1.0"

from .bounds import (
    PowerAllocation,
    inner_region,
    max_sum_rate,
    optimal_allocation,
    oracle_max_sum_rate,
    outer1_region,
    outer2_region,
)
from .errors import (
    BracketError,
    ConstraintError,
    DomainError,
    InfeasibleCorrelationError,
    NoTransmissionError,
)
from .estimator import GaussianStrategy, estimate_causal_rates, estimate_state_penalty, sandwich_check
from .fading import FadingParams, GainDistribution, fading_sum_rate, waterfill_threshold
from .geometry import PentagonConstraints, RatePair, RateRegion, contains, hausdorff, pentagon, support
from .musers import MUserModel, is_polymatroid, muser_max_sum_rate
from .prob_model import EventProbs, JointStateDist, ModelParams, TableMode, build_joint, event_probs

__all__ = [
    "__version__",
    "BracketError",
    "ConstraintError",
    "DomainError",
    "EventProbs",
    "FadingParams",
    "GainDistribution",
    "GaussianStrategy",
    "InfeasibleCorrelationError",
    "JointStateDist",
    "ModelParams",
    "MUserModel",
    "NoTransmissionError",
    "PentagonConstraints",
    "PowerAllocation",
    "RatePair",
    "RateRegion",
    "TableMode",
    "build_joint",
    "contains",
    "estimate_causal_rates",
    "estimate_state_penalty",
    "event_probs",
    "fading_sum_rate",
    "hausdorff",
    "inner_region",
    "is_polymatroid",
    "max_sum_rate",
    "muser_max_sum_rate",
    "optimal_allocation",
    "oracle_max_sum_rate",
    "outer1_region",
    "outer2_region",
    "pentagon",
    "sandwich_check",
    "support",
    "waterfill_threshold",
]
