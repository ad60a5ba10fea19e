"""Adaptive step-size stochastic approximation toolkit.

A tabular learner updated one coordinate per observation, with pluggable
step-size policies (constant, inverse-power, windowed piecewise-constant
reduction, and an error-proxy-driven greedy rate), a sign-search rate
adaptation layer, three benchmark control problems with exact reference
solvers, error-curve analytics, and a reproducible experiment harness.
"""

from .algorithms import (
    SagaMemory,
    StepReport,
    step_pass,
    step_pass_vectorial,
    step_rl,
    step_saga,
)
from .core import EngineError, IterateTable, ResidualOracle, Transition
from .estimator import AdaptiveRateLearner
from .schedules import (
    BaseSchedule,
    LbEstimate,
    OptimalRatePolicy,
    PassState,
    PcPolicy,
    h_increase,
    l_decrease,
    one_step_error,
    optimal_gamma_pass,
    optimal_gamma_rl,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveRateLearner",
    "BaseSchedule",
    "EngineError",
    "IterateTable",
    "LbEstimate",
    "OptimalRatePolicy",
    "PassState",
    "PcPolicy",
    "ResidualOracle",
    "SagaMemory",
    "StepReport",
    "Transition",
    "h_increase",
    "l_decrease",
    "one_step_error",
    "optimal_gamma_pass",
    "optimal_gamma_rl",
    "step_pass",
    "step_pass_vectorial",
    "step_rl",
    "step_saga",
    "__version__",
]
