"""Benchmark problems: drift identification, order placement, liquidation."""

from .drift import DriftEnvironment, DriftModel
from .execution import ExecModel, ExecutionEnvironment
from .placement import (
    BookDynamics,
    LobCosts,
    LobState,
    PlacementEnvironment,
    lob_transition,
)
from .policies import ActionPolicyState, sample_action, softmax_probabilities

__all__ = [
    "ActionPolicyState",
    "BookDynamics",
    "DriftEnvironment",
    "DriftModel",
    "ExecModel",
    "ExecutionEnvironment",
    "LobCosts",
    "LobState",
    "PlacementEnvironment",
    "lob_transition",
    "sample_action",
    "softmax_probabilities",
]
