"""Anytime exact enumeration of Pareto fronts for multi-objective integer programs."""

from .engine import Budget, FullSplitSearch, RunResult, TPASearch, run, run_fullsplit, run_tpa
from .geometry import Box, ScalingBounds, dominance, full_p_split, join, p_partition, reduced_scaled, scaled
from .metrics import MetricContext, additive_epsilon, general_spread, hvr, hypervolume, onvgr
from .problems import ProblemInstance, brute_force_front, generate, read_front, read_instance

__all__ = [
    "Box",
    "Budget",
    "FullSplitSearch",
    "MetricContext",
    "ProblemInstance",
    "RunResult",
    "ScalingBounds",
    "TPASearch",
    "additive_epsilon",
    "brute_force_front",
    "dominance",
    "full_p_split",
    "general_spread",
    "generate",
    "hvr",
    "hypervolume",
    "join",
    "onvgr",
    "p_partition",
    "read_front",
    "read_instance",
    "reduced_scaled",
    "run",
    "run_fullsplit",
    "run_tpa",
    "scaled",
]
