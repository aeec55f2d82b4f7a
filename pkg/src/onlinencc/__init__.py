"""Online negative-cycle canceling for multi-object tracking fragment association."""

from .costs import CostConfig, Fragment, transition_cost
from .errors import (
    CorruptFlow,
    DuplicateFragment,
    InvalidBeta,
    InvalidConfig,
    MissingLabel,
    NCCError,
    NotATail,
    OutOfOrderFragment,
    SaturatedEdge,
    SolverStall,
    TooLarge,
    UnknownPredecessor,
)
from .graph import EPS_CYCLE, Cycle, ResidualGraph, Trajectory, has_negative_cycle, new_graph
from .metrics import EvalReport, evaluate
from .offline import brute_force_solve, construct_circulation_graph, find_negative_cycle, solve_offline
from .online import OnlineSolver, SolverStats, find_min_cycle
from .simgen import FragmentationConfig, SimConfig, fragment_trajectories, generate_trajectories

__version__ = "0.1.0"

__all__ = [
    "CorruptFlow",
    "CostConfig",
    "Cycle",
    "DuplicateFragment",
    "EPS_CYCLE",
    "EvalReport",
    "Fragment",
    "FragmentationConfig",
    "InvalidBeta",
    "InvalidConfig",
    "MissingLabel",
    "NCCError",
    "NotATail",
    "OnlineSolver",
    "OutOfOrderFragment",
    "ResidualGraph",
    "SaturatedEdge",
    "SimConfig",
    "SolverStall",
    "SolverStats",
    "TooLarge",
    "Trajectory",
    "UnknownPredecessor",
    "brute_force_solve",
    "construct_circulation_graph",
    "evaluate",
    "find_min_cycle",
    "find_negative_cycle",
    "fragment_trajectories",
    "generate_trajectories",
    "has_negative_cycle",
    "new_graph",
    "solve_offline",
    "transition_cost",
]
