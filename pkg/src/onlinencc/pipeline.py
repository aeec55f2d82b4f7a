"""End-to-end helpers shared by the CLI and the experiment tests."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .config import ExperimentConfig, SolverConfig
from .costs import CostConfig, Fragment, TransitionFn, transition_cost
from .graph import Trajectory
from .metrics import EvalReport, evaluate
from .offline import brute_force_solve, solve_offline
from .online import OnlineSolver, SolverStats
from .simgen import fragment_trajectories, generate_trajectories


@dataclass
class AssociationResult:
    trajectories: list[Trajectory]
    total_cost: float
    stats: SolverStats = field(default_factory=SolverStats)
    unassociated: list[str] = field(default_factory=list)
    certified: bool = True
    wall_time: float = 0.0


def generate(cfg: ExperimentConfig) -> tuple[list[Fragment], list[Fragment]]:
    """Ground-truth trajectories and their fragments, sorted by last timestamp."""
    gt = generate_trajectories(cfg.sim)
    return gt, fragment_trajectories(gt, cfg.fragmentation)


def associate(
    frags: Iterable[Fragment],
    cost: CostConfig,
    solver: SolverConfig,
    cost_fn: TransitionFn = transition_cost,
) -> AssociationResult:
    """Run one association mode over ``frags``.

    Online modes consume the iterable lazily; the batch modes materialise it.
    """
    start = time.perf_counter()
    if solver.mode in ("online", "online-bounded"):
        window = solver.window_seconds if solver.mode == "online-bounded" else None
        ol = OnlineSolver(cost, window=window, strict=solver.strict_order, eps=solver.eps_cycle, cost_fn=cost_fn)
        trajs = ol.run(frags)
        return AssociationResult(
            trajs,
            ol.flow_cost(),
            ol.stats,
            list(ol.unassociated),
            ol.certified,
            time.perf_counter() - start,
        )
    frags = list(frags)
    if solver.mode == "offline":
        trajs, total = solve_offline(frags, cost, solver.eps_cycle, cost_fn)
    else:
        trajs, total = brute_force_solve(frags, cost, cost_fn)
    return AssociationResult(trajs, total, wall_time=time.perf_counter() - start)


def singletons(frags: Iterable[Fragment]) -> list[Trajectory]:
    """Each fragment as its own trajectory, i.e. no association at all."""
    return [Trajectory((f.id,), f.first_t, f.last_t) for f in frags]


def evaluate_all(
    gt: list[Fragment], frags: list[Fragment], predicted: list[Trajectory]
) -> tuple[EvalReport, EvalReport, EvalReport]:
    """Reports for ground truth, raw fragments and the association result."""
    gt_index = {g.id: g for g in gt}
    frag_index = {f.id: f for f in frags}
    return (
        evaluate(gt, singletons(gt), gt_index),
        evaluate(gt, singletons(frags), frag_index),
        evaluate(gt, predicted, frag_index),
    )


def run_experiment(cfg: ExperimentConfig, mode: Optional[str] = None):
    """Generate, associate and evaluate in one go.

    Returns ``(gt, frags, result, result_report)``.
    """
    solver = cfg.solver if mode is None else SolverConfig(
        mode, cfg.solver.window_seconds, cfg.solver.strict_order, cfg.solver.eps_cycle
    )
    gt, frags = generate(cfg)
    result = associate(frags, cfg.cost, solver)
    report = evaluate(gt, result.trajectories, {f.id: f for f in frags})
    return gt, frags, result, report
