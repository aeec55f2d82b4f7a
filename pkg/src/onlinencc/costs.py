"""Fragments and the edge-cost model of the tracking circulation graph.

All costs are negative log-probabilities. The transition cost is a
constant-velocity stand-in for a probabilistic motion model: it fits a line
to the tail of the predecessor, extrapolates to the head of the successor and
scores the squared residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import InvalidBeta, InvalidConfig


class Fragment:
    """A time-ordered run of ``(t, x, y)`` samples belonging to one object.

    ``t`` is in seconds, ``x``/``y`` in feet. ``gt_label`` is only known for
    synthetic data.
    """

    __slots__ = ("id", "points", "gt_label")

    def __init__(self, id: str, points, gt_label: Optional[str] = None):
        arr = np.array(points, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 3 or len(arr) == 0:
            raise ValueError(f"fragment {id!r}: points must be a non-empty (n, 3) array")
        if len(arr) > 1 and not np.all(np.diff(arr[:, 0]) > 0):
            raise ValueError(f"fragment {id!r}: timestamps must be strictly increasing")
        arr.setflags(write=False)
        self.id = str(id)
        self.points = arr
        self.gt_label = gt_label

    @property
    def first_t(self) -> float:
        return float(self.points[0, 0])

    @property
    def last_t(self) -> float:
        return float(self.points[-1, 0])

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Fragment):
            return NotImplemented
        return (
            self.id == other.id
            and self.gt_label == other.gt_label
            and np.array_equal(self.points, other.points)
        )

    def __hash__(self) -> int:
        return hash(self.id)

    def __repr__(self) -> str:
        return (
            f"Fragment(id={self.id!r}, n={len(self)}, "
            f"t=[{self.first_t:.2f}, {self.last_t:.2f}], gt_label={self.gt_label!r})"
        )


@dataclass
class CostConfig:
    """Edge-cost parameters.

    ``beta`` (false-positive probability) overrides ``inclusion_cost`` when set;
    likewise ``p_enter``/``p_exit`` override the constant enter/exit costs.
    """

    enter_cost: float = 0.0
    exit_cost: float = 0.0
    inclusion_cost: float = -1e-6
    beta: Optional[float] = None
    p_enter: Optional[float] = None
    p_exit: Optional[float] = None
    time_gap_max: float = 15.0  # s
    max_overlap: float = 12.0  # s
    spatial_gate: float = 60.0  # ft, RMS extrapolation error
    sigma_x: float = 10.0  # ft
    sigma_y: float = 10.0  # ft
    transition_reward_floor: float = 1e-3
    fit_window: int = 10  # points

    def __post_init__(self) -> None:
        if self.time_gap_max <= 0:
            raise InvalidConfig("time_gap_max must be > 0")
        if self.max_overlap < 0:
            raise InvalidConfig("max_overlap must be >= 0")
        if self.spatial_gate <= 0:
            raise InvalidConfig("spatial_gate must be > 0")
        if self.sigma_x <= 0 or self.sigma_y <= 0:
            raise InvalidConfig("sigma_x and sigma_y must be > 0")
        if self.fit_window < 1:
            raise InvalidConfig("fit_window must be >= 1")
        for name in ("p_enter", "p_exit"):
            p = getattr(self, name)
            if p is not None and not 0 < p <= 1:
                raise InvalidConfig(f"{name} must lie in (0, 1]")

    @classmethod
    def from_dict(cls, data: dict) -> "CostConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidConfig(f"unknown cost keys: {sorted(unknown)}")
        return cls(**data)


TransitionFn = Callable[[CostConfig, Fragment, Fragment], Optional[float]]


def inclusion_cost(cfg: CostConfig, frag: Optional[Fragment] = None) -> float:
    if cfg.beta is None:
        return cfg.inclusion_cost
    beta = cfg.beta
    if not 0 < beta < 1:
        raise InvalidBeta(f"beta must lie in (0, 1), got {beta}")
    return -math.log((1 - beta) / beta)


def enter_exit_costs(cfg: CostConfig, frag: Optional[Fragment] = None) -> tuple[float, float]:
    enter = cfg.enter_cost if cfg.p_enter is None else -math.log(cfg.p_enter)
    exit_ = cfg.exit_cost if cfg.p_exit is None else -math.log(cfg.p_exit)
    return enter, exit_


def _linear_fit(t: np.ndarray, v: np.ndarray) -> tuple[float, float]:
    # (intercept at t=0, slope); t is already centred on the last sample
    if len(t) < 2:
        return float(v[-1]), 0.0
    tm = t.mean()
    vm = v.mean()
    dt = t - tm
    slope = float(np.dot(dt, v - vm) / np.dot(dt, dt))
    return float(vm - slope * tm), slope


def transition_cost(cfg: CostConfig, pred: Fragment, succ: Fragment) -> Optional[float]:
    """Cost of ``succ`` directly continuing ``pred``, or None if gated out."""
    if succ.last_t < pred.last_t or succ.first_t <= pred.first_t:
        return None
    gap = succ.first_t - pred.last_t
    if gap > cfg.time_gap_max or -gap > cfg.max_overlap:
        return None

    w = cfg.fit_window
    tail = pred.points[-w:]
    head = succ.points[:w]
    t0 = tail[-1, 0]
    tt = tail[:, 0] - t0
    x0, vx = _linear_fit(tt, tail[:, 1])
    y0, vy = _linear_fit(tt, tail[:, 2])

    th = head[:, 0] - t0
    dx = head[:, 1] - (x0 + vx * th)
    dy = head[:, 2] - (y0 + vy * th)
    mx = float(np.mean(dx * dx))
    my = float(np.mean(dy * dy))
    if math.sqrt(mx + my) > cfg.spatial_gate:
        return None
    return (
        mx / (2 * cfg.sigma_x**2)
        + my / (2 * cfg.sigma_y**2)
        - cfg.transition_reward_floor
    )


def candidate_predecessors(
    cfg: CostConfig,
    live: Iterable[Fragment],
    new_frag: Fragment,
    cost_fn: TransitionFn = transition_cost,
) -> list[tuple[str, float]]:
    """Live fragments that may directly precede ``new_frag``, sorted by id."""
    out = []
    for frag in live:
        if frag.id == new_frag.id:
            continue
        c = cost_fn(cfg, frag, new_frag)
        if c is not None:
            out.append((frag.id, c))
    out.sort(key=lambda item: item[0])
    return out
