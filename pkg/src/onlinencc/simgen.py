"""Synthetic highway trajectories and their degradation into fragments.

Vehicles enter at x=0 at random times, cruise at a constant per-vehicle speed
and occasionally drift into an adjacent lane along a half-cosine profile.
Each ground-truth trajectory is then cut into fragments: points inside
occlusion masks are deleted, and at each camera boundary the trajectory is
split with a band of duplicated points on both sides of the cut.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Sequence

import numpy as np

from .costs import Fragment
from .errors import InvalidConfig


@dataclass
class SimConfig:
    n_vehicles: int = 137
    road_length: float = 2000.0  # ft
    n_lanes: int = 4
    duration: float = 200.0  # s
    sample_rate: float = 10.0  # Hz
    speed_range: tuple[float, float] = (90.0, 110.0)  # ft/s
    lane_change_rate: float = 0.005  # per vehicle per second
    lane_width: float = 12.0  # ft
    lane_change_duration: float = 4.0  # s
    min_headway: float = 1.5  # s, same-lane entry spacing
    seed: int = 0

    def __post_init__(self) -> None:
        self.speed_range = tuple(float(v) for v in self.speed_range)
        if self.n_vehicles < 0:
            raise InvalidConfig("n_vehicles must be >= 0")
        for name in ("road_length", "n_lanes", "duration", "sample_rate", "lane_width"):
            if getattr(self, name) <= 0:
                raise InvalidConfig(f"{name} must be positive")
        lo, hi = self.speed_range
        if not 0 < lo <= hi:
            raise InvalidConfig("speed_range must satisfy 0 < min <= max")
        if self.lane_change_rate < 0 or self.min_headway < 0 or self.lane_change_duration <= 0:
            raise InvalidConfig("lane-change and headway parameters must be non-negative")

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        return cls(**_checked(cls, data))


@dataclass
class FragmentationConfig:
    mask_intervals: list[tuple[float, float]] = field(default_factory=list)  # ft
    cut_positions: list[float] = field(default_factory=list)  # ft
    overlap: float = 0.0  # ft, duplicated band centred on each cut
    seed: int = 0

    def __post_init__(self) -> None:
        self.mask_intervals = [tuple(float(v) for v in iv) for iv in self.mask_intervals]
        self.cut_positions = sorted(float(c) for c in self.cut_positions)
        if self.overlap < 0:
            raise InvalidConfig("overlap must be >= 0")
        for lo, hi in self.mask_intervals:
            if lo > hi:
                raise InvalidConfig(f"mask interval ({lo}, {hi}) is reversed")

    def validate_for(self, road_length: float) -> None:
        for lo, hi in self.mask_intervals:
            if lo < 0 or hi > road_length:
                raise InvalidConfig(f"mask interval ({lo}, {hi}) leaves the road")
        for c in self.cut_positions:
            if not 0 <= c <= road_length:
                raise InvalidConfig(f"cut position {c} leaves the road")

    @classmethod
    def from_dict(cls, data: dict) -> "FragmentationConfig":
        return cls(**_checked(cls, data))


def _checked(cls, data: dict) -> dict:
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise InvalidConfig(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    return dict(data)


def _entry_schedule(cfg: SimConfig, rng: np.random.Generator):
    """Entry time, lane and speed per vehicle, with no same-lane catch-up."""
    proposed = np.sort(rng.uniform(0.0, cfg.duration, cfg.n_vehicles))
    speeds = rng.uniform(cfg.speed_range[0], cfg.speed_range[1], cfg.n_vehicles)
    lane_order = [rng.permutation(cfg.n_lanes) for _ in range(cfg.n_vehicles)]
    last_tick = (math.ceil(cfg.duration * cfg.sample_rate) - 1) / cfg.sample_rate
    leaders: list[tuple[float, float] | None] = [None] * cfg.n_lanes
    out = []
    for i in range(cfg.n_vehicles):
        v = float(speeds[i])
        best = None
        for lane in lane_order[i]:
            t = float(proposed[i])
            lead = leaders[lane]
            if lead is not None:
                e_l, v_l = lead
                # headway at entry and at the end of the road
                t = max(
                    t,
                    e_l + cfg.min_headway,
                    e_l + cfg.road_length / v_l - cfg.road_length / v + cfg.min_headway,
                )
            if best is None or t < best[0]:
                best = (t, int(lane))
        t, lane = best
        if t > last_tick:
            # no feasible slot left; enter unspaced rather than lose the vehicle
            t = float(proposed[i])
        leaders[lane] = (t, v)
        out.append((t, lane, v))
    return out


def _lane_profile(cfg: SimConfig, rng: np.random.Generator, lane: int, t_in: float, t_out: float):
    """Piecewise list of (start, end, from_lane, to_lane) lane changes."""
    changes = []
    t = t_in
    cur = lane
    if cfg.lane_change_rate <= 0 or cfg.n_lanes < 2:
        return changes
    while True:
        t += rng.exponential(1.0 / cfg.lane_change_rate)
        if t >= t_out:
            break
        if cur == 0:
            nxt = 1
        elif cur == cfg.n_lanes - 1:
            nxt = cur - 1
        else:
            nxt = cur + (1 if rng.random() < 0.5 else -1)
        changes.append((t, t + cfg.lane_change_duration, cur, nxt))
        cur = nxt
        t += cfg.lane_change_duration
    return changes


def _lane_y(cfg: SimConfig, lane: int, changes, t: np.ndarray) -> np.ndarray:
    centre = lambda ln: (ln + 0.5) * cfg.lane_width  # noqa: E731
    y = np.full_like(t, centre(lane))
    for start, end, a, b in changes:
        ya, yb = centre(a), centre(b)
        during = (t >= start) & (t < end)
        phase = (t[during] - start) / (end - start)
        y[during] = ya + (yb - ya) * 0.5 * (1 - np.cos(np.pi * phase))
        y[t >= end] = yb
    return y


def generate_trajectories(cfg: SimConfig) -> list[Fragment]:
    """Ground-truth trajectories, one per vehicle, labelled with their own id."""
    rng = np.random.default_rng(cfg.seed)
    schedule = _entry_schedule(cfg, rng)
    dt = 1.0 / cfg.sample_rate
    n_ticks = math.ceil(cfg.duration * cfg.sample_rate)
    out = []
    for i, (entry, lane, speed) in enumerate(schedule):
        first = max(0, math.ceil(entry * cfg.sample_rate - 1e-9))
        exit_t = entry + cfg.road_length / speed
        last = min(n_ticks - 1, math.floor(exit_t * cfg.sample_rate + 1e-9))
        ticks = np.arange(first, max(last, first) + 1)
        t = ticks * dt
        x = speed * (t - entry)
        keep = (x >= 0) & (x <= cfg.road_length)
        if not keep.any():
            keep[0] = True
            x[0] = min(max(x[0], 0.0), cfg.road_length)
        t, x = t[keep], x[keep]
        changes = _lane_profile(cfg, rng, lane, t[0], t[-1])
        y = _lane_y(cfg, lane, changes, t)
        vid = f"v{i:04d}"
        out.append(Fragment(vid, np.column_stack([t, x, y]), gt_label=vid))
    return out


def _split_runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """[start, stop) index ranges of consecutive True values."""
    runs = []
    start = None
    for i, keep in enumerate(mask):
        if keep and start is None:
            start = i
        elif not keep and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(mask)))
    return runs


def fragment_trajectories(
    gt: Sequence[Fragment], fcfg: FragmentationConfig
) -> list[Fragment]:
    """Degrade ground truth into fragments sorted by last timestamp.

    Points with ``lo <= x <= hi`` for any mask interval are deleted. Around
    each cut ``c`` the predecessor keeps points with ``x < c + overlap/2`` and
    the successor starts at ``x >= c - overlap/2``.
    """
    half = fcfg.overlap / 2.0
    bounds = [(-math.inf, math.inf)]
    if fcfg.cut_positions:
        edges = [-math.inf] + list(fcfg.cut_positions) + [math.inf]
        bounds = [
            (edges[j] - half if j > 0 else -math.inf, edges[j + 1] + half if j + 1 < len(edges) - 1 else math.inf)
            for j in range(len(edges) - 1)
        ]

    pieces = []
    for traj in gt:
        pts = traj.points
        x = pts[:, 1]
        visible = np.ones(len(pts), dtype=bool)
        for lo, hi in fcfg.mask_intervals:
            visible &= ~((x >= lo) & (x <= hi))
        for a, b in _split_runs(visible):
            run = pts[a:b]
            rx = run[:, 1]
            for lo, hi in bounds:
                sel = (rx >= lo) & (rx < hi)
                for c, d in _split_runs(sel):
                    pieces.append((run[c:d], traj.gt_label))

    pieces.sort(key=lambda p: (p[0][-1, 0], p[0][0, 0], p[1] or ""))
    width = max(4, len(str(len(pieces))))
    return [
        Fragment(f"f{i:0{width}d}", pts, gt_label=label)
        for i, (pts, label) in enumerate(pieces)
    ]


def highway_sim_config(**overrides) -> SimConfig:
    """137 vehicles on a 2000 ft, 4-lane segment for 200 s at 10 Hz."""
    base = dict(
        n_vehicles=137,
        road_length=2000.0,
        n_lanes=4,
        duration=200.0,
        sample_rate=10.0,
    )
    base.update(overrides)
    return SimConfig(**base)


def highway_fragmentation_config(**overrides) -> FragmentationConfig:
    """Overpass mask at 1550-1700 ft and camera cuts at 700/1400 ft with 100 ft overlap."""
    base = dict(
        mask_intervals=[(1550.0, 1700.0)],
        cut_positions=[700.0, 1400.0],
        overlap=100.0,
    )
    base.update(overrides)
    return FragmentationConfig(**base)
