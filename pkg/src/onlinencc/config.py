"""Experiment configuration loaded from a single YAML file.

Top-level sections are ``sim``, ``fragmentation``, ``cost`` and ``solver``;
every key is optional and falls back to the dataclass default. See
``configs/highway.yaml`` for an annotated example.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import yaml

from .costs import CostConfig
from .errors import InvalidConfig
from .graph import EPS_CYCLE
from .simgen import FragmentationConfig, SimConfig, highway_fragmentation_config, highway_sim_config

MODES = ("online", "online-bounded", "offline", "brute")


@dataclass
class SolverConfig:
    mode: str = "online-bounded"
    window_seconds: Optional[float] = 5.0
    strict_order: bool = True
    eps_cycle: float = EPS_CYCLE

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise InvalidConfig(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.window_seconds is not None and self.window_seconds <= 0:
            raise InvalidConfig("window_seconds must be positive")
        if self.eps_cycle <= 0:
            raise InvalidConfig("eps_cycle must be positive")


@dataclass
class ExperimentConfig:
    sim: SimConfig = field(default_factory=SimConfig)
    fragmentation: FragmentationConfig = field(default_factory=FragmentationConfig)
    cost: CostConfig = field(default_factory=CostConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)

    def to_dict(self) -> dict:
        def plain(obj):
            out = {}
            for f in fields(obj):
                v = getattr(obj, f.name)
                if isinstance(v, tuple):
                    v = list(v)
                if isinstance(v, list):
                    v = [list(x) if isinstance(x, tuple) else x for x in v]
                out[f.name] = v
            return out

        return {
            "sim": plain(self.sim),
            "fragmentation": plain(self.fragmentation),
            "cost": plain(self.cost),
            "solver": plain(self.solver),
        }


_SECTIONS = {
    "sim": SimConfig.from_dict,
    "fragmentation": FragmentationConfig.from_dict,
    "cost": CostConfig.from_dict,
    "solver": lambda d: SolverConfig(**d),
}


def config_from_dict(data: Optional[dict]) -> ExperimentConfig:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise InvalidConfig("config root must be a mapping")
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise InvalidConfig(f"unknown config sections: {sorted(unknown)}")
    parts = {}
    for name, build in _SECTIONS.items():
        section = data.get(name)
        if section is None:
            section = {}
        if not isinstance(section, dict):
            raise InvalidConfig(f"section {name!r} must be a mapping")
        try:
            parts[name] = build(section)
        except TypeError as exc:
            raise InvalidConfig(f"section {name!r}: {exc}") from exc
    cfg = ExperimentConfig(**parts)
    cfg.fragmentation.validate_for(cfg.sim.road_length)
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise InvalidConfig(f"cannot parse config {path}: {exc}") from exc
    return config_from_dict(data)


def dump_config(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=False))


# Vehicles must cover the 700 ft between camera cuts within the 5 s window,
# hence the fast speed band.
HIGHWAY_SPEED_RANGE = (150.0, 170.0)
HIGHWAY_REWARD_FLOOR = 1.0


def highway_config(seed: int = 0) -> ExperimentConfig:
    return ExperimentConfig(
        sim=highway_sim_config(seed=seed, speed_range=HIGHWAY_SPEED_RANGE),
        fragmentation=highway_fragmentation_config(),
        cost=CostConfig(
            enter_cost=0.0,
            exit_cost=0.0,
            inclusion_cost=-1e-6,
            transition_reward_floor=HIGHWAY_REWARD_FLOOR,
        ),
        solver=SolverConfig(mode="online-bounded", window_seconds=5.0),
    )
