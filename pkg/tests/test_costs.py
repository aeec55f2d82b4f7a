from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onlinencc.costs import (
    CostConfig,
    Fragment,
    candidate_predecessors,
    enter_exit_costs,
    inclusion_cost,
    transition_cost,
)
from onlinencc.errors import InvalidBeta, InvalidConfig


def track(fid, t0, t1, vx=100.0, vy=0.0, x0=0.0, y0=6.0, rate=10.0):
    t = np.arange(round(t0 * rate), round(t1 * rate) + 1) / rate
    return Fragment(fid, np.column_stack([t, x0 + vx * (t - t0), y0 + vy * (t - t0)]))


def test_fragment_validation():
    with pytest.raises(ValueError):
        Fragment("a", [[1.0, 0, 0], [1.0, 1, 0]])
    with pytest.raises(ValueError):
        Fragment("a", [])
    with pytest.raises(ValueError):
        Fragment("a", [[0, 0]])
    f = Fragment("a", [[0, 0, 0], [1, 1, 0]])
    assert f.first_t == 0 and f.last_t == 1
    with pytest.raises(ValueError):
        f.points[0, 0] = 5.0


def test_fragment_equality_is_by_value():
    a = Fragment("a", [[0, 1.5, 2.0]], "g")
    assert a == Fragment("a", [[0, 1.5, 2.0]], "g")
    assert a != Fragment("a", [[0, 1.5, 2.5]], "g")
    assert a != Fragment("a", [[0, 1.5, 2.0]], "h")


def test_inclusion_cost_from_beta():
    assert inclusion_cost(CostConfig(beta=0.5)) == pytest.approx(0.0, abs=1e-15)
    assert inclusion_cost(CostConfig(beta=0.1)) == pytest.approx(-math.log(9), rel=1e-12)
    assert inclusion_cost(CostConfig(inclusion_cost=-1e-6)) == -1e-6
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(InvalidBeta):
            inclusion_cost(CostConfig(beta=bad))


def test_enter_exit_from_probabilities():
    assert enter_exit_costs(CostConfig()) == (0.0, 0.0)
    c_en, c_ex = enter_exit_costs(CostConfig(p_enter=0.5, p_exit=1.0))
    assert c_en == pytest.approx(math.log(2)) and c_ex == 0.0
    with pytest.raises(InvalidConfig):
        CostConfig(p_enter=0.0)


def test_config_validation():
    for kw in ({"time_gap_max": 0}, {"max_overlap": -1}, {"spatial_gate": 0}, {"sigma_x": 0}, {"fit_window": 0}):
        with pytest.raises(InvalidConfig):
            CostConfig(**kw)
    with pytest.raises(InvalidConfig):
        CostConfig.from_dict({"nope": 1})


def test_constant_velocity_continuation_scores_the_floor():
    cfg = CostConfig(transition_reward_floor=0.25)
    pred = track("p", 0.0, 3.0)
    succ = track("s", 4.0, 7.0, x0=400.0)
    assert transition_cost(cfg, pred, succ) == pytest.approx(-0.25, abs=1e-9)
    # overlapping continuation of the same motion
    succ2 = track("s2", 2.0, 7.0, x0=200.0)
    assert transition_cost(cfg, pred, succ2) == pytest.approx(-0.25, abs=1e-9)


def test_lateral_offset_cost():
    cfg = CostConfig(transition_reward_floor=0.0, sigma_y=4.0)
    pred = track("p", 0.0, 3.0)
    succ = track("s", 4.0, 7.0, x0=400.0, y0=6.0 + 12.0)
    assert transition_cost(cfg, pred, succ) == pytest.approx(144 / (2 * 16), rel=1e-9)


def test_cost_grows_with_offset():
    cfg = CostConfig()
    pred = track("p", 0.0, 3.0)
    costs = [transition_cost(cfg, pred, track("s", 4.0, 7.0, x0=400.0 + d)) for d in (0, 5, 10, 20)]
    assert costs == sorted(costs)
    assert costs[0] < costs[-1]


def test_spatial_gate():
    cfg = CostConfig(spatial_gate=10.0)
    pred = track("p", 0.0, 3.0)
    assert transition_cost(cfg, pred, track("s", 4.0, 7.0, x0=400.0 + 9.9)) is not None
    assert transition_cost(cfg, pred, track("s", 4.0, 7.0, x0=400.0 + 10.1)) is None


def test_time_gates_are_inclusive():
    cfg = CostConfig(time_gap_max=2.0, max_overlap=1.0, spatial_gate=1e6)
    pred = track("p", 0.0, 3.0)
    assert transition_cost(cfg, pred, track("s", 5.0, 8.0, x0=500.0)) is not None
    assert transition_cost(cfg, pred, track("s", 5.1, 8.0, x0=510.0)) is None
    assert transition_cost(cfg, pred, track("s", 2.0, 8.0, x0=200.0)) is not None
    assert transition_cost(cfg, pred, track("s", 1.9, 8.0, x0=190.0)) is None


def test_order_gate():
    cfg = CostConfig(spatial_gate=1e6, max_overlap=100.0)
    pred = track("p", 1.0, 3.0)
    # successor may not end earlier or start no later than its predecessor
    assert transition_cost(cfg, pred, track("s", 2.0, 2.5)) is None
    assert transition_cost(cfg, pred, track("s", 1.0, 5.0)) is None
    # equal end times are allowed when the successor starts later
    assert transition_cost(cfg, pred, track("s", 2.0, 3.0, x0=100.0)) is not None


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 10.0), st.floats(0.5, 10.0), st.floats(0.0, 10.0), st.floats(0.5, 10.0))
def test_never_both_directions(t0a, da, t0b, db):
    cfg = CostConfig(spatial_gate=1e9, time_gap_max=1e3, max_overlap=1e3)
    a = track("a", round(t0a, 1), round(t0a + da, 1))
    b = track("b", round(t0b, 1), round(t0b + db, 1))
    assert transition_cost(cfg, a, b) is None or transition_cost(cfg, b, a) is None


def test_candidate_predecessors_sorted_and_self_excluded():
    cfg = CostConfig(spatial_gate=1e6)
    new = track("z", 10.0, 12.0, x0=1000.0)
    live = [track("m", 5.0, 9.0, x0=500.0), track("b", 6.0, 9.5, x0=600.0), new]
    out = candidate_predecessors(cfg, live, new)
    assert [fid for fid, _ in out] == ["b", "m"]
