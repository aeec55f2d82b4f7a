from __future__ import annotations

import random

import pytest

from helpers import assignment_cost, frag, random_instance, table_cost_fn
from onlinencc.costs import CostConfig
from onlinencc.errors import DuplicateFragment, TooLarge
from onlinencc.graph import has_negative_cycle
from onlinencc.offline import (
    BRUTE_FORCE_LIMIT,
    brute_force_solve,
    construct_circulation_graph,
    find_negative_cycle,
    solve_offline,
)


def test_construct_graph_edges_follow_cost_fn():
    frags = [frag("a", 0, 1), frag("b", 1, 2), frag("c", 2, 3)]
    table = {("a", "b"): -1.0, ("a", "c"): 0.5}
    g = construct_circulation_graph(frags, CostConfig(), table_cost_fn(table))
    assert g.node_count == 7
    assert g.edge_count == 3 * 3 + 2
    assert all(e.flow == 0 for _, e in g.edges())


def test_duplicate_ids_rejected():
    with pytest.raises(DuplicateFragment):
        construct_circulation_graph([frag("a", 0, 1), frag("a", 2, 3)], CostConfig())


def test_find_negative_cycle_on_optimal_graph_is_none():
    frags = [frag("a", 0, 1)]
    cfg = CostConfig(inclusion_cost=1.0)
    g = construct_circulation_graph(frags, cfg)
    assert find_negative_cycle(g) is None


def test_find_negative_cycle_returns_valid_negative_cycle():
    frags = [frag("a", 0, 1), frag("b", 2, 3)]
    g = construct_circulation_graph(frags, CostConfig(inclusion_cost=-1.0), table_cost_fn({("a", "b"): -2.0}))
    cyc = find_negative_cycle(g)
    assert cyc is not None and cyc.total_cost < -1e-9
    g.push_flow(cyc)
    g.check_conservation()


def test_solve_offline_chain():
    frags = [frag("a", 0, 1), frag("b", 2, 3), frag("c", 4, 5)]
    table = {("a", "b"): -2.0, ("b", "c"): -2.0, ("a", "c"): -1.0}
    trajs, cost = solve_offline(frags, CostConfig(inclusion_cost=-1.0), cost_fn=table_cost_fn(table))
    assert [t.fragment_ids for t in trajs] == [("a", "b", "c")]
    assert cost == pytest.approx(-7.0)


def test_positive_inclusion_leaves_fragment_out():
    frags = [frag("a", 0, 1)]
    trajs, cost = solve_offline(frags, CostConfig(inclusion_cost=0.5))
    assert trajs == [] and cost == 0.0
    trajs, cost = brute_force_solve(frags, CostConfig(inclusion_cost=0.5))
    assert trajs == [] and cost == 0.0


def test_brute_force_limit():
    frags = [frag(f"f{i}", i, i + 0.5) for i in range(BRUTE_FORCE_LIMIT + 1)]
    with pytest.raises(TooLarge):
        brute_force_solve(frags, CostConfig())


def test_empty_input():
    assert solve_offline([], CostConfig()) == ([], 0.0)
    assert brute_force_solve([], CostConfig()) == ([], 0.0)


@pytest.mark.parametrize("seed", range(40))
def test_offline_matches_brute_force(seed):
    rng = random.Random(seed)
    frags, cfg, table = random_instance(rng, rng.randint(1, 7))
    fn = table_cost_fn(table)
    t_off, c_off = solve_offline(frags, cfg, cost_fn=fn)
    t_bf, c_bf = brute_force_solve(frags, cfg, cost_fn=fn)
    assert c_off == pytest.approx(c_bf, abs=1e-9)
    by_id = {f.id: f for f in frags}
    assert assignment_cost(t_off, by_id, cfg, table) == pytest.approx(c_off, abs=1e-9)
    assert assignment_cost(t_bf, by_id, cfg, table) == pytest.approx(c_bf, abs=1e-9)
    g = construct_circulation_graph(frags, cfg, fn)
    while (cyc := find_negative_cycle(g)) is not None:
        g.push_flow(cyc)
    assert not has_negative_cycle(g)
