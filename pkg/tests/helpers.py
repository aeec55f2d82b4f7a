"""Instance builders and independent oracles shared by the test modules."""

from __future__ import annotations

import math
import random
from typing import Optional

from onlinencc.costs import CostConfig, Fragment
from onlinencc.graph import SOURCE, ResidualGraph


def frag(fid: str, t0: float, t1: float, x0: float = 0.0, gt_label: Optional[str] = None) -> Fragment:
    """Two-sample fragment spanning ``[t0, t1]`` (one sample if they coincide)."""
    if t1 > t0:
        pts = [[t0, x0, 0.0], [t1, x0 + (t1 - t0), 0.0]]
    else:
        pts = [[t0, x0, 0.0]]
    return Fragment(fid, pts, gt_label)


def table_cost_fn(table: dict[tuple[str, str], float]):
    """Transition costs looked up by ``(pred id, succ id)``; missing pairs are gated out."""

    def cost_fn(cfg, pred, succ):
        return table.get((pred.id, succ.id))

    return cost_fn


def random_instance(
    rng: random.Random,
    n: int,
    p_edge: float = 0.5,
    span: float = 20.0,
    max_gap: float = math.inf,
):
    """Random fragments (in last-timestamp order), cost config and transition table.

    A pair may only be linked when the successor ends at most ``max_gap``
    seconds after its predecessor.
    """
    frags = []
    for i in range(n):
        t0 = rng.uniform(0.0, span)
        t1 = t0 + rng.choice([0.0, rng.uniform(0.1, 10.0)])
        frags.append(frag(f"q{i:02d}", t0, t1))
    frags.sort(key=lambda f: (f.last_t, f.id))
    cfg = CostConfig(
        enter_cost=rng.uniform(0.0, 2.0),
        exit_cost=rng.uniform(0.0, 2.0),
        inclusion_cost=rng.uniform(-4.0, 0.5),
    )
    table = {}
    for j in range(n):
        for i in range(j):
            if frags[j].last_t - frags[i].last_t <= max_gap and rng.random() < p_edge:
                table[frags[i].id, frags[j].id] = rng.uniform(-5.0, 3.0)
    return frags, cfg, table


def residual_arc_list(g: ResidualGraph) -> list[tuple[int, int, float, tuple[int, bool]]]:
    out = []
    for eid, e in g.edges():
        if e.flow:
            out.append((e.head, e.tail, -e.cost, (eid, True)))
        else:
            out.append((e.tail, e.head, e.cost, (eid, False)))
    return out


def simple_cycles(g: ResidualGraph):
    """Every simple residual cycle as ``(cost, arcs)``, each reported once."""
    adj: dict[int, list] = {}
    for a, b, c, arc in residual_arc_list(g):
        adj.setdefault(a, []).append((b, c, arc))
    found = []

    def dfs(start, node, visited, costs, arcs):
        for b, c, arc in adj.get(node, ()):
            if b == start:
                found.append((math.fsum(costs + [c]), arcs + [arc]))
            elif b > start and b not in visited:
                visited.add(b)
                dfs(start, b, visited, costs + [c], arcs + [arc])
                visited.discard(b)

    for start in sorted(adj):
        dfs(start, start, {start}, [], [])
    return found


def simple_paths_from_source(g: ResidualGraph, target: int):
    """Costs of every simple residual path ``s -> target`` not revisiting ``s``."""
    adj: dict[int, list] = {}
    for a, b, c, _ in residual_arc_list(g):
        adj.setdefault(a, []).append((b, c))
    out = []

    def dfs(node, visited, costs):
        if node == target:
            out.append(math.fsum(costs))
            return
        for b, c in adj.get(node, ()):
            if b != SOURCE and b not in visited:
                visited.add(b)
                dfs(b, visited, costs + [c])
                visited.discard(b)

    dfs(SOURCE, {SOURCE}, [])
    return out


def assignment_cost(trajs, frags_by_id, cfg, table) -> float:
    """Objective of a trajectory set recomputed from first principles."""
    from onlinencc.costs import enter_exit_costs, inclusion_cost

    terms = []
    for tr in trajs:
        ids = tr.fragment_ids
        c_en, _ = enter_exit_costs(cfg, frags_by_id[ids[0]])
        _, c_ex = enter_exit_costs(cfg, frags_by_id[ids[-1]])
        terms += [c_en, c_ex]
        terms += [inclusion_cost(cfg, frags_by_id[f]) for f in ids]
        terms += [table[a, b] for a, b in zip(ids, ids[1:])]
    return math.fsum(terms)
