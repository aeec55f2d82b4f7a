"""Batch negative-cycle canceling and an exhaustive reference solver."""

from __future__ import annotations

import math
from collections import deque
from functools import lru_cache
from typing import Optional, Sequence

from .costs import (
    CostConfig,
    Fragment,
    TransitionFn,
    enter_exit_costs,
    inclusion_cost,
    transition_cost,
)
from .errors import DuplicateFragment, SolverStall, TooLarge
from .graph import EPS_CYCLE, Cycle, ResidualGraph, Trajectory

BRUTE_FORCE_LIMIT = 10


def _ordered(frags: Sequence[Fragment]) -> list[Fragment]:
    seen = set()
    for f in frags:
        if f.id in seen:
            raise DuplicateFragment(f.id)
        seen.add(f.id)
    return sorted(frags, key=lambda f: (f.last_t, f.id))


def construct_circulation_graph(
    frags: Sequence[Fragment],
    cfg: CostConfig,
    cost_fn: TransitionFn = transition_cost,
) -> ResidualGraph:
    """Zero-flow circulation graph with every transition edge the gates allow."""
    g = ResidualGraph()
    ordered = _ordered(frags)
    for k, frag in enumerate(ordered):
        preds = []
        for prev in ordered[:k]:
            c = cost_fn(cfg, prev, frag)
            if c is not None:
                preds.append((g.nodes_of(prev.id)[1], c))
        c_en, c_ex = enter_exit_costs(cfg, frag)
        g.add_fragment_node(frag, c_en, c_ex, inclusion_cost(cfg, frag), preds)
    return g


def _parent_cycle(parent: list, n: int) -> Optional[list[int]]:
    """Nodes of some cycle in the parent-pointer forest, or None."""
    state = [0] * n  # 0 unseen, 1 on current walk, 2 done
    for start in range(n):
        if state[start] or parent[start] is None:
            continue
        walk = []
        node = start
        while node is not None and state[node] == 0:
            state[node] = 1
            walk.append(node)
            p = parent[node]
            node = p[1] if p is not None else None
        if node is not None and state[node] == 1:
            return walk[walk.index(node):]
        for w in walk:
            state[w] = 2
    return None


def find_negative_cycle(g: ResidualGraph, eps: float = EPS_CYCLE) -> Optional[Cycle]:
    """Queue-based Bellman-Ford with periodic walks of the parent pointers.

    Arc costs are shifted by ``eps / |V|``; any cycle found this way has a
    strictly negative true cost, and every cycle below ``-eps`` is found.
    """
    n = g.node_capacity
    nodes = list(g.nodes())
    shift = eps / max(len(nodes), 1)
    dist = [0.0] * n
    parent: list = [None] * n  # node -> (arc, predecessor node)
    queue = deque(nodes)
    in_queue = [False] * n
    for v in nodes:
        in_queue[v] = True

    check_every = max(len(nodes), 1)
    budget = (len(nodes) + 1) * (g.edge_count + 1)
    relaxations = 0
    found = None
    while queue:
        a = queue.popleft()
        in_queue[a] = False
        da = dist[a]
        for eid, rev, b, c in g.residual_arcs(a):
            nd = da + c + shift
            if nd < dist[b]:
                dist[b] = nd
                parent[b] = ((eid, rev), a)
                relaxations += 1
                if not in_queue[b]:
                    in_queue[b] = True
                    queue.append(b)
                if relaxations % check_every == 0:
                    found = _parent_cycle(parent, n)
                    if found is not None:
                        break
        if found is not None:
            break
        if relaxations > budget:
            found = _parent_cycle(parent, n)
            if found is None:
                raise SolverStall("label-correcting scan exceeded its relaxation budget")
            break
    if found is None:
        found = _parent_cycle(parent, n)
        if found is None:
            return None

    # ``found`` lists nodes child -> parent; arcs run parent -> child.
    arcs = [parent[v][0] for v in reversed(found)]
    total = math.fsum(g.arc_endpoints(arc)[2] for arc in arcs)
    return Cycle(arcs, total)


def solve_offline(
    frags: Sequence[Fragment],
    cfg: CostConfig,
    eps: float = EPS_CYCLE,
    cost_fn: TransitionFn = transition_cost,
    max_iterations: Optional[int] = None,
) -> tuple[list[Trajectory], float]:
    """Cancel negative cycles until none remain, then trace trajectories."""
    g = construct_circulation_graph(frags, cfg, cost_fn)
    if max_iterations is None:
        c_max = max((abs(e.cost) for _, e in g.edges()), default=0.0)
        bound = g.edge_count * c_max / eps
        max_iterations = int(min(bound, 10**9)) + g.edge_count + 1
    for _ in range(max_iterations):
        cycle = find_negative_cycle(g, eps)
        if cycle is None:
            break
        g.push_flow(cycle)
    else:
        raise SolverStall(f"no convergence after {max_iterations} cycle cancellations")
    return g.extract_trajectories(), g.total_cost()


def brute_force_solve(
    frags: Sequence[Fragment],
    cfg: CostConfig,
    cost_fn: TransitionFn = transition_cost,
) -> tuple[list[Trajectory], float]:
    """Exact optimum of the association integer program by exhaustive search.

    Fragments are visited in last-timestamp order; each one is either left
    out, starts a new chain, or extends a chain whose current tail may precede
    it. Search states are memoised on (position, open tails), which keeps the
    enumeration exhaustive but tractable for up to ten fragments.
    """
    if len(frags) > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"brute force is limited to {BRUTE_FORCE_LIMIT} fragments, got {len(frags)}")
    ordered = _ordered(frags)
    n = len(ordered)
    c_in = [inclusion_cost(cfg, f) for f in ordered]
    c_en, c_ex = zip(*(enter_exit_costs(cfg, f) for f in ordered)) if n else ((), ())
    trans = {}
    for j in range(n):
        for i in range(j):
            c = cost_fn(cfg, ordered[i], ordered[j])
            if c is not None:
                trans[i, j] = c

    @lru_cache(maxsize=None)
    def best(k: int, open_tails: frozenset) -> tuple[float, tuple]:
        # returns (cost, decisions); decision is -2 skip, -1 new chain, else predecessor index
        if k == n:
            return 0.0, ()
        base = c_in[k] + c_ex[k]
        options = []
        cost, rest = best(k + 1, open_tails)
        options.append((cost, (-2,) + rest))
        cost, rest = best(k + 1, open_tails | {k})
        options.append((c_en[k] + base + cost, (-1,) + rest))
        for p in sorted(open_tails):
            if (p, k) in trans:
                cost, rest = best(k + 1, (open_tails - {p}) | {k})
                options.append((trans[p, k] - c_ex[p] + base + cost, (p,) + rest))
        return min(options, key=lambda o: o[0])

    _, decisions = best(0, frozenset())
    best.cache_clear()

    chains: dict[int, list[int]] = {}
    for k, d in enumerate(decisions):
        if d == -1:
            chains[k] = [k]
        elif d >= 0:
            chain = chains.pop(d)
            chain.append(k)
            chains[k] = chain

    trajs = []
    total_terms = []
    for chain in chains.values():
        total_terms.append(c_en[chain[0]])
        total_terms.extend(c_in[i] for i in chain)
        total_terms.extend(trans[a, b] for a, b in zip(chain, chain[1:]))
        total_terms.append(c_ex[chain[-1]])
        trajs.append(
            Trajectory(
                tuple(ordered[i].id for i in chain),
                ordered[chain[0]].first_t,
                ordered[chain[-1]].last_t,
            )
        )
    trajs.sort(key=lambda tr: (tr.first_timestamp, tr.fragment_ids))
    return trajs, math.fsum(total_terms)
