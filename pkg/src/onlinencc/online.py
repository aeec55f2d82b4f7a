"""Online negative-cycle canceling with an optional eviction window.

Fragments arrive ordered by last timestamp. Each step inserts the fragment,
looks for the cheapest cycle through its new inclusion edge, cancels it if it
is negative and then evicts circulations whose tail has timed out. The
residual graph is optimal after every step, so only cycles through the new
pre node ``u_k`` can be negative; the cheapest of them is the shortest
``s -> u_k`` path closed by ``u_k -> v_k -> s``.
"""

from __future__ import annotations

import logging
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .costs import (
    CostConfig,
    Fragment,
    TransitionFn,
    candidate_predecessors,
    enter_exit_costs,
    inclusion_cost,
    transition_cost,
)
from .errors import OutOfOrderFragment, SolverStall
from .graph import EPS_CYCLE, SOURCE, Arc, Cycle, ResidualGraph, Trajectory

log = logging.getLogger(__name__)

# Labels closer than this are treated as equal when breaking ties.
PATH_TOL = 1e-12


@dataclass
class IterationStats:
    k: int
    node_count: int
    edge_count: int
    t_add_node: float
    t_find_min_cycle: float
    t_push_flow: float
    t_clean_graph: float


@dataclass
class SolverStats:
    records: list[IterationStats] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def totals(self) -> dict[str, float]:
        keys = ("t_add_node", "t_find_min_cycle", "t_push_flow", "t_clean_graph")
        return {k: sum(getattr(r, k) for r in self.records) for k in keys}


def _pred_key(g: ResidualGraph, node: int) -> tuple[str, int]:
    return (g.fragment_of(node) or "", node)


def shortest_path_from_source(
    g: ResidualGraph, target: int
) -> Optional[tuple[list[Arc], float]]:
    """Cheapest residual path ``s -> target``, or None if unreachable.

    Label-correcting search; residual arcs may be negative. The source is
    never re-entered and ``target`` is never expanded, so cycles through the
    freshly inserted fragment cannot trap the search. Among equal-cost paths
    the one with fewer arcs wins, then the lower predecessor fragment id.
    """
    n = g.node_capacity
    inf = float("inf")
    dist = [inf] * n
    hops = [0] * n
    parent: list[Optional[tuple[Arc, int]]] = [None] * n
    count = [0] * n
    dist[SOURCE] = 0.0
    queue = deque([SOURCE])
    in_queue = [False] * n
    in_queue[SOURCE] = True
    limit = g.node_count + 1

    while queue:
        a = queue.popleft()
        in_queue[a] = False
        if a == target:
            continue
        da = dist[a]
        ha = hops[a] + 1
        for eid, rev, b, c in g.residual_arcs(a):
            if b == SOURCE:
                continue
            nd = da + c
            db = dist[b]
            if nd < db - PATH_TOL:
                better = True
            elif nd <= db + PATH_TOL:
                hb = hops[b]
                better = ha < hb or (
                    ha == hb
                    and parent[b] is not None
                    and _pred_key(g, a) < _pred_key(g, parent[b][1])
                )
            else:
                better = False
            if not better:
                continue
            dist[b] = nd
            hops[b] = ha
            parent[b] = ((eid, rev), a)
            if not in_queue[b]:
                count[b] += 1
                if count[b] > limit:
                    raise SolverStall("negative cycle reachable from the source")
                in_queue[b] = True
                queue.append(b)

    if parent[target] is None:
        return None
    arcs: list[Arc] = []
    node = target
    for _ in range(n):
        if node == SOURCE:
            break
        arc, node = parent[node]
        arcs.append(arc)
    else:
        raise SolverStall("parent pointers do not lead back to the source")
    arcs.reverse()
    cost = sum(g.arc_endpoints(arc)[2] for arc in arcs)
    return arcs, cost


def find_min_cycle(
    g: ResidualGraph, u_k: int, v_k: int, eps: float = EPS_CYCLE
) -> Optional[Cycle]:
    """Cheapest cycle through ``u_k -> v_k -> s`` if its cost is below ``-eps``."""
    frag_id = g.fragment_of(u_k)
    _, incl, exit_ = g.structural_edges(frag_id)
    if g.edge(incl).flow or g.edge(exit_).flow:
        raise ValueError(f"fragment {frag_id} already carries flow")
    sp = shortest_path_from_source(g, u_k)
    if sp is None:
        return None
    arcs, path_cost = sp
    total = path_cost + g.edge(incl).cost + g.edge(exit_).cost
    if total < -eps:
        return Cycle(arcs + [(incl, False), (exit_, False)], total)
    return None


class OnlineSolver:
    """Streaming association state.

    ``window`` is the eviction threshold in seconds; ``None`` keeps every
    circulation until :meth:`finalize`. In strict mode an out-of-order
    fragment raises; otherwise it is admitted and the run is flagged as not
    certified optimal.
    """

    def __init__(
        self,
        cfg: Optional[CostConfig] = None,
        window: Optional[float] = None,
        strict: bool = True,
        eps: float = EPS_CYCLE,
        cost_fn: TransitionFn = transition_cost,
    ):
        self.cfg = cfg if cfg is not None else CostConfig()
        if window is not None and window <= 0:
            raise ValueError("window must be positive")
        self.window = window
        self.strict = strict
        self.eps = eps
        self.cost_fn = cost_fn
        self.graph = ResidualGraph()
        self.live_fragments: dict[str, Fragment] = {}
        self.last_admitted_t = float("-inf")
        self.stats = SolverStats()
        self.emitted: list[Trajectory] = []
        self.unassociated: list[str] = []
        self.certified = True
        self.last_cycle: Optional[Cycle] = None
        self._k = 0

    def add_node(self, frag: Fragment) -> tuple[int, int]:
        preds = candidate_predecessors(
            self.cfg, self.live_fragments.values(), frag, self.cost_fn
        )
        c_en, c_ex = enter_exit_costs(self.cfg, frag)
        u, v = self.graph.add_fragment_node(
            frag,
            c_en,
            c_ex,
            inclusion_cost(self.cfg, frag),
            [(self.graph.nodes_of(fid)[1], c) for fid, c in preds],
        )
        self.live_fragments[frag.id] = frag
        return u, v

    def step(self, frag: Fragment) -> list[Trajectory]:
        """Admit one fragment; return trajectories evicted during this step."""
        if frag.last_t < self.last_admitted_t:
            if self.strict:
                raise OutOfOrderFragment(
                    f"fragment {frag.id} ends at {frag.last_t} before {self.last_admitted_t}"
                )
            log.warning("admitting out-of-order fragment %s; result is not certified", frag.id)
            self.certified = False
        self._k += 1

        t0 = time.perf_counter()
        u, v = self.add_node(frag)
        t1 = time.perf_counter()
        cycle = find_min_cycle(self.graph, u, v, self.eps)
        t2 = time.perf_counter()
        if cycle is not None:
            self.graph.push_flow(cycle)
        self.last_cycle = cycle
        t3 = time.perf_counter()
        self.last_admitted_t = max(self.last_admitted_t, frag.last_t)
        out: list[Trajectory] = []
        if self.window is not None:
            out = self.clean_graph(self.last_admitted_t)
        t4 = time.perf_counter()

        self.stats.records.append(
            IterationStats(
                self._k,
                self.graph.node_count,
                self.graph.edge_count,
                t1 - t0,
                t2 - t1,
                t3 - t2,
                t4 - t3,
            )
        )
        return out

    def clean_graph(self, now: float) -> list[Trajectory]:
        """Evict circulations whose tail ended before ``now - window``.

        Fragments that carry no flow and have themselves timed out are
        dropped without emission and recorded in ``unassociated``.
        """
        if self.window is None:
            return []
        cutoff = now - self.window
        g = self.graph
        out = []
        for post in g.tails():
            frag_id = g.fragment_of(post)
            if g.fragment_times(frag_id)[1] < cutoff:
                traj = g.remove_circulation(post)
                for fid in traj.fragment_ids:
                    del self.live_fragments[fid]
                out.append(traj)
        for frag_id in g.fragment_ids():
            if g.fragment_times(frag_id)[1] < cutoff:
                _, incl, _ = g.structural_edges(frag_id)
                if not g.edge(incl).flow:
                    g.remove_fragment(frag_id)
                    del self.live_fragments[frag_id]
                    self.unassociated.append(frag_id)
        out.sort(key=lambda tr: (tr.first_timestamp, tr.fragment_ids))
        self.emitted.extend(out)
        return out

    def finalize(self) -> list[Trajectory]:
        """Trajectories still held in the graph (disjoint from ``emitted``)."""
        return self.graph.extract_trajectories()

    def run(self, frags) -> list[Trajectory]:
        """Feed every fragment and return the full association, sorted."""
        for frag in frags:
            self.step(frag)
        trajs = self.emitted + self.finalize()
        trajs.sort(key=lambda tr: (tr.first_timestamp, tr.fragment_ids))
        return trajs

    def flow_cost(self) -> float:
        """Objective of the whole run, evicted circulations included."""
        return self.graph.total_cost()
