"""Unit-capacity circulation graph for fragment association.

Every fragment ``i`` owns a pre node ``u_i`` and a post node ``v_i``. A single
source node ``s`` closes every trajectory into a cycle::

    s -> u_i          entering edge
    u_i -> v_i        inclusion edge
    v_i -> s          exiting edge
    v_i -> u_j        transition edge (j may follow i)

Residual arcs are not stored. An original edge with zero flow is traversable
forward at its cost; an edge carrying flow is traversable backward at the
negated cost.
"""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

from .costs import Fragment
from .errors import CorruptFlow, DuplicateFragment, NotATail, SaturatedEdge, UnknownPredecessor

EPS_CYCLE = 1e-9

SOURCE = 0


class Role(enum.Enum):
    SOURCE = "source"
    PRE = "pre"
    POST = "post"


class Kind(enum.Enum):
    ENTERING = "entering"
    INCLUSION = "inclusion"
    EXITING = "exiting"
    TRANSITION = "transition"


@dataclass(slots=True)
class Edge:
    tail: int
    head: int
    cost: float
    kind: Kind
    flow: int = 0


# (edge id, traversed backwards)
Arc = tuple[int, bool]


@dataclass
class Cycle:
    arcs: list[Arc]
    total_cost: float

    def __len__(self) -> int:
        return len(self.arcs)


@dataclass(frozen=True)
class Trajectory:
    fragment_ids: tuple[str, ...]
    first_timestamp: float
    last_timestamp: float


@dataclass
class _FragmentSlot:
    pre: int
    post: int
    first_t: float
    last_t: float
    inclusion: int = -1
    entering: int = -1
    exiting: int = -1


class ResidualGraph:
    """Circulation graph with its residual view.

    Node and edge ids are dense integers recycled through min-heaps, so a long
    online run touches only as many slots as the peak graph size.
    """

    def __init__(self) -> None:
        self._role: list[Optional[Role]] = [Role.SOURCE]
        self._frag_of: list[Optional[str]] = [None]
        self._adj: list[Optional[dict[int, None]]] = [{}]
        self._free_nodes: list[int] = []
        self._edges: list[Optional[Edge]] = []
        self._free_edges: list[int] = []
        self._slots: dict[str, _FragmentSlot] = {}
        self._n_nodes = 1
        self._n_edges = 0
        self.removed_cost = 0.0

    # ------------------------------------------------------------------ sizes
    @property
    def node_count(self) -> int:
        return self._n_nodes

    @property
    def edge_count(self) -> int:
        return self._n_edges

    @property
    def node_capacity(self) -> int:
        """Upper bound (exclusive) on node ids currently in use."""
        return len(self._role)

    def nodes(self) -> Iterator[int]:
        return (n for n, r in enumerate(self._role) if r is not None)

    def edges(self) -> Iterator[tuple[int, Edge]]:
        return ((i, e) for i, e in enumerate(self._edges) if e is not None)

    def edge(self, eid: int) -> Edge:
        e = self._edges[eid]
        if e is None:
            raise KeyError(eid)
        return e

    def role(self, node: int) -> Role:
        r = self._role[node]
        if r is None:
            raise KeyError(node)
        return r

    def fragment_of(self, node: int) -> Optional[str]:
        return self._frag_of[node]

    def __contains__(self, frag_id: str) -> bool:
        return frag_id in self._slots

    def fragment_ids(self) -> list[str]:
        return list(self._slots)

    def nodes_of(self, frag_id: str) -> tuple[int, int]:
        slot = self._slots[frag_id]
        return slot.pre, slot.post

    def fragment_times(self, frag_id: str) -> tuple[float, float]:
        slot = self._slots[frag_id]
        return slot.first_t, slot.last_t

    def structural_edges(self, frag_id: str) -> tuple[int, int, int]:
        """Edge ids of (entering, inclusion, exiting) for a fragment."""
        slot = self._slots[frag_id]
        return slot.entering, slot.inclusion, slot.exiting

    # -------------------------------------------------------------- mutation
    def _new_node(self, role: Role, frag_id: str) -> int:
        if self._free_nodes:
            n = heapq.heappop(self._free_nodes)
            self._role[n] = role
            self._frag_of[n] = frag_id
            self._adj[n] = {}
        else:
            n = len(self._role)
            self._role.append(role)
            self._frag_of.append(frag_id)
            self._adj.append({})
        self._n_nodes += 1
        return n

    def _new_edge(self, tail: int, head: int, cost: float, kind: Kind) -> int:
        if not math.isfinite(cost):
            raise ValueError(f"edge cost must be finite, got {cost}")
        e = Edge(tail, head, float(cost), kind)
        if self._free_edges:
            eid = heapq.heappop(self._free_edges)
            self._edges[eid] = e
        else:
            eid = len(self._edges)
            self._edges.append(e)
        self._adj[tail][eid] = None
        self._adj[head][eid] = None
        self._n_edges += 1
        return eid

    def _drop_edge(self, eid: int) -> None:
        e = self._edges[eid]
        del self._adj[e.tail][eid]
        del self._adj[e.head][eid]
        self._edges[eid] = None
        heapq.heappush(self._free_edges, eid)
        self._n_edges -= 1

    def _drop_node(self, n: int) -> None:
        for eid in list(self._adj[n]):
            self._drop_edge(eid)
        self._role[n] = None
        self._frag_of[n] = None
        self._adj[n] = None
        heapq.heappush(self._free_nodes, n)
        self._n_nodes -= 1

    def add_fragment_node(
        self,
        frag: Fragment,
        enter_cost: float,
        exit_cost: float,
        incl_cost: float,
        predecessors: Sequence[tuple[int, float]] = (),
    ) -> tuple[int, int]:
        """Insert ``frag`` with its three structural edges and transition edges.

        ``predecessors`` pairs an existing post node with the cost of the
        transition edge from it into the new pre node.
        """
        if frag.id in self._slots:
            raise DuplicateFragment(frag.id)
        for post, _ in predecessors:
            if not (0 <= post < len(self._role)) or self._role[post] is not Role.POST:
                raise UnknownPredecessor(post)
        u = self._new_node(Role.PRE, frag.id)
        v = self._new_node(Role.POST, frag.id)
        slot = _FragmentSlot(u, v, frag.first_t, frag.last_t)
        slot.entering = self._new_edge(SOURCE, u, enter_cost, Kind.ENTERING)
        slot.inclusion = self._new_edge(u, v, incl_cost, Kind.INCLUSION)
        slot.exiting = self._new_edge(v, SOURCE, exit_cost, Kind.EXITING)
        for post, cost in predecessors:
            self._new_edge(post, u, cost, Kind.TRANSITION)
        self._slots[frag.id] = slot
        return u, v

    def remove_fragment(self, frag_id: str) -> None:
        """Delete a fragment that carries no flow."""
        slot = self._slots[frag_id]
        if self._edges[slot.inclusion].flow:
            raise CorruptFlow(f"fragment {frag_id} carries flow; remove its circulation instead")
        self._drop_node(slot.pre)
        self._drop_node(slot.post)
        del self._slots[frag_id]

    # -------------------------------------------------------------- residual
    def residual_arcs(self, node: int) -> Iterator[tuple[int, bool, int, float]]:
        """Yield ``(edge id, reversed, neighbour, cost)`` for each residual arc out of ``node``."""
        edges = self._edges
        for eid in self._adj[node]:
            e = edges[eid]
            if e.flow:
                if e.head == node:
                    yield eid, True, e.tail, -e.cost
            elif e.tail == node:
                yield eid, False, e.head, e.cost

    def arc_endpoints(self, arc: Arc) -> tuple[int, int, float]:
        eid, rev = arc
        e = self.edge(eid)
        if rev:
            return e.head, e.tail, -e.cost
        return e.tail, e.head, e.cost

    def arc_available(self, arc: Arc) -> bool:
        eid, rev = arc
        e = self._edges[eid] if 0 <= eid < len(self._edges) else None
        if e is None:
            return False
        return e.flow == (1 if rev else 0)

    def push_flow(self, cycle: Cycle) -> None:
        """Send one unit of flow around ``cycle``."""
        seen = set()
        prev_head = None
        first_tail = None
        for arc in cycle.arcs:
            if arc[0] in seen:
                raise SaturatedEdge(f"edge {arc[0]} appears twice in the cycle")
            seen.add(arc[0])
            if not self.arc_available(arc):
                raise SaturatedEdge(f"residual arc {arc} has no capacity")
            tail, head, _ = self.arc_endpoints(arc)
            if prev_head is not None and tail != prev_head:
                raise ValueError("cycle arcs are not contiguous")
            if first_tail is None:
                first_tail = tail
            prev_head = head
        if cycle.arcs and prev_head != first_tail:
            raise ValueError("cycle is not closed")
        for eid, rev in cycle.arcs:
            self._edges[eid].flow = 0 if rev else 1

    def total_cost(self) -> float:
        """Cost of the flow currently in the graph plus every removed circulation."""
        return math.fsum([self.removed_cost] + [e.cost for _, e in self.edges() if e.flow])

    # ---------------------------------------------------------- trajectories
    def _flow_in(self, node: int) -> int:
        found = -1
        for eid in self._adj[node]:
            e = self._edges[eid]
            if e.head == node and e.flow:
                if found >= 0:
                    raise CorruptFlow(f"node {node} receives more than one unit of flow")
                found = eid
        if found < 0:
            raise CorruptFlow(f"node {node} carries outflow but no inflow")
        return found

    def _trace_back(self, post: int) -> list[str]:
        """Fragments of the circulation whose tail post node is ``post``, head first."""
        frags: list[str] = []
        node = post
        for _ in range(self._n_nodes):
            frag_id = self._frag_of[node]
            if self._role[node] is not Role.POST or frag_id is None:
                raise CorruptFlow(f"expected a post node, found {node}")
            slot = self._slots[frag_id]
            if not self._edges[slot.inclusion].flow:
                raise CorruptFlow(f"fragment {frag_id} is on a circulation but not included")
            frags.append(frag_id)
            e = self._edges[self._flow_in(slot.pre)]
            if e.tail == SOURCE:
                frags.reverse()
                return frags
            node = e.tail
        raise CorruptFlow("circulation does not return to the source")

    def _make_trajectory(self, frag_ids: list[str]) -> Trajectory:
        return Trajectory(
            tuple(frag_ids),
            self._slots[frag_ids[0]].first_t,
            self._slots[frag_ids[-1]].last_t,
        )

    def tails(self) -> list[int]:
        """Post nodes whose exiting edge carries flow, in id order."""
        out = []
        for eid in self._adj[SOURCE]:
            e = self._edges[eid]
            if e.head == SOURCE and e.flow:
                out.append(e.tail)
        out.sort()
        return out

    def extract_trajectories(self) -> list[Trajectory]:
        """Trace every unit circulation, sorted by first timestamp then fragment ids."""
        trajs = [self._make_trajectory(self._trace_back(v)) for v in self.tails()]
        n_out = sum(
            1 for eid in self._adj[SOURCE]
            if self._edges[eid].tail == SOURCE and self._edges[eid].flow
        )
        if n_out != len(trajs):
            raise CorruptFlow("source is unbalanced")
        trajs.sort(key=lambda tr: (tr.first_timestamp, tr.fragment_ids))
        return trajs

    def remove_circulation(self, tail_post: int) -> Trajectory:
        """Delete the circulation ending at ``tail_post`` and return it as a trajectory."""
        if not (0 <= tail_post < len(self._role)) or self._role[tail_post] is not Role.POST:
            raise NotATail(f"node {tail_post} is not a post node")
        slot = self._slots[self._frag_of[tail_post]]
        if not self._edges[slot.exiting].flow:
            raise NotATail(f"exiting edge of node {tail_post} carries no flow")
        frag_ids = self._trace_back(tail_post)
        traj = self._make_trajectory(frag_ids)
        terms = [self._edges[slot.exiting].cost]
        for fid in frag_ids:
            s = self._slots[fid]
            terms.append(self._edges[s.inclusion].cost)
            terms.append(self._edges[self._flow_in(s.pre)].cost)
        self.removed_cost += math.fsum(terms)
        for fid in frag_ids:
            s = self._slots.pop(fid)
            self._drop_node(s.pre)
            self._drop_node(s.post)
        return traj

    # ---------------------------------------------------------- verification
    def check_conservation(self) -> None:
        """Raise CorruptFlow unless every node is balanced with unit flows."""
        bal = [0] * len(self._role)
        for _, e in self.edges():
            if e.flow not in (0, 1):
                raise CorruptFlow(f"non-binary flow {e.flow}")
            bal[e.tail] -= e.flow
            bal[e.head] += e.flow
        if any(bal):
            raise CorruptFlow("flow is not conserved")


def new_graph() -> ResidualGraph:
    return ResidualGraph()


def has_negative_cycle(g: ResidualGraph, eps: float = EPS_CYCLE) -> bool:
    """Bellman-Ford from a virtual root over every residual arc.

    Each arc cost is shifted up by ``eps / |V|`` so that a simple cycle is
    flagged whenever its true cost is below ``-eps``, while rounding noise on
    zero-cost cycles is not.
    """
    nodes = list(g.nodes())
    shift = eps / max(len(nodes), 1)
    arcs = []
    for _, e in g.edges():
        if e.flow:
            arcs.append((e.head, e.tail, -e.cost + shift))
        else:
            arcs.append((e.tail, e.head, e.cost + shift))
    dist = {n: 0.0 for n in nodes}
    for _ in range(len(nodes)):
        changed = False
        for a, b, c in arcs:
            nd = dist[a] + c
            if nd < dist[b]:
                dist[b] = nd
                changed = True
        if not changed:
            return False
    return True
