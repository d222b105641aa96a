"""Undirected multigraph with identified parallel edges, plus the graph
primitives the rest of the package needs (degrees, connectivity, Eulerian
circuits, global minimum cut, unit-capacity max-flow)."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

from .errors import Disconnected, EndpointOutOfRange, OddDegree, SelfLoop


class Edge(NamedTuple):
    id: int
    u: int
    v: int
    cost: Fraction


# edge_id -> multiplicity in {0, 1, 2}; either a dense sequence or a mapping
MultiplicityMap = Union[Sequence[int], Mapping[int, int]]


@dataclass(frozen=True)
class Multigraph:
    vertex_count: int
    edges: tuple[Edge, ...]
    # multigraph edge id -> index of the support (LP) edge it was copied from
    origin: tuple[int, ...] | None = None

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def incidence(self) -> tuple[tuple[int, ...], ...]:
        """Edge ids incident to each vertex, in increasing id order."""
        inc: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for e in self.edges:
            inc[e.u].append(e.id)
            inc[e.v].append(e.id)
        return tuple(tuple(lst) for lst in inc)

    def degree(self, v: int) -> int:
        return len(self.incidence[v])

    def other(self, edge_id: int, v: int) -> int:
        e = self.edges[edge_id]
        return e.v if e.u == v else e.u

    def boundary(self, members: Iterable[int]) -> frozenset[int]:
        """Edge ids with exactly one endpoint in ``members``."""
        inside = set(members)
        return frozenset(e.id for e in self.edges if (e.u in inside) != (e.v in inside))

    def cut_size(self, members: Iterable[int]) -> int:
        return len(self.boundary(members))

    def total_cost(self) -> Fraction:
        return sum((e.cost for e in self.edges), Fraction(0))


def build_multigraph(vertex_count: int, edge_list: Iterable[Sequence]) -> Multigraph:
    """Build a multigraph; edge ids follow input order.

    Each item is ``(u, v)`` or ``(u, v, cost)``; cost defaults to 1.
    """
    if vertex_count < 1:
        raise EndpointOutOfRange(f"vertex_count must be positive, got {vertex_count}")
    edges = []
    for idx, item in enumerate(edge_list):
        u, v = int(item[0]), int(item[1])
        cost = Fraction(item[2]) if len(item) > 2 else Fraction(1)
        if not (0 <= u < vertex_count and 0 <= v < vertex_count):
            raise EndpointOutOfRange(f"edge {idx} = ({u}, {v}) outside 0..{vertex_count - 1}")
        if u == v:
            raise SelfLoop(f"edge {idx} is a self-loop at vertex {u}")
        if cost < 0:
            raise ValueError(f"edge {idx} has negative cost {cost}")
        edges.append(Edge(idx, u, v, cost))
    return Multigraph(vertex_count, tuple(edges))


def multiplicity_vector(g: Multigraph, m: MultiplicityMap) -> tuple[int, ...]:
    if isinstance(m, Mapping):
        return tuple(int(m.get(e.id, 0)) for e in g.edges)
    if len(m) != g.edge_count:
        raise ValueError(f"multiplicity vector has length {len(m)}, expected {g.edge_count}")
    return tuple(int(x) for x in m)


def weighted_degrees(g: Multigraph, m: MultiplicityMap) -> list[int]:
    mult = multiplicity_vector(g, m)
    deg = [0] * g.vertex_count
    for e in g.edges:
        deg[e.u] += mult[e.id]
        deg[e.v] += mult[e.id]
    return deg


def _reachable(g: Multigraph, start: int, usable: Sequence[bool]) -> list[bool]:
    seen = [False] * g.vertex_count
    seen[start] = True
    stack = [start]
    while stack:
        v = stack.pop()
        for eid in g.incidence[v]:
            if usable[eid]:
                w = g.other(eid, v)
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
    return seen


def is_connected(g: Multigraph) -> bool:
    return all(_reachable(g, 0, [True] * g.edge_count))


def is_connected_spanning(g: Multigraph, m: MultiplicityMap) -> bool:
    """True iff positive-multiplicity edges connect every vertex to vertex 0
    and every vertex has degree at least 2 under ``m``."""
    mult = multiplicity_vector(g, m)
    if any(d < 2 for d in weighted_degrees(g, mult)):
        return False
    return all(_reachable(g, 0, [x > 0 for x in mult]))


class Circuit(NamedTuple):
    vertices: tuple[int, ...]  # closed: first == last
    edges: tuple[int, ...]  # edges[i] joins vertices[i] and vertices[i + 1]


def euler_circuit(g: Multigraph, m: MultiplicityMap) -> Circuit:
    """Hierholzer's algorithm, always extending along the lowest available edge id."""
    mult = multiplicity_vector(g, m)
    if any(x < 0 for x in mult):
        raise ValueError("negative multiplicity")
    deg = weighted_degrees(g, mult)
    odd = [v for v, d in enumerate(deg) if d % 2]
    if odd:
        raise OddDegree(f"vertices with odd degree: {odd}")
    if any(d == 0 for d in deg):
        raise Disconnected(f"vertices untouched by the edge selection: {[v for v, d in enumerate(deg) if d == 0]}")
    if not all(_reachable(g, 0, [x > 0 for x in mult])):
        raise Disconnected("selected edges do not form a connected multigraph")

    remaining = list(mult)
    ptr = [0] * g.vertex_count
    inc = g.incidence
    stack: list[tuple[int, int]] = [(0, -1)]
    popped: list[tuple[int, int]] = []
    while stack:
        v, _ = stack[-1]
        lst = inc[v]
        i = ptr[v]
        while i < len(lst) and remaining[lst[i]] == 0:
            i += 1
        ptr[v] = i
        if i == len(lst):
            popped.append(stack.pop())
        else:
            eid = lst[i]
            remaining[eid] -= 1
            stack.append((g.other(eid, v), eid))
    vertices = tuple(v for v, _ in reversed(popped))
    edges = tuple(e for _, e in reversed(popped[:-1]))
    return Circuit(vertices, edges)


def global_min_cut_value(g: Multigraph) -> int:
    """Stoer-Wagner on the edge-count weighted simple graph."""
    n = g.vertex_count
    if n < 2:
        raise ValueError("global min cut needs at least two vertices")
    if not is_connected(g):
        raise Disconnected("graph is not connected")
    w = [[0] * n for _ in range(n)]
    for e in g.edges:
        w[e.u][e.v] += 1
        w[e.v][e.u] += 1
    active = list(range(n))
    best = None
    while len(active) > 1:
        # maximum adjacency ordering over the active super-vertices
        weights = {v: 0 for v in active}
        order = []
        remaining = set(active)
        while remaining:
            v = max(remaining, key=lambda x: (weights[x], -x))
            remaining.remove(v)
            order.append(v)
            for x in remaining:
                weights[x] += w[v][x]
        s, t = order[-2], order[-1]
        phase = weights[t]
        best = phase if best is None else min(best, phase)
        for x in active:
            w[s][x] += w[t][x]
            w[x][s] = w[s][x]
        w[s][s] = 0
        active.remove(t)
    return best


class FlowResult(NamedTuple):
    value: int
    # flow[e] is +1 when edge e carries flow u -> v, -1 when v -> u, else 0
    flow: tuple[int, ...]


def unit_max_flow(g: Multigraph, s: int, t: int, limit: int | None = None) -> FlowResult:
    """Max-flow where every parallel edge is an undirected unit-capacity arc.

    With ``limit`` set, augmentation stops once the flow reaches ``limit``.
    """
    if s == t:
        raise ValueError("source equals sink")
    flow = [0] * g.edge_count
    value = 0
    while limit is None or value < limit:
        pred: list[int | None] = [None] * g.vertex_count
        pred[s] = -1
        queue = deque([s])
        while queue and pred[t] is None:
            v = queue.popleft()
            for eid in g.incidence[v]:
                e = g.edges[eid]
                w, sign = (e.v, 1) if e.u == v else (e.u, -1)
                if pred[w] is None and flow[eid] * sign < 1:
                    pred[w] = eid
                    queue.append(w)
        if pred[t] is None:
            break
        v = t
        while v != s:
            eid = pred[v]
            e = g.edges[eid]
            if e.v == v:
                flow[eid] += 1
                v = e.u
            else:
                flow[eid] -= 1
                v = e.v
        value += 1
    return FlowResult(value, tuple(flow))


def residual_successors(g: Multigraph, flow: Sequence[int]) -> list[list[int]]:
    """Adjacency lists of the residual graph of a unit undirected flow."""
    succ: list[list[int]] = [[] for _ in range(g.vertex_count)]
    for e in g.edges:
        f = flow[e.id]
        if f < 1:
            succ[e.u].append(e.v)
        if f > -1:
            succ[e.v].append(e.u)
    return succ
