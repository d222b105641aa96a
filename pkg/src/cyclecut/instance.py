"""Half-integral LP points: loading, validation, the support multigraph,
benchmark generators and the exact TSP oracle."""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Sequence, Union

import numpy as np

from ._rational import format_fraction, parse_fraction
from .errors import (
    BlueprintInvalid,
    DegenerateInstance,
    DegreeViolation,
    EndpointOutOfRange,
    HalfIntegralityViolation,
    MetricUndefined,
    ParseError,
    SelfLoop,
    SubtourViolation,
    TooLarge,
)
from .multigraph import Edge, Multigraph, global_min_cut_value, is_connected

HALF = Fraction(1, 2)
ONE = Fraction(1)


@dataclass(frozen=True)
class SupportEdge:
    u: int
    v: int
    x: Fraction
    cost: Fraction


@dataclass(frozen=True)
class Instance:
    n: int
    edges: tuple[SupportEdge, ...]
    root: int | None = None

    @property
    def root_vertex(self) -> int:
        return 0 if self.root is None else self.root


def make_instance(n: int, edges: Sequence[Sequence], root: int | None = None) -> Instance:
    """Convenience constructor from ``(u, v, x)`` or ``(u, v, x, cost)`` tuples."""
    out = []
    for item in edges:
        cost = Fraction(item[3]) if len(item) > 3 else ONE
        out.append(SupportEdge(int(item[0]), int(item[1]), Fraction(item[2]), cost))
    return Instance(n, tuple(out), root)


# ---------------------------------------------------------------- validation


def validate_instance(inst: Instance) -> Instance:
    n = inst.n
    if n < 4:
        raise DegenerateInstance(f"need at least 4 vertices, got {n}")
    if inst.root is not None and not 0 <= inst.root < n:
        raise EndpointOutOfRange(f"root {inst.root} outside 0..{n - 1}")
    seen = set()
    load = [Fraction(0)] * n
    for i, e in enumerate(inst.edges):
        if not (0 <= e.u < n and 0 <= e.v < n):
            raise EndpointOutOfRange(f"support edge {i} = ({e.u}, {e.v}) outside 0..{n - 1}")
        if e.u == e.v:
            raise SelfLoop(f"support edge {i} is a self-loop")
        if e.x not in (HALF, ONE):
            raise HalfIntegralityViolation(f"support edge {i} has x = {e.x}, expected 1/2 or 1")
        if e.cost < 0:
            raise ParseError(f"support edge {i} has negative cost {e.cost}")
        key = (min(e.u, e.v), max(e.u, e.v))
        if key in seen:
            raise ParseError(f"support edge {key} listed twice")
        seen.add(key)
        load[e.u] += e.x
        load[e.v] += e.x
    bad = [v for v in range(n) if load[v] != 2]
    if bad:
        v = bad[0]
        raise DegreeViolation(f"x(delta({v})) = {load[v]} != 2 (violating vertices: {bad})")
    g = support_multigraph(inst)
    if not is_connected(g):
        raise SubtourViolation("support graph is disconnected")
    cut = global_min_cut_value(g)
    if cut < 4:
        raise SubtourViolation(f"support multigraph has a cut of size {cut} < 4")
    return inst


_TOP_FIELDS = {"n", "root", "edges"}
_EDGE_FIELDS = {"u", "v", "x", "cost"}


def load_instance(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError("instance must be a JSON object")
    unknown = set(data) - _TOP_FIELDS
    if unknown:
        raise ParseError(f"unknown fields: {sorted(unknown)}")
    if "n" not in data or "edges" not in data:
        raise ParseError("instance needs 'n' and 'edges'")
    n, root, raw_edges = data["n"], data.get("root"), data["edges"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise ParseError("'n' must be an integer")
    if root is not None and (not isinstance(root, int) or isinstance(root, bool)):
        raise ParseError("'root' must be an integer")
    if not isinstance(raw_edges, list):
        raise ParseError("'edges' must be a list")
    edges = []
    for i, item in enumerate(raw_edges):
        if not isinstance(item, dict):
            raise ParseError(f"edge {i} must be an object")
        unknown = set(item) - _EDGE_FIELDS
        if unknown:
            raise ParseError(f"edge {i}: unknown fields {sorted(unknown)}")
        missing = {"u", "v", "x"} - set(item)
        if missing:
            raise ParseError(f"edge {i}: missing fields {sorted(missing)}")
        u, v = item["u"], item["v"]
        if not all(isinstance(a, int) and not isinstance(a, bool) for a in (u, v)):
            raise ParseError(f"edge {i}: endpoints must be integers")
        try:
            x = parse_fraction(item["x"])
            cost = parse_fraction(item.get("cost", "1"))
        except ValueError as exc:
            raise ParseError(f"edge {i}: {exc}") from exc
        edges.append(SupportEdge(u, v, x, cost))
    return validate_instance(Instance(n, tuple(edges), root))


def dump_instance(inst: Instance) -> str:
    data: dict = {"n": inst.n}
    if inst.root is not None:
        data["root"] = inst.root
    data["edges"] = [
        {"u": e.u, "v": e.v, "x": format_fraction(e.x), "cost": format_fraction(e.cost)}
        for e in inst.edges
    ]
    return json.dumps(data, indent=1) + "\n"


def support_multigraph(inst: Instance) -> Multigraph:
    """One copy of each x=1/2 edge, two parallel copies of each x=1 edge.

    ``origin`` maps each multigraph edge id back to its support edge index.
    """
    edges = []
    origin = []
    for i, e in enumerate(inst.edges):
        copies = 2 if e.x == ONE else 1
        for _ in range(copies):
            edges.append(Edge(len(edges), e.u, e.v, e.cost))
            origin.append(i)
    return Multigraph(inst.n, tuple(edges), tuple(origin))


def lp_value(inst: Instance) -> Fraction:
    return sum((e.cost * e.x for e in inst.edges), Fraction(0))


# ---------------------------------------------------------------- generators


def gen_figure1(k: int, costs: Sequence | None = None) -> Instance:
    """Two x=1/2 triangles u1u2u3, w1w2w3 joined by three x=1 paths u_i..w_i,
    each with ``k`` internal vertices.

    Vertices: u1,u2,u3 = 0,1,2; w1,w2,w3 = 3,4,5; path i's internal vertices
    follow in order. ``costs`` (one per support edge, in output order)
    defaults to unit costs.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    pairs: list[tuple[int, int, Fraction]] = []
    for a, b in ((0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)):
        pairs.append((a, b, HALF))
    nxt = 6
    for i in range(3):
        prev = i
        for _ in range(k):
            pairs.append((prev, nxt, ONE))
            prev = nxt
            nxt += 1
        pairs.append((prev, 3 + i, ONE))
    if costs is None:
        costs = [ONE] * len(pairs)
    if len(costs) != len(pairs):
        raise ValueError(f"expected {len(pairs)} costs, got {len(costs)}")
    edges = tuple(SupportEdge(u, v, x, Fraction(c)) for (u, v, x), c in zip(pairs, costs))
    return Instance(6 + 3 * k, edges, root=0)


def gen_doubled_cycle(n: int) -> Instance:
    return Instance(n, tuple(SupportEdge(i, (i + 1) % n, ONE, ONE) for i in range(n)), root=None)


@dataclass(frozen=True)
class Leaf:
    pass


@dataclass(frozen=True)
class Chain:
    children: tuple["Blueprint", ...]

    def __init__(self, *children: "Blueprint"):
        if len(children) == 1 and isinstance(children[0], (list, tuple)):
            children = tuple(children[0])
        object.__setattr__(self, "children", tuple(children))


Blueprint = Union[Leaf, Chain]


def blueprint_leaves(b: Blueprint) -> int:
    if isinstance(b, Leaf):
        return 1
    return sum(blueprint_leaves(c) for c in b.children)


def check_blueprint(b: Blueprint, top: bool = True) -> None:
    if isinstance(b, Leaf):
        if top:
            raise BlueprintInvalid("top-level blueprint must be a Chain")
        return
    if not isinstance(b, Chain):
        raise BlueprintInvalid(f"not a blueprint node: {b!r}")
    if len(b.children) < 2:
        raise BlueprintInvalid("every Chain needs at least two children")
    for c in b.children:
        check_blueprint(c, top=False)
    if top and blueprint_leaves(b) < 3:
        raise BlueprintInvalid("blueprint needs at least three leaves (n >= 4 with the root)")


def random_blueprint(rng: random.Random, leaves: int, max_children: int = 5) -> Blueprint:
    """Random Chain tree with exactly ``leaves`` leaves (``leaves >= 3``)."""
    if leaves < 3:
        raise BlueprintInvalid("need at least three leaves")

    def build(count: int) -> Blueprint:
        if count == 1:
            return Leaf()
        k = rng.randint(2, min(count, max_children))
        cuts = sorted(rng.sample(range(1, count), k - 1))
        sizes = [b - a for a, b in zip([0] + cuts, cuts + [count])]
        return Chain(*(build(s) for s in sizes))

    return build(leaves)


@dataclass(frozen=True)
class Realization:
    instance: Instance
    # vertex set of every Chain node, preorder; index 0 is the top-level node
    node_sets: tuple[frozenset[int], ...] = field(default=())


def realize_blueprint(blueprint: Blueprint, seed: int, unit_costs: bool = False) -> Realization:
    """Build a 4-regular cycle-cut instance whose critical-cut hierarchy is the blueprint.

    Every node exposes two ports toward each chain neighbour, one at each end
    of its own chain; consecutive children are joined port to port. The four
    ports of the top-level node are attached to a fresh root vertex.
    """
    check_blueprint(blueprint)
    rng = random.Random(seed)
    edges: list[tuple[int, int]] = []
    node_sets: list[frozenset[int]] = []
    counter = [0]

    def realize(node: Blueprint) -> tuple[list[int], list[int], frozenset[int]]:
        if isinstance(node, Leaf):
            v = counter[0]
            counter[0] += 1
            return [v, v], [v, v], frozenset([v])
        slot = len(node_sets)
        node_sets.append(frozenset())
        parts = [realize(c) for c in node.children]
        for (_, right, _), (left, _, _) in zip(parts, parts[1:]):
            if rng.random() < 0.5:
                left = left[::-1]
            edges.append((right[0], left[0]))
            edges.append((right[1], left[1]))
        first_left, last_right = parts[0][0], parts[-1][1]
        a, b = rng.randrange(2), rng.randrange(2)
        members = frozenset().union(*(p[2] for p in parts))
        node_sets[slot] = members
        return [first_left[a], last_right[b]], [first_left[1 - a], last_right[1 - b]], members

    left, right, _ = realize(blueprint)
    root = counter[0]
    for v in left + right:
        edges.append((v, root))

    mult = Counter((min(u, v), max(u, v)) for u, v in edges)
    support = []
    for (u, v), count in sorted(mult.items()):
        if count > 2:
            raise BlueprintInvalid(f"construction produced {count} parallel edges {u}-{v}")
        cost = ONE if unit_costs else Fraction(rng.randint(1, 9), rng.randint(1, 4))
        support.append(SupportEdge(u, v, ONE if count == 2 else HALF, cost))
    inst = Instance(root + 1, tuple(support), root=root)
    return Realization(inst, tuple(node_sets))


def gen_random_cyclecut(blueprint: Blueprint, seed: int, unit_costs: bool = False) -> Instance:
    return realize_blueprint(blueprint, seed, unit_costs).instance


# ---------------------------------------------------------------- TSP oracle

HELD_KARP_MAX_N = 18


def shortest_path_metric(inst: Instance) -> list[list[Fraction]]:
    """All-pairs shortest paths over support edges with their costs."""
    n = inst.n
    inf = None
    d: list[list[Fraction | None]] = [[inf] * n for _ in range(n)]
    for v in range(n):
        d[v][v] = Fraction(0)
    for e in inst.edges:
        if d[e.u][e.v] is None or e.cost < d[e.u][e.v]:
            d[e.u][e.v] = d[e.v][e.u] = e.cost
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            if dik is None:
                continue
            di = d[i]
            for j in range(n):
                if dk[j] is not None and (di[j] is None or dik + dk[j] < di[j]):
                    di[j] = dik + dk[j]
    if any(x is None for row in d for x in row):
        raise MetricUndefined("support graph is disconnected; shortest-path metric undefined")
    return d  # type: ignore[return-value]


def held_karp_opt(inst: Instance, metric: str | Sequence[Sequence] = "shortest_path") -> Fraction:
    """Optimal Hamiltonian tour cost by bitmask DP over a complete metric."""
    n = inst.n
    if n > HELD_KARP_MAX_N:
        raise TooLarge(f"held_karp_opt supports n <= {HELD_KARP_MAX_N}, got {n}")
    if isinstance(metric, str):
        if metric != "shortest_path":
            raise MetricUndefined(f"unknown metric {metric!r}")
        dist = shortest_path_metric(inst)
    else:
        dist = [[Fraction(x) for x in row] for row in metric]
        if len(dist) != n or any(len(row) != n for row in dist):
            raise MetricUndefined(f"explicit matrix must be {n}x{n}")
        if any(x < 0 for row in dist for x in row):
            raise MetricUndefined("negative distance in explicit matrix")
    return held_karp(dist)


def held_karp(dist: Sequence[Sequence[Fraction]]) -> Fraction:
    n = len(dist)
    if n == 1:
        return Fraction(0)
    if n == 2:
        return dist[0][1] + dist[1][0]
    scale = lcm(*(Fraction(x).denominator for row in dist for x in row))
    d = np.array([[int(Fraction(x) * scale) for x in row] for row in dist], dtype=np.int64)
    if int(d.max()) * n >= 2**62:
        raise TooLarge("scaled distances overflow int64")
    # vertex 0 is the fixed start; DP over subsets of vertices 1..n-1
    m = n - 1
    sub = d[1:, 1:]
    big = np.iinfo(np.int64).max // 4
    dp = np.full((1 << m, m), big, dtype=np.int64)
    for j in range(m):
        dp[1 << j, j] = d[0, j + 1]
    bits = 1 << np.arange(m)
    for mask in range(1, 1 << m):
        row = dp[mask]
        if row.min() >= big:
            continue
        # best cost of extending to each vertex k from any last vertex j in mask
        cand = (row[:, None] + sub).min(axis=0)
        ks = np.flatnonzero((mask & bits) == 0)
        targets = mask | bits[ks]
        dp[targets, ks] = np.minimum(dp[targets, ks], cand[ks])
    best = int((dp[(1 << m) - 1] + d[1:, 0]).min())
    return Fraction(best, scale)
