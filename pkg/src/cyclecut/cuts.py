"""Tight sets of the 4-regular support graph and the laminar hierarchy of
critical cuts."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple

import numpy as np

from .errors import NotFourConnected, NotFourRegular, TooLarge
from .multigraph import Multigraph, global_min_cut_value, residual_successors, unit_max_flow

BRUTE_FORCE_MAX_N = 16


def _mask(members: Iterable[int]) -> int:
    m = 0
    for v in members:
        m |= 1 << v
    return m


def _members(mask: int) -> frozenset[int]:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return frozenset(out)


def _sorted_sets(masks: Iterable[int]) -> list[frozenset[int]]:
    return sorted((_members(m) for m in masks), key=lambda s: (len(s), sorted(s)))


def crosses(a: Iterable[int], b: Iterable[int], n: int) -> bool:
    """True iff A-B, B-A, A&B and V-(A|B) are all nonempty."""
    ma, mb = _mask(a), _mask(b)
    full = (1 << n) - 1
    return bool(ma & ~mb) and bool(mb & ~ma) and bool(ma & mb) and (ma | mb) != full


def _reach(succ: list[list[int]], start: int, allowed: int) -> int:
    seen = 1 << start
    stack = [start]
    while stack:
        v = stack.pop()
        for w in succ[v]:
            bit = 1 << w
            if allowed & bit and not seen & bit:
                seen |= bit
                stack.append(w)
    return seen


def _min_cut_closures(g: Multigraph, s: int, t: int, flow) -> list[int]:
    """All minimum s-t cuts (source sides, as masks) for a maximum flow.

    Source sides are exactly the residual-closed sets containing s and not t.
    """
    n = g.vertex_count
    full = (1 << n) - 1
    succ = residual_successors(g, flow)
    pred: list[list[int]] = [[] for _ in range(n)]
    for v in range(n):
        for w in succ[v]:
            pred[w].append(v)
    source = _reach(succ, s, full)
    sink = _reach(pred, t, full)
    free = full & ~source & ~sink
    free_list = [v for v in range(n) if free >> v & 1]
    reach = {v: _reach(succ, v, free) for v in free_list}
    coreach = {v: _reach(pred, v, free) for v in free_list}

    out = []
    stack = [(0, 0)]
    while stack:
        inc, exc = stack.pop()
        decided = inc | exc
        v = next((u for u in free_list if not decided >> u & 1), None)
        if v is None:
            out.append(source | inc)
            continue
        stack.append((inc, exc | coreach[v]))
        stack.append((inc | reach[v], exc))
    return out


def _tight_masks(g: Multigraph) -> set[int]:
    n = g.vertex_count
    cut = global_min_cut_value(g)
    if cut != 4:
        raise NotFourConnected(f"global minimum cut is {cut}, expected 4")
    full = (1 << n) - 1
    found: set[int] = set()
    for t in range(1, n):
        res = unit_max_flow(g, 0, t, limit=5)
        if res.value != 4:
            continue
        found.update(_min_cut_closures(g, 0, t, res.flow))
    return found | {full ^ m for m in found}


def enumerate_tight_sets(g: Multigraph, both_sides: bool = False) -> list[frozenset[int]]:
    """All vertex sets S with 0 < |S| < n and |delta(S)| = 4.

    Found by a capped unit max-flow from vertex 0 to every other vertex and an
    enumeration of the residual-closed source sides. Each cut is reported once,
    by its side excluding vertex 0, unless ``both_sides`` asks for both sides.
    """
    masks = _tight_masks(g)
    if not both_sides:
        masks = {m for m in masks if not m & 1}
    return _sorted_sets(masks)


def brute_force_tight_sets(g: Multigraph, both_sides: bool = False) -> list[frozenset[int]]:
    """Exhaustive scan over all proper subsets (oracle for enumerate_tight_sets)."""
    n = g.vertex_count
    if n > BRUTE_FORCE_MAX_N:
        raise TooLarge(f"brute force supports n <= {BRUTE_FORCE_MAX_N}, got {n}")
    masks = np.arange(1, (1 << n) - 1, dtype=np.int64)
    size = np.zeros_like(masks)
    for e in g.edges:
        size += ((masks >> e.u) ^ (masks >> e.v)) & 1
    tight = masks[size == 4]
    if not both_sides:
        tight = tight[(tight & 1) == 0]
    return _sorted_sets(int(m) for m in tight)


# ---------------------------------------------------------------- hierarchy


class CutKind(enum.Enum):
    SINGLETON = "singleton"
    CYCLE = "cycle"
    DEGREE = "degree"


@dataclass(frozen=True)
class Cut:
    index: int
    members: frozenset[int]
    parent: int | None
    children: tuple[int, ...]
    boundary: frozenset[int]  # delta(S), edge ids
    internal: frozenset[int]  # edges joining two different children
    kind: CutKind

    @property
    def is_singleton(self) -> bool:
        return self.kind is CutKind.SINGLETON


@dataclass(frozen=True)
class Hierarchy:
    graph: Multigraph
    root_vertex: int
    cuts: tuple[Cut, ...]  # cuts[0] is V - {r}; parents precede children

    @property
    def top(self) -> Cut:
        return self.cuts[0]

    @cached_property
    def singleton_of(self) -> dict[int, int]:
        return {next(iter(c.members)): c.index for c in self.cuts if c.is_singleton}

    def child_containing(self, cut: int, vertex: int) -> int:
        """Index of the child of ``cut`` whose members include ``vertex``."""
        node = self.singleton_of[vertex]
        while self.cuts[node].parent != cut:
            node = self.cuts[node].parent
            if node is None:
                raise ValueError(f"vertex {vertex} is not inside cut {cut}")
        return node

    def non_singletons(self) -> list[Cut]:
        return [c for c in self.cuts if not c.is_singleton]

    def root_edges(self) -> frozenset[int]:
        return frozenset(self.graph.incidence[self.root_vertex])


def _check_four_regular(g: Multigraph) -> None:
    bad = [v for v in range(g.vertex_count) if g.degree(v) != 4]
    if bad:
        raise NotFourRegular(f"vertices without degree 4: {bad}")


def critical_cut_masks(g: Multigraph, r: int) -> list[int]:
    """Tight sets avoiding r that no other tight set crosses."""
    full = (1 << g.vertex_count) - 1
    rbit = 1 << r
    canon = sorted({m if not m & rbit else full ^ m for m in _tight_masks(g)})
    critical = []
    for a in canon:
        for b in canon:
            # both sides avoid r, so their union is never everything
            if a & b and a & ~b and b & ~a:
                break
        else:
            critical.append(a)
    return critical


def _classify(g: Multigraph, members: frozenset[int], children: list[frozenset[int]]) -> CutKind:
    label = {}
    for i, child in enumerate(children):
        for v in child:
            label[v] = i
    outside = len(children)
    pairs: dict[tuple[int, int], int] = {}
    for e in g.edges:
        a, b = label.get(e.u, outside), label.get(e.v, outside)
        if a == b:
            continue
        key = (min(a, b), max(a, b))
        pairs[key] = pairs.get(key, 0) + 1
    nodes = outside + 1
    if nodes < 3 or any(c != 2 for c in pairs.values()):
        return CutKind.DEGREE
    nbrs: dict[int, list[int]] = {i: [] for i in range(nodes)}
    for a, b in pairs:
        nbrs[a].append(b)
        nbrs[b].append(a)
    if any(len(x) != 2 for x in nbrs.values()):
        return CutKind.DEGREE
    # a 2-regular simple graph is a single cycle iff it is connected
    seen = {0}
    stack = [0]
    while stack:
        for w in nbrs[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return CutKind.CYCLE if len(seen) == nodes else CutKind.DEGREE


def build_hierarchy(g: Multigraph, r: int = 0) -> Hierarchy:
    _check_four_regular(g)
    if not 0 <= r < g.vertex_count:
        raise ValueError(f"root {r} outside the vertex range")
    masks = critical_cut_masks(g, r)
    masks.sort(key=lambda m: (-bin(m).count("1"), sorted(_members(m))))
    sets = [_members(m) for m in masks]
    count = len(masks)

    parent: list[int | None] = [None] * count
    for i in range(count):
        # parents precede children in this order; the closest superset is the last one seen
        for j in range(i - 1, -1, -1):
            if masks[i] & masks[j] == masks[i]:
                parent[i] = j
                break
    children: list[list[int]] = [[] for _ in range(count)]
    for i, p in enumerate(parent):
        if p is not None:
            children[p].append(i)
    for lst in children:
        lst.sort(key=lambda i: min(sets[i]))

    cuts = []
    for i in range(count):
        boundary = g.boundary(sets[i])
        if len(sets[i]) == 1:
            cuts.append(Cut(i, sets[i], parent[i], (), boundary, frozenset(), CutKind.SINGLETON))
            continue
        label = {v: c for c in children[i] for v in sets[c]}
        internal = frozenset(
            e.id for e in g.edges if e.u in label and e.v in label and label[e.u] != label[e.v]
        )
        kind = _classify(g, sets[i], [sets[c] for c in children[i]])
        cuts.append(Cut(i, sets[i], parent[i], tuple(children[i]), boundary, internal, kind))
    return Hierarchy(g, r, tuple(cuts))


class CycleCutReport(NamedTuple):
    ok: bool
    offenders: tuple[int, ...]  # indices of non-singleton cuts that are degree cuts


def verify_cycle_cut_instance(h: Hierarchy) -> CycleCutReport:
    bad = tuple(c.index for c in h.cuts if c.kind is CutKind.DEGREE)
    return CycleCutReport(not bad, bad)


def hierarchy_to_dot(h: Hierarchy, frames: dict | None = None) -> str:
    colors = {CutKind.SINGLETON: "gray", CutKind.CYCLE: "forestgreen", CutKind.DEGREE: "firebrick"}
    lines = ["graph hierarchy {", "  node [shape=box, fontname=monospace];"]
    for c in h.cuts:
        label = "{" + ",".join(str(v) for v in sorted(c.members)) + "}"
        extra = ""
        if frames and c.index in frames:
            f = frames[c.index]
            extra = f"\\n{f.twist.value} k={len(f.chain)}"
        lines.append(f'  c{c.index} [label="{label}{extra}", color={colors[c.kind]}];')
    for c in h.cuts:
        if c.parent is not None:
            lines.append(f"  c{c.parent} -- c{c.index};")
    lines.append("}")
    return "\n".join(lines) + "\n"
