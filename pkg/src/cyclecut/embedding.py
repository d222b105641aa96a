"""Caterpillar frames of cycle cuts.

A frame fixes, for one cut S, the left-to-right order of its children, which
edge of each connecting pair is on top, and the roles UL/DL/UR/DR of the four
boundary edges. The top end of a composite child is the end of its own chain
where the top edge of the pair on its left attaches; the top edge of the pair
on its right is the one attaching at that same end. This is the combinatorial
content of a planar drawing in which no two pair edges cross.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from typing import NamedTuple

from .cuts import CutKind, Hierarchy
from .errors import FrameMismatch, NotApplicable, NotCycleCut


class Twist(enum.Enum):
    STRAIGHT = "straight"
    TWISTED = "twisted"


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"


class ChainOrder(NamedTuple):
    children: tuple[int, ...]  # a_1..a_k as cut indices
    pairs: tuple[frozenset[int], ...]  # pairs[j] joins children[j] and children[j + 1]
    first_edges: frozenset[int]  # boundary edges of S at a_1
    last_edges: frozenset[int]  # boundary edges of S at a_k


@dataclass(frozen=True)
class Frame:
    cut: int
    chain: tuple[int, ...]
    pairs: tuple[tuple[int, int], ...]  # (top, bottom) edge ids
    ul: int
    dl: int
    ur: int
    dr: int
    delta_left: frozenset[int]
    delta_right: frozenset[int]
    twist: Twist

    @property
    def k(self) -> int:
        return len(self.chain)

    @property
    def parity(self) -> Parity:
        return Parity.ODD if self.k % 2 else Parity.EVEN

    @property
    def roles(self) -> tuple[int, int, int, int]:
        return (self.ul, self.dl, self.ur, self.dr)

    def left_side(self, j: int) -> tuple[int, int]:
        """(top, bottom) edges on the left of chain position j (0-based)."""
        return (self.ul, self.dl) if j == 0 else self.pairs[j - 1]

    def right_side(self, j: int) -> tuple[int, int]:
        return (self.ur, self.dr) if j == self.k - 1 else self.pairs[j]


def _require_cycle(h: Hierarchy, s: int) -> None:
    cut = h.cuts[s]
    if cut.kind is not CutKind.CYCLE:
        raise NotCycleCut(f"cut {s} is a {cut.kind.value} node, not a cycle cut")


def order_children(h: Hierarchy, s: int, reverse: bool = False) -> ChainOrder:
    """Walk the contracted cycle of cut ``s`` starting next to its complement.

    a_1 is the child carrying the lowest-id boundary edge of S (the opposite
    neighbour when ``reverse`` is set).
    """
    _require_cycle(h, s)
    g = h.graph
    cut = h.cuts[s]
    label = {v: c for c in cut.children for v in h.cuts[c].members}
    outside = -1
    between: dict[frozenset[int], set[int]] = {}
    for e in g.edges:
        a, b = label.get(e.u, outside), label.get(e.v, outside)
        if a != b and (a != outside or b != outside):
            between.setdefault(frozenset((a, b)), set()).add(e.id)
    nbrs: dict[int, list[int]] = {}
    for key in between:
        a, b = tuple(key)
        nbrs.setdefault(a, []).append(b)
        nbrs.setdefault(b, []).append(a)

    first = g.edges[min(cut.boundary)]
    start = label[first.u] if first.u in label else label[first.v]
    if reverse:
        start = next(x for x in nbrs[outside] if x != start)
    chain = [start]
    prev = outside
    while True:
        cur = chain[-1]
        nxt = next(x for x in nbrs[cur] if x != prev)
        if nxt == outside:
            break
        chain.append(nxt)
        prev = cur
    pairs = tuple(frozenset(between[frozenset((a, b))]) for a, b in zip(chain, chain[1:]))
    return ChainOrder(
        tuple(chain),
        pairs,
        frozenset(between[frozenset((outside, chain[0]))]),
        frozenset(between[frozenset((outside, chain[-1]))]),
    )


class _Chooser:
    """Deterministic or randomized resolution of the arbitrary choices."""

    def __init__(self, rng: random.Random | None):
        self.rng = rng

    def pick(self, options: list[int]) -> int:
        options = sorted(options)
        return options[0] if self.rng is None else self.rng.choice(options)

    def flip(self) -> bool:
        return False if self.rng is None else self.rng.random() < 0.5


def _one(edges: frozenset[int], group: frozenset[int], what: str) -> int:
    common = edges & group
    if len(common) != 1:
        raise FrameMismatch(f"{what}: expected exactly one shared edge, found {sorted(common)}")
    return next(iter(common))


def _build_frame(h: Hierarchy, s: int, order: ChainOrder, delta_left: frozenset[int],
                 ends: dict[int, tuple[frozenset[int], frozenset[int]]], chooser: _Chooser) -> Frame:
    if len(delta_left) != 2 or not delta_left <= h.cuts[s].boundary:
        raise FrameMismatch(f"cut {s}: left boundary {sorted(delta_left)} is not two of its edges")
    ul = _one(delta_left, order.first_edges, f"cut {s} left boundary at a_1")
    (dl,) = order.first_edges - {ul}
    prev_top = ul
    pairs = []
    k = len(order.children)
    for j, child in enumerate(order.children):
        right = order.pairs[j] if j < k - 1 else order.last_edges
        if child in ends:
            # the top end of a composite child is where the incoming top edge lands
            top_end = next(group for group in ends[child] if prev_top in group)
            left = order.first_edges if j == 0 else order.pairs[j - 1]
            _one(left, top_end, f"cut {s}: child {child} left edges at one end")
            top = _one(right, top_end, f"cut {s}: child {child} right edges at one end")
        else:
            top = chooser.pick(list(right))
        if j < k - 1:
            (bottom,) = right - {top}
            pairs.append((top, bottom))
        prev_top = top
    ur = prev_top
    (dr,) = order.last_edges - {ur}
    delta_right = h.cuts[s].boundary - delta_left
    if len(delta_left & order.last_edges) != 1:
        raise FrameMismatch(f"cut {s}: left boundary does not touch both ends of the chain")
    twist = Twist.STRAIGHT if ur in delta_left else Twist.TWISTED
    return Frame(s, order.children, tuple(pairs), ul, dl, ur, dr, delta_left, delta_right, twist)


def assign_frames(h: Hierarchy, rng: random.Random | None = None) -> dict[int, Frame]:
    """Frames for every non-singleton cut, computed top-down.

    Arbitrary choices (chain direction, the top edge next to a singleton) are
    deterministic from sorted edge ids unless ``rng`` is given, in which case
    they are randomized.
    """
    chooser = _Chooser(rng)
    orders: dict[int, ChainOrder] = {}
    for cut in h.non_singletons():
        _require_cycle(h, cut.index)
        orders[cut.index] = order_children(h, cut.index, reverse=chooser.flip())
    # boundary edges of each composite cut, grouped by the end of its chain
    ends = {c: (o.first_edges, o.last_edges) for c, o in orders.items()}

    # left boundary of each cut, taken from its parent's chain
    delta_left: dict[int, frozenset[int]] = {}
    for s, order in orders.items():
        for j, child in enumerate(order.children):
            delta_left[child] = order.first_edges if j == 0 else order.pairs[j - 1]

    frames: dict[int, Frame] = {}
    for cut in h.non_singletons():  # parents precede children
        s = cut.index
        order = orders[s]
        if cut.parent is None:
            # root cut: one edge at each end; pairing it with the top edge at
            # the far end makes the root straight
            ul = chooser.pick(list(order.first_edges))
            frames[s] = _root_frame(h, s, order, ul, ends, chooser)
        else:
            frames[s] = _build_frame(h, s, order, delta_left[s], ends, chooser)
    return frames


def _root_frame(h: Hierarchy, s: int, order: ChainOrder, ul: int, ends, chooser: _Chooser) -> Frame:
    # the top edge at a_k only depends on UL and the singleton choices, so
    # resolve it with a provisional left set and replay the same choices
    state = chooser.rng.getstate() if chooser.rng is not None else None
    provisional = _build_frame(h, s, order, frozenset({ul, min(order.last_edges)}), ends, chooser)
    if state is not None:
        chooser.rng.setstate(state)
    delta_left = frozenset({ul, provisional.ur})
    return _build_frame(h, s, order, delta_left, ends, chooser)


def assign_frame(h: Hierarchy, s: int) -> Frame:
    _require_cycle(h, s)
    return assign_frames(h)[s]


def twist_type(frame: Frame | None) -> Twist:
    if frame is None:
        raise NotApplicable("singletons have no frame")
    return frame.twist
