"""Pattern states, the feasible region R and the two transition chains.

Everything here is exact rational arithmetic; there are no tolerances.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Sequence

from .errors import NotInRegion, ParamOutOfRange, ParityViolation

ONE = Fraction(1)
HALF = Fraction(1, 2)
THIRD = Fraction(1, 3)
TWO_THIRDS = Fraction(2, 3)


class State(enum.IntEnum):
    S1 = 1
    S2 = 2
    S3 = 3
    S4 = 4


class Variant(enum.Enum):
    A = "A"
    B = "B"


# boundary roles in frame order
ROLES = ("UL", "DL", "UR", "DR")

# odd roles of each (state, variant) pattern
PATTERNS: dict[tuple[State, Variant], frozenset[str]] = {
    (State.S1, Variant.A): frozenset({"UL", "DR"}),
    (State.S1, Variant.B): frozenset({"DL", "UR"}),
    (State.S2, Variant.A): frozenset({"UL", "UR"}),
    (State.S2, Variant.B): frozenset({"DL", "DR"}),
    (State.S3, Variant.A): frozenset({"UL", "DL"}),
    (State.S3, Variant.B): frozenset({"UR", "DR"}),
    (State.S4, Variant.A): frozenset(ROLES),
    (State.S4, Variant.B): frozenset(),
}
_BY_ODD_SET = {odd: key for key, odd in PATTERNS.items()}


def pattern_parities(state: State, variant: Variant) -> tuple[int, int, int, int]:
    odd = PATTERNS[(state, variant)]
    return tuple(int(role in odd) for role in ROLES)


def classify_pattern(parities: Sequence[int]) -> tuple[State, Variant]:
    """Map parity bits over (UL, DL, UR, DR) to (state, variant)."""
    if len(parities) != 4:
        raise ValueError("expected four parity bits")
    odd = frozenset(role for role, bit in zip(ROLES, parities) if bit % 2)
    if len(odd) % 2:
        raise ParityViolation(f"odd number of odd boundary edges: {tuple(parities)}")
    return _BY_ODD_SET[odd]


@dataclass(frozen=True)
class StateDistribution:
    p1: Fraction
    p2: Fraction
    p3: Fraction
    p4: Fraction

    def __post_init__(self):
        for name in ("p1", "p2", "p3", "p4"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if any(v < 0 for v in self):
            raise ValueError(f"negative probability in {self.as_strings()}")
        if sum(self) != 1:
            raise ValueError(f"probabilities sum to {sum(self)}, not 1")

    def __iter__(self) -> Iterator[Fraction]:
        return iter((self.p1, self.p2, self.p3, self.p4))

    def __getitem__(self, state: State) -> Fraction:
        return (self.p1, self.p2, self.p3, self.p4)[int(state) - 1]

    def as_strings(self) -> list[str]:
        return [str(v) for v in (self.p1, self.p2, self.p3, self.p4)]


def dist(*values) -> StateDistribution:
    if len(values) == 1:
        values = tuple(values[0])
    return StateDistribution(*values)


DEFAULT_ROOT = StateDistribution(THIRD, THIRD, THIRD, Fraction(0))


def region_contains(p: StateDistribution) -> bool:
    return p.p1 + p.p2 == TWO_THIRDS and p.p2 + p.p4 >= THIRD


def _check_range(name: str, value: Fraction, lo: Fraction, hi: Fraction) -> Fraction:
    value = Fraction(value)
    if not lo <= value <= hi:
        raise ParamOutOfRange(f"{name} = {value} outside [{lo}, {hi}]")
    return value


def even_step(p: StateDistribution, z, w) -> StateDistribution:
    z = _check_range("z", z, Fraction(0), ONE)
    w = _check_range("w", w, Fraction(0), ONE)
    return StateDistribution(
        p.p1 / 2 + z * p.p2,
        p.p3 / 2 + w * p.p4,
        p.p1 / 2 + (1 - z) * p.p2,
        p.p3 / 2 + (1 - w) * p.p4,
    )


def odd_step(p: StateDistribution, x, y, z, w, k: int) -> StateDistribution:
    if k < 3 or k % 2 == 0:
        raise ParamOutOfRange(f"odd chain needs an odd child count >= 3, got {k}")
    lo, hi = Fraction(1, k), Fraction(k - 1, k)
    x = _check_range("x", x, lo, ONE)
    y = _check_range("y", y, lo, ONE)
    z = _check_range("z", z, Fraction(0), hi)
    w = _check_range("w", w, Fraction(0), hi)
    return StateDistribution(
        x * p.p1 + z * p.p2,
        y * p.p3 + w * p.p4,
        (1 - x) * p.p1 + (1 - z) * p.p2,
        (1 - y) * p.p3 + (1 - w) * p.p4,
    )


def swap12(p: StateDistribution) -> StateDistribution:
    return StateDistribution(p.p2, p.p1, p.p3, p.p4)


@dataclass(frozen=True)
class ChainParams:
    k: int
    z: Fraction
    w: Fraction
    x: Fraction | None = None  # odd chains only
    y: Fraction | None = None
    # probability of the structured branch of each state's filling rule
    alphas: tuple[tuple[State, Fraction], ...] = ()

    @property
    def odd(self) -> bool:
        return self.k % 2 == 1

    def alpha(self, state: State) -> Fraction | None:
        return dict(self.alphas).get(state)

    def step(self, p: StateDistribution) -> StateDistribution:
        if self.odd:
            return odd_step(p, self.x, self.y, self.z, self.w, self.k)
        return even_step(p, self.z, self.w)


def select_params(p: StateDistribution, k: int) -> ChainParams:
    """Parameters keeping the image of ``p`` inside R, plus rule-level alphas."""
    if not region_contains(p):
        raise NotInRegion(f"{p.as_strings()} is not in the feasible region")
    if k < 2:
        raise ParamOutOfRange(f"a cut has at least two children, got {k}")
    if k % 2 == 0:
        w = ONE
        # the only R-point with p2 = 0 is (2/3, 0, 0, 1/3); any z works there
        z = (TWO_THIRDS - p.p4 - (p.p1 + p.p3) / 2) / p.p2 if p.p2 else Fraction(0)
        alphas = ((State.S2, z), (State.S4, w))
        params = ChainParams(k, z, w, alphas=alphas)
    else:
        x = y = z = w = TWO_THIRDS
        scale = Fraction(k, k - 1)
        alphas = (
            (State.S1, (x - Fraction(1, k)) * scale),
            (State.S2, z * scale),
            (State.S3, (y - Fraction(1, k)) * scale),
            (State.S4, w * scale),
        )
        params = ChainParams(k, z, w, x, y, alphas)
    for state, a in params.alphas:
        if not 0 <= a <= 1:
            raise ParamOutOfRange(f"branch probability for {state.name} is {a}")
    params.step(p)  # range check of the raw parameters
    return params


class NecessityCertificate(NamedTuple):
    verdict: str  # in_region | usage_exceeds | two_step_infeasible | one_step_infeasible
    value: Fraction | None  # the bound that certifies the verdict
    witness: tuple[Fraction, ...] | None  # maximizing parameter corner


def check_necessity(p: StateDistribution) -> NecessityCertificate:
    """Certify why a distribution outside R cannot keep every edge at 2/3 usage.

    The first-two-coordinate sum after one or two even steps is multilinear in
    the parameters, so its maximum is attained at a corner of the unit box.
    """
    s = p.p1 + p.p2
    if s < TWO_THIRDS:
        # usage 1 - s/2 of the edges filled at this cut already exceeds 2/3
        return NecessityCertificate("usage_exceeds", 1 - s / 2, None)
    corners = (Fraction(0), ONE)
    if s > TWO_THIRDS:
        best, arg = None, None
        for z, w, z2, w2 in itertools.product(corners, repeat=4):
            q = even_step(even_step(p, z, w), z2, w2)
            v = q.p1 + q.p2
            if best is None or v > best:
                best, arg = v, (z, w, z2, w2)
        if best >= TWO_THIRDS:
            raise AssertionError(f"two-step bound failed for {p.as_strings()}: {best}")
        return NecessityCertificate("two_step_infeasible", best, arg)
    if p.p2 + p.p4 < THIRD:
        best, arg = None, None
        for z, w in itertools.product(corners, repeat=2):
            q = even_step(p, z, w)
            v = q.p1 + q.p2
            if best is None or v > best:
                best, arg = v, (z, w)
        if best >= TWO_THIRDS:
            raise AssertionError(f"one-step bound failed for {p.as_strings()}: {best}")
        return NecessityCertificate("one_step_infeasible", best, arg)
    return NecessityCertificate("in_region", None, None)


def region_vertices() -> list[StateDistribution]:
    """Vertices of the polytope R."""
    return [
        dist(TWO_THIRDS, 0, 0, THIRD),
        dist(THIRD, THIRD, THIRD, 0),
        dist(0, TWO_THIRDS, THIRD, 0),
        dist(0, TWO_THIRDS, 0, THIRD),
    ]


def random_region_point(rng, max_den: int = 12) -> StateDistribution:
    """Seeded rational point of R: a random convex combination of its vertices."""
    weights = [Fraction(rng.randint(0, max_den)) for _ in range(4)]
    if not any(weights):
        weights[rng.randrange(4)] = ONE
    total = sum(weights)
    verts = region_vertices()
    coords = [sum((w / total) * v[State(i + 1)] for w, v in zip(weights, verts)) for i in range(4)]
    return StateDistribution(*coords)
