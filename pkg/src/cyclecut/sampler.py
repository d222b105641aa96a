"""Top-down pattern sampling of Eulerian multigraphs on cycle-cut instances.

Every random decision goes through a chooser, so the same code path serves
Monte Carlo sampling (RandomChooser) and the exhaustive exact oracle
(a replaying chooser that walks every branch with its rational probability).
"""

from __future__ import annotations

import math
import random
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Protocol, Sequence

import numpy as np

from . import _report
from ._rational import sig12
from .chain import (
    DEFAULT_ROOT,
    HALF,
    PATTERNS,
    ROLES,
    ChainParams,
    State,
    StateDistribution,
    Variant,
    classify_pattern,
    region_contains,
    select_params,
    swap12,
)
from .cuts import Hierarchy, build_hierarchy, verify_cycle_cut_instance
from .embedding import Frame, Twist, assign_frames
from .errors import DegreeCutPresent, FrameMismatch, RegionViolation, TooLarge
from .instance import Instance, lp_value, support_multigraph
from .multigraph import Circuit, Multigraph, euler_circuit, is_connected_spanning, weighted_degrees

TOP, BOTTOM = 0, 1


class Chooser(Protocol):
    def bernoulli(self, p: Fraction) -> bool: ...

    def uniform(self, n: int) -> int: ...

    def categorical(self, weights: Sequence[Fraction]) -> int: ...


class RandomChooser:
    """Exact rational sampling on top of a seeded ``random.Random``."""

    def __init__(self, rng: random.Random):
        self.rng = rng

    def bernoulli(self, p: Fraction) -> bool:
        p = Fraction(p)
        return self.rng.randrange(p.denominator) < p.numerator

    def uniform(self, n: int) -> int:
        return self.rng.randrange(n)

    def categorical(self, weights: Sequence[Fraction]) -> int:
        den = math.lcm(*(Fraction(w).denominator for w in weights))
        r = self.rng.randrange(den)
        acc = 0
        for i, w in enumerate(weights):
            acc += int(Fraction(w) * den)
            if r < acc:
                return i
        raise ValueError("weights do not sum to 1")


def substream(seed: int, index: int) -> random.Random:
    """Independent generator for sample ``index`` of a run seeded with ``seed``."""
    words = np.random.SeedSequence([seed, index]).generate_state(4)
    return random.Random(int.from_bytes(words.tobytes(), "little"))


class _ReplayChooser:
    """Follows a prefix of branch indices, then always takes branch 0."""

    def __init__(self, prefix: list[int]):
        self.prefix = prefix
        self.trail: list[tuple[int, int]] = []
        self.prob = Fraction(1)

    def _take(self, options: list[tuple[object, Fraction]]):
        pos = len(self.trail)
        idx = self.prefix[pos] if pos < len(self.prefix) else 0
        self.trail.append((idx, len(options)))
        value, p = options[idx]
        self.prob *= p
        return value

    def bernoulli(self, p: Fraction) -> bool:
        p = Fraction(p)
        return self._take([(v, q) for v, q in ((True, p), (False, 1 - p)) if q > 0])

    def uniform(self, n: int) -> int:
        return self._take([(i, Fraction(1, n)) for i in range(n)])

    def categorical(self, weights: Sequence[Fraction]) -> int:
        return self._take([(i, Fraction(w)) for i, w in enumerate(weights) if w > 0])


def enumerate_paths(run, max_paths: int = 200_000):
    """Yield (result, probability) for every branch sequence of ``run(chooser)``."""
    prefix: list[int] = []
    count = 0
    while True:
        chooser = _ReplayChooser(prefix)
        result = run(chooser)
        count += 1
        if count > max_paths:
            raise TooLarge(f"more than {max_paths} random branches")
        yield result, chooser.prob
        trail = chooser.trail
        pos = len(trail) - 1
        while pos >= 0 and trail[pos][0] + 1 >= trail[pos][1]:
            pos -= 1
        if pos < 0:
            return
        prefix = [idx for idx, _ in trail[:pos]] + [trail[pos][0] + 1]


# ---------------------------------------------------------------- planning


@dataclass(frozen=True)
class PlanEntry:
    distribution: StateDistribution
    params: ChainParams
    twist: Twist


@dataclass(frozen=True)
class CutPlan:
    p_root: StateDistribution
    entries: dict[int, PlanEntry]

    def distribution(self, cut: int) -> StateDistribution:
        return self.entries[cut].distribution


def propagate_distributions(h: Hierarchy, frames: dict[int, Frame],
                            p_root: StateDistribution = DEFAULT_ROOT) -> CutPlan:
    """State distribution, parameters and branch probabilities of every cut."""
    report = verify_cycle_cut_instance(h)
    if not report.ok:
        raise DegreeCutPresent(f"degree cuts at nodes {list(report.offenders)}")
    if not region_contains(p_root):
        raise RegionViolation(f"root distribution {p_root.as_strings()} is not in R")
    dists = {h.top.index: p_root}
    entries = {}
    for cut in h.non_singletons():
        s = cut.index
        p = dists[s]
        if not region_contains(p):
            raise RegionViolation(f"cut {s} has distribution {p.as_strings()} outside R")
        params = select_params(p, len(cut.children))
        image = params.step(p)
        for child in cut.children:
            if child in frames:
                dists[child] = swap12(image) if frames[child].twist is Twist.TWISTED else image
        entries[s] = PlanEntry(p, params, frames[s].twist)
    return CutPlan(p_root, entries)


@dataclass(frozen=True)
class Pipeline:
    """Everything the sampler needs, computed once per instance."""

    instance: Instance
    graph: Multigraph
    hierarchy: Hierarchy
    frames: dict[int, Frame]
    plan: CutPlan
    order: tuple[int, ...] = field(default=())  # non-singleton cuts, parents first


def prepare(inst: Instance, p_root: StateDistribution = DEFAULT_ROOT, root: int | None = None,
            frame_rng: random.Random | None = None) -> Pipeline:
    if p_root.p4 != 0:
        # the treatment of even root edges is only settled when the root is never all-even
        raise RegionViolation(f"root distribution must have p4 = 0, got {p_root.p4}")
    g = support_multigraph(inst)
    h = build_hierarchy(g, inst.root_vertex if root is None else root)
    report = verify_cycle_cut_instance(h)
    if not report.ok:
        raise DegreeCutPresent(f"degree cuts at nodes {list(report.offenders)}")
    frames = assign_frames(h, frame_rng)
    plan = propagate_distributions(h, frames, p_root)
    order = tuple(c.index for c in h.non_singletons())
    return Pipeline(inst, g, h, frames, plan, order)


# ---------------------------------------------------------------- filling


def _pick(level: int) -> tuple[int, int]:
    return (1, 0) if level == TOP else (0, 1)


def _double(chooser: Chooser) -> tuple[int, int]:
    return (2, 0) if chooser.uniform(2) == 0 else (0, 2)


def _odd_level(top: int, bottom: int) -> int:
    return TOP if top % 2 else BOTTOM


def fill_cut(frame: Frame, incoming: Sequence[int], params: ChainParams,
             chooser: Chooser) -> tuple[tuple[State, Variant], list[tuple[int, int]]]:
    """Multiplicities (top, bottom) of every connecting pair of one cut.

    ``incoming`` holds the already fixed multiplicities of UL, DL, UR, DR.
    """
    if params.k != frame.k:
        raise FrameMismatch(f"cut {frame.cut}: plan for {params.k} children, frame has {frame.k}")
    ul, dl, ur, dr = (m % 2 for m in incoming)
    state, variant = classify_pattern((ul, dl, ur, dr))
    k = frame.k
    npairs = k - 1
    alpha = params.alpha(state)
    pairs: list[tuple[int, int] | None] = [None] * npairs

    def anti_from_left(stop: int) -> None:
        level = _odd_level(ul, dl)
        for j in range(stop):
            level = 1 - level
            pairs[j] = _pick(level)

    def anti_from_right(stop: int) -> None:
        level = _odd_level(ur, dr)
        for j in range(npairs - 1, stop - 1, -1):
            level = 1 - level
            pairs[j] = _pick(level)

    def forced_from_left(stop: int) -> None:
        # double when the child's left side is odd; the next left side flips
        odd = bool(ul)
        for j in range(stop):
            pairs[j] = _double(chooser) if odd else (1, 1)
            odd = not odd

    def forced_from_right(stop: int) -> None:
        odd = bool(ur)
        for j in range(npairs - 1, stop - 1, -1):
            pairs[j] = _double(chooser) if odd else (1, 1)
            odd = not odd

    if k % 2 == 0:
        if state is State.S1:
            for j in range(npairs):
                pairs[j] = _pick(chooser.uniform(2))
        elif state is State.S2:
            if chooser.bernoulli(alpha):
                anti_from_left(npairs)
            else:
                pairs = [_pick(_odd_level(ul, dl))] * npairs
        elif state is State.S3:
            for j in range(npairs):
                pairs[j] = (1, 1) if chooser.bernoulli(HALF) else _double(chooser)
        else:
            if chooser.bernoulli(alpha):
                forced_from_left(npairs)
            elif variant is Variant.A:
                pairs = [(1, 1)] * npairs
            else:
                pairs = [_double(chooser) for _ in range(npairs)]
    else:
        if state is State.S1:
            if chooser.bernoulli(alpha):
                anti_from_left(npairs)
            else:
                i = chooser.uniform(k)
                left, right = _pick(_odd_level(ul, dl)), _pick(_odd_level(ur, dr))
                pairs = [left if j < i else right for j in range(npairs)]
        elif state is State.S2:
            if chooser.bernoulli(alpha):
                i = chooser.uniform(k)
                anti_from_left(i)
                anti_from_right(i)
            else:
                pairs = [_pick(_odd_level(ul, dl))] * npairs
        elif state is State.S3:
            if chooser.bernoulli(alpha):
                forced_from_left(npairs)
            else:
                i = chooser.uniform(k)
                # use both on the incoming side of a_i, double one beyond it
                near_left = variant is Variant.A
                pairs = [
                    (1, 1) if (j < i) == near_left else _double(chooser) for j in range(npairs)
                ]
        else:
            if chooser.bernoulli(alpha):
                i = chooser.uniform(k)
                forced_from_left(i)
                forced_from_right(i)
            elif variant is Variant.A:
                pairs = [(1, 1)] * npairs
            else:
                pairs = [_double(chooser) for _ in range(npairs)]
    return (state, variant), pairs


# ---------------------------------------------------------------- sampling


class Draw(NamedTuple):
    multiplicities: tuple[int, ...]
    states: tuple[tuple[int, State, Variant], ...]  # (cut, state, variant) per cut


def _root_multiplicities(pipe: Pipeline, chooser: Chooser) -> dict[int, int]:
    p = pipe.plan.p_root
    state = State(chooser.categorical(list(p)) + 1)
    variant = Variant.A if chooser.bernoulli(HALF) else Variant.B
    odd = PATTERNS[(state, variant)]
    frame = pipe.frames[pipe.hierarchy.top.index]
    return {eid: int(role in odd) for role, eid in zip(ROLES, frame.roles)}


def draw(pipe: Pipeline, chooser: Chooser) -> Draw:
    mult = [-1] * pipe.graph.edge_count
    for eid, m in _root_multiplicities(pipe, chooser).items():
        mult[eid] = m
    states = []
    for s in pipe.order:
        frame = pipe.frames[s]
        incoming = [mult[e] for e in frame.roles]
        if min(incoming) < 0:
            raise FrameMismatch(f"cut {s} reached before its boundary was fixed")
        key, pairs = fill_cut(frame, incoming, pipe.plan.entries[s].params, chooser)
        states.append((s, key[0], key[1]))
        for (t, b), (mt, mb) in zip(frame.pairs, pairs):
            if mult[t] >= 0 or mult[b] >= 0:
                raise FrameMismatch(f"edge assigned twice at cut {s}")
            mult[t], mult[b] = mt, mb
    if min(mult) < 0:
        raise FrameMismatch("some edges were never assigned a multiplicity")
    return Draw(tuple(mult), tuple(states))


class TourSample(NamedTuple):
    multiplicities: tuple[int, ...]
    circuit: Circuit
    cost: Fraction


def tour_cost(g: Multigraph, mult: Sequence[int]) -> Fraction:
    return sum((e.cost * mult[e.id] for e in g.edges), Fraction(0))


def sample_tour(inst: Instance | Pipeline, seed: int, p_root: StateDistribution = DEFAULT_ROOT,
                index: int = 0) -> TourSample:
    pipe = inst if isinstance(inst, Pipeline) else prepare(inst, p_root)
    d = draw(pipe, RandomChooser(substream(seed, index)))
    circuit = euler_circuit(pipe.graph, d.multiplicities)
    return TourSample(d.multiplicities, circuit, tour_cost(pipe.graph, d.multiplicities))


# ---------------------------------------------------------------- exact oracle


class Outcome(NamedTuple):
    multiplicities: tuple[int, ...]
    states: tuple[tuple[int, State, Variant], ...]
    probability: Fraction


def enumerate_outcomes(pipe: Pipeline, max_paths: int = 200_000) -> list[Outcome]:
    return [Outcome(d.multiplicities, d.states, p)
            for d, p in enumerate_paths(lambda ch: draw(pipe, ch), max_paths)]


def exact_outcome_distribution(inst: Instance | Pipeline, max_paths: int = 200_000,
                               p_root: StateDistribution = DEFAULT_ROOT) -> list[tuple[tuple[int, ...], Fraction]]:
    """Every reachable multiplicity map with its exact probability."""
    pipe = inst if isinstance(inst, Pipeline) else prepare(inst, p_root)
    merged: dict[tuple[int, ...], Fraction] = {}
    for o in enumerate_outcomes(pipe, max_paths):
        merged[o.multiplicities] = merged.get(o.multiplicities, Fraction(0)) + o.probability
    return sorted(merged.items())


def oracle_edge_means(pipe: Pipeline, outcomes: list[tuple[tuple[int, ...], Fraction]]) -> list[Fraction]:
    means = [Fraction(0)] * pipe.graph.edge_count
    for mult, p in outcomes:
        for i, m in enumerate(mult):
            if m:
                means[i] += m * p
    return means


# ---------------------------------------------------------------- closed forms


def expected_multiplicities(pipe: Pipeline) -> list[Fraction]:
    """Exact per-edge expectation from the propagated distributions.

    An edge filled at cut C is used 1 - (q1 + q2)/2 times in expectation; a
    root edge is used once exactly when it is odd in the root pattern.
    """
    out: list[Fraction | None] = [None] * pipe.graph.edge_count
    p = pipe.plan.p_root
    top = pipe.frames[pipe.hierarchy.top.index]
    for role, eid in zip(ROLES, top.roles):
        out[eid] = sum(
            (p[s] * Fraction(int(role in PATTERNS[(s, Variant.A)]) + int(role in PATTERNS[(s, Variant.B)]), 2)
             for s in State),
            Fraction(0),
        )
    for s in pipe.order:
        q = pipe.plan.distribution(s)
        for eid in pipe.hierarchy.cuts[s].internal:
            out[eid] = 1 - (q.p1 + q.p2) / 2
    return out


def local_edge_means(pipe: Pipeline, s: int, max_paths: int = 2_000) -> dict[int, Fraction] | None:
    """Per-edge expectation at cut ``s`` by enumerating its filling rule alone.

    Independent of the closed form; returns None when the rule has too many
    branches to enumerate.
    """
    frame = pipe.frames[s]
    entry = pipe.plan.entries[s]
    means: dict[int, Fraction] = {e: Fraction(0) for pair in frame.pairs for e in pair}
    try:
        for state in State:
            for variant in Variant:
                weight = entry.distribution[state] / 2
                if weight == 0:
                    continue
                incoming = tuple(
                    1 if role in PATTERNS[(state, variant)] else 0 for role in ROLES
                )
                for (_, pairs), p in enumerate_paths(
                        lambda ch: fill_cut(frame, incoming, entry.params, ch), max_paths):
                    for (t, b), (mt, mb) in zip(frame.pairs, pairs):
                        means[t] += weight * p * mt
                        means[b] += weight * p * mb
    except TooLarge:
        return None
    return means


def expected_cost(pipe: Pipeline) -> Fraction:
    return sum((e.cost * m for e, m in zip(pipe.graph.edges, expected_multiplicities(pipe))), Fraction(0))


# ---------------------------------------------------------------- Monte Carlo


@dataclass
class _Tally:
    edge_sums: list[int]
    cost_sum: int
    cost_sq_sum: int
    states: Counter
    parity_violations: int = 0
    connectivity_violations: int = 0
    samples: int = 0

    def merge(self, other: "_Tally") -> None:
        self.edge_sums = [a + b for a, b in zip(self.edge_sums, other.edge_sums)]
        self.cost_sum += other.cost_sum
        self.cost_sq_sum += other.cost_sq_sum
        self.states.update(other.states)
        self.parity_violations += other.parity_violations
        self.connectivity_violations += other.connectivity_violations
        self.samples += other.samples


def _scaled_costs(g: Multigraph) -> tuple[list[int], int]:
    scale = math.lcm(*(e.cost.denominator for e in g.edges)) if g.edges else 1
    return [int(e.cost * scale) for e in g.edges], scale


def _tally(pipe: Pipeline, seed: int, start: int, stop: int) -> _Tally:
    g = pipe.graph
    costs, _ = _scaled_costs(g)
    t = _Tally([0] * g.edge_count, 0, 0, Counter())
    for i in range(start, stop):
        d = draw(pipe, RandomChooser(substream(seed, i)))
        mult = d.multiplicities
        t.edge_sums = [a + m for a, m in zip(t.edge_sums, mult)]
        c = sum(ci * m for ci, m in zip(costs, mult))
        t.cost_sum += c
        t.cost_sq_sum += c * c
        t.states.update(d.states)
        if any(x % 2 for x in weighted_degrees(g, mult)):
            t.parity_violations += 1
        if not is_connected_spanning(g, mult):
            t.connectivity_violations += 1
        t.samples += 1
    return t


@dataclass
class UsageStats:
    samples: int
    seed: int
    edge_means: list[float]
    cost_mean: float
    cost_se: float
    state_frequencies: dict[int, list[float]]  # cut -> frequencies of S1..S4
    variant_frequencies: dict[int, dict[str, float]]  # cut -> "S1A" style keys
    parity_violations: int
    connectivity_violations: int


def usage_stats(inst: Instance | Pipeline, n: int, seed: int, jobs: int = 1,
                p_root: StateDistribution = DEFAULT_ROOT) -> UsageStats:
    if n < 1:
        raise ValueError("need at least one sample")
    pipe = inst if isinstance(inst, Pipeline) else prepare(inst, p_root)
    jobs = max(1, min(jobs, n))
    bounds = [(n * i // jobs, n * (i + 1) // jobs) for i in range(jobs)]
    if jobs == 1:
        parts = [_tally(pipe, seed, 0, n)]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_tally, [pipe] * jobs, [seed] * jobs,
                                  [a for a, _ in bounds], [b for _, b in bounds]))
    total = parts[0]
    for part in parts[1:]:
        total.merge(part)

    _, scale = _scaled_costs(pipe.graph)
    mean = Fraction(total.cost_sum, n)
    if n > 1:
        var = (Fraction(total.cost_sq_sum) - n * mean * mean) / (n - 1)
        se = math.sqrt(var / n) / scale
    else:
        se = 0.0
    states: dict[int, list[float]] = {}
    variants: dict[int, dict[str, float]] = {}
    for s in pipe.order:
        states[s] = [sum(total.states[(s, st, v)] for v in Variant) / n for st in State]
        variants[s] = {f"{st.name}{v.value}": total.states[(s, st, v)] / n for st in State for v in Variant}
    return UsageStats(
        samples=n,
        seed=seed,
        edge_means=[x / n for x in total.edge_sums],
        cost_mean=float(mean / scale),
        cost_se=se,
        state_frequencies=states,
        variant_frequencies=variants,
        parity_violations=total.parity_violations,
        connectivity_violations=total.connectivity_violations,
    )


# ---------------------------------------------------------------- reports


def _cut_summary(pipe: Pipeline, s: int) -> dict:
    cut = pipe.hierarchy.cuts[s]
    frame = pipe.frames[s]
    entry = pipe.plan.entries[s]
    params = entry.params
    out = {
        "cut": s,
        "members": sorted(cut.members),
        "parent": cut.parent,
        "k": frame.k,
        "parity": frame.parity.value,
        "twist": frame.twist.value,
        "distribution": entry.distribution.as_strings(),
        "params": {name: str(getattr(params, name)) for name in ("x", "y", "z", "w")
                   if getattr(params, name) is not None},
        "alphas": {st.name: str(a) for st, a in params.alphas},
    }
    return out


def expectation_report(pipe: Pipeline, max_paths: int = 2_000) -> dict:
    exp = expected_multiplicities(pipe)
    cost = expected_cost(pipe)
    lp = lp_value(pipe.instance)
    mismatches = []
    checked = []
    for s in pipe.order:
        local = local_edge_means(pipe, s, max_paths)
        if local is None:
            continue
        checked.append(s)
        mismatches.extend(e for e, v in local.items() if v != exp[e])
    return {
        "schema_version": _report.SCHEMA_VERSION,
        "n": pipe.instance.n,
        "root": pipe.hierarchy.root_vertex,
        "lp_value": str(lp),
        "expected_cost": str(cost),
        "ratio": str(cost / lp) if lp else None,
        "bound": str(Fraction(4, 3) * lp),
        "within_bound": cost <= Fraction(4, 3) * lp,
        "p_root": pipe.plan.p_root.as_strings(),
        "cuts": [_cut_summary(pipe, s) for s in pipe.order],
        "edges": [
            {"id": e.id, "u": e.u, "v": e.v, "cost": str(e.cost), "expected": str(exp[e.id])}
            for e in pipe.graph.edges
        ],
        "cross_check": {"cuts_enumerated": checked, "mismatched_edges": sorted(set(mismatches))},
    }


def usage_report(pipe: Pipeline, stats: UsageStats) -> dict:
    exp = expected_multiplicities(pipe)
    sig = sig12
    return {
        "schema_version": _report.SCHEMA_VERSION,
        "n": pipe.instance.n,
        "root": pipe.hierarchy.root_vertex,
        "samples": stats.samples,
        "seed": stats.seed,
        "lp_value": str(lp_value(pipe.instance)),
        "cost": {
            "mean": sig(stats.cost_mean),
            "standard_error": sig(stats.cost_se),
            "exact_expectation": str(expected_cost(pipe)),
        },
        "edges": [
            {"id": e.id, "mean": sig(stats.edge_means[e.id]), "expected": str(exp[e.id])}
            for e in pipe.graph.edges
        ],
        "cuts": [
            dict(_cut_summary(pipe, s),
                 empirical=[sig(x) for x in stats.state_frequencies[s]],
                 variants={k: sig(v) for k, v in stats.variant_frequencies[s].items()})
            for s in pipe.order
        ],
        "violations": {
            "parity": stats.parity_violations,
            "connectivity": stats.connectivity_violations,
        },
    }
