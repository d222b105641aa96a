import random
from collections import defaultdict
from fractions import Fraction as F

import pytest

from cyclecut.chain import DEFAULT_ROOT, ChainParams, State, Variant, classify_pattern, dist, pattern_parities, swap12
from cyclecut.embedding import Twist
from cyclecut.errors import DegreeCutPresent, RegionViolation, TooLarge
from cyclecut.instance import gen_figure1, lp_value, make_instance
from cyclecut.multigraph import is_connected_spanning, weighted_degrees
from cyclecut.sampler import (
    RandomChooser,
    draw,
    enumerate_outcomes,
    enumerate_paths,
    exact_outcome_distribution,
    expected_cost,
    expected_multiplicities,
    fill_cut,
    local_edge_means,
    oracle_edge_means,
    prepare,
    sample_tour,
    substream,
    tour_cost,
    usage_stats,
)

from oracles import FIG1_EXPECTED_COST, blueprint_cases

THIRD = F(1, 3)


def valid(g, mult):
    return not any(d % 2 for d in weighted_degrees(g, mult)) and is_connected_spanning(g, mult)


def cut_marginals(outcomes):
    states = defaultdict(lambda: defaultdict(F))
    for o in outcomes:
        for cut, state, variant in o.states:
            states[cut][(state, variant)] += o.probability
    return states


# ---------------------------------------------------------------- propagation


def test_even_parent_children_from_default_root():
    pipe = prepare(gen_figure1(0))
    top = pipe.hierarchy.top
    composite = [c for c in top.children if c in pipe.frames]
    assert composite
    for c in composite:
        expected = dist(F(1, 2), F(1, 6), F(1, 6), F(1, 6))
        if pipe.frames[c].twist is Twist.TWISTED:
            expected = swap12(expected)
        assert pipe.plan.distribution(c) == expected


def test_odd_parent_children():
    pipe = prepare(gen_figure1(1))
    for c in pipe.hierarchy.top.children:
        if c in pipe.frames:
            assert pipe.plan.distribution(c) in (dist(F(4, 9), F(2, 9), F(2, 9), F(1, 9)),
                                                 dist(F(2, 9), F(4, 9), F(2, 9), F(1, 9)))


def test_child_distribution_is_parent_image_everywhere():
    twisted = 0
    for _, _, real in blueprint_cases(50):
        pipe = prepare(real.instance)
        for s in pipe.order:
            entry = pipe.plan.entries[s]
            image = entry.params.step(entry.distribution)
            for c in pipe.hierarchy.cuts[s].children:
                if c in pipe.frames:
                    tw = pipe.frames[c].twist is Twist.TWISTED
                    twisted += tw
                    assert pipe.plan.distribution(c) == (swap12(image) if tw else image)
    assert twisted > 0


def test_root_distribution_outside_region():
    with pytest.raises(RegionViolation):
        prepare(gen_figure1(0), dist(F(1, 2), F(1, 2), 0, 0))
    with pytest.raises(RegionViolation):
        prepare(gen_figure1(0), dist(F(2, 3), 0, 0, THIRD))  # p4 must be 0 at the root


def test_degree_cut_instance_rejected():
    k5 = make_instance(5, [(i, j, F(1, 2)) for i in range(5) for j in range(i + 1, 5)])
    with pytest.raises(DegreeCutPresent):
        prepare(k5)


# ---------------------------------------------------------------- filling rules


def _fill_distribution(frame, incoming, params):
    out = defaultdict(F)
    for (_, pairs), p in enumerate_paths(lambda ch: fill_cut(frame, incoming, params, ch)):
        out[tuple(pairs)] += p
    return dict(out)


def test_even_state3_pair_distribution():
    pipe = prepare(gen_figure1(0))
    frame = pipe.frames[0]
    incoming = pattern_parities(State.S3, Variant.A)
    got = _fill_distribution(frame, incoming, pipe.plan.entries[0].params)
    assert got == {((1, 1),): F(1, 2), ((2, 0),): F(1, 4), ((0, 2),): F(1, 4)}


def test_even_state1_pair_distribution():
    pipe = prepare(gen_figure1(0))
    frame = pipe.frames[0]
    got = _fill_distribution(frame, pattern_parities(State.S1, Variant.A), pipe.plan.entries[0].params)
    assert got == {((1, 0),): F(1, 2), ((0, 1),): F(1, 2)}


def test_odd_state2_aligned_branch():
    pipe = prepare(gen_figure1(1))
    frame = pipe.frames[0]
    assert frame.k == 3
    t = F(2, 3)
    aligned_only = ChainParams(3, t, t, t, t, ((State.S1, F(1, 2)), (State.S2, F(0)),
                                               (State.S3, F(1, 2)), (State.S4, F(1))))
    got = _fill_distribution(frame, pattern_parities(State.S2, Variant.A), aligned_only)
    assert got == {((1, 0), (1, 0)): 1}
    # each composite child sees odd edges on the top of both sides: a same-end pattern
    mult = {e: 0 for e in pipe.graph.incidence[0]}
    mult.update(zip(frame.roles, pattern_parities(State.S2, Variant.A)))
    for (top, bottom) in frame.pairs:
        mult[top], mult[bottom] = 1, 0
    for child in frame.chain:
        if child in pipe.frames:
            roles = pipe.frames[child].roles
            assert classify_pattern([mult[e] for e in roles])[0] is State.S3


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_every_rule_keeps_children_even(k):
    # doubled cycles give a single cut whose children are all singletons
    from cyclecut.instance import gen_doubled_cycle

    pipe = prepare(gen_doubled_cycle(k + 1))
    frame = pipe.frames[0]
    for state in State:
        for variant in Variant:
            incoming = pattern_parities(state, variant)
            for alpha in (F(0), F(1), F(1, 2)):
                alphas = tuple((s, alpha) for s in State)
                params = pipe.plan.entries[0].params
                params = ChainParams(params.k, params.z, params.w, params.x, params.y, alphas)
                for (_, pairs), p in enumerate_paths(lambda ch: fill_cut(frame, incoming, params, ch)):
                    assert all(max(pr) > 0 for pr in pairs)
                    for j in range(k):
                        left = incoming[:2] if j == 0 else pairs[j - 1]
                        right = incoming[2:] if j == k - 1 else pairs[j]
                        assert (sum(left) + sum(right)) % 2 == 0


# ---------------------------------------------------------------- sampling


def test_sample_tour_figure1():
    inst = gen_figure1(0)
    pipe = prepare(inst)
    support_cost = sum(e.cost for e in pipe.graph.edges)
    for seed in range(30):
        s = sample_tour(inst, seed)
        assert valid(pipe.graph, s.multiplicities)
        assert s.cost == tour_cost(pipe.graph, s.multiplicities) <= 2 * support_cost
        assert s.circuit.vertices[0] == s.circuit.vertices[-1]
        assert len(s.circuit.edges) == sum(s.multiplicities)


def test_sampling_is_reproducible():
    pipe = prepare(gen_figure1(3))
    assert sample_tour(pipe, 5) == sample_tour(pipe, 5)
    assert draw(pipe, RandomChooser(substream(1, 2))) == draw(pipe, RandomChooser(substream(1, 2)))
    assert substream(1, 2).random() != substream(1, 3).random()


def test_random_chooser_is_exact_on_degenerate_probabilities():
    ch = RandomChooser(random.Random(0))
    assert all(ch.bernoulli(F(1)) for _ in range(50))
    assert not any(ch.bernoulli(F(0)) for _ in range(50))
    assert {ch.categorical([F(0), F(1, 2), F(1, 2)]) for _ in range(100)} == {1, 2}


# ---------------------------------------------------------------- exact oracle


@pytest.mark.parametrize("k", [0, 1, 2])
def test_oracle_figure1(k):
    pipe = prepare(gen_figure1(k))
    dist_ = exact_outcome_distribution(pipe)
    assert sum(p for _, p in dist_) == 1
    assert all(valid(pipe.graph, m) for m, _ in dist_)
    means = oracle_edge_means(pipe, dist_)
    root_edges = pipe.hierarchy.root_edges()
    assert all(m == (F(1, 2) if e in root_edges else F(2, 3)) for e, m in enumerate(means))
    assert means == expected_multiplicities(pipe)
    cost = sum(tour_cost(pipe.graph, m) * p for m, p in dist_)
    assert cost == expected_cost(pipe) == FIG1_EXPECTED_COST[k]
    assert cost <= F(4, 3) * lp_value(pipe.instance)


def test_oracle_path_cap():
    with pytest.raises(TooLarge):
        exact_outcome_distribution(prepare(gen_figure1(2)), max_paths=100)


def _oracle_checks(pipe):
    outcomes = enumerate_outcomes(pipe)
    merged = defaultdict(F)
    for o in outcomes:
        merged[o.multiplicities] += o.probability
    assert sum(merged.values()) == 1
    assert all(valid(pipe.graph, m) for m in merged)
    assert oracle_edge_means(pipe, list(merged.items())) == expected_multiplicities(pipe)
    marg = cut_marginals(outcomes)
    for s in pipe.order:
        q = pipe.plan.distribution(s)
        for state in State:
            a, b = marg[s][(state, Variant.A)], marg[s][(state, Variant.B)]
            assert a + b == q[state]
            assert a == b
    assert expected_cost(pipe) <= F(4, 3) * lp_value(pipe.instance)


def test_oracle_on_random_instances_both_orientations():
    for seed, _, real in blueprint_cases(25, max_leaves=7):
        _oracle_checks(prepare(real.instance))
        _oracle_checks(prepare(real.instance, frame_rng=random.Random(seed)))


def test_oracle_on_other_roots():
    inst = gen_figure1(1)
    for r in (2, 5, 8):
        _oracle_checks(prepare(inst, root=r))


def test_local_enumeration_agrees_with_closed_form():
    pipe = prepare(gen_figure1(3))
    exp = expected_multiplicities(pipe)
    checked = 0
    for s in pipe.order:
        local = local_edge_means(pipe, s, max_paths=50_000)
        if local is not None:
            checked += 1
            assert all(v == exp[e] for e, v in local.items())
    assert checked == len(pipe.order)


# ---------------------------------------------------------------- Monte Carlo


def test_usage_stats_figure1_k4():
    pipe = prepare(gen_figure1(4))
    stats = usage_stats(pipe, 20_000, seed=4)
    exp = expected_multiplicities(pipe)
    assert max(abs(m - float(e)) for m, e in zip(stats.edge_means, exp)) <= 0.03
    for s in pipe.order:
        q = pipe.plan.distribution(s)
        assert max(abs(f - float(x)) for f, x in zip(stats.state_frequencies[s], q)) <= 0.03
    assert stats.parity_violations == stats.connectivity_violations == 0
    assert abs(stats.cost_mean - float(expected_cost(pipe))) <= 3 * stats.cost_se + 1e-12


def test_variant_balance_monte_carlo():
    # chi-square sanity check of the two patterns within each state at the top cut
    pipe = prepare(gen_figure1(2))
    stats = usage_stats(pipe, 6000, seed=9)
    for state in State:
        a = stats.variant_frequencies[0][f"{state.name}A"] * 6000
        b = stats.variant_frequencies[0][f"{state.name}B"] * 6000
        if a + b:
            chi2 = (a - b) ** 2 / (a + b)
            assert chi2 < 10.83  # 0.1% critical value, one degree of freedom


def test_usage_stats_parallel_merge_is_deterministic():
    pipe = prepare(gen_figure1(2))
    one = usage_stats(pipe, 300, seed=3, jobs=1)
    two = usage_stats(pipe, 300, seed=3, jobs=2)
    assert one == two


def test_many_samples_across_corpus_are_valid():
    total = 0
    for _, _, real in blueprint_cases(50):
        pipe = prepare(real.instance)
        stats = usage_stats(pipe, 1000, seed=1)
        assert stats.parity_violations == stats.connectivity_violations == 0
        assert abs(stats.cost_mean - float(expected_cost(pipe))) <= 4 * stats.cost_se + 1e-9
        total += stats.samples
    for k in range(0, 11, 2):
        stats = usage_stats(prepare(gen_figure1(k)), 8334, seed=k)
        assert stats.parity_violations == stats.connectivity_violations == 0
        total += stats.samples
    assert total >= 100_000
