import json
import random
from fractions import Fraction

import pytest

from cyclecut.cuts import build_hierarchy, verify_cycle_cut_instance
from cyclecut.errors import (
    BlueprintInvalid,
    DegenerateInstance,
    DegreeViolation,
    HalfIntegralityViolation,
    MetricUndefined,
    ParseError,
    SubtourViolation,
    TooLarge,
)
from cyclecut.instance import (
    Chain,
    Leaf,
    dump_instance,
    gen_doubled_cycle,
    gen_figure1,
    gen_random_cyclecut,
    held_karp,
    held_karp_opt,
    load_instance,
    lp_value,
    make_instance,
    random_blueprint,
    shortest_path_metric,
    support_multigraph,
)
from cyclecut.multigraph import global_min_cut_value

from oracles import FIG1_TSP_OPT, blueprint_cases, brute_tsp, dict_held_karp


def as_json(n, edges, **extra):
    return json.dumps({"n": n, "edges": [dict(zip(("u", "v", "x"), e)) for e in edges], **extra})


def test_load_doubled_four_cycle():
    inst = load_instance(as_json(4, [(0, 1, "1"), (1, 2, "1"), (2, 3, "1"), (3, 0, "1")]))
    assert inst.n == 4
    assert support_multigraph(inst).edge_count == 8
    assert lp_value(inst) == 4


def test_quarter_value_rejected():
    with pytest.raises(HalfIntegralityViolation):
        load_instance(as_json(4, [(0, 1, "1/4"), (1, 2, "1"), (2, 3, "1"), (3, 0, "1")]))


def test_degree_violation():
    with pytest.raises(DegreeViolation):
        load_instance(as_json(4, [(0, 1, "1"), (1, 2, "1"), (2, 3, "1"), (3, 0, "1/2")]))


def test_cut_of_value_one_is_subtour_violation():
    # {0,1,2} and {3,4,5} are joined by two half edges only
    edges = [(0, 1, "1"), (1, 2, "1"), (0, 2, "1/2"), (0, 3, "1/2"), (2, 4, "1/2"),
             (3, 5, "1"), (4, 5, "1"), (3, 4, "1/2")]
    with pytest.raises(SubtourViolation):
        load_instance(as_json(6, edges))


def test_disconnected_support_rejected():
    two_cycles = [(0, 1, "1"), (1, 2, "1"), (2, 3, "1"), (3, 0, "1"),
                  (4, 5, "1"), (5, 6, "1"), (6, 7, "1"), (7, 4, "1")]
    with pytest.raises(SubtourViolation):
        load_instance(as_json(8, two_cycles))


def test_duplicate_pair_rejected():
    edges = [(0, 1, "1/2"), (1, 0, "1/2"), (1, 2, "1"), (2, 3, "1"), (3, 0, "1")]
    with pytest.raises(ParseError):
        load_instance(as_json(4, edges))


def test_degenerate_small_instance():
    with pytest.raises(DegenerateInstance):
        load_instance(as_json(3, [(0, 1, "1"), (1, 2, "1"), (2, 0, "1")]))


@pytest.mark.parametrize("text", [
    "not json",
    "[]",
    json.dumps({"n": 4, "edges": [], "extra": 1}),
    json.dumps({"n": 4, "edges": [{"u": 0, "v": 1, "x": "1", "colour": "red"}]}),
    json.dumps({"n": 4, "edges": [{"u": 0, "v": 1, "x": "0.5"}]}),
    json.dumps({"edges": []}),
])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        load_instance(text)


@pytest.mark.parametrize("k", [0, 1, 2, 5, 10])
def test_figure1_round_trips_through_loader(k):
    inst = gen_figure1(k)
    again = load_instance(dump_instance(inst))
    assert again == inst
    assert inst.n == 6 + 3 * k


@pytest.mark.parametrize("k", range(0, 51, 5))
def test_figure1_lp_value(k):
    assert lp_value(gen_figure1(k)) == 3 * k + 6


def test_figure1_min_cut():
    assert global_min_cut_value(support_multigraph(gen_figure1(5))) == 4
    g = support_multigraph(gen_figure1(0))
    assert all(g.degree(v) == 4 for v in range(6))


@pytest.mark.parametrize("k", [0, 3, 7])
def test_figure1_is_cycle_cut_instance(k):
    g = support_multigraph(gen_figure1(k))
    assert verify_cycle_cut_instance(build_hierarchy(g, 0)).ok


def test_three_leaf_chain_is_doubled_four_cycle():
    inst = gen_random_cyclecut(Chain(Leaf(), Leaf(), Leaf()), seed=0, unit_costs=True)
    assert inst.n == 4
    assert all(e.x == 1 for e in inst.edges)
    assert len(inst.edges) == 4


def test_nested_chain_vertex_count():
    inst = gen_random_cyclecut(Chain(Chain(Leaf(), Leaf()), Leaf(), Leaf()), seed=3)
    g = support_multigraph(inst)
    # four leaves plus the root vertex
    assert inst.n == 5
    assert all(g.degree(v) == 4 for v in range(5))


@pytest.mark.parametrize("bp", [Leaf(), Chain(Leaf()), Chain(Leaf(), Leaf()), "junk"])
def test_invalid_blueprints(bp):
    with pytest.raises(BlueprintInvalid):
        gen_random_cyclecut(bp, seed=0)


def test_generated_instances_validate():
    for seed, _, real in blueprint_cases(50):
        inst = load_instance(dump_instance(real.instance))
        g = support_multigraph(inst)
        assert all(g.degree(v) == 4 for v in range(g.vertex_count))
        assert global_min_cut_value(g) == 4
    for k in range(0, 12):
        load_instance(dump_instance(gen_figure1(k)))


def test_random_costs_are_positive_rationals():
    inst = gen_random_cyclecut(random_blueprint(random.Random(5), 7), seed=5)
    assert all(e.cost > 0 and isinstance(e.cost, Fraction) for e in inst.edges)


def test_held_karp_four_cycle():
    assert held_karp_opt(gen_doubled_cycle(4)) == 4


@pytest.mark.parametrize("k", [0, 1, 2])
def test_held_karp_figure1(k):
    inst = gen_figure1(k)
    assert held_karp_opt(inst) == FIG1_TSP_OPT[k]
    assert dict_held_karp(shortest_path_metric(inst)) == FIG1_TSP_OPT[k]


def test_held_karp_matches_permutations_on_random_metrics():
    rng = random.Random(11)
    for _ in range(10):
        n = rng.randint(3, 7)
        pts = [(rng.randint(0, 9), rng.randint(0, 9)) for _ in range(n)]
        dist = [[Fraction(abs(a[0] - b[0]) + abs(a[1] - b[1]), rng.choice([1, 2, 3]) if i != j else 1)
                 if i != j else Fraction(0) for j, b in enumerate(pts)] for i, a in enumerate(pts)]
        dist = [[min(dist[i][j], dist[j][i]) for j in range(n)] for i in range(n)]
        assert held_karp(dist) == brute_tsp(dist)


def test_held_karp_explicit_matrix_and_errors():
    inst = gen_doubled_cycle(4)
    m = [[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]]
    assert held_karp_opt(inst, m) == 4
    with pytest.raises(MetricUndefined):
        held_karp_opt(inst, [[0, 1], [1, 0]])
    with pytest.raises(TooLarge):
        held_karp_opt(gen_figure1(5))


def test_make_instance_defaults():
    inst = make_instance(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)])
    assert inst.root_vertex == 0
    assert lp_value(inst) == 4
