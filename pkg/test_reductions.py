"""
Tests for the set-cover reduction, the greedy cover and the small-rate
transform.
"""

from fractions import Fraction

import numpy as np
import pytest

from conftest import brute_force_min_cover
from jpavnf.exact import solve_exact
from jpavnf.fixtures import fixture_path
from jpavnf.greedy import solve_fng, solve_frg
from jpavnf.model import Flow, build_instance, make_graph
from jpavnf.reductions import (
    SetCoverError,
    greedy_set_cover,
    load_set_cover,
    make_set_cover,
    reduce_set_cover,
    set_cover_from_dict,
    small_rate_transform,
)

EXAMPLE_SUBSETS = [[1, 2], [1], [1, 2], [1, 3], [3], [2]]


def test_reduce_example():
    instance = reduce_set_cover(make_set_cover(3, EXAMPLE_SUBSETS), 10)
    assert instance.node_count == 6
    assert len(instance.graph.edges) == 15
    assert [flow.rate for flow in instance.flows] == [Fraction(10, 3)] * 3
    assert [flow.path for flow in instance.flows] == [(0, 1, 2, 3), (0, 2, 5), (3, 4)]
    assert solve_exact(instance).optimum == 2


def test_reduce_single_subset():
    instance = reduce_set_cover(make_set_cover(1, [[1]]), 10)
    assert instance.node_count == 1
    assert instance.flows[0].rate == 10


def test_greedy_cover():
    assert greedy_set_cover(make_set_cover(3, EXAMPLE_SUBSETS)) == [0, 3]
    assert greedy_set_cover(make_set_cover(1, [[1]])) == [0]
    assert greedy_set_cover(make_set_cover(3, [[1], [2], [3]])) == [0, 1, 2]


def test_load_example_fixture():
    sc = load_set_cover(fixture_path('setcover_example.json'))
    assert sc.universe == {1, 2, 3}
    assert len(sc.subsets) == 6


@pytest.mark.parametrize('data', [
    {'universe': 0, 'subsets': []},
    {'universe': 2, 'subsets': [[1]]},
    {'universe': 2, 'subsets': [[1, 2, 3]]},
    {'subsets': [[1]]},
])
def test_invalid_set_cover(data):
    with pytest.raises(SetCoverError):
        set_cover_from_dict(data)


def random_set_cover(seed):
    rng = np.random.default_rng(seed)
    universe = int(rng.integers(1, 7))
    count = int(rng.integers(1, 7))
    subsets = [[e for e in range(1, universe + 1) if rng.random() < 0.4] for _ in range(count)]
    for element in range(1, universe + 1):
        if not any(element in subset for subset in subsets):
            subsets[int(rng.integers(0, count))].append(element)
    return make_set_cover(universe, subsets)


@pytest.mark.parametrize('capacity', [Fraction(1), Fraction(10), Fraction(7, 3)])
def test_reduction_preserves_cover_size(capacity):
    for seed in range(100):
        sc = random_set_cover(seed)
        instance = reduce_set_cover(sc, capacity)
        assert solve_exact(instance).optimum == brute_force_min_cover(sc), seed


def test_fng_follows_greedy_cover():
    for seed in range(100):
        sc = random_set_cover(seed)
        instance = reduce_set_cover(sc, 10)
        assert solve_fng(instance).chosen_nodes == greedy_set_cover(sc), seed


def test_small_rate_transform_on_six_node(six_node):
    transformed = small_rate_transform(six_node)
    assert [flow.rate for flow in transformed.flows] == [Fraction(10, 3)] * 3
    assert [flow.path for flow in transformed.flows] == [flow.path for flow in six_node.flows]


def test_small_rate_transform_single_flow():
    instance = build_instance(make_graph(1, []), [Flow('f1', 2, [0])], 10)
    assert small_rate_transform(instance).flows[0].rate == 2


def test_small_rate_transform_rejects_all_zero():
    instance = build_instance(make_graph(1, []), [Flow('f1', 0, [0])], 10)
    with pytest.raises(ValueError):
        small_rate_transform(instance)


def test_small_rates_need_one_instance_per_node():
    for seed in range(50):
        sc = random_set_cover(seed)
        instance = small_rate_transform(reduce_set_cover(sc, 10))
        for solver in (solve_fng, solve_frg):
            assert all(count == 1 for count in solver(instance).solution.placements.values())


@pytest.mark.parametrize('capacity', [Fraction(10), Fraction(7, 3)])
def test_reduced_solutions_place_one_instance_per_chosen_node(capacity):
    for seed in range(60):
        sc = random_set_cover(seed)
        instance = reduce_set_cover(sc, capacity)
        for solution in (solve_fng(instance).solution, solve_frg(instance).solution,
                         solve_exact(instance).solution):
            assert set(solution.placements.values()) == {1}, seed
            chosen = frozenset().union(*(sc.subsets[node] for node in solution.placements))
            assert chosen == sc.universe, seed
