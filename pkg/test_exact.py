"""
Tests for the max-flow feasibility oracle and branch and bound, checked
against exhaustive enumeration with an independent Hall-condition check.
"""

from fractions import Fraction

import numpy as np
import pytest

from conftest import brute_force_optimum, hall_feasible, random_instance
from jpavnf.exact import (
    ExactCap,
    allocation_feasible,
    exact_cap_from_env,
    extract_allocation,
    placement_upper_bounds,
    solve_exact,
)
from jpavnf.model import (
    Flow,
    InfeasibleSolutionError,
    build_instance,
    check_feasible,
    make_graph,
    node_loads,
    total_instances,
)


def test_six_node_optimum(six_node):
    result = solve_exact(six_node)
    assert result.optimum == 3
    assert result.proven_optimal
    assert result.lower_bound == 3
    assert total_instances(result.solution) == 3
    assert check_feasible(six_node, result.solution).feasible


def test_allocation_feasible_on_six_node(six_node):
    assert allocation_feasible(six_node, (0, 0, 1, 2, 0, 0))
    assert not allocation_feasible(six_node, (0, 0, 1, 1, 0, 0))


def test_allocation_feasible_without_flows():
    instance = build_instance(make_graph(2, [(0, 1)]), [], 10)
    assert allocation_feasible(instance, (0, 0))


def test_vector_length_is_checked(six_node):
    with pytest.raises(ValueError):
        allocation_feasible(six_node, (1, 2))
    with pytest.raises(ValueError):
        allocation_feasible(six_node, (0, 0, -1, 2, 0, 0))


def test_extract_allocation_on_six_node(six_node):
    solution = extract_allocation(six_node, (0, 0, 1, 2, 0, 0))
    assert sum(solution.allocated_to('f1').values()) == 16
    assert check_feasible(six_node, solution).feasible
    with pytest.raises(InfeasibleSolutionError):
        extract_allocation(six_node, (0, 0, 1, 1, 0, 0))


def test_extract_allocation_single_flow():
    instance = build_instance(make_graph(1, []), [Flow('f1', 4, [0])], 10)
    assert extract_allocation(instance, (1,)).allocations == {('f1', 0): 4}


def test_extract_allocation_on_frg_wins(frg_wins):
    solution = extract_allocation(frg_wins, (2, 3))
    assert check_feasible(frg_wins, solution).feasible
    loads = node_loads(frg_wins, solution)
    assert loads[0] <= 20
    assert loads[1] <= 30


def test_fractional_rates_are_scaled():
    graph = make_graph(2, [(0, 1)])
    flows = [Flow('f1', Fraction(7, 3), [0, 1]), Flow('f2', Fraction(5, 6), [1])]
    instance = build_instance(graph, flows, Fraction(7, 4))
    result = solve_exact(instance)
    assert result.optimum == 2
    assert check_feasible(instance, result.solution).feasible


def test_disjoint_flows_need_two_instances():
    instance = build_instance(make_graph(2, [(0, 1)]), [Flow('f1', 1, [0]), Flow('f2', 1, [1])], 10)
    assert solve_exact(instance).optimum == 2


def test_reduced_set_cover_example():
    graph = make_graph(6, [(i, j) for i in range(6) for j in range(i + 1, 6)])
    rate = Fraction(10, 3)
    flows = [Flow('f1', rate, [0, 1, 2, 3]), Flow('f2', rate, [0, 2, 5]), Flow('f3', rate, [3, 4])]
    assert solve_exact(build_instance(graph, flows, 10)).optimum == 2


def test_no_flows():
    result = solve_exact(build_instance(make_graph(3, [(0, 1), (1, 2)]), [], 10))
    assert result.optimum == 0
    assert result.proven_optimal


def test_upper_bounds(six_node):
    assert placement_upper_bounds(six_node) == [1, 2, 3, 3, 1, 1]


def test_budget_exhaustion_is_flagged():
    found_unproven = False
    for seed in range(50):
        instance = random_instance(seed, max_nodes=6, max_flows=5)
        result = solve_exact(instance, node_budget=1, warm_start=False)
        assert check_feasible(instance, result.solution).feasible
        if not result.proven_optimal:
            found_unproven = True
            assert result.optimum >= brute_force_optimum(instance)
    assert found_unproven


def test_matches_exhaustive_enumeration():
    for seed in range(100):
        instance = random_instance(seed, max_nodes=6, max_flows=5)
        result = solve_exact(instance)
        assert result.proven_optimal
        assert result.optimum == brute_force_optimum(instance), seed
        assert check_feasible(instance, result.solution).feasible


def test_max_flow_oracle_agrees_with_hall_condition():
    for seed in range(100):
        instance = random_instance(seed, max_nodes=5, max_flows=4)
        bounds = placement_upper_bounds(instance)
        for drop in range(instance.node_count):
            x = [b if i != drop else 0 for i, b in enumerate(bounds)]
            assert allocation_feasible(instance, x) == hall_feasible(instance, x), seed


def test_cap_from_env():
    assert exact_cap_from_env({}) == ExactCap(15, 12)
    assert exact_cap_from_env({'JPAVNF_EXACT_CAP': '20'}) == ExactCap(20, 12)
    assert exact_cap_from_env({'JPAVNF_EXACT_CAP': '20,30'}) == ExactCap(20, 30)


@pytest.mark.parametrize('raw', ['abc', '1,2,3', '0', '5,-1'])
def test_malformed_cap_falls_back(raw, caplog):
    assert exact_cap_from_env({'JPAVNF_EXACT_CAP': raw}) == ExactCap()
    assert 'JPAVNF_EXACT_CAP' in caplog.text


def test_cap_admits(six_node):
    assert ExactCap().admits(six_node)
    assert not ExactCap(max_nodes=5).admits(six_node)


def test_allocation_feasible_is_monotone():
    for seed in range(100):
        instance = random_instance(seed, max_nodes=6, max_flows=5)
        rng = np.random.default_rng(seed)
        x = tuple(int(rng.integers(0, bound + 1)) for bound in placement_upper_bounds(instance))
        feasible = allocation_feasible(instance, x)
        for node in range(instance.node_count):
            raised = x[:node] + (x[node] + 1,) + x[node + 1:]
            if feasible:
                assert allocation_feasible(instance, raised), (seed, node)
            elif x[node] > 0:
                lowered = x[:node] + (x[node] - 1,) + x[node + 1:]
                assert not allocation_feasible(instance, lowered), (seed, node)


@pytest.mark.parametrize('x', [(0, 0, 1.0, 2, 0, 0), (0, 0, True, 2, 0, 0)])
def test_placement_vector_must_hold_integers(six_node, x):
    with pytest.raises(ValueError):
        allocation_feasible(six_node, x)
