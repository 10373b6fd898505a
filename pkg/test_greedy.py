"""
Tests for the FNG and FRG greedy solvers, including the ratio bounds
checked against the exact solver on random instances.
"""

import math
import time

import pytest

from conftest import random_instance
from jpavnf.exact import solve_exact
from jpavnf.generators import gen_flows, gen_random_topology
from jpavnf.greedy import GreedyCriterion, solve_fng, solve_frg, solve_greedy, trace_to_dicts
from jpavnf.model import (
    Flow,
    Solution,
    build_instance,
    check_feasible,
    demand_lower_bound,
    density,
    density_ratio_bound,
    hosting_nodes,
    make_graph,
    total_instances,
    unused_capacity,
)


def test_fng_on_six_node(six_node):
    result = solve_fng(six_node)
    assert result.solution.placements == {2: 3, 3: 1}
    assert result.chosen_nodes == [2, 3]
    assert result.trace[0].processed_flows == ('f1', 'f2')
    assert result.trace[0].instances_placed == 3
    assert check_feasible(six_node, result.solution).feasible


def test_frg_on_six_node(six_node):
    result = solve_frg(six_node)
    assert result.solution.placements == {2: 3, 3: 1}
    # v4 and v5 both carry rate 5 in the second round; the smaller index wins
    assert result.chosen_nodes == [2, 3]


def test_frg_wins_non_dominance(frg_wins):
    assert solve_fng(frg_wins).solution.placements == {0: 3, 1: 3}
    assert solve_frg(frg_wins).solution.placements == {0: 2, 1: 3}


def test_fng_wins_non_dominance(fng_wins):
    assert solve_fng(fng_wins).solution.placements == {0: 1, 1: 1}
    assert solve_frg(fng_wins).solution.placements == {0: 1, 1: 2}


def test_solve_greedy_matches_wrappers(frg_wins):
    assert solve_greedy(frg_wins, GreedyCriterion.FLOW_NUMBER) == solve_fng(frg_wins)
    assert solve_greedy(frg_wins, GreedyCriterion.FLOW_RATE) == solve_frg(frg_wins)


def test_no_flows_gives_empty_solution():
    instance = build_instance(make_graph(2, [(0, 1)]), [], 10)
    result = solve_fng(instance)
    assert result.solution.placements == {}
    assert result.trace == ()


def test_zero_rate_flows_need_no_instances():
    instance = build_instance(make_graph(2, [(0, 1)]), [Flow('f1', 0, [0, 1]), Flow('f2', 4, [1])], 10)
    result = solve_frg(instance)
    assert result.solution.placements == {1: 1}
    assert result.trace[0].processed_flows == ('f2',)
    assert check_feasible(instance, result.solution).feasible


def test_trace_dicts(six_node):
    events = trace_to_dicts(six_node, solve_fng(six_node).trace)
    assert events[0] == {
        'iteration': 1,
        'node': 2,
        'label': 'v3',
        'processed_flows': ['f1', 'f2'],
        'instances': 3,
        'allocations': {'f1': {'num': 16, 'den': 1}, 'f2': {'num': 6, 'den': 1}},
    }
    assert events[1]['label'] == 'v4'


def test_deterministic(six_node):
    assert solve_frg(six_node) == solve_frg(six_node)
    assert trace_to_dicts(six_node, solve_fng(six_node).trace) == trace_to_dicts(six_node, solve_fng(six_node).trace)


@pytest.mark.parametrize('solver', [solve_fng, solve_frg])
def test_ratio_bounds_against_exact(solver):
    for seed in range(500):
        instance = random_instance(seed, max_nodes=8, max_flows=6)
        solution = solver(instance).solution
        assert check_feasible(instance, solution).feasible, seed

        optimum = solve_exact(instance).optimum
        total = total_instances(solution)
        m = sum(1 for flow in instance.flows if flow.rate > 0)
        assert total <= (math.log(m) + 2) * optimum, seed

        a = density(solution)
        if a >= 2:
            assert total < density_ratio_bound(a) * optimum, seed


@pytest.mark.parametrize('solver', [solve_fng, solve_frg])
def test_each_flow_is_processed_at_one_node(solver):
    for seed in range(100):
        instance = random_instance(seed, max_nodes=10, max_flows=10)
        solution = solver(instance).solution
        for flow in instance.flows:
            assert len(solution.allocated_to(flow.id)) == 1, seed
        assert hosting_nodes(solution) == len(solver(instance).trace)


@pytest.mark.parametrize('solver', [solve_fng, solve_frg])
def test_unused_capacity_is_below_one_instance(solver):
    for seed in range(200):
        instance = random_instance(seed, max_nodes=10, max_flows=10)
        solution = solver(instance).solution
        for node, spare in unused_capacity(instance, solution).items():
            assert 0 <= spare < instance.capacity, (seed, node)


@pytest.mark.parametrize('solver', [solve_fng, solve_frg])
def test_extra_instances_keep_feasibility(solver):
    for seed in range(50):
        instance = random_instance(seed, max_nodes=8, max_flows=8)
        solution = solver(instance).solution
        for node in range(instance.node_count):
            placements = dict(solution.placements)
            placements[node] = placements.get(node, 0) + 1
            bigger = Solution(placements=placements, allocations=solution.allocations)
            assert check_feasible(instance, bigger).feasible, (seed, node)


def test_optimum_lies_between_lower_bound_and_greedy():
    for seed in range(300):
        instance = random_instance(seed, max_nodes=8, max_flows=6)
        optimum = solve_exact(instance).optimum
        greedy = min(total_instances(solve_fng(instance).solution), total_instances(solve_frg(instance).solution))
        assert demand_lower_bound(instance) <= optimum <= greedy, seed


def _best_runtime(solver, instance, repeats=3):
    best = None
    for _ in range(repeats):
        started = time.perf_counter()
        solver(instance)
        elapsed = time.perf_counter() - started
        best = elapsed if best is None else min(best, elapsed)
    return max(best, 1e-3)


@pytest.mark.parametrize('solver', [solve_fng, solve_frg])
def test_runtime_grows_polynomially(solver):
    # doubling n and m should cost about 4x; 16x leaves room for timer noise
    sizes = []
    for n, m in ((40, 200), (80, 400)):
        graph = gen_random_topology(n, 3 * n, 11)
        flows = gen_flows(graph, m, 'long', 'large', 11)
        sizes.append(build_instance(graph, flows, 10))
    small, large = (_best_runtime(solver, instance) for instance in sizes)
    assert large < 16 * small
