"""Shared fixtures and brute-force oracles for the test suite."""

import itertools
from fractions import Fraction

import numpy as np
import pytest

from jpavnf.fixtures import load_fixture_instance, load_fixture_solution, load_fixture_tree
from jpavnf.generators import gen_random_topology, gen_tree
from jpavnf.model import Flow, build_instance, ceil_ratio, demand_lower_bound, passing_demand
from jpavnf.tree import validate_tree_instance


@pytest.fixture
def six_node():
    return load_fixture_instance('six_node.json')


@pytest.fixture
def six_node_suboptimal():
    return load_fixture_solution('six_node_suboptimal.json')


@pytest.fixture
def six_node_optimal():
    return load_fixture_solution('six_node_optimal.json')


@pytest.fixture
def frg_wins():
    return load_fixture_instance('frg_wins.json')


@pytest.fixture
def fng_wins():
    return load_fixture_instance('fng_wins.json')


@pytest.fixture
def upstream_tree():
    return load_fixture_tree('upstream_tree.json')


def random_walk_path(rng, graph, hops):
    current = int(rng.integers(0, graph.node_count))
    path = [current]
    for _ in range(hops):
        options = [v for v in graph.neighbors(current) if v not in path]
        if not options:
            break
        current = options[int(rng.integers(0, len(options)))]
        path.append(current)
    return path


def random_instance(seed, max_nodes, max_flows, capacity=Fraction(10), rate_steps=4, max_multiple=2):
    """
    Small random instance: connected graph, random-walk paths, rates that
    are multiples of capacity / rate_steps in (0, max_multiple * capacity].
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, max_nodes + 1))
    max_edges = n * (n - 1) // 2
    edge_count = int(rng.integers(n - 1, max_edges + 1)) if n > 1 else 0
    graph = gen_random_topology(n, edge_count, seed)
    m = int(rng.integers(1, max_flows + 1))
    unit = Fraction(capacity) / rate_steps
    flows = []
    for k in range(1, m + 1):
        path = random_walk_path(rng, graph, int(rng.integers(0, n)))
        rate = unit * int(rng.integers(1, max_multiple * rate_steps + 1))
        flows.append(Flow(id=f'f{k}', rate=rate, path=path))
    return build_instance(graph, flows, capacity)


def random_tree_instance(seed, max_nodes, max_flows, capacity=Fraction(10), rate_steps=8, max_multiple=3):
    """Random upstream tree instance with rates multiples of capacity / rate_steps."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, max_nodes + 1))
    graph, root = gen_tree(n, int(rng.integers(1, 4)), seed)
    bare = validate_tree_instance(build_instance(graph, [], capacity), root)
    unit = Fraction(capacity) / rate_steps
    flows = []
    for k in range(1, int(rng.integers(1, max_flows + 1)) + 1):
        chain = [int(rng.integers(0, n))]
        while chain[-1] in bare.parent:
            chain.append(bare.parent[chain[-1]])
        path = chain[:int(rng.integers(1, len(chain) + 1))]
        rate = unit * int(rng.integers(1, max_multiple * rate_steps + 1))
        flows.append(Flow(id=f'f{k}', rate=rate, path=path))
    return validate_tree_instance(build_instance(graph, flows, capacity), root)


def hall_feasible(instance, x):
    """
    Placement x admits an allocation iff every subset S of flows fits in
    the capacity of the nodes S can reach.
    """
    flows = [flow for flow in instance.flows if flow.rate > 0]
    for size in range(1, len(flows) + 1):
        for subset in itertools.combinations(flows, size):
            reach = set().union(*(set(flow.path) for flow in subset))
            demand = sum((flow.rate for flow in subset), Fraction(0))
            if demand > instance.capacity * sum(x[node] for node in reach):
                return False
    return True


def _bounded_compositions(total, bounds):
    if not bounds:
        if total == 0:
            yield ()
        return
    for first in range(min(total, bounds[0]), -1, -1):
        for rest in _bounded_compositions(total - first, bounds[1:]):
            yield (first,) + rest


def brute_force_optimum(instance):
    """Smallest total over all bounded placement vectors that pass the Hall check."""
    bounds = [ceil_ratio(d, instance.capacity) for d in passing_demand(instance)]
    for total in range(demand_lower_bound(instance), sum(bounds) + 1):
        for x in _bounded_compositions(total, bounds):
            if hall_feasible(instance, x):
                return total
    raise AssertionError('upper-bound placement must be feasible')


def brute_force_min_cover(sc):
    n = len(sc.subsets)
    for size in range(1, n + 1):
        for choice in itertools.combinations(range(n), size):
            if frozenset().union(*(sc.subsets[i] for i in choice)) == sc.universe:
                return size
    raise AssertionError('instance has no cover')
