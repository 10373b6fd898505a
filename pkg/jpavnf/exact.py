"""
Exact JPA-VNF solver for small instances.

For a fixed placement vector x, deciding whether some allocation r_ij
satisfies every flow and node constraint is a bipartite max-flow problem:

    source -> flow j          capacity d_j
    flow j -> node i          unbounded, iff node i is on the path of flow j
    node i -> sink            capacity x_i * R

x is feasible iff the max-flow saturates every source edge. Rates are
scaled by the LCM of their denominators so the network is integral.
Branch and bound then searches placement vectors depth-first.
"""

import logging
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

import networkx as nx

from .greedy import solve_fng, solve_frg
from .model import (
    InfeasibleSolutionError,
    Solution,
    as_integer,
    ceil_ratio,
    demand_lower_bound,
    passing_demand,
    total_instances,
)

logger = logging.getLogger(__name__)

SOURCE = 'source'
SINK = 'sink'

PlacementVector = Tuple[int, ...]


@dataclass(frozen=True)
class ExactCap:
    """Largest instance the exact solver is run on by the harness and CLI."""
    max_nodes: int = 15
    max_flows: int = 12

    def admits(self, instance):
        return instance.node_count <= self.max_nodes and instance.flow_count <= self.max_flows


def exact_cap_from_env(environ=None):
    """
    Read JPAVNF_EXACT_CAP ('N' or 'N,M'); malformed values keep the default.
    """
    environ = os.environ if environ is None else environ
    raw = environ.get('JPAVNF_EXACT_CAP')
    default = ExactCap()
    if not raw:
        return default
    try:
        parts = [int(part) for part in raw.split(',')]
        if len(parts) == 1:
            cap = ExactCap(max_nodes=parts[0], max_flows=default.max_flows)
        elif len(parts) == 2:
            cap = ExactCap(max_nodes=parts[0], max_flows=parts[1])
        else:
            raise ValueError(raw)
        if cap.max_nodes < 1 or cap.max_flows < 0:
            raise ValueError(raw)
    except ValueError:
        logger.warning('Ignoring malformed JPAVNF_EXACT_CAP=%r, using %s', raw, default)
        return default
    return cap


@dataclass(frozen=True)
class ExactResult:
    solution: Solution
    optimum: int
    nodes_explored: int
    proven_optimal: bool
    lower_bound: int


def placement_upper_bounds(instance):
    """ceil(passing demand / R) per node: more instances at a node are never useful."""
    return [ceil_ratio(demand, instance.capacity) for demand in passing_demand(instance)]


def _check_vector(instance, x):
    x = tuple(as_integer(v, 'Placement vector entry') for v in x)
    if len(x) != instance.node_count:
        raise ValueError(f'Placement vector has {len(x)} entries for {instance.node_count} nodes')
    if any(v < 0 for v in x):
        raise ValueError('Placement vector entries must be non-negative')
    return x


class _FlowNetwork:
    """Reusable integral flow network for one instance."""

    def __init__(self, instance):
        self.instance = instance
        flows = [flow for flow in instance.flows if flow.rate > 0]
        self.scale = math.lcm(instance.capacity.denominator, *(flow.rate.denominator for flow in flows))
        self.unit = int(instance.capacity * self.scale)
        self.demand = sum(int(flow.rate * self.scale) for flow in flows)

        self.graph = nx.DiGraph()
        self.graph.add_node(SOURCE)
        self.graph.add_node(SINK)
        self.nodes = sorted({node for flow in flows for node in flow.path})
        for node in self.nodes:
            self.graph.add_edge(('node', node), SINK, capacity=0)
        for flow in flows:
            self.graph.add_edge(SOURCE, ('flow', flow.id), capacity=int(flow.rate * self.scale))
            for node in flow.path:
                # no capacity attribute: networkx treats the edge as unbounded
                self.graph.add_edge(('flow', flow.id), ('node', node))

    def _set_counts(self, x):
        for node in self.nodes:
            self.graph[('node', node)][SINK]['capacity'] = x[node] * self.unit

    def served(self, x):
        if self.demand == 0:
            return 0
        self._set_counts(x)
        return nx.maximum_flow_value(self.graph, SOURCE, SINK)

    def allocation(self, x):
        self._set_counts(x)
        value, flow_dict = nx.maximum_flow(self.graph, SOURCE, SINK)
        allocations = {}
        for flow in self.instance.flows:
            if flow.rate <= 0:
                continue
            for (_, node), amount in flow_dict[('flow', flow.id)].items():
                if amount:
                    allocations[(flow.id, node)] = Fraction(amount, self.scale)
        return value, allocations


def allocation_feasible(instance, x):
    """True iff some allocation processes every flow under placement x."""
    x = _check_vector(instance, x)
    network = _FlowNetwork(instance)
    return network.served(x) == network.demand


def extract_allocation(instance, x):
    """
    Build a feasible Solution with placements x from a max-flow witness.

    Raises:
        InfeasibleSolutionError: no allocation processes every flow under x
    """
    x = _check_vector(instance, x)
    network = _FlowNetwork(instance)
    if network.demand == 0:
        return Solution(placements=dict(enumerate(x)))
    value, allocations = network.allocation(x)
    if value != network.demand:
        raise InfeasibleSolutionError(
            f'Placement {list(x)} serves {Fraction(value, network.scale)} of '
            f'{Fraction(network.demand, network.scale)} demand')
    return Solution(placements=dict(enumerate(x)), allocations=allocations)


def _greedy_incumbents(instance):
    for result in (solve_fng(instance), solve_frg(instance)):
        yield tuple(result.solution.count_at(node) for node in range(instance.node_count))


def solve_exact(instance, node_budget=None, warm_start=True):
    """
    Minimise the total instance count by branch and bound.

    Nodes are branched in descending order of passing demand, trying larger
    counts first. A branch is pruned when its partial count plus
    ceil(residual demand / R) reaches the incumbent, where the residual is
    the demand the fixed nodes cannot serve, or when even the upper bounds
    on the free nodes cannot serve every flow.

    Args:
        instance: ProblemInstance, intended for about 15 nodes and 12 flows
        node_budget: stop after exploring this many search nodes
        warm_start: start from the better of the FNG and FRG solutions

    Returns:
        ExactResult; proven_optimal is False only when node_budget ran out
    """
    n = instance.node_count
    lower = demand_lower_bound(instance)
    bounds = placement_upper_bounds(instance)
    network = _FlowNetwork(instance)
    if network.demand == 0:
        return ExactResult(solution=Solution(), optimum=0, nodes_explored=0,
                           proven_optimal=True, lower_bound=0)

    # the per-node upper bounds always admit an allocation
    incumbent = tuple(bounds)
    best = sum(incumbent)
    if warm_start:
        for candidate in _greedy_incumbents(instance):
            if sum(candidate) < best:
                incumbent, best = candidate, sum(candidate)

    demand = passing_demand(instance)
    order = sorted((node for node in range(n) if bounds[node] > 0), key=lambda node: (-demand[node], node))
    counts = [0] * n
    explored = 0
    exhausted = False

    def search(depth, partial):
        nonlocal incumbent, best, explored, exhausted
        if node_budget is not None and explored >= node_budget:
            exhausted = True
            return
        explored += 1

        # demand the fixed counts cannot serve, in scaled integer units
        residual = network.demand - network.served(counts)
        if residual == 0:
            if partial < best:
                incumbent, best = tuple(counts), partial
                logger.debug('New incumbent %d after %d search nodes', best, explored)
            return
        # leaf, or even a perfect packing of the residual cannot beat the incumbent
        if depth == len(order) or partial + -(-residual // network.unit) >= best:
            return

        # prune when the free nodes at their upper bounds still leave a flow unserved
        free = order[depth:]
        for node in free:
            counts[node] = bounds[node]
        reachable = network.served(counts) == network.demand
        for node in free:
            counts[node] = 0
        if not reachable:
            return

        node = order[depth]
        # counts high to low
        for value in range(bounds[node], -1, -1):
            if partial + value >= best:
                continue
            counts[node] = value
            search(depth + 1, partial + value)
            counts[node] = 0
            if exhausted:
                return

    # nothing to prove when the incumbent already meets ceil(D/R)
    if best > lower:
        search(0, 0)
    if exhausted:
        logger.warning('Exact search stopped after %d nodes; best known total %d is not proven optimal',
                       explored, best)

    solution = extract_allocation(instance, incumbent)
    logger.info('Exact optimum %d (lower bound %d, %d search nodes)', total_instances(solution), lower, explored)
    return ExactResult(solution=solution, optimum=best, nodes_explored=explored,
                       proven_optimal=not exhausted, lower_bound=lower)
