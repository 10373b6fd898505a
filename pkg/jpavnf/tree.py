"""
Greedy For Tree (GFT): the optimal JPA-VNF solver for rooted trees whose
flows all travel upstream, plus breaking-point diagnostics.

Nodes are addressed as v_{p,q}: p is the level (root = 1) and q the
position within the level, left to right in input node order. GFT walks the
levels bottom-up, places ceil(d_{p,q}/R) instances wherever unprocessed
flows leave the network, and pours the spare capacity into the waiting list
of unprocessed flows still passing the node.
"""

import enum
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import FrozenSet, Mapping, Tuple

import networkx as nx

from .model import (
    Flow,
    InfeasibleSolutionError,
    InstanceError,
    ProblemInstance,
    Solution,
    build_instance,
    ceil_ratio,
    check_feasible,
    rate_to_dict,
    total_instances,
    unused_capacity,
)

logger = logging.getLogger(__name__)


class NotATreeError(InstanceError):
    pass


class UpstreamViolationError(InstanceError):
    def __init__(self, flow_id, message=None):
        self.flow_id = flow_id
        super().__init__(message or f'Flow {flow_id} is neither upstream nor downstream')


class ExitOrder(enum.Enum):
    """How GFT orders its waiting lists by the level p of each flow's exit node."""
    DEEPEST_FIRST = 'deepest-first'
    SHALLOWEST_FIRST = 'shallowest-first'


@dataclass(frozen=True)
class TreeInstance:
    instance: ProblemInstance
    root: int
    level_of: Mapping[int, int]
    order_within_level: Mapping[int, int]
    parent: Mapping[int, int]

    @property
    def depth(self):
        return max(self.level_of.values())

    def levels(self):
        """Nodes grouped by level, each level ordered by q."""
        grouped = {}
        for node, level in self.level_of.items():
            grouped.setdefault(level, []).append(node)
        return {level: sorted(nodes, key=self.order_within_level.__getitem__)
                for level, nodes in sorted(grouped.items())}

    def node_at(self, p, q):
        for node, level in self.level_of.items():
            if level == p and self.order_within_level[node] == q:
                return node
        raise KeyError(f'No node v_{{{p},{q}}}')

    def name(self, node):
        return f'v_{{{self.level_of[node]},{self.order_within_level[node]}}}'

    @cached_property
    def oriented(self):
        """The tree as a networkx DiGraph with edges pointing away from the root."""
        return nx.bfs_tree(self.instance.graph.to_networkx(), self.root)

    def subtree(self, node):
        """Nodes of the subtree rooted at node, node included."""
        return frozenset(nx.descendants(self.oriented, node)) | {node}


@dataclass(frozen=True)
class GftStepEvent:
    node: int
    leaving_flows: Tuple[str, ...]
    leaving_demand: Fraction
    instances_placed: int
    leaving_allocations: Tuple[Tuple[str, Fraction], ...]
    waiting_list: Tuple[Tuple[str, Fraction], ...]
    waiting_allocations: Tuple[Tuple[str, Fraction], ...]

    @property
    def allocations(self):
        return self.leaving_allocations + self.waiting_allocations


@dataclass(frozen=True)
class BreakingPointReport:
    breaking_points: FrozenSet[int]
    conservative: bool
    external_flow_map: Mapping[int, FrozenSet[str]]


def _bfs_levels(g, root):
    # root is level 1
    level_of = {node: hops + 1 for node, hops in nx.single_source_shortest_path_length(g, root).items()}
    parent = dict(nx.bfs_predecessors(g, root))
    return level_of, parent


def _orient(flow, parent):
    """Return the flow with an upward path, reversing downstream flows."""
    pairs = list(zip(flow.path, flow.path[1:]))
    if all(parent.get(a) == b for a, b in pairs):
        return flow
    if all(parent.get(b) == a for a, b in pairs):
        return Flow(id=flow.id, rate=flow.rate, path=tuple(reversed(flow.path)))
    raise UpstreamViolationError(flow.id)


def validate_tree_instance(instance, root):
    """
    Check that instance is a tree rooted at root with upstream flows.

    Downstream flows are accepted and stored reversed, since processing only
    depends on which nodes a path visits.

    Args:
        instance: ProblemInstance
        root: index of the root node

    Returns:
        TreeInstance

    Raises:
        NotATreeError: the graph is not a tree or root is out of range
        UpstreamViolationError: a path moves sideways (up then down)
    """
    graph = instance.graph
    if not 0 <= root < graph.node_count:
        raise NotATreeError(f'Root {root} is not a node of the graph')
    g = graph.to_networkx()
    if not nx.is_tree(g):
        raise NotATreeError(
            f'Graph with {graph.node_count} nodes and {len(graph.edges)} edges is not a tree')

    level_of, parent = _bfs_levels(g, root)
    order_within_level = {}
    counters = {}
    for node in range(graph.node_count):
        level = level_of[node]
        counters[level] = counters.get(level, 0) + 1
        order_within_level[node] = counters[level]

    flows = [_orient(flow, parent) for flow in instance.flows]
    oriented = build_instance(graph, flows, instance.capacity)
    return TreeInstance(instance=oriented, root=root, level_of=level_of,
                        order_within_level=order_within_level, parent=parent)


def _waiting_key(exit_order, tree, flow):
    level = tree.level_of[flow.exit]
    if exit_order is ExitOrder.DEEPEST_FIRST:
        return (-level, flow.id)
    return (level, flow.id)


def solve_gft(tree, exit_order=ExitOrder.DEEPEST_FIRST):
    """
    Run GFT on a validated tree instance.

    Args:
        tree: TreeInstance
        exit_order: ExitOrder used to sort each waiting list

    Returns:
        (Solution, list of GftStepEvent) with one event per node that
        received instances
    """
    instance = tree.instance
    capacity = instance.capacity
    # unprocessed rate per flow; zero-rate flows are never waiting
    remaining = {flow.id: flow.rate for flow in instance.flows if flow.rate > 0}

    leaving = {node: [] for node in range(instance.node_count)}
    through = {node: [] for node in range(instance.node_count)}
    for flow in instance.flows:
        leaving[flow.exit].append(flow)
        for node in flow.path[:-1]:
            through[node].append(flow)
    # waiting lists are fixed per node; only their remaining rates change
    for node in through:
        through[node].sort(key=lambda flow: _waiting_key(exit_order, tree, flow))

    placements = {}
    allocations = {}
    steps = []
    # deepest level first, left to right within a level
    for _, nodes in sorted(tree.levels().items(), reverse=True):
        for node in nodes:
            exiting = [flow for flow in leaving[node] if remaining.get(flow.id)]
            if not exiting:
                # nothing leaves here unprocessed, so no instance is placed
                continue
            demand = sum((remaining[flow.id] for flow in exiting), Fraction(0))
            count = ceil_ratio(demand, capacity)
            placements[node] = count

            leaving_allocations = []
            for flow in exiting:
                leaving_allocations.append((flow.id, remaining[flow.id]))
                allocations[(flow.id, node)] = remaining.pop(flow.id)

            waiting = [(flow.id, remaining[flow.id]) for flow in through[node] if flow.id in remaining]
            # spare capacity of the new instances goes to flows still passing upward
            spare = count * capacity - demand
            waiting_allocations = []
            for flow_id, amount in waiting:
                if spare <= 0:
                    break
                poured = min(spare, amount)
                spare -= poured
                waiting_allocations.append((flow_id, poured))
                allocations[(flow_id, node)] = poured
                if poured == amount:
                    del remaining[flow_id]
                else:
                    remaining[flow_id] = amount - poured

            steps.append(GftStepEvent(
                node=node,
                leaving_flows=tuple(flow.id for flow in exiting),
                leaving_demand=demand,
                instances_placed=count,
                leaving_allocations=tuple(leaving_allocations),
                waiting_list=tuple(waiting),
                waiting_allocations=tuple(waiting_allocations),
            ))
            logger.debug('GFT at %s: demand %s, %d instances, %d waiting flows served',
                         tree.name(node), demand, count, len(waiting_allocations))

    solution = Solution(placements=placements, allocations=allocations)
    logger.info('GFT placed %d instances in %d steps', total_instances(solution), len(steps))
    return solution, steps


def external_flows(tree, node):
    """Flows whose path has exactly one end inside the subtree rooted at node."""
    inside = tree.subtree(node)
    return frozenset(flow.id for flow in tree.instance.flows
                     if (flow.source in inside) + (flow.exit in inside) == 1)


def find_breaking_points(instance, solution, root=None):
    """
    Report the breaking points of a feasible solution.

    A breaking point hosts an instance whose capacity is not fully used; the
    solution is conservative when every breaking point wastes less than one
    instance. External flows are reported per breaking point when the graph
    is a tree (rooted at root, default node 0), otherwise the map is empty.

    Raises:
        InfeasibleSolutionError: the solution violates a constraint
    """
    report = check_feasible(instance, solution)
    if not report.feasible:
        raise InfeasibleSolutionError(
            f'Solution is infeasible: {len(report.flow_violations)} flow and '
            f'{len(report.node_violations)} node violations')

    unused = unused_capacity(instance, solution)
    breaking = frozenset(node for node, spare in unused.items() if spare > 0)
    conservative = all(unused[node] < instance.capacity for node in breaking)

    external = {}
    g = instance.graph.to_networkx()
    if nx.is_tree(g):
        level_of, parent = _bfs_levels(g, 0 if root is None else root)
        tree = TreeInstance(instance=instance, root=0 if root is None else root, level_of=level_of,
                            order_within_level={}, parent=parent)
        external = {node: external_flows(tree, node) for node in sorted(breaking)}
    return BreakingPointReport(breaking_points=breaking, conservative=conservative,
                               external_flow_map=external)


def gft_trace_to_dicts(tree, steps):
    labels = tree.instance.graph.labels
    return [{
        'step': k,
        'node': step.node,
        'label': labels[step.node],
        'position': [tree.level_of[step.node], tree.order_within_level[step.node]],
        'leaving_flows': list(step.leaving_flows),
        'waiting_list': [{'flow': flow_id, 'rate': rate_to_dict(amount)}
                         for flow_id, amount in step.leaving_allocations + step.waiting_list],
        'instances': step.instances_placed,
        'allocations': [{'flow': flow_id, 'amount': rate_to_dict(amount)}
                        for flow_id, amount in step.allocations],
    } for k, step in enumerate(steps, start=1)]
