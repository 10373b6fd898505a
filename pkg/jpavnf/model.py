"""
Exact-arithmetic data model for JPA-VNF instances and solutions.

An instance is a connected undirected graph, a set of flows with fixed
loop-free paths, and the processing capacity R of one VNF instance. A
solution places x_i instances at node i and allocates r_ij units of
computing resource to flow j at node i. All rates are fractions.Fraction
so that feasibility and ratio checks are exact.
"""

import json
import logging
import numbers
import os
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import FrozenSet, Mapping, Tuple

import networkx as nx

logger = logging.getLogger(__name__)

Rate = Fraction


class InstanceError(ValueError):
    """Base class for invalid problem instances."""


class InvalidGraphError(InstanceError):
    pass


class DisconnectedGraphError(InstanceError):
    pass


class InvalidFlowError(InstanceError):
    pass


class RepeatedNodeError(InvalidFlowError):
    pass


class MissingEdgeError(InvalidFlowError):
    pass


class NonPositiveCapacityError(InstanceError):
    pass


class DuplicateFlowError(InstanceError):
    pass


class AllocationError(ValueError):
    """A solution references something that cannot carry an allocation."""


class InfeasibleSolutionError(ValueError):
    pass


class DensityUndefinedError(ValueError):
    pass


def to_rate(value):
    """Coerce an int, Fraction or 'p/q' string to an exact Rate."""
    if isinstance(value, float):
        raise TypeError(f'Rates must be exact, got float {value!r}')
    return Fraction(value)


def as_integer(value, what):
    """
    Return value as an int, refusing anything that is not integral.

    JSON floats such as 1.9 and booleans are rejected instead of truncated.

    Raises:
        ValueError: value is a bool or not an integral number
    """
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValueError(f'{what} must be an integer, got {value!r}')
    return int(value)


def ceil_ratio(amount, capacity):
    """Smallest integer k with k * capacity >= amount (0 for zero amount)."""
    return int(-((-Fraction(amount)) // Fraction(capacity)))


@dataclass(frozen=True)
class Graph:
    """Connected undirected graph with dense 0-based node indices."""
    labels: Tuple[str, ...]
    edges: FrozenSet[Tuple[int, int]]

    @property
    def node_count(self):
        return len(self.labels)

    @cached_property
    def adjacency(self):
        adj = [set() for _ in self.labels]
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return tuple(frozenset(a) for a in adj)

    def has_edge(self, i, j):
        return (min(i, j), max(i, j)) in self.edges

    def neighbors(self, i):
        """Neighbours of node i in ascending index order."""
        return sorted(self.adjacency[i])

    def index_of(self, label):
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f'Unknown node label: {label}') from None

    def to_networkx(self):
        g = nx.Graph()
        g.add_nodes_from(range(self.node_count))
        g.add_edges_from(self.edges)
        return g


def make_graph(labels, edges):
    """
    Build a Graph, normalising edges to (low, high) index pairs.

    Args:
        labels: node labels (an int is shorthand for 'v1'..'vN')
        edges: iterable of index pairs

    Returns:
        Graph

    Raises:
        InvalidGraphError: empty graph, duplicate labels, self-loops,
            duplicate edges or out-of-range indices
    """
    if isinstance(labels, int):
        labels = [f'v{i + 1}' for i in range(labels)]
    labels = tuple(str(label) for label in labels)
    if not labels:
        raise InvalidGraphError('Graph must have at least one node')
    if len(set(labels)) != len(labels):
        raise InvalidGraphError('Node labels must be unique')

    normalised = set()
    for edge in edges:
        try:
            i, j = (as_integer(v, 'Edge endpoint') for v in edge)
        except (TypeError, ValueError) as e:
            raise InvalidGraphError(f'Malformed edge {edge!r}: {e}') from e
        if not (0 <= i < len(labels) and 0 <= j < len(labels)):
            raise InvalidGraphError(f'Edge ({i}, {j}) references a missing node')
        if i == j:
            raise InvalidGraphError(f'Self-loop at node {labels[i]}')
        key = (min(i, j), max(i, j))
        if key in normalised:
            raise InvalidGraphError(f'Duplicate edge {labels[key[0]]}-{labels[key[1]]}')
        normalised.add(key)
    return Graph(labels=labels, edges=frozenset(normalised))


@dataclass(frozen=True)
class Flow:
    id: str
    rate: Rate
    path: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'id', str(self.id))
        object.__setattr__(self, 'rate', to_rate(self.rate))
        try:
            path = tuple(as_integer(v, 'Path entry') for v in self.path)
        except (TypeError, ValueError) as e:
            raise InvalidFlowError(f'Flow {self.id} has a malformed path {self.path!r}: {e}') from e
        object.__setattr__(self, 'path', path)

    @property
    def source(self):
        return self.path[0]

    @property
    def exit(self):
        return self.path[-1]


@dataclass(frozen=True)
class ProblemInstance:
    """The triple (G, F, R). Build it through build_instance()."""
    graph: Graph
    flows: Tuple[Flow, ...]
    capacity: Rate

    @property
    def node_count(self):
        return self.graph.node_count

    @property
    def flow_count(self):
        return len(self.flows)

    @cached_property
    def flow_by_id(self):
        return {flow.id: flow for flow in self.flows}

    @cached_property
    def total_demand(self):
        return sum((flow.rate for flow in self.flows), Fraction(0))

    def flow(self, flow_id):
        return self.flow_by_id[flow_id]


def build_instance(graph, flows, capacity):
    """
    Validate and assemble a ProblemInstance.

    Args:
        graph: Graph
        flows: iterable of Flow
        capacity: per-instance processing capacity R

    Returns:
        ProblemInstance

    Raises:
        DisconnectedGraphError, RepeatedNodeError, MissingEdgeError,
        InvalidFlowError, NonPositiveCapacityError, DuplicateFlowError
    """
    capacity = to_rate(capacity)
    if capacity <= 0:
        raise NonPositiveCapacityError(f'Capacity R must be positive, got {capacity}')

    if graph.node_count > 1 and not nx.is_connected(graph.to_networkx()):
        raise DisconnectedGraphError('Graph is not connected')

    flows = tuple(flows)
    seen = set()
    for flow in flows:
        if flow.id in seen:
            raise DuplicateFlowError(f'Duplicate flow id: {flow.id}')
        seen.add(flow.id)
        _validate_flow(graph, flow)

    return ProblemInstance(graph=graph, flows=flows, capacity=capacity)


def _validate_flow(graph, flow):
    if flow.rate < 0:
        raise InvalidFlowError(f'Flow {flow.id} has negative rate {flow.rate}')
    if not flow.path:
        raise InvalidFlowError(f'Flow {flow.id} has an empty path')
    for node in flow.path:
        if not 0 <= node < graph.node_count:
            raise InvalidFlowError(f'Flow {flow.id} references missing node {node}')
    if len(set(flow.path)) != len(flow.path):
        raise RepeatedNodeError(f'Flow {flow.id} visits a node twice (paths must be loop free)')
    for a, b in zip(flow.path, flow.path[1:]):
        if not graph.has_edge(a, b):
            raise MissingEdgeError(
                f'Flow {flow.id} uses missing edge {graph.labels[a]}-{graph.labels[b]}')


@dataclass(frozen=True)
class Solution:
    """
    Instance counts x_i and allocations r_ij.

    Zero placements and zero allocations are dropped on construction, so two
    solutions compare equal iff they place and allocate the same amounts.
    """
    placements: Mapping[int, int] = field(default_factory=dict)
    allocations: Mapping[Tuple[str, int], Rate] = field(default_factory=dict)

    def __post_init__(self):
        placements = {}
        for node, count in dict(self.placements).items():
            try:
                node = as_integer(node, 'Placement node')
                count = as_integer(count, f'Instance count at node {node}')
            except ValueError as e:
                raise AllocationError(str(e)) from e
            if count < 0:
                raise AllocationError(f'Negative instance count at node {node}')
            if count:
                placements[node] = count
        allocations = {}
        for (flow_id, node), amount in dict(self.allocations).items():
            amount = to_rate(amount)
            if amount < 0:
                raise AllocationError(f'Negative allocation to flow {flow_id} at node {node}')
            if amount:
                try:
                    key = (str(flow_id), as_integer(node, 'Allocation node'))
                except ValueError as e:
                    raise AllocationError(str(e)) from e
                allocations[key] = allocations.get(key, Fraction(0)) + amount
        object.__setattr__(self, 'placements', dict(sorted(placements.items())))
        object.__setattr__(self, 'allocations', dict(sorted(allocations.items())))

    def count_at(self, node):
        return self.placements.get(node, 0)

    def allocated_to(self, flow_id):
        """Map node -> amount for one flow."""
        return {node: amount for (fid, node), amount in self.allocations.items() if fid == flow_id}


@dataclass(frozen=True)
class FeasibilityReport:
    flow_violations: Tuple[Tuple[str, Rate], ...] = ()
    node_violations: Tuple[Tuple[int, Rate], ...] = ()

    @property
    def feasible(self):
        return not self.flow_violations and not self.node_violations


def passing_sets(instance):
    """L_i: the set of flow ids whose path passes node i, for every node."""
    sets = {i: set() for i in range(instance.node_count)}
    for flow in instance.flows:
        for node in flow.path:
            sets[node].add(flow.id)
    return {i: frozenset(s) for i, s in sets.items()}


def passing_demand(instance):
    """Total rate of the flows passing each node."""
    demand = [Fraction(0)] * instance.node_count
    for flow in instance.flows:
        for node in flow.path:
            demand[node] += flow.rate
    return demand


def _check_structure(instance, solution):
    for node in solution.placements:
        if not 0 <= node < instance.node_count:
            raise AllocationError(f'Placement at missing node {node}')
    for flow_id, node in solution.allocations:
        if flow_id not in instance.flow_by_id:
            raise AllocationError(f'Allocation to unknown flow {flow_id}')
        if node not in instance.flow(flow_id).path:
            raise AllocationError(
                f'Flow {flow_id} is allocated resource at node {node}, which is not on its path')


def node_loads(instance, solution):
    """Sum of r_ij per node, for every node."""
    _check_structure(instance, solution)
    loads = [Fraction(0)] * instance.node_count
    for (_, node), amount in solution.allocations.items():
        loads[node] += amount
    return loads


def unused_capacity(instance, solution):
    """x_i * R - sum_j r_ij for every node that hosts at least one instance."""
    loads = node_loads(instance, solution)
    return {node: count * instance.capacity - loads[node]
            for node, count in solution.placements.items()}


def check_feasible(instance, solution):
    """
    Check the flow constraints (every flow fully processed) and the node
    constraints (no node over its capacity x_i * R).

    Returns:
        FeasibilityReport listing each flow's shortfall and each node's excess

    Raises:
        AllocationError: an allocation sits on a node off the flow's path
    """
    loads = node_loads(instance, solution)
    received = {flow.id: Fraction(0) for flow in instance.flows}
    for (flow_id, _), amount in solution.allocations.items():
        received[flow_id] += amount

    flow_violations = tuple((flow.id, flow.rate - received[flow.id])
                            for flow in instance.flows if received[flow.id] < flow.rate)
    node_violations = tuple((node, loads[node] - solution.count_at(node) * instance.capacity)
                            for node in range(instance.node_count)
                            if loads[node] > solution.count_at(node) * instance.capacity)
    return FeasibilityReport(flow_violations=flow_violations, node_violations=node_violations)


def total_instances(solution):
    return sum(solution.placements.values())


def hosting_nodes(solution):
    return sum(1 for count in solution.placements.values() if count >= 1)


def density(solution):
    """
    Average density A = (total instances) / (hosting nodes).

    Raises:
        DensityUndefinedError: the solution places no instance
    """
    hosts = hosting_nodes(solution)
    if hosts == 0:
        raise DensityUndefinedError('Density is undefined for a solution without instances')
    return Fraction(total_instances(solution), hosts)


def density_ratio_bound(a):
    """Approximation ratio bound A/(A-1) for density A; None when A == 1."""
    a = to_rate(a)
    if a < 1:
        raise ValueError(f'Density must be at least 1, got {a}')
    if a == 1:
        return None
    return a / (a - 1)


def demand_lower_bound(instance):
    """ceil(D / R), a lower bound on the instance count of any feasible solution."""
    return ceil_ratio(instance.total_demand, instance.capacity)


def ratio_to_lower_bound(instance, solution):
    """total / ceil(D/R); None when the lower bound is 0."""
    bound = demand_lower_bound(instance)
    if bound == 0:
        return None
    return Fraction(total_instances(solution), bound)


# JSON boundary

def parse_rate(value):
    """Accept {'num', 'den'}, 'p/q' strings and integers."""
    if isinstance(value, Mapping):
        try:
            return Fraction(as_integer(value['num'], 'Rate numerator'),
                            as_integer(value.get('den', 1), 'Rate denominator'))
        except (KeyError, ValueError, ZeroDivisionError) as e:
            raise ValueError(f'Malformed rate {value!r}') from e
    if isinstance(value, bool):
        raise ValueError(f'Malformed rate {value!r}')
    try:
        return to_rate(value)
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise ValueError(f'Malformed rate {value!r}') from e


def rate_to_dict(rate):
    rate = Fraction(rate)
    return {'num': rate.numerator, 'den': rate.denominator}


def instance_to_dict(instance, root=None):
    data = {
        'capacity': rate_to_dict(instance.capacity),
        'nodes': list(instance.graph.labels),
        'edges': [list(edge) for edge in sorted(instance.graph.edges)],
        'flows': [{'id': flow.id, 'rate': rate_to_dict(flow.rate), 'path': list(flow.path)}
                  for flow in instance.flows],
    }
    if root is not None:
        data['root'] = root
    return data


def instance_from_dict(data):
    """
    Build a validated instance from its JSON form.

    Raises:
        InstanceError: a field is missing, has the wrong type or fails validation
    """
    if not isinstance(data, Mapping):
        raise InstanceError(f'Instance must be a JSON object, got {type(data).__name__}')
    try:
        graph = make_graph(data['nodes'], data.get('edges', []))
        flows = [Flow(id=f['id'], rate=parse_rate(f['rate']), path=f['path'])
                 for f in data.get('flows', [])]
        capacity = parse_rate(data['capacity'])
    except KeyError as e:
        raise InstanceError(f'Instance is missing field {e}') from e
    except (TypeError, AttributeError) as e:
        raise InstanceError(f'Malformed instance: {e}') from e
    return build_instance(graph, flows, capacity)


def solution_to_dict(solution):
    return {
        'placements': {str(node): count for node, count in solution.placements.items()},
        'allocations': [{'flow': flow_id, 'node': node, 'amount': rate_to_dict(amount)}
                        for (flow_id, node), amount in solution.allocations.items()],
    }


def solution_from_dict(data):
    if not isinstance(data, Mapping):
        raise AllocationError(f'Solution must be a JSON object, got {type(data).__name__}')
    try:
        # JSON object keys are strings; counts must already be integers
        placements = {int(node): as_integer(count, f'Instance count at node {node}')
                      for node, count in data.get('placements', {}).items()}
        allocations = {}
        for entry in data.get('allocations', []):
            key = (str(entry['flow']), as_integer(entry['node'], 'Allocation node'))
            allocations[key] = allocations.get(key, Fraction(0)) + parse_rate(entry['amount'])
    except (KeyError, TypeError, AttributeError, ValueError) as e:
        raise AllocationError(f'Malformed solution: {e}') from e
    return Solution(placements=placements, allocations=allocations)


def read_json(path):
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ValueError(f'{path}: invalid JSON ({e})') from e


def atomic_write_text(path, text):
    """Write text to path through a temporary file and an atomic rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix='.tmp-', suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def write_json(path, data):
    atomic_write_text(path, json.dumps(data, indent=2) + "\n")


def load_instance(path):
    return instance_from_dict(read_json(path))


def save_instance(path, instance, root=None):
    write_json(path, instance_to_dict(instance, root=root))


def load_solution(path):
    return solution_from_dict(read_json(path))


def save_solution(path, solution):
    write_json(path, solution_to_dict(solution))
