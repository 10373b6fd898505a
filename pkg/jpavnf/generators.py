"""
Seeded generators for the experiment families: dense random topologies,
random trees, flows with short/medium/long paths and small/large rates,
and upstream flows on trees. Every generator is a pure function of its
parameters and seed.
"""

import enum
import logging
import os
from fractions import Fraction

import networkx as nx
import numpy as np

from .model import Flow, make_graph, read_json, to_rate

logger = logging.getLogger(__name__)


class GeneratorError(ValueError):
    pass


class PathClass(enum.Enum):
    """Path length in hops, uniform in [1, n // divisor]."""
    SHORT = 'short'
    MEDIUM = 'medium'
    LONG = 'long'

    @property
    def divisor(self):
        return {'short': 10, 'medium': 4, 'long': 2}[self.value]

    def hop_range(self, n):
        return 1, max(1, n // self.divisor)


class RateClass(enum.Enum):
    """Small rates are uniform in [0, R/m], large rates in [0, 10R]."""
    SMALL = 'small'
    LARGE = 'large'

    def bounds(self, capacity, m):
        capacity = to_rate(capacity)
        if self is RateClass.SMALL:
            return Fraction(0), capacity / max(m, 1)
        return Fraction(0), 10 * capacity

    def denominator(self, m):
        return 1000 * max(m, 1) if self is RateClass.SMALL else 1000

    def sample(self, rng, capacity, m):
        """Draw a rate quantised to a fixed denominator, never above the upper bound."""
        _, high = self.bounds(capacity, m)
        den = self.denominator(m)
        top = int(high * den)  # floor for non-negative values
        return Fraction(int(rng.integers(0, top + 1)), den)


def _rng(seed):
    return np.random.default_rng(int(seed))


def gen_random_topology(n, edge_count, seed):
    """
    Connected random graph: a random spanning tree, then extra edges drawn
    uniformly from the remaining node pairs.

    Raises:
        GeneratorError: edge_count outside [n - 1, n(n - 1)/2]
    """
    if n < 1:
        raise GeneratorError('Topology needs at least one node')
    max_edges = n * (n - 1) // 2
    if not n - 1 <= edge_count <= max_edges:
        raise GeneratorError(f'edge_count must be in [{n - 1}, {max_edges}] for {n} nodes, got {edge_count}')

    rng = _rng(seed)
    g = nx.empty_graph(n)
    order = rng.permutation(n)
    for k in range(1, n):
        anchor = order[int(rng.integers(0, k))]
        g.add_edge(int(order[k]), int(anchor))

    extra = edge_count - (n - 1)
    if extra:
        candidates = [pair for pair in ((i, j) for i in range(n) for j in range(i + 1, n))
                      if not g.has_edge(*pair)]
        for index in sorted(rng.choice(len(candidates), size=extra, replace=False)):
            g.add_edge(*candidates[int(index)])

    logger.debug('Random topology: %d nodes, %d edges (seed %s)', n, g.number_of_edges(), seed)
    return make_graph(n, g.edges())


def gen_tree(n, max_children, seed):
    """
    Random rooted tree on n nodes with root 0; every node gets at most
    max_children children and a parent with a smaller index.

    Returns:
        (Graph, root)
    """
    if n < 1:
        raise GeneratorError('Tree needs at least one node')
    if max_children < 1 and n > 1:
        raise GeneratorError('max_children must be positive')

    rng = _rng(seed)
    children = [0] * n
    edges = []
    for node in range(1, n):
        open_slots = [v for v in range(node) if children[v] < max_children]
        parent = open_slots[int(rng.integers(0, len(open_slots)))]
        children[parent] += 1
        edges.append((parent, node))
    return make_graph(n, edges), 0


def gen_flows(graph, m, path_class, rate_class, seed, capacity=10):
    """
    Flows with random paths and rates.

    Each flow draws a hop count from the path class range, starts at a
    uniform node and follows a self-avoiding random walk, stopping early if
    the walk dead-ends. Rates are drawn from the rate class range.
    """
    path_class = PathClass(path_class)
    rate_class = RateClass(rate_class)
    rng = _rng(seed)
    low, high = path_class.hop_range(graph.node_count)

    flows = []
    for k in range(1, m + 1):
        hops = int(rng.integers(low, high + 1))
        current = int(rng.integers(0, graph.node_count))
        path = [current]
        visited = {current}
        for _ in range(hops):
            options = [v for v in graph.neighbors(current) if v not in visited]
            if not options:
                break
            current = options[int(rng.integers(0, len(options)))]
            path.append(current)
            visited.add(current)
        rate = rate_class.sample(rng, capacity, m)
        flows.append(Flow(id=f'f{k}', rate=rate, path=path))
    return flows


def gen_upstream_tree_flows(tree, m, rate_class, seed, capacity=None):
    """Flows from a uniform start node up to a uniform ancestor (possibly itself)."""
    rate_class = RateClass(rate_class)
    capacity = tree.instance.capacity if capacity is None else capacity
    rng = _rng(seed)
    n = tree.instance.node_count

    flows = []
    for k in range(1, m + 1):
        start = int(rng.integers(0, n))
        chain = [start]
        while chain[-1] in tree.parent:
            chain.append(tree.parent[chain[-1]])
        length = int(rng.integers(1, len(chain) + 1))
        rate = rate_class.sample(rng, capacity, m)
        flows.append(Flow(id=f'f{k}', rate=rate, path=chain[:length]))
    return flows


def _node_order(node):
    # integer ids keep their numeric order, anything else sorts by name
    if isinstance(node, int):
        return (0, node, '')
    return (1, 0, str(node))


def load_topology(path):
    """
    Load a topology from a Topology Zoo GML/GraphML file or an instance JSON.

    Multi-edges and self-loops are dropped and only the largest connected
    component is kept. Node labels come from the 'label' attribute when
    present and unique.
    """
    ext = os.path.splitext(path)[1].lower()
    try:
        if ext == '.gml':
            raw = nx.read_gml(path, label=None)
        elif ext in ('.graphml', '.xml'):
            raw = nx.read_graphml(path)
        elif ext == '.json':
            data = read_json(path)
            raw = nx.Graph()
            raw.add_nodes_from((i, {'label': label}) for i, label in enumerate(data['nodes']))
            raw.add_edges_from(tuple(edge) for edge in data.get('edges', []))
        else:
            raise GeneratorError(f'{path}: unsupported topology format {ext!r}')
    except (nx.NetworkXError, KeyError, TypeError, AttributeError) as e:
        raise GeneratorError(f'{path}: cannot read topology ({e})') from e

    g = nx.Graph(raw)
    g.remove_edges_from(list(nx.selfloop_edges(g)))
    if g.number_of_nodes() == 0:
        raise GeneratorError(f'{path}: topology has no nodes')
    component = max(nx.connected_components(g), key=len)
    if len(component) < g.number_of_nodes():
        logger.warning('%s: keeping largest component (%d of %d nodes)', path,
                       len(component), g.number_of_nodes())

    nodes = sorted(component, key=_node_order)
    index = {node: i for i, node in enumerate(nodes)}
    labels = [str(g.nodes[node].get('label', node)) for node in nodes]
    if len(set(labels)) != len(labels):
        labels = [f'{label}#{node}' for label, node in zip(labels, nodes)]
    edges = [(index[a], index[b]) for a, b in g.subgraph(component).edges()]
    return make_graph(labels, edges)
