"""
Set cover and JPA-VNF: the hardness construction, the classic greedy cover
and the small-rate transformation used to compare greedy solvers with set
cover.
"""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import FrozenSet, Mapping, Tuple

from .model import Flow, as_integer, build_instance, make_graph, read_json, to_rate

logger = logging.getLogger(__name__)


class SetCoverError(ValueError):
    pass


@dataclass(frozen=True)
class SetCoverInstance:
    """Universe {1..universe_size} and subsets u_1..u_n (stored 0-based)."""
    universe_size: int
    subsets: Tuple[FrozenSet[int], ...]

    @property
    def universe(self):
        return frozenset(range(1, self.universe_size + 1))


def make_set_cover(universe_size, subsets):
    """
    Validate a set-cover instance.

    Raises:
        SetCoverError: empty universe, out-of-range elements, or an element
            that no subset covers
    """
    try:
        universe_size = as_integer(universe_size, 'Universe size')
        subsets = tuple(frozenset(as_integer(e, 'Set element') for e in subset) for subset in subsets)
    except (TypeError, ValueError) as e:
        raise SetCoverError(f'Malformed set cover: {e}') from e
    if universe_size < 1:
        raise SetCoverError('Universe must contain at least one element')
    for k, subset in enumerate(subsets, start=1):
        stray = sorted(e for e in subset if not 1 <= e <= universe_size)
        if stray:
            raise SetCoverError(f'Subset u{k} has elements outside the universe: {stray}')
    covered = frozenset().union(*subsets)
    missing = sorted(set(range(1, universe_size + 1)) - covered)
    if missing:
        raise SetCoverError(f'Elements covered by no subset: {missing}')
    return SetCoverInstance(universe_size=universe_size, subsets=subsets)


def set_cover_from_dict(data):
    if not isinstance(data, Mapping):
        raise SetCoverError(f'Set cover must be a JSON object, got {type(data).__name__}')
    try:
        return make_set_cover(data['universe'], data['subsets'])
    except KeyError as e:
        raise SetCoverError(f'Set cover is missing field {e}') from e


def load_set_cover(path):
    return set_cover_from_dict(read_json(path))


def reduce_set_cover(sc, capacity):
    """
    Build the JPA-VNF instance of a set-cover instance.

    One node per subset on a complete graph, one flow per element with rate
    R/m, and flow f_j passes node v_i iff e_j is in u_i (ascending node
    order). Covers of size k and feasible solutions with k instances then
    correspond one to one.
    """
    capacity = to_rate(capacity)
    n = len(sc.subsets)
    graph = make_graph(n, itertools.combinations(range(n), 2))
    rate = capacity / sc.universe_size
    flows = []
    for element in range(1, sc.universe_size + 1):
        path = [i for i, subset in enumerate(sc.subsets) if element in subset]
        if not path:
            raise SetCoverError(f'Element {element} is covered by no subset')
        flows.append(Flow(id=f'f{element}', rate=rate, path=path))
    return build_instance(graph, flows, capacity)


def greedy_set_cover(sc):
    """
    Classic greedy cover: repeatedly take the subset with the most uncovered
    elements, smallest index on ties.

    Returns:
        list of 0-based subset indices in the order they were chosen
    """
    uncovered = set(sc.universe)
    chosen = []
    while uncovered:
        best = max(range(len(sc.subsets)), key=lambda i: (len(sc.subsets[i] & uncovered), -i))
        chosen.append(best)
        uncovered -= sc.subsets[best]
    logger.debug('Greedy cover: %s', [f'u{i + 1}' for i in chosen])
    return chosen


def small_rate_transform(instance):
    """
    Set every positive rate to min(d_min, R/m), with d_min and m taken over
    the positive-rate flows, so that no node ever needs a second instance.

    Raises:
        ValueError: no flow has a positive rate
    """
    positive = [flow for flow in instance.flows if flow.rate > 0]
    if not positive:
        raise ValueError('Small-rate transform needs at least one flow with positive rate')
    rate = min(min(flow.rate for flow in positive), instance.capacity / len(positive))
    flows = [Flow(id=flow.id, rate=rate if flow.rate > 0 else Fraction(0), path=flow.path)
             for flow in instance.flows]
    return build_instance(instance.graph, flows, instance.capacity)
