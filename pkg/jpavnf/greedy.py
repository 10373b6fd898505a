"""
Flow Number based Greedy (FNG) and Flow Rate based Greedy (FRG).

Both repeatedly pick the node that covers the most unprocessed flows (FNG)
or the largest unprocessed rate (FRG), place just enough instances there to
process every unprocessed flow passing it, and stop once all flows are
processed. A flow is therefore processed entirely at a single node.
"""

import enum
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Tuple

from .model import Solution, ceil_ratio, hosting_nodes, passing_sets, rate_to_dict, total_instances

logger = logging.getLogger(__name__)


class GreedyCriterion(enum.Enum):
    FLOW_NUMBER = 'fng'
    FLOW_RATE = 'frg'


@dataclass(frozen=True)
class GreedyTraceEvent:
    iteration: int
    chosen_node: int
    processed_flows: Tuple[str, ...]
    instances_placed: int
    allocations: Mapping[str, Fraction]


@dataclass(frozen=True)
class GreedyResult:
    solution: Solution
    trace: Tuple[GreedyTraceEvent, ...]

    @property
    def chosen_nodes(self):
        return [event.chosen_node for event in self.trace]


def _score(criterion, unprocessed, rates):
    if criterion is GreedyCriterion.FLOW_NUMBER:
        return len(unprocessed)
    return sum((rates[flow_id] for flow_id in unprocessed), Fraction(0))


def solve_greedy(instance, criterion):
    """
    Shared engine for FNG and FRG.

    Args:
        instance: ProblemInstance
        criterion: GreedyCriterion selecting the node score

    Returns:
        GreedyResult with the solution and one trace event per chosen node
    """
    rates = {flow.id: flow.rate for flow in instance.flows}
    order = {flow.id: k for k, flow in enumerate(instance.flows)}

    # zero-rate flows are processed from the start
    unprocessed = {flow.id for flow in instance.flows if flow.rate > 0}
    candidates = {node: set(flows) & unprocessed for node, flows in passing_sets(instance).items()}
    scores = [_score(criterion, candidates[node], rates) for node in range(instance.node_count)]

    placements = {}
    allocations = {}
    trace = []
    while unprocessed:
        best_node, best_score = None, None
        # ascending scan with strict improvement keeps the smallest index on ties
        for node in range(instance.node_count):
            if not candidates[node]:
                continue
            if best_score is None or scores[node] > best_score:
                best_node, best_score = node, scores[node]

        processed = sorted(candidates[best_node], key=order.__getitem__)
        demand = sum((rates[flow_id] for flow_id in processed), Fraction(0))
        count = ceil_ratio(demand, instance.capacity)
        placements[best_node] = count
        event_allocations = {flow_id: rates[flow_id] for flow_id in processed}
        for flow_id in processed:
            allocations[(flow_id, best_node)] = rates[flow_id]

        trace.append(GreedyTraceEvent(
            iteration=len(trace) + 1,
            chosen_node=best_node,
            processed_flows=tuple(processed),
            instances_placed=count,
            allocations=event_allocations,
        ))
        logger.debug('%s iteration %d: node %s, %d flows, %d instances', criterion.value,
                     len(trace), instance.graph.labels[best_node], len(processed), count)

        unprocessed.difference_update(processed)
        # only nodes on a processed flow's path change, keeping the loop O(n^2 + mn)
        for flow_id in processed:
            for node in instance.flow(flow_id).path:
                candidates[node].discard(flow_id)
                scores[node] -= _score(criterion, (flow_id,), rates)

    solution = Solution(placements=placements, allocations=allocations)
    logger.info('%s placed %d instances on %d nodes', criterion.value,
                total_instances(solution), hosting_nodes(solution))
    return GreedyResult(solution=solution, trace=tuple(trace))


def solve_fng(instance):
    """FNG: pick the node with the largest number of unprocessed flows."""
    return solve_greedy(instance, GreedyCriterion.FLOW_NUMBER)


def solve_frg(instance):
    """FRG: pick the node with the largest total unprocessed rate."""
    return solve_greedy(instance, GreedyCriterion.FLOW_RATE)


def trace_to_dicts(instance, trace):
    return [{
        'iteration': event.iteration,
        'node': event.chosen_node,
        'label': instance.graph.labels[event.chosen_node],
        'processed_flows': list(event.processed_flows),
        'instances': event.instances_placed,
        'allocations': {flow_id: rate_to_dict(amount) for flow_id, amount in event.allocations.items()},
    } for event in trace]
