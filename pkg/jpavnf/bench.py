"""
Experiment harness: scenario configs, seeded instance generation, solver
comparison and CSV output.

Every row is feasibility-checked before it is emitted. Large instances have
no exact optimum at hand, so rows report the ratio to the demand lower bound
ceil(D/R) instead.
"""

import csv
import io
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from .exact import ExactCap, exact_cap_from_env, solve_exact
from .generators import (
    PathClass,
    RateClass,
    gen_flows,
    gen_random_topology,
    gen_tree,
    gen_upstream_tree_flows,
    load_topology,
)
from .greedy import solve_fng, solve_frg
from .model import (
    atomic_write_text,
    build_instance,
    check_feasible,
    demand_lower_bound,
    hosting_nodes,
    parse_rate,
    read_json,
    total_instances,
)
from .tree import ExitOrder, solve_gft, validate_tree_instance

logger = logging.getLogger(__name__)

ALGORITHMS = ('exact', 'fng', 'frg', 'gft')
CSV_COLUMNS = ['scenario', 'instance', 'seed', 'algorithm', 'total_vnf', 'hosting_nodes',
               'lower_bound', 'ratio_to_lb', 'runtime_us']


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class TopologySpec:
    """kind is 'random' (nodes, edges), 'tree' (nodes, max_children) or 'file' (path)."""
    kind: str
    nodes: int = 0
    edges: int = 0
    max_children: int = 2
    path: Optional[str] = None

    @property
    def is_tree(self):
        return self.kind == 'tree'


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    topology: TopologySpec
    flows: int
    path_class: PathClass = PathClass.SHORT
    rate_class: RateClass = RateClass.SMALL
    algorithms: Tuple[str, ...] = ('fng', 'frg')
    repetitions: int = 1
    base_seed: int = 0
    capacity: Fraction = Fraction(10)
    exit_order: ExitOrder = ExitOrder.DEEPEST_FIRST
    exact_budget: Optional[int] = None
    timing: bool = False
    exact_cap: ExactCap = field(default_factory=ExactCap)


@dataclass(frozen=True)
class ResultRow:
    scenario: str
    instance: str
    seed: int
    algorithm: str
    total_vnf: int
    hosting_nodes: int
    lower_bound: int
    ratio_to_lb: str
    runtime_us: int

    def as_dict(self):
        return {column: getattr(self, column) for column in CSV_COLUMNS}


def validate_scenario(config):
    """
    Raises:
        ScenarioError: unknown algorithm, gft on a non-tree topology, exact
            beyond the size cap, or malformed counts
    """
    unknown = sorted(set(config.algorithms) - set(ALGORITHMS))
    if unknown:
        raise ScenarioError(f'{config.name}: unknown algorithms {unknown}')
    if config.topology.kind not in ('random', 'tree', 'file'):
        raise ScenarioError(f'{config.name}: unknown topology kind {config.topology.kind!r}')
    if config.topology.kind == 'file' and not config.topology.path:
        raise ScenarioError(f'{config.name}: file topology needs a path')
    if 'gft' in config.algorithms and not config.topology.is_tree:
        raise ScenarioError(f'{config.name}: gft requires a tree topology')
    if config.repetitions < 0 or config.flows < 0:
        raise ScenarioError(f'{config.name}: repetitions and flows must be non-negative')
    if config.capacity <= 0:
        raise ScenarioError(f'{config.name}: capacity must be positive')
    if 'exact' in config.algorithms and config.topology.kind != 'file':
        _check_exact_cap(config, config.topology.nodes)


def _check_exact_cap(config, node_count):
    cap = config.exact_cap
    if node_count > cap.max_nodes or config.flows > cap.max_flows:
        raise ScenarioError(
            f'{config.name}: exact solver is capped at {cap.max_nodes} nodes and {cap.max_flows} flows '
            f'(got {node_count} nodes, {config.flows} flows); set JPAVNF_EXACT_CAP to change it')


def derive_seed(seed, stream):
    """Independent 64-bit seed for one generator stream of a repetition."""
    return int(np.random.SeedSequence([seed, stream]).generate_state(1, dtype=np.uint64)[0])


def build_scenario_instance(config, seed):
    """
    Generate the instance for one repetition.

    Returns:
        (ProblemInstance, TreeInstance or None)
    """
    topology = config.topology
    if topology.kind == 'tree':
        graph, root = gen_tree(topology.nodes, topology.max_children, derive_seed(seed, 0))
        bare = validate_tree_instance(build_instance(graph, [], config.capacity), root)
        flows = gen_upstream_tree_flows(bare, config.flows, config.rate_class, derive_seed(seed, 1),
                                        capacity=config.capacity)
        tree = validate_tree_instance(build_instance(graph, flows, config.capacity), root)
        return tree.instance, tree

    if topology.kind == 'random':
        graph = gen_random_topology(topology.nodes, topology.edges, derive_seed(seed, 0))
    else:
        graph = load_topology(topology.path)
    flows = gen_flows(graph, config.flows, config.path_class, config.rate_class, derive_seed(seed, 1),
                      capacity=config.capacity)
    return build_instance(graph, flows, config.capacity), None


def _solve(config, algorithm, instance, tree):
    if algorithm == 'fng':
        return solve_fng(instance).solution
    if algorithm == 'frg':
        return solve_frg(instance).solution
    if algorithm == 'gft':
        return solve_gft(tree, exit_order=config.exit_order)[0]
    # exact; run_scenario has already checked the size cap
    result = solve_exact(instance, node_budget=config.exact_budget)
    if not result.proven_optimal:
        logger.warning('%s: exact search hit its budget, row reports best known total', config.name)
    return result.solution


def format_ratio(total, lower_bound):
    if lower_bound == 0:
        return ''
    ratio = Decimal(total) / Decimal(lower_bound)
    return str(ratio.quantize(Decimal('0.0001')))


def run_scenario(config):
    """
    Run every requested algorithm on each repetition of a scenario.

    Repetition r uses seed base_seed + r; rows come out ordered by
    repetition, then algorithm name.

    Raises:
        ScenarioError: invalid config
        RuntimeError: a solver produced an infeasible solution
    """
    validate_scenario(config)
    rows = []
    for r in range(config.repetitions):
        seed = config.base_seed + r
        instance, tree = build_scenario_instance(config, seed)
        if 'exact' in config.algorithms:
            _check_exact_cap(config, instance.node_count)
        lower = demand_lower_bound(instance)
        instance_id = f'{config.name}-{r}'

        for algorithm in sorted(config.algorithms):
            started = time.perf_counter_ns()
            solution = _solve(config, algorithm, instance, tree)
            elapsed_us = (time.perf_counter_ns() - started) // 1000 if config.timing else 0

            report = check_feasible(instance, solution)
            if not report.feasible:
                raise RuntimeError(
                    f'{algorithm} returned an infeasible solution on {instance_id} (seed {seed}): '
                    f'{report.flow_violations} {report.node_violations}')
            total = total_instances(solution)
            rows.append(ResultRow(
                scenario=config.name,
                instance=instance_id,
                seed=seed,
                algorithm=algorithm,
                total_vnf=total,
                hosting_nodes=hosting_nodes(solution),
                lower_bound=lower,
                ratio_to_lb=format_ratio(total, lower),
                runtime_us=elapsed_us,
            ))
        logger.info('%s: repetition %d/%d done', config.name, r + 1, config.repetitions)
    return rows


def run_scenarios(configs, jobs=1):
    """
    Run independent scenarios, in parallel when jobs > 1.

    Rows are sorted by scenario name, instance id and algorithm name as
    plain strings, so 'dense-10' comes before 'dense-2' and the output does
    not depend on completion order.
    """
    for config in configs:
        validate_scenario(config)
    if jobs <= 1 or len(configs) <= 1:
        per_scenario = [run_scenario(config) for config in configs]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            per_scenario = list(pool.map(run_scenario, configs))
    rows = [row for rows in per_scenario for row in rows]
    return sorted(rows, key=lambda row: (row.scenario, row.instance, row.algorithm))


def rows_to_csv(rows):
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.as_dict())
    return buffer.getvalue()


def write_rows_csv(path, rows):
    atomic_write_text(path, rows_to_csv(rows))


def scenario_from_dict(data, exact_cap=None, timing=False):
    """Parse one entry of a scenario file."""
    try:
        topo = data['topology']
        topology = TopologySpec(
            kind=topo['kind'],
            nodes=int(topo.get('nodes', 0)),
            edges=int(topo.get('edges', 0)),
            max_children=int(topo.get('max_children', 2)),
            path=topo.get('path'),
        )
        config = ScenarioConfig(
            name=str(data['name']),
            topology=topology,
            flows=int(data['flows']),
            path_class=PathClass(data.get('path_class', 'short')),
            rate_class=RateClass(data.get('rate_class', 'small')),
            algorithms=tuple(data.get('algorithms', ('fng', 'frg'))),
            repetitions=int(data.get('repetitions', 1)),
            base_seed=int(data.get('base_seed', 0)),
            capacity=parse_rate(data.get('capacity', 10)),
            exit_order=ExitOrder(data.get('exit_order', ExitOrder.DEEPEST_FIRST.value)),
            exact_budget=data.get('exact_budget'),
            timing=timing,
            exact_cap=exact_cap or exact_cap_from_env(),
        )
    except (AttributeError, KeyError, TypeError, ValueError) as e:
        raise ScenarioError(f'Malformed scenario {data!r}: {e}') from e
    validate_scenario(config)
    return config


def load_scenarios(path, timing=False):
    data = read_json(path)
    if not isinstance(data, list):
        raise ScenarioError(f'{path}: scenario file must hold a JSON array')
    names = [entry.get('name') for entry in data if isinstance(entry, dict)]
    if len(set(names)) != len(names):
        raise ScenarioError(f'{path}: scenario names must be unique')
    cap = exact_cap_from_env()
    return [scenario_from_dict(entry, exact_cap=cap, timing=timing) for entry in data]
