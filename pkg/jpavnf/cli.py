"""
Command-line entry point: solve, verify, generate, reduce and benchmark
JPA-VNF instances.

Exit codes: 0 on success, 1 for invalid input or an infeasible solution,
2 for usage errors.
"""

import argparse
import json
import logging
import sys

from .bench import load_scenarios, run_scenarios, write_rows_csv
from .exact import exact_cap_from_env, solve_exact
from .fixtures import run_smoke
from .generators import (
    PathClass,
    RateClass,
    gen_flows,
    gen_random_topology,
    gen_tree,
    gen_upstream_tree_flows,
    load_topology,
)
from .greedy import solve_fng, solve_frg, trace_to_dicts
from .model import (
    InstanceError,
    as_integer,
    build_instance,
    check_feasible,
    hosting_nodes,
    instance_to_dict,
    load_instance,
    load_solution,
    parse_rate,
    read_json,
    solution_to_dict,
    total_instances,
    write_json,
)
from .reductions import load_set_cover, reduce_set_cover
from .tree import ExitOrder, gft_trace_to_dicts, solve_gft, validate_tree_instance

logger = logging.getLogger(__name__)


def _configure_logging(verbose, quiet):
    if quiet:
        level = logging.ERROR
    elif verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr, format='%(levelname)s %(name)s: %(message)s')


def _rate_arg(value):
    try:
        rate = parse_rate(value)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e
    if rate <= 0:
        raise argparse.ArgumentTypeError(f'capacity must be positive, got {value}')
    return rate


def _emit_json(data, out):
    if out:
        write_json(out, data)
    else:
        print(json.dumps(data, indent=2))


def _root_of(path, explicit):
    if explicit is not None:
        return explicit
    if not path.lower().endswith('.json'):
        # GML and GraphML files carry no root
        return 0
    data = read_json(path)
    if not isinstance(data, dict):
        raise InstanceError(f'{path}: expected a JSON object, got {type(data).__name__}')
    try:
        return as_integer(data.get('root', 0), 'Root')
    except ValueError as e:
        raise InstanceError(f'{path}: {e}') from e


def cmd_solve(args):
    instance = load_instance(args.instance)
    trace = None
    if args.algorithm in ('fng', 'frg'):
        result = solve_fng(instance) if args.algorithm == 'fng' else solve_frg(instance)
        solution = result.solution
        trace = trace_to_dicts(instance, result.trace)
    elif args.algorithm == 'gft':
        tree = validate_tree_instance(instance, _root_of(args.instance, args.root))
        solution, steps = solve_gft(tree, exit_order=ExitOrder(args.exit_order))
        trace = gft_trace_to_dicts(tree, steps)
    else:
        cap = exact_cap_from_env()
        if not cap.admits(instance):
            print(f'error: exact solver is capped at {cap.max_nodes} nodes and {cap.max_flows} flows '
                  f'(instance has {instance.node_count} nodes, {instance.flow_count} flows); '
                  f'set JPAVNF_EXACT_CAP to change it', file=sys.stderr)
            return 1
        result = solve_exact(instance, node_budget=args.budget)
        solution = result.solution
        if not result.proven_optimal:
            print('warning: search budget exhausted, total is not proven optimal', file=sys.stderr)

    labels = instance.graph.labels
    print(f'total {total_instances(solution)}')
    print(f'hosting_nodes {hosting_nodes(solution)}')
    print('placements ' + ' '.join(f'{labels[node]}:{count}' for node, count in solution.placements.items()))
    if args.out:
        write_json(args.out, solution_to_dict(solution))
    if args.trace and trace is not None:
        print(json.dumps(trace, indent=2))
    return 0


def cmd_verify(args):
    instance = load_instance(args.instance)
    solution = load_solution(args.solution)
    report = check_feasible(instance, solution)
    if report.feasible:
        print(f'feasible total {total_instances(solution)}')
        return 0
    for flow_id, shortfall in report.flow_violations:
        print(f'flow {flow_id} is short by {shortfall}', file=sys.stderr)
    for node, excess in report.node_violations:
        print(f'node {instance.graph.labels[node]} is over capacity by {excess}', file=sys.stderr)
    return 1


def cmd_gen_topology(args):
    graph = gen_random_topology(args.nodes, args.edges, args.seed)
    _emit_json(instance_to_dict(build_instance(graph, [], args.capacity)), args.out)
    return 0


def cmd_gen_tree(args):
    graph, root = gen_tree(args.nodes, args.max_children, args.seed)
    _emit_json(instance_to_dict(build_instance(graph, [], args.capacity), root=root), args.out)
    return 0


def cmd_gen_flows(args):
    graph = load_topology(args.topology)
    if args.upstream:
        root = _root_of(args.topology, args.root)
        tree = validate_tree_instance(build_instance(graph, [], args.capacity), root)
        flows = gen_upstream_tree_flows(tree, args.flows, args.rate_class, args.seed, capacity=args.capacity)
        _emit_json(instance_to_dict(build_instance(graph, flows, args.capacity), root=root), args.out)
        return 0
    flows = gen_flows(graph, args.flows, args.path_class, args.rate_class, args.seed, capacity=args.capacity)
    _emit_json(instance_to_dict(build_instance(graph, flows, args.capacity)), args.out)
    return 0


def cmd_reduce_setcover(args):
    instance = reduce_set_cover(load_set_cover(args.setcover), args.capacity)
    _emit_json(instance_to_dict(instance), args.out)
    return 0


def cmd_bench(args):
    configs = load_scenarios(args.config, timing=args.timing)
    rows = run_scenarios(configs, jobs=args.jobs)
    write_rows_csv(args.out_csv, rows)
    logger.info('Wrote %d rows to %s', len(rows), args.out_csv)
    return 0


def cmd_smoke(args):
    checks = run_smoke()
    for check in checks:
        status = 'ok' if check.passed else 'FAIL'
        print(f'{status} {check.fixture} {check.algorithm} expected {check.expected} got {check.actual}')
    return 0 if all(check.passed for check in checks) else 1


def build_parser():
    parser = argparse.ArgumentParser(prog='jpavnf', description='Joint VNF placement and allocation toolkit')
    parser.add_argument('-v', '--verbose', action='count', default=0, help='INFO with -v, DEBUG with -vv')
    parser.add_argument('-q', '--quiet', action='store_true', help='only report errors')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('solve', help='solve an instance file')
    p.add_argument('--instance', required=True)
    p.add_argument('--algorithm', required=True, choices=['fng', 'frg', 'gft', 'exact'])
    p.add_argument('--root', type=int, help="tree root for gft (default: the file's root field, else 0)")
    p.add_argument('--exit-order', default=ExitOrder.DEEPEST_FIRST.value, choices=[o.value for o in ExitOrder])
    p.add_argument('--budget', type=int, help='search node budget for exact')
    p.add_argument('--trace', action='store_true', help='print the solver trace as JSON')
    p.add_argument('--out', help='write the solution JSON here')
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser('verify', help='check a solution against an instance')
    p.add_argument('--instance', required=True)
    p.add_argument('--solution', required=True)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser('gen-topology', help='random connected topology without flows')
    p.add_argument('--nodes', type=int, required=True)
    p.add_argument('--edges', type=int, required=True)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--capacity', type=_rate_arg, default=_rate_arg('10'))
    p.add_argument('--out')
    p.set_defaults(handler=cmd_gen_topology)

    p = sub.add_parser('gen-tree', help='random rooted tree without flows')
    p.add_argument('--nodes', type=int, required=True)
    p.add_argument('--max-children', type=int, default=2)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--capacity', type=_rate_arg, default=_rate_arg('10'))
    p.add_argument('--out')
    p.set_defaults(handler=cmd_gen_tree)

    p = sub.add_parser('gen-flows', help='add random flows to a topology')
    p.add_argument('--topology', required=True, help='instance JSON, GML or GraphML file')
    p.add_argument('--flows', type=int, required=True)
    p.add_argument('--path-class', default=PathClass.SHORT.value, choices=[c.value for c in PathClass])
    p.add_argument('--rate-class', default=RateClass.SMALL.value, choices=[c.value for c in RateClass])
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--capacity', type=_rate_arg, default=_rate_arg('10'))
    p.add_argument('--upstream', action='store_true', help='upstream flows on a tree topology')
    p.add_argument('--root', type=int)
    p.add_argument('--out')
    p.set_defaults(handler=cmd_gen_flows)

    p = sub.add_parser('reduce-setcover', help='turn a set-cover instance into a JPA-VNF instance')
    p.add_argument('--setcover', required=True)
    p.add_argument('--capacity', type=_rate_arg, required=True, help='R as an integer or p/q')
    p.add_argument('--out')
    p.set_defaults(handler=cmd_reduce_setcover)

    p = sub.add_parser('bench', help='run a scenario file and write result rows as CSV')
    p.add_argument('--config', required=True)
    p.add_argument('--out-csv', required=True)
    p.add_argument('--jobs', type=int, default=1)
    p.add_argument('--timing', action='store_true', help='record solver runtimes (CSV is no longer byte-stable)')
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser('smoke', help='solve the shipped fixtures and check their totals')
    p.set_defaults(handler=cmd_smoke)
    return parser


def cli_main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # usage errors exit 2, --help exits 0
        return e.code

    _configure_logging(args.verbose, args.quiet)
    try:
        return args.handler(args)
    except (OSError, ValueError, KeyError, RuntimeError) as e:
        # bad input files and infeasible solver output both exit 1
        print(f'error: {e}', file=sys.stderr)
        return 1


def main():
    sys.exit(cli_main())


if __name__ == '__main__':
    main()
