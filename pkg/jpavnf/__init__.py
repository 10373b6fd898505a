"""
jpavnf: joint placement and allocation of virtual network functions

Decide how many VNF instances of capacity R to run at each node of a
network, and how much of each instance's capacity goes to each flow, so
that every flow is fully processed somewhere on its path with as few
instances as possible. Includes:
- FNG and FRG greedy solvers for general topologies
- GFT, which is optimal on trees with upstream flows
- A branch-and-bound exact solver with a max-flow feasibility oracle
- The set-cover reduction, seeded instance generators and a bench harness

Example:
    from fractions import Fraction
    from jpavnf import Flow, build_instance, make_graph, solve_exact, solve_fng

    graph = make_graph(['v1', 'v2'], [(0, 1)])
    flows = [
        Flow('f1', Fraction(3), [0]),
        Flow('f2', Fraction(6), [0, 1]),
        Flow('f3', Fraction(10), [1]),
    ]
    instance = build_instance(graph, flows, capacity=10)

    solve_fng(instance).solution.placements   # {0: 1, 1: 1}
    solve_exact(instance).optimum             # 2
"""

from .exact import ExactCap, ExactResult, allocation_feasible, extract_allocation, solve_exact
from .generators import (
    PathClass,
    RateClass,
    gen_flows,
    gen_random_topology,
    gen_tree,
    gen_upstream_tree_flows,
    load_topology,
)
from .greedy import GreedyCriterion, GreedyResult, solve_fng, solve_frg, solve_greedy
from .model import (
    Flow,
    Graph,
    InfeasibleSolutionError,
    InstanceError,
    ProblemInstance,
    Solution,
    build_instance,
    check_feasible,
    demand_lower_bound,
    density,
    density_ratio_bound,
    hosting_nodes,
    load_instance,
    load_solution,
    make_graph,
    save_instance,
    save_solution,
    total_instances,
)
from .reductions import SetCoverInstance, greedy_set_cover, make_set_cover, reduce_set_cover, small_rate_transform
from .tree import ExitOrder, TreeInstance, find_breaking_points, solve_gft, validate_tree_instance

__version__ = '0.1.0'
__author__ = 'JPA-VNF contributors'

__all__ = [
    'ExactCap',
    'ExactResult',
    'ExitOrder',
    'Flow',
    'Graph',
    'GreedyCriterion',
    'GreedyResult',
    'InfeasibleSolutionError',
    'InstanceError',
    'PathClass',
    'ProblemInstance',
    'RateClass',
    'SetCoverInstance',
    'Solution',
    'TreeInstance',
    'allocation_feasible',
    'build_instance',
    'check_feasible',
    'demand_lower_bound',
    'density',
    'density_ratio_bound',
    'extract_allocation',
    'find_breaking_points',
    'gen_flows',
    'gen_random_topology',
    'gen_tree',
    'gen_upstream_tree_flows',
    'greedy_set_cover',
    'hosting_nodes',
    'load_instance',
    'load_solution',
    'load_topology',
    'make_graph',
    'make_set_cover',
    'reduce_set_cover',
    'save_instance',
    'save_solution',
    'small_rate_transform',
    'solve_exact',
    'solve_fng',
    'solve_frg',
    'solve_gft',
    'solve_greedy',
    'total_instances',
    'validate_tree_instance',
]
