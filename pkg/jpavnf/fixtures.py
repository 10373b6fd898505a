"""
Example instances shipped with the package and a smoke check that solves
each of them and compares against the known totals.
"""

import logging
import os
from dataclasses import dataclass
from typing import Optional

from .exact import solve_exact
from .greedy import solve_fng, solve_frg
from .model import check_feasible, load_instance, load_solution, read_json, total_instances
from .reductions import greedy_set_cover, load_set_cover, reduce_set_cover
from .tree import solve_gft, validate_tree_instance

logger = logging.getLogger(__name__)

FIXTURE_NAMES = (
    'six_node.json',
    'six_node_suboptimal.json',
    'six_node_optimal.json',
    'frg_wins.json',
    'fng_wins.json',
    'upstream_tree.json',
    'setcover_example.json',
)


def fixture_path(name):
    """
    Absolute path of a shipped fixture file.

    Raises:
        FileNotFoundError: the package was installed without its fixtures
    """
    path = os.path.join(os.path.dirname(__file__), 'fixtures', name)
    if not os.path.exists(path):
        raise FileNotFoundError(f'Fixture file not found: {path}')
    return path


def load_fixture_instance(name):
    return load_instance(fixture_path(name))


def load_fixture_solution(name):
    return load_solution(fixture_path(name))


def load_fixture_tree(name):
    """Load a tree fixture, rooted where its 'root' field says (default 0)."""
    path = fixture_path(name)
    root = read_json(path).get('root', 0)
    return validate_tree_instance(load_instance(path), root)


@dataclass(frozen=True)
class SmokeCheck:
    fixture: str
    algorithm: str
    expected: int
    actual: Optional[int]

    @property
    def passed(self):
        return self.expected == self.actual


def _expectations():
    six_node = load_fixture_instance('six_node.json')
    frg_wins = load_fixture_instance('frg_wins.json')
    fng_wins = load_fixture_instance('fng_wins.json')
    upstream_tree = load_fixture_tree('upstream_tree.json')
    cover = load_set_cover(fixture_path('setcover_example.json'))
    reduced = reduce_set_cover(cover, 10)

    def feasible(solution_name):
        return lambda: int(check_feasible(six_node, load_fixture_solution(solution_name)).feasible)

    return [
        ('six_node.json', 'exact', 3, lambda: solve_exact(six_node).optimum),
        ('six_node.json', 'fng', 4, lambda: total_instances(solve_fng(six_node).solution)),
        ('six_node.json', 'frg', 4, lambda: total_instances(solve_frg(six_node).solution)),
        ('six_node_suboptimal.json', 'verify', 1, feasible('six_node_suboptimal.json')),
        ('six_node_optimal.json', 'verify', 1, feasible('six_node_optimal.json')),
        ('frg_wins.json', 'fng', 6, lambda: total_instances(solve_fng(frg_wins).solution)),
        ('frg_wins.json', 'frg', 5, lambda: total_instances(solve_frg(frg_wins).solution)),
        ('fng_wins.json', 'fng', 2, lambda: total_instances(solve_fng(fng_wins).solution)),
        ('fng_wins.json', 'frg', 3, lambda: total_instances(solve_frg(fng_wins).solution)),
        ('upstream_tree.json', 'gft', 4, lambda: total_instances(solve_gft(upstream_tree)[0])),
        ('upstream_tree.json', 'exact', 4, lambda: solve_exact(upstream_tree.instance).optimum),
        ('setcover_example.json', 'greedy-cover', 2, lambda: len(greedy_set_cover(cover))),
        ('setcover_example.json', 'exact', 2, lambda: solve_exact(reduced).optimum),
    ]


def run_smoke():
    """
    Solve every shipped fixture and compare with its expected total.

    Returns:
        list of SmokeCheck, one per (fixture, algorithm) pair
    """
    checks = []
    for fixture, algorithm, expected, compute in _expectations():
        actual = compute()
        check = SmokeCheck(fixture=fixture, algorithm=algorithm, expected=expected, actual=actual)
        if not check.passed:
            logger.error('%s/%s: expected %d, got %s', fixture, algorithm, expected, actual)
        checks.append(check)
    return checks
