import math

import pytest

from bucket_tables.backends import SEQUENTIAL, parallel
from bucket_tables.generators import GeneratorConfig, generate, generate_belief_network
from bucket_tables.graph import Ordering, build_primal_graph, default_ordering
from bucket_tables.inference import (
    DEFAULT_BUDGET_ROWS,
    budget_rows,
    bucket_elimination,
    eliminate,
    mini_bucket_elimination,
    partition_bucket,
    plan_buckets,
)
from bucket_tables.models import InfeasibleBoundError, MemoryBudgetExceeded, PreconditionError
from bucket_tables.oracle import brute_force
from bucket_tables.problem import CostFunction, Problem, condition_on_evidence, evaluate

from .utils import nested_loop_best

IDENTITY = Ordering((0, 1, 2, 3))


class _Scoped:
    def __init__(self, *scope):
        self.scope = scope


def test_budget_rows():
    assert budget_rows(1) == 2**27
    assert DEFAULT_BUDGET_ROWS == 32 * 2**27


def test_partition_first_fit():
    members = [_Scoped(0, 3), _Scoped(1, 3), _Scoped(2, 3)]
    minis = partition_bucket(members, 3, (2, 2, 2, 2), IDENTITY)
    assert [m.scope for m in minis] == [(0, 1, 3), (2, 3)]
    assert [m.members for m in minis] == [[0, 1], [2]]
    assert [m.rows for m in minis] == [8, 4]


def test_partition_places_large_scopes_first():
    members = [_Scoped(3), _Scoped(1, 3), _Scoped(0, 2, 3)]
    minis = partition_bucket(members, 3, (2, 2, 2, 2), IDENTITY)
    assert [m.members for m in minis] == [[0, 2], [1]]


def test_partition_without_bound():
    members = [_Scoped(0, 3), _Scoped(1, 3), _Scoped(2, 3)]
    (mini,) = partition_bucket(members, None, (2, 2, 2, 2), IDENTITY)
    assert mini.scope == (0, 1, 2, 3)
    assert mini.members == [0, 1, 2]


def test_partition_rejects_small_bound():
    with pytest.raises(InfeasibleBoundError) as info:
        partition_bucket([_Scoped(0, 1, 3)], 2, (2, 2, 2, 2), IDENTITY)
    assert (info.value.z, info.value.arity) == (2, 3)


def test_bucket_elimination(square):
    solution = bucket_elimination(square, IDENTITY)
    assert solution.optimum == 4
    assert solution.assignment == [0, 1, 0, 1]
    assert solution.feasible
    assert solution.stats.induced_width == 3
    assert solution.stats.max_table_rows == 16


def test_bucket_elimination_default_ordering(square):
    solution = bucket_elimination(square)
    assert solution.optimum == 4
    assert solution.assignment == [0, 1, 0, 1]


def test_mini_bucket_bounds(square):
    bounds = mini_bucket_elimination(square, IDENTITY, 2)
    assert (bounds.lower, bounds.upper) == (2, 4)
    assert bounds.assignment == [0, 1, 0, 1]
    assert bounds.stats.mini_bucket_counts[3] == 3
    assert bounds.relaxation == 2
    assert bounds.assignment_value == 4


def test_large_bound_is_exact(square):
    bounds = mini_bucket_elimination(square, IDENTITY, 4)
    assert bounds.lower == bounds.upper == 4


def test_bound_below_arity(square):
    for z in (0, 1):
        with pytest.raises(InfeasibleBoundError):
            mini_bucket_elimination(square, IDENTITY, z)


def test_wrong_ordering_size(square):
    with pytest.raises(PreconditionError):
        bucket_elimination(square, Ordering((0, 1, 2)))


def test_memory_budget(square):
    plans = plan_buckets(square, IDENTITY)
    assert [p.variable for p in plans] == [3, 2, 1, 0]
    assert [p.rows for p in plans] == [16, 8, 4, 2]
    with pytest.raises(MemoryBudgetExceeded) as info:
        bucket_elimination(square, IDENTITY, budget_rows=12)
    assert (info.value.variable, info.value.rows, info.value.budget_rows) == (3, 16, 12)
    bucket_elimination(square, IDENTITY, budget_rows=30)
    # mini-buckets keep 12 + 4 + 4 + 2 rows
    mini_bucket_elimination(square, IDENTITY, 2, budget_rows=22)
    with pytest.raises(MemoryBudgetExceeded) as info:
        mini_bucket_elimination(square, IDENTITY, 2, budget_rows=21)
    assert (info.value.variable, info.value.rows) == (0, 22)


def test_memory_budget_counts_kept_tables():
    chain = Problem(
        domains=(2,) * 12,
        functions=tuple(CostFunction((i, i + 1), [0, 1, 1, 0]) for i in range(11)),
    )
    ordering = Ordering(tuple(range(12)))
    assert all(p.rows <= 4 for p in plan_buckets(chain, ordering))
    with pytest.raises(MemoryBudgetExceeded) as info:
        bucket_elimination(chain, ordering, budget_rows=10)
    assert (info.value.variable, info.value.rows) == (9, 12)
    assert bucket_elimination(chain, ordering, budget_rows=46).optimum == 0


def test_constants_and_isolated_variables():
    problem = Problem(
        domains=(2, 3, 2),
        functions=(
            CostFunction((), [5]),
            CostFunction((0,), [3, 1]),
            CostFunction((2, 0), [0, 4, 2, 1]),
        ),
    )
    solution = bucket_elimination(problem)
    assert solution.optimum == 5 + 1 + 1
    assert solution.assignment == [1, 0, 1]
    assert solution.stats.components == 2


def test_no_functions():
    solution = bucket_elimination(Problem((3, 2)))
    assert solution.optimum == 0
    assert solution.assignment == [0, 0]


def test_infeasible_problem():
    problem = Problem((2,), (CostFunction((0,), [math.inf, math.inf]),))
    solution = bucket_elimination(problem)
    assert solution.optimum == math.inf
    assert not solution.feasible


def test_trace_keeps_aggregated_tables(square):
    result = eliminate(square, IDENTITY)
    aggregated = result.trace.aggregated()
    assert [t.scope for t in aggregated[3]] == [(0, 1, 2, 3)]
    assert [t.scope for t in aggregated[0]] == [(0,)]
    assert list(aggregated[0][0].chi) == [4, 5]
    assert set(result.stats.phase_seconds) == {"plan", "eliminate", "assign"}


@pytest.mark.parametrize("seed", range(4))
def test_matches_enumeration(seed):
    problem = generate(GeneratorConfig(n=7, d=3, p1=0.4, p2=0.3, seed=seed))
    expected, winners = nested_loop_best(problem)
    solution = bucket_elimination(problem)
    assert solution.optimum == expected
    assert solution.assignment in winners
    assert brute_force(problem).optimum == expected


@pytest.mark.parametrize("seed", range(4))
def test_bounds_sandwich_optimum(seed):
    problem = generate(GeneratorConfig(topology="scalefree", n=9, d=3, p2=0.2, seed=seed))
    optimum = bucket_elimination(problem).optimum
    ordering = default_ordering(build_primal_graph(problem))
    for z in (2, 3, 4):
        bounds = mini_bucket_elimination(problem, ordering, z)
        assert bounds.lower <= optimum <= bounds.upper
        assert bounds.upper == evaluate(problem, bounds.assignment)


def test_max_product_bounds():
    bn = generate_belief_network(GeneratorConfig(topology="bayes", n=8, d=2, seed=5))
    problem = condition_on_evidence(bn, {})
    solution = bucket_elimination(problem)
    assert solution.optimum == pytest.approx(brute_force(problem).optimum)
    bounds = mini_bucket_elimination(problem, None, 3)
    assert bounds.lower <= solution.optimum + 1e-9
    assert bounds.upper >= solution.optimum - 1e-9


def test_backends_agree_bitwise():
    bn = generate_belief_network(GeneratorConfig(topology="bayes", n=10, d=3, seed=2))
    problem = condition_on_evidence(bn, {})
    sequential = eliminate(problem, None, None, SEQUENTIAL)
    threaded = eliminate(problem, None, None, parallel(3, chunk_rows=4))
    assert sequential.value == threaded.value
    assert sequential.assignment == threaded.assignment
    for v, tables in sequential.trace.aggregated().items():
        for ours, theirs in zip(tables, threaded.trace.aggregated()[v]):
            assert ours.equals(theirs)
