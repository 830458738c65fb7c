"""Randomised laws over many generated instances."""
import numpy as np
import pytest

from bucket_tables.backends import SEQUENTIAL, parallel
from bucket_tables.dcop import run_adpop, simulate
from bucket_tables.generators import GeneratorConfig, generate, generate_belief_network
from bucket_tables.graph import (
    Ordering,
    build_primal_graph,
    build_pseudo_forest,
    build_pseudo_tree,
    default_ordering,
    forest_ordering,
    induced_width,
)
from bucket_tables.indexing import build_index_map, map_row, map_rows
from bucket_tables.inference import bucket_elimination, eliminate, mini_bucket_elimination
from bucket_tables.oracle import brute_force
from bucket_tables.problem import Problem, condition_on_evidence, evaluate
from bucket_tables.semiring import MAX_PRODUCT, MAX_PRODUCT_LINEAR, MIN_SUM
from bucket_tables.tables import BucketTable, aggregate_into, eliminate_last

from .utils import best_joint

pytestmark = pytest.mark.slow

# largest n per domain size that keeps enumeration cheap
MAX_N = {2: 12, 3: 10, 4: 8}


def _random_config(seed, *, domains=(2, 3, 4), max_n=None):
    rng = np.random.default_rng(seed)
    d = int(rng.choice(domains))
    n = int(rng.integers(6, min(MAX_N[d], max_n or MAX_N[d]) + 1))
    return GeneratorConfig(
        n=n,
        d=d,
        p1=round(float(rng.uniform(0.3, 0.6)), 2),
        p2=float(rng.choice([0.0, 0.3, 0.5])),
        seed=seed,
    )


def _dfs_ordering(problem):
    graph = build_primal_graph(problem)
    return forest_ordering(build_pseudo_forest(graph, default_ordering(graph)))


@pytest.mark.parametrize("seed", range(200))
def test_bucket_elimination_is_exact(seed):
    problem = generate(_random_config(seed))
    expected = brute_force(problem).optimum
    solution = bucket_elimination(problem)
    assert solution.optimum == expected
    assert evaluate(problem, solution.assignment) == expected


def test_index_maps_agree_with_tuple_ranks(rng):
    for _ in range(10_000):
        m = int(rng.integers(1, 7))
        scope_out = tuple(int(v) for v in rng.permutation(6)[:m])
        keep = rng.random(m - 1) < 0.5
        scope_in = tuple(v for v, k in zip(scope_out, keep) if k) + (scope_out[-1],)
        domains = tuple(int(d) for d in rng.integers(2, 6, size=6))

        index_map = build_index_map(scope_in, scope_out, domains)
        d_out = [domains[v] for v in scope_out]
        columns = dict(zip(scope_out, np.unravel_index(np.arange(index_map.out_rows), d_out)))
        expected = np.ravel_multi_index(tuple(columns[v] for v in scope_in), [domains[v] for v in scope_in])

        assert np.array_equal(map_rows(np.arange(index_map.out_rows), index_map), expected)
        for r in rng.integers(0, index_map.out_rows, size=3):
            assert map_row(int(r), index_map) == expected[r]


@pytest.mark.parametrize("workers", [2, 4, 8])
def test_parallel_kernels_match_sequential(rng, workers):
    for trial in range(1000):
        semiring = MIN_SUM if trial % 2 else MAX_PRODUCT
        backend = parallel(workers, chunk_rows=int(rng.integers(1, 8)))
        m = int(rng.integers(1, 6))
        scope_out = tuple(range(m))
        keep = rng.random(m - 1) < 0.5
        scope_in = tuple(v for v, k in zip(scope_out, keep) if k) + (m - 1,)
        domains = tuple(int(d) for d in rng.integers(2, 5, size=m))

        def random_table(scope):
            shape = tuple(domains[v] for v in scope)
            rows = int(np.prod(shape))
            if semiring is MIN_SUM:
                chi = rng.integers(0, 50, size=rows).astype(float)
                chi[rng.random(rows) < 0.1] = np.inf
            else:
                chi = rng.normal(size=rows)
            return BucketTable(scope, shape, chi)

        base, table = random_table(scope_out), random_table(scope_in)
        ours = BucketTable(base.scope, base.shape, base.chi.copy())
        theirs = BucketTable(base.scope, base.shape, base.chi.copy())
        aggregate_into(ours, table, semiring, SEQUENTIAL)
        aggregate_into(theirs, table, semiring, backend)
        assert np.array_equal(ours.chi, theirs.chi)
        assert eliminate_last(ours, semiring, SEQUENTIAL).equals(eliminate_last(theirs, semiring, backend))


@pytest.mark.parametrize("seed", range(100))
def test_mini_bucket_bounds_tighten_to_exact(seed):
    problem = generate(_random_config(seed, domains=(2, 3), max_n=10))
    optimum = brute_force(problem).optimum
    graph = build_primal_graph(problem)
    ordering = default_ordering(graph)
    w = induced_width(graph, ordering)
    dfs = _dfs_ordering(problem)
    for z in range(max(2, problem.max_arity), w + 2):
        bounds = mini_bucket_elimination(problem, ordering, z)
        assert bounds.lower <= optimum <= bounds.upper
        adpop, _ = run_adpop(problem, None, z)
        expected = mini_bucket_elimination(problem, dfs, z)
        assert (adpop.lower, adpop.upper) == (expected.lower, expected.upper)
    assert bounds.lower == optimum == bounds.upper


@pytest.mark.parametrize("seed", range(100))
def test_dpop_reproduces_bucket_tables(seed):
    problem = generate(_random_config(seed, domains=(2, 3), max_n=10))
    graph = build_primal_graph(problem)
    tree = build_pseudo_tree(graph, default_ordering(graph))
    result = simulate(problem, tree)
    expected = eliminate(problem, forest_ordering([tree]))
    assert result.value == expected.value
    assert result.assignment == expected.assignment
    for v, record in expected.trace.buckets.items():
        ours = result.records[v].aggregated
        assert len(ours) == len(record.aggregated)
        assert all(a.equals(b) for a, b in zip(ours, record.aggregated))

    d = problem.max_domain
    assert result.metrics.util_messages == result.metrics.value_messages == problem.n - 1
    assert result.metrics.max_message_rows <= d ** max(len(s) for s in tree.separator.values())
    _, metrics = run_adpop(problem, tree, 2)
    assert metrics.max_message_rows <= d**2


@pytest.mark.parametrize("seed", range(50))
def test_mpe_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.choice([2, 3]))
    n = int(rng.integers(5, 10 if d == 2 else 9))
    bn = generate_belief_network(GeneratorConfig(topology="bayes", n=n, d=d, seed=seed))
    for evidence in ({}, {int(rng.integers(n)): int(rng.integers(d))}):
        expected, _ = best_joint(bn, evidence)
        log_problem = condition_on_evidence(bn, evidence)
        log_value = log_problem.semiring.to_probability(bucket_elimination(log_problem).optimum)
        linear_problem = condition_on_evidence(bn, evidence, semiring=MAX_PRODUCT_LINEAR)
        linear_value = linear_problem.semiring.to_probability(bucket_elimination(linear_problem).optimum)
        assert log_value == pytest.approx(expected, rel=1e-9)
        assert linear_value == pytest.approx(log_value, rel=1e-9)


@pytest.mark.parametrize("seed", range(200))
def test_separators_measure_dfs_width(seed):
    problem = generate(_random_config(seed))
    graph = build_primal_graph(problem)
    tree = build_pseudo_tree(graph, default_ordering(graph))
    dfs = Ordering(tuple(tree.dfs_order))
    assert max(len(s) for s in tree.separator.values()) == induced_width(graph, dfs)


@pytest.mark.parametrize("seed", range(50))
def test_adding_functions_never_lowers_cost(seed):
    problem = generate(_random_config(seed))
    rng = np.random.default_rng(seed)
    for _ in range(5):
        assignment = [int(rng.integers(d)) for d in problem.domains]
        values = [
            evaluate(Problem(problem.domains, problem.functions[:k]), assignment)
            for k in range(len(problem.functions) + 1)
        ]
        assert values == sorted(values)
