"""
Bucket elimination and mini-bucket elimination
----------------------------------------------

Variables are eliminated from the tail of the ordering to its head. The bucket of a
variable holds every table whose highest-priority scope variable it is: first the
problem's own functions (in problem order), then the bucket functions produced by later
buckets (latest-eliminated origin first, then mini-bucket index). Each (mini-)bucket is
aggregated into one table over its scope union and its variable is eliminated; the
aggregated tables are kept for the forward pass that assigns values head to tail.

With a bound ``z`` every bucket is first split into mini-buckets whose scope union has at
most ``z`` variables (the bucket variable included). The result is then a relaxation:
a lower bound under min-sum and an upper bound under max-product.
"""
import logging
import time
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .backends import SEQUENTIAL, ExecutionBackend
from .graph import (
    Ordering,
    build_primal_graph,
    connected_components,
    default_ordering,
    induced_width,
)
from .models import (
    Bounds,
    InferenceStats,
    InfeasibleBoundError,
    MemoryBudgetExceeded,
    PreconditionError,
    Solution,
)
from .problem import Problem, evaluate
from .semiring import Semiring
from .tables import BucketTable, aggregate_into, best_extension, eliminate_last, table_from_function
from .utils import prod

logger = logging.getLogger(__name__)

BYTES_PER_ROW = 8
DEFAULT_BUDGET_GIB = 32.0


def budget_rows(gib: float) -> int:
    return int(gib * 2**30) // BYTES_PER_ROW


DEFAULT_BUDGET_ROWS = budget_rows(DEFAULT_BUDGET_GIB)


@dataclass
class MiniBucket:
    # scope union sorted by priority; the bucket variable is last
    scope: Tuple[int, ...]
    # positions in the bucket's member list
    members: List[int]
    rows: int


def partition_bucket(
    functions: Sequence, z: Optional[int], domains: Sequence[int], ordering: Ordering
) -> List[MiniBucket]:
    """Greedy first-fit partition of a bucket into mini-buckets of at most ``z`` variables.

    Members are placed largest scope first (ties keep bucket order) into the first
    mini-bucket whose union stays within ``z``; ``z=None`` keeps the whole bucket together.
    Every member must expose a ``scope``.
    """
    scopes = [tuple(f.scope) for f in functions]
    if z is not None:
        for scope in scopes:
            if len(scope) > z:
                raise InfeasibleBoundError(
                    f"A function over {len(scope)} variables does not fit mini-buckets of z={z}",
                    z=z,
                    arity=len(scope),
                )
    unions: List[set] = []
    members: List[List[int]] = []
    for index in sorted(range(len(scopes)), key=lambda i: -len(scopes[i])):
        scope = scopes[index]
        for union, chosen in zip(unions, members):
            if z is None or len(union.union(scope)) <= z:
                union.update(scope)
                chosen.append(index)
                break
        else:
            unions.append(set(scope))
            members.append([index])
    minis = []
    for union, chosen in zip(unions, members):
        scope = ordering.sort(union)
        minis.append(MiniBucket(scope, sorted(chosen), prod(domains[v] for v in scope)))
    return minis


@dataclass
class BucketPlan:
    variable: int
    minis: List[MiniBucket]

    @property
    def rows(self) -> int:
        return sum(mini.rows for mini in self.minis)


@dataclass(frozen=True)
class _PlannedScope:
    scope: Tuple[int, ...]


def plan_buckets(
    problem: Problem,
    ordering: Ordering,
    z: Optional[int] = None,
    budget_rows: Optional[int] = DEFAULT_BUDGET_ROWS,
) -> List[BucketPlan]:
    """Run the elimination on scopes only, in processing order (ordering tail first).

    Aggregated tables stay alive for the forward pass, so the budget covers their running
    total: MemoryBudgetExceeded names the first bucket that takes the total past
    ``budget_rows``. Nothing is allocated.
    """
    pending: Dict[int, List[_PlannedScope]] = defaultdict(list)
    for f in problem.functions:
        if f.scope:
            scope = ordering.sort(f.scope)
            pending[scope[-1]].append(_PlannedScope(scope))
    plans = []
    retained = 0
    for v in reversed(ordering.order):
        minis = partition_bucket(pending.pop(v, []), z, problem.domains, ordering)
        plan = BucketPlan(v, minis)
        retained += plan.rows
        if budget_rows is not None and retained > budget_rows:
            raise MemoryBudgetExceeded(variable=v, rows=retained, budget_rows=budget_rows)
        for mini in minis:
            if len(mini.scope) > 1:
                out_scope = mini.scope[:-1]
                pending[out_scope[-1]].append(_PlannedScope(out_scope))
        plans.append(plan)
    return plans


@dataclass
class BucketRecord:
    variable: int
    minis: List[MiniBucket]
    # one aggregated table and one bucket function per mini-bucket
    aggregated: List[BucketTable]
    functions: List[BucketTable]


def process_bucket(
    variable: int,
    members: Sequence[BucketTable],
    z: Optional[int],
    domains: Sequence[int],
    ordering: Ordering,
    semiring: Semiring,
    backend: ExecutionBackend = SEQUENTIAL,
) -> BucketRecord:
    """Aggregate each mini-bucket of ``members`` and eliminate ``variable`` from it."""
    for table in members:
        if table.variable != variable:
            raise PreconditionError(f"Table over {table.scope} does not belong to bucket {variable}")
    minis = partition_bucket(members, z, domains, ordering)
    aggregated, functions = [], []
    for mini in minis:
        out = BucketTable.filled(mini.scope, domains, semiring.identity)
        for index in mini.members:
            aggregate_into(out, members[index], semiring, backend)
        aggregated.append(out)
        functions.append(eliminate_last(out, semiring, backend))
    logger.debug(
        f"Bucket {variable}: {len(members)} tables, {len(minis)} mini-buckets, "
        f"{sum(t.rows for t in aggregated)} rows"
    )
    return BucketRecord(variable, minis, aggregated, functions)


@dataclass
class EliminationTrace:
    buckets: Dict[int, BucketRecord] = field(default_factory=dict)
    # empty-scope values in the order they were combined
    constants: List[float] = field(default_factory=list)

    def aggregated(self) -> Dict[int, List[BucketTable]]:
        return {v: record.aggregated for v, record in self.buckets.items()}

    @property
    def max_table_rows(self) -> int:
        return max(
            (t.rows for record in self.buckets.values() for t in record.aggregated), default=0
        )


@dataclass
class Elimination:
    value: float
    assignment: List[int]
    trace: EliminationTrace
    stats: InferenceStats


def assign_forward(
    aggregated: Mapping[int, Sequence[BucketTable]],
    ordering: Ordering,
    semiring: Semiring,
    domains: Sequence[int],
) -> List[int]:
    """Assign variables head to tail, each to the best extension of the earlier ones."""
    values: Dict[int, int] = {}
    for v in ordering.order:
        values[v], _ = best_extension(aggregated.get(v, ()), v, values, semiring, domains[v])
    return [values[v] for v in range(len(domains))]


def check_ordering(problem: Problem, ordering: Optional[Ordering]) -> Ordering:
    if ordering is None:
        return default_ordering(build_primal_graph(problem))
    if len(ordering) != problem.n:
        raise PreconditionError(
            f"Ordering covers {len(ordering)} variables, problem has {problem.n}"
        )
    return ordering


def check_bound(problem: Problem, z: int) -> None:
    if z < 1 or z < problem.max_arity:
        raise InfeasibleBoundError(
            f"z={z} is below the largest function arity ({problem.max_arity})",
            z=z,
            arity=problem.max_arity,
        )


def original_tables(problem: Problem, ordering: Ordering) -> Tuple[List[float], Dict[int, List[BucketTable]]]:
    """Problem constants, and every other function as a table in its bucket."""
    constants = []
    buckets: Dict[int, List[BucketTable]] = defaultdict(list)
    for f in problem.functions:
        if not f.scope:
            constants.append(float(f.costs[0]))
            continue
        table = table_from_function(f, ordering, problem.domains)
        buckets[table.variable].append(table)
    return constants, buckets


def eliminate(
    problem: Problem,
    ordering: Optional[Ordering] = None,
    z: Optional[int] = None,
    backend: ExecutionBackend = SEQUENTIAL,
    *,
    budget_rows: Optional[int] = DEFAULT_BUDGET_ROWS,
) -> Elimination:
    """Shared driver of BE (``z=None``) and MBE.

    Each connected component is eliminated on its own and the component values are
    combined; the forward pass then runs once over the whole ordering.
    """
    semiring = problem.semiring
    ordering = check_ordering(problem, ordering)
    if z is not None:
        check_bound(problem, z)
    timings = {}

    start = time.perf_counter()
    plan_buckets(problem, ordering, z, budget_rows)
    graph = build_primal_graph(problem)
    components = connected_components(graph)
    timings["plan"] = time.perf_counter() - start

    start = time.perf_counter()
    constants, originals = original_tables(problem, ordering)
    trace = EliminationTrace(constants=list(constants))
    for component in components:
        produced: Dict[int, List[BucketTable]] = defaultdict(list)
        for v in reversed(ordering.restrict(component)):
            members = originals.get(v, []) + produced.pop(v, [])
            if not members:
                continue
            record = process_bucket(v, members, z, problem.domains, ordering, semiring, backend)
            trace.buckets[v] = record
            for fn in record.functions:
                if fn.scope:
                    produced[fn.variable].append(fn)
                else:
                    trace.constants.append(float(fn.chi[0]))
    value = semiring.combine_all(trace.constants)
    timings["eliminate"] = time.perf_counter() - start

    start = time.perf_counter()
    assignment = assign_forward(trace.aggregated(), ordering, semiring, problem.domains)
    timings["assign"] = time.perf_counter() - start

    stats = InferenceStats(
        induced_width=induced_width(graph, ordering),
        max_table_rows=trace.max_table_rows,
        phase_seconds=timings,
        backend=str(backend),
        mini_bucket_counts={v: len(r.minis) for v, r in trace.buckets.items()},
        components=len(components),
    )
    return Elimination(value, assignment, trace, stats)


def bucket_elimination(
    problem: Problem,
    ordering: Optional[Ordering] = None,
    backend: ExecutionBackend = SEQUENTIAL,
    *,
    budget_rows: Optional[int] = DEFAULT_BUDGET_ROWS,
) -> Solution:
    result = eliminate(problem, ordering, None, backend, budget_rows=budget_rows)
    return Solution(
        task=problem.semiring.task_name,
        algorithm="be",
        optimum=result.value,
        assignment=result.assignment,
        feasible=not problem.semiring.is_top(result.value),
        stats=result.stats,
    )


def bounds_from(
    problem: Problem, relaxation: float, assignment: List[int], z: int, **fields
) -> Bounds:
    """Pair the relaxed value with the value of ``assignment`` as lower/upper bounds."""
    semiring = problem.semiring
    achieved = evaluate(problem, assignment)
    lower, upper = (relaxation, achieved) if semiring.minimizes else (achieved, relaxation)
    return Bounds(
        task=semiring.task_name, z=z, lower=lower, upper=upper, assignment=assignment, **fields
    )


def mini_bucket_elimination(
    problem: Problem,
    ordering: Optional[Ordering],
    z: int,
    backend: ExecutionBackend = SEQUENTIAL,
    *,
    budget_rows: Optional[int] = DEFAULT_BUDGET_ROWS,
) -> Bounds:
    result = eliminate(problem, ordering, z, backend, budget_rows=budget_rows)
    return bounds_from(problem, result.value, result.assignment, z, stats=result.stats)
