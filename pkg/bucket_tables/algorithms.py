"""
Registered algorithms
---------------------

Every entry point takes the problem first and string/number options after it, so the
CLI, benchmark suites and run records can call them uniformly through the registry.
"""
import logging
import pathlib
from typing import Optional

from . import get_registry
from .backends import parse_backend
from .dcop import MeasuredCostModel, RowCostModel, run_adpop, run_dpop, write_message_log
from .graph import (
    Ordering,
    build_primal_graph,
    build_pseudo_forest,
    default_ordering,
    forest_ordering,
    min_degree_ordering,
    read_ordering,
)
from .inference import budget_rows, bucket_elimination, mini_bucket_elimination
from .models import Bounds, DcopReport, ParseError, Solution
from .oracle import brute_force
from .problem import Problem
from .settings import DEFAULTS

logger = logging.getLogger(__name__)

DEGREE = "degree"
# the same ordering under its longer name
DEGREE_ALIAS = "paper-degree"
MIN_DEGREE = "min-degree"
PSEUDO_TREE = "pseudo-tree"


def resolve_ordering(problem: Problem, ordering: str) -> Ordering:
    """``degree`` (or ``paper-degree``), ``min-degree``, ``pseudo-tree`` or the path of a one-line
    permutation file.

    ``pseudo-tree`` is the DFS order of the pseudo-forest built on the degree ordering.
    A missing or malformed ordering file raises ParseError.
    """
    graph = build_primal_graph(problem)
    if ordering in (DEGREE, DEGREE_ALIAS):
        return default_ordering(graph)
    if ordering == MIN_DEGREE:
        return min_degree_ordering(graph)
    if ordering == PSEUDO_TREE:
        return forest_ordering(build_pseudo_forest(graph, default_ordering(graph)))
    try:
        result = read_ordering(pathlib.Path(ordering))
    except OSError as e:
        raise ParseError(f"cannot read ordering file {ordering}: {e.strerror or e}") from e
    if len(result) != problem.n:
        raise ParseError(f"ordering file {ordering} has {len(result)} variables, expected {problem.n}")
    return result


def be(
    problem: Problem,
    *,
    ordering: str = DEGREE,
    backend: str = "seq",
    budget_gib: float = DEFAULTS.budget_gib,
    chunk_rows: int = DEFAULTS.chunk_rows,
) -> Solution:
    """Exact bucket elimination.

    Args:
        ordering: degree, min-degree, pseudo-tree or an ordering file
        backend: seq, par or par:k
        budget_gib: memory budget for bucket tables
        chunk_rows: rows per kernel chunk
    """
    return bucket_elimination(
        problem,
        resolve_ordering(problem, ordering),
        parse_backend(backend, chunk_rows=chunk_rows),
        budget_rows=budget_rows(budget_gib),
    )


def mbe(
    problem: Problem,
    *,
    z: int,
    ordering: str = DEGREE,
    backend: str = "seq",
    budget_gib: float = DEFAULTS.budget_gib,
    chunk_rows: int = DEFAULTS.chunk_rows,
) -> Bounds:
    """Mini-bucket elimination with mini-buckets of at most z variables.

    Args:
        z: largest scope union of a mini-bucket
        ordering: degree, min-degree, pseudo-tree or an ordering file
        backend: seq, par or par:k
        budget_gib: memory budget for bucket tables
        chunk_rows: rows per kernel chunk
    """
    return mini_bucket_elimination(
        problem,
        resolve_ordering(problem, ordering),
        int(z),
        parse_backend(backend, chunk_rows=chunk_rows),
        budget_rows=budget_rows(budget_gib),
    )


def _dcop_options(problem, ordering, backend, budget_gib, chunk_rows, latency, cost_unit, measured):
    forest = build_pseudo_forest(build_primal_graph(problem), resolve_ordering(problem, ordering))
    options = dict(
        cost_model=MeasuredCostModel() if measured else RowCostModel(cost_unit),
        latency=latency,
        budget_rows=budget_rows(budget_gib),
    )
    return forest, parse_backend(backend, chunk_rows=chunk_rows), options


def _save_log(message_log: Optional[str], log) -> None:
    if message_log:
        with open(message_log, "w") as fp:
            count = write_message_log(log, fp)
        logger.info(f"Wrote {count} messages to {message_log}")


def dpop(
    problem: Problem,
    *,
    ordering: str = DEGREE,
    backend: str = "seq",
    budget_gib: float = DEFAULTS.budget_gib,
    chunk_rows: int = DEFAULTS.chunk_rows,
    latency: float = DEFAULTS.latency,
    cost_unit: float = 1.0,
    measured: bool = False,
    message_log: Optional[str] = None,
) -> DcopReport:
    """Simulated DPOP on the DFS pseudo-tree of the chosen ordering.

    Args:
        ordering: degree, min-degree, pseudo-tree or an ordering file (picks the pseudo-tree roots)
        backend: seq, par or par:k
        budget_gib: memory budget for bucket tables
        chunk_rows: rows per kernel chunk
        latency: delay added to every message
        cost_unit: simulated time per aggregated row
        measured: use measured compute time instead of rows
        message_log: write the message log (JSON lines) here
    """
    forest, engine, options = _dcop_options(
        problem, ordering, backend, budget_gib, chunk_rows, latency, cost_unit, measured
    )
    log = [] if message_log else None
    solution, metrics = run_dpop(problem, forest, engine, message_log=log, **options)
    _save_log(message_log, log)
    return DcopReport(result=solution.model_dump(mode="json"), metrics=metrics)


def adpop(
    problem: Problem,
    *,
    z: int,
    ordering: str = DEGREE,
    backend: str = "seq",
    budget_gib: float = DEFAULTS.budget_gib,
    chunk_rows: int = DEFAULTS.chunk_rows,
    latency: float = DEFAULTS.latency,
    cost_unit: float = 1.0,
    measured: bool = False,
    message_log: Optional[str] = None,
) -> DcopReport:
    """Simulated ADPOP: DPOP shipping one table per mini-bucket of at most z variables.

    Args:
        z: largest scope union of a mini-bucket
        ordering: degree, min-degree, pseudo-tree or an ordering file (picks the pseudo-tree roots)
        backend: seq, par or par:k
        budget_gib: memory budget for bucket tables
        chunk_rows: rows per kernel chunk
        latency: delay added to every message
        cost_unit: simulated time per aggregated row
        measured: use measured compute time instead of rows
        message_log: write the message log (JSON lines) here
    """
    forest, engine, options = _dcop_options(
        problem, ordering, backend, budget_gib, chunk_rows, latency, cost_unit, measured
    )
    log = [] if message_log else None
    bounds, metrics = run_adpop(problem, forest, int(z), engine, message_log=log, **options)
    _save_log(message_log, log)
    return DcopReport(result=bounds.model_dump(mode="json"), metrics=metrics)


def oracle(problem: Problem, *, limit: int = DEFAULTS.state_limit) -> Solution:
    """Exhaustive enumeration.

    Args:
        limit: refuse problems with more assignments than this
    """
    return brute_force(problem, limit=limit)


registry = get_registry()
for _func in (be, mbe, dpop, adpop, oracle):
    registry.add(_func)
