"""Exhaustive enumeration, used to check the elimination algorithms on small problems."""
import logging

import numpy as np

from .models import Solution, StateSpaceTooLarge
from .problem import Problem

logger = logging.getLogger(__name__)

DEFAULT_STATE_LIMIT = 10**8
ENUMERATION_CHUNK = 2**20


def brute_force(problem: Problem, *, limit: int = DEFAULT_STATE_LIMIT) -> Solution:
    """Best complete assignment; ties go to the lexicographically smallest one."""
    states = problem.state_space()
    if states > limit:
        raise StateSpaceTooLarge(f"{states} assignments exceed the enumeration limit of {limit}")
    semiring = problem.semiring
    best_value, best_state = None, 0
    for start in range(0, states, ENUMERATION_CHUNK):
        index = np.arange(start, min(start + ENUMERATION_CHUNK, states), dtype=np.int64)
        columns = np.unravel_index(index, problem.domains) if problem.n else ()
        totals = np.full(len(index), semiring.identity, dtype=np.float64)
        for f in problem.functions:
            if f.scope:
                rows = np.ravel_multi_index(tuple(columns[v] for v in f.scope), f.shape(problem.domains))
                semiring.combine(totals, f.costs[rows], out=totals)
            else:
                semiring.combine(totals, f.costs[0], out=totals)
        local = semiring.argbest(totals)
        if best_value is None or semiring.better(totals[local], best_value):
            best_value, best_state = float(totals[local]), start + local
    assignment = [int(a) for a in np.unravel_index(best_state, problem.domains)] if problem.n else []
    logger.debug(f"Enumerated {states} assignments of {problem.name or 'problem'}")
    return Solution(
        task=semiring.task_name,
        algorithm="oracle",
        optimum=best_value,
        assignment=assignment,
        feasible=not semiring.is_top(best_value),
        stats=None,
    )
