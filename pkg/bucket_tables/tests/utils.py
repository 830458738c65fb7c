"""Slow, obviously-correct versions of the kernels to compare against."""
import itertools
from typing import Dict, Sequence

import numpy as np

from bucket_tables.problem import BeliefNetwork, Problem
from bucket_tables.tables import BucketTable


def tuples(scope: Sequence[int], domains: Sequence[int]):
    """Every assignment of ``scope`` as a dict, in lexicographic row order."""
    for values in itertools.product(*(range(domains[v]) for v in scope)):
        yield dict(zip(scope, values))


def nested_loop_best(problem: Problem):
    """(best value, all assignments reaching it) by plain enumeration."""
    semiring = problem.semiring
    best, winners = None, []
    for values in tuples(range(problem.n), problem.domains):
        total = semiring.identity
        for f in problem.functions:
            total = float(semiring.combine(total, f.lookup(values, problem.domains)))
        if best is None or semiring.better(total, best):
            best, winners = total, [values]
        elif total == best:
            winners.append(values)
    return best, [[w[v] for v in range(problem.n)] for w in winners]


def matching_row(scope_in, scope_out, domains, r_out) -> int:
    """Row of ``scope_in`` agreeing with row ``r_out`` of ``scope_out``, found by search."""
    target = list(tuples(scope_out, domains))[r_out]
    for r_in, values in enumerate(tuples(scope_in, domains)):
        if all(target[v] == values[v] for v in scope_in):
            return r_in
    raise AssertionError(f"no row of {scope_in} matches {target}")


def join_tables(tables: Sequence[BucketTable], scope, domains, semiring) -> np.ndarray:
    """Combine ``tables`` over ``scope`` one tuple at a time."""
    result = []
    for values in tuples(scope, domains):
        total = semiring.identity
        for table in tables:
            total = float(semiring.combine(total, table.lookup(values)))
        result.append(total)
    return np.array(result)


def group_eliminate(table: BucketTable, semiring) -> Dict[tuple, float]:
    """Marginalise the last variable by grouping tuples on the remaining ones."""
    domains = dict(zip(table.scope, table.shape))
    groups: Dict[tuple, list] = {}
    for values in tuples(table.scope, domains):
        key = tuple(values[v] for v in table.scope[:-1])
        groups.setdefault(key, []).append(table.lookup(values))
    return {key: float(semiring.marginalize(np.array(vals))) for key, vals in groups.items()}


def best_joint(bn: BeliefNetwork, evidence=None):
    """Most probable complete assignment consistent with ``evidence``."""
    evidence = evidence or {}
    best, best_values = -1.0, None
    for values in tuples(range(bn.n), bn.domains):
        if any(values[v] != value for v, value in evidence.items()):
            continue
        p = bn.joint(values)
        if p > best:
            best, best_values = p, values
    return best, best_values
