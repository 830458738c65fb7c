"""
WCSP text format
----------------

::

    name n maxdomain nfunctions UB
    d_0 d_1 ... d_{n-1}
    arity v_1 ... v_arity default ntuples      (once per function)
    a_1 ... a_arity cost                       (ntuples lines)

Tuples not listed take the default cost; any cost ``>= UB`` is forbidden (Top).
"""
import logging
import math
import pathlib
from typing import Iterator, List, Tuple, Union

import numpy as np

from .models import ParseError, PreconditionError
from .problem import CostFunction, Problem
from .semiring import MIN_SUM
from .utils import prod

logger = logging.getLogger(__name__)


def _lines(text: str) -> Iterator[Tuple[int, List[str]]]:
    for number, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if tokens:
            yield number, tokens


class _Reader:
    def __init__(self, text: str):
        self._lines = _lines(text)
        self.line = 0

    def next(self, what: str) -> List[str]:
        try:
            self.line, tokens = next(self._lines)
        except StopIteration:
            raise ParseError(f"unexpected end of file, expected {what}", line=self.line + 1)
        return tokens

    def ints(self, tokens: List[str]) -> List[int]:
        try:
            return [int(tok) for tok in tokens]
        except ValueError as e:
            raise ParseError(f"expected integers: {e}", line=self.line) from e

    def cost(self, token: str) -> float:
        try:
            value = float(token)
        except ValueError as e:
            raise ParseError(f"bad cost {token!r}", line=self.line) from e
        if value < 0 or math.isnan(value):
            raise ParseError(f"costs must be non-negative, got {token}", line=self.line)
        return value


def parse_wcsp(text: str) -> Problem:
    reader = _Reader(text)
    header = reader.next("header")
    if len(header) != 5:
        raise ParseError("header must be 'name n maxdomain nfunctions UB'", line=reader.line)
    name = header[0]
    n, max_domain, n_functions = reader.ints(header[1:4])
    upper_bound = reader.cost(header[4])

    domains = reader.ints(reader.next("domain sizes"))
    if len(domains) != n:
        raise ParseError(f"expected {n} domain sizes, found {len(domains)}", line=reader.line)
    if any(d < 1 or d > max_domain for d in domains):
        raise ParseError(f"domain sizes must lie in 1..{max_domain}", line=reader.line)

    functions = []
    for _ in range(n_functions):
        tokens = reader.next("function header")
        arity = reader.ints(tokens[:1])[0]
        if arity < 0:
            raise ParseError(f"unsupported function arity {arity}", line=reader.line)
        if len(tokens) != arity + 3:
            raise ParseError(
                f"function header needs {arity + 3} fields, found {len(tokens)}", line=reader.line
            )
        scope = reader.ints(tokens[1:arity + 1])
        if any(not 0 <= v < n for v in scope) or len(set(scope)) != arity:
            raise ParseError(f"bad scope {scope}", line=reader.line)
        default = reader.cost(tokens[arity + 1])
        n_tuples = reader.ints(tokens[arity + 2:])[0]
        shape = tuple(domains[v] for v in scope)
        costs = np.full(prod(shape), default, dtype=np.float64)
        for _ in range(n_tuples):
            row = reader.next("tuple")
            if len(row) != arity + 1:
                raise ParseError(f"tuple needs {arity + 1} fields, found {len(row)}", line=reader.line)
            values = reader.ints(row[:arity])
            if any(not 0 <= a < d for a, d in zip(values, shape)):
                raise ParseError(f"tuple {values} out of domain", line=reader.line)
            costs[np.ravel_multi_index(tuple(values), shape) if arity else 0] = reader.cost(row[arity])
        costs[costs >= upper_bound] = math.inf
        functions.append(CostFunction(tuple(scope), costs))

    logger.debug(f"Parsed {name}: {n} variables, {len(functions)} functions, UB {upper_bound}")
    return Problem(
        domains=tuple(domains),
        functions=tuple(functions),
        semiring=MIN_SUM,
        name=name,
        upper_bound=upper_bound,
    )


def read_wcsp(path: Union[str, pathlib.Path]) -> Problem:
    return parse_wcsp(pathlib.Path(path).read_text())


def _format_cost(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def _token(name: str) -> str:
    return "_".join(name.split()) or "problem"


def finite_upper_bound(problem: Problem) -> float:
    """One more than the sum of every function's largest finite cost."""
    total = 0.0
    for f in problem.functions:
        finite = f.costs[np.isfinite(f.costs)]
        total += float(finite.max()) if len(finite) else 0.0
    return total + 1


def write_wcsp(problem: Problem) -> str:
    """Render a min-sum problem; Top is written as the upper bound."""
    if problem.semiring != MIN_SUM:
        raise PreconditionError("Only min-sum problems can be written as WCSP")
    upper_bound = finite_upper_bound(problem)
    if problem.upper_bound is not None and problem.upper_bound >= upper_bound:
        upper_bound = problem.upper_bound
    ub_text = _format_cost(upper_bound)

    lines = [
        f"{_token(problem.name)} {problem.n} {problem.max_domain} "
        f"{len(problem.functions)} {ub_text}",
        " ".join(str(d) for d in problem.domains),
    ]
    for f in problem.functions:
        costs = np.where(np.isinf(f.costs), upper_bound, f.costs)
        values, counts = np.unique(costs, return_counts=True)
        default = values[int(np.argmax(counts))]
        rows = np.flatnonzero(costs != default)
        lines.append(
            " ".join(
                [str(f.arity), *(str(v) for v in f.scope), _format_cost(default), str(len(rows))]
            )
        )
        shape = f.shape(problem.domains)
        for row in rows:
            tuple_ = np.unravel_index(int(row), shape) if shape else ()
            lines.append(" ".join([*(str(int(a)) for a in tuple_), _format_cost(costs[row])]))
    return "\n".join(lines) + "\n"
