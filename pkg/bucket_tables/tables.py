"""
Bucket tables and the aggregate/eliminate kernels
-------------------------------------------------

A :class:`BucketTable` is a scope sorted by ordering priority plus a flat float64 array
``chi``; row ``r`` holds the value of the scope tuple with lexicographic rank ``r``. The
variable to eliminate is always last in the scope, so the rows sharing a prefix are
consecutive and elimination is a reduction over fixed-size groups.
"""
import logging
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Tuple

import numpy as np

from .backends import SEQUENTIAL, ExecutionBackend
from .graph import Ordering
from .indexing import build_index_map, map_rows
from .models import PreconditionError
from .problem import CostFunction
from .semiring import Semiring
from .utils import prod

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class BucketTable:
    scope: Tuple[int, ...]
    shape: Tuple[int, ...]
    chi: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.scope = tuple(int(v) for v in self.scope)
        self.shape = tuple(int(d) for d in self.shape)
        if len(self.scope) != len(self.shape):
            raise PreconditionError("scope and shape must have the same length")
        if len(self.chi) != prod(self.shape):
            raise PreconditionError(
                f"Table over {self.scope} has {len(self.chi)} rows, expected {prod(self.shape)}"
            )

    @classmethod
    def filled(cls, scope: Sequence[int], domains: Sequence[int], value: float) -> "BucketTable":
        shape = tuple(domains[v] for v in scope)
        return cls(tuple(scope), shape, np.full(prod(shape), value, dtype=np.float64))

    @property
    def rows(self) -> int:
        return len(self.chi)

    @property
    def variable(self) -> Optional[int]:
        """The variable this table eliminates (its last scope variable)."""
        return self.scope[-1] if self.scope else None

    def row_of(self, values: Mapping[int, int]) -> int:
        row = 0
        for v, d in zip(self.scope, self.shape):
            row = row * d + values[v]
        return row

    def lookup(self, values: Mapping[int, int]) -> float:
        return float(self.chi[self.row_of(values)])

    def equals(self, other: "BucketTable") -> bool:
        """Same scope and bit-identical rows."""
        return self.scope == other.scope and np.array_equal(self.chi, other.chi)


def table_from_function(
    f: CostFunction, ordering: Ordering, domains: Sequence[int]
) -> BucketTable:
    """Reorder ``f``'s scope by ordering priority and permute its rows to match."""
    scope = ordering.sort(f.scope)
    shape = f.shape(domains)
    if scope == f.scope:
        return BucketTable(scope, shape, f.costs.copy())
    axes = [f.scope.index(v) for v in scope]
    chi = np.ascontiguousarray(f.costs.reshape(shape).transpose(axes)).ravel()
    return BucketTable(scope, tuple(shape[a] for a in axes), chi)


def aggregate_into(
    out: BucketTable,
    table: BucketTable,
    semiring: Semiring,
    backend: ExecutionBackend = SEQUENTIAL,
) -> BucketTable:
    """``out.chi[r] = combine(out.chi[r], table.chi[map_row(r)])`` for every row of ``out``."""
    domains = dict(zip(out.scope, out.shape))
    for v, d in zip(table.scope, table.shape):
        if domains.get(v, d) != d:
            raise PreconditionError(f"Variable {v} has domain {d} in one table, {domains[v]} in the other")
    index_map = build_index_map(table.scope, out.scope, domains)

    def work(start, stop):
        target = out.chi[start:stop]
        if index_map.is_identity:
            semiring.combine(target, table.chi[start:stop], out=target)
        else:
            rows = map_rows(np.arange(start, stop, dtype=np.int64), index_map)
            semiring.combine(target, table.chi[rows], out=target)

    backend.run(work, out.rows)
    return out


def eliminate_last(
    table: BucketTable, semiring: Semiring, backend: ExecutionBackend = SEQUENTIAL
) -> BucketTable:
    """Marginalise the last scope variable away over groups of consecutive rows."""
    if not table.scope:
        raise PreconditionError("Cannot eliminate from a table with an empty scope")
    d = table.shape[-1]
    result = np.empty(table.rows // d, dtype=np.float64)

    def work(start, stop):
        groups = table.chi[start * d:stop * d].reshape(-1, d)
        semiring.marginalize(groups, axis=1, out=result[start:stop])

    backend.run(work, len(result))
    return BucketTable(table.scope[:-1], table.shape[:-1], result)


def best_extension(
    tables: Sequence[BucketTable],
    variable: int,
    values: Mapping[int, int],
    semiring: Semiring,
    domain: int,
) -> Tuple[int, float]:
    """Best value of ``variable`` given ``values`` for every other variable of ``tables``.

    Combines the matching slice of every table (all of which end with ``variable``).
    Ties go to the smallest value; with no tables the answer is value 0.
    """
    combined = np.full(domain, semiring.identity, dtype=np.float64)
    for table in tables:
        if table.variable != variable:
            raise PreconditionError(f"Table over {table.scope} does not end with {variable}")
        base = 0
        for v, d in zip(table.scope[:-1], table.shape[:-1]):
            base = base * d + values[v]
        semiring.combine(combined, table.chi[base * domain:(base + 1) * domain], out=combined)
    best = semiring.argbest(combined)
    return best, float(combined[best])
