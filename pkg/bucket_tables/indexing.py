"""
Row index maps
--------------

Maps a row of an output table to the row of an input table whose tuple agrees with it
on the shared variables, using only integer stride arithmetic. With ``s`` input
variables, ``m`` output variables and ``phi`` giving the output position of each input
position (all 0-based)::

    mul[k] = prod(D_in[k+1:])
    div[k] = prod(D_out[phi[k]+1:])
    mod[k] = D_in[k]

    r_in = sum(mul[k] * ((r_out // div[k]) % mod[k]) for k < s-1) + r_out % mod[s-1]

The last input variable must be the last output variable, so its digit is the lowest
one in both rows.
"""
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .models import PreconditionError
from .utils import prod


@dataclass(frozen=True)
class IndexMap:
    mul: Tuple[int, ...]
    div: Tuple[int, ...]
    mod: Tuple[int, ...]
    # output position of each input scope position
    phi: Tuple[int, ...]
    in_rows: int
    out_rows: int

    @property
    def s(self) -> int:
        return len(self.mod)

    @property
    def is_identity(self) -> bool:
        return self.in_rows == self.out_rows


def build_index_map(
    scope_in: Sequence[int], scope_out: Sequence[int], domains: Sequence[int]
) -> IndexMap:
    """Stride arrays mapping ``scope_out`` rows onto ``scope_in`` rows.

    ``scope_in`` must be a subsequence of ``scope_out`` and both must end with the same
    variable.
    """
    scope_in, scope_out = tuple(scope_in), tuple(scope_out)
    if not scope_in or not scope_out:
        raise PreconditionError("Index maps need non-empty scopes")
    if scope_in[-1] != scope_out[-1]:
        raise PreconditionError(
            f"Last variable differs: {scope_in[-1]} (input) vs {scope_out[-1]} (output)"
        )
    phi = []
    j = 0
    for var in scope_in:
        while j < len(scope_out) and scope_out[j] != var:
            j += 1
        if j == len(scope_out):
            raise PreconditionError(f"Scope {scope_in} is not a subsequence of {scope_out}")
        phi.append(j)
        j += 1

    d_in = [domains[v] for v in scope_in]
    d_out = [domains[v] for v in scope_out]
    s = len(scope_in)
    mul = tuple(prod(d_in[k + 1:]) for k in range(s - 1))
    div = tuple(prod(d_out[phi[k] + 1:]) for k in range(s - 1))
    return IndexMap(
        mul=mul,
        div=div,
        mod=tuple(d_in),
        phi=tuple(phi),
        in_rows=prod(d_in),
        out_rows=prod(d_out),
    )


def map_row(r_out: int, index_map: IndexMap) -> int:
    r_in = r_out % index_map.mod[-1]
    for mul, div, mod in zip(index_map.mul, index_map.div, index_map.mod):
        r_in += mul * ((r_out // div) % mod)
    return r_in


def map_rows(rows: np.ndarray, index_map: IndexMap) -> np.ndarray:
    """Vectorised :func:`map_row` over an int64 array of output rows."""
    rows = np.asarray(rows, dtype=np.int64)
    if index_map.is_identity:
        return rows
    result = rows % index_map.mod[-1]
    for mul, div, mod in zip(index_map.mul, index_map.div, index_map.mod):
        result += mul * ((rows // div) % mod)
    return result
