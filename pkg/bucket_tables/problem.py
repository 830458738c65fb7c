"""
Problem model
-------------

WCSPs and belief networks over discrete variables ``0..n-1``. Every cost function
stores its table flat, in lexicographic row order of its scope: the first scope
variable is the most significant digit, so row ``r`` of a scope with domain sizes
``(d0, d1, d2)`` is the tuple ``np.unravel_index(r, (d0, d1, d2))``.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .models import PreconditionError
from .semiring import MAX_PRODUCT, MIN_SUM, Semiring, TaskKind
from .utils import prod

logger = logging.getLogger(__name__)

Assignment = Dict[int, int]


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64).ravel()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class CostFunction:
    scope: Tuple[int, ...]
    costs: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "scope", tuple(int(v) for v in self.scope))
        object.__setattr__(self, "costs", _frozen_array(self.costs))
        if len(set(self.scope)) != len(self.scope):
            raise PreconditionError(f"Scope {self.scope} has duplicate variables")

    @property
    def arity(self) -> int:
        return len(self.scope)

    def shape(self, domains: Sequence[int]) -> Tuple[int, ...]:
        return tuple(domains[v] for v in self.scope)

    def row_of(self, values: Mapping[int, int], domains: Sequence[int]) -> int:
        """Lexicographic rank of the scope tuple picked out of ``values``."""
        row = 0
        for v in self.scope:
            row = row * domains[v] + values[v]
        return row

    def lookup(self, values: Mapping[int, int], domains: Sequence[int]) -> float:
        return float(self.costs[self.row_of(values, domains)])


@dataclass(frozen=True)
class Problem:
    """``<X, D, C>`` plus the task semiring."""

    domains: Tuple[int, ...]
    functions: Tuple[CostFunction, ...] = ()
    semiring: Semiring = MIN_SUM
    name: str = ""
    upper_bound: Optional[float] = None
    # original variable id of each variable (set after conditioning on evidence)
    labels: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "domains", tuple(int(d) for d in self.domains))
        object.__setattr__(self, "functions", tuple(self.functions))
        for var, size in enumerate(self.domains):
            if size < 1:
                raise PreconditionError(f"Variable {var} has empty domain")
        n = len(self.domains)
        for index, f in enumerate(self.functions):
            for v in f.scope:
                if not 0 <= v < n:
                    raise PreconditionError(f"Function {index} mentions unknown variable {v}")
            expected = prod(f.shape(self.domains))
            if len(f.costs) != expected:
                raise PreconditionError(
                    f"Function {index} over {f.scope} has {len(f.costs)} costs, expected {expected}"
                )
            if self.semiring.kind == TaskKind.MIN_SUM and np.any(f.costs < 0):
                raise PreconditionError(f"Function {index} over {f.scope} has negative costs")
        if self.labels is not None and len(self.labels) != n:
            raise PreconditionError("labels must name every variable")

    @property
    def n(self) -> int:
        return len(self.domains)

    @property
    def max_arity(self) -> int:
        return max((f.arity for f in self.functions), default=0)

    @property
    def max_domain(self) -> int:
        return max(self.domains, default=1)

    def state_space(self) -> int:
        return prod(self.domains)


@dataclass(frozen=True)
class BeliefNetwork:
    """Variables, domains and CPTs ``Pr(x_i | pa_i)`` with scope ``{x_i} U pa_i``."""

    domains: Tuple[int, ...]
    cpts: Tuple[CostFunction, ...]
    children: Tuple[int, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "domains", tuple(int(d) for d in self.domains))
        object.__setattr__(self, "cpts", tuple(self.cpts))
        object.__setattr__(self, "children", tuple(int(c) for c in self.children))
        if len(self.cpts) != len(self.children):
            raise PreconditionError("Every CPT needs exactly one child variable")
        for cpt, child in zip(self.cpts, self.children):
            if child not in cpt.scope:
                raise PreconditionError(f"Child {child} missing from CPT scope {cpt.scope}")
        # reuse Problem's structural checks
        Problem(self.domains, self.cpts, semiring=MAX_PRODUCT)

    @property
    def n(self) -> int:
        return len(self.domains)

    def check_normalized(self, tol: float = 1e-9) -> List[int]:
        """Indices of CPTs whose rows don't sum to 1 (within ``tol``) over the child."""
        bad = []
        for index, (cpt, child) in enumerate(zip(self.cpts, self.children)):
            table = cpt.costs.reshape(cpt.shape(self.domains))
            sums = table.sum(axis=cpt.scope.index(child))
            if not np.allclose(sums, 1.0, rtol=0.0, atol=tol):
                bad.append(index)
        return bad

    def joint(self, values: Mapping[int, int]) -> float:
        p = 1.0
        for cpt in self.cpts:
            p *= cpt.lookup(values, self.domains)
        return p


def as_assignment(values: Union[Mapping[int, int], Sequence[int]]) -> Assignment:
    if isinstance(values, Mapping):
        return {int(k): int(v) for k, v in values.items()}
    return {var: int(v) for var, v in enumerate(values)}


def validate_assignment(
    domains: Sequence[int], values: Union[Mapping[int, int], Sequence[int]], *, complete=False
) -> Assignment:
    assignment = as_assignment(values)
    for var, value in assignment.items():
        if not 0 <= var < len(domains):
            raise PreconditionError(f"Unknown variable {var}")
        if not 0 <= value < domains[var]:
            raise PreconditionError(
                f"Value {value} out of domain for variable {var} (size {domains[var]})"
            )
    if complete:
        missing = [v for v in range(len(domains)) if v not in assignment]
        if missing:
            raise PreconditionError(f"Assignment is missing variables {missing}")
    return assignment


def evaluate(problem: Problem, assignment) -> float:
    """Combine the cost of a complete assignment over all functions of ``problem``."""
    values = validate_assignment(problem.domains, assignment, complete=True)
    semiring = problem.semiring
    total = semiring.identity
    for f in problem.functions:
        total = float(semiring.combine(total, f.lookup(values, problem.domains)))
    return total


def condition_on_evidence(
    bn: BeliefNetwork, evidence=None, *, semiring: Semiring = MAX_PRODUCT
) -> Problem:
    """Slice evidence out of every CPT and drop the observed variables.

    The result is a max-product problem over the free variables only; ``labels`` maps the
    new variable ids back to ``bn``'s ids. A CPT whose scope is fully observed becomes a
    constant (scope-empty) function.
    """
    if semiring.kind != TaskKind.MAX_PRODUCT:
        raise PreconditionError("Evidence conditioning produces max-product problems")
    evidence = validate_assignment(bn.domains, evidence or {})
    free = [v for v in range(bn.n) if v not in evidence]
    new_id = {v: i for i, v in enumerate(free)}
    functions = []
    for cpt in bn.cpts:
        table = cpt.costs.reshape(cpt.shape(bn.domains))
        index = tuple(evidence[v] if v in evidence else slice(None) for v in cpt.scope)
        sliced = np.asarray(table[index], dtype=np.float64)
        scope = tuple(new_id[v] for v in cpt.scope if v not in evidence)
        functions.append(CostFunction(scope, semiring.from_probability(sliced.ravel())))
    logger.debug(f"Conditioned {bn.name or 'network'} on {len(evidence)} evidence variables")
    return Problem(
        domains=tuple(bn.domains[v] for v in free),
        functions=tuple(functions),
        semiring=semiring,
        name=bn.name,
        labels=tuple(free),
    )
