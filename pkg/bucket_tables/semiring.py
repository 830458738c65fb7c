"""
Cost semirings
--------------

A task is described by how costs are combined (aggregation) and how a variable is
marginalised away (elimination):

* min-sum (WCSP): combine with ``+``, marginalise with ``min``; Top is ``+inf``.
* max-product (MPE): combine with ``*``, marginalise with ``max``; Top ("forbidden")
  is probability 0. By default values are kept as logarithms, so combine is ``+`` and
  Top is ``-inf``.

All values live in float64 arrays. Integer costs from WCSP files are exact up to 2**53.
"""
import enum
import math
from dataclasses import dataclass

import numpy as np

from .models import TaskName


class TaskKind(enum.Enum):
    MIN_SUM = "min-sum"
    MAX_PRODUCT = "max-product"


@dataclass(frozen=True)
class Semiring:
    kind: TaskKind = TaskKind.MIN_SUM
    log_domain: bool = True

    def __post_init__(self):
        if self.kind == TaskKind.MIN_SUM and not self.log_domain:
            # min-sum has no linear/log distinction; normalise so equality is meaningful
            object.__setattr__(self, "log_domain", True)

    @property
    def task_name(self) -> TaskName:
        return TaskName(self.kind.value)

    @property
    def minimizes(self) -> bool:
        return self.kind == TaskKind.MIN_SUM

    @property
    def additive(self) -> bool:
        return self.kind == TaskKind.MIN_SUM or self.log_domain

    @property
    def identity(self) -> float:
        return 0.0 if self.additive else 1.0

    @property
    def top(self) -> float:
        if self.kind == TaskKind.MIN_SUM:
            return math.inf
        return -math.inf if self.log_domain else 0.0

    def combine(self, a, b, out=None):
        if self.additive:
            return np.add(a, b, out=out)
        return np.multiply(a, b, out=out)

    def combine_all(self, values) -> float:
        total = self.identity
        for v in values:
            total = float(self.combine(total, v))
        return total

    def marginalize(self, values, axis=None, out=None):
        if self.minimizes:
            return np.min(values, axis=axis, out=out)
        return np.max(values, axis=axis, out=out)

    def argbest(self, values) -> int:
        """Index of the best value; ties go to the smallest index."""
        if self.minimizes:
            return int(np.argmin(values))
        return int(np.argmax(values))

    def better(self, a: float, b: float) -> bool:
        return a < b if self.minimizes else a > b

    def is_top(self, value) -> bool:
        return bool(value == self.top)

    def from_probability(self, p):
        p = np.asarray(p, dtype=np.float64)
        if self.kind == TaskKind.MIN_SUM:
            raise TypeError("min-sum costs are not probabilities")
        if not self.log_domain:
            return p
        with np.errstate(divide="ignore"):
            return np.log(p)

    def to_probability(self, value) -> float:
        if self.kind == TaskKind.MIN_SUM:
            raise TypeError("min-sum costs are not probabilities")
        return float(math.exp(value)) if self.log_domain else float(value)

    def close(self, a: float, b: float, rel_tol: float = 1e-9) -> bool:
        if a == b:
            return True
        return math.isclose(a, b, rel_tol=rel_tol, abs_tol=rel_tol)

    def __str__(self):
        if self.kind == TaskKind.MAX_PRODUCT:
            return f"{self.kind.value}({'log' if self.log_domain else 'linear'})"
        return self.kind.value


MIN_SUM = Semiring(TaskKind.MIN_SUM)
MAX_PRODUCT = Semiring(TaskKind.MAX_PRODUCT, log_domain=True)
MAX_PRODUCT_LINEAR = Semiring(TaskKind.MAX_PRODUCT, log_domain=False)
