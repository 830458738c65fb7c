"""
UAI text format (BAYES networks)
--------------------------------

Whitespace-separated tokens: ``BAYES``, the number of variables, their domain sizes, the
number of functions, each function's scope (size then variable ids, child last), then
each table as an entry count followed by the entries in lexicographic order of the
declared scope. Evidence files hold a count followed by ``variable value`` pairs.
"""
import logging
import pathlib
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .models import ParseError
from .problem import Assignment, BeliefNetwork, CostFunction
from .utils import prod

logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-6


class _Tokens:
    def __init__(self, text: str):
        self._tokens = [
            (tok, number)
            for number, line in enumerate(text.splitlines(), start=1)
            for tok in line.split()
        ]
        self._pos = 0

    @property
    def line(self) -> int:
        if self._pos < len(self._tokens):
            return self._tokens[self._pos][1]
        return self._tokens[-1][1] + 1 if self._tokens else 1

    def exhausted(self) -> bool:
        return self._pos >= len(self._tokens)

    def word(self, what: str) -> str:
        if self.exhausted():
            raise ParseError(f"unexpected end of input, expected {what}", line=self.line)
        tok, _ = self._tokens[self._pos]
        self._pos += 1
        return tok

    def integer(self, what: str) -> int:
        line = self.line
        tok = self.word(what)
        try:
            return int(tok)
        except ValueError as e:
            raise ParseError(f"expected {what}, got {tok!r}", line=line) from e

    def number(self, what: str) -> float:
        line = self.line
        tok = self.word(what)
        try:
            return float(tok)
        except ValueError as e:
            raise ParseError(f"expected {what}, got {tok!r}", line=line) from e


def parse_uai(model: str, evidence: Optional[str] = None) -> Tuple[BeliefNetwork, Assignment]:
    tokens = _Tokens(model)
    line = tokens.line
    kind = tokens.word("network type").upper()
    if kind != "BAYES":
        raise ParseError(f"only BAYES networks are supported, got {kind}", line=line)
    n = tokens.integer("variable count")
    domains = [tokens.integer("domain size") for _ in range(n)]
    if any(d < 1 for d in domains):
        raise ParseError("domain sizes must be positive", line=tokens.line)
    n_functions = tokens.integer("function count")
    scopes: List[Tuple[int, ...]] = []
    for _ in range(n_functions):
        line = tokens.line
        size = tokens.integer("scope size")
        scope = tuple(tokens.integer("variable id") for _ in range(size))
        if size < 1 or any(not 0 <= v < n for v in scope) or len(set(scope)) != size:
            raise ParseError(f"bad CPT scope {scope}", line=line)
        scopes.append(scope)

    cpts = []
    for scope in scopes:
        line = tokens.line
        expected = prod(domains[v] for v in scope)
        count = tokens.integer("table size")
        if count != expected:
            raise ParseError(f"table over {scope} needs {expected} entries, got {count}", line=line)
        values = np.array([tokens.number("probability") for _ in range(count)])
        if np.any(values < 0):
            raise ParseError(f"negative probability in table over {scope}", line=line)
        cpts.append(CostFunction(scope, values))
    if not tokens.exhausted():
        raise ParseError("trailing tokens after the last table", line=tokens.line)

    bn = BeliefNetwork(domains=tuple(domains), cpts=tuple(cpts), children=tuple(s[-1] for s in scopes))
    for index in bn.check_normalized(NORMALIZATION_TOLERANCE):
        logger.warning(f"CPT {index} over {bn.cpts[index].scope} is not normalised")
    return bn, parse_evidence(evidence, domains) if evidence else {}


def parse_evidence(text: str, domains: List[int]) -> Assignment:
    tokens = _Tokens(text)
    count = tokens.integer("evidence count")
    result: Dict[int, int] = {}
    for _ in range(count):
        line = tokens.line
        var = tokens.integer("evidence variable")
        value = tokens.integer("evidence value")
        if not 0 <= var < len(domains) or not 0 <= value < domains[var]:
            raise ParseError(f"evidence {var}={value} is out of range", line=line)
        result[var] = value
    if not tokens.exhausted():
        raise ParseError("trailing tokens in evidence", line=tokens.line)
    return result


def read_uai(
    path: Union[str, pathlib.Path], evidence_path: Union[str, pathlib.Path, None] = None
) -> Tuple[BeliefNetwork, Assignment]:
    evidence = pathlib.Path(evidence_path).read_text() if evidence_path else None
    return parse_uai(pathlib.Path(path).read_text(), evidence)


def _child_last(cpt: CostFunction, child: int, domains) -> CostFunction:
    if cpt.scope[-1] == child:
        return cpt
    scope = tuple(v for v in cpt.scope if v != child) + (child,)
    axes = [cpt.scope.index(v) for v in scope]
    return CostFunction(scope, cpt.costs.reshape(cpt.shape(domains)).transpose(axes).ravel())


def write_uai(bn: BeliefNetwork) -> str:
    cpts = [_child_last(cpt, child, bn.domains) for cpt, child in zip(bn.cpts, bn.children)]
    lines = ["BAYES", str(bn.n), " ".join(str(d) for d in bn.domains), str(len(cpts))]
    for cpt in cpts:
        lines.append(" ".join(str(v) for v in (cpt.arity, *cpt.scope)))
    for cpt in cpts:
        lines.append("")
        lines.append(str(len(cpt.costs)))
        lines.append(" ".join(repr(float(p)) for p in cpt.costs))
    return "\n".join(lines) + "\n"


def write_evidence(evidence: Assignment) -> str:
    pairs = " ".join(f"{var} {value}" for var, value in sorted(evidence.items()))
    return f"{len(evidence)} {pairs}".rstrip() + "\n"
