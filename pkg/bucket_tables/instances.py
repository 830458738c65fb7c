import logging
import pathlib
from typing import Optional, Union

from .generators import GeneratorConfig, Topology, generate, generate_belief_network
from .models import ParseError
from .problem import Problem, condition_on_evidence
from .semiring import MAX_PRODUCT, MAX_PRODUCT_LINEAR
from .uai import read_uai
from .wcsp import read_wcsp

logger = logging.getLogger(__name__)


def load_problem(
    path: Union[str, pathlib.Path],
    evidence: Union[str, pathlib.Path, None] = None,
    *,
    linear: bool = False,
) -> Problem:
    """Read a ``.wcsp`` file, or a ``.uai`` network conditioned on an optional evidence file."""
    path = pathlib.Path(path)
    if path.suffix.lower() == ".uai":
        bn, observed = read_uai(path, evidence)
        semiring = MAX_PRODUCT_LINEAR if linear else MAX_PRODUCT
        problem = condition_on_evidence(bn, observed, semiring=semiring)
        logger.debug(f"{path.name}: {bn.n} variables, {len(observed)} observed")
        return problem
    if evidence is not None:
        raise ParseError(f"evidence only applies to .uai networks, not {path.name}")
    return read_wcsp(path)


def problem_from_config(config: GeneratorConfig) -> Problem:
    if config.topology == Topology.bayes:
        bn = generate_belief_network(config)
        return condition_on_evidence(bn, {})
    return generate(config)


def full_assignment(problem: Problem, assignment, evidence) -> dict:
    """Map a conditioned problem's assignment back onto the original variable ids."""
    labels: Optional[tuple] = problem.labels
    values = dict(evidence or {})
    for var, value in enumerate(assignment):
        values[labels[var] if labels else var] = value
    return dict(sorted(values.items()))
