"""
Random instance generators
--------------------------

Three WCSP topologies, each with one binary cost function per edge:

* ``random``: ``floor(n(n-1)p1)`` edges chosen uniformly (clamped to ``n(n-1)/2``),
  regenerated until the graph is connected;
* ``scalefree``: preferential attachment starting from a single edge, each new node
  attaching to two existing nodes, for ``2(n-2)+1`` edges in total;
* ``grid``: a ``side x side`` lattice (``n`` is the side length).

Costs are uniform integers in ``[0, cost_max]``; in every function exactly
``floor(p2 * cells)`` cells, chosen uniformly, are forbidden. The same configuration
always produces the same problem.

``bayes`` builds a random belief network over a DAG instead (see
:func:`generate_belief_network`).
"""
import dataclasses
import enum
import logging
import math
from fractions import Fraction
from typing import List, Tuple

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .models import GeneratorError
from .problem import BeliefNetwork, CostFunction, Problem
from .semiring import MIN_SUM
from .settings import DEFAULTS
from .wcsp import finite_upper_bound

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


class Topology(str, enum.Enum):
    random = "random"
    scalefree = "scalefree"
    grid = "grid"
    bayes = "bayes"


class PairCounting(str, enum.Enum):
    # floor(n(n-1)p1) edges
    ordered = "ordered"
    # floor(n(n-1)p1/2) edges
    unordered = "unordered"


class GeneratorConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    topology: Topology = Topology.random
    n: int = Field(10, ge=1)
    d: int = Field(2, ge=1)
    p1: float = Field(0.3, ge=0.0, le=1.0)
    p2: float = Field(0.5, ge=0.0, le=1.0)
    cost_max: int = Field(100, ge=0)
    seed: int = 0
    pair_counting: PairCounting = PairCounting.ordered
    max_retries: int = Field(DEFAULTS.max_retries, ge=1)
    # belief networks only
    max_parents: int = Field(2, ge=0)

    @property
    def name(self) -> str:
        return f"{self.topology.value}-n{self.n}-d{self.d}-s{self.seed}"


def floor_fraction(p: float, count: int) -> int:
    """``floor(p * count)`` on the decimal value of ``p`` (0.41 * 600 is 246, not 245)."""
    return math.floor(Fraction(str(p)) * count)


def random_edge_count(n: int, p1: float, pair_counting: PairCounting = PairCounting.ordered) -> int:
    pairs = n * (n - 1)
    if pair_counting == PairCounting.unordered:
        count = math.floor(Fraction(str(p1)) * pairs / 2)
    else:
        count = floor_fraction(p1, pairs)
    limit = n * (n - 1) // 2
    if count > limit:
        logger.warning(f"{count} edges requested on {n} nodes; clamping to {limit}")
        count = limit
    return count


def random_edges(config: GeneratorConfig, rng: np.random.Generator) -> List[Edge]:
    n = config.n
    if n < 2:
        raise GeneratorError("random topology needs at least 2 variables")
    m = random_edge_count(n, config.p1, config.pair_counting)
    if m < n - 1:
        raise GeneratorError(f"{m} edges cannot connect {n} variables (p1={config.p1})")
    for attempt in range(config.max_retries):
        graph = nx.gnm_random_graph(n, m, seed=int(rng.integers(2**31)))
        if nx.is_connected(graph):
            if attempt:
                logger.warning(f"Random graph connected after {attempt + 1} attempts")
            return _sorted_edges(graph.edges)
    raise GeneratorError(f"no connected graph with {m} edges after {config.max_retries} attempts")


def scale_free_edges(config: GeneratorConfig, rng: np.random.Generator) -> List[Edge]:
    """Preferential attachment from the single edge (0, 1), two links per new node."""
    n = config.n
    if n < 3:
        raise GeneratorError("scale-free topology needs at least 3 variables")
    edges = [(0, 1)]
    # each node appears once per incident edge, so uniform picks are degree-proportional
    endpoints = [0, 1]
    for v in range(2, n):
        targets: List[int] = []
        while len(targets) < 2:
            u = endpoints[int(rng.integers(len(endpoints)))]
            if u not in targets:
                targets.append(u)
        for u in targets:
            edges.append((u, v))
            endpoints.extend((u, v))
    return _sorted_edges(edges)


def grid_edges(config: GeneratorConfig) -> List[Edge]:
    side = config.n
    if side < 2:
        raise GeneratorError("grid topology needs a side of at least 2")
    graph = nx.grid_2d_graph(side, side)
    return _sorted_edges((r1 * side + c1, r2 * side + c2) for (r1, c1), (r2, c2) in graph.edges)


def _sorted_edges(edges) -> List[Edge]:
    return sorted((min(u, v), max(u, v)) for u, v in edges)


def random_costs(config: GeneratorConfig, rng: np.random.Generator, cells: int) -> np.ndarray:
    costs = rng.integers(0, config.cost_max + 1, size=cells).astype(np.float64)
    forbidden = floor_fraction(config.p2, cells)
    if forbidden:
        costs[rng.choice(cells, size=forbidden, replace=False)] = math.inf
    return costs


def generate(config: GeneratorConfig) -> Problem:
    rng = np.random.default_rng(config.seed)
    if config.topology == Topology.random:
        edges, n = random_edges(config, rng), config.n
    elif config.topology == Topology.scalefree:
        edges, n = scale_free_edges(config, rng), config.n
    elif config.topology == Topology.grid:
        edges, n = grid_edges(config), config.n**2
    else:
        raise GeneratorError(f"{config.topology.value} does not generate a WCSP")
    functions = tuple(CostFunction(edge, random_costs(config, rng, config.d**2)) for edge in edges)
    problem = Problem(domains=(config.d,) * n, functions=functions, semiring=MIN_SUM, name=config.name)
    logger.debug(f"Generated {config.name}: {n} variables, {len(edges)} edges")
    return dataclasses.replace(problem, upper_bound=finite_upper_bound(problem))


def generate_belief_network(config: GeneratorConfig) -> BeliefNetwork:
    """Random DAG over ``0..n-1`` (parents precede children) with Dirichlet-sampled CPTs."""
    rng = np.random.default_rng(config.seed)
    n, d = config.n, config.d
    cpts, children = [], []
    for child in range(n):
        k = int(rng.integers(0, min(config.max_parents, child) + 1))
        parents = sorted(int(p) for p in rng.choice(child, size=k, replace=False)) if k else []
        parent_rows = d ** len(parents)
        table = rng.dirichlet(np.ones(d), size=parent_rows).ravel()
        cpts.append(CostFunction((*parents, child), table))
        children.append(child)
    return BeliefNetwork(domains=(d,) * n, cpts=tuple(cpts), children=tuple(children), name=config.name)
