"""
Simulated DPOP / ADPOP
----------------------

One agent per variable, arranged on a DFS pseudo-tree. During the UTIL phase an agent
waits for all of its children, processes its bucket (its own functions plus the tables
received that mention its variable) and sends the resulting tables, together with the
received tables that don't mention its variable, to its parent. The root picks its
value and the VALUE phase pushes assignments back down, each child receiving the values
of its separator.

Agents run inside a single-process discrete-event loop ordered by ``(time, sequence)``.
Clocks are logical: processing a bucket advances an agent's clock by the cost model's
duration, and receiving a message moves it to at least ``timestamp + latency``.
"""
import heapq
import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import IO, Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple, Union

from .backends import SEQUENTIAL, ExecutionBackend
from .graph import (
    PseudoTree,
    build_primal_graph,
    build_pseudo_forest,
    default_ordering,
    forest_ordering,
    induced_width,
)
from .inference import (
    DEFAULT_BUDGET_ROWS,
    BucketRecord,
    bounds_from,
    check_bound,
    original_tables,
    plan_buckets,
    process_bucket,
)
from .models import Bounds, InferenceStats, MessageRecord, RunMetrics, Solution
from .problem import Problem
from .tables import BucketTable, best_extension
from .utils import write_jsonl

logger = logging.getLogger(__name__)


@dataclass
class RoutedTable:
    """A bucket function on its way up the tree, tagged with where it was produced."""

    table: BucketTable
    origin: int
    mini: int


@dataclass
class UtilMessage:
    sender: int
    receiver: int
    tables: List[RoutedTable]
    timestamp: float

    @property
    def rows(self) -> List[int]:
        return [routed.table.rows for routed in self.tables]


@dataclass
class ValueMessage:
    sender: int
    receiver: int
    assignment: Dict[int, int]
    timestamp: float


@dataclass
class Agent:
    variable: int
    domain: int
    parent: Optional[int]
    children: List[int]
    pseudo_parents: List[int]
    separator: FrozenSet[int]
    local: List[BucketTable]
    clock: float = 0.0
    inbox: List[RoutedTable] = field(default_factory=list)
    waiting_for: Set[int] = field(default_factory=set)
    record: Optional[BucketRecord] = None
    known: Dict[int, int] = field(default_factory=dict)
    value: Optional[int] = None
    compute_time: float = 0.0
    last_compute_seconds: float = 0.0

    @property
    def is_root(self) -> bool:
        return self.parent is None


CostModel = Callable[[Agent, int], float]


@dataclass(frozen=True)
class RowCostModel:
    """Deterministic compute time: rows of aggregated tables times ``unit``."""

    unit: float = 1.0

    def __call__(self, agent: Agent, rows: int) -> float:
        return rows * self.unit


class MeasuredCostModel:
    """Wall-clock time the agent actually spent processing its bucket."""

    def __call__(self, agent: Agent, rows: int) -> float:
        return agent.last_compute_seconds


def advance_clock(
    clock: float, *, duration: float = 0.0, timestamp: Optional[float] = None, latency: float = 0.0
) -> float:
    """Receiving moves the clock to at least ``timestamp + latency``; computing adds ``duration``."""
    if timestamp is not None:
        clock = max(clock, timestamp + latency)
    return clock + duration


class Simulation:
    """DPOP (``z=None``) or ADPOP(z) on one pseudo-tree."""

    def __init__(
        self,
        problem: Problem,
        tree: PseudoTree,
        local: Dict[int, List[BucketTable]],
        ordering,
        *,
        z: Optional[int] = None,
        backend: ExecutionBackend = SEQUENTIAL,
        cost_model: Optional[CostModel] = None,
        latency: float = 0.0,
    ):
        self.problem = problem
        self.semiring = problem.semiring
        self.tree = tree
        self.ordering = ordering
        self.z = z
        self.backend = backend
        self.cost_model = cost_model or RowCostModel()
        self.latency = latency
        self.agents = {
            v: Agent(
                variable=v,
                domain=problem.domains[v],
                parent=tree.parent.get(v),
                children=list(tree.children[v]),
                pseudo_parents=list(tree.pseudo_parents[v]),
                separator=tree.separator[v],
                local=list(local.get(v, [])),
                waiting_for=set(tree.children[v]),
            )
            for v in tree.dfs_order
        }
        self.constants: List[float] = []
        self.log: List[MessageRecord] = []
        self.metrics = RunMetrics()
        self._queue: List[Tuple[float, int, Union[UtilMessage, ValueMessage]]] = []
        self._sequence = itertools.count()

    def run(self) -> "Simulation":
        for v in self.tree.dfs_order:
            if self.tree.is_leaf(v):
                self._compute_util(self.agents[v])
        while self._queue:
            _, _, message = heapq.heappop(self._queue)
            self._deliver(message)
        self.metrics.simulated_runtime = max(agent.clock for agent in self.agents.values())
        self.metrics.agent_compute = {v: agent.compute_time for v, agent in self.agents.items()}
        return self

    @property
    def assignment(self) -> Dict[int, int]:
        return {v: agent.value for v, agent in self.agents.items()}

    @property
    def records(self) -> Dict[int, BucketRecord]:
        return {v: agent.record for v, agent in self.agents.items() if agent.record is not None}

    def _routing_key(self, routed: RoutedTable):
        return (-self.ordering.position[routed.origin], routed.mini)

    def _send(self, message: Union[UtilMessage, ValueMessage]) -> None:
        arrival = message.timestamp + self.latency
        heapq.heappush(self._queue, (arrival, next(self._sequence), message))
        if isinstance(message, UtilMessage):
            self.metrics.util_messages += 1
            self.metrics.max_message_rows = max(self.metrics.max_message_rows, *message.rows, 0)
            record = MessageRecord(
                type="UTIL",
                sender=message.sender,
                receiver=message.receiver,
                table_rows=message.rows,
                table_scopes=[list(routed.table.scope) for routed in message.tables],
                sent_at=message.timestamp,
                received_at=arrival,
            )
        else:
            self.metrics.value_messages += 1
            record = MessageRecord(
                type="VALUE",
                sender=message.sender,
                receiver=message.receiver,
                assignment=message.assignment,
                sent_at=message.timestamp,
                received_at=arrival,
            )
        self.metrics.network_load += 1
        self.log.append(record)

    def _deliver(self, message: Union[UtilMessage, ValueMessage]) -> None:
        agent = self.agents[message.receiver]
        agent.clock = advance_clock(agent.clock, timestamp=message.timestamp, latency=self.latency)
        if isinstance(message, UtilMessage):
            agent.inbox.extend(message.tables)
            agent.waiting_for.discard(message.sender)
            if not agent.waiting_for:
                self._compute_util(agent)
        else:
            agent.known.update(message.assignment)
            self._choose_value(agent)

    def _compute_util(self, agent: Agent) -> None:
        v = agent.variable
        received = sorted(agent.inbox, key=self._routing_key)
        members = agent.local + [r.table for r in received if r.table.variable == v]
        passing = [r for r in received if r.table.variable != v]

        start = time.perf_counter()
        agent.record = process_bucket(
            v, members, self.z, self.problem.domains, self.ordering, self.semiring, self.backend
        )
        agent.last_compute_seconds = time.perf_counter() - start
        rows = sum(t.rows for t in agent.record.aggregated)
        duration = self.cost_model(agent, rows)
        agent.compute_time += duration
        agent.clock = advance_clock(agent.clock, duration=duration)

        produced = [RoutedTable(fn, v, k) for k, fn in enumerate(agent.record.functions)]
        if agent.is_root:
            # everything left has an empty scope
            for routed in sorted(passing + produced, key=self._routing_key):
                self.constants.append(float(routed.table.chi[0]))
            self._choose_value(agent)
        else:
            self._send(UtilMessage(v, agent.parent, passing + produced, agent.clock))

    def _choose_value(self, agent: Agent) -> None:
        tables = agent.record.aggregated if agent.record else ()
        agent.value, _ = best_extension(tables, agent.variable, agent.known, self.semiring, agent.domain)
        agent.known[agent.variable] = agent.value
        for child in agent.children:
            separator = self.agents[child].separator
            assignment = {u: agent.known[u] for u in sorted(separator)}
            self._send(ValueMessage(agent.variable, child, assignment, agent.clock))


@dataclass
class SimulationResult:
    value: float
    assignment: List[int]
    metrics: RunMetrics
    log: List[MessageRecord]
    records: Dict[int, BucketRecord]
    stats: InferenceStats


def _as_forest(problem: Problem, pseudo_tree) -> List[PseudoTree]:
    if pseudo_tree is None:
        graph = build_primal_graph(problem)
        return build_pseudo_forest(graph, default_ordering(graph))
    if isinstance(pseudo_tree, PseudoTree):
        return [pseudo_tree]
    return list(pseudo_tree)


def simulate(
    problem: Problem,
    pseudo_tree: Union[PseudoTree, Sequence[PseudoTree], None] = None,
    z: Optional[int] = None,
    backend: ExecutionBackend = SEQUENTIAL,
    *,
    cost_model: Optional[CostModel] = None,
    latency: float = 0.0,
    budget_rows: Optional[int] = DEFAULT_BUDGET_ROWS,
    message_log: Optional[List[MessageRecord]] = None,
) -> SimulationResult:
    """Run one simulation per pseudo-tree and merge their results and metrics.

    Messages are also appended to ``message_log`` when one is given.
    """
    forest = _as_forest(problem, pseudo_tree)
    ordering = forest_ordering(forest)
    if z is not None:
        check_bound(problem, z)
    start = time.perf_counter()
    plan_buckets(problem, ordering, z, budget_rows)

    constants, local = original_tables(problem, ordering)
    metrics = RunMetrics()
    log: List[MessageRecord] = []
    records: Dict[int, BucketRecord] = {}
    assignment: Dict[int, int] = {}
    for tree in forest:
        sim = Simulation(
            problem, tree, local, ordering, z=z, backend=backend, cost_model=cost_model, latency=latency
        ).run()
        constants.extend(sim.constants)
        metrics = metrics.merge(sim.metrics)
        log.extend(sim.log)
        if message_log is not None:
            message_log.extend(sim.log)
        records.update(sim.records)
        assignment.update(sim.assignment)
        logger.debug(
            f"Pseudo-tree rooted at {tree.root}: {len(tree.dfs_order)} agents, "
            f"{sim.metrics.network_load} messages, runtime {sim.metrics.simulated_runtime}"
        )

    stats = InferenceStats(
        induced_width=induced_width(build_primal_graph(problem), ordering),
        max_table_rows=max((t.rows for r in records.values() for t in r.aggregated), default=0),
        phase_seconds={"simulate": time.perf_counter() - start},
        backend=str(backend),
        mini_bucket_counts={v: len(r.minis) for v, r in records.items()},
        components=len(forest),
    )
    return SimulationResult(
        value=problem.semiring.combine_all(constants),
        assignment=[assignment[v] for v in range(problem.n)],
        metrics=metrics,
        log=log,
        records=records,
        stats=stats,
    )


def run_dpop(
    problem: Problem,
    pseudo_tree: Union[PseudoTree, Sequence[PseudoTree], None] = None,
    backend: ExecutionBackend = SEQUENTIAL,
    **kwargs,
) -> Tuple[Solution, RunMetrics]:
    result = simulate(problem, pseudo_tree, None, backend, **kwargs)
    solution = Solution(
        task=problem.semiring.task_name,
        algorithm="dpop",
        optimum=result.value,
        assignment=result.assignment,
        feasible=not problem.semiring.is_top(result.value),
        stats=result.stats,
    )
    return solution, result.metrics


def run_adpop(
    problem: Problem,
    pseudo_tree: Union[PseudoTree, Sequence[PseudoTree], None],
    z: int,
    backend: ExecutionBackend = SEQUENTIAL,
    **kwargs,
) -> Tuple[Bounds, RunMetrics]:
    result = simulate(problem, pseudo_tree, z, backend, **kwargs)
    bounds = bounds_from(
        problem, result.value, result.assignment, z, algorithm="adpop", stats=result.stats
    )
    return bounds, result.metrics


def write_message_log(log: Iterable[MessageRecord], stream: IO[str]) -> int:
    return write_jsonl(log, stream)
