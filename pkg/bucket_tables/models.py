import datetime
import enum
import logging
import traceback
import uuid
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

logger = logging.getLogger(__name__)


class BucketTablesError(Exception):
    """Base class for everything this package raises on purpose."""


class PreconditionError(BucketTablesError, ValueError):
    """An operation was called with inputs outside its contract."""


class InfeasibleBoundError(PreconditionError):
    """A mini-bucket bound z is smaller than some function's scope."""

    def __init__(self, message, *, z=None, arity=None):
        self.z = z
        self.arity = arity
        super().__init__(message)


class DisconnectedGraphError(PreconditionError):
    """Raised when a connected primal graph is required (see connected_components)."""


class ParseError(BucketTablesError):
    def __init__(self, message, *, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MemoryBudgetExceeded(BucketTablesError):
    """The bucket tables kept for the forward pass would not fit in the memory budget."""

    def __init__(self, *, variable, rows, budget_rows):
        self.variable = variable
        self.rows = rows
        self.budget_rows = budget_rows
        super().__init__(
            f"tables kept up to the bucket of variable {variable} need an estimated {rows} rows "
            f"(budget is {budget_rows} rows)"
        )


class StateSpaceTooLarge(BucketTablesError):
    """Brute force refuses to enumerate an oversized state space."""


class GeneratorError(BucketTablesError):
    pass


class SolveTimeout(BucketTablesError):
    pass


class CaughtException(Exception):
    """An exception that was caught and saved on a run record. Callers generally don't need to log
    it again :)"""

    def __init__(self, message, exc):
        self.exc = exc
        super().__init__(message)


class TaskName(str, enum.Enum):
    MIN_SUM = "min-sum"
    MAX_PRODUCT = "max-product"


class _Record(BaseModel):
    # Top is +/-inf; keep it readable in JSON output.
    model_config = ConfigDict(ser_json_inf_nan="strings")


class InferenceStats(_Record):
    induced_width: int
    max_table_rows: int = 0
    phase_seconds: Dict[str, float] = Field(default_factory=dict)
    backend: str = "seq"
    mini_bucket_counts: Dict[int, int] = Field(default_factory=dict)
    components: int = 1


class Solution(_Record):
    task: TaskName = TaskName.MIN_SUM
    algorithm: str = "be"
    optimum: float
    assignment: List[int]
    feasible: bool = True
    stats: Optional[InferenceStats] = None


class Bounds(_Record):
    """Result of a relaxed (mini-bucket) run.

    ``lower <= upper`` always holds. Under min-sum the relaxation gives ``lower`` and the
    assignment's cost gives ``upper``; under max-product it is the other way around.
    """

    task: TaskName = TaskName.MIN_SUM
    algorithm: str = "mbe"
    z: int
    lower: float
    upper: float
    assignment: List[int]
    stats: Optional[InferenceStats] = None

    @property
    def relaxation(self) -> float:
        return self.upper if self.task == TaskName.MAX_PRODUCT else self.lower

    @property
    def assignment_value(self) -> float:
        return self.lower if self.task == TaskName.MAX_PRODUCT else self.upper


class RunMetrics(_Record):
    simulated_runtime: float = 0.0
    network_load: int = 0
    util_messages: int = 0
    value_messages: int = 0
    max_message_rows: int = 0
    agent_compute: Dict[int, float] = Field(default_factory=dict)

    def merge(self, other: "RunMetrics") -> "RunMetrics":
        return RunMetrics(
            simulated_runtime=max(self.simulated_runtime, other.simulated_runtime),
            network_load=self.network_load + other.network_load,
            util_messages=self.util_messages + other.util_messages,
            value_messages=self.value_messages + other.value_messages,
            max_message_rows=max(self.max_message_rows, other.max_message_rows),
            agent_compute={**self.agent_compute, **other.agent_compute},
        )


class DcopReport(_Record):
    result: Dict[str, Any]
    metrics: RunMetrics


class MessageRecord(_Record):
    type: str
    sender: int
    receiver: int
    table_rows: List[int] = Field(default_factory=list)
    table_scopes: List[List[int]] = Field(default_factory=list)
    assignment: Dict[int, int] = Field(default_factory=dict)
    sent_at: float
    received_at: float


class RunStatus(str, enum.Enum):
    CREATED = "CREATED"
    RUNNING = "RUNNING"
    DONE = "DONE"
    ERRORED = "ERRORED"
    OOM = "OOM"
    REFUSED = "REFUSED"
    TIMEOUT = "TIMEOUT"


_STATUS_FOR_ERROR = (
    (MemoryBudgetExceeded, RunStatus.OOM),
    (InfeasibleBoundError, RunStatus.REFUSED),
    (StateSpaceTooLarge, RunStatus.REFUSED),
    (SolveTimeout, RunStatus.TIMEOUT),
)


def status_for_error(exc: BaseException) -> RunStatus:
    for exc_type, status in _STATUS_FOR_ERROR:
        if isinstance(exc, exc_type):
            return status
    return RunStatus.ERRORED


def error_payload(exc: BaseException) -> dict:
    payload = {"type": type(exc).__name__, "message": str(exc)}
    for attr in ("variable", "rows", "budget_rows", "line", "z", "arity"):
        value = getattr(exc, attr, None)
        if value is not None:
            payload[attr] = value
    return payload


class RunRecord(_Record):
    """One execution of a registered algorithm on one problem."""

    uuid: str = Field(default_factory=lambda: str(uuid.uuid4()))
    func_name: str
    instance: str = ""
    input_json: Dict[str, Any] = Field(default_factory=dict)
    output_json: Optional[Dict[str, Any]] = None
    error_json: Dict[str, Any] = Field(default_factory=dict)
    traceback: str = ""
    status: RunStatus = RunStatus.CREATED
    created: datetime.datetime = Field(default_factory=datetime.datetime.now)
    modified: Optional[datetime.datetime] = None
    wall_seconds: float = 0.0

    def execute(self, problem, **extra):
        """Execute with given input, returning caught exceptions as necessary"""
        import time

        if self.status not in (RunStatus.CREATED, RunStatus.RUNNING):
            raise ValueError("Cannot run - execution state isn't fresh")
        func_obj = self.get_function_info()
        self.status = RunStatus.RUNNING
        start = time.perf_counter()
        try:
            options = {**self.input_json, **extra}
            func_obj.check(options)
            result = func_obj.func(problem, **options)
        except Exception as e:
            self.wall_seconds = time.perf_counter() - start
            self.status = status_for_error(e)
            self.error_json = error_payload(e)
            self.modified = datetime.datetime.now()
            if self.status == RunStatus.ERRORED:
                logger.error(
                    f"Failed to execute {self.func_name} :(: {type(e).__name__}:{e}", exc_info=True
                )
                self.traceback = "".join(traceback.format_exc())
            else:
                logger.warning(f"{self.func_name} refused {self.instance or 'problem'}: {e}")
            raise CaughtException(f"Failed on {self.func_name} ({type(e).__name__})", e) from e
        self.wall_seconds = time.perf_counter() - start
        self.output_json = result.model_dump(mode="json") if hasattr(result, "model_dump") else result
        self.status = RunStatus.DONE
        self.modified = datetime.datetime.now()
        return result

    def get_function_info(self):
        from . import get_registry

        func_obj = get_registry().get(self.func_name)
        if not func_obj:
            raise ValueError(f"No registered algorithm defined for {self.func_name}")
        return func_obj
