"""
Benchmark suites
----------------

A suite (JSON) names instance files and/or generator configurations plus the
algorithms, bounds and backends to run on each. Every (instance, algorithm, z, backend)
combination becomes one :class:`BenchRow`; the speedup of a row is the sequential
wall time of the same (instance, algorithm, z) divided by its own.
"""
import csv
import enum
import logging
import pathlib
from typing import IO, Iterator, List, Optional, Tuple, Union

from pydantic import BaseModel, Field

from . import get_registry
from .generators import GeneratorConfig
from .instances import load_problem, problem_from_config
from .models import CaughtException, RunRecord, RunStatus, _Record
from .problem import Problem
from .settings import DEFAULTS
from .utils import write_jsonl

logger = logging.getLogger(__name__)

BOUNDED = ("mbe", "adpop")


class ReportFormat(str, enum.Enum):
    csv = "csv"
    jsonl = "jsonl"


class BenchSuite(BaseModel):
    instances: List[str] = Field(default_factory=list)
    generators: List[GeneratorConfig] = Field(default_factory=list)
    algorithms: List[str] = Field(default_factory=lambda: ["be"])
    z: List[int] = Field(default_factory=list)
    backends: List[str] = Field(default_factory=lambda: ["seq"])
    ordering: str = "degree"
    budget_gib: float = DEFAULTS.budget_gib

    @classmethod
    def load(cls, path: Union[str, pathlib.Path]) -> "BenchSuite":
        return cls.model_validate_json(pathlib.Path(path).read_text())


class BenchRow(_Record):
    instance: str
    algorithm: str
    z: Optional[int] = None
    backend: str
    status: RunStatus
    optimum: Optional[float] = None
    lower: Optional[float] = None
    upper: Optional[float] = None
    induced_width: Optional[int] = None
    max_table_rows: Optional[int] = None
    wall_seconds: float = 0.0
    speedup: Optional[float] = None
    simulated_runtime: Optional[float] = None
    network_load: Optional[int] = None
    max_message_rows: Optional[int] = None
    error: str = ""


def iter_problems(suite: BenchSuite, base_dir: pathlib.Path) -> Iterator[Tuple[str, Problem]]:
    for name in suite.instances:
        path = pathlib.Path(name)
        yield name, load_problem(path if path.is_absolute() else base_dir / path)
    for config in suite.generators:
        yield config.name, problem_from_config(config)


def _fill(row: BenchRow, output: dict) -> None:
    if "metrics" in output:
        metrics = output["metrics"]
        row.simulated_runtime = metrics["simulated_runtime"]
        row.network_load = metrics["network_load"]
        row.max_message_rows = metrics["max_message_rows"]
        output = output["result"]
    for key in ("optimum", "lower", "upper"):
        if key in output:
            setattr(row, key, float(output[key]))
    stats = output.get("stats") or {}
    row.induced_width = stats.get("induced_width")
    row.max_table_rows = stats.get("max_table_rows")


def run_one(
    problem: Problem,
    instance: str,
    algorithm: str,
    z: Optional[int],
    backend: str,
    suite: BenchSuite,
) -> BenchRow:
    func_obj = get_registry().get(algorithm)
    if not func_obj:
        raise ValueError(f"No registered algorithm defined for {algorithm}")
    options = {"ordering": suite.ordering, "backend": backend, "budget_gib": suite.budget_gib}
    if z is not None:
        options["z"] = z
    record = RunRecord(func_name=algorithm, instance=instance, input_json=func_obj.accepted(options))
    row = BenchRow(instance=instance, algorithm=algorithm, z=z, backend=backend, status=RunStatus.CREATED)
    try:
        record.execute(problem)
    except CaughtException:
        row.error = record.error_json.get("message", "")
    row.status = record.status
    row.wall_seconds = record.wall_seconds
    if record.output_json is not None:
        _fill(row, record.output_json)
    return row


def run_suite(suite: BenchSuite, base_dir: Union[str, pathlib.Path] = ".") -> List[BenchRow]:
    """Run every combination, one after another."""
    rows: List[BenchRow] = []
    for instance, problem in iter_problems(suite, pathlib.Path(base_dir)):
        for algorithm in suite.algorithms:
            bounds = suite.z if algorithm in BOUNDED else [None]
            for z in bounds:
                group = [
                    run_one(problem, instance, algorithm, z, backend, suite)
                    for backend in suite.backends
                ]
                _speedups(group)
                rows.extend(group)
        logger.info(f"Finished {instance}")
    return rows


def _speedups(group: List[BenchRow]) -> None:
    sequential = next((r for r in group if r.backend == "seq" and r.status == RunStatus.DONE), None)
    if sequential is None:
        return
    for row in group:
        if row.status == RunStatus.DONE and row.wall_seconds > 0:
            row.speedup = sequential.wall_seconds / row.wall_seconds


def write_report(rows: List[BenchRow], stream: IO[str], fmt: ReportFormat = ReportFormat.csv) -> None:
    if fmt == ReportFormat.jsonl:
        write_jsonl(rows, stream)
        return
    writer = csv.DictWriter(stream, fieldnames=list(BenchRow.model_fields), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.model_dump(mode="json"))
