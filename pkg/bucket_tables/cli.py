"""
Command line
------------

``bucket-tables <command> ...``, built with defopt from the functions below. Results are
printed to stdout as one JSON record per line; logs go to stderr at the level given by
``BUCKET_TABLES_LOG_LEVEL``.

Exit status: 0 success, 2 parse or usage error, 3 memory-budget or bound refusal,
4 timeout, 1 any other failure.
"""
import contextlib
import enum
import logging
import pathlib
import signal
import sys
from typing import Optional

import defopt
from pydantic import ValidationError

from . import algorithms  # noqa: F401  (registers the algorithms)
from .bench import BenchSuite, ReportFormat, run_suite, write_report
from .generators import GeneratorConfig, PairCounting, Topology, generate, generate_belief_network
from .instances import full_assignment, load_problem
from .models import BucketTablesError, CaughtException, ParseError, RunRecord, RunStatus, SolveTimeout, error_payload
from .settings import DEFAULTS, SolverSettings
from .uai import read_uai, write_uai
from .wcsp import write_wcsp

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_REFUSED = 3
EXIT_TIMEOUT = 4

EXIT_FOR_STATUS = {
    RunStatus.DONE: EXIT_OK,
    RunStatus.OOM: EXIT_REFUSED,
    RunStatus.REFUSED: EXIT_REFUSED,
    RunStatus.TIMEOUT: EXIT_TIMEOUT,
    RunStatus.ERRORED: EXIT_FAILED,
}


class Algorithm(enum.Enum):
    be = "be"
    mbe = "mbe"


@contextlib.contextmanager
def time_limit(seconds: Optional[float]):
    """Raise SolveTimeout in the main thread once ``seconds`` have elapsed."""
    if not seconds:
        yield
        return

    def _expire(signum, frame):
        raise SolveTimeout(f"no result within {seconds} seconds")

    previous = signal.signal(signal.SIGALRM, _expire)
    signal.setitimer(signal.ITIMER_REAL, seconds)
    try:
        yield
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, previous)


def _emit(record: RunRecord) -> None:
    sys.stdout.write(record.model_dump_json() + "\n")
    sys.stdout.flush()


def _refuse_input(record: RunRecord, exc: Exception) -> int:
    record.status = RunStatus.ERRORED
    record.error_json = error_payload(exc)
    logger.error(f"Cannot read {record.instance}: {exc}")
    _emit(record)
    return EXIT_USAGE


def _execute(
    func_name: str,
    instance: str,
    options: dict,
    timeout_sec: Optional[float],
    *,
    evidence: Optional[str] = None,
    linear: bool = False,
) -> int:
    record = RunRecord(func_name=func_name, instance=instance, input_json=options)
    try:
        problem = load_problem(instance, evidence, linear=linear)
    except (ParseError, OSError) as e:
        return _refuse_input(record, e)
    code = None
    try:
        with time_limit(timeout_sec):
            record.execute(problem)
    except CaughtException as e:
        # bad ordering files are input errors too
        if isinstance(e.exc, ParseError):
            code = EXIT_USAGE
    if record.status == RunStatus.DONE and problem.labels is not None and record.output_json:
        # report conditioned runs on the network's own variable ids
        _, observed = read_uai(instance, evidence)
        output = record.output_json.get("result", record.output_json)
        output["full_assignment"] = full_assignment(problem, output["assignment"], observed)
        for key, target in (("optimum", "probability"), ("upper", "probability_upper")):
            if key in output:
                output[target] = problem.semiring.to_probability(float(output[key]))
    _emit(record)
    return EXIT_FOR_STATUS[record.status] if code is None else code


def _bounded(algorithm: Algorithm, z: Optional[int], options: dict) -> Optional[int]:
    if algorithm == Algorithm.mbe:
        if z is None:
            logger.error("--z is required with --algorithm mbe")
            return EXIT_USAGE
        options["z"] = z
    return None


def solve(
    instance: str,
    *,
    algorithm: Algorithm = Algorithm.be,
    z: Optional[int] = None,
    ordering: str = "degree",
    backend: str = "seq",
    budget_gib: float = DEFAULTS.budget_gib,
    timeout_sec: Optional[float] = None,
) -> int:
    """Solve a WCSP (or a UAI network without evidence) by bucket or mini-bucket elimination.

    Args:
        instance: .wcsp or .uai file
        algorithm: be (exact) or mbe (bounds)
        z: mini-bucket bound (mbe only)
        ordering: degree, min-degree, pseudo-tree or an ordering file
        backend: seq, par or par:k
        budget_gib: memory budget for bucket tables
        timeout_sec: give up after this many seconds
    """
    options = {"ordering": ordering, "backend": backend, "budget_gib": budget_gib}
    code = _bounded(algorithm, z, options)
    if code is not None:
        return code
    return _execute(algorithm.value, instance, options, timeout_sec)


def mpe(
    model: str,
    *,
    evidence: Optional[str] = None,
    algorithm: Algorithm = Algorithm.be,
    z: Optional[int] = None,
    ordering: str = "degree",
    backend: str = "seq",
    budget_gib: float = DEFAULTS.budget_gib,
    linear: bool = False,
    timeout_sec: Optional[float] = None,
) -> int:
    """Most probable explanation of a BAYES network in UAI format.

    Args:
        model: .uai network
        evidence: evidence file (count followed by variable/value pairs)
        algorithm: be (exact) or mbe (upper bound on the probability)
        z: mini-bucket bound (mbe only)
        ordering: degree, min-degree, pseudo-tree or an ordering file
        backend: seq, par or par:k
        budget_gib: memory budget for bucket tables
        linear: multiply probabilities instead of adding logarithms
        timeout_sec: give up after this many seconds
    """
    options = {"ordering": ordering, "backend": backend, "budget_gib": budget_gib}
    code = _bounded(algorithm, z, options)
    if code is not None:
        return code
    return _execute(algorithm.value, model, options, timeout_sec, evidence=evidence, linear=linear)


def dpop(
    instance: str,
    *,
    ordering: str = "degree",
    backend: str = "seq",
    budget_gib: float = DEFAULTS.budget_gib,
    latency: float = DEFAULTS.latency,
    message_log: Optional[str] = None,
    timeout_sec: Optional[float] = None,
) -> int:
    """Simulated DPOP with one agent per variable.

    Args:
        instance: .wcsp or .uai file
        ordering: degree, min-degree, pseudo-tree or an ordering file
        backend: seq, par or par:k
        budget_gib: memory budget for bucket tables
        latency: simulated delay of every message
        message_log: write every message here as JSON lines
        timeout_sec: give up after this many seconds
    """
    options = {
        "ordering": ordering,
        "backend": backend,
        "budget_gib": budget_gib,
        "latency": latency,
        "message_log": message_log,
    }
    return _execute("dpop", instance, options, timeout_sec)


def adpop(
    instance: str,
    *,
    z: int,
    ordering: str = "degree",
    backend: str = "seq",
    budget_gib: float = DEFAULTS.budget_gib,
    latency: float = DEFAULTS.latency,
    message_log: Optional[str] = None,
    timeout_sec: Optional[float] = None,
) -> int:
    """Simulated ADPOP: DPOP with mini-bucket tables of at most z variables.

    Args:
        instance: .wcsp or .uai file
        z: mini-bucket bound
        ordering: degree, min-degree, pseudo-tree or an ordering file
        backend: seq, par or par:k
        budget_gib: memory budget for bucket tables
        latency: simulated delay of every message
        message_log: write every message here as JSON lines
        timeout_sec: give up after this many seconds
    """
    options = {
        "z": z,
        "ordering": ordering,
        "backend": backend,
        "budget_gib": budget_gib,
        "latency": latency,
        "message_log": message_log,
    }
    return _execute("adpop", instance, options, timeout_sec)


def oracle(
    instance: str, *, limit: int = DEFAULTS.state_limit, timeout_sec: Optional[float] = None
) -> int:
    """Brute-force optimum, for checking the other solvers on small instances.

    Args:
        instance: .wcsp or .uai file
        limit: refuse instances with more assignments than this
        timeout_sec: give up after this many seconds
    """
    return _execute("oracle", instance, {"limit": limit}, timeout_sec)


def gen(
    *,
    topology: Topology = Topology.random,
    n: int = 10,
    d: int = 2,
    p1: float = 0.3,
    p2: float = 0.5,
    seed: int = 0,
    pair_counting: PairCounting = PairCounting.ordered,
    out: Optional[str] = None,
) -> int:
    """Generate a random instance (WCSP, or UAI for the bayes topology).

    Args:
        topology: random, scalefree, grid or bayes
        n: number of variables (side length for grid)
        d: domain size
        p1: edge density of the random topology
        p2: fraction of forbidden cells per function
        seed: random seed
        pair_counting: ordered uses floor(n(n-1)p1) edges, unordered half of that
        out: output file (stdout when omitted)
    """
    try:
        config = GeneratorConfig(
            topology=topology, n=n, d=d, p1=p1, p2=p2, seed=seed, pair_counting=pair_counting
        )
    except ValidationError as e:
        logger.error(f"Invalid generator settings: {e}")
        return EXIT_USAGE
    try:
        if topology == Topology.bayes:
            text = write_uai(generate_belief_network(config))
        else:
            text = write_wcsp(generate(config))
    except BucketTablesError as e:
        logger.error(f"Cannot generate {config.name}: {e}")
        return EXIT_FAILED
    if out:
        with open(out, "w") as fp:
            fp.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def bench(*, suite: str, out: ReportFormat = ReportFormat.csv, report: Optional[str] = None) -> int:
    """Run a benchmark suite and write one row per instance, algorithm, z and backend.

    Args:
        suite: JSON suite file
        out: report format
        report: report file (stdout when omitted)
    """
    try:
        bench_suite = BenchSuite.load(suite)
    except (ValidationError, OSError) as e:
        logger.error(f"Cannot read suite {suite}: {e}")
        return EXIT_USAGE
    try:
        rows = run_suite(bench_suite, base_dir=pathlib.Path(suite).resolve().parent)
    except ParseError as e:
        logger.error(f"Cannot read an instance of {suite}: {e}")
        return EXIT_USAGE
    if report:
        with open(report, "w", newline="") as fp:
            write_report(rows, fp, out)
    else:
        write_report(rows, sys.stdout, out)
    return EXIT_OK


COMMANDS = [solve, mpe, dpop, adpop, oracle, gen, bench]


def configure_logging(settings: SolverSettings) -> None:
    logging.basicConfig(
        level=settings.log_level.upper(),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def main(argv=None) -> int:
    configure_logging(SolverSettings.from_env())
    try:
        return defopt.run(COMMANDS, argv=argv) or EXIT_OK
    except SystemExit as e:
        # argparse usage errors exit with 2, --help with 0
        return e.code if isinstance(e.code, int) else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
