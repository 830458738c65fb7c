"""
Execution backends
------------------

Kernels describe their work as a function over a half-open range of output rows. A
backend decides how the row range ``[0, total)`` is cut into chunks and where the chunks
run. Chunks never overlap, so every output row is written by exactly one task and the
result is independent of the backend.
"""
import enum
import functools
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Tuple

from .models import PreconditionError

logger = logging.getLogger(__name__)

DEFAULT_CHUNK_ROWS = 2**20
# floor for parallel chunk sizes
MIN_PARALLEL_CHUNK = 2**14


class BackendKind(enum.Enum):
    SEQUENTIAL = "seq"
    PARALLEL = "par"


@dataclass(frozen=True)
class ExecutionBackend:
    kind: BackendKind = BackendKind.SEQUENTIAL
    workers: int = 1
    chunk_rows: int = DEFAULT_CHUNK_ROWS

    def __post_init__(self):
        if self.workers < 1:
            raise PreconditionError("A backend needs at least one worker")
        if self.chunk_rows < 1:
            raise PreconditionError("chunk_rows must be positive")
        if self.kind == BackendKind.SEQUENTIAL and self.workers != 1:
            object.__setattr__(self, "workers", 1)

    def __str__(self):
        if self.kind == BackendKind.SEQUENTIAL:
            return "seq"
        return f"par:{self.workers}"

    def chunk_size(self, total: int) -> int:
        if self.kind == BackendKind.SEQUENTIAL:
            return self.chunk_rows
        per_worker = math.ceil(total / self.workers) if total else 1
        return max(1, min(self.chunk_rows, max(per_worker, MIN_PARALLEL_CHUNK)))

    def run(self, work: Callable[[int, int], None], total: int) -> None:
        """Call ``work(start, stop)`` over a write-disjoint partition of ``range(total)``."""
        chunks = partition_rows(total, self.chunk_size(total))
        if self.kind == BackendKind.SEQUENTIAL or len(chunks) <= 1:
            for start, stop in chunks:
                work(start, stop)
            return
        executor = _executor(self.workers)
        futures = [executor.submit(work, start, stop) for start, stop in chunks]
        for future in futures:
            # re-raises worker failures in the caller
            future.result()


SEQUENTIAL = ExecutionBackend()


def partition_rows(total: int, chunk: int) -> List[Tuple[int, int]]:
    """Consecutive ``[start, stop)`` ranges of at most ``chunk`` rows covering ``range(total)``."""
    if chunk < 1:
        raise PreconditionError("chunk must be positive")
    return [(start, min(start + chunk, total)) for start in range(0, total, chunk)]


@functools.lru_cache(maxsize=None)
def _executor(workers: int) -> ThreadPoolExecutor:
    logger.debug(f"Starting a pool of {workers} kernel workers")
    return ThreadPoolExecutor(max_workers=workers, thread_name_prefix="bucket-kernel")


def parallel(workers: int = 0, chunk_rows: int = DEFAULT_CHUNK_ROWS) -> ExecutionBackend:
    return ExecutionBackend(BackendKind.PARALLEL, workers or os.cpu_count() or 1, chunk_rows)


def parse_backend(text: str, *, chunk_rows: int = DEFAULT_CHUNK_ROWS) -> ExecutionBackend:
    """``seq``, ``par`` (one worker per CPU) or ``par:k``."""
    name, _, count = text.strip().partition(":")
    if name == BackendKind.SEQUENTIAL.value and not count:
        return ExecutionBackend(chunk_rows=chunk_rows)
    if name == BackendKind.PARALLEL.value:
        if not count:
            return parallel(chunk_rows=chunk_rows)
        try:
            workers = int(count)
        except ValueError:
            workers = 0
        if workers >= 1:
            return parallel(workers, chunk_rows)
    raise PreconditionError(f"Unknown backend {text!r}; use seq, par or par:k")
