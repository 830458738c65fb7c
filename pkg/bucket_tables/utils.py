import enum
import json
import math
from typing import IO, Iterable

import numpy as np


def jsonable_float(value: float):
    """JSON has no infinities; spell Top out the way pydantic does."""
    value = float(value)
    if math.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    if math.isnan(value):
        return "NaN"
    return value


class ResultEncoder(json.JSONEncoder):
    """Encoder for solver output: enums, numpy scalars/arrays and pydantic records."""

    def default(self, o):
        if isinstance(o, enum.Enum):
            return o.value
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return jsonable_float(o)
        if isinstance(o, np.ndarray):
            return _replace_infinities(o.tolist())
        if hasattr(o, "model_dump"):
            return o.model_dump(mode="json")
        return super().default(o)

    def iterencode(self, o, _one_shot=False):
        return super().iterencode(_replace_infinities(o), _one_shot)


def _replace_infinities(obj):
    if isinstance(obj, float):
        return jsonable_float(obj)
    if isinstance(obj, dict):
        return {k: _replace_infinities(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_replace_infinities(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(obj, cls=ResultEncoder)


def write_jsonl(records: Iterable, stream: IO[str]) -> int:
    """Write one JSON document per line; returns the number of lines written."""
    count = 0
    for record in records:
        if hasattr(record, "model_dump_json"):
            stream.write(record.model_dump_json())
        else:
            stream.write(dumps(record))
        stream.write("\n")
        count += 1
    return count


def prod(values: Iterable[int]) -> int:
    """Exact integer product (table sizes can exceed int64 in estimates)."""
    result = 1
    for v in values:
        result *= int(v)
    return result
