import io
import json
import math

import numpy as np

from bucket_tables import utils
from bucket_tables.models import RunMetrics, TaskName


def test_result_encoder():
    text = utils.dumps({"a": math.inf, "b": np.int64(3), "c": TaskName.MIN_SUM, "d": np.array([1.0, -np.inf])})
    assert json.loads(text) == {"a": "Infinity", "b": 3, "c": "min-sum", "d": [1.0, "-Infinity"]}


def test_write_jsonl():
    stream = io.StringIO()
    assert utils.write_jsonl([RunMetrics(network_load=2), {"x": 1}], stream) == 2
    first, second = stream.getvalue().splitlines()
    assert json.loads(first)["network_load"] == 2
    assert json.loads(second) == {"x": 1}


def test_prod_is_exact():
    assert utils.prod([]) == 1
    assert utils.prod([2**40, 2**40]) == 2**80
