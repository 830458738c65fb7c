import json
import pathlib
import time

import pytest

from bucket_tables import cli
from bucket_tables.models import SolveTimeout
from bucket_tables.uai import parse_uai
from bucket_tables.wcsp import read_wcsp

DATA = pathlib.Path(__file__).parent / "data"
SQUARE = str(DATA / "square.wcsp")


def _run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, [json.loads(line) for line in out.splitlines() if line.startswith("{")]


def test_solve(capsys):
    code, (record,) = _run(capsys, "solve", SQUARE)
    assert code == 0
    assert record["status"] == "DONE"
    assert record["func_name"] == "be"
    assert record["output_json"]["optimum"] == 4
    assert record["output_json"]["assignment"] == [0, 1, 0, 1]


def test_solve_mini_buckets(capsys):
    code, (record,) = _run(capsys, "solve", SQUARE, "--algorithm", "mbe", "--z", "2", "--ordering", "min-degree")
    assert code == 0
    assert record["output_json"]["lower"] <= 4 <= record["output_json"]["upper"]
    assert record["input_json"]["z"] == 2


def test_mini_buckets_need_z(capsys):
    code, records = _run(capsys, "solve", SQUARE, "--algorithm", "mbe")
    assert code == 2
    assert records == []


def test_refused_bound(capsys):
    code, (record,) = _run(capsys, "solve", SQUARE, "--algorithm", "mbe", "--z", "1")
    assert code == 3
    assert record["status"] == "REFUSED"
    assert record["error_json"]["arity"] == 2


def test_memory_budget(capsys):
    code, (record,) = _run(capsys, "solve", SQUARE, "--budget-gib", "1e-7")
    assert code == 3
    assert record["status"] == "OOM"
    assert record["error_json"]["variable"] == 3


def test_parse_error(capsys, tmp_path):
    bad = tmp_path / "bad.wcsp"
    bad.write_text("demo 2 2 1 10\n2 2\n2 0 1 0 1\n0 0 oops\n")
    code, (record,) = _run(capsys, "solve", str(bad))
    assert code == 2
    assert record["status"] == "ERRORED"
    assert record["error_json"]["line"] == 4


def test_missing_file(capsys, tmp_path):
    code, (record,) = _run(capsys, "solve", str(tmp_path / "nope.wcsp"))
    assert code == 2


def test_unknown_command():
    assert cli.main(["frobnicate"]) == 2


@pytest.mark.parametrize(
    "extra,assignment,probability",
    [
        ((), {"0": 0, "1": 0}, 0.54),
        (("--evidence", str(DATA / "sprinkler.evid")), {"0": 1, "1": 1}, 0.32),
        (("--evidence", str(DATA / "sprinkler.evid"), "--linear"), {"0": 1, "1": 1}, 0.32),
    ],
)
def test_mpe(capsys, extra, assignment, probability):
    code, (record,) = _run(capsys, "mpe", str(DATA / "sprinkler.uai"), *extra)
    assert code == 0
    assert record["output_json"]["full_assignment"] == assignment
    assert record["output_json"]["probability"] == pytest.approx(probability)


def test_mpe_bound(capsys):
    code, (record,) = _run(capsys, "mpe", str(DATA / "sprinkler.uai"), "--algorithm", "mbe", "--z", "2")
    assert code == 0
    assert record["output_json"]["probability_upper"] >= 0.54 - 1e-12


def test_evidence_needs_uai(capsys):
    code, (record,) = _run(capsys, "mpe", SQUARE, "--evidence", str(DATA / "sprinkler.evid"))
    assert code == 2


def test_dpop(capsys):
    code, (record,) = _run(capsys, "dpop", SQUARE, "--latency", "1")
    assert code == 0
    assert record["output_json"]["result"]["optimum"] == 4
    assert record["output_json"]["metrics"]["network_load"] == 6


def test_adpop(capsys):
    code, (record,) = _run(capsys, "adpop", SQUARE, "--z", "2")
    assert code == 0
    result = record["output_json"]["result"]
    assert result["algorithm"] == "adpop"
    assert result["lower"] <= 4 <= result["upper"]


def test_oracle(capsys):
    code, (record,) = _run(capsys, "oracle", SQUARE)
    assert code == 0
    assert record["output_json"]["optimum"] == 4
    code, (record,) = _run(capsys, "oracle", SQUARE, "--limit", "10")
    assert code == 3
    assert record["status"] == "REFUSED"


def test_gen_wcsp(capsys, tmp_path):
    out = tmp_path / "grid.wcsp"
    assert cli.main(["gen", "--topology", "grid", "--seed", "4", "--out", str(out)]) == 0
    problem = read_wcsp(out)
    assert problem.n == 100
    assert len(problem.functions) == 180


def test_gen_bayes_to_stdout(capsys):
    assert cli.main(["gen", "--topology", "bayes", "--d", "3"]) == 0
    bn, _ = parse_uai(capsys.readouterr().out)
    assert bn.n == 10
    assert set(bn.domains) == {3}


def test_gen_rejects_bad_density(capsys):
    assert cli.main(["gen", "--p1", "1.5"]) == 2


def test_bench(capsys, tmp_path):
    report = tmp_path / "report.csv"
    assert cli.main(["bench", "--suite", str(DATA / "suite.json"), "--report", str(report)]) == 0
    lines = report.read_text().splitlines()
    assert lines[0].startswith("instance,algorithm,z,backend,status")
    assert len(lines) == 1 + 12


def test_time_limit():
    with pytest.raises(SolveTimeout):
        with cli.time_limit(0.05):
            time.sleep(2)
    # no alarm left behind
    with cli.time_limit(None):
        time.sleep(0.01)


@pytest.mark.parametrize("ordering", ["degree", "paper-degree", "min-degree", "pseudo-tree"])
def test_named_orderings(capsys, ordering):
    code, (record,) = _run(capsys, "solve", "--algorithm", "be", "--ordering", ordering, SQUARE)
    assert code == 0
    assert record["output_json"]["optimum"] == 4


def test_ordering_file(capsys, tmp_path):
    path = tmp_path / "order.txt"
    path.write_text("3 1 0 2\n")
    code, (record,) = _run(capsys, "solve", SQUARE, "--ordering", str(path))
    assert code == 0
    assert record["output_json"]["optimum"] == 4


@pytest.mark.parametrize("content", [None, "0 1 2\n", "0 x 1 2\n"])
def test_bad_ordering_file(capsys, tmp_path, content):
    path = tmp_path / "order.txt"
    if content is not None:
        path.write_text(content)
    code, (record,) = _run(capsys, "dpop", SQUARE, "--ordering", str(path))
    assert code == 2
    assert record["status"] == "ERRORED"
    assert record["error_json"]["type"] == "ParseError"


def test_bench_jsonl(capsys, tmp_path):
    report = tmp_path / "report.jsonl"
    assert cli.main(["bench", "--suite", str(DATA / "suite.json"), "--out", "jsonl", "--report", str(report)]) == 0
    rows = [json.loads(line) for line in report.read_text().splitlines()]
    assert len(rows) == 12
    assert {row["status"] for row in rows} == {"DONE"}
    assert {row["algorithm"] for row in rows} == {"be", "mbe", "dpop"}


def test_bench_needs_suite_flag():
    assert cli.main(["bench", str(DATA / "suite.json")]) == 2
