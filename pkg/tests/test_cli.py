import json
import os

import pytest

from conftest import data
from elcq.cli import UNSAT_BANNER, run
from elcq.kb_text import parse_kb, parse_query

RUNNING_KB, FORK_Q = data("running.kb"), data("fork.q")


def cli(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_answer_text(capsys):
    code, out, _ = cli(capsys, "answer", RUNNING_KB, FORK_Q)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "(a, b)"
    stats = json.loads(lines[-1].removeprefix("stats: "))
    assert stats["unsound"] == 0 and stats["answers"] == 1


def test_answer_json_keys(capsys):
    code, out, _ = cli(capsys, "answer", RUNNING_KB, FORK_Q, "--format", "json", "--jobs", "2")
    payload = json.loads(out)
    assert code == 0
    assert set(payload) == {"answers", "candidates", "unsound", "filter_ms_avg",
                            "choices_avg", "fast_path_hits", "unsat"}
    assert payload["answers"] == [["a", "b"]]


def test_unsat(capsys, tmp_path):
    code, out, _ = cli(capsys, "check", data("unsat.kb"))
    assert (code, out) == (0, "unsatisfiable\n")
    q = tmp_path / "q.q"
    q.write_text("q(?x) :- A(?x).\n")
    code, out, _ = cli(capsys, "answer", data("unsat.kb"), str(q))
    assert code == 0 and out == UNSAT_BANNER + "\n"
    code, out, _ = cli(capsys, "answer", data("unsat.kb"), str(q), "--format", "json")
    assert json.loads(out)["unsat"] is True
    assert cli(capsys, "check", RUNNING_KB)[1] == "satisfiable\n"


def test_materialize(capsys):
    code, out, _ = cli(capsys, "materialize", RUNNING_KB, "--format", "json")
    payload = json.loads(out)
    assert code == 0 and payload["stats"]["before"] == 2
    assert payload["stats"]["ratio"] == round(payload["stats"]["after"] / 2, 4)
    code, out, _ = cli(capsys, "materialize", RUNNING_KB)
    assert "# ratio: " in out and "A(a)" in out.splitlines()


def test_usage_errors(capsys):
    assert cli(capsys, "bogus")[0] == 1
    assert cli(capsys)[0] == 1
    assert cli(capsys, "answer", RUNNING_KB, FORK_Q, "--branch-cap", "0")[0] == 1
    assert cli(capsys, "check", "/nonexistent/file.kb")[0] == 1


def test_input_errors(capsys, tmp_path):
    bad = tmp_path / "bad.kb"
    bad.write_text("TBOX\nA SubClassOf\n")
    code, _, err = cli(capsys, "check", str(bad))
    assert code == 2 and err.startswith("error:")
    q = tmp_path / "q.q"
    q.write_text("q(?x) :- Unknown(?x).\n")
    code, _, err = cli(capsys, "answer", RUNNING_KB, str(q))
    assert code == 0 and "warning" in err
    assert cli(capsys, "answer", RUNNING_KB, str(q), "--strict")[0] == 2


def test_resource_limit(capsys, tmp_path):
    q = tmp_path / "q.q"
    q.write_text("q(?x1, ?x2) :- R(?x1, ?y), R(?x2, ?y), D(?y).\n")
    assert cli(capsys, "answer", RUNNING_KB, str(q), "--branch-cap", "1")[0] == 3


def test_classify(capsys, tmp_path):
    assert cli(capsys, "classify", FORK_Q)[1] == "arborescent\n"  # rooted at y
    prefix = str(tmp_path / "q0q2")
    assert cli(capsys, "gen-hard", "trans", "--cnf", "1 2 0 -1 0", "--out", prefix)[0] == 0
    assert cli(capsys, "classify", prefix + ".q")[1] == "arborescent\n"
    parse_kb(open(prefix + ".kb").read())


def test_gen_hard_stdout(capsys, tmp_path):
    cnf = tmp_path / "phi.cnf"
    cnf.write_text("p cnf 1 2\n1 0\n-1 0\n")
    code, out, _ = cli(capsys, "gen-hard", "filter", "--cnf", str(cnf))
    assert code == 0 and "# query\n" in out
    parse_kb(out.split("# query\n")[0])
    parse_query(out.split("# query\n# ")[1])
    assert cli(capsys, "gen-hard", "filter", "--cnf", "x y 0")[0] == 2


def test_oracle(capsys):
    code, out, _ = cli(capsys, "oracle", RUNNING_KB, FORK_Q, "--depth", "3")
    assert code == 0
    assert out.splitlines() == ["(a, b)", "complete: false"]


def test_gen_bench(capsys, tmp_path):
    out1, out2 = tmp_path / "one", tmp_path / "two"
    for d in (out1, out2):
        assert cli(capsys, "gen-bench", "--scale", "1", "--seed", "7", "--out", str(d))[0] == 0
    assert sorted(os.listdir(out1)) == ["bench.kb", "q1.q", "q2.q", "q3.q", "q4.q", "q5.q"]
    assert (out1 / "bench.kb").read_bytes() == (out2 / "bench.kb").read_bytes()
    code, out, _ = cli(capsys, "answer", str(out1 / "bench.kb"), str(out1 / "q3.q"))
    assert code == 0 and out.startswith("(u0d0g0l0)")


@pytest.mark.parametrize("argv", [["answer", "x"], ["gen-hard", "nope", "--cnf", "1 0"]])
def test_argument_errors(capsys, argv):
    assert cli(capsys, *argv)[0] == 1
