import csv
import io
import json
from importlib import resources

import jsonschema
import pytest

from l0lra.cli import BENCH_COLUMNS, main
from l0lra.core import l0_error, parse, parse_pair

SCHEMA = json.loads(resources.files("l0lra").joinpath("schemas/run_result.schema.json").read_text())


def gen(tmp_path, name="a.txt", n=5, k=1, errors=2, seed=0):
    out = tmp_path / name
    assert main(["gen", "--n", str(n), "--k", str(k), "--errors", str(errors), "--seed", str(seed),
                 "--out", str(out)]) == 0
    return out


def test_gen_is_byte_identical(tmp_path):
    a, b = gen(tmp_path, "a.txt"), gen(tmp_path, "b.txt")
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.txt.planted.json").read_bytes() == (tmp_path / "b.txt.planted.json").read_bytes()
    c = gen(tmp_path, "c.txt", seed=1)
    assert c.read_bytes() != a.read_bytes()


@pytest.mark.parametrize("argv", [
    ["--n", "3", "--k", "1", "--errors", "10"],
    ["--n", "3", "--k", "4"],
    ["--k", "1"],
])
def test_gen_rejects_bad_sizes(tmp_path, argv):
    assert main(["gen", *argv, "--out", str(tmp_path / "x.txt")]) == 4


def test_solve_results_validate_and_witnesses_match(tmp_path):
    inst = gen(tmp_path, n=5, errors=2)
    out = tmp_path / "run.json"
    assert main(["solve", str(inst), "--k", "1", "--out", str(out)]) == 0
    result = json.loads(out.read_text())
    jsonschema.validate(result, SCHEMA)
    assert result["mode"] == "hinted" and result["shape"] == [5, 5]
    A = parse(inst.read_text())
    ok = [r for r in result["solvers"] if r["status"] == "ok"]
    assert {r["solver"] for r in ok} >= {"exact_rank1", "additive", "ptas"}
    for r in ok:
        pair = parse_pair(open(r["witness"]).read())
        assert l0_error(A, pair.product()) == r["error"]


def test_solve_flags(tmp_path):
    inst = gen(tmp_path, n=4, k=2, errors=1)
    out = tmp_path / "run.json"
    assert main(["solve", str(inst), "--k", "2", "--solver", "exact_rank1,ptas", "--out", str(out)]) == 0
    runs = {r["solver"]: r for r in json.loads(out.read_text())["solvers"]}
    assert runs["exact_rank1"]["status"] == "skipped" and "unsupported-k" in runs["exact_rank1"]["flags"]
    assert "degraded" in runs["ptas"]["flags"]
    (tmp_path / "a.txt.planted.json").unlink()
    assert main(["solve", str(inst), "--k", "2", "--mode", "hinted", "--out", str(out)]) == 4


def test_solve_exhaustive_and_parse_errors(tmp_path):
    inst = tmp_path / "m.txt"
    inst.write_text("2 2\n1 0\n0 1\n")
    out = tmp_path / "run.json"
    assert main(["solve", str(inst), "--k", "1", "--solver", "exact_rank1,additive", "--out", str(out)]) == 0
    result = json.loads(out.read_text())
    jsonschema.validate(result, SCHEMA)
    assert result["mode"] == "exhaustive"
    assert [r["error"] for r in result["solvers"]] == [1, 1]
    bad = tmp_path / "bad.txt"
    bad.write_text("2 2\n1 x\n0 1\n")
    assert main(["solve", str(bad), "--k", "1", "--out", str(out)]) == 3
    assert main(["solve", str(inst), "--k", "1", "--solver", "magic", "--out", str(out)]) == 4


def test_budget_env_and_flag(tmp_path, monkeypatch):
    inst = tmp_path / "m.txt"
    inst.write_text("3 3\n1 0 0\n0 1 0\n0 0 1\n")
    out = tmp_path / "run.json"
    monkeypatch.setenv("L0LRA_BUDGET", "1")
    assert main(["solve", str(inst), "--k", "1", "--solver", "exact_rank1", "--out", str(out)]) == 6
    run = json.loads(out.read_text())
    assert run["budget"] == 1 and "budget-exhausted" in run["solvers"][0]["flags"]
    assert main(["solve", str(inst), "--k", "1", "--solver", "exact_rank1", "--budget", "100000",
                 "--out", str(out)]) == 0
    assert json.loads(out.read_text())["budget"] == 100000
    monkeypatch.setenv("L0LRA_BUDGET", "lots")
    assert main(["solve", str(inst), "--k", "1", "--out", str(out)]) == 4


def test_reduce(tmp_path, capsys):
    sc = tmp_path / "sc.txt"
    sc.write_text("2 3\n1\n2\n1 2\n")
    out = tmp_path / "M.txt"
    assert main(["reduce", str(sc), "--out", str(out), "--cover", "3"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["k"] == 1 and summary["certificate_error"] == 1 and summary["cover"] == [3]
    assert parse(out.read_text()).shape == (3, 5)
    assert main(["reduce", str(sc), "--out", str(out), "--cover", "1"]) == 4
    assert main(["reduce", str(sc), "--out", str(out), "--cover", "0"]) == 4
    assert main(["reduce", str(sc), "--out", str(out), "--cover", "9"]) == 4
    no = tmp_path / "no.txt"
    no.write_text("3 2\n1 2\n1\n")
    assert main(["reduce", str(no), "--out", str(out)]) == 5
    broken = tmp_path / "broken.txt"
    broken.write_text("2 3\n1\n")
    assert main(["reduce", str(broken), "--out", str(out)]) == 3


def test_reduce_is_deterministic(tmp_path):
    sc = tmp_path / "sc.txt"
    sc.write_text("2 3\n1\n2\n1 2\n")
    for name in ("x", "y"):
        assert main(["reduce", str(sc), "--out", str(tmp_path / f"{name}.txt"), "--cover", "1,2",
                     "--summary", str(tmp_path / f"{name}.json")]) == 0
    assert (tmp_path / "x.txt").read_bytes() == (tmp_path / "y.txt").read_bytes()
    assert (tmp_path / "x.txt.certificate").read_bytes() == (tmp_path / "y.txt.certificate").read_bytes()


def bench(tmp_path, name, *extra):
    out = tmp_path / name
    assert main(["bench", *extra, "--out", str(out)]) == 0
    return list(csv.DictReader(io.StringIO(out.read_text())))


def test_bench_empty_suite_is_header_only(tmp_path):
    out = tmp_path / "e.csv"
    assert main(["bench", "--out", str(out)]) == 0
    assert out.read_text() == ",".join(BENCH_COLUMNS) + "\n"


def test_bench_deterministic_modulo_time(tmp_path):
    args = ["--sizes", "3-4", "--ks", "1", "--errors", "1", "--seeds", "0,1", "--solver", "exact_rank1,additive"]
    a = bench(tmp_path, "a.csv", *args)
    b = bench(tmp_path, "b.csv", *args, "--jobs", "2")
    assert len(a) == 8
    strip = [{c: r[c] for c in BENCH_COLUMNS if c != "time_ms"} for r in a]
    assert strip == [{c: r[c] for c in BENCH_COLUMNS if c != "time_ms"} for r in b]
    assert all(int(r["error"]) <= 1 for r in a if r["solver"] == "exact_rank1")


def test_bench_suite_file(tmp_path):
    suite = tmp_path / "suite.json"
    suite.write_text(json.dumps({"sizes": [3], "ks": [1], "errors": [0], "seeds": [5], "solvers": ["ptas"]}))
    rows = bench(tmp_path, "s.csv", "--suite", str(suite))
    assert [(r["solver"], r["error"]) for r in rows] == [("ptas", "0")]
    suite.write_text("{not json")
    assert main(["bench", "--suite", str(suite)]) == 3
    suite.write_text(json.dumps({"sizes": [-1]}))
    assert main(["bench", "--suite", str(suite)]) == 4


def test_usage_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
