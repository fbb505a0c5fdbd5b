import subprocess
import sys

import pytest

from parsimplex import cli
from parsimplex.lp_model import dump_problem, load_problem


@pytest.fixture
def textbook_file(tmp_path, textbook):
    path = tmp_path / "textbook.lp"
    dump_problem(textbook, path)
    return path


@pytest.mark.parametrize("extra", [[], ["--threads", "3", "--chunk-min", "1"], ["--serial"]])
def test_solve_textbook(textbook_file, capsys, extra):
    code = cli.main(["solve", str(textbook_file), "--print-x"] + extra)
    out = capsys.readouterr().out
    assert code == cli.EXIT_OPTIMAL
    assert out.splitlines()[0] == "Optimal z=36"
    assert "iterations=2" in out
    assert "elapsed=" in out
    assert "x=2 6" in out


def test_solve_unbounded(tmp_path, unbounded, capsys):
    path = tmp_path / "u.lp"
    dump_problem(unbounded, path)
    assert cli.main(["solve", str(path), "--threads", "2"]) == cli.EXIT_UNBOUNDED
    assert capsys.readouterr().out.startswith("Unbounded")


def test_solve_iteration_limit(tmp_path, beale, capsys):
    path = tmp_path / "beale.lp"
    dump_problem(beale, path)
    assert cli.main(["solve", str(path), "--max-iterations", "10"]) == cli.EXIT_ITERATION_LIMIT
    assert cli.main(["solve", str(path), "--bland-after", "2"]) == cli.EXIT_OPTIMAL


def test_solve_malformed_header(tmp_path, capsys):
    path = tmp_path / "bad.lp"
    path.write_text("3 3\n")
    assert cli.main(["solve", str(path)]) == cli.EXIT_PARSE_ERROR
    assert "line 1" in capsys.readouterr().err


def test_solve_negative_rhs_is_rejected(tmp_path, capsys):
    path = tmp_path / "neg.lp"
    path.write_text("1 1 1.0 -\n1\n-2\n1\n")
    assert cli.main(["solve", str(path)]) == cli.EXIT_PARSE_ERROR


def test_solve_missing_file(tmp_path):
    assert cli.main(["solve", str(tmp_path / "nope.lp")]) == cli.EXIT_ERROR


def test_gen_round_trip(tmp_path, capsys):
    path = tmp_path / "g.lp"
    assert cli.main(["gen", "--m", "5", "--n", "7", "--density", "0.5", "--seed", "9",
                     "--out", str(path)]) == 0
    p = load_problem(path)
    assert (p.m, p.n, p.density, p.seed) == (5, 7, 0.5, 9)
    assert cli.main(["gen", "--m", "2", "--n", "2"]) == 0
    assert capsys.readouterr().out.startswith("2 2 0.9 1\n")


def test_cachelimit(capsys):
    assert cli.main(["cachelimit", "--m", "2048", "--n", "2048"]) == 0
    captured = capsys.readouterr()
    lines = captured.out.splitlines()
    assert lines[:7] == ["b,max_constraints", "256,2771", "512,2651", "1024,2429", "2048,2048",
                         "4096,1499", "8192,920"]
    assert "exact tableau bytes for 2048x2048: 67158024" in captured.out
    assert "1499" in captured.err and "920" in captured.err


def test_bench(tmp_path, capsys):
    code = cli.main(["bench", "--m", "6", "--n", "6", "8", "--threads", "2", "1", "--runs", "1",
                     "--chunk-min", "2", "--out", str(tmp_path)])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "m,n,P,median_s,speedup,efficiency,over_cache_limit"
    assert len(lines) == 5
    assert (tmp_path / "report.csv").exists()
    assert (tmp_path / "speedup_m6.csv").exists()


def test_bench_convention_error(capsys):
    assert cli.main(["bench", "--m", "4", "--n", "4", "--threads", "1", "--runs", "1"]) == cli.EXIT_ERROR
    assert "P=2" in capsys.readouterr().err


def test_usage_error():
    with pytest.raises(SystemExit) as err:
        cli.main(["solve"])
    assert err.value.code == 2


def test_module_entry_point(textbook_file):
    proc = subprocess.run([sys.executable, "-m", "parsimplex", "solve", str(textbook_file)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("Optimal z=36")
