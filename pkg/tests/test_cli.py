import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from gave.cli import build_parser, main, parse_example, parse_grid, UsageError
from gave.linalg import Matrix
from gave.mmio import write_matrix, write_vector
from gave.problems import random_problem, save_problem
from conftest import EX1_A, EX1_B

SUBCOMMANDS = ("solve", "check", "sweep", "bench", "generate")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def ex1_files(tmp_path):
    write_matrix(tmp_path / "a.mtx", Matrix.dense(EX1_A))
    write_matrix(tmp_path / "b.mtx", Matrix.dense(EX1_B))
    write_vector(tmp_path / "c.mtx", np.array([1.0, 2.0]))
    return [f"--a={tmp_path / 'a.mtx'}", f"--b={tmp_path / 'b.mtx'}", f"--c={tmp_path / 'c.mtx'}"]


def test_parse_helpers():
    assert parse_example("m=20,block_rows=10") == (20, 10)
    assert parse_example("20") == (20, None)
    with pytest.raises(UsageError):
        parse_example("n=3")
    with pytest.raises(UsageError):
        parse_example("m=x")
    assert parse_grid("0.5:0.25:1") == (0.5, 0.75, 1.0)
    assert len(parse_grid("0.01:0.01:2")) == 200
    with pytest.raises(UsageError):
        parse_grid("1:0:2")


def test_solve_benchmark_gnms(capsys):
    code, out, _ = run(capsys, "solve", "--example", "m=20", "--method", "gnms", "--tau", "1.0")
    assert code == 0
    fields = dict(line.split(": ", 1) for line in out.splitlines())
    assert fields["termination"] == "converged"
    assert abs(int(fields["IT"]) - 8) <= 2


def test_solve_json_history(capsys):
    code, out, _ = run(capsys, "solve", "--example", "6", "--method", "picard", "--history", "--format", "json")
    data = json.loads(out)
    assert code == 0
    assert len(data["history"]) == data["iterations"] + 1
    assert data["history"][-1] == data["res"] <= 1e-8


def test_solve_from_files_picard(capsys, tmp_path):
    p = random_problem(12, seed=4, condition_target=0.5)
    save_problem(p, tmp_path)
    code, out, _ = run(capsys, "check", "--problem", str(tmp_path), "--condition", "picard-norm")
    assert code == 0
    files = [f"--a={tmp_path / 'A.mtx'}", f"--b={tmp_path / 'B.mtx'}", f"--c={tmp_path / 'c.mtx'}"]
    code, out, _ = run(capsys, "solve", *files, "--method", "picard")
    assert code == 0 and "termination: converged" in out


def test_solve_iteration_limit(capsys):
    code, out, _ = run(capsys, "solve", "--example", "6", "--method", "picard", "--max-iter", "3")
    assert code == 2 and "max_iter" in out


def test_solve_divergence(capsys, tmp_path):
    write_matrix(tmp_path / "a.mtx", Matrix.identity(2))
    write_matrix(tmp_path / "b.mtx", Matrix.dense([[3.0, 0.0], [0.0, 3.0]]))
    write_vector(tmp_path / "c.mtx", np.array([1.0, 1.0]))
    files = [f"--{k}={tmp_path / k}.mtx" for k in "abc"]
    code, _, _ = run(capsys, "solve", *files, "--method", "picard", "--max-iter", "2000")
    assert code == 3


def test_missing_method_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["solve", "--example", "m=5"])
    assert info.value.code == 1
    assert "usage:" in capsys.readouterr().err


def test_two_sources_rejected(capsys, ex1_files):
    code, _, err = run(capsys, "solve", "--example", "5", *ex1_files, "--method", "picard")
    assert code == 1 and "exactly one" in err


def test_missing_file_is_io_error(capsys, tmp_path):
    code, _, err = run(capsys, "solve", "--problem", str(tmp_path / "none"), "--method", "picard")
    assert code == 1 and "error" in err


def test_check_picard_norm_fails(capsys, ex1_files):
    code, out, _ = run(capsys, "check", *ex1_files, "--condition", "picard-norm")
    assert code == 4
    assert "1.09" in out


def test_check_picard_rho_json(capsys, ex1_files):
    # rho(|A^-1 B|) for this pair is the Perron root 1.2626 of [[0.64, 0.4], [0.72, 0.8]]
    code, out, _ = run(capsys, "check", *ex1_files, "--condition", "picard-rho", "--format", "json")
    data = json.loads(out)
    assert code == 4 and data["holds"] is False
    assert data["values"]["rho_abs_Ainv_B"] == pytest.approx(1.2626, abs=1e-3)


def test_check_theorem_needs_splitting_flags(capsys):
    code, _, err = run(capsys, "check", "--example", "6", "--condition", "theorem-3-1")
    assert code == 1 and "--splitting" in err
    code, out, _ = run(capsys, "check", "--example", "6", "--condition", "theorem-3-1",
                       "--splitting", "weighted", "--q1", "10", "--q2", "0.5")
    assert code == 0 and "holds" in out


def test_check_corollary_reports_tau_bound(capsys):
    code, out, _ = run(capsys, "check", "--example", "6", "--condition", "corollary-3-2",
                       "--splitting", "weighted", "--q1", "10", "--q2", "0.5", "--format", "json")
    data = json.loads(out)
    assert (code == 0) == data["holds"]
    assert "tau_upper_bound" in data["values"]


def test_sweep_rms(capsys):
    code, out, _ = run(capsys, "sweep", "--example", "m=20", "--method", "rms", "--grid", "0.9:0.01:1.1",
                       "--repetitions", "1")
    assert code == 0
    fields = dict(line.split(": ", 1) for line in out.splitlines())
    assert float(fields["tau_opt"]) == pytest.approx(0.99, abs=0.02)


def test_bench_csv_lists_all_methods(capsys):
    code, out, _ = run(capsys, "bench", "--example", "m=20", "--format", "csv", "--repetitions", "1")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert len(rows) == 12
    assert {r["method"] for r in rows} == {"GNMS", "MN", "Picard", "FPI", "NMS", "NGS", "RMS", "SSMN"}
    assert all(float(r["res"]) <= 1e-8 for r in rows)


def test_bench_unknown_method(capsys):
    code, _, err = run(capsys, "bench", "--example", "5", "--methods", "newton")
    assert code == 1 and "unknown method" in err


def test_bench_deterministic_apart_from_time(capsys):
    argv = ["bench", "--example", "6", "--methods", "picard,mn", "--repetitions", "2", "--format", "json"]
    first = json.loads(run(capsys, *argv)[1])
    second = json.loads(run(capsys, *argv)[1])
    for a, b in zip(first, second):
        a.pop("cpu_s"), b.pop("cpu_s")
        assert a == b


def test_generate_example(capsys, tmp_path):
    code, out, _ = run(capsys, "generate", "--example", "m=9", "--out", str(tmp_path / "g"))
    assert code == 0
    assert out.strip().endswith("manifest.txt")
    names = sorted(p.name for p in (tmp_path / "g").iterdir())
    assert names == ["A.mtx", "B.mtx", "c.mtx", "manifest.txt", "x_star.mtx"]


def test_generate_random_is_reproducible(capsys, tmp_path):
    for d in ("r1", "r2"):
        run(capsys, "generate", "--random", "n=6,target=0.4", "--seed", "3", "--out", str(tmp_path / d))
    for name in ("A.mtx", "B.mtx", "c.mtx", "manifest.txt"):
        assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()
    code, _, err = run(capsys, "generate", "--random", "target=0.4", "--out", str(tmp_path / "r3"))
    assert code == 1 and "needs n" in err


@pytest.mark.parametrize("command", SUBCOMMANDS)
def test_help_documents_every_flag(capsys, command):
    with pytest.raises(SystemExit) as info:
        main([command, "--help"])
    assert info.value.code == 0
    text = capsys.readouterr().out
    sub = build_parser()._subparsers._group_actions[0].choices[command]
    for action in sub._actions:
        for flag in action.option_strings:
            assert flag in text
        if action.option_strings and action.dest != "help":
            assert action.help


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gave", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("gave ")
