import subprocess
import sys

import pytest

from cardenc.cli import main
from cardenc.cnf import read_dimacs, stats


def test_encode_and_stats(tmp_path, capsys):
    out = tmp_path / "c.cnf"
    assert main(["encode", "66", "36", "--method", "tree", "-o", str(out)]) == 0
    f = read_dimacs(out.read_text())
    assert stats(f).astuple() == (328, 1402, 3854, 132)
    assert main(["stats", str(out)]) == 0
    assert capsys.readouterr().out.splitlines()[-1] == "328 1402 3854 132"


def test_testcase_solve_exit_codes(tmp_path, capsys):
    sat, unsat = tmp_path / "s.cnf", tmp_path / "u.cnf"
    assert main(["testcase", "A152125", "3", "--method", "sort", "-o", str(sat)]) == 0
    assert main(["testcase", "A152125", "3", "--polarity", "unsat", "-o", str(unsat)]) == 0
    assert main(["solve", str(sat)]) == 10
    assert "s SATISFIABLE" in capsys.readouterr().out
    assert main(["solve", str(unsat), "--no-model"]) == 20


def test_enumerate(tmp_path, capsys):
    path = tmp_path / "c.cnf"
    main(["encode", "10", "4", "--method", "seq", "--variant", "equality", "-o", str(path)])
    capsys.readouterr()
    assert main(["enumerate", str(path), "--projection", "all"]) == 0
    assert capsys.readouterr().out.strip() == "210"
    assert main(["enumerate", str(path), "--cap", "5"]) == 1


def test_external_solve_via_module(tmp_path):
    path = tmp_path / "s.cnf"
    main(["testcase", "A319158", "4", "-o", str(path)])
    cmd = f"{sys.executable} -m cardenc solve {{file}}"
    proc = subprocess.run([sys.executable, "-m", "cardenc", "solve", str(path), "--external", cmd],
                          capture_output=True, text=True)
    assert proc.returncode == 10 and "s SATISFIABLE" in proc.stdout


def test_bench_command(tmp_path, capsys):
    cfg = tmp_path / "bench.cfg"
    cfg.write_text("testcases = A152125:3:SAT\nencodings = seq tree\nrepeats = 3\n")
    assert main(["bench", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# cardenc-summary v1") and len(out.strip().splitlines()) == 4


def test_sweep_counts(capsys):
    assert main(["sweep-counts", "--n-max", "25"]) == 0
    assert "0 with violations" in capsys.readouterr().out


def test_errors_give_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.cnf"
    bad.write_text("p cnf 1 1\n2 0\n")
    assert main(["stats", str(bad)]) == 2
    assert main(["encode", "5", "2", "--method", "seq", "--variant", "nope"]) == 2
    assert "error" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["encode"])
