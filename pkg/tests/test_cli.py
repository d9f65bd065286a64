"""Benchmark CLI: subcommands, TOML defaults, exit codes."""

import csv
import subprocess
import sys

import numpy as np
import pytest

from fastnft.bench import flop_count, read_results_csv
from fastnft.cli import main
from fastnft.signals import sample_sech_focusing, write_signal_csv


def test_flops_subcommand(capsys):
    assert main(["flops", "--method", "cf2,fcf2", "--D", "256,512"]) == 0
    out = capsys.readouterr().out
    lines = [ln for ln in out.splitlines() if ln.strip()]
    assert lines[0].split() == ["method", "D", "M", "flops"]
    assert len(lines) == 5
    expect = f"{flop_count('cf2', 256, 256)[0]:.6e}"
    assert lines[1].split() == ["cf2", "256", "256", expect]


def test_flops_m_override(capsys):
    assert main(["flops", "--method", "fcf2", "--D", "1024", "--M", "256"]) == 0
    assert f"{flop_count('fcf2', 1024, 256)[0]:.6e}" in capsys.readouterr().out


def test_run_subcommand_flags(tmp_path, capsys, warm):
    out = tmp_path / "rows.csv"
    code = main(["run", "--example", "1", "--method", "cf1", "--method",
                 "cf2", "--D", "64,128", "--M", "16", "--lambda-max", "6",
                 "--repetitions", "1", "--out", str(out)])
    assert code == 0
    printed = capsys.readouterr().out
    assert "E_rho" in printed and "slope[cf1]" in printed
    assert f"wrote {out}" in printed
    rows = read_results_csv(out)
    assert [(r["method"], r["d"]) for r in rows] == [
        ("cf1", 64), ("cf2", 64), ("cf1", 128), ("cf2", 128)]


def test_run_subcommand_toml_defaults_and_overrides(tmp_path, capsys, warm):
    out = tmp_path / "rows.csv"
    cfg = tmp_path / "sweep.toml"
    cfg.write_text(
        'example = "1"\n'
        'methods = ["cf2"]\n'
        'd_values = [64, 128]\n'
        'm_points = 16\n'
        'lambda_max = 6.0\n'
        'repetitions = 1\n'
        f'out = "{out}"\n')
    assert main(["run", "--config", str(cfg)]) == 0
    assert len(read_results_csv(out)) == 2
    # command-line flags win over the file
    assert main(["run", "--config", str(cfg), "--D", "64"]) == 0
    assert len(read_results_csv(out)) == 1
    capsys.readouterr()


def test_eigen_subcommand(tmp_path, capsys, warm):
    out = tmp_path / "eigen.csv"
    code = main(["eigen", "--example", "1", "--method", "cf2", "--D", "512",
                 "--out", str(out)])
    assert code == 0
    printed = capsys.readouterr().out
    assert "found" in printed and "E_lambda" in printed
    with open(out, newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["re_lambda", "im_lambda", "status", "re_init",
                       "im_init"]
    refined = [r for r in rows[1:] if r[2] == "refined"]
    assert len(refined) == 5


def test_bad_configuration_exits_2(tmp_path, capsys):
    # unknown method id
    assert main(["run", "--method", "bogus", "--D", "64"]) == 2
    assert "configuration error" in capsys.readouterr().err
    # unknown TOML key
    cfg = tmp_path / "bad.toml"
    cfg.write_text('example = "1"\nnonsense = 3\n')
    assert main(["run", "--config", str(cfg)]) == 2
    # malformed TOML
    cfg.write_text("= not toml\n")
    assert main(["run", "--config", str(cfg)]) == 2
    # example csv without a signal
    assert main(["run", "--example", "csv", "--D", "64"]) == 2
    # eigen with two methods
    assert main(["eigen", "--method", "cf1", "--method", "cf2",
                 "--D", "64"]) == 2
    capsys.readouterr()


@pytest.mark.filterwarnings("ignore:invalid value")
def test_numerical_failure_exits_3(tmp_path, capsys):
    sig = sample_sech_focusing(64, t_minus=-1.0, t_plus=1.0)
    sig.samples[10] = np.nan
    path = tmp_path / "nan.csv"
    write_signal_csv(path, sig)
    code = main(["eigen", "--example", "csv", "--signal", str(path),
                 "--method", "cf2", "--D", "64"])
    assert code == 3
    assert "numerical failure" in capsys.readouterr().err


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fastnft.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "run" in proc.stdout and "eigen" in proc.stdout \
        and "flops" in proc.stdout
