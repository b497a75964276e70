import subprocess
import sys

import pytest

from ramanqkd import cli
from ramanqkd.sweep import FIELD_NAMES, read_csv

BAD_RANGE = """
[fiber]
profile = "leaf"
[detector]
eta = 0.1
dark_rate_per_ns = 1e-6
[protocol]
visibility = 0.99
[classical]
format = "PM-16QAM"
fec = "none"
n_forward = 1
[classical.penalty]
beta = 0.1
"""


def run(*args):
    return subprocess.run([sys.executable, "-m", "ramanqkd", *args], capture_output=True, text=True)


def test_module_entry_point_sweep():
    r = run("sweep", "--scenario", "example1_dynes_1gbps")
    assert r.returncode == 0, r.stderr
    assert r.stdout.splitlines()[0] == ",".join(FIELD_NAMES)


def test_sweep_csv_and_plot(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert cli.main(["sweep", "--scenario", "table4", "--out", str(out), "--plot"]) == 0
    assert len(read_csv(out)) == 51
    assert (tmp_path / "s.py").exists()


def test_sweep_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cli.main(["sweep", "--scenario", "table6", "--out", str(a)])
    cli.main(["sweep", "--scenario", "table6", "--out", str(b), "--workers", "4"])
    assert a.read_bytes() == b.read_bytes()


def test_sweep_table_echoes_defaults(capsys):
    assert cli.main(["sweep", "--scenario", "example1_dynes_1gbps", "--format", "table"]) == 0
    out = capsys.readouterr().out
    assert "# lambda_nm = 1550.0" in out or "# [fiber]" in out
    assert "# eta_ec = 1.2" in out


def test_all_variants_write_one_file_each(tmp_path):
    out = tmp_path / "t.csv"
    assert cli.main(["sweep", "--scenario", "table3", "--out", str(out), "--all-variants"]) == 0
    assert len(list(tmp_path.glob("t_*.csv"))) == 4


def test_reach_table(capsys):
    assert cli.main(["reach", "--scenario", "table7"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("name") and len(lines) == 6


def test_fmax_defaults(capsys):
    assert cli.main(["fmax", "--D", "4.25", "--tau-fraction", "0.15"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("name,")
    f = float(lines[1].split(",")[5])
    assert f == pytest.approx(4.283, rel=1e-3)


def test_fmax_scenario(capsys):
    assert cli.main(["fmax", "--scenario", "table3", "--format", "table"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 5


def test_sensitivity(capsys):
    assert cli.main(["sensitivity", "--formats", "PM-BPSK", "PM-QPSK"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "format,fec,baud_gbaud,rx_sensitivity_dbm"
    assert len(lines) == 5


def test_validate_and_presets(capsys):
    assert cli.main(["validate", "--scenario", "annotated_example"]) == 0
    assert "[detector]" in capsys.readouterr().out
    assert cli.main(["presets"]) == 0
    assert "table7" in capsys.readouterr().out.split()


def test_noise_grid_verb(capsys):
    assert cli.main(["noise-grid", "--scenario", "fig06"]) == 0
    cap = capsys.readouterr()
    assert cap.out.startswith("length_km,p_out_dbm")
    assert cap.err.count("\n") <= 1


def test_fiber_override(capsys):
    assert cli.main(["validate", "--scenario", "table4", "--fiber", "leaf"]) == 0
    assert 'profile = "leaf"' in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    ["validate", "--scenario", "no_such_preset"],
    ["sweep"],
    ["frobnicate"],
    ["validate", "--scenario", "table4", "--fiber", "glass"],
])
def test_exit_code_invalid(argv, capsys):
    assert cli.main(argv) == 1


def test_exit_code_invalid_file(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("[fiber]\nprofile = 'leaf'\n")
    r = run("validate", "--scenario", str(p))
    assert r.returncode == 1
    assert "mandatory" in r.stderr


def test_exit_code_computation(tmp_path, capsys):
    p = tmp_path / "bad.toml"
    p.write_text(BAD_RANGE)
    assert cli.main(["sweep", "--scenario", str(p)]) == 2
    assert "computation error" in capsys.readouterr().err


def test_plot_requires_out(capsys):
    assert cli.main(["sweep", "--scenario", "table4", "--plot"]) == 1
