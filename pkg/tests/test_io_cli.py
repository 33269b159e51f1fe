import hashlib
import os

import numpy as np
import pytest

from jinxin import cli, io
from jinxin.model import Grid, ModelParams
from jinxin.solvers import Trajectory


def sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_ini(tmp_path, text, name="cfg.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


SMALL = "[grid]\nn = 1024\nlength = 200.0\n"


# atomic writes

def test_atomic_write_replaces_and_cleans_up(tmp_path):
    target = tmp_path / "sub" / "a.txt"
    io.atomic_write(target, "one\n")
    io.atomic_write(target, b"two\n")
    assert target.read_bytes() == b"two\n"
    assert os.listdir(target.parent) == ["a.txt"]


def test_atomic_write_keeps_old_file_on_failure(tmp_path, monkeypatch):
    target = tmp_path / "a.txt"
    io.atomic_write(target, "old\n")

    def boom(src, dst):
        raise OSError("disk full")

    monkeypatch.setattr(io.os, "replace", boom)
    with pytest.raises(OSError):
        io.atomic_write(target, "new\n")
    assert target.read_text() == "old\n"
    assert os.listdir(tmp_path) == ["a.txt"]


# trajectory formats

def _trajectory():
    rng = np.random.default_rng(1)
    g = Grid(16, 3.0)
    return Trajectory(np.array([0.0, 0.1, 2.5]), rng.normal(size=(3, 2, 16)), ModelParams(0.1), g)


def test_binary_round_trip_and_layout(tmp_path):
    traj = _trajectory()
    path = io.write_trajectory_binary(tmp_path / "t.jxt", traj)
    raw = path.read_bytes()
    assert raw[:4] == b"JXT1"
    assert int.from_bytes(raw[4:12], "little") == 16 and int.from_bytes(raw[12:20], "little") == 2
    assert len(raw) == 20 + 3 * 8 * (1 + 2 * 16)
    times, states = io.read_trajectory_binary(path)
    assert np.array_equal(times, traj.times) and np.array_equal(states, traj.states)


def test_binary_reader_rejects_bad_files(tmp_path):
    bad = tmp_path / "bad.jxt"
    bad.write_bytes(b"XXXX" + bytes(16))
    with pytest.raises(ValueError, match="magic"):
        io.read_trajectory_binary(bad)
    raw = io.trajectory_bytes(_trajectory())
    bad.write_bytes(raw[:-8])
    with pytest.raises(ValueError, match="truncated"):
        io.read_trajectory_binary(bad)


def test_csv_round_trip(tmp_path):
    traj = _trajectory()
    path = io.write_trajectory_csv(tmp_path / "t.csv", traj)
    assert path.read_text().splitlines()[0].startswith("t,comp,v0,v1")
    times, states = io.read_trajectory_csv(path)
    assert np.array_equal(times, traj.times) and np.array_equal(states, traj.states)


def test_summary_round_trip(tmp_path):
    path = io.write_summary(tmp_path / "s.txt", {"study": "x", "pass": "true"})
    assert path.read_text() == "study=x\npass=true\n"
    assert io.read_summary(path) == {"study": "x", "pass": "true"}


# green-table

def test_green_table_structure_and_determinism(tmp_path):
    assert cli.main(["green-table", "--out", str(tmp_path)]) == 0
    path = tmp_path / "green_table.csv"
    lines = path.read_text().splitlines()
    assert lines[0].split(",") == io.green_table_header()
    assert len(lines[0].split(",")) == 2 + 4 * 8
    assert len(lines) - 1 == 6 * 4
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    at0 = data[data[:, 1] == 0.0]
    assert len(at0) == 6
    gamma = at0[:, 2:10:2] + 1j * at0[:, 3:11:2]
    assert np.array_equal(gamma, np.tile([1, 0, 0, 1], (6, 1)))
    first = sha(path)
    assert cli.main(["green-table", "--out", str(tmp_path)]) == 0
    assert sha(path) == first


# configuration handling

def test_help_lists_defaults(capsys):
    assert cli.main(["--help"]) == 0
    out = capsys.readouterr().out
    assert "[epsilon]" in out and "amplitude = 0.05" in out and "exit codes" in out


def test_unknown_key_is_config_error(tmp_path, capsys):
    cfg = write_ini(tmp_path, "[model]\nepsilon = 0.1\n\nbogus = 1\n")
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "cfg.ini:4" in err and "bogus" in err


def test_unknown_section_and_bad_values(tmp_path):
    assert cli.main(["green-table", "--config", write_ini(tmp_path, "[nope]\nx = 1\n"), "--out", str(tmp_path)]) == 2
    assert cli.main(["green-table", "--config", write_ini(tmp_path, "[model]\nepsilon = abc\n"), "--out", str(tmp_path)]) == 2
    assert cli.main(["green-table", "--config", write_ini(tmp_path, "[model]\na = 20\n"), "--out", str(tmp_path)]) == 2
    assert cli.main(["green-table", "--config", str(tmp_path / "missing.ini"), "--out", str(tmp_path)]) == 2
    assert cli.main(["green-table", "--jobs", "0", "--out", str(tmp_path)]) == 2


def test_seedless_is_a_bare_flag(tmp_path):
    assert cli.main(["green-table", "--seedless", "--out", str(tmp_path)]) == 0
    assert cli.main(["green-table", "--seedless=1", "--out", str(tmp_path)]) == 2


def test_out_falls_back_to_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("JINXIN_OUT", str(tmp_path / "env"))
    assert cli.main(["green-table"]) == 0
    assert (tmp_path / "env" / "green_table.csv").exists()


# simulate

def test_simulate_linear_matches_propagator(tmp_path):
    cfg = write_ini(tmp_path, SMALL + "[model]\nh =\na = 0.5\n")
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 0
    s = io.read_summary(tmp_path / "simulate_summary.txt")
    assert float(s["linear_discrepancy"]) <= 1e-9
    assert float(s["mass_drift"]) <= 1e-11
    times, states = io.read_trajectory_binary(tmp_path / "trajectory.jxt")
    assert len(times) == 11 and states.shape == (11, 2, 1024)


@pytest.mark.parametrize("solver", ["cd", "bgk", "parabolic"])
def test_simulate_each_solver_csv(tmp_path, solver):
    cfg = write_ini(tmp_path, SMALL + f"[simulate]\nsolver = {solver}\nt_final = 1.0\nformat = csv\n")
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 0
    assert float(io.read_summary(tmp_path / "simulate_summary.txt")["mass_drift"]) <= 1e-11
    times, states = io.read_trajectory_csv(tmp_path / "trajectory.csv")
    assert states.shape[1] == (1 if solver == "parabolic" else 2)


def test_simulate_large_amplitude_is_numerical_failure(tmp_path, capsys):
    cfg = write_ini(tmp_path, SMALL + "[initial]\namplitude = 10\n")
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 3
    assert "blow-up" in capsys.readouterr().err


# studies

def test_decay_study_cli_linear(tmp_path):
    cfg = write_ini(tmp_path, "[model]\nh =\n[grid]\nn = 16384\n[initial]\nkind = conservative\n")
    assert cli.main(["decay-study", "--config", cfg, "--out", str(tmp_path)]) == 0
    text = (tmp_path / "decay_study.csv").read_text()
    assert text.splitlines()[0].startswith("t,composite,w1,w2,dxu,dtw1,S")
    assert sum(line.startswith("#fit") for line in text.splitlines()) == 6
    s = io.read_summary(tmp_path / "decay_summary.txt")
    assert s["pass"] == "true" and abs(float(s["exponent_w1"]) + 0.25) <= 0.05


def test_decay_study_guard_is_config_error(tmp_path, capsys):
    cfg = write_ini(tmp_path, "[decay]\nt_hi = 5000\n")
    assert cli.main(["decay-study", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert "margin" in capsys.readouterr().err


def test_epsilon_study_exit_code_tracks_pass_flag(tmp_path):
    cfg = write_ini(tmp_path, "[epsilon]\neps = 0.2, 0.1\nt_final = 12\nn = 512\n[solver]\ndt = 0.02\n")
    code = cli.main(["epsilon-study", "--config", cfg, "--out", str(tmp_path), "--jobs", "2"])
    s = io.read_summary(tmp_path / "epsilon_summary.txt")
    assert code == (0 if s["pass"] == "true" else 4)
    assert "slope_err" in s and "pass_eps_slope" in s


def test_bgk_check_small(tmp_path):
    cfg = write_ini(tmp_path, SMALL + "[bgk]\nt_final = 1.0\n")
    assert cli.main(["bgk-check", "--config", cfg, "--out", str(tmp_path)]) == 0
    s = io.read_summary(tmp_path / "bgk_check_summary.txt")
    assert float(s["l2_gap"]) <= 1e-6 and s["pass"] == "true"
