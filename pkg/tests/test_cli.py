import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from nlslab import io
from nlslab.cli import COMMANDS, emit_report, main, validate, UsageError
from nlslab.evolution import free_trajectory
from nlslab.harness import EstimateRecord, ScanReport
from nlslab.spectral_core import random_field

FAST = {
    "solve": {"n": 1, "k": 3, "K": 8, "T": 0.1, "J": 32, "tol": 1e-10, "seed": 1, "eps": 1e-2},
    "verify-strichartz": {"n": 1, "p": 8, "N": [4, 8, 16], "trials": 2, "seed": 7},
    "verify-cubes": {"n": 2, "p": 6, "center": [0.0, 0.0], "halfside": 2.0, "shift": [8, 0],
                     "trials": 2, "seed": 3},
    "verify-bernstein": {"n": 2, "M": [1, 2], "N": [4, 8, 16], "trials": 1, "seed": 2},
    "verify-strip": {"n": 2, "p": 6, "N": 8, "M": [1, 2, 4, 8], "trials": 1, "seed": 4},
    "verify-multilinear": {"n": 1, "k": 3, "N1": [8, 16, 32], "N_low": 4, "trials": 2, "seed": 5},
    "decompose": {"n": 2, "N1": 16, "N2": 4},
    "extremize": {"n": 1, "p": 8, "N": 4, "restarts": 2, "iters": 10, "baseline": 8, "seed": 0},
}


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data, indent=2))
    return str(path)


def run(tmp_path, command, data, *flags, out="out"):
    cfg = write_config(tmp_path, data)
    return main([command, "--config", cfg, "--out", str(tmp_path / out), *flags])


@pytest.mark.parametrize("command", COMMANDS)
def test_every_command_runs_and_writes(tmp_path, command, capsys):
    code = run(tmp_path, command, FAST[command])
    assert code in (0, 1)
    out = tmp_path / "out"
    summary = json.loads((out / f"{command}.json").read_text())
    assert set(summary) >= {"command", "params", "slope", "residual", "verdict", "records_file",
                            "wall_clock_s", "schema"}
    assert summary["schema"] == "1" and summary["command"] == command
    assert (code == 0) == (summary["verdict"] == "pass")
    rows = list(csv.reader((out / f"{command}.csv").open()))
    assert rows[0][:4] == ["command", "n", "k", "p"]
    assert rows[0][-6:] == ["M", "trial", "seed", "lhs", "rhs_factor", "ratio"]
    assert all(len(r) == len(rows[0]) for r in rows)
    assert f"{command}: verdict=" in capsys.readouterr().out


def test_solve_converges_and_round_trips(tmp_path):
    assert run(tmp_path, "solve", FAST["solve"]) == 0
    out = tmp_path / "out"
    summary = json.loads((out / "solve.json").read_text())
    assert summary["details"]["picard"]["converged"] is True
    traj = io.trajectory_from_dict(json.loads((out / "solve_trajectory.json").read_text()))
    assert traj.J == 32 and traj.T == pytest.approx(0.1)


def test_solve_nonconvergence_exits_1(tmp_path):
    cfg = dict(FAST["solve"], eps=50.0, max_iter=3, T=1.0)
    assert run(tmp_path, "solve", cfg) == 1
    summary = json.loads((tmp_path / "out" / "solve.json").read_text())
    assert summary["verdict"] == "fail"


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(N=[]),
    lambda d: d.update(N=[4, 12, 16]),
    lambda d: d.update(bogus=1),
    lambda d: d.pop("seed"),
    lambda d: d.pop("p"),
    lambda d: d.update(seed=-1),
    lambda d: d.update(seed=2 ** 64),
    lambda d: d.update(schema="2"),
    lambda d: d.update(command="solve"),
    lambda d: d.update(p=4),
])
def test_usage_errors_exit_2(tmp_path, mutate, capsys):
    data = dict(FAST["verify-strichartz"])
    mutate(data)
    assert run(tmp_path, "verify-strichartz", data) == 2
    assert "nlslab:" in capsys.readouterr().err


def test_unknown_field_reports_line(tmp_path, capsys):
    data = dict(FAST["verify-strichartz"], bogus=1)
    cfg = write_config(tmp_path, data)
    line = next(i for i, t in enumerate(open(cfg), 1) if '"bogus"' in t)
    assert main(["verify-strichartz", "--config", cfg]) == 2
    assert f"cfg.json:{line}:" in capsys.readouterr().err


def test_malformed_json_reports_position(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "n": 1,\n  "p": 8,\n  "N": [4, 8,\n}\n')
    assert main(["verify-strichartz", "--config", str(path)]) == 2
    assert "bad.json:5:" in capsys.readouterr().err


def test_missing_config_and_bad_flags(tmp_path):
    assert main(["verify-strichartz", "--config", str(tmp_path / "nope.json")]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2
    assert run(tmp_path, "verify-strichartz", FAST["verify-strichartz"], "--threads", "-1") == 2


def test_seed_flag_overrides_config(tmp_path):
    data = dict(FAST["verify-strichartz"])
    data.pop("seed")
    assert run(tmp_path, "verify-strichartz", data, "--seed", "7", out="a") == 0
    assert run(tmp_path, "verify-strichartz", FAST["verify-strichartz"], out="b") == 0
    assert (tmp_path / "a" / "verify-strichartz.csv").read_bytes() == \
        (tmp_path / "b" / "verify-strichartz.csv").read_bytes()


def test_same_config_gives_identical_csv(tmp_path):
    for out, threads in (("a", "1"), ("b", "1"), ("c", "2"), ("d", "0")):
        assert run(tmp_path, "verify-bernstein", FAST["verify-bernstein"], "--threads", threads,
                   out=out) == 0
    ref = (tmp_path / "a" / "verify-bernstein.csv").read_bytes()
    for out in "bcd":
        assert (tmp_path / out / "verify-bernstein.csv").read_bytes() == ref


def test_env_threads_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("NLSLAB_THREADS", "2")
    assert run(tmp_path, "verify-multilinear", FAST["verify-multilinear"], out="env") in (0, 1)
    monkeypatch.delenv("NLSLAB_THREADS")
    run(tmp_path, "verify-multilinear", FAST["verify-multilinear"], out="one")
    assert (tmp_path / "env" / "verify-multilinear.csv").read_bytes() == \
        (tmp_path / "one" / "verify-multilinear.csv").read_bytes()


def test_format_flag(tmp_path):
    run(tmp_path, "verify-cubes", FAST["verify-cubes"], "--format", "json", out="j")
    assert sorted(os.listdir(tmp_path / "j")) == ["verify-cubes.json"]
    assert json.loads((tmp_path / "j" / "verify-cubes.json").read_text())["records_file"] is None
    run(tmp_path, "verify-cubes", FAST["verify-cubes"], "--format", "csv", out="c")
    assert sorted(os.listdir(tmp_path / "c")) == ["verify-cubes.csv"]


def test_unwritable_output_exits_2(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = write_config(tmp_path, FAST["verify-cubes"])
    assert main(["verify-cubes", "--config", cfg, "--out", str(blocker / "sub")]) == 2


def test_module_entry_point(tmp_path):
    cfg = write_config(tmp_path, FAST["verify-cubes"])
    proc = subprocess.run([sys.executable, "-m", "nlslab.cli", "verify-cubes", "--config", cfg,
                           "--out", str(tmp_path / "m")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr


# emit_report and serialization -----------------------------------------------------------

def test_empty_report_is_header_only(tmp_path):
    report = ScanReport("verify-multilinear", {"n": 2, "k": 2}, [])
    emit_report(report, str(tmp_path))
    text = (tmp_path / "verify-multilinear.csv").read_text()
    assert text == "command,n,k,p,N1,N2,N3,M,trial,seed,lhs,rhs_factor,ratio\n"
    summary = json.loads((tmp_path / "verify-multilinear.json").read_text())
    assert summary["verdict"] == "insufficient-data"
    assert summary["slope"] is None


def test_summary_round_trip(tmp_path):
    rec = [EstimateRecord("verify-strichartz", 1, None, 8, (N,), None, 0, 7, 0.1 * N, 1.0 / 3)
           for N in (4, 8, 16)]
    report = ScanReport("verify-strichartz", {"n": 1, "p": 8}, rec, slope=0.25, residual=0.0,
                        verdict="fail")
    emit_report(report, str(tmp_path))
    back = io.read_json(str(tmp_path / "verify-strichartz.json"))
    assert back["verdict"] == "fail" and back["slope"] == 0.25
    rows = list(csv.DictReader((tmp_path / "verify-strichartz.csv").open()))
    assert [float(r["lhs"]) for r in rows] == [r.lhs for r in rec]
    assert float(rows[0]["rhs_factor"]) == 1.0 / 3
    assert rows[0]["k"] == "" and rows[0]["M"] == ""


def test_fmt_round_trips_floats():
    rng = np.random.default_rng(0)
    for x in rng.standard_normal(200) * 10.0 ** rng.integers(-30, 30, 200):
        assert float(io.fmt(x)) == x
    assert io.fmt(None) == "" and io.fmt(3) == "3" and io.fmt(float("inf")) == "inf"


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_field_and_trajectory_round_trip(dim):
    f = random_field(dim, 3, np.random.default_rng(dim))
    g = io.field_from_dict(json.loads(json.dumps(io.field_to_dict(f))))
    assert np.array_equal(g.coeffs, f.coeffs)
    traj = free_trajectory(f, 0.5, 4)
    back = io.trajectory_from_dict(json.loads(io.dumps(io.trajectory_to_dict(traj))))
    assert np.array_equal(back.states, traj.states)
    assert np.array_equal(back.times, traj.times)


def test_field_record_validation():
    with pytest.raises(ValueError):
        io.field_from_dict({"dim": 1, "cutoff": 2, "entries": [[0.5, 1.0, 0.0]]})
    with pytest.raises(ValueError):
        io.field_from_dict({"dim": 2, "cutoff": 2, "entries": [[0, 1.0, 0.0]]})
    with pytest.raises(ValueError):
        io.trajectory_from_dict({"header": {"dim": 1, "cutoff": 1, "J": 2, "T": 1.0}, "states": [[]]})


def test_validate_defaults():
    params = validate("decompose", {"n": 2, "N1": 16, "N2": 4})
    assert params["side"] is None and params["rotate"] is False
    with pytest.raises(UsageError):
        validate("decompose", {"n": 2, "N1": 16, "N2": 4, "rotate": True})
    with pytest.raises(UsageError):
        validate("verify-strip", {"n": 2, "p": 6, "N": 8, "M": [], "seed": 1})


def test_shipped_configs_validate():
    root = os.path.join(os.path.dirname(__file__), os.pardir, "configs")
    for command in COMMANDS:
        path = os.path.join(root, f"{command}.json")
        with open(path) as fh:
            validate(command, json.load(fh), path=path)
