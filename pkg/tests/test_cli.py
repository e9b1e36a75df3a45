import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from clebsch.cli import main, validate_config
from clebsch.cli.config import ConfigError, normalized
from clebsch.cli.scenarios import csv_columns


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def finite_config(tmp_path, **overrides):
    data = {
        "backend": "finite",
        "group": "so3",
        "horizon": 0.5,
        "integrator": {"dt": 0.05},
        "output": {"directory": str(tmp_path / "runs"), "name": "demo"},
        "mechanics": {"bodies": 2, "quartic": 0.3, "pair": 0.2, "xi": [0.1, 0.0, 0.4]},
    }
    data.update(overrides)
    return data


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], [[float(x) for x in r] for r in rows[1:]]


def test_run_writes_artifacts(tmp_path, capsys):
    cfg = write_config(tmp_path, finite_config(tmp_path))
    assert main(["run", cfg]) == 0
    out = tmp_path / "runs" / "demo"
    header, rows = read_csv(out / "timeseries.csv")
    assert header == ["t", "H", "C_norm", "J_0", "J_1", "J_2"]
    assert len(rows) == 11 and rows[-1][0] == pytest.approx(0.5)
    summary = json.loads((out / "summary.json").read_text())
    assert summary["steps"] == 10 and summary["drift_column"] == "C_norm"
    assert set(summary["final"]) == set(header)
    assert "wrote" in capsys.readouterr().out


def test_csv_format(tmp_path):
    cfg = write_config(tmp_path, finite_config(tmp_path))
    main(["run", cfg])
    raw = (tmp_path / "runs" / "demo" / "timeseries.csv").read_bytes()
    assert b"\r\n" not in raw and raw.endswith(b"\n")
    # 17 significant digits: 0.05 is written as its exact double expansion
    second = raw.split(b"\n")[2].decode().split(",")
    assert second[0] == "0.050000000000000003"
    assert all("e" in f or "." in f or f.lstrip("-").isdigit() for f in second)


def test_config_echo_round_trip(tmp_path):
    cfg = write_config(tmp_path, finite_config(tmp_path))
    main(["run", cfg])
    summary = json.loads((tmp_path / "runs" / "demo" / "summary.json").read_text())
    again = validate_config(summary["config"])
    assert normalized(again) == summary["config"]


def test_zero_horizon_gives_one_row(tmp_path):
    cfg = write_config(tmp_path, finite_config(tmp_path, horizon=0.0))
    assert main(["run", cfg]) == 0
    _, rows = read_csv(tmp_path / "runs" / "demo" / "timeseries.csv")
    assert len(rows) == 1 and rows[0][0] == 0.0


@pytest.mark.parametrize(
    "change, field",
    [
        ({"backend": "ymh", "group": "so3"}, "group"),
        ({"backend": "gr"}, "group"),
        ({"horizon": 0.33}, "horizon"),
        ({"colour": "red"}, "colour"),
        ({"integrator": {"dt": -1.0}}, "integrator.dt"),
        ({"mechanics": {"q0": [1.0, 2.0]}}, "mechanics.q0"),
        ({"lattice": {"n": 4}}, "lattice"),
    ],
)
def test_invalid_configs_exit_two(tmp_path, capsys, change, field):
    cfg = write_config(tmp_path, finite_config(tmp_path, **change))
    assert main(["run", cfg]) == 2
    assert field in capsys.readouterr().err


def test_unreadable_config(tmp_path, capsys):
    assert main(["check", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["check", str(bad)]) == 2
    assert "invalid JSON" in capsys.readouterr().err


def test_check_prints_normalized(tmp_path, capsys):
    cfg = write_config(tmp_path, {"backend": "gr", "horizon": 1.0, "integrator": {"dt": 0.1}})
    assert main(["check", cfg]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["gravity"]["kasner_exponents"] == pytest.approx([2 / 3, 2 / 3, -1 / 3])
    assert data["output"]["cadence"] == 1


def test_numerical_failure_exit_three(tmp_path, capsys):
    data = finite_config(tmp_path, integrator={"dt": 0.05, "scheme": "implicit_midpoint", "max_newton": 1})
    assert main(["run", write_config(tmp_path, data)]) == 3
    assert "step 1" in capsys.readouterr().err


def test_kasner_summary(tmp_path):
    data = {
        "backend": "gr",
        "horizon": 1.0,
        "integrator": {"dt": 0.001},
        "output": {"directory": str(tmp_path), "name": "kasner", "cadence": 100},
    }
    assert main(["run", write_config(tmp_path, data)]) == 0
    summary = json.loads((tmp_path / "kasner" / "summary.json").read_text())
    p = np.array(summary["kasner_exponents"])
    np.testing.assert_allclose(p, [2 / 3, 2 / 3, -1 / 3], atol=1e-9)
    assert abs(summary["kasner_sum_error"]) < 1e-9 and summary["metric_relative_error"] < 1e-9
    header, rows = read_csv(tmp_path / "kasner" / "timeseries.csv")
    assert header == csv_columns("gr", None) and len(rows) == 11
    assert max(abs(r[header.index("ham_constraint")]) for r in rows) < 1e-9


def test_ymh_run_with_checkpoint_and_restart(tmp_path):
    data = {
        "backend": "ymh",
        "group": "u1",
        "horizon": 0.2,
        "integrator": {"dt": 0.05},
        "output": {"directory": str(tmp_path), "name": "first", "checkpoint": True},
        "lattice": {"n": 4},
    }
    assert main(["run", write_config(tmp_path, data)]) == 0
    ckpt = tmp_path / "first" / "checkpoint.bin"
    assert ckpt.is_file()
    header, rows = read_csv(tmp_path / "first" / "timeseries.csv")
    assert header == ["t", "H", "gauss_l2", "gauss_linf", "J_0"]
    data["output"] = {"directory": str(tmp_path), "name": "second"}
    data["lattice"]["checkpoint_in"] = str(ckpt)
    assert main(["run", write_config(tmp_path, data, "second.json")]) == 0
    _, rows2 = read_csv(tmp_path / "second" / "timeseries.csv")
    assert rows2[0][0] == pytest.approx(0.2)
    assert rows2[0][1] == pytest.approx(rows[-1][1], rel=1e-14)
    data["lattice"]["n"] = 6
    assert main(["run", write_config(tmp_path, data, "third.json")]) == 2


def test_extended_backend_columns(tmp_path):
    data = finite_config(tmp_path, backend="extended", group="u1")
    data["mechanics"] = {"bodies": 2, "quartic": 0.1, "xi": [0.3]}
    assert main(["run", write_config(tmp_path, data)]) == 0
    header, rows = read_csv(tmp_path / "runs" / "demo" / "timeseries.csv")
    assert header == ["t", "H", "C_norm", "nu_norm", "J_0"]
    assert all(r[3] == 0 for r in rows)


def test_csv_columns_pure():
    for backend in ("finite", "extended", "ymh"):
        for group in ("u1", "su2"):
            assert csv_columns(backend, group) == csv_columns(backend, group)
    assert csv_columns("finite", "so3") == ["t", "H", "C_norm", "J_0", "J_1", "J_2"]


def test_sweep_zero_dynamics_not_applicable(tmp_path):
    data = finite_config(tmp_path, horizon=0.2)
    data["mechanics"] = {"bodies": 1, "stiffness": 0.0, "q0": [1.0, 0.0, 0.0], "p0": [0.0, 0.0, 0.0]}
    cfg = write_config(tmp_path, data)
    assert main(["sweep", cfg, "--dt", "0.1,0.05,0.025"]) == 0
    report = json.loads((tmp_path / "runs" / "demo" / "sweep.json").read_text())
    assert report["constraint_slope"] == "not-applicable"
    assert report["energy_slope"] == "not-applicable"
    assert all(r["constraint_drift"] == 0 for r in report["runs"])


def test_sweep_constraint_slope(tmp_path):
    data = finite_config(tmp_path, horizon=2.0)
    data["mechanics"].update({"xi_oscillation": [0.3, 0.2, 0.0], "xi_frequency": 2.0})
    cfg = write_config(tmp_path, data)
    assert main(["sweep", cfg, "--dt", "0.02,0.01,0.005"]) == 0
    report = json.loads((tmp_path / "runs" / "demo" / "sweep.json").read_text())
    assert abs(report["constraint_slope"] - 4.0) < 0.3
    assert len(list((tmp_path / "runs" / "demo").glob("dt_*"))) == 3


def test_sweep_argument_validation(tmp_path):
    cfg = write_config(tmp_path, finite_config(tmp_path))
    with pytest.raises(SystemExit) as info:
        main(["sweep", cfg, "--dt", "0.1,0.05"])
    assert info.value.code == 2
    with pytest.raises(SystemExit):
        main(["sweep", cfg, "--dt", "0.1,-0.05,0.01"])


def test_output_directory_override(tmp_path, monkeypatch):
    target = tmp_path / "elsewhere"
    monkeypatch.setenv("CLEBSCH_OUTPUT_DIR", str(target))
    cfg = write_config(tmp_path, finite_config(tmp_path))
    assert main(["run", cfg]) == 0
    assert (target / "demo" / "timeseries.csv").is_file()
    assert not (tmp_path / "runs").exists()


def test_plotscript(tmp_path, capsys):
    cfg = write_config(tmp_path, finite_config(tmp_path))
    main(["run", cfg])
    run_dir = tmp_path / "runs" / "demo"
    assert main(["plotscript", str(run_dir)]) == 0
    script = (run_dir / "plot_timeseries.py").read_text()
    compile(script, "plot_timeseries.py", "exec")
    assert "timeseries.csv" in script
    assert main(["plotscript", str(tmp_path)]) == 2


def test_validate_config_errors_name_fields():
    with pytest.raises(ConfigError, match="gravity.kasner_exponents"):
        validate_config({"backend": "gr", "horizon": 1, "integrator": {"dt": 0.1}, "gravity": {"kasner_exponents": [1, 1, 1]}})
    with pytest.raises(ConfigError, match="lapse"):
        validate_config(
            {"backend": "gr", "horizon": 1, "integrator": {"dt": 0.1}, "gravity": {"lapse": 1.0, "lapse_rate": -2.0}}
        )


def test_console_entry_point(tmp_path):
    cfg = write_config(tmp_path, {"backend": "gr", "horizon": 0.0, "integrator": {"dt": 0.1}})
    result = subprocess.run([sys.executable, "-m", "clebsch", "check", cfg], capture_output=True, text=True)
    assert result.returncode == 0 and '"backend": "gr"' in result.stdout
