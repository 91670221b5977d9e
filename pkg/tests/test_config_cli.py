import json

import pytest

from collapse_friction.artifacts import read_csv
from collapse_friction.cli import main
from collapse_friction.config import ConfigError, load_spec, parse_config_text
from collapse_friction.rates import RECORD_FIELDS


def write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


WORKING_CSL = "units = working\nmodel = CSL\nsigma_m = 1\nmass_kg = 1\ngamma_csl_m3_per_s = 1\n"


def test_parser_reports_line_and_key():
    with pytest.raises(ConfigError) as info:
        parse_config_text("model = DP\n\nbogus = 3\n")
    assert info.value.line == 3 and info.value.key == "bogus"
    with pytest.raises(ConfigError) as info:
        parse_config_text("sigma_m = abc\n")
    assert info.value.key == "sigma_m"
    with pytest.raises(ConfigError):
        parse_config_text("model = DP\nmodel = CSL\n")
    assert parse_config_text("model = 'DP'  # comment\n")["model"] == ("DP", 1)


def test_invalid_params_carry_key(tmp_path):
    cfg = write(tmp_path, "model = DP\nsigma_m = -1\nmass_kg = 1\n")
    with pytest.raises(ConfigError) as info:
        load_spec("rates", cfg)
    assert info.value.key == "sigma_m" and info.value.line == 2


def test_cli_bad_config_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, "model = DP\nsigma = 1\n")
    assert main(["rates", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "line 2" in capsys.readouterr().err


def test_rates_dp_beta_zero(tmp_path):
    cfg = write(tmp_path, "model = DP\nsigma_m = 1e-7\nmass_kg = 1.67e-27\n")
    out = tmp_path / "o"
    assert main(["rates", "--config", str(cfg), "--out", str(out)]) == 0
    header, rows = read_csv(out / "rates.csv")
    assert tuple(header) == RECORD_FIELDS
    row = dict(zip(header, rows[0]))
    assert float(row["Gamma"]) == 0.0 and row["regime"] == "dissipative-boundary"
    assert row["T_noise"] == "NA"
    meta = json.loads((out / "rates.json").read_text())["metadata"]
    assert {"config_hash", "seed", "version"} <= meta.keys()
    assert (out / "rates.csv").read_text().startswith(f"# config_hash={meta['config_hash']}")


def test_sweep_through_critical_temperature(tmp_path):
    # DP in working units: kB T_crit = (9/8) E_sigma = 9/32
    cfg = write(tmp_path, "units = working\nmodel = DP\nsigma_m = 1\nmass_kg = 1\n"
                "sweep_axis = T_beta_K\nsweep_min = 0.2\nsweep_max = 0.36\nsweep_points = 129\n")
    out = tmp_path / "o"
    assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    header, rows = read_csv(out / "sweep.csv")
    recs = [dict(zip(header, r)) for r in rows]
    regimes = [r["regime"] for r in recs]
    assert regimes[0] == "heating" and regimes[-1] == "dissipative"
    temps = [float(r["T_noise"]) for r in recs if r["regime"] == "dissipative"]
    # T grows without bound as T_beta approaches 9/32 from above
    assert temps[0] > 50 * 0.28125
    assert all(r["T_noise"] == "NA" for r in recs if r["regime"] != "dissipative")
    assert any(r["regime"] == "critical" for r in recs)


def test_sweep_clamps_near_critical_rows(tmp_path):
    cfg = write(tmp_path, WORKING_CSL + "sweep_axis = x_beta_sq\nsweep_min = 1.0666666666\n"
                "sweep_max = 1.0666666667\nsweep_points = 3\n")
    out = tmp_path / "o"
    assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    _, rows = read_csv(out / "sweep.csv")
    assert all(r[-1] == "critical" and r[-2] == "NA" for r in rows)


def test_simulate_determinism_and_overlay(tmp_path):
    cfg = write(tmp_path, WORKING_CSL + "beta_per_J = 1\nn_traj = 50\nhorizon_s = 20\np0_z = 2\nseed = 5\n")
    blobs = []
    for i, threads in enumerate(("1", "2", "1")):
        out = tmp_path / f"o{i}"
        assert main(["simulate", "--config", str(cfg), "--out", str(out), "--threads", threads]) == 0
        blobs.append((out / "ensemble.csv").read_bytes())
    assert blobs[0] == blobs[1] == blobs[2]
    header, rows = read_csv(tmp_path / "o0" / "ensemble.csv")
    assert header == ["t", "mean_H", "stderr_H", "n_traj", "E_exact"] and len(rows) == 10
    theader, _ = read_csv(tmp_path / "o0" / "trajectory_0.csv")
    assert theader == ["t", "px", "py", "pz", "H"]
    side = json.loads((tmp_path / "o0" / "ensemble.json").read_text())
    assert side["master_seed"] == 5 and side["metadata"]["seed"] == 5


def test_seed_override_changes_output(tmp_path):
    cfg = write(tmp_path, WORKING_CSL + "beta_per_J = 1\nn_traj = 20\nhorizon_s = 20\nseed = 5\n")
    main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "a")])
    main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "b"), "--seed", "6"])
    assert (tmp_path / "a" / "ensemble.csv").read_bytes() != (tmp_path / "b" / "ensemble.csv").read_bytes()


def test_simulate_with_environment(tmp_path):
    cfg = write(tmp_path, WORKING_CSL + "beta_per_J = 1\nn_traj = 20\nhorizon_s = 10\n"
                "T_env_K = 2\nGamma_env_per_s = 0.1\ndt_s = 0.5\ngrid_points = 5\n")
    out = tmp_path / "o"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    assert "environment" in json.loads((out / "ensemble.json").read_text())
    cfg2 = write(tmp_path, WORKING_CSL + "horizon_s = 10\nT_env_K = 2\nGamma_env_per_s = 0.1\n", "b.cfg")
    assert main(["simulate", "--config", str(cfg2), "--out", str(out)]) == 2


def test_numeric_failure_names_operation(tmp_path, capsys):
    cfg = write(tmp_path, WORKING_CSL + "n_traj = 2\nhorizon_s = 1e7\nmax_jumps = 10\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3
    assert "simulate failed" in capsys.readouterr().err


def test_toy_command(tmp_path):
    cfg = write(tmp_path, "mass_kg = 1\nbeta_per_J = 2\ntoy_D = 1\nhorizon_s = 2\nn_traj = 200\n")
    out = tmp_path / "o"
    assert main(["toy", "--config", str(cfg), "--out", str(out)]) == 0
    header, rows = read_csv(out / "toy_ensemble.csv")
    assert header[-1] == "E_ode" and len(rows) == 10


def test_validate_reports_and_exit_code(tmp_path, monkeypatch, capsys):
    from collapse_friction import checks
    import numpy as np

    results = [checks.CheckResult("a", np.bool_(True), "fine"), checks.CheckResult("b", False, "broken")]
    monkeypatch.setattr(checks, "run_all", lambda **kw: [print(r.line()) or r for r in results])
    cfg = write(tmp_path, "n_traj = 100\nseed = 3\n")
    out = tmp_path / "o"
    assert main(["validate", "--config", str(cfg), "--out", str(out)]) == 1
    text = capsys.readouterr().out
    assert "[PASS] a: fine" in text and "[FAIL] b: broken" in text
    payload = json.loads((out / "validation.json").read_text())
    assert [c["passed"] for c in payload["checks"]] == [True, False]
