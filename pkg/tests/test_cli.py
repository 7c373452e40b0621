import json

import numpy as np
import pytest

from sirskit.cli import main

REF_PARAMS = {"Lambda": 10, "mu": 0.2, "gamma1": 0.2, "gamma2": 0.2,
              "alpha": 0.1, "delta": 0.1}


def write_config(tmp_path, name="config.json", params=None, incidence=None, **extra):
    doc = {
        "params": params if params is not None else dict(REF_PARAMS),
        "incidence": incidence if incidence is not None else
        {"family": "power", "coefficients": {"k": 0.0008, "q": 2}},
    }
    doc.update(extra)
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


@pytest.fixture
def high_config(tmp_path):
    return write_config(tmp_path, "high.json")


@pytest.fixture
def low_config(tmp_path):
    return write_config(tmp_path, "low.json",
                        incidence={"family": "power",
                                   "coefficients": {"k": 0.0002, "q": 2}})


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_check_power_passes(capsys, high_config):
    code, out, _ = run_cli(capsys, "check", high_config)
    assert code == 0
    doc = json.loads(out)
    assert doc["h1_pass"] and doc["h2_pass"] and doc["h3_pass"]
    assert doc["violations"] == []


def test_check_ruan_fails_h3(capsys, tmp_path):
    cfg = write_config(tmp_path, "ruan.json",
                       incidence={"family": "ruan",
                                  "coefficients": {"beta": 0.5, "rho": 1}})
    code, out, _ = run_cli(capsys, "check", cfg)
    assert code == 2
    doc = json.loads(out)
    assert not doc["h3_pass"]
    assert any(v["hypothesis"] == "H3" for v in doc["violations"])


def test_check_missing_param_exits_1(capsys, tmp_path):
    params = dict(REF_PARAMS)
    del params["mu"]
    cfg = write_config(tmp_path, "bad.json", params=params)
    code, _, err = run_cli(capsys, "check", cfg)
    assert code == 1
    assert "mu" in err


def test_check_unknown_key_exits_1(capsys, tmp_path):
    cfg = write_config(tmp_path, "extra.json", plotting={"dpi": 300})
    code, _, err = run_cli(capsys, "check", cfg)
    assert code == 1
    assert "plotting" in err


def test_check_malformed_json_exits_1(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    code, _, err = run_cli(capsys, "check", path)
    assert code == 1


def test_analyze_subcritical(capsys, low_config):
    code, out, _ = run_cli(capsys, "analyze", low_config)
    assert code == 0
    doc = json.loads(out)
    assert abs(doc["r0"] - 0.7143) <= 1e-4
    assert doc["beta"] == pytest.approx(0.01, rel=1e-9)
    assert doc["equilibria"]["endemic"] == []
    assert doc["certificate"] is None
    assert doc["dfe"] == {"S": 50.0, "I": 0.0, "R": 0.0}


def test_analyze_supercritical(capsys, high_config):
    code, out, _ = run_cli(capsys, "analyze", high_config)
    assert code == 0
    doc = json.loads(out)
    assert abs(doc["r0"] - 2.8571) <= 1e-4
    endemic = doc["equilibria"]["endemic"]
    assert len(endemic) == 1
    state = endemic[0]["state"]
    assert abs(state["S"] - 29.5804) <= 1e-3
    assert abs(state["I"] - 9.4244) <= 1e-3
    assert abs(state["R"] - 6.2830) <= 1e-3
    cert = doc["certificate"]
    assert cert["granted"]
    assert cert["k1"] is not None
    assert cert["sup_h"] < cert["h_bound"]
    assert cert["dvdt_max"] < 0


def test_analyze_forced_k1(capsys, high_config):
    code, out, _ = run_cli(capsys, "analyze", high_config, "--k1", 7)
    assert code == 0
    cert = json.loads(out)["certificate"]
    assert cert["k1"] == 7.0
    assert cert["granted"]
    assert abs(cert["sup_h"] - 0.1117898) < 1e-5


def test_analyze_ruan_hypotheses_fail(capsys, tmp_path):
    cfg = write_config(tmp_path, "ruan.json",
                       incidence={"family": "ruan",
                                  "coefficients": {"beta": 0.5, "rho": 1}})
    code, out, _ = run_cli(capsys, "analyze", cfg)
    assert code == 2
    doc = json.loads(out)
    assert not doc["hypotheses"]["h3_pass"]
    assert doc["r0"] is None  # partial report


def test_analyze_gamma2_zero_needs_explicit_k2(capsys, tmp_path):
    params = dict(REF_PARAMS)
    params["gamma2"] = 0.0
    cfg = write_config(tmp_path, "sis.json", params=params)
    code, out, _ = run_cli(capsys, "analyze", cfg)
    assert code == 3
    doc = json.loads(out)
    assert doc["errors"][0]["type"] == "DegenerateParameterError"
    code2, out2, _ = run_cli(capsys, "analyze", cfg, "--k2", 2.0)
    assert code2 == 0
    assert json.loads(out2)["certificate"]["k2"] == 2.0


def test_analyze_bilinear_at_threshold(capsys, tmp_path):
    # beta chosen so Lambda*beta == mu*outflow: R0 lands at 1 up to
    # round-off and the endemic list must stay empty
    cfg = write_config(tmp_path, "threshold.json",
                       incidence={"family": "bilinear",
                                  "coefficients": {"beta": 0.014}})
    code, out, _ = run_cli(capsys, "analyze", cfg)
    assert code == 0
    doc = json.loads(out)
    assert doc["r0"] == pytest.approx(1.0, rel=1e-12)
    assert doc["equilibria"]["endemic"] == []


def test_analyze_deterministic_output(capsys, high_config):
    _, first, _ = run_cli(capsys, "analyze", high_config)
    _, second, _ = run_cli(capsys, "analyze", high_config)
    assert first == second


def test_analyze_roundtrip_precision(capsys, high_config):
    _, out, _ = run_cli(capsys, "analyze", high_config)
    doc = json.loads(out)
    # 17 significant digits round-trip exactly
    from sirskit import ModelParams, make_builtin, r0
    expected = r0(ModelParams(**{k: float(v) for k, v in REF_PARAMS.items()}),
                  make_builtin("power", {"k": 0.0008, "q": 2.0}))
    assert doc["r0"] == expected


def test_simulate_csv_and_summary(capsys, high_config, tmp_path):
    out_csv = tmp_path / "traj.csv"
    code, out, _ = run_cli(capsys, "simulate", high_config,
                           "--initial", "30,10,5", "--t-end", 500,
                           "--out", out_csv)
    assert code == 0
    lines = out_csv.read_text().splitlines()
    assert lines[0] == "t,S,I,R"
    last = [float(v) for v in lines[-1].split(",")]
    assert last[0] == 500.0
    assert abs(last[1] - 29.5804) < 1e-2
    assert abs(last[2] - 9.4244) < 1e-2
    assert abs(last[3] - 6.2830) < 1e-2
    summary = json.loads(out)
    assert summary["distance"] < 1e-2
    assert summary["steps"] > 0


def test_simulate_from_dfe_constant(capsys, high_config, tmp_path):
    out_csv = tmp_path / "flat.csv"
    code, _, _ = run_cli(capsys, "simulate", high_config,
                         "--initial", "50,0,0", "--out", out_csv)
    assert code == 0
    rows = np.loadtxt(out_csv, delimiter=",", skiprows=1)
    assert np.max(np.abs(rows[:, 1:] - np.array([50.0, 0.0, 0.0]))) < 1e-9


def test_simulate_outside_omega_exits_1(capsys, high_config, tmp_path):
    code, _, err = run_cli(capsys, "simulate", high_config,
                           "--initial", "60,0,0", "--out", tmp_path / "x.csv")
    assert code == 1
    assert "Lambda/mu" in err


def test_simulate_negative_initial_exits_1(capsys, high_config, tmp_path):
    code, _, _ = run_cli(capsys, "simulate", high_config,
                         "--initial", "30,-1,5", "--out", tmp_path / "x.csv")
    assert code == 1


def test_sweep_lattice_2(capsys, low_config, high_config, tmp_path):
    for cfg, sub in ((low_config, "low"), (high_config, "high")):
        out_dir = tmp_path / sub
        code, out, _ = run_cli(capsys, "sweep", cfg, "--lattice", 2,
                               "--out", out_dir)
        assert code == 0
        doc = json.loads(out)
        assert doc["converged_fraction"] == 1.0
        assert (out_dir / "report.json").read_text() == out
        for run in doc["runs"]:
            assert run["converged"]
            assert (out_dir / run["csv"]).exists()


def test_sweep_insufficient_time_exits_2(capsys, high_config, tmp_path):
    code, out, _ = run_cli(capsys, "sweep", high_config, "--lattice", 2,
                           "--t-end", 0.001, "--out", tmp_path / "short")
    assert code == 2
    assert json.loads(out)["converged_fraction"] < 1.0


def test_sweep_lattice_too_small_exits_1(capsys, high_config, tmp_path):
    code, _, _ = run_cli(capsys, "sweep", high_config, "--lattice", 1,
                         "--out", tmp_path / "tiny")
    assert code == 1


def test_reproduce(capsys, tmp_path):
    out_dir = tmp_path / "repro"
    code, out, _ = run_cli(capsys, "reproduce", "--out", out_dir)
    assert code == 0
    summary = json.loads(out)
    assert summary["all_pass"]
    by_name = {check["quantity"]: check for check in summary["checks"]}
    assert abs(by_name["r0_subcritical"]["observed"] - 0.7143) <= 1e-4
    assert abs(by_name["r0_supercritical"]["observed"] - 2.8571) <= 1e-4
    assert by_name["h_max"]["observed"] < 0.12
    for name in ("analysis_subcritical.json", "analysis_supercritical.json",
                 "trajectory_subcritical.csv", "trajectory_supercritical.csv",
                 "h_of_u.csv", "summary.json"):
        assert (out_dir / name).exists(), name
    h_lines = (out_dir / "h_of_u.csv").read_text().splitlines()
    assert h_lines[0] == "u,h"
    assert len(h_lines) == 502  # header + 501 samples
    h_values = np.array([float(line.split(",")[1]) for line in h_lines[1:]])
    u_values = np.array([float(line.split(",")[0]) for line in h_lines[1:]])
    assert u_values[0] == 0.0 and u_values[-1] == 50.0
    assert h_values.max() < 0.12
    assert summary["checks"] == json.loads((out_dir / "summary.json").read_text())["checks"]


def test_reproduce_deterministic(capsys, tmp_path):
    _, first, _ = run_cli(capsys, "reproduce", "--out", tmp_path / "a")
    _, second, _ = run_cli(capsys, "reproduce", "--out", tmp_path / "b")
    assert first == second
    assert (tmp_path / "a" / "analysis_supercritical.json").read_text() == \
        (tmp_path / "b" / "analysis_supercritical.json").read_text()
