import json

import pytest

from hardline.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_scatter_sigma_star(capsys):
    code, out, _ = run_cli(capsys, "scatter", "--map", "sigma-star",
                           "--v", "3,2,1")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "1,2,3"
    assert "momentum: 6 -> 6" in out
    assert "energy:   14 -> 14" in out


def test_scatter_domain_violation(capsys):
    code, _, err = run_cli(capsys, "scatter", "--map", "sigma-star",
                           "--v", "1,2,3")
    assert code == 2
    assert "pre-collisional" in err


def test_scatter_reversal(capsys):
    code, out, _ = run_cli(capsys, "scatter", "--map", "reversal",
                           "--v", "2,0,-1")
    assert code == 0
    assert out.strip().split("\n")[0] == "-1,0,2"


def test_scatter_unknown_map(capsys):
    code, _, err = run_cli(capsys, "scatter", "--map", "nope", "--v", "3,2,1")
    assert code == 1 and "builtin" in err


def test_simulate_csv(capsys, tmp_path):
    out_file = tmp_path / "traj.csv"
    code, _, _ = run_cli(capsys, "simulate", "--map", "sigma-star",
                         "--x", "0,1,2", "--v", "3,2,1",
                         "--times", "0,1,2", "--out", str(out_file))
    assert code == 0
    lines = out_file.read_text().strip().split("\n")
    assert lines[0] == "t,x1,x2,x3,v1,v2,v3"
    last = [float(v) for v in lines[-1].split(",")]
    assert last[0] == 2.0
    assert last[1:4] == pytest.approx([4, 5, 6], abs=1e-12)
    assert last[4:] == pytest.approx([1, 2, 3], abs=1e-12)


def test_simulate_echo_at_t0(capsys):
    code, out, _ = run_cli(capsys, "simulate", "--x", "0,1,2",
                           "--v", "3,2,1", "--times", "0")
    assert code == 0
    assert out.strip().split("\n")[1] == "0,0,1,2,3,2,1"


def test_simulate_off_manifold(capsys):
    code, _, err = run_cli(capsys, "simulate", "--x", "0,1,2",
                           "--v", "3,2,0", "--times", "0,1")
    assert code == 2 and "collinearity" in err


def test_verify_identities_report(capsys, tmp_path):
    out_file = tmp_path / "ids.json"
    code, _, _ = run_cli(capsys, "verify", "identities", "--dims", "3",
                         "--n", "200", "--seed", "42", "--out", str(out_file))
    assert code == 0
    doc = json.loads(out_file.read_text())
    assert doc["report"]["all_pass"] is True
    assert "created" in doc["meta"]


def test_verify_reports_are_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        run_cli(capsys, "verify", "identities", "--dims", "3", "--n", "200",
                "--seed", "42", "--out", str(path))
    da, db = json.loads(a.read_text()), json.loads(b.read_text())
    assert json.dumps(da["report"], sort_keys=True) == json.dumps(
        db["report"], sort_keys=True
    )


def test_verify_pde_scaled_matrix_fails(capsys, tmp_path):
    matrix = tmp_path / "scaled.json"
    rows = [["-11/30", "11/15", "11/15"],
            ["2/3", "-1/3", "2/3"],
            ["2/3", "2/3", "-1/3"]]
    matrix.write_text(json.dumps({"n": 3, "rows": rows}))
    code, _, _ = run_cli(capsys, "verify", "pde", "--map",
                         f"@{matrix}", "--dims", "3", "--n", "2000")
    assert code == 3


def test_verify_pde_sigma_star_passes(capsys, tmp_path):
    out_file = tmp_path / "pde.json"
    code, _, _ = run_cli(capsys, "verify", "pde", "--map", "sigma-star",
                         "--dims", "3,4", "--n", "2000",
                         "--out", str(out_file))
    assert code == 0
    doc = json.loads(out_file.read_text())
    assert all(e["chosen_sign"] in (1, -1) for e in doc["report"]["entries"])


def test_verify_certificate(capsys):
    code, out, _ = run_cli(capsys, "verify", "certificate", "--dims", "3,4,5")
    assert code == 0
    assert json.loads(out)["report"]["all_pass"] is True


def test_verify_invariance_small(capsys, tmp_path):
    out_file = tmp_path / "inv.json"
    code, _, _ = run_cli(capsys, "verify", "invariance", "--measure",
                         "liouville", "--map", "sigma-star", "--t", "1.5",
                         "--n", "20000", "--seed", "7", "--out",
                         str(out_file))
    assert code == 0
    doc = json.loads(out_file.read_text())["report"]
    assert doc["verdict"] == "invariant"
    assert len(doc["per_phi"]) == 8
    assert {"center", "radius", "i0", "it", "se0", "set", "z"} <= set(
        doc["per_phi"][0]
    )


def test_verify_invariance_report_deterministic(capsys, tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for path in paths:
        run_cli(capsys, "verify", "invariance", "--measure", "liouville",
                "--map", "sigma-star", "--t", "1.5", "--n", "10000",
                "--seed", "7", "--out", str(path))
    docs = [json.loads(p.read_text())["report"] for p in paths]
    assert json.dumps(docs[0], sort_keys=True) == json.dumps(docs[1],
                                                             sort_keys=True)


def test_verify_invariance_hausdorff_detects(capsys):
    code, out, _ = run_cli(capsys, "verify", "invariance", "--measure",
                           "hausdorff", "--map", "sigma-star", "--t", "1.5",
                           "--n", "100000", "--seed", "7")
    assert code == 3  # detection is the designed outcome
    assert json.loads(out)["report"]["verdict"] == "violated"


def test_verify_invariance_battery_config(capsys, tmp_path):
    config = tmp_path / "battery.json"
    config.write_text(json.dumps({
        "t": 0.4,
        "bumps": [{
            "label": "probe",
            "center_x": [-1.15, 0.0, 1.15],
            "center_v": [1.15, 0.15, -0.85],
            "radius": 0.2,
            "region": {
                "x_bounds": [[-2.4, -0.6], [-0.6, 0.5], [0.5, 2.5]],
                "u_bounds": [[0.5, 1.6], [-0.6, 0.4]],
                "margin_x": 0.02, "margin_u": 0.02,
            },
        }],
    }))
    code, out, _ = run_cli(capsys, "verify", "invariance", "--measure",
                           "liouville", "--map", "sigma-star", "--n", "20000",
                           "--seed", "3", "--config", str(config))
    assert code == 0
    doc = json.loads(out)["report"]
    assert doc["t"] == 0.4 and doc["per_phi"][0]["label"] == "probe"


def test_verify_invariance_region_flag(capsys, tmp_path):
    config = tmp_path / "battery.json"
    config.write_text(json.dumps({
        "t": 0.4,
        "bumps": [{
            "label": "probe",
            "center_x": [-1.15, 0.0, 1.15],
            "center_v": [1.15, 0.15, -0.85],
            "radius": 0.2,
        }],
    }))
    region = tmp_path / "region.json"
    region.write_text(json.dumps({
        "x_bounds": [[-2.4, -0.6], [-0.6, 0.5], [0.5, 2.5]],
        "u_bounds": [[0.5, 1.6], [-0.6, 0.4]],
        "margin_x": 0.02, "margin_u": 0.02,
    }))
    code, out, _ = run_cli(capsys, "verify", "invariance", "--measure",
                           "liouville", "--n", "20000", "--seed", "3",
                           "--config", str(config), "--region", str(region))
    assert code == 0
    assert json.loads(out)["report"]["verdict"] == "invariant"


def test_verify_invariance_config_unknown_keys(capsys, tmp_path):
    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"bumps": [], "surplus": 1}))
    code, _, err = run_cli(capsys, "verify", "invariance", "--config",
                           str(config))
    assert code == 1 and "unknown config keys" in err


def test_workers_env_default(capsys, monkeypatch):
    monkeypatch.setenv("HARDLINE_THREADS", "2")
    code, _, _ = run_cli(capsys, "verify", "invariance", "--measure",
                         "liouville", "--map", "sigma-star", "--t", "1.5",
                         "--n", "10000", "--seed", "5")
    assert code == 0


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "nonsense"])
    assert exc.value.code == 1
