import json
import shutil
from pathlib import Path

import numpy as np
import pytest

from hybridsim import cli, catalog
from hybridsim.resource import single_cell_resource
from conftest import DEMO_BUOY

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_selector_expansion():
    runs = cli.run_table({})
    cases = cli.parse_selector("run?×hybrid-*", runs, catalog.SYSTEMS)
    assert len(cases) == 18
    assert cli.parse_selector("run1:fwt-5mw-spar", runs, catalog.SYSTEMS) == [("run1", "fwt-5mw-spar")]
    assert len(cli.parse_selector("all×standalone-rm3", runs, catalog.SYSTEMS)) == 6
    with pytest.raises(cli.ConfigError):
        cli.parse_selector("run9×hybrid-*", runs, catalog.SYSTEMS)
    with pytest.raises(cli.ConfigError):
        cli.parse_selector("run1", runs, catalog.SYSTEMS)


def test_bad_selector_exit_code_and_json(tmp_path, capsys):
    code, _, err = run(["--error-json", "simulate", "--out", str(tmp_path), "--select", "nope×nothing"], capsys)
    assert code == cli.EXIT_CONFIG
    payload = json.loads(err)
    assert payload["exit_code"] == code and "matched no" in payload["message"]


def test_missing_buoy_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"site": {"buoy_file": "absent.csv"}}))
    code, _, err = run(["resource", str(cfg), "--error-json"], capsys)
    assert code == cli.EXIT_MISSING
    assert json.loads(err)["error"] == "MissingArtifactError"


def test_unknown_simulation_key_rejected(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"simulation": {"durration": 10}}))
    with pytest.raises(cli.ConfigError):
        cli.load_config(cfg)


def test_overrides_and_variants(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"systems": [{"name": "soft-pto", "base": "hybrid-5mw-spar", "pto_damping": 6e5}]}))
    c = cli.load_config(cfg, ["simulation.duration=900", "simulation.dt=0.005"])
    assert c["simulation"]["duration"] == 900 and c["simulation"]["dt"] == 0.005
    table = cli.system_table(c)
    assert table["soft-pto"].c_pto == 6e5 and table["hybrid-5mw-spar"].c_pto == 1.2e6


def test_resource_outputs_are_byte_identical(tmp_path, capsys):
    (tmp_path / "buoy.csv").write_text(DEMO_BUOY)
    cfg = json.loads((CONFIGS / "demo.json").read_text())
    cfg["site"]["buoy_file"] = "buoy.csv"
    cfg["output_dir"] = "out"
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    assert run(["resource", str(tmp_path / "c.json")], capsys)[0] == 0
    first = {p.name: p.read_bytes() for p in (tmp_path / "out" / "resource").iterdir()}
    assert run(["resource", str(tmp_path / "c.json")], capsys)[0] == 0
    second = {p.name: p.read_bytes() for p in (tmp_path / "out" / "resource").iterdir()}
    assert first == second
    summary = json.loads(first["summary.json"])
    assert summary["modal_cell"]["hm0"] == 1.75 and summary["modal_cell"]["te"] == 6.5
    assert summary["schema_version"] == cli.SCHEMA_VERSION


def _bypass_matrices_config(tmp_path):
    jpd = single_cell_resource(1.75, 6.5, 8.0, hours=8760.0).jpd
    shape = jpd.hours.shape

    def grid(v):
        return np.full(shape, v).tolist()

    mats = {
        "standalone-rm3": {"wec": {"power": grid(60e3)}},
        "fwt-5mw-spar": {"wt": {"power": grid(1.9e6)}},
        "hybrid-5mw-spar": {"wec": {"power": grid(70e3)}, "wt": {"power": grid(1.9e6)}},
    }
    cfg = {"output_dir": str(tmp_path / "out"), "bypass": {"jpd": jpd.to_dict(), "power_matrices": mats}}
    path = tmp_path / "bypass.json"
    path.write_text(json.dumps(cfg))
    return path


def test_report_bypass_matrices_deterministic(tmp_path, capsys):
    path = _bypass_matrices_config(tmp_path)
    assert run(["report", str(path)], capsys)[0] == 0
    rep_dir = tmp_path / "out" / "report"
    first = {p.name: p.read_bytes() for p in rep_dir.iterdir()}
    shutil.rmtree(rep_dir)
    assert run(["report", str(path)], capsys)[0] == 0
    assert first == {p.name: p.read_bytes() for p in rep_dir.iterdir()}
    rep = json.loads(first["report.json"])
    wec = [r for r in rep["rows"] if r["system"] == "hybrid-5mw-spar" and r["device"] == "wec"][0]
    assert wec["gross_aep_mwh"] == pytest.approx(70e3 * 8760 / 1e6)
    verdict = {(v["system"], v["metric"]): v["classification"] for v in rep["verdicts"]}
    # cheaper WEC, identical turbine energy and cost
    assert verdict[("hybrid-5mw-spar", "lcoe")] == "Commensalism"


def test_published_bypass_verdicts(tmp_path, capsys):
    cfg = json.loads((CONFIGS / "published_bypass.json").read_text())
    cfg["output_dir"] = str(tmp_path / "out")
    (tmp_path / "p.json").write_text(json.dumps(cfg))
    assert run(["report", str(tmp_path / "p.json")], capsys)[0] == 0
    rep = json.loads((tmp_path / "out" / "report" / "report.json").read_text())
    verdict = {(v["system"], v["metric"]): v["classification"] for v in rep["verdicts"]}
    assert verdict[("hybrid-5mw-spar-rp", "lcoe")] == "Mutualism"
    assert verdict[("hybrid-5mw-ss", "lcoe")] == "Mutualism"
    assert verdict[("hybrid-5mw-spar", "lcoe")] == "Commensalism"
    assert verdict[("hybrid-15mw-spar", "lcoe")] == "Parasitism"


def test_report_without_artifacts(tmp_path, capsys):
    code, _, _ = run(["report", "--out", str(tmp_path)], capsys)
    assert code == cli.EXIT_MISSING


def test_simulate_resume_and_outputs(tmp_path, capsys):
    argv = ["simulate", "--out", str(tmp_path), "--select", "run1×standalone-rm3", "--duration", "30",
            "--cutoff", "10"]
    code, out, _ = run(argv, capsys)
    assert code == 0 and json.loads(out)["completed"] == ["run1×standalone-rm3"]
    folder = tmp_path / "simulate" / "standalone-rm3" / "run1"
    assert {p.name for p in folder.iterdir()} >= {"timeseries.csv", "strips.svg", "summary.json"}
    csv1 = (folder / "timeseries.csv").read_bytes()
    code, out, _ = run(argv, capsys)
    assert json.loads(out)["skipped"] == ["run1×standalone-rm3"]
    run(argv + ["--force"], capsys)
    assert (folder / "timeseries.csv").read_bytes() == csv1


def test_systems_listing(capsys):
    code, out, _ = run(["systems"], capsys)
    assert code == 0 and len(out.strip().splitlines()) == 11
