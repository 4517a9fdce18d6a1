"""Acceptance criteria. Each test records one PASS/FAIL line shown in the terminal summary."""
import itertools
import json
import os
import shutil
from pathlib import Path

import numpy as np
import pytest

from hybridsim import aero, assembly, cli, hydro, metrics, mooring, resource, waves
from hybridsim.catalog import MOORINGS, SPAR_LINE, get_system
from conftest import record_criterion

NDBC_ENV = "HYBRIDSIM_NDBC_46022"
CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def check(number, passed, detail):
    line = record_criterion(number, bool(passed), detail)
    print(line)
    assert passed, line


# -- shared simulations -----------------------------------------------------------

RUN1 = waves.SeaState.regular(1.75, 6.5)


@pytest.fixture(scope="module")
def run1_pair():
    """Run 1 regular waves with steady rated wind for the spar with and without the plate."""
    out = {}
    for name in ("hybrid-5mw-spar", "hybrid-5mw-spar-rp"):
        out[name] = assembly.simulate(get_system(name), RUN1, aero.WindSpec.steady(11.4), duration=1200.0,
                                      transient_cutoff=200.0)
    return out


@pytest.fixture(scope="module")
def run3_wec():
    return assembly.simulate(get_system("standalone-rm3"), waves.SeaState.regular(6.75, 14.5), duration=400.0,
                             transient_cutoff=100.0)


# -- 1 ------------------------------------------------------------------------------

def test_c01_lcoe_oracle():
    spar = metrics.lcoe(metrics.CostModel(2.29e9, 91.5e6, fcr=0.11), 842_000.0)
    wec = metrics.lcoe(metrics.CostModel(0.53e9, 12.6e6, fcr=0.11,
                                         capex_shares=dict(metrics.WEC_CAPEX_SHARES)), 51_000.0)
    ok = abs(spar - 407.8) <= 0.005 * 407.8 and abs(spar - 407.9) <= 0.005 * 407.9
    ok = ok and abs(wec - 1373.0) <= 0.02 * 1373.0 and abs(wec - 1390.0) <= 0.005 * 1390.0
    check(1, ok, f"spar farm {spar:.2f} $/MWh (target 407.8 +/-0.5%), WEC farm {wec:.1f} $/MWh "
                 f"(published 1373, {100 * (wec / 1373 - 1):+.2f}%)")


# -- 2 ------------------------------------------------------------------------------

def test_c02_capacity_factor_chain():
    cases = [(15.11, 5e6, 0.37), (14.94, 5e6, 0.37), (50.91, 15e6, 0.42), (51.97, 15e6, 0.43)]
    rating = metrics.DeviceRating(1.0)
    got = []
    for net_gwh, rated, target in cases:
        gross = metrics.gross_from_net(net_gwh * 1000.0, rating)
        got.append((net_gwh, metrics.capacity_factor(gross, rated), target))
    bad = [g for g in got if abs(g[1] - g[2]) > 0.005]
    detail = ", ".join(f"{n}->{cf:.4f} (want {t})" for n, cf, t in got)
    check(2, not bad, detail)


# -- 3 ------------------------------------------------------------------------------

PUBLISHED_LCOE = {  # hybrid: (standalone WEC, hybrid WEC, standalone FWT, hybrid FWT, expected)
    "5 MW spar + plate": (1373.0, 598.48, 407.90, 387.04, "Mutualism"),
    "5 MW semi-sub": (1373.0, 219.87, 479.84, 475.73, "Mutualism"),
    "5 MW spar": (1373.0, 235.79, 407.90, 407.90, "Commensalism"),
    "15 MW spar": (1373.0, 599.36, 356.44, 358.55, "Parasitism"),
}


def test_c03_synergy_truth_table():
    wrong = []
    for label, (sa, ha, sb, hb, want) in PUBLISHED_LCOE.items():
        got = metrics.classify_synergy(sa, ha, sb, hb, 1e-3).classification.value
        if got != want:
            wrong.append(f"{label}: {got} != {want}")
    tol = 1e-3
    levels = {-0.1: -1, -tol / 2: 0, 0.0: 0, tol / 2: 0, 0.1: 1}
    truth = {(-1, -1): "Mutualism", (-1, 0): "Commensalism", (0, -1): "Commensalism",
             (-1, 1): "Parasitism", (1, -1): "Parasitism"}
    grid_bad = 0
    for a, b in itertools.product(levels, levels):
        want = truth.get((levels[a], levels[b]), "NoSynergy")
        grid_bad += metrics.classify_deltas(a, b, tol).value != want
    check(3, not wrong and grid_bad == 0,
          f"{len(PUBLISHED_LCOE) - len(wrong)}/{len(PUBLISHED_LCOE)} published verdicts, {25 - grid_bad}/25 grid points"
          + (f"; mismatches: {wrong}" if wrong else ""))


# -- 4 ------------------------------------------------------------------------------

def test_c04_resource_reproduction():
    path = os.environ.get(NDBC_ENV)
    if not path or not Path(path).exists():
        check(4, False, f"station 46022 2017 data not available; set {NDBC_ENV} to the standard "
                        f"meteorological file to evaluate")
    data = resource.load_buoy_file(path, resource.NDBC_STDMET_COLUMNS)
    jpd = resource.build_jpd(data.records, 0.5, 1.0).scaled_to_annual()
    comb = resource.build_combined(data.records, jpd)
    h, t, hours = jpd.modal_cell()
    ok = (h, t) == (1.75, 6.5) and abs(hours - 768.0) <= 0.05 * 768.0 and abs(comb.site_mean_wind - 6.5) <= 0.3
    check(4, ok, f"modal cell ({h}, {t}) with {hours:.0f} h (want 768 +/-5%), mean wind "
                 f"{comb.site_mean_wind:.2f} m/s (want 6.5 +/-0.3)")


# -- 5 ------------------------------------------------------------------------------

def test_c05_catenary_equivalence():
    lay = MOORINGS["spar5"]
    depth = lay.anchor_depth
    worst = 0.0
    for anchor, fl in zip(lay.anchors(), lay.fairleads_body()):
        line = mooring.LumpedMassLine(SPAR_LINE, anchor)
        cat = line.init_from_catenary(fl)
        st = line.static_solve(fl, tol=1e-10)
        ref = cat.shape(line.L0 * np.arange(SPAR_LINE.n_segments + 1))
        worst = max(worst, float(np.abs(st.positions - ref).max()))
    lumped = mooring.MooringSystem(lay, "lumped")
    qs = mooring.MooringSystem(lay, "quasistatic")
    lumped.initialise(np.zeros(6), tol=1e-10)
    qs.initialise(np.zeros(6))
    sweep = 0.0
    for x in np.linspace(-20.0, 20.0, 9):
        pose = np.array([x, 0, 0, 0, 0, 0])
        lumped.static_load(pose, tol=1e-10)
        qs.static_load(pose)
        a, b = lumped.tensions(), qs.tensions()
        sweep = max(sweep, float(np.max(np.abs(a - b) / b)))
    ok = worst < 0.01 * depth and sweep < 0.05
    check(5, ok, f"max node offset {worst:.3f} m ({100 * worst / depth:.3f}% of depth), "
                 f"fairlead tension sweep max deviation {100 * sweep:.2f}%")


# -- 6 ------------------------------------------------------------------------------

def _decay_error(cfg, dt):
    system = assembly.build_system(cfg)
    q0 = np.zeros(6)
    q0[2] = 1.0
    res = assembly.Simulator(system, assembly.Environment(), 40.0, dt=dt, start=q0).run(0.0, 0.05)
    m, b, c = system.M[2, 2], 5e4, 3e6
    wn = np.sqrt(c / m)
    z = b / (2 * np.sqrt(c * m))
    wd = wn * np.sqrt(1 - z * z)
    t = res["t"]
    ref = np.exp(-z * wn * t) * (np.cos(wd * t) + z * wn / wd * np.sin(wd * t))
    return float(np.sqrt(np.mean((res["heave"] - ref) ** 2) / np.mean(ref ** 2)))


def test_c06_decay_accuracy(decay_config):
    cfg, _ = decay_config()
    e1, e2 = _decay_error(cfg, 0.01), _decay_error(cfg, 0.005)
    ratio = e1 / e2
    check(6, e1 < 1e-4 and 12.0 <= ratio <= 20.0,
          f"relative RMS error {e1:.3e} at dt=0.01, {e2:.3e} at dt=0.005 (ratio {ratio:.1f}, ~16 expected)")


# -- 7 ------------------------------------------------------------------------------

def test_c07_ogilvie_round_trip():
    w = np.linspace(0.0, 8.0, 1601)
    b_true = 1e5 * w ** 2 * np.exp(-(w / 1.2) ** 2)
    B = np.zeros((len(w), 6, 6))
    B[:, 2, 2] = b_true
    dt = 0.01
    t = dt * np.arange(int(60.0 / dt) + 1)
    K = hydro.cosine_transform(w, B, t)[:, 2, 2]
    wt = np.full(len(t), dt)
    wt[0] = wt[-1] = dt / 2
    interior = (w > 0.3) & (w < 3.0)
    b_back = np.cos(np.outer(w[interior], t)) @ (wt * K)
    rel = float(np.max(np.abs(b_back - b_true[interior]) / b_true[interior]))
    wc, b0 = 2.0, 3.0
    wb = np.linspace(0.0, wc, 401)
    Bc = np.zeros((len(wb), 6, 6))
    Bc[:, 2, 2] = b0
    tc = np.linspace(0.05, 40.0, 800)
    Kc = hydro.cosine_transform(wb, Bc, tc)[:, 2, 2]
    exact = 2 * b0 / np.pi * np.sin(wc * tc) / tc
    band = float(np.max(np.abs(Kc - exact)) / (2 * b0 * wc / np.pi))
    check(7, rel < 0.01 and band < 1e-6,
          f"round-trip max relative error {100 * rel:.3f}% on 0.3-3 rad/s, constant-band kernel error {band:.1e}")


# -- 8 ------------------------------------------------------------------------------

def test_c08_spectral_recovery():
    ss = waves.SeaState.irregular(3.75, 10.5, seed=1)
    dt = 0.1
    real = waves.synthesize(ss, 3 * 3600.0, dt)
    hm0, te = waves.realized_moments(real.eta(real.time), dt)
    eh, et = abs(hm0 / 3.75 - 1), abs(te / 10.5 - 1)
    check(8, eh < 0.02 and et < 0.03, f"Hm0 {hm0:.3f} m ({100 * eh:.2f}%), Te {te:.3f} s ({100 * et:.2f}%)")


# -- 9 ------------------------------------------------------------------------------

def test_c09_rated_power_caps(run1_pair, run3_wec):
    p5 = aero.Controller(aero.NREL_5MW).steady_state(11.4)["power"]
    p15 = aero.Controller(aero.IEA_15MW).steady_state(10.6)["power"]
    p26 = aero.Controller(aero.NREL_5MW).steady_state(26.0)["power"]
    records = [r["wec_power"] for r in run1_pair.values()] + [run3_wec["wec_power"]]
    wec_max = max(float(np.max(r)) for r in records)
    ok = p5 == pytest.approx(5e6, rel=1e-9) and p15 == pytest.approx(15e6, rel=1e-9) and p26 == 0.0
    ok = ok and wec_max <= 286e3
    check(9, ok, f"5 MW at 11.4 m/s: {p5 / 1e6:.9f} MW, 15 MW at 10.6 m/s: {p15 / 1e6:.9f} MW, "
                 f"26 m/s: {p26:.0f} W, max WEC electrical {wec_max / 1e3:.1f} kW")


# -- 10 -----------------------------------------------------------------------------

def _pipeline(out):
    cfg = json.loads((CONFIGS / "demo.json").read_text())
    cfg["site"]["buoy_file"] = str(CONFIGS / "demo_buoy.csv")
    cfg["output_dir"] = str(out)
    cfg["simulation"].update({"duration": 60, "irregular_duration": 60, "matrix_duration": 60,
                              "transient_cutoff": 20})
    cfg["report_systems"] = ["standalone-rm3"]
    path = out.parent / f"{out.name}.json"
    path.write_text(json.dumps(cfg))
    for argv in (["resource", str(path)], ["matrix", str(path), "--system", "standalone-rm3"],
                 ["report", str(path)]):
        assert cli.main(argv) == 0
    return {p.name: p.read_bytes() for p in (out / "report").iterdir()}


def test_c10_system_invariants(run1_pair, tmp_path):
    res = assembly.simulate(get_system("hybrid-5mw-spar"), None, aero.WindSpec.steady(0.0), duration=600.0,
                            transient_cutoff=0.0)
    drift = max(float(np.abs(res[k]).max()) for k in ("surge", "sway", "heave", "float_rel"))
    third = max(float(np.max(r["pto_third_law"])) for r in run1_pair.values())
    p = np.array([120.0, 80.0, 200.0, 40.0])
    w = np.array([300.0, 768.0, 120.0, 50.0])
    scale_ok = abs(metrics.p_cv(p * 37.5, w) - metrics.p_cv(p, w)) < 1e-12
    pm = metrics.PowerMatrix("wec", p.reshape(2, 2) * 1e3)
    g1, _ = metrics.aep(pm, w.reshape(2, 2), metrics.WEC_RATING)
    g2, _ = metrics.aep(pm, 2 * w.reshape(2, 2), metrics.WEC_RATING)
    g3, _ = metrics.aep(metrics.PowerMatrix("wec", 2 * pm.power), w.reshape(2, 2), metrics.WEC_RATING)
    lin_ok = abs(g2 - 2 * g1) < 1e-9 * g1 and abs(g3 - 2 * g1) < 1e-9 * g1
    same = _pipeline(tmp_path / "a") == _pipeline(tmp_path / "b")
    ok = drift < 1e-6 and third < 1e-10 and scale_ok and lin_ok and same
    check(10, ok, f"hold drift {drift:.2e} m over 600 s, PTO third-law residual {third:.1e} N, "
                  f"P_CV scale invariance {scale_ok}, AEP linearity {lin_ok}, byte-identical reports {same}")


# -- 11 -----------------------------------------------------------------------------

def test_c11_reaction_plate_direction(run1_pair):
    a, b = run1_pair["hybrid-5mw-spar"], run1_pair["hybrid-5mw-spar-rp"]
    heave = (a.rms("heave", True), b.rms("heave", True))
    pitch = (a.rms("pitch", True), b.rms("pitch", True))
    power = (a.mean("wec_power"), b.mean("wec_power"))
    ok = heave[1] < heave[0] and pitch[1] < pitch[0] and power[1] > power[0]
    check(11, ok, f"heave RMS {heave[0]:.4f} -> {heave[1]:.4f} m, pitch RMS {np.degrees(pitch[0]):.4f} -> "
                  f"{np.degrees(pitch[1]):.4f} deg, mean WEC power {power[0] / 1e3:.1f} -> "
                  f"{power[1] / 1e3:.1f} kW (no plate -> plate; synthetic coefficients)")
