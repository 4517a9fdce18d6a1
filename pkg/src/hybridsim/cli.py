"""Scenario runner: resource -> simulations -> power matrices -> metrics report.

Subcommands read one JSON run configuration; command-line flags override its
keys. Every artifact is written atomically, so an interrupted sweep resumes
where it stopped.
"""
from __future__ import annotations

import argparse
import concurrent.futures as cf
import copy
import fnmatch
import json
import logging
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import aero, assembly, catalog, metrics, resource, svg, waves

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_MISSING = 0, 2, 3, 4
WORKERS_ENV = "HYBRIDSIM_WORKERS"

log = logging.getLogger("hybridsim")

SIM_DEFAULTS = {
    "duration": 1200.0,
    "irregular_duration": 3600.0,
    "matrix_duration": 3600.0,
    "dt": 0.01,
    "transient_cutoff": 200.0,
    "record_dt": 0.05,
    "wave_seed": 1,
    "wind_seed": 2,
    "turbulence_intensity": 0.0,
    "gamma": 1.0,
    "mooring_model": "lumped",
}

# farm-level costs for 100 units in 2025 USD (capex USD, opex USD/year)
DEFAULT_COSTS = {
    "standalone-rm3": {"capex": 0.53e9, "opex": 12.6e6, "capex_shares": metrics.WEC_CAPEX_SHARES},
    "fwt-5mw-spar": {"capex": 2.29e9, "opex": 91.5e6},
    "fwt-5mw-ss": {"capex": 2.78e9, "opex": 91.5e6},
    "fwt-15mw-spar": {"capex": 6.51e9, "opex": 275e6},
    "fwt-15mw-ss": {"capex": 7.54e9, "opex": 275e6},
}


class CliError(Exception):
    code = EXIT_CONFIG


class ConfigError(CliError):
    code = EXIT_CONFIG


class MissingArtifactError(CliError):
    code = EXIT_MISSING


class CaseDivergence(CliError):
    code = EXIT_DIVERGENCE


# ---------------------------------------------------------------------------
# io helpers

def dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_atomic(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj):
    obj = dict(obj)
    obj.setdefault("schema_version", SCHEMA_VERSION)
    write_atomic(path, dumps(obj))


def read_json(path, what="artifact"):
    p = Path(path)
    if not p.exists():
        raise MissingArtifactError(f"missing {what}: {p}")
    with open(p) as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# configuration

def load_config(path=None, overrides=()):
    cfg = {}
    base = Path.cwd()
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise MissingArtifactError(f"config file not found: {p}")
        try:
            cfg = json.loads(p.read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {p} is not valid JSON: {e}") from None
        base = p.resolve().parent
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    cfg = copy.deepcopy(cfg)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like key.path=value")
        key, raw = item.split("=", 1)
        try:
            val = json.loads(raw)
        except json.JSONDecodeError:
            val = raw
        node = cfg
        parts = key.split(".")
        for k in parts[:-1]:
            node = node.setdefault(k, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {key!r} descends into a non-object")
        node[parts[-1]] = val
    cfg["_base_dir"] = str(base)
    sim = dict(SIM_DEFAULTS)
    sim.update(cfg.get("simulation", {}))
    unknown = set(sim) - set(SIM_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown simulation keys: {sorted(unknown)}")
    if sim["duration"] <= sim["transient_cutoff"]:
        raise ConfigError("simulation.duration must exceed transient_cutoff")
    cfg["simulation"] = sim
    return cfg


def _resolve(cfg, p):
    p = Path(p)
    return p if p.is_absolute() else Path(cfg["_base_dir"]) / p


def out_dir(cfg):
    return _resolve(cfg, cfg.get("output_dir", "out"))


def system_table(cfg):
    """Catalog systems plus config-defined variants."""
    table = dict(catalog.SYSTEMS)
    for entry in cfg.get("systems", []):
        if isinstance(entry, str):
            if entry not in table:
                raise ConfigError(f"unknown system {entry!r}")
            continue
        try:
            base = table[entry.get("base", entry["name"])]
        except KeyError as e:
            raise ConfigError(f"system entry needs a known 'base' or 'name': {e}") from None
        kw = {"name": entry["name"]}
        if "pto_damping" in entry:
            kw["pto_damping"] = float(entry["pto_damping"])
        if "float" in entry:
            kw["float"] = None if entry["float"] is None else catalog.FLOATS[entry["float"]]
        if "platform" in entry:
            kw["platform"] = catalog.PLATFORMS[entry["platform"]]
        if "mooring" in entry:
            kw["mooring"] = catalog.MOORINGS[entry["mooring"]]
        if "turbine" in entry:
            kw["turbine"] = None if entry["turbine"] is None else aero.TURBINES[entry["turbine"]]
        if "mooring_model" in entry:
            kw["mooring_model"] = entry["mooring_model"]
        if "coeff_dir" in entry:
            kw["coeff_dir"] = str(_resolve(cfg, entry["coeff_dir"]))
        try:
            table[entry["name"]] = replace(base, **kw)
        except (ValueError, TypeError) as e:
            raise ConfigError(f"system {entry['name']}: {e}") from None
    return table


def run_table(cfg):
    """Named wave cases: regular runs and their irregular counterparts (suffix -irr)."""
    runs = {}
    src = cfg.get("runs") or {k: {"period": t, "height": h} for k, (t, h) in catalog.RUNS.items()}
    for name, r in src.items():
        runs[name] = {"kind": "regular", "height": float(r["height"]), "period": float(r["period"]),
                      "wind": r.get("wind")}
        runs[f"{name}-irr"] = {"kind": "irregular", "height": float(r["height"]), "period": float(r["period"]),
                               "wind": r.get("wind")}
    return runs


def parse_selector(selector, runs, systems):
    """'run1×hybrid-5mw-spar-rp' style selector with shell wildcards on either side."""
    sel = selector.replace(" ", "")
    for sep in ("×", ":", "/"):
        if sep in sel:
            left, right = sel.split(sep, 1)
            break
    else:
        raise ConfigError(f"selector {selector!r} must look like RUN×SYSTEM (':' also accepted)")
    left = "*" if left in ("", "all") else left
    right = "*" if right in ("", "all") else right
    rsel = [r for r in runs if fnmatch.fnmatchcase(r, left)]
    ssel = [s for s in systems if fnmatch.fnmatchcase(s, right)]
    cases = [(r, s) for s in ssel for r in rsel]
    if not cases:
        raise ConfigError(f"selector {selector!r} matched no (run, system) case")
    return cases


def _wind_for(system: catalog.SystemConfig, run, sim):
    if system.turbine is None:
        return None
    w = run.get("wind")
    if isinstance(w, dict):
        w = w.get(system.turbine.name)
    speed = system.turbine.rated_wind if w is None else float(w)
    return aero.WindSpec(speed, sim["turbulence_intensity"], seed=int(sim["wind_seed"]))


# ---------------------------------------------------------------------------
# case execution (top-level so worker processes can import it)

def _simulate_case(task):
    system, sea, wind, duration, sim = task
    if system.mooring is not None and sim["mooring_model"] != system.mooring_model:
        system = replace(system, mooring_model=sim["mooring_model"])
    return assembly.simulate(system, sea, wind, duration=duration, dt=sim["dt"],
                             transient_cutoff=sim["transient_cutoff"], record_dt=sim["record_dt"])


def _simulate_case_files(task):
    """Worker: simulate one case and write its artifacts; returns (label, error or None)."""
    label, folder, system, sea, wind, duration, sim = task
    try:
        res = _simulate_case((system, sea, wind, duration, sim))
    except assembly.DivergenceError as e:
        return label, f"divergence: {e}"
    folder = Path(folder)
    write_atomic(folder / "timeseries.csv", res.to_csv())
    chans = {k: res[k] for k in ("surge", "heave", "pitch") if k in res.channels}
    for k in ("float_rel", "wec_power", "wt_power"):
        if k in res.channels:
            chans[k] = res[k]
    write_atomic(folder / "strips.svg", svg.strips(res["t"], chans, title=label))
    summary = json.loads(res.summary_json())
    summary["case"] = label
    write_json(folder / "summary.json", summary)     # written last: marks the case complete
    return label, None


def _workers(args_workers):
    if args_workers is not None:
        n = args_workers
    else:
        try:
            n = int(os.environ.get(WORKERS_ENV, "1"))
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer") from None
    if n < 1:
        raise ConfigError("worker count must be >= 1")
    return n


def _run_tasks(fn, tasks, workers):
    if workers == 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with cf.ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, tasks))


# ---------------------------------------------------------------------------
# subcommands

def cmd_resource(cfg, args=None):
    site = cfg.get("site")
    if not site or "buoy_file" not in site:
        raise ConfigError("config needs site.buoy_file")
    path = _resolve(cfg, site["buoy_file"])
    if not path.exists():
        raise MissingArtifactError(f"buoy file not found: {path}")
    cmap = site.get("column_map", resource.NDBC_STDMET_COLUMNS)
    try:
        data = resource.load_buoy_file(path, cmap)
        rh = float(site.get("record_hours", 1.0))
        jpd = resource.build_jpd(data.records, site.get("h_width", 0.5), site.get("t_width", 1.0), rh)
        rose = resource.build_wind_rose(data.records, site.get("n_sectors", 16), record_hours=rh)
        comb = resource.build_combined(data.records, jpd)
    except resource.ResourceError as e:
        raise ConfigError(f"resource: {e}") from None
    if site.get("annualize", True):
        comb = resource.CombinedResource(jpd.scaled_to_annual(), comb.mean_wind, comb.site_mean_wind)
    out = out_dir(cfg) / "resource"
    j = comb.jpd
    hc, tc, hrs = j.modal_cell()
    write_json(out / "combined.json", comb.to_dict())
    write_json(out / "wind_rose.json", rose.to_dict())
    write_atomic(out / "jpd.csv", resource.grid_csv(j.hours, j.h_bin_edges, j.t_bin_edges))
    write_atomic(out / "mean_wind.csv", resource.grid_csv(comb.mean_wind, j.h_bin_edges, j.t_bin_edges))
    write_atomic(out / "wind_rose.csv", resource.wind_rose_csv(rose))
    write_atomic(out / "jpd.svg", svg.heatmap(np.where(j.hours > 0, j.hours, np.nan),
                                              [f"{v:g}" for v in j.h_centers], [f"{v:g}" for v in j.t_centers],
                                              "Annual hours per sea state", "Hm0 (m)", "Te (s)"))
    summary = {"records": len(data.records), "dropped": data.dropped, "modal_cell": {"hm0": hc, "te": tc,
               "hours": hrs}, "site_mean_wind": comb.site_mean_wind, "total_hours": j.total_hours}
    write_json(out / "summary.json", summary)
    return summary


def cmd_simulate(cfg, selector, workers=1, force=False):
    sim = cfg["simulation"]
    systems = system_table(cfg)
    runs = run_table(cfg)
    cases = parse_selector(selector, runs, systems)
    base = out_dir(cfg) / "simulate"
    tasks, done = [], []
    for rname, sname in cases:
        folder = base / sname / rname
        label = f"{rname}×{sname}"
        if not force and (folder / "summary.json").exists():
            done.append(label)
            continue
        run = runs[rname]
        system = systems[sname]
        if run["kind"] == "regular":
            sea = waves.SeaState.regular(run["height"], run["period"])
            duration = sim["duration"]
        else:
            sea = waves.SeaState.irregular(run["height"], run["period"], gamma=sim["gamma"],
                                           seed=int(sim["wave_seed"]))
            duration = sim["irregular_duration"]
        tasks.append((label, str(folder), system, sea, _wind_for(system, run, sim), duration, sim))
    results = _run_tasks(_simulate_case_files, tasks, workers)
    failed = [(lab, err) for lab, err in results if err]
    if failed:
        raise CaseDivergence("; ".join(f"{lab}: {err}" for lab, err in failed))
    return {"completed": [lab for lab, _ in results], "skipped": done}


def _cell_task(task):
    label, path, system, sea, wind, duration, sim, meta = task
    try:
        res = _simulate_case((system, sea, wind, duration, sim))
    except assembly.DivergenceError as e:
        return label, f"divergence: {e}"
    rec = dict(meta)
    for k in ("wec_power", "wt_power", "pto_power"):
        if k in res.channels:
            rec[k] = res.mean(k)
    if "wec_power" in res.channels:
        rec["wec_power_max"] = float(np.max(res["wec_power"]))
    write_json(path, rec)
    return label, None


def _load_combined(cfg):
    d = read_json(out_dir(cfg) / "resource" / "combined.json", "resource artifact (run 'resource' first)")
    return resource.CombinedResource.from_dict(d)


def cmd_matrix(cfg, system_name, workers=1, force=False):
    sim = cfg["simulation"]
    systems = system_table(cfg)
    if system_name not in systems:
        raise ConfigError(f"unknown system {system_name!r}")
    system = systems[system_name]
    comb = _load_combined(cfg)
    base = out_dir(cfg) / "matrix" / system_name
    tasks = []
    cells = list(comb.cells())
    for i, j, hc, tc, hours, wind in cells:
        path = base / "cells" / f"cell_{i:03d}_{j:03d}.json"
        if not force and path.exists():
            continue
        seed = int(sim["wave_seed"]) + 1000 * i + j
        sea = waves.SeaState.irregular(hc, tc, gamma=sim["gamma"], seed=seed)
        ws = None
        if system.turbine is not None:
            ws = aero.WindSpec(wind, sim["turbulence_intensity"], seed=int(sim["wind_seed"]) + 1000 * i + j)
        meta = {"i": i, "j": j, "hm0": hc, "te": tc, "hours": hours, "wind": wind}
        tasks.append((f"{system_name} cell ({hc:g}, {tc:g})", str(path), system, sea, ws,
                      sim["matrix_duration"], sim, meta))
    results = _run_tasks(_cell_task, tasks, workers)
    failed = [(lab, err) for lab, err in results if err]
    if failed:
        raise CaseDivergence("; ".join(f"{lab}: {err}" for lab, err in failed))
    return assemble_matrices(cfg, system_name, comb)


def assemble_matrices(cfg, system_name, comb=None):
    comb = _load_combined(cfg) if comb is None else comb
    systems = system_table(cfg)
    system = systems[system_name]
    base = out_dir(cfg) / "matrix" / system_name
    shape = comb.jpd.shape
    out = {}
    for dev, key in (("wec", "wec_power"), ("wt", "wt_power")):
        if dev not in system.devices:
            continue
        p = np.zeros(shape)
        flag = np.zeros(shape, bool)
        for i, j, *_ in comb.cells():
            rec = read_json(base / "cells" / f"cell_{i:03d}_{j:03d}.json", "matrix cell")
            p[i, j] = rec[key]
            flag[i, j] = True
        pm = metrics.PowerMatrix(dev, p, flag)
        write_json(base / f"power_{dev}.json", pm.to_dict())
        write_atomic(base / f"power_{dev}.csv",
                     resource.grid_csv(np.where(flag, p, np.nan), comb.jpd.h_bin_edges, comb.jpd.t_bin_edges))
        j = comb.jpd
        write_atomic(base / f"power_{dev}.svg",
                     svg.heatmap(np.where(flag, p / 1e3, np.nan), [f"{v:g}" for v in j.h_centers],
                                 [f"{v:g}" for v in j.t_centers], f"{system_name} {dev} mean power (kW)",
                                 "Hm0 (m)", "Te (s)"))
        out[dev] = pm
    return out


def _rating(system: catalog.SystemConfig, dev):
    if dev == "wec":
        f = system.float
        return metrics.DeviceRating(f.rated_power, f.efficiency)
    return metrics.DeviceRating(system.turbine.rating, 1.0)


def _cost_models(cfg):
    econ = cfg.get("economics", {})
    fcr = float(econ.get("fcr", 0.11))
    raw = dict(DEFAULT_COSTS)
    raw.update(econ.get("costs", {}))
    out = {}
    for name, d in raw.items():
        d = dict(d)
        d.setdefault("fcr", fcr)
        shares = metrics.WEC_CAPEX_SHARES if name == "standalone-rm3" else None
        try:
            out[name] = metrics.CostModel.from_dict(d, default_shares=shares)
            if out[name].year != 2025:
                out[name] = out[name].in_year(2025, econ.get("cpi"))
        except (metrics.MetricsError, KeyError) as e:
            raise ConfigError(f"economics.costs.{name}: {e}") from None
    rules = econ.get("sharing")
    sharing = metrics.SharingRules(**rules) if rules is not None else metrics.SharingRules()
    return out, sharing, int(econ.get("units", 100))


def _verdicts(values, tol, metric):
    """values: {system: {device: value}} -> list of verdict dicts for each hybrid with standalone pair."""
    out = []
    for name in sorted(values):
        if not name.startswith("hybrid-"):
            continue
        wec_name, fwt_name = catalog.standalone_pair(name)
        try:
            sa, ha = values[wec_name]["wec"], values[name]["wec"]
            sb, hb = values[fwt_name]["wt"], values[name]["wt"]
        except KeyError:
            continue
        try:
            d = metrics.classify_synergy(sa, ha, sb, hb, tol, metric).to_dict()
        except metrics.MetricsError as e:
            # e.g. zero power variability: the relative change is undefined
            d = {"metric": metric, "delta_a": None, "delta_b": None, "classification": None,
                 "tolerance": tol, "note": str(e)}
        d.update({"system": name, "standalone_wec": wec_name, "standalone_fwt": fwt_name,
                  "wec": [sa, ha], "wt": [sb, hb]})
        out.append(d)
    return out


def cmd_report(cfg):
    econ = cfg.get("economics", {})
    tol = float(econ.get("synergy_tolerance", 1e-3))
    outd = out_dir(cfg) / "report"
    bypass = cfg.get("bypass", {})
    report = {"tolerance": tol}
    if "metrics" in bypass:
        mvals = bypass["metrics"]
        report["mode"] = "bypass-metrics"
        report["lcoe"] = mvals.get("lcoe", {})
        report["p_cv"] = mvals.get("p_cv", {})
    else:
        systems = system_table(cfg)
        names = (cfg.get("report_systems") or sorted(bypass.get("power_matrices", {}))
                 or sorted(p.name for p in (out_dir(cfg) / "matrix").glob("*") if p.is_dir()))
        if not names:
            raise MissingArtifactError("no power matrices found (run 'matrix' or provide bypass data)")
        if "power_matrices" in bypass:
            report["mode"] = "bypass-matrices"
            jpd = resource.Jpd.from_dict(bypass["jpd"]) if "jpd" in bypass else _load_combined(cfg).jpd
        else:
            report["mode"] = "simulated"
            jpd = _load_combined(cfg).jpd
        costs, sharing, units = _cost_models(cfg)
        rows, lcoe_vals, pcv_vals = [], {}, {}
        for name in names:
            if name not in systems:
                raise ConfigError(f"unknown system {name!r} in report")
            system = systems[name]
            if "power_matrices" in bypass:
                mats = {dev: metrics.PowerMatrix(dev, np.asarray(m["power"], float))
                        for dev, m in bypass["power_matrices"][name].items()}
            else:
                mats = {}
                for dev in system.devices:
                    d = read_json(out_dir(cfg) / "matrix" / name / f"power_{dev}.json", "power matrix")
                    mats[dev] = metrics.PowerMatrix.from_dict(d)
            dev_costs = _device_costs(name, system, costs, sharing)
            for dev, pm in sorted(mats.items()):
                rating = _rating(system, dev)
                gross, net = metrics.aep(pm, jpd, rating)
                row = {"system": name, "device": dev, "gross_aep_mwh": gross, "net_aep_mwh": net,
                       "cf": metrics.capacity_factor(gross, rating.rated_electrical)}
                try:
                    row["p_cv"] = metrics.p_cv_matrix(pm, jpd)
                except metrics.UndefinedMetricError:
                    row["p_cv"] = None
                cost = dev_costs.get(dev)
                if cost is not None and net > 0:
                    row.update({"capex": cost.capex, "opex": cost.opex,
                                "lcoe": metrics.lcoe(cost, net * units)})
                else:
                    row.update({"capex": None, "opex": None, "lcoe": None})
                rows.append(row)
                if row["lcoe"] is not None:
                    lcoe_vals.setdefault(name, {})[dev] = row["lcoe"]
                if row["p_cv"] is not None:
                    pcv_vals.setdefault(name, {})[dev] = row["p_cv"]
        report.update({"rows": rows, "lcoe": lcoe_vals, "p_cv": pcv_vals, "units": units})
        cols = ["system", "device", "gross_aep_mwh", "net_aep_mwh", "cf"]
        write_atomic(outd / "aep_cf.csv", metrics.table_csv(rows, cols))
        write_atomic(outd / "lcoe.csv", metrics.table_csv(rows, ["system", "device", "capex", "opex",
                                                                 "net_aep_mwh", "lcoe"]))
        write_atomic(outd / "pcv.csv", metrics.table_csv(rows, ["system", "device", "p_cv"]))
    verdicts = _verdicts(report["lcoe"], tol, "lcoe") + _verdicts(report["p_cv"], tol, "p_cv")
    report["verdicts"] = verdicts
    write_json(outd / "verdicts.json", {"verdicts": verdicts})
    write_json(outd / "report.json", report)
    return report


def _device_costs(name, system, costs, sharing):
    if name in costs and not name.startswith("hybrid-"):
        dev = system.devices[0] if len(system.devices) == 1 else None
        return {dev: costs[name]} if dev else {}
    if name.startswith("hybrid-"):
        wec_name, fwt_name = catalog.standalone_pair(name)
        if wec_name in costs and fwt_name in costs:
            w, f = metrics.hybrid_cost_allocation(costs[wec_name], costs[fwt_name], sharing)
            return {"wec": w, "wt": f}
    return {}


# ---------------------------------------------------------------------------
# entry point

def build_parser():
    p = argparse.ArgumentParser(prog="hybridsim", description="Hybrid wind-wave platform simulator")
    p.add_argument("--error-json", action="store_true", help="print failures as JSON on stderr")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("config", nargs="?", help="JSON run configuration")
        sp.add_argument("--error-json", action="store_true", default=argparse.SUPPRESS,
                        help="print failures as JSON on stderr")
        sp.add_argument("--out", help="output directory (overrides output_dir)")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key, e.g. simulation.duration=600")

    sp = sub.add_parser("resource", help="build JPD, wind rose and combined resource")
    common(sp)
    sp.add_argument("--buoy-file", help="buoy file (overrides site.buoy_file)")
    for name, h in (("simulate", "run selected wave cases"), ("matrix", "power matrix over the JPD")):
        sp = sub.add_parser(name, help=h)
        common(sp)
        sp.add_argument("--workers", type=int, default=None, help=f"parallel cases (default ${WORKERS_ENV} or 1)")
        sp.add_argument("--force", action="store_true", help="recompute cases that already have results")
        sp.add_argument("--duration", type=float)
        sp.add_argument("--dt", type=float)
        sp.add_argument("--cutoff", type=float, dest="transient_cutoff")
        if name == "simulate":
            sp.add_argument("--select", required=True, help="RUN×SYSTEM selector, wildcards allowed")
        else:
            sp.add_argument("--system", required=True)
    sp = sub.add_parser("report", help="metrics tables and synergy verdicts")
    common(sp)
    sub.add_parser("systems", help="list built-in systems")
    return p


def _config_from_args(args):
    overrides = list(getattr(args, "set", []) or [])
    if getattr(args, "out", None):
        overrides.append(f"output_dir={json.dumps(args.out)}")
    if getattr(args, "buoy_file", None):
        overrides.append(f"site.buoy_file={json.dumps(args.buoy_file)}")
    for key in ("duration", "dt", "transient_cutoff"):
        v = getattr(args, key, None)
        if v is not None:
            overrides.append(f"simulation.{key}={v}")
            if key == "duration":
                overrides += [f"simulation.irregular_duration={v}", f"simulation.matrix_duration={v}"]
    cfg = load_config(getattr(args, "config", None), overrides)
    if getattr(args, "out", None):
        cfg["output_dir"] = str(Path(args.out).resolve())
    return cfg


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "systems":
            for name, s in catalog.SYSTEMS.items():
                print(f"{name}\tdof={s.n_dof}\tdevices={','.join(s.devices)}")
            return EXIT_OK
        cfg = _config_from_args(args)
        if args.command == "resource":
            out = cmd_resource(cfg)
        elif args.command == "simulate":
            out = cmd_simulate(cfg, args.select, _workers(args.workers), args.force)
        elif args.command == "matrix":
            mats = cmd_matrix(cfg, args.system, _workers(args.workers), args.force)
            out = {"devices": sorted(mats)}
        else:
            rep = cmd_report(cfg)
            out = {"verdicts": [(v["system"], v["metric"], v["classification"]) for v in rep["verdicts"]]}
        print(json.dumps(out, sort_keys=True))
        return EXIT_OK
    except CliError as e:
        return _fail(args, e, e.code)
    except (catalog.CatalogError, metrics.MetricsError, assembly.ConfigurationError, waves.WaveError,
            aero.AeroError) as e:
        return _fail(args, e, EXIT_CONFIG)
    except assembly.DivergenceError as e:
        return _fail(args, e, EXIT_DIVERGENCE)
    except FileNotFoundError as e:
        return _fail(args, e, EXIT_MISSING)


def _fail(args, err, code):
    msg = str(err)
    if args.error_json:
        sys.stderr.write(json.dumps({"error": type(err).__name__, "message": msg, "exit_code": code},
                                    sort_keys=True) + "\n")
    else:
        sys.stderr.write(f"error: {msg}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
