"""Electrical power, AEP, capacity factor, power variability, LCOE and synergy verdicts."""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .resource import Jpd

HOURS_PER_YEAR = 8760.0


class MetricsError(ValueError):
    pass


class UndefinedMetricError(MetricsError):
    pass


# ---------------------------------------------------------------------------
# ratings and power

@dataclass(frozen=True)
class DeviceRating:
    rated_electrical: float                 # W
    mech_to_elec_efficiency: float = 0.8
    availability: float = 0.95
    transmission: float = 0.98

    def __post_init__(self):
        if self.rated_electrical <= 0:
            raise MetricsError("rated power must be > 0")
        for name in ("mech_to_elec_efficiency", "availability", "transmission"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise MetricsError(f"{name} must lie in (0, 1]")

    @property
    def loss_factor(self):
        return self.availability * self.transmission


WEC_RATING = DeviceRating(286e3)
# turbine efficiency is already inside the controller's electrical output
WT5_RATING = DeviceRating(5e6, 1.0)
WT15_RATING = DeviceRating(15e6, 1.0)
RATINGS = {"wec": WEC_RATING, "wt5": WT5_RATING, "wt15": WT15_RATING}


def electrical_power(mechanical, rating: DeviceRating):
    """min(efficiency * mechanical, rated); works elementwise."""
    m = np.asarray(mechanical, float)
    if np.any(m < 0):
        raise MetricsError("mechanical power must be >= 0")
    out = np.minimum(rating.mech_to_elec_efficiency * m, rating.rated_electrical)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# power matrices and annual energy

@dataclass
class PowerMatrix:
    """Mean electrical power (W) per JPD cell for one device."""

    device: str
    power: np.ndarray
    simulated: np.ndarray = None

    def __post_init__(self):
        self.power = np.asarray(self.power, float)
        if self.simulated is None:
            self.simulated = np.ones(self.power.shape, bool)
        self.simulated = np.asarray(self.simulated, bool)
        if self.simulated.shape != self.power.shape:
            raise MetricsError("simulated flags must match the power grid")
        if np.any(self.power[self.simulated] < 0):
            raise MetricsError("cell powers must be >= 0")

    def check_rating(self, rating: DeviceRating, rtol=1e-9):
        if np.any(self.power[self.simulated] > rating.rated_electrical * (1 + rtol)):
            raise MetricsError(f"{self.device}: cell power exceeds rating {rating.rated_electrical:g} W")

    def to_dict(self):
        return {"device": self.device,
                "power": [[float(v) for v in row] for row in np.where(self.simulated, self.power, 0.0)],
                "simulated": self.simulated.astype(int).tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["device"], np.asarray(d["power"], float), np.asarray(d.get("simulated"), bool)
                   if d.get("simulated") is not None else None)


def _hours(jpd):
    return jpd.hours if isinstance(jpd, Jpd) else np.asarray(jpd, float)


def aep(matrix: PowerMatrix, jpd: Jpd, rating: DeviceRating):
    """(gross, net) annual energy in MWh; JPD hours are taken as annual hours."""
    hours = _hours(jpd)
    if hours.shape != matrix.power.shape:
        raise MetricsError(f"power matrix {matrix.power.shape} does not match JPD {hours.shape}")
    p = np.where(matrix.simulated, matrix.power, 0.0)
    gross = float(np.sum(p * hours)) / 1e6
    return gross, gross * rating.loss_factor


def gross_from_net(net_aep, rating: DeviceRating):
    return net_aep / rating.loss_factor


def capacity_factor(gross_aep_mwh, rated_w):
    """Gross AEP over rated power times a year."""
    if rated_w <= 0:
        raise MetricsError("rated power must be > 0")
    return gross_aep_mwh / (rated_w / 1e6 * HOURS_PER_YEAR)


# ---------------------------------------------------------------------------
# power variability

def p_cv(powers, weights=None):
    """Population coefficient of variation sigma/mu, optionally occurrence-weighted."""
    p = np.asarray(powers, float).ravel()
    w = np.ones_like(p) if weights is None else np.asarray(weights, float).ravel()
    if w.shape != p.shape:
        raise MetricsError("weights must match powers")
    if np.any(w < 0) or w.sum() <= 0:
        raise MetricsError("weights must be >= 0 with positive total")
    mu = float(np.sum(w * p) / w.sum())
    if mu <= 0:
        raise UndefinedMetricError("P_CV undefined for zero mean power")
    var = float(np.sum(w * (p - mu) ** 2) / w.sum())
    return math.sqrt(max(var, 0.0)) / mu


def p_cv_matrix(matrix: PowerMatrix, jpd: Jpd):
    hours = _hours(jpd)
    occ = (hours > 0) & matrix.simulated
    return p_cv(matrix.power[occ], hours[occ])


def p_cv_series(series):
    """Time-series variant: population sigma/mu of one power record."""
    return p_cv(series)


# ---------------------------------------------------------------------------
# costs

CAPEX_ITEMS = ("mooring", "electrical_cable", "device_structure", "pto", "installation", "other")
OPEX_ITEMS = ("operations", "maintenance", "insurance", "port")

# Default itemized shares; the source breakdown is qualitative, so these are
# representative values meant to be overridden from configuration.
WEC_CAPEX_SHARES = {"mooring": 0.12, "electrical_cable": 0.13, "device_structure": 0.32, "pto": 0.18,
                    "installation": 0.15, "other": 0.10}
FWT_CAPEX_SHARES = {"mooring": 0.08, "electrical_cable": 0.12, "device_structure": 0.30, "pto": 0.25,
                    "installation": 0.15, "other": 0.10}
OPEX_SHARES = {"operations": 0.35, "maintenance": 0.40, "insurance": 0.15, "port": 0.10}

# US CPI-U annual averages; the 2025 value is provisional and config-overridable.
CPI = {2010: 218.056, 2011: 224.939, 2012: 229.594, 2013: 232.957, 2014: 236.736, 2015: 237.017,
       2016: 240.007, 2017: 245.120, 2018: 251.107, 2019: 255.657, 2020: 258.811, 2021: 270.970,
       2022: 292.655, 2023: 304.702, 2024: 313.689, 2025: 322.0}


def inflate(amount, year, to_year=2025, table=None):
    t = CPI if table is None else table
    try:
        return amount * t[to_year] / t[year]
    except KeyError as e:
        raise MetricsError(f"no price index for year {e.args[0]}") from None


def _check_shares(shares, items, what):
    unknown = set(shares) - set(items)
    if unknown:
        raise MetricsError(f"unknown {what} items: {sorted(unknown)}")
    total = sum(shares.values())
    if abs(total - 1.0) > 1e-6:
        raise MetricsError(f"{what} shares sum to {total:.8f}, not 1")
    if any(v < 0 for v in shares.values()):
        raise MetricsError(f"{what} shares must be >= 0")


@dataclass(frozen=True)
class CostModel:
    """Farm-level costs: capex in USD, opex in USD/year."""

    capex: float
    opex: float
    fcr: float = 0.11
    capex_shares: dict = field(default_factory=lambda: dict(FWT_CAPEX_SHARES))
    opex_shares: dict = field(default_factory=lambda: dict(OPEX_SHARES))
    year: int = 2025

    def __post_init__(self):
        if self.capex < 0 or self.opex < 0:
            raise MetricsError("costs must be >= 0")
        if self.fcr < 0:
            raise MetricsError("fcr must be >= 0")
        _check_shares(self.capex_shares, CAPEX_ITEMS, "capex")
        _check_shares(self.opex_shares, OPEX_ITEMS, "opex")

    def annual_cost(self):
        return self.capex * self.fcr + self.opex

    def in_year(self, to_year=2025, table=None):
        return replace(self, capex=inflate(self.capex, self.year, to_year, table),
                       opex=inflate(self.opex, self.year, to_year, table), year=to_year)

    def to_dict(self):
        return {"capex": self.capex, "opex": self.opex, "fcr": self.fcr, "year": self.year,
                "capex_shares": dict(sorted(self.capex_shares.items())),
                "opex_shares": dict(sorted(self.opex_shares.items()))}

    @classmethod
    def from_dict(cls, d, default_shares=None):
        kw = {"capex": float(d["capex"]), "opex": float(d["opex"]), "fcr": float(d.get("fcr", 0.11)),
              "year": int(d.get("year", 2025))}
        if "capex_shares" in d or default_shares is not None:
            kw["capex_shares"] = dict(d.get("capex_shares", default_shares))
        if "opex_shares" in d:
            kw["opex_shares"] = dict(d["opex_shares"])
        return cls(**kw)


def lcoe(cost: CostModel, net_aep_farm):
    """(capex * fcr + opex) / net AEP, USD/MWh."""
    if net_aep_farm <= 0:
        raise UndefinedMetricError("LCOE undefined for zero energy production")
    return cost.annual_cost() / net_aep_farm


@dataclass(frozen=True)
class SharingRules:
    """Fractions of each WEC cost item removed when it rides on the turbine platform."""

    wec_capex_removed: dict = field(default_factory=lambda: {"mooring": 1.0, "electrical_cable": 1.0,
                                                             "installation": 0.5})
    wec_opex_removed: dict = field(default_factory=lambda: {"operations": 0.5, "maintenance": 0.5})
    fwt_capex_removed: dict = field(default_factory=dict)
    fwt_opex_removed: dict = field(default_factory=dict)

    @classmethod
    def none(cls):
        return cls({}, {}, {}, {})

    def __post_init__(self):
        for d in (self.wec_capex_removed, self.wec_opex_removed, self.fwt_capex_removed, self.fwt_opex_removed):
            if any(not 0 <= v <= 1 for v in d.values()):
                raise MetricsError("removed fractions must lie in [0, 1]")


def _reduce(cost: CostModel, capex_removed, opex_removed):
    for k in capex_removed:
        if k not in CAPEX_ITEMS:
            raise MetricsError(f"unknown capex item {k!r}")
    for k in opex_removed:
        if k not in OPEX_ITEMS:
            raise MetricsError(f"unknown opex item {k!r}")
    cap_items = {k: cost.capex * s * (1 - capex_removed.get(k, 0.0)) for k, s in cost.capex_shares.items()}
    op_items = {k: cost.opex * s * (1 - opex_removed.get(k, 0.0)) for k, s in cost.opex_shares.items()}
    capex = sum(cap_items.values())
    opex = sum(op_items.values())
    cs = {k: (v / capex if capex > 0 else cost.capex_shares[k]) for k, v in cap_items.items()}
    os_ = {k: (v / opex if opex > 0 else cost.opex_shares[k]) for k, v in op_items.items()}
    # renormalise against rounding so the share invariant holds exactly enough
    tc, to = sum(cs.values()), sum(os_.values())
    cs = {k: v / tc for k, v in cs.items()}
    os_ = {k: v / to for k, v in os_.items()}
    return replace(cost, capex=capex, opex=opex, capex_shares=cs, opex_shares=os_)


def hybrid_cost_allocation(wec: CostModel, fwt: CostModel, rules: SharingRules | None = None):
    """Per-device cost models inside a hybrid farm."""
    rules = SharingRules() if rules is None else rules
    return (_reduce(wec, rules.wec_capex_removed, rules.wec_opex_removed),
            _reduce(fwt, rules.fwt_capex_removed, rules.fwt_opex_removed))


# ---------------------------------------------------------------------------
# synergy

class Synergy(str, enum.Enum):
    MUTUALISM = "Mutualism"
    COMMENSALISM = "Commensalism"
    PARASITISM = "Parasitism"
    NO_SYNERGY = "NoSynergy"


@dataclass(frozen=True)
class SynergyVerdict:
    metric: str
    delta_a: float
    delta_b: float
    classification: Synergy
    tolerance: float

    def to_dict(self):
        return {"metric": self.metric, "delta_a": self.delta_a, "delta_b": self.delta_b,
                "classification": self.classification.value, "tolerance": self.tolerance}


def classify_deltas(delta_a, delta_b, tol=1e-3):
    """Verdict for a lower-is-better metric from relative changes of both devices."""
    def trend(d):
        if abs(d) <= tol:
            return 0
        return -1 if d < 0 else 1

    ta, tb = trend(delta_a), trend(delta_b)
    if ta < 0 and tb < 0:
        return Synergy.MUTUALISM
    if (ta < 0 and tb == 0) or (ta == 0 and tb < 0):
        return Synergy.COMMENSALISM
    if (ta < 0 and tb > 0) or (ta > 0 and tb < 0):
        return Synergy.PARASITISM
    return Synergy.NO_SYNERGY


def classify_synergy(standalone_a, hybrid_a, standalone_b, hybrid_b, rel_tolerance=1e-3,
                     metric="lcoe") -> SynergyVerdict:
    vals = (standalone_a, hybrid_a, standalone_b, hybrid_b)
    if any(v <= 0 for v in vals):
        raise MetricsError("synergy metrics must be > 0")
    da = (hybrid_a - standalone_a) / standalone_a
    db = (hybrid_b - standalone_b) / standalone_b
    return SynergyVerdict(metric, da, db, classify_deltas(da, db, rel_tolerance), rel_tolerance)


# ---------------------------------------------------------------------------
# tables

def table_csv(rows, columns):
    """CSV with a fixed column order; floats written with 10 significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([f"{r[c]:.10g}" if isinstance(r.get(c), float) else ("" if r.get(c) is None else r[c])
                    for c in columns])
    return buf.getvalue()
