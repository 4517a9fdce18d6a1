"""Met-ocean resource products built from buoy records.

Three products are produced from one list of hourly (or other fixed-cadence)
buoy records: a wave joint probability distribution over (Hm0, Te) bins, a
wind rose, and the combined wind-wave matrix holding the mean wind speed of
the records that fall in each sea-state cell.
"""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Mapping, Sequence

import numpy as np
import pandas as pd

log = logging.getLogger(__name__)

DEFAULT_SENTINELS = (99.0, 999.0, 9999.0)
REQUIRED_FIELDS = ("hm0", "te", "wind_speed", "wind_dir")

# NDBC standard meteorological files: the energy period is estimated from the
# average (zero-crossing) period with the Pierson-Moskowitz ratio Te/Tz = 1.206.
NDBC_STDMET_COLUMNS = {
    "hm0": "WVHT",
    "te": {"name": "APD", "factor": 1.206},
    "wind_speed": "WSPD",
    "wind_dir": "WDIR",
}


class ResourceError(ValueError):
    pass


class SchemaError(ResourceError):
    pass


class EmptyDatasetError(ResourceError):
    pass


class BinningError(ResourceError):
    pass


@dataclass(frozen=True)
class BuoyRecord:
    timestamp: datetime
    hm0: float
    te: float
    wind_speed: float
    wind_dir: float


@dataclass
class BuoyDataset:
    """Result of ingestion: surviving records plus the number of dropped rows."""

    records: list[BuoyRecord]
    dropped: int = 0

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def _as_records(records) -> list[BuoyRecord]:
    if isinstance(records, BuoyDataset):
        return records.records
    return list(records)


def _arrays(records):
    recs = _as_records(records)
    if not recs:
        raise EmptyDatasetError("no records")
    h = np.array([r.hm0 for r in recs], dtype=float)
    t = np.array([r.te for r in recs], dtype=float)
    ws = np.array([r.wind_speed for r in recs], dtype=float)
    wd = np.array([r.wind_dir for r in recs], dtype=float)
    return h, t, ws, wd


# ---------------------------------------------------------------------------
# ingestion

def _column_spec(spec):
    """Normalise a column spec to (name(s), factor)."""
    if isinstance(spec, Mapping):
        return spec["name"], float(spec.get("factor", 1.0))
    return spec, 1.0


def _read_table(raw_text: str) -> pd.DataFrame:
    lines = [ln for ln in raw_text.splitlines() if ln.strip()]
    if not lines:
        raise EmptyDatasetError("empty buoy file")
    header = lines[0].lstrip()
    body = []
    for ln in lines[1:]:
        # NDBC files carry a second '#'-prefixed units row
        if ln.lstrip().startswith("#"):
            continue
        body.append(ln)
    sep = "," if "," in header else r"\s+"
    text = "\n".join([header] + body)
    df = pd.read_csv(io.StringIO(text), sep=sep, engine="python", dtype=str)
    df.columns = [c.strip() for c in df.columns]
    return df


def _timestamps(df: pd.DataFrame, spec) -> pd.Series:
    if isinstance(spec, (list, tuple)):
        parts = [pd.to_numeric(df[c], errors="coerce") for c in spec]
        year = parts[0].copy()
        year = year.where(year >= 100, year + 1900)
        cols = {"year": year, "month": parts[1], "day": parts[2]}
        if len(parts) > 3:
            cols["hour"] = parts[3]
        if len(parts) > 4:
            cols["minute"] = parts[4]
        return pd.to_datetime(pd.DataFrame(cols), errors="coerce", utc=True)
    return pd.to_datetime(df[spec], errors="coerce", utc=True)


def ingest_buoy_records(raw_text: str, column_map: Mapping, sentinels: Sequence[float] = DEFAULT_SENTINELS,
                        missing_tokens: Sequence[str] = ("MM", "NaN", "nan", "")) -> BuoyDataset:
    """Parse a delimited buoy file into sorted records.

    ``column_map`` maps each of ``hm0, te, wind_speed, wind_dir`` (and
    optionally ``timestamp``) to a column name, or to ``{"name": ..,
    "factor": ..}`` where ``factor`` is a multiplicative conversion (used to
    turn an average/dominant period column into an energy period). The
    timestamp spec may be a list of year/month/day/hour/minute columns.
    Rows with a sentinel or missing token in any mapped column are dropped.
    """
    df = _read_table(raw_text)
    missing = [k for k in REQUIRED_FIELDS if k not in column_map]
    if missing:
        raise SchemaError(f"column map lacks required fields: {missing}")

    values = {}
    bad = np.zeros(len(df), dtype=bool)
    for key in REQUIRED_FIELDS:
        name, factor = _column_spec(column_map[key])
        if name not in df.columns:
            raise SchemaError(f"column {name!r} (for {key}) not in file header {list(df.columns)}")
        raw = df[name].str.strip()
        col = pd.to_numeric(raw.where(~raw.isin(missing_tokens)), errors="coerce").to_numpy(dtype=float)
        is_bad = ~np.isfinite(col)
        for s in sentinels:
            is_bad |= np.isclose(col, s)
        bad |= is_bad
        values[key] = col * factor

    ts_spec = column_map.get("timestamp")
    if ts_spec is None:
        for cand in (["#YY", "MM", "DD", "hh", "mm"], ["YY", "MM", "DD", "hh", "mm"], ["YYYY", "MM", "DD", "hh"]):
            if all(c in df.columns for c in cand):
                ts_spec = cand
                break
    if ts_spec is None:
        stamps = pd.Series(pd.date_range("2000-01-01", periods=len(df), freq="h", tz="UTC"))
    else:
        names = ts_spec if isinstance(ts_spec, (list, tuple)) else [ts_spec]
        for c in names:
            if c not in df.columns:
                raise SchemaError(f"timestamp column {c!r} not in file header")
        stamps = _timestamps(df, ts_spec)
    bad |= stamps.isna().to_numpy()

    # physically invalid rows are treated like sentinels
    with np.errstate(invalid="ignore"):
        bad |= values["hm0"] < 0
        bad |= values["te"] <= 0
        bad |= values["wind_speed"] < 0

    keep = ~bad
    dropped = int(bad.sum())
    if not keep.any():
        raise EmptyDatasetError(f"all {len(df)} rows dropped as missing/invalid")

    order = np.argsort(stamps[keep].to_numpy(), kind="stable")
    ts_kept = stamps[keep].to_numpy()[order]
    recs = []
    cols = {k: v[keep][order] for k, v in values.items()}
    for i, ts in enumerate(ts_kept):
        recs.append(BuoyRecord(
            timestamp=pd.Timestamp(ts).to_pydatetime().replace(tzinfo=timezone.utc),
            hm0=float(cols["hm0"][i]),
            te=float(cols["te"][i]),
            wind_speed=float(cols["wind_speed"][i]),
            wind_dir=float(cols["wind_dir"][i]) % 360.0,
        ))
    if dropped:
        log.info("dropped %d of %d buoy rows with missing values", dropped, len(df))
    return BuoyDataset(recs, dropped)


def load_buoy_file(path, column_map, sentinels=DEFAULT_SENTINELS) -> BuoyDataset:
    with open(path) as fh:
        return ingest_buoy_records(fh.read(), column_map, sentinels)


# ---------------------------------------------------------------------------
# binning

def _edges(values: np.ndarray, width: float) -> np.ndarray:
    if width <= 0:
        raise ValueError("bin width must be positive")
    n = int(np.floor(values.max() / width)) + 1
    return width * np.arange(n + 1, dtype=float)


def _bin_index(values, edges):
    idx = np.searchsorted(edges, values, side="right") - 1
    if np.any(idx < 0) or np.any(idx >= len(edges) - 1):
        raise BinningError("record falls outside the bin edges")
    return idx


@dataclass
class Jpd:
    h_bin_edges: np.ndarray
    t_bin_edges: np.ndarray
    hours: np.ndarray
    total_hours: float
    record_hours: float = 1.0

    @property
    def h_centers(self):
        return 0.5 * (self.h_bin_edges[1:] + self.h_bin_edges[:-1])

    @property
    def t_centers(self):
        return 0.5 * (self.t_bin_edges[1:] + self.t_bin_edges[:-1])

    @property
    def shape(self):
        return self.hours.shape

    def modal_cell(self):
        """(h_center, t_center, hours) of the most frequent cell."""
        i, j = np.unravel_index(np.argmax(self.hours), self.hours.shape)
        return float(self.h_centers[i]), float(self.t_centers[j]), float(self.hours[i, j])

    def cell_of(self, h, t):
        return (int(_bin_index(np.atleast_1d(h), self.h_bin_edges)[0]),
                int(_bin_index(np.atleast_1d(t), self.t_bin_edges)[0]))

    def scaled_to_annual(self, hours_per_year: float = 8760.0) -> "Jpd":
        """Copy with hours rescaled so that the table sums to one year."""
        f = hours_per_year / self.total_hours
        return Jpd(self.h_bin_edges.copy(), self.t_bin_edges.copy(), self.hours * f,
                   float(hours_per_year), self.record_hours * f)

    def occupied(self):
        return self.hours > 0

    def to_dict(self):
        return {
            "h_bin_edges": self.h_bin_edges.tolist(),
            "t_bin_edges": self.t_bin_edges.tolist(),
            "hours": self.hours.tolist(),
            "total_hours": self.total_hours,
            "record_hours": self.record_hours,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["h_bin_edges"], float), np.asarray(d["t_bin_edges"], float),
                   np.asarray(d["hours"], float), float(d["total_hours"]), float(d.get("record_hours", 1.0)))


def build_jpd(records, h_width: float = 0.5, t_width: float = 1.0, record_hours: float = 1.0,
              h_edges=None, t_edges=None) -> Jpd:
    h, t, _, _ = _arrays(records)
    he = np.asarray(h_edges, float) if h_edges is not None else _edges(h, h_width)
    te = np.asarray(t_edges, float) if t_edges is not None else _edges(t, t_width)
    if np.any(np.diff(he) <= 0) or np.any(np.diff(te) <= 0):
        raise ValueError("bin edges must be strictly increasing")
    i = _bin_index(h, he)
    j = _bin_index(t, te)
    counts = np.zeros((len(he) - 1, len(te) - 1), dtype=np.int64)
    np.add.at(counts, (i, j), 1)
    # counts are integers, so the hour total is exact
    return Jpd(he, te, counts * float(record_hours), float(len(h) * record_hours), float(record_hours))


@dataclass
class WindRose:
    sector_edges: np.ndarray
    speed_bin_edges: np.ndarray
    hours: np.ndarray
    mean_speed: float

    @property
    def n_sectors(self):
        return len(self.sector_edges) - 1

    def dominant_speed_bin(self):
        k = int(np.argmax(self.hours.sum(axis=0)))
        return float(self.speed_bin_edges[k]), float(self.speed_bin_edges[k + 1])

    def to_dict(self):
        return {
            "sector_edges": self.sector_edges.tolist(),
            "speed_bin_edges": [float(x) if np.isfinite(x) else "inf" for x in self.speed_bin_edges],
            "hours": self.hours.tolist(),
            "mean_speed": self.mean_speed,
        }


def build_wind_rose(records, n_sectors: int = 16, speed_bin_edges=(0, 5, 10, 15, 20, 25),
                    record_hours: float = 1.0) -> WindRose:
    """Hours per (direction sector, speed band); sector 0 is centred on North."""
    if n_sectors < 4:
        raise ValueError("need at least 4 sectors")
    _, _, ws, wd = _arrays(records)
    width = 360.0 / n_sectors
    sector_edges = -width / 2 + width * np.arange(n_sectors + 1)
    sector = np.floor(((wd + width / 2) % 360.0) / width).astype(int) % n_sectors

    edges = np.asarray(speed_bin_edges, dtype=float)
    if edges[0] > ws.min():
        edges = np.concatenate([[min(0.0, ws.min())], edges])
    if edges[-1] <= ws.max():
        edges = np.concatenate([edges, [np.inf]])
    k = np.searchsorted(edges, ws, side="right") - 1
    hours = np.zeros((n_sectors, len(edges) - 1))
    np.add.at(hours, (sector, k), record_hours)
    return WindRose(sector_edges, edges, hours, float(ws.mean()))


@dataclass
class CombinedResource:
    jpd: Jpd
    mean_wind: np.ndarray  # NaN on empty cells
    site_mean_wind: float

    def cells(self):
        """Iterate (i, j, h_center, t_center, hours, mean_wind) over occupied cells."""
        hc, tc = self.jpd.h_centers, self.jpd.t_centers
        for i, j in zip(*np.nonzero(self.jpd.hours > 0)):
            yield int(i), int(j), float(hc[i]), float(tc[j]), float(self.jpd.hours[i, j]), float(self.mean_wind[i, j])

    def to_dict(self):
        mw = [[None if not np.isfinite(v) else float(v) for v in row] for row in self.mean_wind]
        return {"jpd": self.jpd.to_dict(), "mean_wind": mw, "site_mean_wind": self.site_mean_wind}

    @classmethod
    def from_dict(cls, d):
        mw = np.array([[np.nan if v is None else v for v in row] for row in d["mean_wind"]], dtype=float)
        return cls(Jpd.from_dict(d["jpd"]), mw, float(d["site_mean_wind"]))


def build_combined(records, jpd: Jpd) -> CombinedResource:
    h, t, ws, _ = _arrays(records)
    i = _bin_index(h, jpd.h_bin_edges)
    j = _bin_index(t, jpd.t_bin_edges)
    sums = np.zeros(jpd.shape)
    counts = np.zeros(jpd.shape)
    np.add.at(sums, (i, j), ws)
    np.add.at(counts, (i, j), 1.0)
    if not np.array_equal(counts * jpd.record_hours, jpd.hours):
        raise BinningError("records do not match the JPD they are combined with")
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(counts > 0, sums / counts, np.nan)
    occ = counts > 0
    site = float(np.sum(mean[occ] * jpd.hours[occ]) / np.sum(jpd.hours[occ]))
    return CombinedResource(jpd, mean, site)


def single_cell_resource(hm0: float, te: float, wind: float, hours: float = 8760.0,
                         h_width: float = 0.5, t_width: float = 1.0) -> CombinedResource:
    """A one-cell resource (handy for bypassing the buoy pipeline)."""
    he = h_width * np.arange(int(hm0 // h_width) + 2)
    te_ = t_width * np.arange(int(te // t_width) + 2)
    hrs = np.zeros((len(he) - 1, len(te_) - 1))
    i, j = int(hm0 // h_width), int(te // t_width)
    hrs[i, j] = hours
    mw = np.full(hrs.shape, np.nan)
    mw[i, j] = wind
    return CombinedResource(Jpd(he, te_, hrs, hours, hours), mw, wind)


# ---------------------------------------------------------------------------
# serialisation

def grid_csv(grid: np.ndarray, row_edges, col_edges, row_label="hm0", col_label="te") -> str:
    """CSV grid with rows = height bins and columns = period bins (by centre)."""
    rc = 0.5 * (np.asarray(row_edges[1:]) + np.asarray(row_edges[:-1]))
    cc = 0.5 * (np.asarray(col_edges[1:]) + np.asarray(col_edges[:-1]))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"{row_label}\\{col_label}"] + [f"{c:g}" for c in cc])
    for r, row in zip(rc, grid):
        w.writerow([f"{r:g}"] + ["" if not np.isfinite(v) else repr(float(v)) for v in row])
    return buf.getvalue()


def wind_rose_csv(rose: WindRose) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    e = rose.speed_bin_edges
    w.writerow(["sector_center_deg"] + [f"{e[k]:g}-{e[k + 1]:g}" for k in range(len(e) - 1)])
    centers = 0.5 * (rose.sector_edges[1:] + rose.sector_edges[:-1]) % 360.0
    for c, row in zip(centers, rose.hours):
        w.writerow([f"{c:g}"] + [repr(float(v)) for v in row])
    return buf.getvalue()


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)
