import numpy as np
import pytest

from hybridsim import resource
from conftest import DEMO_BUOY, DEMO_COLUMNS

NDBC_TEXT = """#YY  MM DD hh mm WDIR WSPD GST  WVHT   DPD   APD MWD   PRES  ATMP  WTMP  DEWP  VIS  TIDE
#yr  mo dy hr mn degT m/s  m/s     m   sec   sec degT   hPa  degC  degC  degC  nmi    ft
2017 01 01 01 50 170  6.0  8.0  1.70  8.00  5.40 290 1015.0  10.0  11.0   9.0 99.0 99.00
2017 01 01 00 50 160  5.0  7.0  1.80  8.00  5.30 290 1015.0  10.0  11.0   9.0 99.0 99.00
2017 01 01 02 50 999 99.0 99.0 99.00 99.00 99.00 999 1015.0  10.0  11.0   9.0 99.0 99.00
2017 01 01 03 50 180  7.0  9.0  2.40  9.00  6.80 290 1015.0  10.0  11.0   9.0 99.0 99.00
"""


def test_ndbc_ingest_drops_sentinels_and_sorts():
    ds = resource.ingest_buoy_records(NDBC_TEXT, resource.NDBC_STDMET_COLUMNS)
    assert len(ds) == 3 and ds.dropped == 1
    stamps = [r.timestamp for r in ds]
    assert stamps == sorted(stamps)
    assert ds.records[0].hm0 == pytest.approx(1.80)
    assert ds.records[0].te == pytest.approx(5.30 * 1.206)
    for r in ds:
        assert r.hm0 >= 0 and r.te > 0 and 0 <= r.wind_dir < 360
        assert r.wind_speed != 99.0


def test_missing_column_is_schema_error():
    with pytest.raises(resource.SchemaError):
        resource.ingest_buoy_records(DEMO_BUOY, {**DEMO_COLUMNS, "hm0": "nope"})
    with pytest.raises(resource.SchemaError):
        resource.ingest_buoy_records(DEMO_BUOY, {"hm0": "hm0"})


def test_all_rows_bad_is_empty_error():
    text = "timestamp,hm0,te,wind_speed,wind_dir\n2017-01-01T00:00:00Z,99.0,5,5,5\n"
    with pytest.raises(resource.EmptyDatasetError):
        resource.ingest_buoy_records(text, DEMO_COLUMNS)


def test_jpd_invariants_and_modal_cell():
    ds = resource.ingest_buoy_records(DEMO_BUOY, DEMO_COLUMNS)
    jpd = resource.build_jpd(ds.records, 0.5, 1.0)
    assert jpd.hours.sum() == jpd.total_hours == 4
    assert np.all(jpd.hours >= 0)
    assert np.all(np.diff(jpd.h_bin_edges) > 0) and np.all(np.diff(jpd.t_bin_edges) > 0)
    h, t, hrs = jpd.modal_cell()
    assert (h, t, hrs) == (1.75, 6.5, 3.0)
    annual = jpd.scaled_to_annual()
    assert annual.hours.sum() == pytest.approx(8760.0)


def test_permutation_invariance():
    ds = resource.ingest_buoy_records(DEMO_BUOY, DEMO_COLUMNS)
    lines = DEMO_BUOY.strip().splitlines()
    shuffled = "\n".join([lines[0]] + lines[1:][::-1]) + "\n"
    ds2 = resource.ingest_buoy_records(shuffled, DEMO_COLUMNS)
    a = resource.build_combined(ds.records, resource.build_jpd(ds.records))
    b = resource.build_combined(ds2.records, resource.build_jpd(ds2.records))
    assert resource.dumps(a.to_dict()) == resource.dumps(b.to_dict())


def test_wind_rose_and_combined():
    ds = resource.ingest_buoy_records(DEMO_BUOY, DEMO_COLUMNS)
    rose = resource.build_wind_rose(ds.records)
    assert rose.hours.sum() == 4
    jpd = resource.build_jpd(ds.records)
    comb = resource.build_combined(ds.records, jpd)
    i, j = jpd.cell_of(1.75, 6.5)
    assert comb.mean_wind[i, j] == pytest.approx(8.0)
    occ = jpd.hours > 0
    expect = np.sum(comb.mean_wind[occ] * jpd.hours[occ]) / jpd.hours[occ].sum()
    assert comb.site_mean_wind == pytest.approx(expect)
    assert np.all(np.isnan(comb.mean_wind[~occ]))
    back = resource.CombinedResource.from_dict(comb.to_dict())
    assert np.array_equal(back.jpd.hours, jpd.hours)


def test_single_cell_resource():
    comb = resource.single_cell_resource(1.75, 6.5, 8.0, hours=768.0)
    cells = list(comb.cells())
    assert len(cells) == 1
    _, _, h, t, hours, wind = cells[0]
    assert (h, t, hours, wind) == (1.75, 6.5, 768.0, 8.0)
