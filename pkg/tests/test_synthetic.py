import numpy as np
import pytest

from hybridsim import synthetic
from hybridsim.hydro import load_coefficients
from hybridsim.catalog import COEFF_DIR


def test_cylinder_hydrostatics_closed_form():
    r, d = 4.0, 20.0
    C, vol, cob = synthetic.hydrostatics([synthetic.Segment(r, 5.0, -d)])
    assert vol == pytest.approx(np.pi * r ** 2 * d)
    assert C[2, 2] == pytest.approx(1025 * 9.81 * np.pi * r ** 2)
    assert cob[2] == pytest.approx(-d / 2)


def test_damping_is_psd_and_added_mass_tends_to_a_inf():
    spec = [s for s in synthetic.body_specs() if s.name == "spar5"][0]
    c = synthetic.build(spec)
    for Bw in c.damping[::25]:
        assert np.linalg.eigvalsh(0.5 * (Bw + Bw.T)).min() >= -1e-6 * max(1.0, np.abs(Bw).max())
    rel = abs(c.added_mass[-1, 2, 2] - c.a_inf[2, 2]) / c.a_inf[2, 2]
    assert rel < 0.05


def test_float_heave_period_calibrated():
    c = load_coefficients(COEFF_DIR / "float1.json")
    mass = 1025 * c.volume
    wn = 2 * np.pi / 6.23
    a = np.interp(wn, c.freqs, c.added_mass[:, 2, 2])
    assert 2 * np.pi * np.sqrt((mass + a) / c.hydrostatic[2, 2]) == pytest.approx(6.23, rel=1e-3)


def test_regeneration_is_reproducible(tmp_path):
    path, = synthetic.generate(tmp_path, ["float1"])
    assert path.read_text() == (COEFF_DIR / "float1.json").read_text()
