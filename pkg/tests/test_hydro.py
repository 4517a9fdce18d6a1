import json

import numpy as np
import pytest

from hybridsim import hydro
from hybridsim.catalog import COEFF_DIR
from conftest import constant_coefficients


def test_constant_band_kernel_closed_form():
    w = np.linspace(0.0, 2.0, 201)
    b = 3.0
    B = np.zeros((len(w), 6, 6))
    B[:, 2, 2] = b
    t = np.linspace(0.05, 30, 300)
    K = hydro.cosine_transform(w, B, t)[:, 2, 2]
    exact = 2 * b / np.pi * np.sin(2.0 * t) / t
    assert np.abs(K - exact).max() < 1e-9


def test_validation_rejects_bad_tables():
    hc = constant_coefficients()
    d = hc.to_dict()
    d["freqs"] = d["freqs"][::-1]
    with pytest.raises(hydro.ValidationError):
        hydro.HydroCoefficients.from_dict(d)
    d = hc.to_dict()
    d["damping"][3][2][2] = -1e9
    with pytest.raises(hydro.ValidationError):
        hydro.HydroCoefficients.from_dict(d)
    d = hc.to_dict()
    del d["a_inf"]
    with pytest.raises(hydro.ValidationError):
        hydro.HydroCoefficients.from_dict(d)


def test_hz_and_degree_units_normalised(tmp_path):
    hc = constant_coefficients()
    d = hc.to_dict()
    d["freqs"] = (np.asarray(d["freqs"]) / (2 * np.pi)).tolist()
    d["freq_units"] = "Hz"
    p = tmp_path / "c.json"
    p.write_text(json.dumps(d))
    back = hydro.load_coefficients(p)
    assert np.allclose(back.freqs, hc.freqs)


def test_window_and_sampling_errors():
    hc = hydro.load_coefficients(COEFF_DIR / "spar5.json")
    with pytest.raises(hydro.WindowError):
        hydro.radiation_irf(hc, t_max=2.0)
    irf = hydro.radiation_irf(hc)
    with pytest.raises(hydro.SamplingError):
        hydro.radiation_force(np.zeros((10, 6)), irf, dt=0.1)


def test_radiation_force_of_zero_history_is_zero():
    hc = hydro.load_coefficients(COEFF_DIR / "float1.json")
    irf = hydro.radiation_irf(hc)
    assert np.all(hydro.radiation_force(np.zeros((5, 6)), irf, dt=irf.dt) == 0)
    assert np.all(np.isfinite(irf.kernel[0]))


def test_drag_model():
    d = hydro.DragModel.from_cd(1025.0, [0, 0, 2.0, 0, 0, 0])
    f = hydro.viscous_drag([0, 0, 1.5, 0, 0, 0], np.zeros(6), d)
    assert f[2] == pytest.approx(-0.5 * 1025 * 2.0 * 1.5 ** 2)
    with pytest.raises(ValueError):
        hydro.DragModel([-1, 0, 0, 0, 0, 0])
    s = d + d
    assert s.coefficients[2] == 2 * d.coefficients[2]


def test_hydrostatic_force_linear():
    hc = constant_coefficients()
    x = np.array([0, 0, 0.3, 0, 0, 0])
    assert hydro.hydrostatic_force(x, hc)[2] == pytest.approx(-3e6 * 0.3)


@pytest.mark.parametrize("name", ["float1", "float2", "spar5", "spar5_rp", "spar15", "spar15_rp", "semi5",
                                  "semi15", "rm3_spar"])
def test_shipped_coefficients_load_and_pass_kernel_checks(name):
    hc = hydro.load_coefficients(COEFF_DIR / f"{name}.json")
    assert "non-physical" in hc.notes.lower() or "synthetic" in hc.notes.lower()
    irf = hydro.radiation_irf(hc)
    assert irf.kernel.shape[1:] == (6, 6)
    assert hc.volume > 0
