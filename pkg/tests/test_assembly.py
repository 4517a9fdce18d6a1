import numpy as np
import pytest

from hybridsim import assembly, aero, waves
from hybridsim.catalog import SYSTEMS, get_system
from dataclasses import replace


def analytic_decay(t, m, b, c, x0):
    wn = np.sqrt(c / m)
    zeta = b / (2 * np.sqrt(c * m))
    wd = wn * np.sqrt(1 - zeta ** 2)
    return x0 * np.exp(-zeta * wn * t) * (np.cos(wd * t) + zeta * wn / wd * np.sin(wd * t))


def run_decay(cfg, dt, duration=40.0):
    system = assembly.build_system(cfg)
    q0 = np.zeros(6)
    q0[2] = 1.0
    sim = assembly.Simulator(system, assembly.Environment(), duration, dt=dt, start=q0)
    res = sim.run(transient_cutoff=0.0, record_dt=0.05)
    return system, res


def test_constant_coefficient_decay_converges_fourth_order(decay_config):
    cfg, hc = decay_config()
    errs = []
    for dt in (0.01, 0.005):
        system, res = run_decay(cfg, dt)
        m = system.M[2, 2]
        t = res["t"]
        ref = analytic_decay(t, m, 5e4, 3e6, 1.0)
        errs.append(np.sqrt(np.mean((res["heave"] - ref) ** 2)) / np.sqrt(np.mean(ref ** 2)))
    assert errs[0] < 1e-4
    assert 12.0 < errs[0] / errs[1] < 20.0


def test_rigid_mass_matrix_is_symmetric_with_offsets():
    M = assembly.rigid_mass_matrix(10.0, np.array([0.0, 0.0, -2.0]), np.eye(3))
    assert np.allclose(M, M.T)
    assert M[0, 4] == pytest.approx(-20.0) and M[4, 4] == pytest.approx(1.0 + 40.0)


@pytest.fixture(scope="module")
def hybrid():
    return assembly.build_system(get_system("hybrid-5mw-spar"))


def test_hybrid_has_seven_dof_and_float_coupling(hybrid):
    assert hybrid.n_dof == 7
    assert np.allclose(hybrid.M, hybrid.M.T)
    # the float slide couples to platform heave only
    assert hybrid.M[6, 2] != 0 and np.all(hybrid.M[6, [0, 1, 3, 5]] == 0)
    assert np.all(np.linalg.eigvalsh(hybrid.M) > 0)


def test_standalone_turbine_is_six_dof():
    system = assembly.build_system(get_system("fwt-5mw-spar"))
    assert system.n_dof == 6
    names = assembly.Simulator(system, assembly.Environment(), 1.0).channel_names()
    assert "wec_power" not in names and "wt_power" in names


def test_pto_force_example(hybrid):
    sim = assembly.Simulator(hybrid, assembly.Environment(), 1.0)
    sim.state.qd[6] = 0.5
    row = dict(zip(sim.channel_names(), sim.sample()))
    assert row["pto_force_float"] == pytest.approx(-0.6e6)
    assert row["pto_force_platform"] == pytest.approx(0.6e6)
    assert row["pto_third_law"] < 1e-10
    assert row["pto_power"] == pytest.approx(0.3e6)
    assert row["wec_power"] == pytest.approx(min(0.8 * 0.3e6, 286e3))


def test_equilibrium_has_zero_residual(hybrid):
    q = hybrid.equilibrium(thrust=5e5)
    assert np.abs(hybrid.static_residual(q, 5e5)).max() < 1e-6 * 5e5
    assert q[0] > 0 and q[4] > 0


def test_equilibrium_hold_short():
    res = assembly.simulate(get_system("hybrid-5mw-spar"), None, aero.WindSpec.steady(0.0), duration=20.0,
                            transient_cutoff=0.0)
    for k in ("surge", "heave", "float_rel"):
        assert np.abs(res[k]).max() < 1e-6


def test_singular_mass_rejected(decay_config, tmp_path):
    cfg, hc = decay_config()
    hc.a_inf[:] = 0
    hc.added_mass[:] = 0
    hc.a_inf[3, 3] = -1e12
    hc.added_mass[:, 3, 3] = -1e12
    p = tmp_path / "neg.json"
    hc.save(p)
    cfg = replace(cfg, platform=replace(cfg.platform, coefficients=str(p)))
    with pytest.raises(assembly.ConfigurationError):
        assembly.build_system(cfg)


def test_dt_must_divide_radiation_step(decay_config):
    cfg, _ = decay_config()
    system = assembly.build_system(cfg)
    with pytest.raises(assembly.ConfigurationError):
        assembly.Simulator(system, assembly.Environment(), 10.0, dt=0.03)


def test_divergence_is_reported(decay_config):
    cfg, _ = decay_config()
    system = assembly.build_system(cfg)
    q0 = np.zeros(6)
    q0[2] = 5e3
    sim = assembly.Simulator(system, assembly.Environment(), 10.0, start=q0)
    with pytest.raises(assembly.DivergenceError, match="heave"):
        sim.run(0.0)


def test_rms_helpers():
    x = np.array([0.0, 1.0, -1.0, 1.0, -1.0])
    assert assembly.rms(x, 1.0, dt=1.0) == pytest.approx(1.0)
    a = assembly.window_sums(x, 1, 3)
    b = assembly.window_sums(x, 3, 5)
    total = (a[0] + b[0], a[1] + b[1], a[2] + b[2])
    assert assembly.rms_from_sums(total) == pytest.approx(assembly.rms(x[1:], 0.0))
    assert assembly.rms(x + 3.0, 1.0, mean_removed=True) == pytest.approx(1.0)
    with pytest.raises(assembly.AssemblyError):
        assembly.rms(x, 10.0)


def test_regular_wave_run_is_deterministic(decay_config):
    cfg, _ = decay_config()
    cfg = replace(cfg, platform=replace(cfg.platform, coefficients="float1.json"))
    ss = waves.SeaState.regular(1.0, 8.0)
    a = assembly.simulate(cfg, ss, duration=30.0, transient_cutoff=10.0)
    b = assembly.simulate(cfg, ss, duration=30.0, transient_cutoff=10.0)
    assert a.to_csv() == b.to_csv() and a.summary_json() == b.summary_json()
    assert a.rms("heave") > 0
