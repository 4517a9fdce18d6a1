import numpy as np
import pytest

from hybridsim import catalog
from hybridsim.hydro import HydroCoefficients

ACCEPTANCE_LINES = []


def record_criterion(number, passed, detail):
    line = f"CRITERION {number:>2}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append((number, line))
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES, key=lambda x: x[0]):
        terminalreporter.write_line(line)


def constant_coefficients(a0=2e5, b0=5e4, c33=3e6, volume=200.0, nw=60):
    """Single-body table with frequency-independent heave added mass and damping."""
    w = np.linspace(0.05, 12.0, nw)
    am = np.zeros((nw, 6, 6))
    am[:] = np.diag([1e5, 1e5, a0, 1e6, 1e6, 1e6])
    B = np.zeros((nw, 6, 6))
    B[:, 2, 2] = b0
    C = np.diag([0.0, 0.0, c33, 1e6, 1e6, 0.0])
    return HydroCoefficients(w, am, B, am[0].copy(), C, volume=volume, name="constant")


@pytest.fixture
def decay_config(tmp_path):
    """Moorless, turbine-free body with constant coefficients, plus its parameters."""
    def make(**kw):
        hc = constant_coefficients(**kw)
        path = tmp_path / "constant.json"
        hc.save(path)
        plat = catalog.PlatformSpec("constant", "spar", str(path), 0.0, 1.0, 1.0)
        return catalog.SystemConfig("constant", plat, None), hc
    return make


DEMO_BUOY = """timestamp,hm0,te,wind_speed,wind_dir
2017-01-01T00:00:00Z,1.70,6.40,8.0,10
2017-01-01T01:00:00Z,1.80,6.60,9.0,20
2017-01-01T02:00:00Z,1.72,6.30,7.0,350
2017-01-01T03:00:00Z,2.30,8.20,11.0,180
"""

DEMO_COLUMNS = {"timestamp": "timestamp", "hm0": "hm0", "te": "te", "wind_speed": "wind_speed",
                "wind_dir": "wind_dir"}
