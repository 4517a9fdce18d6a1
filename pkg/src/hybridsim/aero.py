"""Hub-height wind synthesis, rotor coefficient tables and the generator controller."""
from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy import optimize

log = logging.getLogger(__name__)

RHO_AIR = 1.225
BETZ = 16.0 / 27.0


class AeroError(ValueError):
    pass


@dataclass(frozen=True)
class TurbineSpec:
    name: str
    rating: float            # W
    rotor_diameter: float    # m
    hub_height: float        # m above SWL
    cut_in: float
    rated_wind: float
    cut_out: float
    cut_in_rpm: float
    rated_rpm: float
    rated_tip_speed: float
    hub_diameter: float = 0.0
    lambda_opt: float = 7.5
    rotor_inertia: float = 4.38e7     # kg m^2, rotor + generator on the low-speed shaft
    rna_mass: float = 3.5e5
    tower_mass: float = 2.5e5
    tower_cg: float = 43.4           # m above SWL
    tower_base: float = 10.0
    parked_ct: float = 0.05
    max_pitch_rate: float = math.radians(8.0)

    def __post_init__(self):
        if not self.cut_in < self.rated_wind < self.cut_out:
            raise AeroError("need cut_in < rated_wind < cut_out")
        tip = self.rated_omega * self.radius
        if abs(tip - self.rated_tip_speed) > 0.02 * self.rated_tip_speed:
            raise AeroError(f"rated tip speed {self.rated_tip_speed} m/s inconsistent with rated rpm "
                            f"({tip:.2f} m/s)")

    @property
    def radius(self):
        return 0.5 * self.rotor_diameter

    @property
    def area(self):
        return math.pi * self.radius ** 2

    @property
    def rated_omega(self):
        return self.rated_rpm * 2 * math.pi / 60

    @property
    def cut_in_omega(self):
        return self.cut_in_rpm * 2 * math.pi / 60


NREL_5MW = TurbineSpec("5MW", 5e6, 126.0, 90.0, 3.0, 11.4, 25.0, 6.9, 12.1, 80.0, hub_diameter=3.0,
                       lambda_opt=7.5, rotor_inertia=4.38e7, rna_mass=3.5e5, tower_mass=2.497e5,
                       tower_cg=43.4, tower_base=10.0)
IEA_15MW = TurbineSpec("15MW", 15e6, 240.0, 150.0, 3.0, 10.6, 25.0, 5.0, 7.56, 95.0, hub_diameter=7.94,
                       lambda_opt=9.0, rotor_inertia=3.2e8, rna_mass=1.017e6, tower_mass=1.263e6,
                       tower_cg=71.4, tower_base=15.0)
TURBINES = {"5MW": NREL_5MW, "15MW": IEA_15MW}


# ---------------------------------------------------------------------------
# wind

@dataclass(frozen=True)
class WindSpec:
    mean_speed: float = 0.0
    turbulence_intensity: float = 0.14
    shear_exponent: float = 0.14
    seed: int = 0

    def __post_init__(self):
        if self.mean_speed < 0:
            raise AeroError("mean wind speed must be >= 0")
        if self.turbulence_intensity < 0:
            raise AeroError("turbulence intensity must be >= 0")

    @classmethod
    def steady(cls, speed):
        return cls(speed, 0.0)

    def at_height(self, z_ref, z):
        """Same spec with the mean speed carried from ``z_ref`` to ``z`` by the power law."""
        return replace(self, mean_speed=shear_speed(self.mean_speed, z_ref, z, self.shear_exponent))


def shear_speed(v_ref, z_ref, z, alpha=0.14):
    return v_ref * (z / z_ref) ** alpha


def kaimal_psd(f, mean_speed, sigma, hub_height):
    """One-sided longitudinal Kaimal spectrum [(m/s)^2/Hz]."""
    L = 8.1 * 0.7 * min(60.0, hub_height)
    f = np.asarray(f, float)
    return sigma ** 2 * 4 * L / mean_speed / (1 + 6 * f * L / mean_speed) ** (5.0 / 3.0)


def synthesize_wind(spec: WindSpec, duration: float, dt: float, hub_height: float = 90.0) -> np.ndarray:
    """Hub-height longitudinal wind on t = 0, dt, ..., duration.

    Harmonics sit on the record's FFT grid, so the sample mean is exactly the
    target mean and the discrete variance is exactly (TI * U)^2.
    """
    if duration <= 0 or dt <= 0:
        raise AeroError("duration and dt must be positive")
    n = int(round(duration / dt)) + 1
    sigma = spec.turbulence_intensity * spec.mean_speed
    if sigma == 0:
        return np.full(n, float(spec.mean_speed))
    m = n - 1 if n % 2 else n   # period of the harmonic grid; the extra endpoint repeats the first sample
    m = max(m, 2)
    k = np.arange(1, m // 2)
    f = k / (m * dt)
    psd = kaimal_psd(f, spec.mean_speed, sigma, hub_height)
    amp = np.sqrt(psd)
    amp *= sigma * math.sqrt(2.0) / math.sqrt(np.sum(amp ** 2))
    rng = np.random.default_rng(spec.seed)
    phase = rng.uniform(0.0, 2 * np.pi, size=len(k))
    spec_c = np.zeros(m // 2 + 1, dtype=complex)
    spec_c[k] = 0.5 * m * amp * np.exp(1j * phase)
    u = np.fft.irfft(spec_c, n=m)
    series = spec.mean_speed + np.resize(u, n)
    return series


# ---------------------------------------------------------------------------
# rotor tables

def _heier_cp(lam, beta_deg, lam_scale):
    """Parametric Cp curve; lambda is rescaled so the peak sits at the turbine's lambda_opt."""
    lam = np.maximum(np.asarray(lam, float) * lam_scale, 1e-3)
    beta = np.asarray(beta_deg, float)
    inv = 1.0 / (lam + 0.08 * beta) - 0.035 / (beta ** 3 + 1.0)
    cp = 0.5176 * (116.0 * inv - 0.4 * beta - 5.0) * np.exp(-21.0 * inv) + 0.0068 * lam
    return np.clip(cp, 0.0, None)


def _ct_from_cp(cp):
    """Momentum-theory thrust coefficient matching a power coefficient: 4a(1-a)^2 = Cp, Ct = 4a(1-a)."""
    cp = np.clip(np.asarray(cp, float), 0.0, BETZ)
    lo = np.zeros_like(cp)
    hi = np.full_like(cp, 1.0 / 3.0)
    # 4a(1-a)^2 is increasing on [0, 1/3]; plain bisection to machine precision
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        below = 4 * mid * (1 - mid) ** 2 < cp
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    a = 0.5 * (lo + hi)
    return 4 * a * (1 - a)


@dataclass
class RotorTables:
    lam: np.ndarray          # tip-speed ratios (rows)
    beta_deg: np.ndarray     # blade pitch, degrees (columns)
    cp: np.ndarray
    ct: np.ndarray
    _warned: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        self.lam = np.asarray(self.lam, float)
        self.beta_deg = np.asarray(self.beta_deg, float)
        self.cp = np.asarray(self.cp, float)
        self.ct = np.asarray(self.ct, float)
        shape = (len(self.lam), len(self.beta_deg))
        if self.cp.shape != shape or self.ct.shape != shape:
            raise AeroError(f"table shape must be {shape}")
        if np.any(np.diff(self.lam) <= 0) or np.any(np.diff(self.beta_deg) <= 0):
            raise AeroError("table axes must be strictly increasing")
        if np.any(self.cp < 0) or np.any(self.cp >= BETZ):
            raise AeroError("Cp must lie in [0, 16/27)")
        if np.any(self.ct < 0):
            raise AeroError("Ct must be >= 0")

    @classmethod
    def parametric(cls, lambda_opt=7.5, lam=None, beta_deg=None):
        if lam is None:
            lam = np.round(np.arange(0.0, 30.0001, 0.1), 10)
        if beta_deg is None:
            beta_deg = np.round(np.arange(0.0, 90.0001, 0.5), 10)
        # the unscaled curve peaks near lambda = 8.1
        grid = np.linspace(6.0, 10.0, 4001)
        lam_peak = grid[np.argmax(_heier_cp(grid, 0.0, 1.0))]
        scale = lam_peak / lambda_opt
        L, Bd = np.meshgrid(lam, beta_deg, indexing="ij")
        cp = _heier_cp(L, Bd, scale)
        return cls(lam, beta_deg, cp, _ct_from_cp(cp))

    @cached_property
    def cp_max(self):
        i, j = np.unravel_index(np.argmax(self.cp), self.cp.shape)
        return float(self.cp[i, j]), float(self.lam[i])

    def _locate(self, lam, beta_deg):
        if (lam < self.lam[0] or lam > self.lam[-1] or beta_deg < self.beta_deg[0]
                or beta_deg > self.beta_deg[-1]) and not self._warned:
            log.warning("rotor table lookup clamped at (lambda=%.3g, beta=%.3g deg)", lam, beta_deg)
            self._warned = True
        lam = min(max(lam, self.lam[0]), self.lam[-1])
        beta_deg = min(max(beta_deg, self.beta_deg[0]), self.beta_deg[-1])
        i = min(max(int(np.searchsorted(self.lam, lam)) - 1, 0), len(self.lam) - 2)
        j = min(max(int(np.searchsorted(self.beta_deg, beta_deg)) - 1, 0), len(self.beta_deg) - 2)
        u = (lam - self.lam[i]) / (self.lam[i + 1] - self.lam[i])
        v = (beta_deg - self.beta_deg[j]) / (self.beta_deg[j + 1] - self.beta_deg[j])
        return i, j, u, v

    @staticmethod
    def _bilinear(tab, i, j, u, v):
        return ((1 - u) * (1 - v) * tab[i, j] + u * (1 - v) * tab[i + 1, j]
                + (1 - u) * v * tab[i, j + 1] + u * v * tab[i + 1, j + 1])

    def coefficients(self, lam, beta_deg):
        i, j, u, v = self._locate(lam, beta_deg)
        return self._bilinear(self.cp, i, j, u, v), self._bilinear(self.ct, i, j, u, v)

    # CSV grid: first row "lambda\\beta,b1,b2,...", then one row per lambda
    @staticmethod
    def _grid_csv(lam, beta, tab):
        buf = io.StringIO()
        buf.write("lambda\\beta," + ",".join(repr(float(b)) for b in beta) + "\n")
        for l, row in zip(lam, tab):
            buf.write(repr(float(l)) + "," + ",".join(repr(float(x)) for x in row) + "\n")
        return buf.getvalue()

    def to_csv(self):
        return self._grid_csv(self.lam, self.beta_deg, self.cp), self._grid_csv(self.lam, self.beta_deg, self.ct)

    @staticmethod
    def _parse(text):
        rows = [r.split(",") for r in text.strip().splitlines()]
        beta = np.array([float(x) for x in rows[0][1:]])
        lam = np.array([float(r[0]) for r in rows[1:]])
        tab = np.array([[float(x) for x in r[1:]] for r in rows[1:]])
        return lam, beta, tab

    @classmethod
    def from_csv(cls, cp_text, ct_text):
        lam, beta, cp = cls._parse(cp_text)
        lam2, beta2, ct = cls._parse(ct_text)
        if not (np.array_equal(lam, lam2) and np.array_equal(beta, beta2)):
            raise AeroError("Cp and Ct grids differ")
        return cls(lam, beta, cp, ct)

    @classmethod
    def load(cls, cp_path, ct_path):
        with open(cp_path) as a, open(ct_path) as b:
            return cls.from_csv(a.read(), b.read())


def rotor_loads(wind, rotor_speed, pitch, spec: TurbineSpec, tables: RotorTables, rho_air=RHO_AIR):
    """(thrust N, aerodynamic torque N m) for relative wind ``wind`` and pitch in rad."""
    if rotor_speed < 0:
        raise AeroError("rotor speed must be >= 0")
    if wind <= 1e-6:      # calm: no meaningful loads, avoid huge tip-speed ratios
        return 0.0, 0.0
    q = 0.5 * rho_air * spec.area * wind * wind
    if rotor_speed == 0.0:
        return q * spec.parked_ct, 0.0
    cp, ct = tables.coefficients(rotor_speed * spec.radius / wind, math.degrees(pitch))
    return q * ct, q * cp * wind / rotor_speed


# ---------------------------------------------------------------------------
# generator and pitch control

@dataclass
class ControllerState:
    omega: float            # rotor speed, rad/s
    integ: float = 0.0      # integral of the speed error, rad
    pitch: float = 0.0      # rad
    parked: bool = False


class Controller:
    """Quadratic torque law below rated, constant power plus PI pitch above.

    The generator efficiency is calibrated so that rated wind at rated rotor
    speed and zero pitch yields exactly the rated electrical power.
    """

    def __init__(self, spec: TurbineSpec, tables: RotorTables | None = None, rho_air=RHO_AIR,
                 omega_n=0.2, zeta=0.7):
        self.spec = spec
        self.tables = tables if tables is not None else RotorTables.parametric(spec.lambda_opt)
        self.rho = rho_air
        cp_max, lam_opt = self.tables.cp_max
        self.cp_max, self.lam_opt = cp_max, lam_opt
        self.k_opt = 0.5 * rho_air * math.pi * spec.radius ** 5 * cp_max / lam_opt ** 3
        w_r = spec.rated_omega
        _, q_aero = rotor_loads(spec.rated_wind, w_r, 0.0, spec, self.tables, rho_air)
        self.efficiency = spec.rating / (q_aero * w_r)
        if not 0 < self.efficiency <= 1:
            raise AeroError(f"rotor cannot reach rating at rated wind (efficiency {self.efficiency:.3f})")
        self.rated_torque = spec.rating / (self.efficiency * w_r)
        self.ramp_start = 0.95 * w_r
        self.beta_max = math.radians(90.0)
        # PI gains from the pitch sensitivity at rated
        h = 1e-4
        _, q1 = rotor_loads(spec.rated_wind + 2.0, w_r, h, spec, self.tables, rho_air)
        _, q0 = rotor_loads(spec.rated_wind + 2.0, w_r, 0.0, spec, self.tables, rho_air)
        dq = (q1 - q0) / h
        if dq >= 0:
            raise AeroError("torque does not decrease with pitch at rated")
        J = spec.rotor_inertia
        self.kp = 2 * zeta * omega_n * J / -dq
        self.ki = omega_n ** 2 * J / -dq

    def gen_torque(self, omega, pitch):
        w_r = self.spec.rated_omega
        if pitch > 0.0 or omega >= w_r:
            return self.spec.rating / (self.efficiency * max(omega, 1e-6))
        if omega <= self.ramp_start:
            return self.k_opt * omega * omega
        q0 = self.k_opt * self.ramp_start ** 2
        return q0 + (self.rated_torque - q0) * (omega - self.ramp_start) / (w_r - self.ramp_start)

    def pitch_command(self, omega, integ):
        e = omega - self.spec.rated_omega
        return min(max(self.kp * e + self.ki * integ, 0.0), self.beta_max)

    def integ_rate(self, omega, integ):
        e = omega - self.spec.rated_omega
        cmd = self.kp * e + self.ki * integ
        if (cmd <= 0.0 and e < 0.0) or (cmd >= self.beta_max and e > 0.0):
            return 0.0
        return e

    def electrical_power(self, omega, gen_torque):
        return min(self.efficiency * gen_torque * omega, self.spec.rating)

    def derivatives(self, wind, omega, integ, shutdown=False):
        """(d omega/dt, d integ/dt, thrust, gen torque, pitch, elec power) at one instant."""
        if shutdown:
            thrust, _ = rotor_loads(wind, 0.0, self.beta_max, self.spec, self.tables, self.rho)
            return 0.0, 0.0, thrust, 0.0, self.beta_max, 0.0
        pitch = self.pitch_command(omega, integ)
        thrust, q_aero = rotor_loads(wind, omega, pitch, self.spec, self.tables, self.rho)
        q_gen = self.gen_torque(omega, pitch)
        if wind < self.spec.cut_in:
            q_gen = 0.0
            # idle: hold the rotor near its optimal tip-speed ratio
            omega_idle = self.lam_opt * max(wind, 0.0) / self.spec.radius
            domega = (omega_idle - omega) / 5.0
        else:
            domega = (q_aero - q_gen) / self.spec.rotor_inertia
        if omega <= 0.0 and domega < 0.0:
            domega = 0.0
        p = self.electrical_power(omega, q_gen)
        return domega, self.integ_rate(omega, integ), thrust, q_gen, pitch, p

    def generator_step(self, state: ControllerState, wind, dt):
        """Advance the one-mass drivetrain under a fixed hub wind by one RK4 step.

        Returns (gen_torque, elec_power, new ControllerState).
        """
        if wind > self.spec.cut_out or state.parked:
            st = ControllerState(0.0, 0.0, self.beta_max, True)
            return 0.0, 0.0, st

        def f(y):
            d = self.derivatives(wind, y[0], y[1])
            return np.array([d[0], d[1]])

        y = np.array([state.omega, state.integ])
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        k3 = f(y + 0.5 * dt * k2)
        k4 = f(y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        y[0] = max(y[0], 0.0)
        _, _, _, q_gen, pitch, p = self.derivatives(wind, y[0], y[1])
        return q_gen, p, ControllerState(float(y[0]), float(y[1]), pitch)

    # -- steady state -----------------------------------------------------
    def steady_state(self, wind):
        """Operating point for a steady wind: dict(omega, pitch, thrust, aero_torque, power, integ)."""
        spec = self.spec
        if wind > spec.cut_out:
            thrust, _ = rotor_loads(wind, 0.0, self.beta_max, spec, self.tables, self.rho)
            return dict(omega=0.0, pitch=self.beta_max, thrust=thrust, aero_torque=0.0, power=0.0, integ=0.0,
                        parked=True)
        if wind <= 0:
            return dict(omega=0.0, pitch=0.0, thrust=0.0, aero_torque=0.0, power=0.0, integ=0.0, parked=False)
        w_r = spec.rated_omega
        if wind < spec.cut_in:
            om = self.lam_opt * wind / spec.radius
            thrust, q = rotor_loads(wind, om, 0.0, spec, self.tables, self.rho)
            return dict(omega=om, pitch=0.0, thrust=thrust, aero_torque=q, power=0.0, integ=0.0, parked=False)
        if wind >= spec.rated_wind:
            target = spec.rating / (self.efficiency * w_r)

            def g(b):
                return rotor_loads(wind, w_r, b, spec, self.tables, self.rho)[1] - target

            if g(0.0) <= 0:
                beta = 0.0
            else:
                beta = optimize.brentq(g, 0.0, self.beta_max, xtol=1e-12)
            thrust, q = rotor_loads(wind, w_r, beta, spec, self.tables, self.rho)
            return dict(omega=w_r, pitch=beta, thrust=thrust, aero_torque=q, power=spec.rating,
                        integ=beta / self.ki, parked=False)

        def h(om):
            return rotor_loads(wind, om, 0.0, spec, self.tables, self.rho)[1] - self.gen_torque(om, 0.0)

        lo = 0.3 * self.lam_opt * wind / spec.radius
        om = optimize.brentq(h, lo, w_r * (1 - 1e-12), xtol=1e-12) if h(w_r * (1 - 1e-12)) < 0 else w_r
        thrust, q = rotor_loads(wind, om, 0.0, spec, self.tables, self.rho)
        p = self.electrical_power(om, self.gen_torque(om, 0.0))
        return dict(omega=om, pitch=0.0, thrust=thrust, aero_torque=q, power=p, integ=0.0, parked=False)
