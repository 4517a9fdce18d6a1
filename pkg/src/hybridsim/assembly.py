"""Coupled equations of motion for moored platforms with an optional turbine and sliding float.

Generalized coordinates are the platform pose (surge, sway, heave, roll, pitch,
yaw) plus, when a float is present, its displacement ``s`` along the platform
z-axis. Each body's 6-DOF motion about the common reference point (SWL on the
centreline) is ``J_b @ q`` with ``J_p = [I | 0]`` and ``J_f = [I | e_z]``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import aero, waves
from .catalog import SystemConfig
from .hydro import HydroCoefficients, load_coefficients, radiation_irf
from .mooring import MooringSystem, rotation

G = 9.81
DOF = ("surge", "sway", "heave", "roll", "pitch", "yaw")


class AssemblyError(ValueError):
    pass


class ConfigurationError(AssemblyError):
    pass


class EquilibriumError(AssemblyError):
    pass


class DivergenceError(AssemblyError):
    pass


def _skew(c):
    return np.array([[0.0, -c[2], c[1]], [c[2], 0.0, -c[0]], [-c[1], c[0], 0.0]])


def rigid_mass_matrix(mass, cog, inertia_cg):
    """6x6 rigid-body mass matrix about the origin for a body with CoG ``cog``."""
    S = _skew(np.asarray(cog, float))
    M = np.zeros((6, 6))
    M[:3, :3] = mass * np.eye(3)
    M[:3, 3:] = -mass * S
    M[3:, :3] = mass * S
    M[3:, 3:] = np.asarray(inertia_cg, float) - mass * S @ S
    return M


@dataclass
class Body:
    name: str
    coeffs: HydroCoefficients
    J: np.ndarray               # (6, n)
    mass: float
    cog: np.ndarray
    inertia_cg: np.ndarray
    drag: np.ndarray            # (6,) quadratic coefficients

    @property
    def rigid_mass(self):
        return rigid_mass_matrix(self.mass, self.cog, self.inertia_cg)


@dataclass
class SystemState:
    t: float
    q: np.ndarray               # platform pose (6) and optional float displacement
    qd: np.ndarray
    rotor_speed: float = 0.0
    pitch_integral: float = 0.0

    @property
    def pose(self):
        return self.q[:6]

    @property
    def float_relative(self):
        return float(self.q[6]) if len(self.q) > 6 else 0.0

    def float_position(self):
        """Absolute float reference point: platform pose composed with the axial slide."""
        R = rotation(self.q[:6])
        return self.q[:3] + R[:, 2] * self.float_relative


class HybridSystem:
    """Assembled matrices and sub-models for one configuration."""

    def __init__(self, config: SystemConfig, bodies, mooring, controller, M, K, F_const, rho, g):
        self.config = config
        self.bodies = bodies
        self.mooring = mooring
        self.controller = controller
        self.M = M
        self.K = K
        self.F_const = F_const
        self.rho, self.g = rho, g
        self.n = M.shape[0]
        self.Minv = np.linalg.inv(M)
        self.hub_height = config.turbine.hub_height if config.turbine is not None else 0.0
        self.c_pto = config.c_pto
        self.float_spec = config.float

    @property
    def n_dof(self):
        return self.n

    def project(self, body_forces):
        """Generalized force from a list of per-body 6-vectors."""
        out = np.zeros(self.n)
        for b, f in zip(self.bodies, body_forces):
            out += b.J.T @ f
        return out

    # -- statics ----------------------------------------------------------
    def static_residual(self, q, thrust=0.0, tol=1e-10):
        R = self.F_const - self.K @ q
        if self.mooring is not None:
            R[:6] += self.mooring.static_load(q[:6], tol=tol)
        R[0] += thrust
        R[4] += thrust * self.hub_height
        return R

    def mooring_stiffness(self, h=1e-3):
        """Finite-difference quasi-static mooring stiffness about the neutral pose (catenary model)."""
        if self.mooring is None:
            return np.zeros((6, 6))
        qs = MooringSystem(self.mooring.layout, "quasistatic", g=self.g, active=self.mooring.active)
        Kq = np.zeros((6, 6))
        for j in range(6):
            d = np.zeros(6)
            d[j] = h
            Kq[:, j] = -(qs.static_load(d) - qs.static_load(-d)) / (2 * h)
        return Kq

    def equilibrium(self, thrust=0.0, tol=1e-8, max_iter=40):
        """Static pose under constant thrust by relaxation with a fixed tangent stiffness."""
        Kt = self.K.copy()
        Kt[:6, :6] += self.mooring_stiffness()
        Kt += 1e-9 * np.abs(np.diag(Kt)).max() * np.eye(self.n)
        q = np.linalg.solve(Kt, self.static_residual(np.zeros(self.n), thrust)) if thrust else np.zeros(self.n)
        scale = max(1.0, float(np.abs(self.F_const).max()), abs(thrust))
        for it in range(max_iter):
            R = self.static_residual(q, thrust)
            dq = np.linalg.solve(Kt, R)
            q = q + dq
            if np.abs(dq).max() < tol:
                break
        else:
            raise EquilibriumError(f"equilibrium not converged; residual {np.array2string(R, precision=3)}")
        R = self.static_residual(q, thrust)
        if np.abs(R).max() > 1e-6 * scale:
            raise EquilibriumError(f"equilibrium residual too large: {np.array2string(R, precision=3)}")
        return q


def _tower_inertia(spec: aero.TurbineSpec):
    L = max(spec.hub_height - spec.tower_base, 1.0)
    i_rod = spec.tower_mass * L ** 2 / 12.0
    r = 0.5 * spec.rotor_diameter / 30.0      # shell radius scale
    return np.diag([i_rod, i_rod, spec.tower_mass * r ** 2])


def build_system(config: SystemConfig, mooring_model: str | None = None, rho=1025.0, g=G,
                 rotor_tables: aero.RotorTables | None = None) -> HybridSystem:
    """Assemble the generalized mass, stiffness and sub-models for ``config``."""
    n = config.n_dof
    pcoef = load_coefficients(config.coeff_path(config.platform.coefficients))
    mooring = None
    fz0 = 0.0
    if config.mooring is not None:
        mooring = MooringSystem(config.mooring, mooring_model or config.mooring_model, rho=rho, g=g)
        load0 = mooring.initialise(np.zeros(6), tol=1e-10)
        fz0 = float(load0[2])

    # platform mass: turbine parts fixed, hull ballast trimmed for neutral heave
    comps = []
    turbine = config.turbine
    if turbine is not None:
        comps.append((turbine.tower_mass, np.array([0, 0, turbine.tower_cg]), _tower_inertia(turbine)))
        comps.append((turbine.rna_mass, np.array([0, 0, turbine.hub_height]), np.zeros((3, 3))))
    m_total = rho * pcoef.volume + fz0 / g
    m_hull = m_total - sum(c[0] for c in comps)
    if m_hull <= 0:
        raise ConfigurationError(f"{config.name}: platform buoyancy cannot carry the turbine and mooring "
                                 f"(hull mass {m_hull:.4g} kg)")
    kr, kz = config.platform.gyration_roll, config.platform.gyration_yaw
    comps.append((m_hull, np.array([0, 0, config.platform.cog_z]),
                  m_hull * np.diag([kr ** 2, kr ** 2, kz ** 2])))
    M_p = sum(rigid_mass_matrix(*c) for c in comps)
    cog_p = sum(c[0] * c[1] for c in comps) / m_total

    Jp = np.zeros((6, n))
    Jp[:, :6] = np.eye(6)
    inertia_p = M_p[3:, 3:] + m_total * _skew(cog_p) @ _skew(cog_p)
    bodies = [Body("platform", pcoef, Jp, m_total, cog_p, inertia_p,
                   config.platform.drag_model(rho).coefficients)]
    if config.float is not None:
        fs = config.float
        fcoef = load_coefficients(config.coeff_path(fs.coefficients))
        m_f = rho * fcoef.volume
        ro, ri = fs.outer_diameter / 2, fs.inner_diameter / 2
        i_z = 0.5 * m_f * (ro ** 2 + ri ** 2)
        i_x = 0.25 * m_f * (ro ** 2 + ri ** 2) + m_f * fs.height ** 2 / 12
        Jf = np.zeros((6, n))
        Jf[:, :6] = np.eye(6)
        Jf[2, 6] = 1.0
        bodies.append(Body("float", fcoef, Jf, m_f, np.array([0, 0, fs.cog_z]), np.diag([i_x, i_x, i_z]),
                           fs.drag_model(rho).coefficients))

    M = np.zeros((n, n))
    K = np.zeros((n, n))
    for b in bodies:
        Cg = np.zeros((6, 6))
        Cg[3, 3] = Cg[4, 4] = -b.mass * g * b.cog[2]
        M += b.J.T @ (b.rigid_mass + b.coeffs.a_inf) @ b.J
        K += b.J.T @ (b.coeffs.hydrostatic + Cg) @ b.J
    M = 0.5 * (M + M.T)
    ev = np.linalg.eigvalsh(M)
    if ev.min() <= 1e-9 * ev.max():
        raise ConfigurationError(f"{config.name}: singular generalized mass matrix (eigenvalues {ev.min():.3g} "
                                 f"to {ev.max():.3g})")
    F_const = np.zeros(n)
    F_const[2] = (rho * pcoef.volume - m_total) * g
    controller = aero.Controller(turbine, rotor_tables) if turbine is not None else None
    return HybridSystem(config, bodies, mooring, controller, M, K, F_const, rho, g)


# ---------------------------------------------------------------------------
# time series

CHANNELS_BASE = ["t", "surge", "sway", "heave", "roll", "pitch", "yaw", "eta"]


@dataclass
class TimeSeriesResult:
    dt: float
    channels: dict
    transient_cutoff: float = 200.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        lengths = {len(v) for v in self.channels.values()}
        if len(lengths) > 1:
            raise AssemblyError("all channels must have the same length")

    def __getitem__(self, name):
        return self.channels[name]

    @property
    def names(self):
        return list(self.channels)

    def window(self, name):
        return np.asarray(self.channels[name])[np.asarray(self.channels["t"]) >= self.transient_cutoff - 1e-9]

    def rms(self, name, mean_removed=False):
        return rms(self.channels[name], self.transient_cutoff, self.dt, mean_removed, t=self.channels["t"])

    def mean(self, name):
        w = self.window(name)
        if len(w) == 0:
            raise AssemblyError("empty statistics window")
        return float(np.mean(w))

    def summary(self):
        out = {}
        for k in self.channels:
            if k == "t":
                continue
            out[k] = {"rms": _r(self.rms(k)), "rms_mean_removed": _r(self.rms(k, True)),
                      "mean": _r(self.mean(k)), "max": _r(float(np.max(self.window(k)))),
                      "min": _r(float(np.min(self.window(k))))}
        return out

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        names = self.names
        w.writerow(names)
        cols = [np.asarray(self.channels[k]) for k in names]
        for i in range(len(cols[0])):
            w.writerow([f"{c[i]:.10g}" for c in cols])
        return buf.getvalue()

    def summary_json(self):
        d = {"dt": self.dt, "transient_cutoff": self.transient_cutoff, "meta": self.meta,
             "channels": self.summary()}
        return json.dumps(d, indent=2, sort_keys=True)


def _r(x):
    return float(f"{x:.10g}")


def window_sums(series, start=0, stop=None):
    """(count, sum, sum of squares) over series[start:stop]; sums over adjacent windows add."""
    x = np.asarray(series, float)[start:stop]
    return len(x), float(np.sum(x)), float(np.sum(x * x))


def rms_from_sums(sums, mean_removed=False):
    n, s1, s2 = sums
    if n == 0:
        raise AssemblyError("empty statistics window")
    ms = s2 / n
    if mean_removed:
        ms -= (s1 / n) ** 2
    return math.sqrt(max(ms, 0.0))


def rms(series, transient_cutoff=0.0, dt=1.0, mean_removed=False, t=None):
    """Root mean square over samples at or after ``transient_cutoff``."""
    x = np.asarray(series, float)
    tt = dt * np.arange(len(x)) if t is None else np.asarray(t, float)
    w = x[tt >= transient_cutoff - 1e-9]
    if len(w) == 0:
        raise AssemblyError(f"no samples after the transient cutoff {transient_cutoff} s")
    if mean_removed:
        w = w - w.mean()
    return float(np.sqrt(np.mean(w * w)))


# ---------------------------------------------------------------------------
# integration

@dataclass
class Environment:
    sea_state: waves.SeaState | None = None
    wind: aero.WindSpec | None = None


class Simulator:
    """Fixed-step RK4 integration of one system in one environment.

    Radiation memory is evaluated every ``radiation_dt`` on a decimated
    velocity history and interpolated linearly inside the interval, with the
    zero-lag term kept live. Mooring loads are held over a step and the lines
    are advanced afterwards with linearly interpolated fairleads.
    """

    def __init__(self, system: HybridSystem, env: Environment, duration: float, dt: float = 0.01,
                 radiation_dt: float = 0.05, irf_t_max: float = 60.0, split_damping: bool = True,
                 start: np.ndarray | None = None):
        if dt <= 0 or duration <= 0:
            raise AssemblyError("dt and duration must be positive")
        ratio = radiation_dt / dt
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ConfigurationError(f"dt={dt} must divide the radiation step {radiation_dt}")
        self.system = system
        self.env = env
        self.dt = dt
        self.duration = duration
        self.nsteps = int(round(duration / dt))
        self.sub = int(round(ratio))
        n = system.n

        # radiation kernels, generalized
        self.B_lin = np.zeros((n, n))
        kern = None
        for b in system.bodies:
            B = b.coeffs.damping
            if split_damping:
                B0 = B[-1]
                self.B_lin += b.J.T @ B0 @ b.J
                B = B - B0[None]
            irf = radiation_irf(b.coeffs, radiation_dt, irf_t_max, damping=B)
            Kg = np.einsum("ai,tab,bj->tij", b.J, irf.kernel, b.J)
            kern = Kg if kern is None else kern + Kg
        w = np.full(len(kern), radiation_dt)
        w[0] = w[-1] = 0.5 * radiation_dt
        self.WK = w[:, None, None] * kern
        self.K0w = self.WK[0]
        self.hist = np.zeros((len(kern), n))
        self.A_rad = np.zeros(n)
        self.B_rad = np.zeros(n)
        self.drag_bodies = [(b.J, b.drag) for b in system.bodies if np.any(b.drag > 0)]

        # excitation and wind on the half-step grid
        t_half = 0.5 * dt * np.arange(2 * self.nsteps + 1)
        self.F_exc = np.zeros((len(t_half), n))
        self.eta = np.zeros(len(t_half))
        ss = env.sea_state
        if ss is not None and ss.height > 0:
            real = waves.synthesize(ss, duration, dt)
            self.eta = real.eta(t_half)
            for b in system.bodies:
                self.F_exc += waves.excitation_matrix(real, b.coeffs, t_half) @ b.J
        ctrl = system.controller
        self.wind = None
        self.shutdown = False
        mean_wind = 0.0
        if ctrl is not None:
            ws = env.wind or aero.WindSpec.steady(0.0)
            mean_wind = ws.mean_speed
            self.wind = aero.synthesize_wind(ws, duration, 0.5 * dt, system.hub_height)
            self.shutdown = ws.mean_speed > ctrl.spec.cut_out

        # initial state: static equilibrium under the mean operating thrust
        q0 = np.zeros(n)
        om0 = integ0 = 0.0
        thrust0 = 0.0
        if ctrl is not None:
            ss0 = ctrl.steady_state(mean_wind)
            thrust0 = ss0["thrust"]
            if not self.shutdown:
                om0, integ0 = ss0["omega"], ss0["integ"]
        if start is not None:
            q0 = np.asarray(start, float).copy()
        else:
            q0 = system.equilibrium(thrust0)
        if system.mooring is not None:
            system.mooring.static_load(q0[:6], tol=1e-10)
        self.state = SystemState(0.0, q0, np.zeros(n), om0, integ0)
        self.step_index = 0
        self.F_moor = np.zeros(n)
        self._update_mooring_force()
        self._update_radiation()

    # -- pieces -------------------------------------------------------------
    def _update_mooring_force(self):
        m = self.system.mooring
        if m is not None:
            self.F_moor[:6] = m.load(self.state.q[:6])

    def _update_radiation(self):
        self.hist[1:] = self.hist[:-1]
        self.hist[0] = self.state.qd
        self.A_rad = np.einsum("jab,jb->a", self.WK[1:], self.hist[1:])
        self.B_rad = np.einsum("jab,jb->a", self.WK[1:], self.hist[:-1])

    def _rhs(self, k_half, alpha, q, qd, om, integ):
        sysm = self.system
        F = self.F_exc[k_half] + sysm.F_const + self.F_moor - sysm.K @ q - self.B_lin @ qd
        F -= (1.0 - alpha) * self.A_rad + alpha * self.B_rad + self.K0w @ qd
        for J, c in self.drag_bodies:
            v = J @ qd
            F -= J.T @ (c * np.abs(v) * v)
        if sysm.n > 6:
            F[6] -= sysm.c_pto * qd[6]
        dom = dint = 0.0
        aux = (0.0, 0.0, 0.0, 0.0, 0.0)
        ctrl = sysm.controller
        if ctrl is not None:
            z = sysm.hub_height
            v_rel = self.wind[k_half] - (qd[0] + z * qd[4])
            dom, dint, thrust, q_gen, pitch, p = ctrl.derivatives(v_rel, om, integ, self.shutdown)
            F[0] += thrust
            F[4] += thrust * z
            aux = (thrust, q_gen, pitch, p, v_rel)
        return sysm.Minv @ F, dom, dint, aux

    def step(self):
        """Advance one RK4 step; returns the new SystemState."""
        st = self.state
        dt = self.dt
        i = self.step_index
        j = i % self.sub
        a0, am, a1 = j / self.sub, (j + 0.5) / self.sub, (j + 1) / self.sub
        k = 2 * i
        q, qd, om, it = st.q, st.qd, st.rotor_speed, st.pitch_integral
        a1_, o1, i1, aux = self._rhs(k, a0, q, qd, om, it)
        self.aux = aux
        h = 0.5 * dt
        a2_, o2, i2, _ = self._rhs(k + 1, am, q + h * qd, qd + h * a1_, om + h * o1, it + h * i1)
        qd2 = qd + h * a1_
        a3_, o3, i3, _ = self._rhs(k + 1, am, q + h * qd2, qd + h * a2_, om + h * o2, it + h * i2)
        qd3 = qd + h * a2_
        qd4 = qd + dt * a3_
        a4_, o4, i4, _ = self._rhs(k + 2, a1, q + dt * qd3, qd4, om + dt * o3, it + dt * i3)
        q_new = q + dt / 6 * (qd + 2 * qd2 + 2 * qd3 + qd4)
        qd_new = qd + dt / 6 * (a1_ + 2 * a2_ + 2 * a3_ + a4_)
        om_new = max(om + dt / 6 * (o1 + 2 * o2 + 2 * o3 + o4), 0.0)
        it_new = it + dt / 6 * (i1 + 2 * i2 + 2 * i3 + i4)
        self._check(q_new, qd_new, st.t + dt)
        m = self.system.mooring
        if m is not None:
            m.advance(q[:6], q_new[:6], dt)
        self.step_index += 1
        self.state = SystemState(self.step_index * dt, q_new, qd_new, om_new, it_new)
        self._update_mooring_force()
        if self.step_index % self.sub == 0:
            self._update_radiation()
        return self.state

    def _check(self, q, qd, t):
        bad = not (np.all(np.isfinite(q)) and np.all(np.isfinite(qd)))
        if not bad:
            bad = (np.abs(q[:3]).max() > 1e3 or np.abs(q[3:6]).max() > 1.2
                   or (len(q) > 6 and abs(q[6]) > 50.0))
        if bad:
            names = list(DOF) + (["float_rel"] if len(q) > 6 else [])
            diag = ", ".join(f"{nm}={x:.4g}/{v:.4g}" for nm, x, v in zip(names, q, qd))
            raise DivergenceError(f"simulation diverged at t={t:.3f} s (position/velocity): {diag}")

    # -- recording ---------------------------------------------------------------
    def channel_names(self):
        sysm = self.system
        names = list(CHANNELS_BASE)
        if sysm.n > 6:
            names += ["float_rel", "float_rel_vel", "float_heave", "pto_force_float", "pto_force_platform",
                      "pto_third_law", "constraint_offaxis", "pto_power", "wec_power"]
        if sysm.controller is not None:
            names += ["wind", "thrust", "rotor_speed", "blade_pitch", "gen_torque", "wt_power"]
        if sysm.mooring is not None:
            names += [f"tension_{i + 1}" for i in range(sysm.mooring.layout.n_lines)]
        return names

    def sample(self):
        st = self.state
        sysm = self.system
        q, qd = st.q, st.qd
        row = [st.t, *q[:6], self.eta[2 * self.step_index]]
        if sysm.n > 6:
            R = rotation(q[:6])
            axis = R[:, 2]
            vrel = qd[6]
            f_float = -sysm.c_pto * vrel * axis
            f_plat = sysm.c_pto * vrel * axis
            offset = R.T @ (st.float_position() - q[:3])
            p_mech = sysm.c_pto * vrel * vrel
            fs = sysm.float_spec
            p_elec = min(fs.efficiency * p_mech, fs.rated_power)
            row += [q[6], vrel, st.float_position()[2], -sysm.c_pto * vrel, sysm.c_pto * vrel,
                    float(np.abs(f_float + f_plat).max()), float(np.hypot(offset[0], offset[1])),
                    p_mech, p_elec]
        if sysm.controller is not None:
            _, _, _, aux = self._rhs(2 * self.step_index, (self.step_index % self.sub) / self.sub,
                                     q, qd, st.rotor_speed, st.pitch_integral)
            thrust, q_gen, pitch, p, _ = aux
            row += [self.wind[2 * self.step_index], thrust, st.rotor_speed, pitch, q_gen, p]
        if sysm.mooring is not None:
            row += list(sysm.mooring.tensions())
        return row

    def run(self, transient_cutoff=200.0, record_dt=0.05, progress=None):
        every = max(1, int(round(record_dt / self.dt)))
        rows = [self.sample()]
        for _ in range(self.nsteps):
            self.step()
            if self.step_index % every == 0:
                rows.append(self.sample())
            if progress is not None:
                progress(self.step_index, self.nsteps)
        arr = np.array(rows)
        channels = {nm: arr[:, i] for i, nm in enumerate(self.channel_names())}
        return TimeSeriesResult(every * self.dt, channels, transient_cutoff)


def simulate(system: HybridSystem | SystemConfig, sea_state=None, wind=None, duration=1200.0, dt=0.01,
             transient_cutoff=200.0, record_dt=0.05, **kw) -> TimeSeriesResult:
    if duration <= transient_cutoff:
        raise AssemblyError("duration must exceed the transient cutoff")
    if isinstance(system, SystemConfig):
        system = build_system(system)
    sim = Simulator(system, Environment(sea_state, wind), duration, dt, **kw)
    res = sim.run(transient_cutoff, record_dt)
    res.meta = {"system": system.config.name, "duration": duration, "dt": dt,
                "sea_state": None if sea_state is None else
                {"kind": sea_state.kind.value, "height": sea_state.height, "period": sea_state.period,
                 "seed": sea_state.seed},
                "wind": None if wind is None else {"mean_speed": wind.mean_speed,
                                                   "turbulence_intensity": wind.turbulence_intensity,
                                                   "seed": wind.seed}}
    return res
