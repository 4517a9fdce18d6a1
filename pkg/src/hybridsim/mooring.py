"""Mooring lines: elastic catenary statics and a lumped-mass dynamic model."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

try:
    from numba import njit
except ImportError:  # pragma: no cover - the pure-python path is slow but equivalent
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

G = 9.81
RHO = 1025.0


class MooringError(ValueError):
    pass


class CatenaryError(MooringError):
    pass


class ConfigError(MooringError):
    pass


@dataclass(frozen=True)
class LineProps:
    unstretched_length: float
    diameter: float
    mass_per_length: float
    wet_mass_per_length: float
    ea: float
    n_segments: int = 40
    cdn: float = 1.6
    cdt: float = 0.05
    can: float = 1.0
    seabed_stiffness: float = 3e6     # N/m per m of line resting on the seabed
    damping_fraction: float = 0.2     # internal damping time as a fraction of the segment transit time

    def __post_init__(self):
        for name in ("unstretched_length", "diameter", "mass_per_length", "wet_mass_per_length", "ea"):
            if getattr(self, name) <= 0:
                raise MooringError(f"{name} must be > 0")
        if self.wet_mass_per_length > self.mass_per_length:
            raise MooringError("wet mass per length cannot exceed dry mass per length")
        if self.n_segments < 2:
            raise MooringError("need at least two segments")

    def weight(self, g=G):
        """Submerged weight per unit length, N/m."""
        return self.wet_mass_per_length * g

    @property
    def segment_length(self):
        return self.unstretched_length / self.n_segments

    @property
    def wave_speed(self):
        return math.sqrt(self.ea / self.mass_per_length)

    def cfl_limit(self):
        """Largest stable explicit step by the segment-wave criterion."""
        return self.segment_length / self.wave_speed


@dataclass(frozen=True)
class MooringLayout:
    azimuths: tuple           # degrees
    anchor_depth: float       # m below SWL (positive)
    fairlead_depth: float
    anchor_radius: float
    fairlead_radius: float
    props: LineProps

    def __post_init__(self):
        az = np.sort(np.mod(np.asarray(self.azimuths, float), 360.0))
        if len(az) >= 2:
            gaps = np.diff(np.r_[az, az[0] + 360.0])
            if np.ptp(gaps) > 1e-6:
                raise MooringError("line azimuths must be uniformly spaced")
        for name in ("anchor_depth", "anchor_radius", "fairlead_radius"):
            if getattr(self, name) is None:
                raise MooringError(f"{name} is required")

    @property
    def n_lines(self):
        return len(self.azimuths)

    def anchors(self):
        a = np.radians(np.asarray(self.azimuths, float))
        return np.column_stack([self.anchor_radius * np.cos(a), self.anchor_radius * np.sin(a),
                                np.full(len(a), -self.anchor_depth)])

    def fairleads_body(self):
        """Fairlead positions in the platform frame (origin at SWL on the centreline)."""
        a = np.radians(np.asarray(self.azimuths, float))
        return np.column_stack([self.fairlead_radius * np.cos(a), self.fairlead_radius * np.sin(a),
                                np.full(len(a), -self.fairlead_depth)])


# ---------------------------------------------------------------------------
# catenary

@dataclass
class CatenaryResult:
    H: float                   # horizontal tension, N
    V_fairlead: float          # vertical tension at the fairlead, N
    V_anchor: float
    touchdown: float           # unstretched length resting on the seabed, m
    fairlead_force: np.ndarray  # force of the line on the fairlead (global), N
    anchor_force: np.ndarray
    residual: float
    _geom: tuple = field(repr=False, default=())

    @property
    def tension(self):
        return float(np.linalg.norm(self.fairlead_force))

    def shape(self, s):
        """Global positions at unstretched arc lengths ``s`` measured from the anchor."""
        (props, w, anchor, e_h, seabed) = self._geom
        s = np.asarray(s, float)
        x, z = _profile(s, self.H, self.V_fairlead, props.unstretched_length, w, props.ea, seabed)
        return anchor[None, :] + x[:, None] * e_h[None, :] + z[:, None] * np.array([0.0, 0.0, 1.0])


def _profile(s, H, VF, L, w, EA, seabed):
    """Horizontal and vertical offsets from the anchor at arc length s."""
    VA = VF - w * L
    if H <= 0:
        # vertical line: the lower part may lie on the seabed in a heap
        Ls = VF / w if seabed else L
        Lb = L - Ls
        sb = np.clip(s - Lb, 0.0, None)
        z = sb + (w * sb ** 2 / 2) / EA + (VA if not seabed else 0.0) * sb / EA
        return np.zeros_like(s), z
    if seabed and VA < 0:
        Lb = L - VF / w
        x = np.empty_like(s)
        z = np.empty_like(s)
        on = s <= Lb
        x[on] = s[on] * (1 + H / EA)
        z[on] = 0.0
        ss = s[~on]
        V = w * (ss - Lb)
        x[~on] = Lb + H / w * np.arcsinh(V / H) + H * ss / EA
        z[~on] = H / w * (np.sqrt(1 + (V / H) ** 2) - 1) + V ** 2 / (2 * EA * w)
        return x, z
    V = VA + w * s
    x = H / w * (np.arcsinh(V / H) - np.arcsinh(VA / H)) + H * s / EA
    z = H / w * (np.sqrt(1 + (V / H) ** 2) - np.sqrt(1 + (VA / H) ** 2)) + (VA * s + w * s ** 2 / 2) / EA
    return x, z


def _span(H, VF, L, w, EA, seabed):
    x, z = _profile(np.array([L]), H, VF, L, w, EA, seabed)
    return x[0], z[0]


def catenary_solve(props: LineProps, fairlead, anchor, seabed_depth=None, g=G, tol=1e-8) -> CatenaryResult:
    """Elastic catenary between ``anchor`` and ``fairlead`` with frictionless seabed contact.

    The seabed is active when the anchor lies on it (default seabed depth is
    the anchor depth). Grounded and suspended branches are chosen automatically.
    """
    fairlead = np.asarray(fairlead, float)
    anchor = np.asarray(anchor, float)
    d = fairlead - anchor
    X = float(np.hypot(d[0], d[1]))
    Z = float(d[2])
    if Z < 0:
        raise CatenaryError("fairlead below anchor is not supported")
    L, EA, w = props.unstretched_length, props.ea, props.weight(g)
    if seabed_depth is None:
        seabed_depth = -anchor[2]
    seabed = bool(np.isclose(anchor[2], -seabed_depth, atol=1e-6))
    e_h = np.array([d[0], d[1], 0.0]) / X if X > 1e-12 else np.array([1.0, 0.0, 0.0])
    scale = w * L

    if X < 1e-9 * L:
        # vertical line
        if Z >= L or not seabed:
            VF = (Z - L) * EA / L + w * L / 2 if Z >= L or not seabed else 0.0
            if not seabed and Z < L:
                raise CatenaryError("vertical slack line without seabed has no static solution")
            H = 0.0
        else:
            # suspended length Ls with Ls + w Ls^2 / (2 EA) = Z
            Ls = (-1 + math.sqrt(1 + 2 * w * Z / EA)) / (w / EA)
            VF, H = w * Ls, 0.0
        res = 0.0
    else:
        def resid(p):
            H_, VF_ = p[0] * scale, p[1] * scale
            if H_ <= 0:
                return [1e3 * (1 - p[0]), 1e3]
            x, z = _span(H_, VF_, L, w, EA, seabed)
            return [(x - X) / L, (z - Z) / L]

        dist = math.hypot(X, Z)
        if dist >= L:
            lam = 0.2
        else:
            lam = math.sqrt(3 * ((L * L - Z * Z) / (X * X) - 1))
        H0 = max(abs(w * X / (2 * lam)), 1e-3 * scale)
        V0 = w / 2 * (Z / math.tanh(lam) + L)
        best = None
        for guess in ([H0 / scale, V0 / scale], [1.0, 1.0], [0.1, 0.5], [10.0, 1.0]):
            sol = optimize.root(resid, guess, method="hybr", options={"xtol": 1e-15, "maxfev": 4000})
            r = float(np.max(np.abs(resid(sol.x))))
            if best is None or r < best[1]:
                best = (sol.x, r)
            if r < tol * 1e-3:
                break
        p, res = best
        if res > tol:
            raise CatenaryError(f"catenary did not converge: relative residual {res:.3e}")
        H, VF = p[0] * scale, p[1] * scale
    VA = VF - w * L
    touchdown = max(L - VF / w, 0.0) if seabed else 0.0
    if seabed and VA < 0:
        VA = 0.0
    f_fair = -H * e_h + np.array([0.0, 0.0, -VF])
    f_anch = H * e_h + np.array([0.0, 0.0, VA])
    return CatenaryResult(H, VF, VA, touchdown, f_fair, f_anch, res, (props, w, anchor, e_h, seabed))


def catenary_oracle(props: LineProps, fairlead, anchor, g=G):
    """Independent check: integrate the elastic line ODE from the anchor and shoot on (H, V).

    Returns (H, V_fairlead). Seabed contact is handled by a grounded length
    that carries only horizontal tension.
    """
    from scipy.integrate import solve_ivp

    fairlead = np.asarray(fairlead, float)
    anchor = np.asarray(anchor, float)
    X = float(np.hypot(*(fairlead - anchor)[:2]))
    Z = float(fairlead[2] - anchor[2])
    L, EA, w = props.unstretched_length, props.ea, props.weight(g)

    def ends(H, VF):
        Lb = max(L - VF / w, 0.0)
        VA = max(VF - w * L, 0.0)

        def rhs(s, y):
            V = VA + w * (s - Lb)
            T = math.hypot(H, V)
            return [H / T * (1 + T / EA), V / T * (1 + T / EA)]

        y = solve_ivp(rhs, (Lb, L), [Lb * (1 + H / EA), 0.0], rtol=1e-11, atol=1e-9).y[:, -1]
        return y

    def resid(p):
        return (ends(p[0], p[1]) - np.array([X, Z])) / L

    guess = catenary_solve(props, fairlead, anchor, g=g)
    sol = optimize.root(resid, [guess.H * 1.05, guess.V_fairlead * 0.97], method="hybr")
    return float(sol.x[0]), float(sol.x[1])


# ---------------------------------------------------------------------------
# lumped-mass line

@njit(cache=True)
def _line_forces(r, v, L0, EA, beta, d, rho, cdn, cdt, w_node, m_node, seabed_z, k_sb, L_node, tens):
    n = r.shape[0]
    F = np.zeros_like(r)
    for i in range(n - 1):
        dx = r[i + 1, 0] - r[i, 0]
        dy = r[i + 1, 1] - r[i, 1]
        dz = r[i + 1, 2] - r[i, 2]
        l = math.sqrt(dx * dx + dy * dy + dz * dz)
        ux, uy, uz = dx / l, dy / l, dz / l
        dvx = v[i + 1, 0] - v[i, 0]
        dvy = v[i + 1, 1] - v[i, 1]
        dvz = v[i + 1, 2] - v[i, 2]
        ldot = dvx * ux + dvy * uy + dvz * uz
        T = EA * (l / L0 - 1.0) + beta * EA * ldot / L0
        if T < 0.0:
            T = 0.0
        tens[i] = T
        F[i, 0] += T * ux
        F[i, 1] += T * uy
        F[i, 2] += T * uz
        F[i + 1, 0] -= T * ux
        F[i + 1, 1] -= T * uy
        F[i + 1, 2] -= T * uz
        # Morison drag on the segment, shared by its two nodes
        sx = 0.5 * (v[i, 0] + v[i + 1, 0])
        sy = 0.5 * (v[i, 1] + v[i + 1, 1])
        sz = 0.5 * (v[i, 2] + v[i + 1, 2])
        vt = sx * ux + sy * uy + sz * uz
        nx, ny, nz = sx - vt * ux, sy - vt * uy, sz - vt * uz
        vn = math.sqrt(nx * nx + ny * ny + nz * nz)
        cn = 0.5 * rho * cdn * d * l * vn
        ct = 0.5 * rho * cdt * math.pi * d * l * abs(vt)
        fx = -cn * nx - ct * vt * ux
        fy = -cn * ny - ct * vt * uy
        fz = -cn * nz - ct * vt * uz
        F[i, 0] += 0.5 * fx
        F[i, 1] += 0.5 * fy
        F[i, 2] += 0.5 * fz
        F[i + 1, 0] += 0.5 * fx
        F[i + 1, 1] += 0.5 * fy
        F[i + 1, 2] += 0.5 * fz
    for i in range(n):
        F[i, 2] -= w_node[i]
        pen = seabed_z - r[i, 2]
        if pen > 0.0:
            k = k_sb * L_node[i]
            c = 2.0 * math.sqrt(k * m_node[i])
            fz = k * pen - c * v[i, 2]
            if fz > 0.0:
                F[i, 2] += fz
    return F


@njit(cache=True)
def _advance(r, v, nsub, h, f0, f1, vf, L0, EA, beta, d, rho, cdn, cdt, w_node, m_node, seabed_z, k_sb,
             L_node, tens):
    n = r.shape[0]
    for k in range(nsub):
        F = _line_forces(r, v, L0, EA, beta, d, rho, cdn, cdt, w_node, m_node, seabed_z, k_sb, L_node, tens)
        for i in range(1, n - 1):
            for j in range(3):
                v[i, j] += h * F[i, j] / m_node[i]
                r[i, j] += h * v[i, j]
        a = (k + 1.0) / nsub
        for j in range(3):
            r[n - 1, j] = f0[j] + a * (f1[j] - f0[j])
            v[n - 1, j] = vf[j]
    return _line_forces(r, v, L0, EA, beta, d, rho, cdn, cdt, w_node, m_node, seabed_z, k_sb, L_node, tens)


@dataclass
class LineState:
    positions: np.ndarray      # (n+1, 3)
    velocities: np.ndarray
    tensions: np.ndarray       # (n,)

    def copy(self):
        return LineState(self.positions.copy(), self.velocities.copy(), self.tensions.copy())


class LumpedMassLine:
    """One line; node 0 is the anchor, the last node is the fairlead."""

    def __init__(self, props: LineProps, anchor, seabed_depth=None, rho=RHO, g=G):
        self.props = props
        self.anchor = np.asarray(anchor, float)
        self.seabed_depth = -self.anchor[2] if seabed_depth is None else seabed_depth
        self.rho, self.g = rho, g
        n = props.n_segments
        self.L0 = props.segment_length
        self.L_node = np.full(n + 1, self.L0)
        self.L_node[0] = self.L_node[-1] = 0.5 * self.L0
        a_cross = math.pi * props.diameter ** 2 / 4
        self.m_node = (props.mass_per_length + props.can * rho * a_cross) * self.L_node
        self.w_node = props.weight(g) * self.L_node
        c_eff = math.sqrt(props.ea / (props.mass_per_length + props.can * rho * a_cross))
        self.beta = props.damping_fraction * self.L0 / c_eff
        omega_sb = math.sqrt(props.seabed_stiffness / (props.mass_per_length + props.can * rho * a_cross))
        # explicit stability: axial waves and the critically damped seabed spring
        self.max_substep = min(0.5 * props.cfl_limit(), 0.4 / omega_sb)
        self.state: LineState | None = None

    # -- force evaluation ------------------------------------------------
    def _args(self):
        p = self.props
        return (self.L0, p.ea, self.beta, p.diameter, self.rho, p.cdn, p.cdt, self.w_node, self.m_node,
                -self.seabed_depth, p.seabed_stiffness, self.L_node)

    def forces(self, r, v=None):
        v = np.zeros_like(r) if v is None else v
        tens = np.zeros(len(r) - 1)
        F = _line_forces(r, v, *self._args(), tens)
        return F, tens

    def fairlead_force(self, state: LineState | None = None):
        """Force of the line on the body at the fairlead: top tension plus the fairlead node's weight."""
        st = self.state if state is None else state
        r = st.positions
        u = r[-2] - r[-1]
        u = u / np.linalg.norm(u)
        return st.tensions[-1] * u + np.array([0.0, 0.0, -self.w_node[-1]])

    # -- initialisation ---------------------------------------------------
    def init_from_catenary(self, fairlead):
        cat = catenary_solve(self.props, fairlead, self.anchor, self.seabed_depth, self.g)
        s = self.L0 * np.arange(self.props.n_segments + 1)
        r = cat.shape(s)
        r[0] = self.anchor
        r[-1] = np.asarray(fairlead, float)
        v = np.zeros_like(r)
        _, tens = self.forces(r)
        self.state = LineState(r, v, tens)
        return cat

    def static_solve(self, fairlead, tol=1e-7, max_iter=100):
        """Newton solve of the discrete line's static equilibrium for a fixed fairlead.

        Starts from the current line state; if that fails (large fairlead jumps
        overstrain the top segment) it restarts from the catenary shape.
        """
        if self.state is not None:
            try:
                return self._newton(fairlead, tol, max_iter)
            except MooringError:
                pass
        self.init_from_catenary(fairlead)
        return self._newton(fairlead, tol, max_iter)

    def _newton(self, fairlead, tol, max_iter):
        r = self.state.positions.copy()
        r[-1] = np.asarray(fairlead, float)
        n = len(r)
        m = n - 2
        scale = self.props.weight(self.g) * self.props.unstretched_length
        EA, L0 = self.props.ea, self.L0
        kb = self.props.seabed_stiffness * self.L_node
        zb = -self.seabed_depth
        for it in range(max_iter):
            F, tens = self.forces(r)
            res = F[1:-1].ravel()
            err = np.abs(res).max() / scale
            if err < tol:
                break
            Kmat = np.zeros((3 * m, 3 * m))
            for i in range(n - 1):
                dvec = r[i + 1] - r[i]
                l = np.linalg.norm(dvec)
                u = dvec / l
                uu = np.outer(u, u)
                T = tens[i]
                if T > 0:
                    k = EA / L0 * uu + T / l * (np.eye(3) - uu)
                else:
                    k = 1e-6 * EA / L0 * np.eye(3)
                a, b = i - 1, i     # internal indices of nodes i and i+1
                for p, q, sgn in ((a, a, 1), (b, b, 1), (a, b, -1), (b, a, -1)):
                    if 0 <= p < m and 0 <= q < m:
                        Kmat[3 * p:3 * p + 3, 3 * q:3 * q + 3] += sgn * k
            for j in range(m):
                if r[j + 1, 2] < zb:
                    Kmat[3 * j + 2, 3 * j + 2] += kb[j + 1]
            dx = np.linalg.solve(Kmat, res)
            step = 1.0
            base = np.abs(res).max()
            for _ in range(30):
                trial = r.copy()
                trial[1:-1] += step * dx.reshape(m, 3)
                Ft, _ = self.forces(trial)
                if np.abs(Ft[1:-1]).max() < base or step < 1e-4:
                    break
                step *= 0.5
            r = trial
        else:
            raise MooringError(f"lumped-mass static solve did not converge (residual {err:.3e})")
        _, tens = self.forces(r)
        self.state = LineState(r, np.zeros_like(r), tens)
        return self.state

    # -- dynamics -----------------------------------------------------------
    def substeps(self, dt):
        return max(1, int(math.ceil(dt / self.max_substep - 1e-12)))

    def step(self, fairlead_new, dt, fairlead_old=None, nsub=None):
        """Advance by ``dt`` while the fairlead moves linearly to ``fairlead_new``."""
        st = self.state
        f0 = st.positions[-1].copy() if fairlead_old is None else np.asarray(fairlead_old, float)
        f1 = np.asarray(fairlead_new, float)
        nsub = self.substeps(dt) if nsub is None else nsub
        h = dt / nsub
        if h > self.props.cfl_limit():
            raise ConfigError(f"line time step {h:.4g} s exceeds the segment-wave limit "
                              f"{self.props.cfl_limit():.4g} s")
        vf = (f1 - f0) / dt
        _advance(st.positions, st.velocities, nsub, h, f0, f1, vf, *self._args(), st.tensions)
        return st

    def energy(self):
        """Kinetic + elastic + gravitational energy of the internal nodes (for checks)."""
        st = self.state
        ke = 0.5 * np.sum(self.m_node[:, None] * st.velocities ** 2)
        l = np.linalg.norm(np.diff(st.positions, axis=0), axis=1)
        strain = np.clip(l / self.L0 - 1, 0, None)
        pe = 0.5 * self.props.ea * self.L0 * np.sum(strain ** 2)
        pg = np.sum(self.w_node * st.positions[:, 2])
        pen = np.clip(-self.seabed_depth - st.positions[:, 2], 0, None)
        ps = 0.5 * np.sum(self.props.seabed_stiffness * self.L_node * pen ** 2)
        return ke + pe + pg + ps


# ---------------------------------------------------------------------------
# system of lines

def rotation(pose):
    """Rotation matrix for roll, pitch, yaw (x-y-z convention, applied yaw * pitch * roll)."""
    rx, ry, rz = pose[3], pose[4], pose[5]
    cx, sx = math.cos(rx), math.sin(rx)
    cy, sy = math.cos(ry), math.sin(ry)
    cz, sz = math.cos(rz), math.sin(rz)
    Rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
    Ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    Rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
    return Rz @ Ry @ Rx


def fairlead_positions(layout: MooringLayout, pose):
    pose = np.asarray(pose, float)
    return pose[:3][None, :] + layout.fairleads_body() @ rotation(pose).T


def system_mooring_load(layout: MooringLayout, line_forces, pose, active=None):
    """6-vector force and moment about the platform reference point from fairlead forces."""
    fl = fairlead_positions(layout, pose)
    ref = np.asarray(pose, float)[:3]
    out = np.zeros(6)
    for i, f in enumerate(line_forces):
        if active is not None and not active[i]:
            continue
        r = fl[i] - ref
        out[0] += f[0]
        out[1] += f[1]
        out[2] += f[2]
        out[3] += r[1] * f[2] - r[2] * f[1]
        out[4] += r[2] * f[0] - r[0] * f[2]
        out[5] += r[0] * f[1] - r[1] * f[0]
    return out


class MooringSystem:
    """All lines of one platform, either lumped-mass dynamic or quasi-static catenary."""

    def __init__(self, layout: MooringLayout, model="lumped", rho=RHO, g=G, active=None):
        if model not in ("lumped", "quasistatic"):
            raise ConfigError(f"unknown mooring model {model!r}")
        self.layout, self.model, self.g = layout, model, g
        self.active = np.ones(layout.n_lines, bool) if active is None else np.asarray(active, bool)
        self.lines = [LumpedMassLine(layout.props, a, rho=rho, g=g) for a in layout.anchors()]
        self._forces = None

    def initialise(self, pose, tol=1e-7):
        fl = fairlead_positions(self.layout, pose)
        if self.model == "lumped":
            for line, f in zip(self.lines, fl):
                line.init_from_catenary(f)
                line.static_solve(f, tol=tol)
        self._forces = self._line_forces(pose)
        return self.load(pose)

    def _line_forces(self, pose):
        if self.model == "lumped":
            return [line.fairlead_force() for line in self.lines]
        fl = fairlead_positions(self.layout, pose)
        return [catenary_solve(self.layout.props, f, a, g=self.g).fairlead_force
                for f, a in zip(fl, self.layout.anchors())]

    def static_load(self, pose, tol=1e-7):
        """Static mooring load at ``pose`` (line states re-solved, not advanced in time)."""
        if self.model == "lumped":
            fl = fairlead_positions(self.layout, pose)
            forces = []
            for line, f in zip(self.lines, fl):
                line.static_solve(f, tol=tol)
                forces.append(line.fairlead_force())
            self._forces = forces
        else:
            self._forces = self._line_forces(pose)
        return self.load(pose)

    def load(self, pose):
        return system_mooring_load(self.layout, self._forces, pose, self.active)

    def advance(self, pose_old, pose_new, dt):
        if self.model == "lumped":
            f0 = fairlead_positions(self.layout, pose_old)
            f1 = fairlead_positions(self.layout, pose_new)
            for line, a, b in zip(self.lines, f0, f1):
                line.step(b, dt, a)
        self._forces = self._line_forces(pose_new)

    def tensions(self):
        return np.array([np.linalg.norm(f) for f in self._forces])

    def substeps(self, dt):
        return max(line.substeps(dt) for line in self.lines)

    def snapshot(self):
        return [None if ln.state is None else ln.state.copy() for ln in self.lines], list(self._forces)

    def restore(self, snap):
        states, forces = snap
        for ln, st in zip(self.lines, states):
            ln.state = None if st is None else st.copy()
        self._forces = list(forces)
