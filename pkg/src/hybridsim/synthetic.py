"""Synthetic (non-physical) linear hydrodynamic coefficients for simple hulls.

The shipped coefficient files are generated here from bodies built out of
stacked vertical cylinders. They are *plausible*, not BEM results:

* surge/sway excitation from MacCamy-Fuchs strip theory (deep water),
* heave excitation from Froude-Krylov pressure on horizontal faces with a
  2 J1(kR)/(kR) diffraction factor,
* radiation damping from the Haskind relation integrated over headings,
  which keeps every B(w) symmetric positive semidefinite,
* frequency-dependent added mass from the Kramers-Kronig relation, so A(w)
  and B(w) are causally consistent with the chosen A_inf.

Hydrodynamic interaction between separate bodies is ignored.
Run ``python -m hybridsim.synthetic`` to regenerate the shipped files.
"""
from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import special

from .hydro import HydroCoefficients, cosine_transform

RHO = 1025.0
G = 9.81
DATA_DIR = Path(__file__).parent / "data" / "coefficients"


@dataclass
class Segment:
    """Vertical (annular) cylinder from ``z_bot`` to ``z_top`` centred at (x, y)."""

    r_out: float
    z_top: float
    z_bot: float
    x: float = 0.0
    y: float = 0.0
    r_in: float = 0.0
    plate: bool = False    # thin disk: both faces exposed, extra rotational added mass

    @property
    def area(self):
        return np.pi * (self.r_out ** 2 - self.r_in ** 2)

    @property
    def wet_top(self):
        return min(self.z_top, 0.0)

    @property
    def wet_length(self):
        return max(self.wet_top - self.z_bot, 0.0)

    @property
    def pierces(self):
        return self.z_top >= 0.0 > self.z_bot


def _gen(f, r):
    """Generalised 6-vector of a force ``f`` applied at point ``r``."""
    return np.concatenate([f, np.cross(r, f)])


def _point_map(r):
    """P with u_point = P @ [v, omega] for small rigid-body motion."""
    x, y, z = r
    return np.array([[1, 0, 0, 0, z, -y],
                     [0, 1, 0, -z, 0, x],
                     [0, 0, 1, y, -x, 0]], dtype=float)


def hydrostatics(segments, rho=RHO, g=G):
    """Buoyancy-only restoring matrix about the origin (gravity is added by the assembly)."""
    vol = sum(s.area * s.wet_length for s in segments)
    if vol <= 0:
        raise ValueError("body has no submerged volume")
    cob = np.zeros(3)
    for s in segments:
        v = s.area * s.wet_length
        cob += v * np.array([s.x, s.y, 0.5 * (s.wet_top + s.z_bot)])
    cob /= vol
    C = np.zeros((6, 6))
    awp = ixx = iyy = ixy = sx = sy = 0.0
    for s in segments:
        if not s.pierces:
            continue
        a = s.area
        own = np.pi * (s.r_out ** 4 - s.r_in ** 4) / 4
        awp += a
        sx += a * s.x
        sy += a * s.y
        ixx += own + a * s.y ** 2
        iyy += own + a * s.x ** 2
        ixy += a * s.x * s.y
    C[2, 2] = rho * g * awp
    C[2, 3] = C[3, 2] = rho * g * sy
    C[2, 4] = C[4, 2] = -rho * g * sx
    C[3, 3] = rho * g * (ixx + vol * cob[2])
    C[4, 4] = rho * g * (iyy + vol * cob[2])
    C[3, 4] = C[4, 3] = -rho * g * ixy
    return C, vol, cob


def _stack_faces(segments):
    """Exposed submerged horizontal faces as (x, y, z, r0, r1, sign).

    ``sign`` is +1 for a downward-facing face (pressure pushes the body up)
    and -1 for an upward-facing one.
    """
    faces = []
    cols = {}
    for s in segments:
        cols.setdefault((s.x, s.y), []).append(s)
    for (x, y), segs in cols.items():
        segs = sorted(segs, key=lambda s: -s.z_top)
        if segs[0].z_top < 0:
            faces.append((x, y, segs[0].z_top, segs[0].r_in, segs[0].r_out, -1))
        for s, below in zip(segs[:-1], segs[1:]):
            if np.isclose(below.z_top, s.z_bot):
                if below.r_out > s.r_out:
                    faces.append((x, y, s.z_bot, s.r_out, below.r_out, -1))
                elif below.r_out < s.r_out:
                    faces.append((x, y, s.z_bot, below.r_out, s.r_out, +1))
            else:
                faces.append((x, y, s.z_bot, s.r_in, s.r_out, +1))
                faces.append((x, y, below.z_top, below.r_in, below.r_out, -1))
        faces.append((x, y, segs[-1].z_bot, segs[-1].r_in, segs[-1].r_out, +1))
    return [f for f in faces if f[2] < 0]


def added_mass_inf(segments, rho=RHO, nz=24):
    """High-frequency added mass: strip theory sideways, disk formulas on horizontal faces."""
    A = np.zeros((6, 6))
    xg, wg = np.polynomial.legendre.leggauss(nz)
    for s in segments:
        L = s.wet_length
        if L <= 0:
            continue
        zc = 0.5 * (s.wet_top + s.z_bot)
        ma = rho * np.pi * s.r_out ** 2
        for xi, wi in zip(xg, wg):
            z = zc + 0.5 * L * xi
            P = _point_map((s.x, s.y, z))
            A += 0.5 * L * wi * ma * P.T @ np.diag([1.0, 1.0, 0.0]) @ P
    for x, y, z, r0, r1, _ in _stack_faces(segments):
        # one-sided disk; the two faces of a thin plate add up to 8/3 rho R^3
        ma = 4.0 / 3.0 * rho * (r1 ** 3 - r0 ** 3)
        P = _point_map((x, y, z))
        A += ma * P.T @ np.diag([0.0, 0.0, 1.0]) @ P
    for s in segments:
        if s.plate:
            rot = 16.0 / 45.0 * rho * s.r_out ** 5
            A[3, 3] += rot
            A[4, 4] += rot
    return 0.5 * (A + A.T)


def excitation(segments, w, heading=0.0, rho=RHO, g=G, nz=24):
    """Complex excitation per unit wave amplitude, shape (len(w), 6)."""
    w = np.asarray(w, float)
    k = w ** 2 / g
    c, s_ = np.cos(heading), np.sin(heading)
    X = np.zeros((len(w), 6), dtype=complex)
    xg, wg = np.polynomial.legendre.leggauss(nz)
    for seg in segments:
        L = seg.wet_length
        if L <= 0:
            continue
        shift = np.exp(-1j * k * (seg.x * c + seg.y * s_))
        kr = k * seg.r_out
        jp, yp = special.jvp(1, kr), special.yvp(1, kr)
        per_len = 4 * rho * g / (k * np.hypot(jp, yp))
        delta = np.arctan2(jp, yp)
        zc = 0.5 * (seg.wet_top + seg.z_bot)
        for xi, wi in zip(xg, wg):
            z = zc + 0.5 * L * xi
            amp = 0.5 * L * wi * per_len * np.exp(k * z) * np.exp(1j * (np.pi / 2 - delta)) * shift
            X += np.outer(amp, _gen(np.array([c, s_, 0.0]), np.array([seg.x, seg.y, z])))
    for x, y, z, r0, r1, sign in _stack_faces(segments):
        kr = k * r1
        diff = np.where(kr > 1e-8, 2 * special.j1(kr) / np.where(kr > 1e-8, kr, 1.0), 1.0)
        fz = sign * rho * g * np.pi * (r1 ** 2 - r0 ** 2) * np.exp(k * z) * diff * np.exp(-1j * k * (x * c + y * s_))
        X += np.outer(fz, _gen(np.array([0.0, 0.0, 1.0]), np.array([x, y, z])))
    return X


def haskind_damping(segments, w, n_headings=36, rho=RHO, g=G):
    """B_ij(w) = w^3 / (4 pi rho g^3) * integral Re(X_i X_j^*) d(theta), deep water."""
    w = np.asarray(w, float)
    B = np.zeros((len(w), 6, 6))
    dth = 2 * np.pi / n_headings
    for th in dth * np.arange(n_headings):
        X = excitation(segments, w, th, rho, g)
        B += np.real(X[:, :, None] * np.conj(X[:, None, :])) * dth
    B *= (w ** 3 / (4 * np.pi * rho * g ** 3))[:, None, None]
    return 0.5 * (B + np.transpose(B, (0, 2, 1)))


def kramers_kronig_added_mass(w, B, a_inf, t_max=300.0, dt=0.02):
    """A(w) = A_inf - (1/w) int_0^inf K(t) sin(w t) dt with K from B."""
    t = dt * np.arange(int(round(t_max / dt)) + 1)
    K = cosine_transform(w, B, t)
    wt = np.full(len(t), dt)
    wt[0] = wt[-1] = dt / 2
    S = np.sin(np.outer(w, t)) * wt
    dA = -np.einsum("wt,tij->wij", S, K) / w[:, None, None]
    return a_inf[None] + dA


@dataclass
class BodySpec:
    name: str
    segments: list
    notes: str = ""
    heave_period: float | None = None   # calibrate A_inf(heave) to this natural period
    mass: float | None = None           # used only with heave_period
    dw: float = 0.04                    # table step; multi-column hulls need a finer one


def build(spec: BodySpec, w=None, rho=RHO, g=G) -> HydroCoefficients:
    if w is None:
        w = default_freqs(spec.dw)
    C, vol, cob = hydrostatics(spec.segments, rho, g)
    a_inf = added_mass_inf(spec.segments, rho)
    B = haskind_damping(spec.segments, w, rho=rho, g=g)
    A = kramers_kronig_added_mass(w, B, a_inf)
    if spec.heave_period is not None:
        wn = 2 * np.pi / spec.heave_period
        target = C[2, 2] / wn ** 2 - spec.mass
        shift = target - np.interp(wn, w, A[:, 2, 2])
        a_inf = a_inf.copy()
        a_inf[2, 2] += shift
        A = A.copy()
        A[:, 2, 2] += shift
    X = excitation(spec.segments, w, 0.0, rho, g)
    exc = {}
    for d in range(6):
        if np.abs(X[:, d]).max() > 1e-6 * max(1.0, np.abs(X).max()):
            exc[d] = (w.copy(), np.abs(X[:, d]), np.unwrap(np.angle(X[:, d])))
    coeffs = HydroCoefficients(freqs=w, added_mass=A, damping=B, a_inf=a_inf, hydrostatic=C, excitation=exc,
                               cog=np.zeros(3), volume=vol, rho=rho, g=g, name=spec.name,
                               notes="SYNTHETIC, NON-PHYSICAL: " + spec.notes)
    return coeffs


def default_freqs(dw=0.04, w_max=12.0):
    return dw * np.arange(1, int(round(w_max / dw)) + 1)


def _round(c: HydroCoefficients, sig=8):
    """Round to ``sig`` significant digits, keeping symmetric blocks exactly symmetric."""
    def r(a):
        a = np.asarray(a, float)
        return np.array([float(f"{v:.{sig}g}") for v in a.ravel()]).reshape(a.shape)

    def sym(a):
        a = r(a)
        if a.ndim == 2:
            return np.triu(a) + np.triu(a, 1).T
        return np.triu(a) + np.transpose(np.triu(a, 1), (0, 2, 1))

    exc = {d: (r(ww), r(m), r(p)) for d, (ww, m, p) in c.excitation.items()}
    return HydroCoefficients(c.freqs, sym(c.added_mass), sym(c.damping), sym(c.a_inf), sym(c.hydrostatic),
                             exc, c.cog, float(f"{c.volume:.{sig}g}"), c.rho, c.g, c.name, c.notes)


# ---------------------------------------------------------------------------
# shipped bodies

def _spar(top_r, bot_r, taper_top, taper_bot, draft, freeboard, plate_r=None, plate_t=0.5):
    segs = [Segment(top_r, freeboard, -taper_top),
            Segment(0.5 * (top_r + bot_r), -taper_top, -taper_bot),
            Segment(bot_r, -taper_bot, -draft)]
    if plate_r:
        segs.append(Segment(plate_r, -draft, -draft - plate_t, plate=True))
    return segs


def _semi(main_r, upper_r, base_r, spacing, main_top, upper_top, base_top, draft):
    rad = spacing / np.sqrt(3.0)
    segs = [Segment(main_r, main_top, -draft)]
    for az in (np.pi, np.pi / 3, -np.pi / 3):
        x, y = rad * np.cos(az), rad * np.sin(az)
        segs.append(Segment(upper_r, upper_top, -base_top, x, y))
        segs.append(Segment(base_r, -base_top, -draft, x, y))
    return segs


FLOATS = {
    # outer/inner diameter, draft, natural period, from the float table
    "float1": dict(r_out=11.0, r_in=3.25, draft=3.0, height=5.0, period=6.23),
    "float2": dict(r_out=15.0, r_in=5.0, draft=5.0, height=8.0, period=6.12),
}


def float_segments(r_out, r_in, draft, height):
    return [Segment(r_out, height - draft, -draft, r_in=r_in)]


def body_specs(rho=RHO):
    specs = []
    for name, f in FLOATS.items():
        segs = float_segments(f["r_out"], f["r_in"], f["draft"], f["height"])
        mass = rho * segs[0].area * f["draft"]
        specs.append(BodySpec(name, segs, f"annular float, A_inf(heave) calibrated to T_n={f['period']} s",
                              heave_period=f["period"], mass=mass))
    specs += [
        BodySpec("spar5", _spar(3.25, 4.7, 4.0, 12.0, 120.0, 10.0), "tapered spar for the 5 MW turbine"),
        BodySpec("spar5_rp", _spar(3.25, 4.7, 4.0, 12.0, 120.0, 10.0, plate_r=25.0),
                 "tapered spar with a 25 m radius reaction plate"),
        BodySpec("spar15", _spar(5.0, 9.0, 8.0, 18.0, 120.0, 15.0), "tapered spar for the 15 MW turbine"),
        BodySpec("spar15_rp", _spar(5.0, 9.0, 8.0, 18.0, 120.0, 15.0, plate_r=30.0),
                 "tapered spar with a 30 m radius reaction plate"),
        BodySpec("semi5", _semi(3.25, 6.0, 12.0, 50.0, 10.0, 12.0, 14.0, 20.0), "three-column semi-submersible", dw=0.02),
        BodySpec("semi15", _semi(5.0, 10.0, 20.0, 87.0, 15.0, 12.0, 14.0, 20.0),
                 "enlarged three-column semi-submersible", dw=0.02),
        BodySpec("rm3_spar", [Segment(3.0, 5.0, -34.0), Segment(15.0, -34.0, -35.0, plate=True)],
                 "point-absorber spar: 6 m column with 30 m reaction plate"),
    ]
    return specs


def generate(out_dir=DATA_DIR, names=None):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for spec in body_specs():
        if names and spec.name not in names:
            continue
        c = _round(build(spec)).validate()
        path = out_dir / f"{spec.name}.json"
        c.save(path)
        written.append(path)
    return written


def main(argv=None):
    ap = argparse.ArgumentParser(description="regenerate synthetic coefficient files")
    ap.add_argument("--out", default=str(DATA_DIR))
    ap.add_argument("names", nargs="*")
    args = ap.parse_args(argv)
    for p in generate(args.out, args.names):
        print(p)


if __name__ == "__main__":
    main()
