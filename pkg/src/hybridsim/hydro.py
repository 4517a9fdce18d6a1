"""Linear potential-flow body data and the hydrodynamic force terms.

Coefficient files are JSON with keys ``rho, g, freqs, added_mass, damping,
a_inf, hydrostatic, excitation, cog, volume`` in SI units. ``excitation``
maps a DOF (name or index) to a list of ``{"w", "mag", "phase"}`` entries.
Optional ``freq_units`` ("rad/s" | "Hz") and ``phase_units`` ("rad" | "deg")
keys are normalised away on load.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DOF_NAMES = ("surge", "sway", "heave", "roll", "pitch", "yaw")


class HydroError(ValueError):
    pass


class ValidationError(HydroError):
    pass


class WindowError(HydroError):
    pass


class QuadratureError(HydroError):
    pass


class SamplingError(HydroError):
    pass


def dof_index(dof) -> int:
    if isinstance(dof, str):
        if dof.isdigit():
            return int(dof)
        return DOF_NAMES.index(dof.lower())
    return int(dof)


@dataclass
class HydroCoefficients:
    freqs: np.ndarray
    added_mass: np.ndarray          # (nw, 6, 6)
    damping: np.ndarray             # (nw, 6, 6)
    a_inf: np.ndarray               # (6, 6)
    hydrostatic: np.ndarray         # (6, 6)
    excitation: dict = field(default_factory=dict)   # dof -> (w, mag, phase)
    cog: np.ndarray = field(default_factory=lambda: np.zeros(3))
    volume: float = 0.0
    rho: float = 1025.0
    g: float = 9.81
    name: str = ""
    notes: str = ""

    def excitation_table(self, dof):
        entry = self.excitation.get(dof_index(dof))
        if entry is None:
            z = np.zeros(0)
            return z, z, z
        return entry

    def validate(self, rtol=1e-8, a_inf_tol=0.15):
        w = self.freqs
        nw = len(w)
        if w.ndim != 1 or nw < 2:
            raise ValidationError("freqs: need a 1-D table of at least two frequencies")
        if np.any(np.diff(w) <= 0):
            raise ValidationError("freqs: frequencies must be strictly increasing")
        for name in ("added_mass", "damping"):
            arr = getattr(self, name)
            if arr.shape != (nw, 6, 6):
                raise ValidationError(f"{name}: expected shape {(nw, 6, 6)}, got {arr.shape}")
        for name in ("a_inf", "hydrostatic"):
            if getattr(self, name).shape != (6, 6):
                raise ValidationError(f"{name}: expected shape (6, 6), got {getattr(self, name).shape}")
        if self.cog.shape != (3,):
            raise ValidationError("cog: expected 3 components")
        c = self.hydrostatic
        if not np.allclose(c, c.T, rtol=rtol, atol=rtol * max(1.0, np.abs(c).max())):
            raise ValidationError("hydrostatic: matrix is not symmetric")
        b = self.damping
        scale = max(1.0, float(np.abs(b).max()))
        if not np.allclose(b, np.transpose(b, (0, 2, 1)), rtol=1e-6, atol=1e-6 * scale):
            raise ValidationError("damping: matrices are not symmetric")
        bs = 0.5 * (b + np.transpose(b, (0, 2, 1)))
        eig_min = np.linalg.eigvalsh(bs).min(axis=1)
        if np.any(eig_min < -1e-6 * scale):
            k = int(np.argmin(eig_min))
            raise ValidationError(f"damping: not positive semidefinite at w={w[k]:.4g} rad/s")
        diag_hi = np.diag(self.added_mass[-1])
        diag_inf = np.diag(self.a_inf)
        ref = np.maximum(np.abs(diag_inf), np.abs(np.diagonal(self.added_mass, axis1=1, axis2=2)).max(axis=0))
        bad = np.abs(diag_hi - diag_inf) > a_inf_tol * np.maximum(ref, 1e-12) + 1e-9
        if np.any(bad):
            d = int(np.argmax(bad))
            raise ValidationError(f"a_inf: A({DOF_NAMES[d]}) at the highest frequency departs from A_inf")
        for d, (ew, mag, ph) in self.excitation.items():
            if not 0 <= d < 6:
                raise ValidationError(f"excitation: unknown dof {d}")
            if len(ew) and np.any(np.diff(ew) <= 0):
                raise ValidationError(f"excitation: frequencies for dof {d} must be strictly increasing")
            if np.any(mag < 0):
                raise ValidationError(f"excitation: negative magnitude for dof {d}")
        return self

    # -- serialisation -------------------------------------------------
    def to_dict(self):
        exc = {}
        for d, (ew, mag, ph) in sorted(self.excitation.items()):
            exc[DOF_NAMES[d]] = [{"w": float(a), "mag": float(b), "phase": float(c)} for a, b, c in zip(ew, mag, ph)]
        out = {
            "rho": self.rho,
            "g": self.g,
            "freqs": self.freqs.tolist(),
            "added_mass": self.added_mass.tolist(),
            "damping": self.damping.tolist(),
            "a_inf": self.a_inf.tolist(),
            "hydrostatic": self.hydrostatic.tolist(),
            "excitation": exc,
            "cog": self.cog.tolist(),
            "volume": self.volume,
        }
        if self.name:
            out["name"] = self.name
        if self.notes:
            out["notes"] = self.notes
        return out

    @classmethod
    def from_dict(cls, d):
        try:
            freqs = np.asarray(d["freqs"], dtype=float)
            units = d.get("freq_units", "rad/s")
            fscale = 2 * np.pi if units.lower() in ("hz", "1/s") else 1.0
            pscale = np.pi / 180 if d.get("phase_units", "rad").lower().startswith("deg") else 1.0
            exc = {}
            for key, rows in d.get("excitation", {}).items():
                rows = sorted(rows, key=lambda r: r["w"])
                exc[dof_index(key)] = (
                    np.array([r["w"] for r in rows], dtype=float) * fscale,
                    np.array([r["mag"] for r in rows], dtype=float),
                    np.array([r["phase"] for r in rows], dtype=float) * pscale,
                )
            coeffs = cls(
                freqs=freqs * fscale,
                added_mass=np.asarray(d["added_mass"], dtype=float),
                damping=np.asarray(d["damping"], dtype=float),
                a_inf=np.asarray(d["a_inf"], dtype=float),
                hydrostatic=np.asarray(d["hydrostatic"], dtype=float),
                excitation=exc,
                cog=np.asarray(d.get("cog", [0, 0, 0]), dtype=float),
                volume=float(d.get("volume", 0.0)),
                rho=float(d.get("rho", 1025.0)),
                g=float(d.get("g", 9.81)),
                name=d.get("name", ""),
                notes=d.get("notes", ""),
            )
        except KeyError as exc_:
            raise ValidationError(f"missing key {exc_.args[0]!r}") from None
        except ValueError as exc_:
            # ragged nested lists end up here
            raise ValidationError(f"dimension mismatch: {exc_}") from None
        return coeffs.validate()

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict()))

    def scaled(self, c):
        """Every force coefficient multiplied by ``c`` (for linearity checks)."""
        exc = {d: (w, m * c, p) for d, (w, m, p) in self.excitation.items()}
        return HydroCoefficients(self.freqs.copy(), self.added_mass * c, self.damping * c, self.a_inf * c,
                                 self.hydrostatic * c, exc, self.cog.copy(), self.volume, self.rho, self.g,
                                 self.name, self.notes)


def load_coefficients(path) -> HydroCoefficients:
    with open(path) as fh:
        return HydroCoefficients.from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# radiation memory

@dataclass
class RadiationIrf:
    dt: float
    kernel: np.ndarray      # (nt, 6, 6), kernel[k] = K(k dt)
    t_max: float

    @property
    def times(self):
        return self.dt * np.arange(len(self.kernel))

    @property
    def weights(self):
        """Trapezoidal weights for the convolution over [0, t_max]."""
        w = np.full(len(self.kernel), self.dt)
        w[0] = w[-1] = 0.5 * self.dt
        return w


def _cosine_weights(w, t):
    """W[k, i] with sum_i W[k, i] f_i = integral of the piecewise-linear f times cos(w t_k)."""
    w = np.asarray(w, float)
    t = np.asarray(t, float)
    h = np.diff(w)
    W = np.zeros((len(t), len(w)))
    small = t * h.max() < 1e-4
    # trapezoid where the integrand is not oscillating over a panel
    if np.any(small):
        ts = t[small]
        c = np.cos(np.outer(ts, w))
        tw = np.zeros(len(w))
        tw[:-1] += h / 2
        tw[1:] += h / 2
        W[small] = c * tw
    big = ~small
    if np.any(big):
        tb = t[big][:, None]
        S = np.sin(tb * w)
        C = np.cos(tb * w)
        D = (C[:, 1:] - C[:, :-1]) / (h * tb ** 2)
        Wb = np.zeros((len(tb), len(w)))
        Wb[:, :-1] -= D
        Wb[:, 1:] += D
        Wb[:, 0] -= S[:, 0] / tb[:, 0]
        Wb[:, -1] += S[:, -1] / tb[:, 0]
        W[big] = Wb
    return W


def cosine_transform(freqs, damping, times):
    """(2/pi) * integral B(w) cos(w t) dw with B piecewise linear on the table, zero outside."""
    W = _cosine_weights(freqs, times)
    return (2.0 / np.pi) * np.einsum("tw,wij->tij", W, damping)


def radiation_irf(coeffs: HydroCoefficients, dt: float = 0.05, t_max: float = 60.0, damping=None,
                  check: bool = True, tail_tol: float = 0.01, conv_tol: float = 0.01) -> RadiationIrf:
    """Radiation impulse-response kernel K(t) = (2/pi) int B(w) cos(w t) dw.

    ``damping`` overrides ``coeffs.damping`` (used when a constant part has
    been split off as instantaneous damping).
    """
    B = coeffs.damping if damping is None else np.asarray(damping, float)
    n = int(round(t_max / dt)) + 1
    t = dt * np.arange(n)
    K = cosine_transform(coeffs.freqs, B, t)
    peak = float(np.abs(K).max())
    if check and peak > 0:
        if len(coeffs.freqs) >= 5:
            idx = np.unique(np.r_[np.arange(0, len(coeffs.freqs), 2), len(coeffs.freqs) - 1])
            K2 = cosine_transform(coeffs.freqs[idx], B[idx], t)
            err = float(np.abs(K2 - K).max())
            if err > conv_tol * peak:
                raise QuadratureError(
                    f"damping table too coarse: halving the frequency step changes K by {err / peak:.2%} of peak")
        tail = t >= 0.95 * t[-1]
        tail_mag = float(np.abs(K[tail]).max())
        if tail_mag > tail_tol * peak:
            raise WindowError(f"kernel not decayed at t_max={t_max} s ({tail_mag / peak:.2%} of peak); "
                              "use a larger t_max")
    return RadiationIrf(dt, K, float(t[-1]))


def radiation_force(velocity_history, irf: RadiationIrf, dt: float | None = None) -> np.ndarray:
    """-int_0^t_max K(tau) v(t - tau) dtau; the last history row is the current velocity."""
    if dt is not None and not np.isclose(dt, irf.dt, rtol=1e-9):
        raise SamplingError(f"history sampled at {dt} s but kernel at {irf.dt} s")
    v = np.asarray(velocity_history, float)
    n = len(irf.kernel)
    if len(v) >= n:
        recent = v[-n:][::-1]
    else:
        recent = np.zeros((n, 6))
        recent[:len(v)] = v[::-1]
    return -np.einsum("k,kij,kj->i", irf.weights, irf.kernel, recent)


def hydrostatic_force(displacement, coeffs: HydroCoefficients) -> np.ndarray:
    return -coeffs.hydrostatic @ np.asarray(displacement, float)


@dataclass
class DragModel:
    """Per-DOF quadratic drag coefficients (1/2 rho Cd A lumped)."""

    coefficients: np.ndarray = field(default_factory=lambda: np.zeros(6))

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, float).reshape(6)
        if np.any(self.coefficients < 0):
            raise ValueError("drag coefficients must be >= 0")

    def __add__(self, other: "DragModel") -> "DragModel":
        return DragModel(self.coefficients + other.coefficients)

    @classmethod
    def from_cd(cls, rho, cd_area):
        return cls(0.5 * rho * np.asarray(cd_area, float))


def viscous_drag(velocity, fluid_velocity, drag: DragModel) -> np.ndarray:
    v_rel = np.asarray(velocity, float) - np.asarray(fluid_velocity, float)
    return -drag.coefficients * np.abs(v_rel) * v_rel
