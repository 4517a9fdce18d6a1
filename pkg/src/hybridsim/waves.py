"""Sea states, wave spectra and linear wave / excitation synthesis."""
from __future__ import annotations

import enum
import io
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, signal

G = 9.81


class WaveError(ValueError):
    pass


class SamplingError(WaveError):
    pass


class ExtrapolationError(WaveError):
    pass


class Kind(str, enum.Enum):
    REGULAR = "regular"
    IRREGULAR = "irregular"


@dataclass(frozen=True)
class SeaState:
    """Regular: height H and period T. Irregular: Hm0 and Te."""

    kind: Kind
    height: float
    period: float
    gamma: float = 1.0
    seed: int = 0
    heading: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.height < 0:
            raise WaveError("wave height must be >= 0")
        if self.period <= 0:
            raise WaveError("wave period must be > 0")
        if self.gamma < 1:
            raise WaveError("peak enhancement factor must be >= 1")

    @classmethod
    def regular(cls, height, period, **kw):
        return cls(Kind.REGULAR, height, period, **kw)

    @classmethod
    def irregular(cls, hm0, te, gamma=1.0, seed=0, **kw):
        return cls(Kind.IRREGULAR, hm0, te, gamma=gamma, seed=seed, **kw)


@dataclass
class Spectrum:
    freqs: np.ndarray      # rad/s
    density: np.ndarray    # m^2 s / rad

    def moment(self, n):
        return float(integrate.trapezoid(self.density * self.freqs ** n, self.freqs))

    @property
    def hm0(self):
        return 4.0 * np.sqrt(self.moment(0))

    @property
    def te(self):
        return 2 * np.pi * self.moment(-1) / self.moment(0)

    def to_csv(self):
        buf = io.StringIO()
        buf.write("omega,S\n")
        for w, s in zip(self.freqs, self.density):
            buf.write(f"{w!r},{s!r}\n")
        return buf.getvalue()


def te_over_tp(gamma: float) -> float:
    """Energy-to-peak period ratio of a JONSWAP spectrum (0.8586 for gamma=1)."""
    return 0.8255 + 0.03852 * gamma - 0.005537 * gamma ** 2 + 0.0003154 * gamma ** 3


def _jonswap_shape(w, wp, gamma):
    """JONSWAP shape; for gamma=1 it is the Pierson-Moskowitz form with unit area."""
    w = np.asarray(w, dtype=float)
    out = np.zeros_like(w)
    pos = w > 0
    x = w[pos]
    s = 5.0 * wp ** 4 * x ** -5 * np.exp(-1.25 * (wp / x) ** 4)
    if gamma != 1.0:
        sigma = np.where(x <= wp, 0.07, 0.09)
        r = np.exp(-((x - wp) ** 2) / (2 * sigma ** 2 * wp ** 2))
        s = s * gamma ** r
    out[pos] = s
    return out


@lru_cache(maxsize=64)
def _jonswap_norm(gamma: float) -> float:
    # area of the shape; independent of wp
    if gamma == 1.0:
        return 1.0
    val, _ = integrate.quad(lambda x: _jonswap_shape(np.array([x]), 1.0, gamma)[0], 0.05, 20.0, limit=400,
                            points=[1.0])
    return val


def spectral_density(w, hm0, tp, gamma=1.0):
    """JONSWAP density S(w) [m^2 s/rad] normalised so that 4 sqrt(m0) = hm0."""
    wp = 2 * np.pi / tp
    return hm0 ** 2 / 16.0 * _jonswap_shape(w, wp, gamma) / _jonswap_norm(gamma)


def make_spectrum(sea_state: SeaState, n: int = 500, lo: float = 0.2, hi: float = 5.0) -> Spectrum:
    if sea_state.kind != Kind.IRREGULAR:
        raise WaveError("spectrum requested for a regular sea state")
    if sea_state.height <= 0:
        raise WaveError("degenerate spectrum: Hm0 must be > 0 for synthesis")
    tp = sea_state.period / te_over_tp(sea_state.gamma)
    wp = 2 * np.pi / tp
    dw = (hi - lo) * wp / n
    w = lo * wp + dw * (np.arange(n) + 0.5)
    return Spectrum(w, spectral_density(w, sea_state.height, tp, sea_state.gamma))


@dataclass
class WaveRealization:
    dt: float
    duration: float
    amplitudes: np.ndarray
    freqs: np.ndarray
    phases: np.ndarray

    @property
    def time(self):
        n = int(round(self.duration / self.dt)) + 1
        return self.dt * np.arange(n)

    @property
    def elevation(self):
        return self.eta(self.time)

    def eta(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        for a, w, p in zip(self.amplitudes, self.freqs, self.phases):
            out += a * np.cos(w * t + p)
        return out

    def scaled(self, c):
        return WaveRealization(self.dt, self.duration, self.amplitudes * c, self.freqs.copy(), self.phases.copy())

    def to_csv(self):
        buf = io.StringIO()
        buf.write("t,eta\n")
        for ti, e in zip(self.time, self.elevation):
            buf.write(f"{ti!r},{e!r}\n")
        return buf.getvalue()


def synthesize(sea_state: SeaState, duration: float, dt: float, n_components: int = 500) -> WaveRealization:
    if duration <= 0 or dt <= 0:
        raise WaveError("duration and dt must be positive")
    if sea_state.kind == Kind.REGULAR:
        amps = np.array([sea_state.height / 2])
        freqs = np.array([2 * np.pi / sea_state.period])
        phases = np.zeros(1)
    else:
        spec = make_spectrum(sea_state, n=n_components)
        dw = spec.freqs[1] - spec.freqs[0]
        amps = np.sqrt(2 * spec.density * dw)
        freqs = spec.freqs
        rng = np.random.default_rng(sea_state.seed)
        phases = rng.uniform(0.0, 2 * np.pi, size=len(freqs))
    shortest = 2 * np.pi / freqs.max()
    if shortest / dt < 8:
        raise SamplingError(f"dt={dt} gives fewer than 8 samples per {shortest:.3f} s component period")
    return WaveRealization(dt, duration, amps, freqs, phases)


def realized_moments(elevation, dt):
    """(Hm0, Te) estimated from a record's one-sided periodogram."""
    f, p = signal.periodogram(np.asarray(elevation), fs=1.0 / dt, window="hann", detrend="constant")
    f, p = f[1:], p[1:]
    df = f[1] - f[0]
    m0 = np.sum(p) * df
    m_1 = np.sum(p / f) * df
    return 4 * np.sqrt(m0), m_1 / m0


def _interp_strict(w, table_w, values, what):
    if np.any(w < table_w[0] - 1e-12) or np.any(w > table_w[-1] + 1e-12):
        raise ExtrapolationError(
            f"{what}: frequency range [{np.min(w):.4g}, {np.max(w):.4g}] rad/s outside table "
            f"[{table_w[0]:.4g}, {table_w[-1]:.4g}]")
    return np.interp(w, table_w, values)


def excitation_coefficients(coeffs, dof, freqs):
    """Interpolated (|X|, angle X) at ``freqs`` for one DOF; phase is unwrapped first."""
    tw, mag, ph = coeffs.excitation_table(dof)
    if len(tw) == 0:
        return np.zeros(len(freqs)), np.zeros(len(freqs))
    m = _interp_strict(freqs, tw, mag, f"excitation dof {dof}")
    p = _interp_strict(freqs, tw, np.unwrap(ph), f"excitation dof {dof}")
    return m, p


def excitation_force(realization: WaveRealization, coeffs, dof, t=None):
    """F(t) = sum a_i |X(w_i)| cos(w_i t + phi_i + angle X(w_i))."""
    mag, ph = excitation_coefficients(coeffs, dof, realization.freqs)
    t = realization.time if t is None else np.asarray(t, dtype=float)
    out = np.zeros(np.shape(t))
    for a, w, p, m, q in zip(realization.amplitudes, realization.freqs, realization.phases, mag, ph):
        if a == 0.0 or m == 0.0:
            continue
        out += a * m * np.cos(w * t + p + q)
    return out


def excitation_matrix(realization: WaveRealization, coeffs, t) -> np.ndarray:
    """All six DOFs at once, shape (len(t), 6). Evaluated in chunks over time."""
    t = np.asarray(t, dtype=float)
    amp = np.zeros((6, len(realization.freqs)))
    ph = np.zeros((6, len(realization.freqs)))
    for d in range(6):
        m, p = excitation_coefficients(coeffs, d, realization.freqs)
        amp[d] = realization.amplitudes * m
        ph[d] = realization.phases + p
    active = np.any(amp != 0, axis=0)
    w = realization.freqs[active]
    ca = amp[:, active] * np.cos(ph[:, active])
    sa = amp[:, active] * np.sin(ph[:, active])
    out = np.zeros((len(t), 6))
    if not active.any():
        return out
    chunk = max(1, 2_000_000 // max(1, len(w)))
    for s in range(0, len(t), chunk):
        wt = np.outer(t[s:s + chunk], w)
        # cos(wt + p) = cos(wt)cos(p) - sin(wt)sin(p)
        out[s:s + chunk] = np.cos(wt) @ ca.T - np.sin(wt) @ sa.T
    return out
