"""Classical saddle-point dynamics in mode space.

The matter field is expanded in circle modes c_m on a finite window and
the radiation mode is a single amplitude b:

    dc_m/dt = -i eps_m c_m + sqrt(eta) (b* c_{m+1} - b c_{m-1})
    db/dt   = i omega_eta b + 2 pi sqrt(eta) J,   J = sum_m c_m* c_{m+1}

with eps_m = m^2 / (2 eta) and neighbours outside the window set to zero.
The factor 2 pi makes |b|^2 / (2 pi) the field energy that balances the
electron work 2 sqrt(eta) Re(b* J).

Time stepping is RK4 in the interaction picture: the free phases
exp(-i eps_m t), exp(i omega_eta t) are applied exactly and only the
coupling is integrated numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .beam import BeamParameters, mode_energy
from .errors import ConfigurationError, FitError, NormDriftError, WindowLeakError

FIELD_COUPLING = 2.0 * math.pi


@dataclass(frozen=True)
class MeanFieldState:
    time: float
    coeffs: np.ndarray
    field: complex
    m_min: int

    @property
    def m_max(self) -> int:
        return self.m_min + len(self.coeffs) - 1

    @property
    def norm(self) -> float:
        c = self.coeffs
        return float(np.sum(c.real**2 + c.imag**2))

    @property
    def current(self) -> complex:
        return bunching(self.coeffs)


@dataclass(frozen=True)
class MeanFieldConfig:
    dt: float
    n_steps: int
    window: tuple
    seed_bunching: complex = 0j
    record_stride: int = 1
    norm_tolerance: float = 1e-6
    leak_tolerance: float = 1e-8

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigurationError("dt must be positive", key="meanfield.dt")
        if int(self.n_steps) < 1:
            raise ConfigurationError("n_steps must be >= 1", key="meanfield.n_steps")
        if int(self.record_stride) < 1:
            raise ConfigurationError("record_stride must be >= 1", key="meanfield.record_stride")
        lo, hi = self.window
        if not hi > lo:
            raise ConfigurationError("window must have m_min < m_max", key="meanfield.window")


@dataclass(frozen=True)
class MeanFieldSeries:
    t: np.ndarray
    b: np.ndarray
    current: np.ndarray
    norm: np.ndarray
    final: MeanFieldState

    @property
    def abs_b(self) -> np.ndarray:
        return np.abs(self.b)

    def to_rows(self):
        return [
            (float(t), float(b.real), float(b.imag), float(abs(b)), float(j.real), float(j.imag), float(n))
            for t, b, j, n in zip(self.t, self.b, self.current, self.norm)
        ]


SERIES_COLUMNS = ("t", "re_b", "im_b", "abs_b", "re_J", "im_J", "norm")


def bunching(c: np.ndarray) -> complex:
    return complex(np.sum(np.conj(c[:-1]) * c[1:]))


def cold_beam_state(m0: int, window, field: complex = 0j, seed_bunching: complex = 0j) -> MeanFieldState:
    """All electrons in mode m0; an optional coherence with m0 + 1 seeds J."""
    lo, hi = (int(v) for v in window)
    if not lo < m0 < hi:
        raise ConfigurationError(f"m0 = {m0} must lie strictly inside the window ({lo}, {hi})", key="meanfield.window")
    c = np.zeros(hi - lo + 1, dtype=complex)
    c[m0 - lo] = 1.0
    if seed_bunching:
        c[m0 + 1 - lo] = seed_bunching
        c /= math.sqrt(np.sum(np.abs(c) ** 2))
    return MeanFieldState(0.0, c, complex(field), lo)


def _coupling(c, b, root_eta, coupled=True):
    if not coupled:
        return np.zeros_like(c), 0j
    up = np.zeros_like(c)
    down = np.zeros_like(c)
    up[:-1] = c[1:]
    down[1:] = c[:-1]
    dc = root_eta * (np.conj(b) * up - b * down)
    db = FIELD_COUPLING * root_eta * bunching(c)
    return dc, db


def derivative(state: MeanFieldState, params: BeamParameters, coupled: bool = True):
    """(dc/dt, db/dt) at ``state``; ``coupled=False`` keeps only the free phases."""
    eps = mode_energy(np.arange(state.m_min, state.m_max + 1), params)
    dc, db = _coupling(state.coeffs, state.field, math.sqrt(params.eta), coupled)
    return -1j * eps * state.coeffs + dc, 1j * params.omega_eta * state.field + db


def energy_balance(state: MeanFieldState, params: BeamParameters):
    """(d/dt |b|^2 / 2 pi, 2 sqrt(eta) Re(b* J)); the two agree identically."""
    _, db = derivative(state, params)
    lhs = 2.0 * (np.conj(state.field) * db).real / FIELD_COUPLING
    rhs = 2.0 * math.sqrt(params.eta) * (np.conj(state.field) * state.current).real
    return float(lhs), float(rhs)


def integrate(initial: MeanFieldState, cfg: MeanFieldConfig, params: BeamParameters, coupled: bool = True) -> MeanFieldSeries:
    """Fixed-step interaction-picture RK4 with norm and window guards."""
    lo, hi = (int(v) for v in cfg.window)
    if (lo, hi) != (initial.m_min, initial.m_max):
        raise ConfigurationError("initial state does not match the configured window", key="meanfield.window")
    h = float(cfg.dt)
    root_eta = math.sqrt(params.eta)
    eps = mode_energy(np.arange(lo, hi + 1), params)
    half_c = np.exp(-1j * eps * h / 2)
    full_c = half_c * half_c
    half_b = complex(np.exp(1j * params.omega_eta * h / 2))
    full_b = half_b * half_b

    c = np.array(initial.coeffs, dtype=complex)
    b = complex(initial.field)
    norm0 = float(np.sum(np.abs(c) ** 2))

    def rhs(cc, bb):
        return _coupling(cc, bb, root_eta, coupled)

    times, fields, currents, norms = [initial.time], [b], [bunching(c)], [norm0]
    for step in range(1, cfg.n_steps + 1):
        k1c, k1b = rhs(c, b)
        k2c, k2b = rhs(half_c * (c + 0.5 * h * k1c), half_b * (b + 0.5 * h * k1b))
        c_mid, b_mid = half_c * c, half_b * b
        k3c, k3b = rhs(c_mid + 0.5 * h * k2c, b_mid + 0.5 * h * k2b)
        k4c, k4b = rhs(full_c * c + h * half_c * k3c, full_b * b + h * half_b * k3b)
        c = full_c * c + (h / 6.0) * (full_c * k1c + 2.0 * half_c * (k2c + k3c) + k4c)
        b = full_b * b + (h / 6.0) * (full_b * k1b + 2.0 * half_b * (k2b + k3b) + k4b)

        norm = float(np.sum(c.real**2 + c.imag**2))
        if abs(norm - norm0) > cfg.norm_tolerance:
            raise NormDriftError(f"norm drifted by {norm - norm0:.3e} at step {step}")
        edge = max(abs(c[0]), abs(c[-1]))
        if edge > cfg.leak_tolerance:
            raise WindowLeakError(f"boundary coefficient {edge:.3e} exceeds {cfg.leak_tolerance:g} at step {step}")
        if step % cfg.record_stride == 0:
            times.append(initial.time + step * h)
            fields.append(b)
            currents.append(bunching(c))
            norms.append(norm)

    final = MeanFieldState(initial.time + cfg.n_steps * h, c, b, lo)
    return MeanFieldSeries(np.array(times), np.array(fields), np.array(currents), np.array(norms), final)


def measure_growth(t, abs_b, fit_window=None, saturation=None) -> float:
    """Least-squares slope of ln|b| against t inside ``fit_window``.

    With ``saturation`` given, the window must stay below 1% of it.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(abs_b, dtype=float)
    if fit_window is not None:
        t0, t1 = fit_window
        mask = (t >= t0) & (t <= t1)
        t, y = t[mask], y[mask]
    if t.size < 2:
        raise FitError("fewer than two samples in the fit window")
    if np.any(y <= 0):
        raise FitError("|b| must be positive throughout the fit window")
    if saturation is not None and np.max(y) > 0.01 * saturation:
        raise FitError("fit window reaches the saturated regime")
    slope, _ = np.polyfit(t, np.log(y), 1)
    return float(slope)
