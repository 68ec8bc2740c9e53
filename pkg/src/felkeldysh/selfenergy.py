"""Retarded, advanced and Keldysh self-energies of the beam.

Two evaluation routes are provided. The discrete route sums over the level
transitions of an :class:`~felkeldysh.beam.OccupationProfile`, with the
infinitesimal i0+ replaced by a finite Lorentzian width ``epsilon``. The
Gaussian route uses the continuum closed forms written with the Dawson
integral. Both accept scalar or array frequencies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .beam import BeamParameters, GaussianScales, OccupationProfile, transition_frequency
from .errors import DomainError, SingularityError
from .specfun import dawson

SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class Broadening:
    """Finite width standing in for i0+ in the spectral denominators."""

    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise DomainError(f"broadening must be positive, got {self.epsilon!r}")


@dataclass(frozen=True)
class SelfEnergySample:
    omega: float
    sigma_r: complex
    sigma_a: complex
    sigma_k: complex


def _eps(broadening: Union[Broadening, float]) -> float:
    if isinstance(broadening, Broadening):
        return broadening.epsilon
    return Broadening(float(broadening)).epsilon


def _scalar_or_array(out, omega):
    return complex(out) if np.ndim(omega) == 0 else out


def default_broadening(params: BeamParameters) -> Broadening:
    """Three level spacings; wide enough to wash out the discrete comb."""
    return Broadening(3.0 / params.eta)


def broadening_warnings(epsilon: float, params: BeamParameters, scales: GaussianScales = None):
    """Messages for a width that does not sit between level spacing and beam width."""
    out = []
    if epsilon * params.eta < 3.0:
        out.append(
            f"broadening {epsilon:g} is less than 3 level spacings (1/eta = {1 / params.eta:g}); "
            "the discrete comb will show through"
        )
    if scales is not None and scales.sigma_omega / epsilon < 5.0:
        out.append(
            f"broadening {epsilon:g} is not small against sigma_omega = {scales.sigma_omega:g}; "
            "spectral features will be smeared"
        )
    return out


def _transitions(profile: OccupationProfile, params: BeamParameters):
    lower, n_lo, n_hi = profile.transition_pairs()
    return transition_frequency(lower, params), n_lo, n_hi


def sigma_r_discrete(profile: OccupationProfile, params: BeamParameters, omega, broadening):
    """N eta sum_m (n_m - n_{m+1}) / (omega - Omega_m + i epsilon)."""
    eps = _eps(broadening)
    freqs, n_lo, n_hi = _transitions(profile, params)
    diff = n_lo - n_hi
    keep = diff != 0.0
    w = np.asarray(omega, dtype=float)[..., None]
    terms = diff[keep] / (w - freqs[keep] + 1j * eps)
    out = params.n_electrons * params.eta * terms.sum(axis=-1)
    return _scalar_or_array(out, omega)


def sigma_a_discrete(profile: OccupationProfile, params: BeamParameters, omega, broadening):
    return np.conj(sigma_r_discrete(profile, params, omega, broadening))


def _lorentzian(x, eps):
    return eps / (x * x + eps * eps)


def sigma_k_discrete(profile: OccupationProfile, params: BeamParameters, omega, broadening):
    """-i N eta sum_m S_m 2 L(omega - Omega_m), S_m = n_m + n_{m+1} - 2 n_m n_{m+1}.

    L is the unit-area Lorentzian of width epsilon divided by pi, so 2 L
    replaces 2 pi delta.
    """
    eps = _eps(broadening)
    freqs, n_lo, n_hi = _transitions(profile, params)
    spectrum = n_lo + n_hi - 2.0 * n_lo * n_hi
    w = np.asarray(omega, dtype=float)[..., None]
    total = (spectrum * 2.0 * _lorentzian(w - freqs, eps)).sum(axis=-1)
    out = -1j * params.n_electrons * params.eta * total
    return _scalar_or_array(out, omega)


def sigma_k_dilute(profile: OccupationProfile, params: BeamParameters, omega, broadening):
    """Dilute-beam Keldysh component, S_m replaced by 2 n_m."""
    eps = _eps(broadening)
    freqs = transition_frequency(profile.modes, params)
    w = np.asarray(omega, dtype=float)[..., None]
    total = (profile.values * _lorentzian(w - freqs, eps)).sum(axis=-1)
    out = -4j * params.n_electrons * params.eta * total
    return _scalar_or_array(out, omega)


def sigma_r_gaussian(params: BeamParameters, scales: GaussianScales, omega):
    """Continuum Sigma^R of a Gaussian beam.

    Real part (N / s^2) [2 y F(y) - 1] (frequency pulling), imaginary part
    -N sqrt(pi) y exp(-y^2) / s^2 (gain for y < 0), with s = sigma_omega.
    """
    y = scales.y(omega)
    scale = params.n_electrons / scales.sigma_omega**2
    out = scale * (2.0 * y * dawson(y) - 1.0) - 1j * scale * SQRT_PI * y * np.exp(-y * y)
    return _scalar_or_array(out, omega)


def sigma_a_gaussian(params: BeamParameters, scales: GaussianScales, omega):
    return np.conj(sigma_r_gaussian(params, scales, omega))


def sigma_k_gaussian(params: BeamParameters, scales: GaussianScales, omega):
    y = scales.y(omega)
    peak = 4.0 * math.sqrt(2.0 * math.pi) * params.n_electrons * params.eta / scales.sigma_omega
    out = -1j * peak * np.exp(-y * y)
    return _scalar_or_array(out, omega)


def effective_occupation(params: BeamParameters, scales: GaussianScales, omega) -> float:
    """Sigma^K / (2i Im Sigma^R) for the Gaussian beam: 2 sqrt(2) eta sigma_omega / y.

    Diverges at the centre of the distribution; raises for |y| <= 1e-8.
    """
    y = float(scales.y(omega))
    if abs(y) <= 1e-8:
        raise SingularityError(f"effective occupation diverges at the beam centre (y = {y!r})")
    return 2.0 * math.sqrt(2.0) * params.eta * scales.sigma_omega / y


def sample_discrete(profile, params, omega: float, broadening) -> SelfEnergySample:
    sr = sigma_r_discrete(profile, params, omega, broadening)
    return SelfEnergySample(float(omega), sr, sr.conjugate(), sigma_k_discrete(profile, params, omega, broadening))


def sample_gaussian(params, scales, omega: float) -> SelfEnergySample:
    sr = sigma_r_gaussian(params, scales, omega)
    return SelfEnergySample(float(omega), sr, sr.conjugate(), sigma_k_gaussian(params, scales, omega))


SWEEP_COLUMNS = ("omega", "y", "re_sigma_r", "im_sigma_r", "im_sigma_k", "method")


def sweep_rows(omegas, params, scales, profile=None, broadening=None):
    """Rows for the frequency-sweep table; the discrete block is added when a
    profile is given."""
    omegas = np.asarray(omegas, dtype=float)
    ys = scales.y(omegas)
    rows = []
    if profile is not None:
        sr = sigma_r_discrete(profile, params, omegas, broadening)
        sk = sigma_k_discrete(profile, params, omegas, broadening)
        rows += [
            (float(w), float(y), float(r.real), float(r.imag), float(k.imag), "discrete")
            for w, y, r, k in zip(omegas, ys, sr, sk)
        ]
    sr = sigma_r_gaussian(params, scales, omegas)
    sk = sigma_k_gaussian(params, scales, omegas)
    rows += [
        (float(w), float(y), float(r.real), float(r.imag), float(k.imag), "gaussian")
        for w, y, r, k in zip(omegas, ys, sr, sk)
    ]
    return rows
