"""Beam constants, mode spectrum and occupation profiles.

Electrons live on the ponderomotive circle; mode ``m`` has energy
``m**2 / (2 eta)`` and the current couples ``m`` to ``m + 1`` at the
transition frequency ``(2m + 1) / (2 eta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigurationError, DomainError

# CODATA values, 10 significant digits.
ELEMENTARY_CHARGE = 1.602176634e-19  # C
VACUUM_PERMITTIVITY = 8.854187813e-12  # F/m
ELECTRON_MASS = 9.109383702e-31  # kg
SPEED_OF_LIGHT = 2.997924580e8  # m/s

PROFILE_TOLERANCE = 1e-10


@dataclass(frozen=True)
class BeamParameters:
    """Dimensionless constants of the rescaled theory.

    eta : mass parameter of the matter field (level spacing is 1/eta)
    n_electrons : the large-N scale factor
    omega_eta : free frequency of the radiation mode
    """

    eta: float
    n_electrons: float
    omega_eta: float = 0.0

    def __post_init__(self):
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise DomainError(f"eta must be positive and finite, got {self.eta!r}")
        if not (self.n_electrons > 0 and math.isfinite(self.n_electrons)):
            raise DomainError(f"n_electrons must be positive, got {self.n_electrons!r}")
        if not math.isfinite(self.omega_eta):
            raise DomainError("omega_eta must be finite")


@dataclass(frozen=True)
class PhysicalBeamInputs:
    current: float  # A
    undulator_wavelength: float  # m
    lorentz_factor: float
    radiation_frequency: float  # rad/s

    def __post_init__(self):
        for name in ("current", "undulator_wavelength", "lorentz_factor", "radiation_frequency"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be strictly positive, got {value!r}")


@dataclass(frozen=True)
class GaussianScales:
    """Centre and width of a Gaussian beam in transition-frequency space."""

    omega_0: float
    sigma_omega: float

    def __post_init__(self):
        if not self.sigma_omega > 0:
            raise DomainError(f"sigma_omega must be positive, got {self.sigma_omega!r}")

    @classmethod
    def from_modes(cls, m0: int, sigma_m: float, params: BeamParameters) -> "GaussianScales":
        return cls(transition_frequency(m0, params), sigma_m / params.eta)

    def y(self, omega):
        """Dimensionless detuning (omega - omega_0) / (sqrt(2) sigma_omega)."""
        return (np.asarray(omega, dtype=float) - self.omega_0) / (math.sqrt(2.0) * self.sigma_omega)

    def omega(self, y):
        return self.omega_0 + math.sqrt(2.0) * self.sigma_omega * np.asarray(y, dtype=float)


@dataclass(frozen=True, eq=False)
class OccupationProfile:
    """Occupations n_m on the closed window [m_min, m_max].

    ``edge`` fixes the occupations just outside the window used by the
    difference sums: ``"zero"`` for profiles whose tails are already
    negligible, ``"hold"`` for a window cut out of a flat distribution (the
    edge value continues on both sides).
    """

    m_min: int
    values: np.ndarray
    kind: str = "custom"
    m0: Optional[int] = None
    sigma_m: Optional[float] = None
    edge: str = "zero"
    m_max: int = field(init=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "m_max", int(self.m_min) + vals.size - 1)
        if vals.ndim != 1 or vals.size < 2:
            raise ConfigurationError("profile needs at least two modes (m_min < m_max)")
        if self.kind not in ("gaussian", "cold", "uniform", "custom"):
            raise ConfigurationError(f"unknown profile kind {self.kind!r}")
        if self.edge not in ("zero", "hold"):
            raise ConfigurationError(f"unknown edge convention {self.edge!r}")
        if np.any(vals < 0) or np.any(vals > 1):
            raise ConfigurationError("occupations must lie in [0, 1]")

    @property
    def modes(self) -> np.ndarray:
        return np.arange(self.m_min, self.m_max + 1)

    @property
    def total(self) -> float:
        return float(math.fsum(self.values))

    def check_normalized(self, tol: float = PROFILE_TOLERANCE) -> None:
        if abs(self.total - 1.0) > tol:
            raise ConfigurationError(f"occupations sum to {self.total!r}, expected 1")

    def occupation(self, m: int) -> float:
        if self.m_min <= m <= self.m_max:
            return float(self.values[m - self.m_min])
        if self.edge == "hold":
            return float(self.values[0] if m < self.m_min else self.values[-1])
        return 0.0

    def transition_pairs(self):
        """Lower mode indices and (n_m, n_{m+1}) for every transition that
        touches the window: m = m_min - 1 ... m_max."""
        if self.edge == "hold":
            below, above = self.values[0], self.values[-1]
        else:
            below = above = 0.0
        padded = np.concatenate(([below], self.values, [above]))
        lower = np.arange(self.m_min - 1, self.m_max + 1)
        return lower, padded[:-1], padded[1:]

    def to_rows(self):
        return [(int(m), float(n)) for m, n in zip(self.modes, self.values)]


def mode_energy(m, params: BeamParameters):
    """epsilon_m = m^2 / (2 eta)."""
    m = np.asarray(m, dtype=float)
    out = m * m / (2.0 * params.eta)
    return float(out) if out.ndim == 0 else out


def transition_frequency(m, params: BeamParameters):
    """Omega_m = epsilon_{m+1} - epsilon_m = (2m + 1) / (2 eta)."""
    m = np.asarray(m, dtype=float)
    out = (2.0 * m + 1.0) / (2.0 * params.eta)
    return float(out) if out.ndim == 0 else out


def gaussian_profile(m0: int, sigma_m: float, window_halfwidth: Optional[int] = None) -> OccupationProfile:
    """Gaussian occupations centred on ``m0``, normalised over m0 +- W.

    ``W`` defaults to ceil(8 sigma_m); a smaller window raises because the
    discarded tail would no longer be negligible.
    """
    if not sigma_m > 0:
        raise ConfigurationError(f"sigma_m must be positive, got {sigma_m!r}", key="sigma_m")
    min_width = 8.0 * sigma_m
    if window_halfwidth is None:
        window_halfwidth = max(1, math.ceil(min_width))
    if window_halfwidth < min_width or window_halfwidth < 1:
        raise ConfigurationError(
            f"window half-width {window_halfwidth} is below 8*sigma_m = {min_width:g}",
            key="window_halfwidth",
        )
    k = np.arange(-window_halfwidth, window_halfwidth + 1, dtype=float)
    weights = np.exp(-(k * k) / (2.0 * sigma_m * sigma_m))
    values = weights / math.fsum(weights)
    return OccupationProfile(int(m0) - window_halfwidth, values, kind="gaussian", m0=int(m0), sigma_m=float(sigma_m))


def cold_profile(m0: int) -> OccupationProfile:
    values = np.zeros(5)
    values[2] = 1.0
    return OccupationProfile(int(m0) - 2, values, kind="cold", m0=int(m0))


def uniform_profile(m_min: int, m_max: int) -> OccupationProfile:
    """Flat occupations; the window is treated as a slice of an unbounded flat beam."""
    if m_max <= m_min:
        raise ConfigurationError("uniform profile needs m_min < m_max")
    size = m_max - m_min + 1
    return OccupationProfile(int(m_min), np.full(size, 1.0 / size), kind="uniform", edge="hold")


def rho_from_physical(inputs: PhysicalBeamInputs) -> float:
    """FEL coupling rho = e I lambda_u / (2 pi eps0 m_e c^2 gamma0 omega0)."""
    num = ELEMENTARY_CHARGE * inputs.current * inputs.undulator_wavelength
    den = (
        2.0
        * math.pi
        * VACUUM_PERMITTIVITY
        * ELECTRON_MASS
        * SPEED_OF_LIGHT**2
        * inputs.lorentz_factor
        * inputs.radiation_frequency
    )
    return num / den
