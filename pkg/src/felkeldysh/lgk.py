"""Low-frequency expansion of the dressed propagator and the laser normal form."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

from .beam import BeamParameters, GaussianScales
from .dispersion import TWO_PI, gamma_r, solve_threshold
from .errors import ConfigurationError, DegenerateExpansionError, DomainError, NonSaturatingError
from .selfenergy import sigma_k_gaussian


@dataclass(frozen=True)
class LGKParameters:
    """Expansion of Gamma^R around an expansion point.

    Gamma^R(pt + nu) ~ z_inv * (nu + delta_omega + i kappa), so a negative
    ``kappa`` means net growth. ``r = Re(z) * delta_omega``.
    """

    z_inv: complex
    z: complex
    delta_omega: float
    kappa: float
    r: float
    d_noise: float
    lambda_c: complex = 1.0 + 0.0j
    expansion_point: float = 0.0
    fd_step: float = 0.0
    method: str = "gaussian"

    @property
    def z_phase(self) -> float:
        return cmath.phase(self.z)

    def report(self) -> dict:
        return {
            "z_inv": [self.z_inv.real, self.z_inv.imag],
            "z": [self.z.real, self.z.imag],
            "z_phase": self.z_phase,
            "delta_omega": self.delta_omega,
            "kappa": self.kappa,
            "r": self.r,
            "d_noise": self.d_noise,
            "lambda_c": [self.lambda_c.real, self.lambda_c.imag],
            "expansion_point": self.expansion_point,
            "fd_step": self.fd_step,
            "method": self.method,
        }


@dataclass(frozen=True)
class CanonicalLaserParams:
    """Coefficients of da/dt = alpha a - beta |a|^2 a + zeta, <zeta* zeta'> = 2 d_las delta."""

    alpha: float
    beta: float
    d_las: float
    frame_shift: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.alpha) or not math.isfinite(self.frame_shift):
            raise DomainError("alpha and frame_shift must be finite")
        if not self.beta >= 0:
            raise DomainError(f"beta must be non-negative, got {self.beta!r}")
        if not self.d_las >= 0:
            raise DomainError(f"d_las must be non-negative, got {self.d_las!r}")

    def report(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "d_las": self.d_las, "frame_shift": self.frame_shift}


def _gamma(scales: Optional[GaussianScales], params: BeamParameters, omega: float) -> complex:
    if scales is None:
        return complex(params.n_electrons / TWO_PI * (omega - params.omega_eta))
    return gamma_r(scales, params, omega, method="gaussian")


def _central(scales, params, x, h):
    return (_gamma(scales, params, x + h) - _gamma(scales, params, x - h)) / (2.0 * h)


def extract_lgk(
    scales: Optional[GaussianScales],
    params: BeamParameters,
    expansion_point: Optional[float] = None,
    fd_step: Optional[float] = None,
    lambda_c: complex = 1.0 + 0.0j,
    bracket=None,
) -> LGKParameters:
    """LGK parameters of a Gaussian beam (``scales=None`` is the empty cavity).

    The slope z_inv is a central difference refined by one Richardson step.
    Without an explicit ``expansion_point`` the threshold root inside
    ``bracket`` is used.
    """
    if expansion_point is None:
        if bracket is None or scales is None:
            raise ConfigurationError("expansion point or a threshold bracket is required", key="lgk.expansion_point")
        expansion_point = solve_threshold(scales, params, bracket).omega_res
    pt = float(expansion_point)
    width = scales.sigma_omega if scales is not None else 1.0
    if fd_step is None:
        fd_step = 1e-3 * width
    if not fd_step > 0:
        raise ConfigurationError(f"fd_step must be positive, got {fd_step!r}", key="lgk.fd_step")
    if scales is not None and fd_step > 0.01 * scales.sigma_omega:
        raise ConfigurationError(
            f"fd_step {fd_step!r} exceeds 0.01 * sigma_omega = {0.01 * scales.sigma_omega!r}", key="lgk.fd_step"
        )

    if scales is None:
        z_inv = complex(params.n_electrons / TWO_PI)
    else:
        coarse = _central(scales, params, pt, fd_step)
        fine = _central(scales, params, pt, 0.5 * fd_step)
        z_inv = (4.0 * fine - coarse) / 3.0
    if abs(z_inv) < 1e-12 * params.n_electrons:
        raise DegenerateExpansionError(f"|dGamma/domega| = {abs(z_inv)!r} vanishes at {pt!r}")

    g = _gamma(scales, params, pt)
    q = g / z_inv
    z = 1.0 / z_inv
    delta_omega = q.real
    kappa = q.imag
    d_noise = 0.0 if scales is None else abs(sigma_k_gaussian(params, scales, pt)) / 2.0
    return LGKParameters(
        z_inv=complex(z_inv),
        z=complex(z),
        delta_omega=float(delta_omega),
        kappa=float(kappa),
        r=float(z.real * delta_omega),
        d_noise=float(d_noise),
        lambda_c=complex(lambda_c),
        expansion_point=pt,
        fd_step=float(fd_step),
    )


def stationary_amplitude(p: LGKParameters) -> float:
    """|b_c| = sqrt(-r / Re lambda), or 0 in the trivial phase."""
    lam = p.lambda_c.real
    if lam == 0:
        raise DomainError("saturation undefined for Re lambda = 0")
    return math.sqrt(max(0.0, -p.r / lam))


def to_canonical(p: LGKParameters) -> CanonicalLaserParams:
    """Map to da/dt = alpha a - beta |a|^2 a + zeta in a rotating frame.

    The time-domain equation is db/dt = c b - (i lambda / Z)|b|^2 b + noise
    with c = -(kappa + i r) / Z. Its real part is alpha, its imaginary part
    is removed by rotating with ``frame_shift`` (a = b e^{i frame_shift t}).
    """
    zz = p.z
    if zz == 0:
        raise DegenerateExpansionError("Z vanishes")
    c = -(p.kappa + 1j * p.r) / zz
    beta = (1j * p.lambda_c / zz).real
    if not beta > 0:
        raise NonSaturatingError(f"cubic coefficient {beta!r} does not saturate the amplitude")
    return CanonicalLaserParams(
        alpha=float(c.real),
        beta=float(beta),
        d_las=float(p.d_noise / abs(zz) ** 2),
        frame_shift=float(-c.imag),
    )
