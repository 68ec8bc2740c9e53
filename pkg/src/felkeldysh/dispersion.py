"""Dressed inverse propagator, threshold solver and classical-limit comparators."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Union

import numpy as np

from .beam import BeamParameters, GaussianScales, OccupationProfile, transition_frequency
from .errors import ConfigurationError, RootNotFoundError
from .selfenergy import sigma_r_discrete, sigma_r_gaussian
from .specfun import dawson, pv_hilbert

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class DressedPropagatorSample:
    omega: float
    gamma_r: complex


@dataclass(frozen=True)
class ThresholdSolution:
    omega_res: float
    y_res: float
    im_gamma_at_res: float
    growing: bool
    residual: float
    iterations: int
    multiple_roots: bool = False

    def report(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PierceCubic:
    roots: tuple
    unstable_root: Optional[complex]
    rho_eff: float
    centers: tuple
    residuals: tuple

    @property
    def growth_rate(self) -> float:
        return 0.0 if self.unstable_root is None else self.unstable_root.imag


def _free_part(params: BeamParameters, omega):
    return params.n_electrons / TWO_PI * (np.asarray(omega, dtype=float) - params.omega_eta)


def gamma_r(beam: Union[GaussianScales, OccupationProfile], params: BeamParameters, omega, method=None, broadening=None):
    """Gamma^R(omega) = (N / 2 pi)(omega - omega_eta) - Sigma^R(omega).

    ``method`` is ``"gaussian"`` (closed form, needs GaussianScales) or
    ``"discrete"`` (level sum, needs an OccupationProfile and a broadening,
    which also stands in for the i0+ of the free part). Inferred from the
    type of ``beam`` when omitted.
    """
    if method is None:
        method = "discrete" if isinstance(beam, OccupationProfile) else "gaussian"
    if method == "gaussian":
        if not isinstance(beam, GaussianScales):
            raise ConfigurationError("gaussian method needs GaussianScales")
        sigma = sigma_r_gaussian(params, beam, omega)
    elif method == "discrete":
        if not isinstance(beam, OccupationProfile) or broadening is None:
            raise ConfigurationError("discrete method needs an OccupationProfile and a broadening")
        sigma = sigma_r_discrete(beam, params, omega, broadening)
    else:
        raise ConfigurationError(f"unknown method {method!r}")
    out = _free_part(params, omega) - sigma
    return complex(out) if np.ndim(omega) == 0 else out


def re_gamma_gaussian(scales: GaussianScales, params: BeamParameters, omega):
    y = scales.y(omega)
    pulling = (2.0 * y * dawson(y) - 1.0) / scales.sigma_omega**2
    return params.n_electrons * ((np.asarray(omega, dtype=float) - params.omega_eta) / TWO_PI - pulling)


def im_gamma_gaussian(scales: GaussianScales, params: BeamParameters, omega):
    y = scales.y(omega)
    return params.n_electrons * math.sqrt(math.pi) * y * np.exp(-y * y) / scales.sigma_omega**2


def _sign_change_cells(func, lo, hi, points, vectorized=False):
    xs = np.linspace(lo, hi, points)
    fs = np.asarray(func(xs), dtype=float) if vectorized else np.array([func(x) for x in xs])
    cells = []
    for i in range(points - 1):
        if fs[i] == 0.0:
            cells.append((xs[i], xs[i]))
        elif fs[i] * fs[i + 1] < 0:
            cells.append((xs[i], xs[i + 1]))
    if fs[-1] == 0.0:
        cells.append((xs[-1], xs[-1]))
    return cells


def bracketed_root(func, lo, hi, ftol, xtol=1e-3, scan_points=2001, max_iter=200, vectorized=False):
    """Root of a real function on [lo, hi].

    The bracket is scanned for sign changes; the cell closest to the
    bracket midpoint is bisected down to ``xtol`` and then polished by
    safeguarded secant steps until |f| <= ftol. ``vectorized`` lets the
    scan evaluate ``func`` on the whole grid at once.

    Returns (root, |f(root)|, iterations, multiple).
    """
    if not hi > lo:
        raise ConfigurationError(f"bracket ({lo!r}, {hi!r}) is empty")
    cells = _sign_change_cells(func, lo, hi, scan_points, vectorized)
    if not cells:
        raise RootNotFoundError(f"no sign change of the dispersion function in [{lo!r}, {hi!r}]")
    mid = 0.5 * (lo + hi)
    a, b = (float(v) for v in min(cells, key=lambda c: abs(0.5 * (c[0] + c[1]) - mid)))
    multiple = len(cells) > 1
    fa, fb = func(a), func(b)
    iterations = 0
    if a == b:
        return a, abs(fa), iterations, multiple

    while b - a > xtol and iterations < max_iter:
        c = 0.5 * (a + b)
        fc = func(c)
        iterations += 1
        if fc == 0.0:
            return c, 0.0, iterations, multiple
        if fa * fc < 0:
            b, fb = c, fc
        else:
            a, fa = c, fc

    x, fx = (a, fa) if abs(fa) < abs(fb) else (b, fb)
    x_prev, f_prev = (b, fb) if x == a else (a, fa)
    while abs(fx) > ftol and iterations < max_iter:
        iterations += 1
        step_ok = fx != f_prev
        x_new = x - fx * (x - x_prev) / (fx - f_prev) if step_ok else 0.5 * (a + b)
        if not (a < x_new < b):
            x_new = 0.5 * (a + b)
        f_new = func(x_new)
        if fa * f_new < 0:
            b, fb = x_new, f_new
        else:
            a, fa = x_new, f_new
        x_prev, f_prev, x, fx = x, fx, x_new, f_new
        if b - a <= 4 * np.spacing(max(abs(a), abs(b), 1.0)):
            break
    return x, abs(fx), iterations, multiple


def solve_threshold(scales: GaussianScales, params: BeamParameters, bracket, scan_points: int = 2001) -> ThresholdSolution:
    """Solve Re Gamma^R(omega) = 0 for the Gaussian beam inside ``bracket``."""
    lo, hi = (float(v) for v in bracket)
    ftol = 1e-10 * params.n_electrons

    def f(w):
        return re_gamma_gaussian(scales, params, w)

    root, residual, iterations, multiple = bracketed_root(
        f, lo, hi, ftol, xtol=1e-3 * min(1.0, hi - lo), scan_points=scan_points, vectorized=True
    )
    root, residual = float(root), float(residual)
    y_res = float(scales.y(root))
    im_g = float(im_gamma_gaussian(scales, params, root))
    return ThresholdSolution(root, y_res, im_g, im_g < 0, residual, iterations, multiple)


def gain_sign_map(scales: GaussianScales, params: BeamParameters, omega_grid):
    """(omega, growing) pairs; growing means Im Gamma^R < 0, i.e. y < 0."""
    omegas = np.asarray(omega_grid, dtype=float)
    im = im_gamma_gaussian(scales, params, omegas)
    return [(float(w), bool(g < 0)) for w, g in zip(omegas, im)]


SWEEP_COLUMNS = ("omega", "re_gamma", "im_gamma", "growing")


def sweep_rows(omegas, beam, params, method=None, broadening=None):
    omegas = np.asarray(omegas, dtype=float)
    g = gamma_r(beam, params, omegas, method=method, broadening=broadening)
    return [(float(w), float(v.real), float(v.imag), int(v.imag < 0)) for w, v in zip(omegas, g)]


def _cubic_value(x, centers, rhs):
    a, b, c = centers
    return (x - a) * (x - b) * (x - c) - rhs


def solve_pole_cubic(centers, rhs: float = TWO_PI, polish_steps: int = 8):
    """Roots of (x - a)(x - b)(x - c) = rhs.

    Solved through the companion matrix in coordinates centred on the mean
    of (a, b, c), then polished by Newton steps on the factored form.
    """
    shift = sum(centers) / 3.0
    a, b, c = (v - shift for v in centers)
    coeffs = [1.0, -(a + b + c), a * b + b * c + c * a, -(a * b * c) - rhs]
    roots = np.roots(coeffs).astype(complex)
    local = (a, b, c)
    polished = []
    for z in roots:
        for _ in range(polish_steps):
            fz = _cubic_value(z, local, rhs)
            dz = (z - b) * (z - c) + (z - a) * (z - c) + (z - a) * (z - b)
            if dz == 0:
                break
            step = fz / dz
            z = z - step
            if abs(step) <= 1e-16 * max(1.0, abs(z)):
                break
        polished.append(z)
    residuals = tuple(float(abs(_cubic_value(z, local, rhs))) for z in polished)
    roots = tuple(complex(z + shift) for z in sorted(polished, key=lambda z: (z.imag, z.real)))
    return roots, residuals


def pierce_cubic(m0: int, params: BeamParameters, degenerate: bool = False, rhs: float = TWO_PI) -> PierceCubic:
    """Cold-beam dispersion cubic.

    With every electron in level ``m0`` the self-energy has two poles, at
    the absorbing transition Omega_{m0} and the emitting one Omega_{m0-1},
    and Gamma^R = 0 reduces to
    (omega - omega_eta)(omega - Omega_{m0-1})(omega - Omega_{m0}) = 2 pi.
    ``degenerate=True`` places all three centres at Omega_{m0}, the
    analytic limit whose roots are Omega_{m0} + (2 pi)^{1/3} e^{2 pi i k / 3}.
    """
    upper = transition_frequency(m0, params)
    if degenerate:
        centers = (upper, upper, upper)
    else:
        centers = (params.omega_eta, transition_frequency(m0 - 1, params), upper)
    roots, residuals = solve_pole_cubic(centers, rhs)
    tol = 1e-12 * max(1.0, abs(rhs) ** (1.0 / 3.0))
    unstable = max(roots, key=lambda z: z.imag)
    if unstable.imag <= tol:
        unstable = None
    rho_eff = (params.n_electrons * params.eta / abs(m0)) ** (1.0 / 3.0) if m0 else math.inf
    return PierceCubic(roots, unstable, rho_eff, centers, residuals)


def gaussian_momentum_distribution(scales: GaussianScales, params: BeamParameters, n_points: int = 4001, halfwidth: float = 8.0):
    """Gaussian f(p) on a uniform p-grid, with n(m) = sqrt(eta) f(p), p = m / sqrt(eta).

    Centred at p0 = sqrt(eta) omega_0 so that its resonance p / sqrt(eta)
    sits at the beam centre frequency.
    """
    root_eta = math.sqrt(params.eta)
    p0 = root_eta * scales.omega_0
    sigma_p = root_eta * scales.sigma_omega
    p = np.linspace(p0 - halfwidth * sigma_p, p0 + halfwidth * sigma_p, n_points)
    sigma_m = params.eta * scales.sigma_omega
    n = np.exp(-((p - p0) ** 2) / (2.0 * sigma_p**2)) / (math.sqrt(2.0 * math.pi) * sigma_m)
    return p, n / root_eta


def continuum_dispersion_residual(p, f, params: BeamParameters, omega):
    """Gamma^R / N from a sampled momentum distribution f(p).

    Real part: (omega - omega_eta)/2 pi + eta^{3/2} PV int f'(p) / (omega - p/sqrt(eta)) dp.
    Imaginary part: the resonant contribution -pi eta^2 f'(sqrt(eta) omega).
    f' is taken by central differences.
    """
    p = np.asarray(p, dtype=float)
    f = np.asarray(f, dtype=float)
    h = (p[-1] - p[0]) / (p.size - 1)
    df = np.gradient(f, h)
    root_eta = math.sqrt(params.eta)
    p_res = root_eta * float(omega)
    hilbert = pv_hilbert(p, df, p_res)
    # PV int f' / (omega - p/sqrt(eta)) dp = -pi sqrt(eta) * hilbert
    pv_integral = -math.pi * root_eta * hilbert
    real = (float(omega) - params.omega_eta) / TWO_PI + params.eta**1.5 * pv_integral
    imag = -math.pi * params.eta**2 * float(np.interp(p_res, p, df))
    return complex(real, imag)
