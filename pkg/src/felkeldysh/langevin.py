"""Stochastic integration of the laser normal form and ensemble statistics.

The equation is da/dt = alpha a - beta |a|^2 a + zeta with complex white
noise, <zeta*(t) zeta(t')> = 2 D delta(t - t'). Per step the noise increment
has independent real and imaginary parts of variance D dt each.

Each trajectory draws from its own counter-based stream keyed by
(seed, trajectory index), so an ensemble does not depend on how the
trajectories are grouped or scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, DivergenceError, FitError, StatisticsError
from .lgk import CanonicalLaserParams

SCHEMES = ("euler_maruyama", "heun")
STABILITY_LIMIT = 0.05
MIN_DECORRELATIONS = 20


@dataclass(frozen=True)
class LangevinConfig:
    dt: float
    n_steps: int
    n_traj: int = 1
    seed: int = 0
    initial_amplitude: complex = 0j
    burn_in_fraction: float = 0.2
    scheme: str = "heun"
    thin: int = 1
    workers: int = 1
    chunk_steps: int = 4096

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt!r}", key="langevin.dt")
        if int(self.n_steps) < 1:
            raise ConfigurationError("n_steps must be >= 1", key="langevin.n_steps")
        if int(self.n_traj) < 1:
            raise ConfigurationError("n_traj must be >= 1", key="langevin.n_traj")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError("seed must be a 64-bit unsigned integer", key="seed")
        if not 0 <= self.burn_in_fraction < 1:
            raise ConfigurationError("burn_in_fraction must lie in [0, 1)", key="langevin.burn_in_fraction")
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"unknown scheme {self.scheme!r}", key="langevin.scheme")
        if int(self.thin) < 1:
            raise ConfigurationError("thin must be >= 1", key="langevin.thin")
        if int(self.workers) < 1:
            raise ConfigurationError("workers must be >= 1", key="langevin.workers")
        if int(self.chunk_steps) < 1:
            raise ConfigurationError("chunk_steps must be >= 1", key="langevin.chunk_steps")


@dataclass(frozen=True)
class TrajectorySet:
    """Samples a[traj, k] at times t[k] (every ``thin``-th step, including t = 0)."""

    t: np.ndarray
    a: np.ndarray
    seed: int
    dt_sample: float

    def to_rows(self, traj: int = 0):
        x = self.a[traj]
        return [(float(t), float(v.real), float(v.imag)) for t, v in zip(self.t, x)]


@dataclass(frozen=True)
class EnsembleStats:
    mean_mod2: float
    stderr_mod2: float
    autocorr_time: float
    mean_field: complex
    stderr_field: complex = 0j
    degenerate: bool = False

    def report(self) -> dict:
        return {
            "mean_mod2": self.mean_mod2,
            "stderr_mod2": self.stderr_mod2,
            "autocorr_time": self.autocorr_time,
            "mean_field": [self.mean_field.real, self.mean_field.imag],
            "stderr_field": [self.stderr_field.real, self.stderr_field.imag],
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    alphas: tuple
    mean_abs: tuple
    stderr_abs: tuple


def noise_stream(seed: int, index: int):
    """Independent generator for trajectory ``index``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(index)])))


def draw_increments(gen: np.random.Generator, n: int, d_las: float, dt: float) -> np.ndarray:
    """n complex noise increments, each component N(0, d_las * dt)."""
    z = gen.standard_normal((n, 2))
    scale = math.sqrt(d_las * dt)
    return scale * (z[:, 0] + 1j * z[:, 1])


def _drift(a, alpha, beta):
    mod2 = a.real * a.real + a.imag * a.imag
    return alpha * a - beta * mod2 * a


def integrate_with_noise(alpha, beta, a0, increments, dt, scheme="heun", thin=1, step_offset=0):
    """Integrate with explicit noise increments of shape (n_traj, n_steps).

    Returns (samples, a_final) where samples holds the state after every
    ``thin``-th step (not including the initial state).
    """
    a = np.array(a0, dtype=complex, copy=True)
    dw = np.asarray(increments, dtype=complex)
    # overflow is caught by the finiteness check below
    with np.errstate(over="ignore", invalid="ignore"):
        return _steps(a, alpha, beta, dw, dt, scheme, thin, step_offset)


def _steps(a, alpha, beta, dw, dt, scheme, thin, step_offset):
    n_steps = dw.shape[-1]
    out = []
    for k in range(n_steps):
        w = dw[..., k]
        f0 = _drift(a, alpha, beta)
        if scheme == "heun":
            pred = a + f0 * dt + w
            a = a + 0.5 * (f0 + _drift(pred, alpha, beta)) * dt + w
        else:
            a = a + f0 * dt + w
        if not np.all(np.isfinite(a)):
            step = step_offset + k + 1
            raise DivergenceError(f"trajectory diverged at step {step}", step=step)
        if (step_offset + k + 1) % thin == 0:
            out.append(a.copy())
    samples = np.stack(out, axis=-1) if out else np.empty(a.shape + (0,), dtype=complex)
    return samples, a


def _run_group(p: CanonicalLaserParams, cfg: LangevinConfig, indices):
    gens = [noise_stream(cfg.seed, i) for i in indices]
    a = np.full(len(indices), complex(cfg.initial_amplitude))
    blocks = [a[:, None].copy()]
    done = 0
    while done < cfg.n_steps:
        n = min(cfg.chunk_steps, cfg.n_steps - done)
        if p.d_las > 0:
            dw = np.stack([draw_increments(g, n, p.d_las, cfg.dt) for g in gens])
        else:
            dw = np.zeros((len(indices), n), dtype=complex)
        samples, a = integrate_with_noise(p.alpha, p.beta, a, dw, cfg.dt, cfg.scheme, cfg.thin, done)
        blocks.append(samples)
        done += n
    return np.concatenate(blocks, axis=1)


def simulate(p: CanonicalLaserParams, cfg: LangevinConfig) -> TrajectorySet:
    """Ensemble of trajectories of the canonical equation (rotating frame)."""
    if cfg.dt * abs(p.alpha) > STABILITY_LIMIT:
        raise ConfigurationError(
            f"dt * |alpha| = {cfg.dt * abs(p.alpha):g} exceeds {STABILITY_LIMIT}", key="langevin.dt"
        )
    indices = np.arange(cfg.n_traj)
    groups = [g for g in np.array_split(indices, min(cfg.workers, cfg.n_traj)) if g.size]
    if len(groups) == 1:
        parts = [_run_group(p, cfg, groups[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(groups)) as pool:
            parts = list(pool.map(lambda g: _run_group(p, cfg, g), groups))
    a = np.concatenate(parts, axis=0)
    t = np.arange(a.shape[1]) * (cfg.dt * cfg.thin)
    return TrajectorySet(t=t, a=a, seed=cfg.seed, dt_sample=cfg.dt * cfg.thin)


def autocorrelation_time(x: np.ndarray, dt: float = 1.0):
    """Integrated autocorrelation time of the rows of ``x``.

    The autocovariance is computed by FFT, averaged over rows, normalised
    and summed (trapezoid, lag 0 weighted 1/2) up to its first zero
    crossing. Returns (tau, degenerate); degenerate means zero variance.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = x.shape[1]
    xc = x - x.mean(axis=1, keepdims=True)
    size = 1 << (2 * n - 1).bit_length()
    fx = np.fft.rfft(xc, size, axis=1)
    acov = np.fft.irfft(fx * np.conj(fx), size, axis=1)[:, :n].mean(axis=0) / n
    # rounding in the mean leaves a tiny residual on constant rows
    scale = float(np.mean(x * x))
    if acov[0] <= 1e-24 * scale:
        return dt, True
    rho = acov / acov[0]
    crossing = np.flatnonzero(rho <= 0)
    cut = crossing[0] if crossing.size else n
    tau = dt * (math.fsum(rho[:cut]) - 0.5)
    return max(tau, 0.5 * dt), False


def _batch_stderr(values: np.ndarray, block: int) -> float:
    """Standard error of the mean from non-overlapping block means of every row."""
    n = values.shape[1]
    n_blocks = max(1, n // block)
    used = values[:, : n_blocks * block]
    means = used.reshape(values.shape[0], n_blocks, -1).mean(axis=2).ravel()
    if means.size < 2:
        return float("nan")
    return float(np.std(means, ddof=1) / math.sqrt(means.size))


def stationary_stats(trajectories, burn_in_fraction: float = 0.2, dt: float = None) -> EnsembleStats:
    """Stationary moments after discarding the burn-in part of every trajectory.

    Accepts a :class:`TrajectorySet` or a complex array (n_traj, n_samples)
    together with ``dt``.
    """
    if isinstance(trajectories, TrajectorySet):
        a, dt = trajectories.a, trajectories.dt_sample
    else:
        a = np.atleast_2d(np.asarray(trajectories, dtype=complex))
        dt = 1.0 if dt is None else float(dt)
    if not 0 <= burn_in_fraction < 1:
        raise ConfigurationError("burn_in_fraction must lie in [0, 1)", key="langevin.burn_in_fraction")
    start = int(math.floor(burn_in_fraction * a.shape[1]))
    x = a[:, start:]
    if x.shape[1] < 2:
        raise StatisticsError("fewer than two samples after burn-in", required_length=2 * a.shape[1] + 2)
    mod2 = x.real**2 + x.imag**2
    mean_mod2 = float(math.fsum(mod2.ravel()) / mod2.size)
    mean_field = complex(math.fsum(x.real.ravel()) / x.size, math.fsum(x.imag.ravel()) / x.size)

    tau, degenerate = autocorrelation_time(x.real, dt)
    if degenerate:
        return EnsembleStats(mean_mod2, 0.0, tau, mean_field, 0j, True)
    length = x.shape[1] * dt
    if length < MIN_DECORRELATIONS * tau:
        needed = math.ceil(MIN_DECORRELATIONS * tau / dt / (1.0 - burn_in_fraction))
        raise StatisticsError(
            f"post-burn-in length {length:g} is below {MIN_DECORRELATIONS} autocorrelation times (tau = {tau:g}); "
            f"need at least {needed} samples per trajectory",
            required_length=needed,
        )
    block = max(1, math.ceil(2.0 * MIN_DECORRELATIONS * tau / dt) // 4)
    return EnsembleStats(
        mean_mod2=mean_mod2,
        stderr_mod2=_batch_stderr(mod2, block),
        autocorr_time=float(tau),
        mean_field=mean_field,
        stderr_field=complex(_batch_stderr(x.real, block), _batch_stderr(x.imag, block)),
    )


def scaling_sweep(beta: float, d_las: float, alphas, cfg: LangevinConfig) -> ScalingFit:
    """Fit log <|a|> against log alpha above threshold.

    Time is measured in units of 1/alpha for every point: the step used at
    ``alpha`` is cfg.dt / alpha, so each run covers the same number of
    relaxation times.
    """
    alphas = [float(x) for x in alphas]
    if len(alphas) < 4:
        raise FitError(f"scaling fit needs at least 4 points, got {len(alphas)}")
    if any(not x > 0 for x in alphas):
        raise FitError("scaling sweep needs positive alphas")
    means, errs = [], []
    for alpha in alphas:
        run_cfg = replace(cfg, dt=cfg.dt / alpha)
        traj = simulate(CanonicalLaserParams(alpha, beta, d_las), run_cfg)
        start = int(math.floor(cfg.burn_in_fraction * traj.a.shape[1]))
        mod = np.abs(traj.a[:, start:])
        per_traj = mod.mean(axis=1)
        means.append(float(per_traj.mean()))
        errs.append(float(per_traj.std(ddof=1) / math.sqrt(per_traj.size)) if per_traj.size > 1 else 0.0)
    if any(m <= 0 for m in means):
        raise FitError("non-positive mean amplitude in sweep")
    slope, intercept = np.polyfit(np.log(alphas), np.log(means), 1)
    return ScalingFit(float(slope), float(intercept), tuple(alphas), tuple(means), tuple(errs))
