"""Command-line front end.

Every subcommand reads a flat ``key = value`` config and writes CSV/JSON
files into the output directory. Exit status: 0 on success, 2 for a
configuration problem, 3 when a numerical procedure fails.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import config as cfgmod
from .beam import (
    BeamParameters,
    GaussianScales,
    cold_profile,
    gaussian_profile,
    mode_energy,
    uniform_profile,
)
from .dispersion import SWEEP_COLUMNS as GAMMA_COLUMNS
from .dispersion import pierce_cubic, solve_threshold
from .dispersion import sweep_rows as gamma_rows
from .errors import ConfigurationError, DomainError, FelError, NonSaturatingError, NumericalError
from .langevin import LangevinConfig, simulate, stationary_stats
from .lgk import CanonicalLaserParams, extract_lgk, stationary_amplitude, to_canonical
from .meanfield import SERIES_COLUMNS, MeanFieldConfig, cold_beam_state, integrate
from .output import ensure_dir, write_csv, write_json
from .selfenergy import SWEEP_COLUMNS as SIGMA_COLUMNS
from .selfenergy import Broadening, broadening_warnings, default_broadening
from .selfenergy import sweep_rows as sigma_rows

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


class Context:
    def __init__(self, cfg: cfgmod.Config, out_dir: str, seed: int):
        self.cfg = cfg
        self.out = out_dir
        self.seed = seed
        self.hash = cfg.digest()
        self.files = []

    def csv(self, name, columns, rows):
        write_csv(os.path.join(self.out, name), columns, rows, self.hash, self.seed)
        self.files.append(name)

    def json(self, name, payload):
        write_json(os.path.join(self.out, name), payload, self.hash, self.seed)
        self.files.append(name)


def _warn(msg):
    print(f"warning: {msg}", file=sys.stderr)


def _positive(cfg, key):
    value = cfg.require(key)
    if not value > 0:
        raise ConfigurationError(f"{key} must be positive, got {value!r}", key=key)
    return value


def beam_params(cfg) -> BeamParameters:
    return BeamParameters(_positive(cfg, "beam.eta"), _positive(cfg, "beam.n_electrons"), cfg.get("beam.omega_eta"))


def beam_scales(cfg, params) -> GaussianScales:
    return GaussianScales.from_modes(cfg.require("beam.m0"), _positive(cfg, "beam.sigma_m"), params)


def beam_profile(cfg):
    kind = cfg.get("beam.profile")
    if kind == "gaussian":
        return gaussian_profile(cfg.require("beam.m0"), _positive(cfg, "beam.sigma_m"), cfg.get("beam.window_halfwidth"))
    if kind == "cold":
        return cold_profile(cfg.require("beam.m0"))
    if kind == "uniform":
        return uniform_profile(cfg.require("beam.m_min"), cfg.require("beam.m_max"))
    raise ConfigurationError(f"beam.profile must be gaussian, cold or uniform, got {kind!r}", key="beam.profile")


def _grid(cfg, section, lo_default, hi_default):
    lo = cfg.get(f"{section}.omega_min")
    hi = cfg.get(f"{section}.omega_max")
    n = cfg.get(f"{section}.n_points")
    lo = lo_default if lo is None else lo
    hi = hi_default if hi is None else hi
    if n < 2:
        raise ConfigurationError(f"{section}.n_points must be >= 2", key=f"{section}.n_points")
    if not hi > lo:
        raise ConfigurationError(f"{section}.omega_max must exceed {section}.omega_min", key=f"{section}.omega_max")
    return np.linspace(lo, hi, n)


def cmd_selfenergy(ctx: Context):
    cfg = ctx.cfg
    params = beam_params(cfg)
    scales = beam_scales(cfg, params)
    profile = beam_profile(cfg)
    eps = cfg.get("selfenergy.epsilon")
    if eps is not None and not eps > 0:
        raise ConfigurationError("selfenergy.epsilon must be positive", key="selfenergy.epsilon")
    broadening = Broadening(eps) if eps is not None else default_broadening(params)
    for msg in broadening_warnings(broadening.epsilon, params, scales):
        _warn(msg)
    span = 4.0 * scales.sigma_omega
    omegas = _grid(cfg, "selfenergy", scales.omega_0 - span, scales.omega_0 + span)
    ctx.csv("selfenergy.csv", SIGMA_COLUMNS, sigma_rows(omegas, params, scales, profile, broadening))


def _bracket(cfg):
    lo = cfg.require("dispersion.bracket_lo")
    hi = cfg.require("dispersion.bracket_hi")
    if not hi > lo:
        raise ConfigurationError("dispersion.bracket_hi must exceed dispersion.bracket_lo", key="dispersion.bracket_hi")
    return lo, hi


def cmd_dispersion(ctx: Context):
    cfg = ctx.cfg
    params = beam_params(cfg)
    scales = beam_scales(cfg, params)
    lo, hi = _bracket(cfg)
    sol = solve_threshold(scales, params, (lo, hi), scan_points=cfg.get("dispersion.scan_points"))
    ctx.json("threshold.json", sol.report())
    omegas = _grid(cfg, "dispersion", lo, hi)
    ctx.csv("dispersion.csv", GAMMA_COLUMNS, gamma_rows(omegas, scales, params, method="gaussian"))


def cmd_pierce(ctx: Context):
    cfg = ctx.cfg
    params = beam_params(cfg)
    m0 = cfg.require("beam.m0")
    cubic = pierce_cubic(m0, params, degenerate=cfg.get("dispersion.degenerate"))
    ctx.json(
        "pierce.json",
        {
            "roots": list(cubic.roots),
            "unstable_root": cubic.unstable_root,
            "growth_rate": cubic.growth_rate,
            "rho_eff": cubic.rho_eff,
            "centers": list(cubic.centers),
            "residuals": list(cubic.residuals),
        },
    )


def cmd_lgk(ctx: Context):
    cfg = ctx.cfg
    params = beam_params(cfg)
    scales = beam_scales(cfg, params)
    point = cfg.get("lgk.expansion_point")
    bracket = None if point is not None else _bracket(cfg)
    lam = complex(cfg.get("lgk.lambda_re"), cfg.get("lgk.lambda_im"))
    p = extract_lgk(scales, params, point, cfg.get("lgk.fd_step"), lam, bracket=bracket)
    payload = {"lgk": p.report(), "canonical": None, "canonical_reason": None}
    try:
        payload["canonical"] = to_canonical(p).report()
    except NonSaturatingError as exc:
        payload["canonical_reason"] = str(exc)
    try:
        payload["stationary_amplitude"] = stationary_amplitude(p)
    except DomainError as exc:
        payload["stationary_amplitude"] = None
        payload["stationary_amplitude_reason"] = str(exc)
    ctx.json("lgk.json", payload)


def _langevin_config(cfg, seed) -> LangevinConfig:
    return LangevinConfig(
        dt=_positive(cfg, "langevin.dt"),
        n_steps=cfg.get("langevin.n_steps"),
        n_traj=cfg.get("langevin.n_traj"),
        seed=cfgmod.derive_seed(seed, "langevin"),
        initial_amplitude=complex(cfg.get("langevin.initial_re"), cfg.get("langevin.initial_im")),
        burn_in_fraction=cfg.get("langevin.burn_in_fraction"),
        scheme=cfg.get("langevin.scheme"),
        thin=cfg.get("langevin.thin"),
        workers=cfg.get("langevin.workers"),
    )


def cmd_langevin(ctx: Context):
    cfg = ctx.cfg
    p = CanonicalLaserParams(cfg.require("langevin.alpha"), cfg.require("langevin.beta"), cfg.require("langevin.d_las"))
    run = _langevin_config(cfg, ctx.seed)
    traj = simulate(p, run)
    n_write = min(max(cfg.get("langevin.write_trajectories"), 0), run.n_traj)
    rows = [(k,) + row for k in range(n_write) for row in traj.to_rows(k)]
    ctx.csv("trajectories.csv", ("traj", "t", "re_a", "im_a"), rows)
    stats = stationary_stats(traj, run.burn_in_fraction)
    echo = {k: v for k, v in sorted(cfg.values.items()) if k.startswith("langevin.")}
    ctx.json("stats.json", {"stats": stats.report(), "config": echo, "stream_seed": run.seed})


def cmd_meanfield(ctx: Context):
    cfg = ctx.cfg
    params = beam_params(cfg)
    omega_eta = cfg.get("meanfield.omega_eta")
    if omega_eta is not None:
        params = BeamParameters(params.eta, params.n_electrons, omega_eta)
    window = (cfg.require("meanfield.m_min"), cfg.require("meanfield.m_max"))
    m0 = cfg.require("beam.m0")
    dt = cfg.get("meanfield.dt")
    if dt is None:
        e_max = float(np.max(mode_energy(np.arange(window[0], window[1] + 1), params)))
        dt = 0.1 / max(e_max, 1.0)
    seed_j = complex(cfg.get("meanfield.seed_bunching_re"), cfg.get("meanfield.seed_bunching_im"))
    mf = MeanFieldConfig(dt, cfg.get("meanfield.n_steps"), window, seed_j, cfg.get("meanfield.record_stride"))
    state = cold_beam_state(m0, window, complex(cfg.get("meanfield.field_re"), cfg.get("meanfield.field_im")), seed_j)
    ctx.csv("meanfield.csv", SERIES_COLUMNS, integrate(state, mf, params).to_rows())


COMMANDS = {
    "selfenergy": cmd_selfenergy,
    "dispersion": cmd_dispersion,
    "pierce": cmd_pierce,
    "lgk": cmd_lgk,
    "langevin": cmd_langevin,
    "meanfield": cmd_meanfield,
}


def _sweep_points(values: dict):
    keys = sorted(values)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(values[k] for k in keys))]


def _point_done(path, coords):
    try:
        with open(path, encoding="utf-8") as fh:
            record = json.load(fh)
    except (OSError, ValueError):
        return None
    record.pop("_header", None)
    if record.get("status") == "ok" and record.get("coords") == coords:
        return record
    return None


def cmd_sweep(ctx: Context, resume: bool = False):
    cfg = ctx.cfg
    command = cfg.require("sweep.command")
    if command not in COMMANDS:
        raise ConfigurationError(f"sweep.command must be one of {sorted(COMMANDS)}, got {command!r}", key="sweep.command")
    values = cfg.values.get("sweep.values")
    if not values:
        raise ConfigurationError("sweep needs at least one 'sweep.<key> = v1, v2' line", key="sweep")
    base = {k: v for k, v in cfg.values.items() if not k.startswith("sweep.")}
    points = _sweep_points(values)

    def run_point(index):
        coords = points[index]
        name = f"point_{index:04d}"
        point_dir = os.path.join(ctx.out, name)
        marker = os.path.join(point_dir, "point.json")
        coords_json = json.loads(json.dumps(coords))
        if resume:
            record = _point_done(marker, coords_json)
            if record is not None:
                return record
        ensure_dir(point_dir)
        sub = Context(cfgmod.Config({**base, **coords}), point_dir, ctx.seed)
        record = {"index": index, "dir": name, "coords": coords_json}
        try:
            COMMANDS[command](sub)
            record.update(status="ok", files=list(sub.files))
        except NumericalError as exc:
            record.update(status="failed", error=str(exc), files=list(sub.files))
        sub.json("point.json", record)
        return record

    workers = max(1, cfg.get("sweep.workers"))
    if workers == 1:
        records = [run_point(i) for i in range(len(points))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run_point, range(len(points))))
    ctx.json("manifest.json", {"command": command, "points": records})
    failed = [r for r in records if r["status"] != "ok"]
    if failed:
        raise NumericalError(f"{len(failed)} of {len(records)} sweep points failed")


def run(subcommand: str, config_path, output_dir, seed=None, resume: bool = False) -> int:
    try:
        if subcommand not in cfgmod.SUBCOMMANDS:
            raise ConfigurationError(f"unknown subcommand {subcommand!r}", key=subcommand)
        values = cfgmod.load(config_path)
        if seed is not None:
            if not 0 <= seed < 2**64:
                raise ConfigurationError("--seed must be a 64-bit unsigned integer", key="seed")
            values["seed"] = seed
        cfg = cfgmod.Config(values)
        ensure_dir(output_dir)
        ctx = Context(cfg, output_dir, cfg.get("seed"))
        if subcommand == "sweep":
            cmd_sweep(ctx, resume)
        else:
            COMMANDS[subcommand](ctx)
    except ConfigurationError as exc:
        msg = str(exc)
        if exc.key and exc.key not in msg:
            msg = f"{exc.key}: {msg}"
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DomainError, FelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="felkeldysh", description="FEL self-energy, dispersion and Langevin toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in cfgmod.SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="key = value config file")
        p.add_argument("--out", default=".", help="output directory (created if missing)")
        p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        p.add_argument("--resume", action="store_true", help="sweep: skip points already completed")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args.command, args.config, args.out, seed=args.seed, resume=args.resume)


if __name__ == "__main__":
    sys.exit(main())
