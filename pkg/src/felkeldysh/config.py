"""Flat ``key = value`` run configuration."""

from __future__ import annotations

import hashlib

from .errors import ConfigurationError

# key -> (type, default); default None means the key is optional without a
# value, REQUIRED means the subcommand that reads it cannot run without it.
REQUIRED = object()

SCHEMA = {
    "seed": (int, 0),
    "beam.eta": (float, REQUIRED),
    "beam.n_electrons": (float, REQUIRED),
    "beam.omega_eta": (float, 0.0),
    "beam.m0": (int, None),
    "beam.sigma_m": (float, None),
    "beam.profile": (str, "gaussian"),
    "beam.window_halfwidth": (int, None),
    "beam.m_min": (int, None),
    "beam.m_max": (int, None),
    "selfenergy.omega_min": (float, None),
    "selfenergy.omega_max": (float, None),
    "selfenergy.n_points": (int, 201),
    "selfenergy.epsilon": (float, None),
    "dispersion.bracket_lo": (float, None),
    "dispersion.bracket_hi": (float, None),
    "dispersion.scan_points": (int, 2001),
    "dispersion.omega_min": (float, None),
    "dispersion.omega_max": (float, None),
    "dispersion.n_points": (int, 201),
    "dispersion.degenerate": (bool, False),
    "lgk.expansion_point": (float, None),
    "lgk.fd_step": (float, None),
    "lgk.lambda_re": (float, 1.0),
    "lgk.lambda_im": (float, 0.0),
    "langevin.alpha": (float, None),
    "langevin.beta": (float, None),
    "langevin.d_las": (float, None),
    "langevin.dt": (float, 0.01),
    "langevin.n_steps": (int, 10000),
    "langevin.n_traj": (int, 100),
    "langevin.initial_re": (float, 0.0),
    "langevin.initial_im": (float, 0.0),
    "langevin.burn_in_fraction": (float, 0.2),
    "langevin.scheme": (str, "heun"),
    "langevin.thin": (int, 1),
    "langevin.workers": (int, 1),
    "langevin.write_trajectories": (int, 1),
    "meanfield.m_min": (int, None),
    "meanfield.m_max": (int, None),
    "meanfield.omega_eta": (float, None),
    "meanfield.dt": (float, None),
    "meanfield.n_steps": (int, 1000),
    "meanfield.field_re": (float, 1e-8),
    "meanfield.field_im": (float, 0.0),
    "meanfield.seed_bunching_re": (float, 0.0),
    "meanfield.seed_bunching_im": (float, 0.0),
    "meanfield.record_stride": (int, 1),
    "sweep.command": (str, None),
    "sweep.workers": (int, 1),
}

SUBCOMMANDS = ("selfenergy", "dispersion", "pierce", "lgk", "langevin", "meanfield", "sweep")


def _convert(key: str, kind, text: str):
    try:
        if kind is bool:
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind is int:
            return int(text, 0)
        return kind(text)
    except ValueError:
        raise ConfigurationError(f"{key}: cannot parse {text!r} as {kind.__name__}", key=key) from None


def _split_values(key: str, text: str, kind):
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ConfigurationError(f"{key}: empty value list", key=key)
    return [_convert(key, kind, p) for p in parts]


def parse_text(text: str) -> dict:
    """Parse config text into a typed dict.

    ``sweep.<key> = v1, v2, ...`` lines give the values of ``<key>`` to
    sweep over and are collected under the ``"sweep.values"`` entry.
    """
    out = {}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value'", key=line)
        key, value = (s.strip() for s in line.split("=", 1))
        if key in SCHEMA:
            out[key] = _convert(key, SCHEMA[key][0], value)
        elif key.startswith("sweep.") and key[len("sweep."):] in SCHEMA:
            target = key[len("sweep."):]
            if target.startswith("sweep.") or target == "seed":
                raise ConfigurationError(f"{key}: cannot sweep over {target}", key=key)
            values[target] = _split_values(key, value, SCHEMA[target][0])
        else:
            raise ConfigurationError(f"unknown configuration key {key!r}", key=key)
    if values:
        out["sweep.values"] = values
    return out


def load(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}", key="--config") from None
    return parse_text(text)


class Config:
    """Typed view with defaults; ``require`` names the missing key on failure."""

    def __init__(self, values: dict):
        self.values = dict(values)

    def get(self, key):
        if key in self.values:
            return self.values[key]
        default = SCHEMA[key][1]
        return None if default is REQUIRED else default

    def require(self, key):
        value = self.get(key)
        if value is None:
            raise ConfigurationError(f"missing required configuration key {key}", key=key)
        return value

    def canonical_text(self) -> str:
        lines = []
        for key in sorted(self.values):
            value = self.values[key]
            if key == "sweep.values":
                for k in sorted(value):
                    lines.append(f"sweep.{k} = {', '.join(repr(v) for v in value[k])}")
            else:
                lines.append(f"{key} = {value!r}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_text().encode("utf-8")).hexdigest()[:16]


def derive_seed(seed: int, label: str) -> int:
    """Stable 64-bit sub-seed for a labelled component."""
    h = hashlib.sha256(f"{int(seed)}:{label}".encode("utf-8")).digest()
    return int.from_bytes(h[:8], "little")
