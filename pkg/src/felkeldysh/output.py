"""Deterministic CSV/JSON writers; floats use round-trip repr."""

from __future__ import annotations

import csv
import json
import os


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def header_line(config_hash: str, seed: int) -> str:
    return f"# config_hash={config_hash} seed={seed}"


def write_csv(path, columns, rows, config_hash: str, seed: int) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(header_line(config_hash, seed) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows([_fmt(v) for v in row] for row in rows)


def _jsonable(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return obj.item()
    return obj


def write_json(path, payload: dict, config_hash: str, seed: int) -> None:
    body = {"_header": {"config_hash": config_hash, "seed": seed}}
    body.update(_jsonable(payload))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(body, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def read_csv_rows(path):
    """Data rows of a file written by :func:`write_csv`, as strings."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(ln for ln in fh if not ln.startswith("#")))
    return rows[1:]


def ensure_dir(path) -> None:
    os.makedirs(path, exist_ok=True)
