"""Run configuration and file output.

Floats go to CSV with 17 significant digits and to JSON via ``repr``; both
round-trip exactly.  JSON keys are sorted so equal data gives equal bytes.
"""

from __future__ import annotations

import csv
import json
import math
import subprocess
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import InvalidParams

CONFIG_KEYS = {
    "lambda": float,
    "rho": float,
    "seed": int,
    "replicas": int,
    "t_max": float,
    "n_steps": int,
    "observe_at": list,
    "bin_width": float,
    "out_dir": str,
    "workers": int,
    "grid": int,
    "box": int,
    "scale": float,
    "criteria": list,
    "transversal": bool,
}


class ConfigError(InvalidParams):
    pass


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    def get(self, key, default=None):
        return self.values.get(key, default)

    def __getitem__(self, key):
        return self.values[key]

    def echo(self) -> dict:
        return dict(sorted(self.values.items()))


def _coerce(key: str, value):
    kind = CONFIG_KEYS[key]
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{key} must be true or false")
        return value
    if kind is list:
        if not isinstance(value, list):
            raise ConfigError(f"{key} must be a list")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(f"{key} must be an integer")
        return int(value)
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(f"{key} must be a finite number")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{key} must be a string")
    return value


def load_config(path: str | None, overrides: dict, defaults: dict) -> RunConfig:
    """Defaults, then the JSON file, then command-line overrides."""
    merged = dict(defaults)
    if path:
        try:
            doc = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file {path} not found") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        unknown = sorted(set(doc) - set(CONFIG_KEYS))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        merged.update(doc)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    values = {k: _coerce(k, v) for k, v in merged.items()}
    for key in ("replicas", "n_steps", "grid", "box", "workers"):
        if key in values and values[key] < 1:
            raise ConfigError(f"{key} must be >= 1")
    for key in ("t_max", "bin_width", "scale"):
        if key in values and not values[key] > 0:
            raise ConfigError(f"{key} must be positive")
    if "observe_at" in values:
        obs = values["observe_at"]
        if not obs or any(isinstance(t, bool) or not isinstance(t, (int, float)) or not t > 0 for t in obs):
            raise ConfigError("observe_at must be a nonempty list of positive times")
        values["observe_at"] = sorted(float(t) for t in obs)
    if "bin_width" in values and values["bin_width"] > 0.5:
        raise ConfigError("bin_width must lie in (0, 0.5]")
    return RunConfig(values)


def fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_json(path: Path, doc) -> None:
    Path(path).write_text(json.dumps(_plain(doc), indent=2, sort_keys=True, allow_nan=False) + "\n")


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "__dataclass_fields__"):
        return {f.name: _plain(getattr(obj, f.name)) for f in fields(obj)}
    if hasattr(obj, "item"):  # numpy scalar
        return _plain(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def version_string() -> str:
    """``git describe`` of the source tree when available, else the package version."""
    from . import __version__

    try:
        out = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__
