"""On-disk formats: measurement files, flat ``key = value`` configs, sweep CSVs
and JSON run manifests. Floats are written with 17 significant digits so that
everything round-trips exactly.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import platform
import sys
from pathlib import Path

import numpy as np

from .fracquad import TimeGrid
from .harness import ExperimentConfig, SweepResult
from .inverse import Measurement

__all__ = [
    "MEASUREMENT_HEADER",
    "write_measurement",
    "read_measurement",
    "parse_config_text",
    "read_config",
    "config_from_mapping",
    "write_sweep_csv",
    "read_rate_csv",
    "write_manifest",
    "read_manifest",
    "fmt",
]

MEASUREMENT_HEADER = ("alpha", "T", "N", "x0", "delta_percent", "epsilon", "seed", "g0")


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_measurement(path, meas: Measurement, alpha: float) -> None:
    """Eight ``# key = value`` header lines, then ``N`` lines ``t_n,g(t_n)``."""
    meta = {
        "alpha": alpha,
        "T": meas.grid.T,
        "N": meas.grid.N,
        "x0": meas.x0,
        "delta_percent": meas.delta_percent,
        "epsilon": meas.epsilon,
        "seed": "none" if meas.seed is None else int(meas.seed),
        "g0": meas.g0,
    }
    with open(path, "w", newline="") as fh:
        for key in MEASUREMENT_HEADER:
            v = meta[key]
            fh.write(f"# {key} = {v if isinstance(v, str) else fmt(v)}\n")
        t = meas.grid.t[1:]
        for tn, gn in zip(t, meas.g):
            fh.write(f"{fmt(tn)},{fmt(gn)}\n")


def read_measurement(path) -> tuple[Measurement, float]:
    """Returns the measurement and the ``alpha`` it was generated with."""
    meta, rows = {}, []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition("=")
                meta[key.strip()] = value.strip()
            else:
                rows.append([float(s) for s in line.split(",")])
    missing = [k for k in MEASUREMENT_HEADER if k not in meta]
    if missing:
        raise ValueError(f"{path}: measurement header lacks {', '.join(missing)}")
    grid = TimeGrid(float(meta["T"]), int(meta["N"]))
    data = np.array(rows, dtype=float).reshape(-1, 2)
    if data.shape[0] != grid.N:
        raise ValueError(f"{path}: expected {grid.N} data lines, found {data.shape[0]}")
    if not np.allclose(data[:, 0], grid.t[1:], rtol=0, atol=1e-12 * grid.T):
        raise ValueError(f"{path}: time column does not match T={grid.T}, N={grid.N}")
    seed = None if meta["seed"] == "none" else int(meta["seed"])
    meas = Measurement(
        grid, float(meta["x0"]), data[:, 1], float(meta["g0"]),
        float(meta["epsilon"]), float(meta["delta_percent"]), seed,
    )
    return meas, float(meta["alpha"])


def _field_types():
    skip = ("custom_potential", "problem_data")
    return {f.name: f for f in dataclasses.fields(ExperimentConfig) if f.name not in skip}


def _coerce(key, raw):
    f = _field_types()[key]
    default = f.default
    if isinstance(raw, str):
        raw = raw.strip()
    if key == "seeds":
        if isinstance(raw, (list, tuple)):
            return tuple(int(s) for s in raw)
        return tuple(int(s) for s in str(raw).replace(",", " ").split())
    if key == "rel_tol":
        return None if raw in (None, "", "none", "None") else float(raw)
    if isinstance(default, bool):
        if isinstance(raw, bool):
            return raw
        low = str(raw).lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"{key}: expected a boolean, got {raw!r}")
    if isinstance(default, int):
        v = float(raw)
        if v != int(v):
            raise ValueError(f"{key}: expected an integer, got {raw!r}")
        return int(v)
    if isinstance(default, float):
        return float(raw)
    return str(raw)


def parse_config_text(text: str, extra_keys=()) -> dict:
    """Parse ``key = value`` lines (``#`` starts a comment). Unknown keys raise."""
    allowed = set(_field_types()) | set(extra_keys)
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = (s.strip() for s in line.partition("="))
        if key not in allowed:
            raise KeyError(f"line {lineno}: unknown configuration key {key!r}")
        out[key] = value
    return out


def read_config(path, extra_keys=()) -> dict:
    return parse_config_text(Path(path).read_text(), extra_keys)


def config_from_mapping(values: dict, **kw) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from string or typed values."""
    types = _field_types()
    unknown = set(values) - set(types)
    if unknown:
        raise KeyError(f"unknown configuration key(s): {', '.join(sorted(unknown))}")
    typed = {k: _coerce(k, v) for k, v in values.items()}
    return ExperimentConfig(**typed, **kw)


def write_sweep_csv(path, result: SweepResult) -> None:
    """Header ``<param>,error,rate,...``; extra columns depend on the sweep kind."""
    if result.kind == "iteration_decay":
        cols = ["iteration", "error", "error_omega", "change", "change_omega"]
        keys = ["param", "error", "error_omega", "change", "change_omega"]
    else:
        cols = [result.param_name, "error", "rate", "N", "M", "errors_per_seed", "status"]
        keys = ["param", "error", "rate", "N", "M", "errors", "status"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in result.rows:
            out = []
            for k in keys:
                v = r.get(k)
                if k == "errors":
                    out.append(";".join(fmt(e) for e in v))
                elif isinstance(v, str):
                    out.append(v)
                elif v is None or (isinstance(v, float) and math.isnan(v)):
                    out.append("nan")
                else:
                    out.append(fmt(v))
            w.writerow(out)


def read_rate_csv(path, param_col=None, error_col="error"):
    """First column (or ``param_col``) and ``error_col`` of a sweep CSV."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        param_col = param_col or reader.fieldnames[0]
        params, errors = [], []
        for row in reader:
            params.append(float(row[param_col]))
            errors.append(float(row[error_col]))
    return param_col, np.array(params), np.array(errors)


def environment_versions() -> dict:
    import scipy

    from . import __version__

    return {
        "python": sys.version.split()[0],
        "platform": platform.platform(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "fracipp": __version__,
    }


def write_manifest(path, command: str, params: dict, outputs: list) -> None:
    manifest = {
        "command": command,
        "parameters": params,
        "outputs": [str(o) for o in outputs],
        "versions": environment_versions(),
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def read_manifest(path) -> dict:
    return json.loads(Path(path).read_text())
