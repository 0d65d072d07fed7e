"""Command line entry point.

Subcommands ``forward``, ``gendata``, ``reconstruct``, ``sweep`` and ``rates``.
Parameters come from (lowest to highest precedence) a replayed manifest
(``--manifest``), a flat ``key = value`` file (``--config``) and command-line
flags. Every run writes its CSV plus ``<output>.manifest.json``.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from . import fileio
from .fem1d import assemble, build_mesh
from .forward import solve
from .harness import ExperimentConfig, generate_data, run_reconstruction, run_sweep
from .inverse import add_noise
from .metrics import empirical_rate, fitted_rate

log = logging.getLogger("fracipp")

_CALLABLE_FIELDS = ("custom_potential", "problem_data")
CONFIG_KEYS = [f.name for f in dataclasses.fields(ExperimentConfig) if f.name not in _CALLABLE_FIELDS]
EXTRA_KEYS = ["output", "measurement", "kind", "levels", "workers", "potential_file", "input", "param_col"]
REQUIRED = {
    "forward": ["output"],
    "gendata": ["output"],
    "reconstruct": ["measurement", "output"],
    "sweep": ["kind", "output"],
    "rates": ["input"],
}


class UsageError(Exception):
    pass


def _parser():
    p = argparse.ArgumentParser(prog="fracipp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in REQUIRED:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="flat key = value file")
        sp.add_argument("--manifest", help="replay the parameters of an earlier run")
        sp.add_argument("-v", "--verbose", action="store_true")
        for key in CONFIG_KEYS + EXTRA_KEYS:
            sp.add_argument("--" + key.replace("_", "-"), dest=key, default=None)
    return p


def _gather(args) -> dict:
    values = {}
    if args.manifest:
        manifest = fileio.read_manifest(args.manifest)
        if manifest.get("command") != args.command:
            raise UsageError(
                f"manifest was written by '{manifest.get('command')}', not '{args.command}'"
            )
        values.update(manifest["parameters"])
    if args.config:
        values.update(fileio.read_config(args.config, EXTRA_KEYS))
    for key in CONFIG_KEYS + EXTRA_KEYS:
        v = getattr(args, key)
        if v is not None:
            values[key] = v
    for key in REQUIRED[args.command]:
        if values.get(key) in (None, ""):
            raise UsageError(f"missing required key '{key}'")
    return values


def _split(values):
    cfg = {k: v for k, v in values.items() if k in CONFIG_KEYS}
    extra = {k: v for k, v in values.items() if k in EXTRA_KEYS}
    return cfg, extra


def _custom(extra):
    path = extra.get("potential_file")
    if not path:
        return None
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    t, r = data[:, 0], data[:, 1]
    return lambda s: float(np.interp(s, t, r))


def _config(cfg_values, extra, **overrides) -> ExperimentConfig:
    cfg_values = {**cfg_values, **overrides}
    return fileio.config_from_mapping(cfg_values, custom_potential=_custom(extra))


def _params(cfg: ExperimentConfig, extra: dict) -> dict:
    out = cfg.to_dict()
    out.update({k: v for k, v in extra.items() if v is not None})
    return out


def _manifest_path(output) -> Path:
    return Path(str(output) + ".manifest.json")


def cmd_forward(cfg_values, extra):
    cfg = _config(cfg_values, extra)
    grid = cfg.run_grid()
    mesh = build_mesh(cfg.M)
    traj = solve(mesh, assemble(mesh), grid, cfg.alpha, cfg.true_path(grid), cfg.problem(),
                 source=cfg.source)
    trace = traj.at_point(cfg.x0)
    out = Path(extra["output"])
    with open(out, "w") as fh:
        fh.write("t,u_x0\n")
        for t, u in zip(grid.t, trace):
            fh.write(f"{fileio.fmt(t)},{fileio.fmt(u)}\n")
    return cfg, [out]


def cmd_gendata(cfg_values, extra):
    cfg = _config(cfg_values, extra)
    meas = generate_data(cfg)
    if cfg.delta_percent > 0:
        meas = add_noise(meas.g, cfg.delta_percent, cfg.seeds[0], grid=meas.grid, x0=cfg.x0, g0=meas.g0)
    out = Path(extra["output"])
    fileio.write_measurement(out, meas, cfg.alpha)
    return cfg, [out]


def cmd_reconstruct(cfg_values, extra):
    meas, alpha = fileio.read_measurement(extra["measurement"])
    for key, value in (("alpha", alpha), ("T", meas.grid.T), ("N", meas.grid.N), ("x0", meas.x0)):
        given = cfg_values.get(key)
        if given is not None and float(given) != float(value):
            raise UsageError(f"{key}={given} conflicts with the measurement file ({value})")
    cfg = _config(cfg_values, extra, alpha=alpha, T=meas.grid.T, N=meas.grid.N, x0=meas.x0,
                  delta_percent=meas.delta_percent)
    rep = run_reconstruction(cfg, meas)
    out = Path(extra["output"])
    truth = cfg.true_path(meas.grid).values
    with open(out, "w") as fh:
        fh.write("t,rho_star,rho_true\n")
        for t, r, q in zip(meas.grid.t[1:], rep.rho_star.values, truth):
            fh.write(f"{fileio.fmt(t)},{fileio.fmt(r)},{fileio.fmt(q)}\n")
    it_out = Path(str(out) + ".iterations.csv")
    with open(it_out, "w") as fh:
        fh.write("iteration,change,change_omega,error,error_omega\n")
        for k in range(rep.iterations_used):
            fh.write(",".join([str(k + 1)] + [fileio.fmt(v) for v in (
                rep.change_lp[k], rep.change_lp_omega[k], rep.error_lp[k + 1], rep.error_lp_omega[k + 1]
            )]) + "\n")
    if not rep.converged:
        log.warning("reconstruction stopped at max_iters=%d without meeting rel_tol", cfg.max_iters)
    return cfg, [out, it_out]


def cmd_sweep(cfg_values, extra):
    cfg = _config(cfg_values, extra)
    levels = None
    if extra.get("levels"):
        raw = extra["levels"]
        items = raw if isinstance(raw, list) else str(raw).replace(",", " ").split()
        levels = [float(s) if "." in str(s) else int(s) for s in items]
    workers = int(extra.get("workers") or 1)
    result = run_sweep(str(extra["kind"]), cfg, levels=levels, workers=workers)
    out = Path(extra["output"])
    fileio.write_sweep_csv(out, result)
    failed = [r for r in result.rows if r.get("status") != "ok"]
    for r in failed:
        log.error("row %s: %s", r["param"], r["status"])
    return cfg, [out]


def cmd_rates(cfg_values, extra):
    name, params, errors = fileio.read_rate_csv(extra["input"], extra.get("param_col"))
    order = np.argsort(-params)
    params, errors = params[order], errors[order]
    rates = empirical_rate(params, errors)
    lines = [f"{name},error,rate"]
    lines.append(f"{fileio.fmt(params[0])},{fileio.fmt(errors[0])},nan")
    for p, e, r in zip(params[1:], errors[1:], rates):
        lines.append(f"{fileio.fmt(p)},{fileio.fmt(e)},{fileio.fmt(r)}")
    text = "\n".join(lines) + "\n"
    if extra.get("output"):
        Path(extra["output"]).write_text(text)
    sys.stdout.write(text)
    sys.stdout.write(f"# least-squares rate: {fitted_rate(params, errors):.6f}\n")
    return None, [Path(extra["output"])] if extra.get("output") else []


COMMANDS = {
    "forward": cmd_forward,
    "gendata": cmd_gendata,
    "reconstruct": cmd_reconstruct,
    "sweep": cmd_sweep,
    "rates": cmd_rates,
}


def cli_main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        values = _gather(args)
        cfg_values, extra = _split(values)
        cfg, outputs = COMMANDS[args.command](cfg_values, extra)
    except (UsageError, KeyError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        print(f"fracipp {args.command}: error: {msg}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, OSError, np.linalg.LinAlgError) as exc:
        print(f"fracipp {args.command}: error: {exc}", file=sys.stderr)
        return 1
    if cfg is not None:
        fileio.write_manifest(_manifest_path(extra["output"]), args.command,
                              _params(cfg, extra), outputs)
    return 0


def main():
    sys.exit(cli_main())
