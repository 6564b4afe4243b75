"""Command line entry point ``tridiag-edge``.

Output schemas (one row or JSON object per record)::

    spectrum        trial, rank, value
    tail            lambda, trials, hits, p_hat, ci_low, ci_high, theory, theory_literal, regime
    distribution    trial, value
    pointprocess    trial, rank, value
    spike-sweep     M, predicted, computed, abs_err
    rate            lambda, rate_H, rate_G, f_lambda
    coupling-check  trial, d2_spectral, hw_bound, ok

CSV files start with a ``# schema=... seed=... stream_ids=...`` comment
line; JSONL files start with a header object carrying the same fields.
Floats are written with 17 significant digits. Each run also writes
``<out>.manifest.json`` with the full configuration, package version and
wall time. Exit status: 0 on success, 2 for configuration errors, 1 for
runtime failures; diagnostics go to stderr only on failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import COMMANDS, COMMAND_KEYS, COMMON_KEYS, ConfigError, RunConfig, build_config, config_items, parse_config
from .experiments import (
    coupling_bound_check,
    extract_point_processes,
    mc_distribution,
    mc_tail,
    planted_spike_sweep,
    scale_power,
)
from .experiments.montecarlo import g_trial_top
from .laws import RandomStream
from .models import ModelKind, ModelSpec, build_G_dense
from .theory import f_of_lambda, rate_G, rate_H
from .tridiag import TridiagonalMatrix, top_k_eigenvalues

__all__ = ["main", "run"]

SCHEMA_VERSION = 1
COLUMNS = {
    "spectrum": ("trial", "rank", "value"),
    "tail": ("lambda", "trials", "hits", "p_hat", "ci_low", "ci_high", "theory", "theory_literal", "regime"),
    "distribution": ("trial", "value"),
    "pointprocess": ("trial", "rank", "value"),
    "spike-sweep": ("M", "predicted", "computed", "abs_err"),
    "rate": ("lambda", "rate_H", "rate_G", "f_lambda"),
    "coupling-check": ("trial", "d2_spectral", "hw_bound", "ok"),
}


def _spec(cfg: RunConfig) -> ModelSpec:
    return ModelSpec(cfg.model, cfg.N, cfg.alpha, cfg.law, RandomStream(cfg.seed), cfg.beta_ens)


def _spectrum(cfg):
    spec = _spec(cfg).for_trial(cfg.trial)
    k = min(cfg.top_d, cfg.N)
    if spec.kind is ModelKind.H:
        vals = top_k_eigenvalues(TridiagonalMatrix(spec.potentials(), np.ones(cfg.N - 1)), k)
    elif cfg.N <= 2000:
        vals = np.linalg.eigvalsh(build_G_dense(spec))[::-1][:k]
    else:
        vals = g_trial_top(spec, k)
    return [(cfg.trial, r + 1, float(v)) for r, v in enumerate(vals)]


def _tail(cfg):
    r = mc_tail(_spec(cfg), cfg.lam, cfg.trials, cfg.workers)
    return [(r.lam, r.trials, r.hits, r.p_hat, r.ci_low, r.ci_high, r.theory, r.theory_literal, str(r.regime))]


def _distribution(cfg):
    spec = _spec(cfg)
    power = scale_power(spec) if cfg.power is None else cfg.power
    vals = mc_distribution(spec, cfg.trials, power, cfg.workers)
    return [(t, float(v)) for t, v in enumerate(vals)]


def _pointprocess(cfg):
    samples = extract_point_processes(_spec(cfg), cfg.trials, min(cfg.top_d, cfg.N), cfg.threshold, cfg.workers)
    return [(t, r + 1, float(v)) for t, s in enumerate(samples) for r, v in enumerate(s.points)]


def _spike_sweep(cfg):
    model = "H" if cfg.model == "H" else "G"
    rows = planted_spike_sweep(cfg.N, cfg.M_grid, model, RandomStream(cfg.seed))
    return [(r.M, r.predicted, r.computed, r.abs_err) for r in rows]


def _rate(cfg):
    tail = cfg.law.right_tail
    if tail is None:
        raise ConfigError("rate needs a law with a right tail", "law")
    C, beta = tail
    return [(x, rate_H(x, C, beta), rate_G(x, C, beta), f_of_lambda(x)) for x in cfg.lambda_grid]


def _coupling(cfg):
    spec = _spec(cfg)
    out = []
    for t in range(cfg.trials):
        rep = coupling_bound_check(spec.for_trial(t))
        out.append((t, rep.d2_spectral, rep.hw_bound, rep.ok))
    return out


HANDLERS = {
    "spectrum": _spectrum,
    "tail": _tail,
    "distribution": _distribution,
    "pointprocess": _pointprocess,
    "spike-sweep": _spike_sweep,
    "rate": _rate,
    "coupling-check": _coupling,
}


def _stream_ids(cfg: RunConfig) -> str:
    if cfg.command == "spectrum":
        return str(cfg.trial)
    if cfg.command in ("tail", "distribution", "pointprocess", "coupling-check"):
        return f"0-{cfg.trials - 1}"
    return "0"


def _num(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g") if math.isfinite(v) else "null"
    return json.dumps(v)


def _csv_cell(v) -> str:
    s = _num(v)
    if any(c in s for c in ',"\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def format_records(cfg: RunConfig, rows) -> str:
    cols = COLUMNS[cfg.command]
    schema = f"tridiag-edge/{cfg.command}/{SCHEMA_VERSION}"
    if cfg.format == "csv":
        lines = [f"# schema={schema} seed={cfg.seed} stream_ids={_stream_ids(cfg)}", ",".join(cols)]
        lines += [",".join(_csv_cell(v) for v in row) for row in rows]
    else:
        head = {"schema": schema, "seed": cfg.seed, "stream_ids": _stream_ids(cfg), "columns": list(cols)}
        lines = [json.dumps(head)]
        lines += ["{" + ", ".join(f"{json.dumps(c)}: {_json_value(v)}" for c, v in zip(cols, row)) + "}" for row in rows]
    return "\n".join(lines) + "\n"


def _write_atomic(path: Path, text: str):
    tmp = path.with_name(path.name + ".partial")
    try:
        tmp.write_text(text)
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


def run(cfg: RunConfig) -> list[Path]:
    """Execute ``cfg``; returns the files written (data file, manifest)."""
    start = time.perf_counter()
    rows = HANDLERS[cfg.command](cfg)
    text = format_records(cfg, rows)
    out = Path(cfg.output_path)
    manifest = out.with_name(out.name + ".manifest.json")
    _write_atomic(out, text)
    try:
        info = {
            "version": __version__,
            "command": cfg.command,
            "config": dict(config_items(cfg)),
            "data_file": out.name,
            "wall_time_s": time.perf_counter() - start,
            "finished_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        }
        _write_atomic(manifest, json.dumps(info, indent=2) + "\n")
    except BaseException:
        out.unlink(missing_ok=True)
        raise
    return [out, manifest]


def _flag(key: str) -> str:
    return "--" + key.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tridiag-edge", description="Edge eigenvalue experiments for tridiagonal operators.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        sp = sub.add_parser(cmd)
        sp.add_argument("--config", help="INI file with a [%s] section" % cmd)
        for key in COMMON_KEYS + COMMAND_KEYS[cmd]:
            sp.add_argument(_flag(key), dest="opt_" + key, metavar=key.upper(), help=f"override '{key}'")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cmd = args.command
    try:
        values: dict[str, str] = {}
        if args.config:
            text = Path(args.config).read_text()
            base = parse_config(text, cmd)
            values = dict(config_items(base))
        for key in COMMON_KEYS + COMMAND_KEYS[cmd]:
            v = getattr(args, "opt_" + key)
            if v is not None:
                values[key] = v
        cfg = build_config(cmd, values)
    except ConfigError as exc:
        print(f"tridiag-edge: config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"tridiag-edge: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        run(cfg)
    except ConfigError as exc:
        print(f"tridiag-edge: config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"tridiag-edge: {cmd} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
