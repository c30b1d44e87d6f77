"""Command-line driver: JSON configs in, JSON or CSV out.

Config documents look like::

    {"schema": "qmem/1",
     "defaults": {"code": "five", "p_e": 0.002, "n_runs": 1000000},
     "channels": [{"label": "theta", "code": "physical_qubit"},
                  {"label": "phi1", "m": 1}],
     "tau_grid": [0.1, 0.2]}

Channel keys are the ``ExperimentConfig`` fields, with the noise fields
(``T``, ``p_e``, ``env_kind``) given flat.  ``p_e_grid`` expands every channel
over several gate error rates.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from dataclasses import fields
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .dense import OracleUnavailable
from .exact import exact_guess_probabilities, powerful_bob
from .noise import NoiseParams
from .protocol import ExperimentConfig, estimate_integrity, evaluate_milestones, interruption_sweep
from .tableau import ConfigurationError

SCHEMA = "qmem/1"
DEFAULT_RUNS = 1_000_000
FAST_RUNS = 100_000
NOISE_KEYS = ("T", "p_e", "env_kind")
CONFIG_KEYS = tuple(f.name for f in fields(ExperimentConfig) if f.name != "noise")
DOC_KEYS = ("schema", "description", "defaults", "channels", "channel", "tau_grid", "p_e_grid", "interrupt_grid")

EXIT_OK, EXIT_CONFIG, EXIT_ORACLE = 0, 2, 3


def fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def channel_from_dict(d: dict) -> ExperimentConfig:
    unknown = [k for k in d if k not in CONFIG_KEYS and k not in NOISE_KEYS]
    if unknown:
        raise ConfigurationError(f"{unknown[0]}: unknown key; valid: {', '.join(CONFIG_KEYS + NOISE_KEYS)}")
    kw = {k: v for k, v in d.items() if k in CONFIG_KEYS}
    if "axes" in kw:
        kw["axes"] = tuple(kw["axes"])
    if "seed" in kw and (not isinstance(kw["seed"], int) or kw["seed"] < 0):
        raise ConfigurationError(f"seed: must be a non-negative integer, got {kw['seed']!r}")
    kw["noise"] = NoiseParams(**{k: d[k] for k in NOISE_KEYS if k in d})
    try:
        return ExperimentConfig(**kw)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from None


def config_hash(cfg: ExperimentConfig) -> str:
    blob = json.dumps(cfg.to_dict(), sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def load_document(path: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigurationError(f"config: cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigurationError("config: top level must be an object")
    if doc.get("schema") != SCHEMA:
        raise ConfigurationError(f"schema: expected {SCHEMA!r}, got {doc.get('schema')!r}")
    unknown = [k for k in doc if k not in DOC_KEYS]
    if unknown:
        raise ConfigurationError(f"{unknown[0]}: unknown top-level key; valid: {', '.join(DOC_KEYS)}")
    return doc


def expand_channels(doc: dict, args) -> list[ExperimentConfig]:
    """Channel configs with defaults, p_e expansion and command-line overrides."""
    defaults = dict(doc.get("defaults", {}))
    raw = doc.get("channels")
    if raw is None and "channel" in doc:
        raw = [doc["channel"]]
    if raw is None:
        raw = [{}]
    if not isinstance(raw, list):
        raise ConfigurationError("channels: must be a list")
    p_grid = doc.get("p_e_grid")
    out = []
    for i, ch in enumerate(raw):
        base = {**defaults, **ch}
        base.setdefault("label", f"channel{i}")
        variants = [base]
        if p_grid is not None:
            variants = [{**base, "p_e": p, "label": f"{base['label']}@p_e={fmt(float(p))}"} for p in p_grid]
        for v in variants:
            if args.runs is not None:
                v["n_runs"] = args.runs
            elif args.fast:
                v["n_runs"] = FAST_RUNS
            else:
                v.setdefault("n_runs", DEFAULT_RUNS)
            if args.seed is not None:
                v["seed"] = args.seed
            out.append(channel_from_dict(v))
    if not out:
        raise ConfigurationError("channels: must not be empty")
    return out


def _grid(doc: dict, key: str, default=None) -> list[float]:
    g = doc.get(key, default)
    if g is None:
        raise ConfigurationError(f"{key}: required for this command")
    if not isinstance(g, list) or not g:
        raise ConfigurationError(f"{key}: must be a non-empty list")
    try:
        return [float(v) for v in g]
    except (TypeError, ValueError):
        raise ConfigurationError(f"{key}: entries must be numbers") from None


def _csv(header: Sequence[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


# -- commands ---------------------------------------------------------------
def cmd_integrity(doc: dict, args) -> tuple[str, list]:
    chans = expand_channels(doc, args)
    if len(chans) != 1:
        raise ConfigurationError("channels: integrity takes exactly one channel")
    cfg = chans[0]
    est = estimate_integrity(cfg, args.threads)
    return json.dumps(est.to_dict(), indent=2) + "\n", [(config_hash(cfg), est.to_dict())]


SWEEP_HEADER = ["channel_label", "tau_over_T", "R_hat", "ci_low", "ci_high", "n_runs", "seed"]


def cmd_sweep(doc: dict, args) -> tuple[str, list]:
    chans = expand_channels(doc, args)
    grid = _grid(doc, "tau_grid")
    rows, points = [], []
    for cfg in chans:
        for t in grid:
            c = cfg.with_(tau=t)
            e = estimate_integrity(c, args.threads)
            rows.append([cfg.label, t, e.R_hat, e.ci_low, e.ci_high, e.n_runs, e.seed])
            points.append((config_hash(c), e.to_dict()))
    return _csv(SWEEP_HEADER, rows), points


def cmd_interruption(doc: dict, args) -> tuple[str, list]:
    chans = expand_channels(doc, args)
    grid = _grid(doc, "interrupt_grid")
    header = ["channel_label", "tau_over_T", "interrupt_t_over_T", "R_hat", "ci_low", "ci_high", "n_runs", "seed"]
    rows, points = [], []
    for cfg in chans:
        for t, e in interruption_sweep(cfg, grid, args.threads):
            rows.append([cfg.label, cfg.tau, t, e.R_hat, e.ci_low, e.ci_high, e.n_runs, e.seed])
            points.append((config_hash(cfg), {"interrupt_t": t, **e.to_dict()}))
    return _csv(header, rows), points


def cmd_milestones(doc: dict, args) -> tuple[str, list]:
    if not doc.get("channels"):
        raise ConfigurationError("channels: milestone family must not be empty")
    chans = expand_channels(doc, args)
    report = evaluate_milestones(chans, _grid(doc, "tau_grid"), args.threads)
    d = report.to_dict()
    return json.dumps(d, indent=2) + "\n", [(config_hash(c), c.label) for c in chans]


def cmd_oracle_compare(doc: dict, args) -> tuple[str, list]:
    chans = expand_channels(doc, args)
    grid = _grid(doc, "tau_grid", [None])
    header = ["channel_label", "tau_over_T", "R_hat", "ci_low", "ci_high", "R_exact", "p_g_exact", "p_B",
              "n_runs", "seed"]
    rows, points = [], []
    for cfg in chans:
        for t in grid:
            c = cfg if t is None else cfg.with_(tau=t)
            pg = exact_guess_probabilities(c)
            pg_worst = min(pg[a] for a in c.axes)
            p_b = min(powerful_bob(c, a) for a in c.axes)
            e = estimate_integrity(c, args.threads)
            rows.append([c.label, c.tau, e.R_hat, e.ci_low, e.ci_high, 2 * pg_worst - 1, pg_worst, p_b,
                         e.n_runs, e.seed])
            points.append((config_hash(c), {"R_exact": 2 * pg_worst - 1, "p_B": p_b, **e.to_dict()}))
    return _csv(header, rows), points


COMMANDS = {
    "integrity": cmd_integrity,
    "sweep": cmd_sweep,
    "interruption": cmd_interruption,
    "milestones": cmd_milestones,
    "oracle-compare": cmd_oracle_compare,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qmem", description="Integrity of error-corrected quantum memories.")
    p.add_argument("--version", action="version", version=f"qmem {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, help="JSON config document")
        s.add_argument("--seed", type=int, help="master seed for every channel")
        s.add_argument("--runs", type=int, help="trials per point")
        s.add_argument("--threads", type=int, help="worker threads (results do not depend on it)")
        s.add_argument("--out", help="output file; a .manifest.json is written beside it")
        s.add_argument("--fast", action="store_true", help=f"use {FAST_RUNS} trials per point")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    start = time.time()
    try:
        if args.runs is not None and args.runs <= 0:
            raise ConfigurationError(f"runs: must be positive, got {args.runs}")
        if args.threads is not None and args.threads <= 0:
            raise ConfigurationError(f"threads: must be positive, got {args.threads}")
        doc = load_document(args.config)
        text, points = COMMANDS[args.command](doc, args)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OracleUnavailable as exc:
        print(f"oracle unavailable: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    if args.out:
        Path(args.out).write_text(text)
        manifest = {
            "tool": "qmem",
            "version": __version__,
            "command": args.command,
            "config": doc,
            "seed_override": args.seed,
            "wall_time_s": time.time() - start,
            "points": [{"config_hash": h, "result": r} for h, r in points],
        }
        Path(args.out + ".manifest.json").write_text(json.dumps(manifest, indent=2, default=str) + "\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
