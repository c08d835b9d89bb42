"""Command-line runner: ``aniso-lp verify|sweep|demo --config PATH``.

Exit status is 2 for an unreadable or invalid configuration, 1 when any
check fails and 0 otherwise.  Reports are CSV (RFC 4180, UTF-8, header row)
plus a JSON summary carrying ``schema_version``.
"""

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np
import scipy.fft as sfft

from .config import ExperimentConfig
from .exceptions import AnisoLPError
from .fields import SpatialField
from .sobolev import CSV_COLUMNS, SCHEMA_VERSION, diag12_derivative_check
from .suites import (
    Check,
    below,
    measure_marcinkiewicz,
    measure_poisson,
    run_sweep,
    verify_checks,
)

SPREAD_LIMIT = 50.0
DRIFT_LIMIT = 0.05
EXACT_LIMIT = 1e-5
DEMO_SPREAD_LIMIT = 20.0
HIST_BINS = 16


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable({"schema_version": SCHEMA_VERSION, **payload}), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _check_rows(checks):
    return [(c.name, c.value, c.limit, c.passed, c.detail) for c in checks]


def _finish(out, command, checks, extra):
    write_csv(out / f"{command}_checks.csv", ("name", "value", "limit", "passed", "detail"), _check_rows(checks))
    passed = all(c.passed for c in checks)
    write_json(out / f"{command}_summary.json", {
        "command": command,
        "passed": passed,
        "n_checks": len(checks),
        "n_failed": sum(not c.passed for c in checks),
        "checks": [dict(zip(("name", "value", "limit", "passed", "detail"), r)) for r in _check_rows(checks)],
        **extra,
    })
    for c in checks:
        print(c.line())
    return 0 if passed else 1


# --- subcommands ---------------------------------------------------------------


def cmd_verify(cfg, out):
    checks = verify_checks(points=cfg.verify_points, n_fields=min(cfg.seeds, 4))
    return _finish(out, "verify", checks, {"config": cfg.to_dict()})


def _histogram_rows(reports):
    rows = []
    for rep in reports:
        pr = rep.parameters
        r = np.asarray(rep.ratios)
        lo, hi = float(r.min()), float(r.max())
        if hi - lo < 1e-6 * hi:
            # near-constant ratios (the exact cell): give the bins a finite width
            lo, hi = lo * (1 - 1e-6), hi * (1 + 1e-6)
        counts, edges = np.histogram(r, bins=HIST_BINS, range=(lo, hi))
        for c, a, b in zip(counts, edges[:-1], edges[1:]):
            rows.append((rep.theorem_tag, pr["alpha"], pr["p"], pr["beta"], pr["k"], a, b, int(c)))
    return rows


def sweep_checks(reports, refine=True):
    """Spread, drift and exact-cell checks over sweep reports."""
    checks = []
    for rep in reports:
        pr = rep.parameters
        label = f"{rep.theorem_tag} alpha={pr['alpha']} k={pr['k']} p={pr['p']} beta={pr['beta']:.4g}"
        exact = pr.get("construction") == "radial" and pr["p"] == 2.0 and pr["beta"] == 0.0
        if exact:
            checks.append(below(f"{label}: exact spread - 1", rep.spread - 1, EXACT_LIMIT))
        else:
            checks.append(below(f"{label}: spread", rep.spread, SPREAD_LIMIT))
        if refine:
            checks.append(below(f"{label}: refinement drift", rep.refinement_drift, DRIFT_LIMIT))
    return checks


def cmd_sweep(cfg, out):
    G = cfg.group
    betas = tuple(cfg.beta) if cfg.beta is not None else None

    def progress(tag, a, k, construction, sec):
        print(f"cell {tag} alpha={a} k={k} {construction}: {sec:.1f}s", file=sys.stderr)

    reports = run_sweep(cfg.cells(), cfg.family, G, tuple(cfg.p), betas, cfg.refine, progress)
    write_csv(out / "sweep.csv", CSV_COLUMNS, [row for rep in reports for row in rep.rows()])
    write_csv(out / "sweep_histograms.csv",
              ("tag", "alpha", "p", "beta", "k", "bin_lo", "bin_hi", "count"), _histogram_rows(reports))
    checks = sweep_checks(reports, cfg.refine)
    return _finish(out, "sweep", checks, {"config": cfg.to_dict(), "cells": [r.summary() for r in reports]})


def cmd_demo(cfg, out):
    G = cfg.group
    checks = []
    extra = {"config": cfg.to_dict()}
    if np.array_equal(G.P, np.diag([1.0, 2.0])):
        rows = []
        fam = cfg.family
        for s, x in zip(fam.seed_list, fam.samples(G)):
            d = diag12_derivative_check(SpatialField(fam.grid, x), 2.0, None, G)
            rows.append((s, d["A"], d["B"], d["norm_ratio"], d["reconstruction_error"]))
        write_csv(out / "demo_diag12.csv", ("seed", "A", "B", "ratio", "reconstruction_error"), rows)
        ratios = np.array([r[3] for r in rows])
        checks.append(below("diag(1,2): reconstruction error", max(r[4] for r in rows), 1e-10))
        checks.append(below("diag(1,2): ratio spread", ratios.max() / ratios.min(), DEMO_SPREAD_LIMIT))
    else:
        checks.append(Check("diag(1,2): skipped for this dilation matrix", 0.0, 0.0, True))

    # Poisson: the symbol modulus along one ray, and the L2 identity
    t = np.geomspace(1e-2, 1e2, 201)
    x = 2 * math.pi * t
    write_csv(out / "demo_poisson_profile.csv", ("t", "modulus"), zip(t, x * np.exp(-x)))
    po = measure_poisson(n_fields=min(cfg.seeds, 8))
    checks.append(below("Poisson: sup_t modulus - 1/e", po["sup_dev"], 1e-6))
    checks.append(below("Poisson: ||g f|| / ||f|| - 1/2", po["norm_dev"], 1e-5))

    mz = measure_marcinkiewicz(n_fields=min(cfg.seeds, 8))
    checks.append(below("Marcinkiewicz mu: definition vs square route", mz["mu"], 1e-4))
    checks.append(below("Marcinkiewicz nu: definition vs square route", mz["nu"], 1e-4))
    return _finish(out, "demo", checks, extra)


COMMANDS = {"verify": cmd_verify, "sweep": cmd_sweep, "demo": cmd_demo}


def build_parser():
    ap = argparse.ArgumentParser(prog="aniso-lp", description="Anisotropic Littlewood-Paley experiments.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="JSON configuration file")
    ap.add_argument("--output", help="output directory (overrides output_dir)")
    ap.add_argument("--threads", type=int, help="FFT worker threads (fallback: ANISO_LP_THREADS)")
    return ap


def _threads(args, cfg):
    if args.threads is not None:
        return args.threads
    env = os.environ.get("ANISO_LP_THREADS")
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise ValueError(f"ANISO_LP_THREADS must be an integer, got {env!r}") from exc
    return cfg.threads or 1


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.load(args.config)
        threads = _threads(args, cfg)
        if threads < 1:
            raise ValueError("thread count must be positive")
    except (AnisoLPError, ValueError) as exc:
        print(f"aniso-lp: configuration error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.output or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    with sfft.set_workers(threads):
        return COMMANDS[args.command](cfg, out)


if __name__ == "__main__":
    sys.exit(main())
