"""Command-line harness.

    skelhom <subcommand> CONFIG [--seed N] [--out-dir DIR] [--samples N]

Subcommands: norm, approx-eval, converge, w11-failure, degree, kernel-check,
pipeline.  CONFIG is a JSON file (see ``skelhom/configs`` for shipped
examples).  Exit codes: 0 verdict pass, 2 verdict fail, 1 usage or runtime
error.

Grid field-map files for ``norm``/``approx-eval`` (kind "grid") are JSON:
{"kind": "grid", "n": 2, "m": 1, "axes": [[...], ...], "values": [...]} with
``values`` flat row-major (C order), length prod(grid shape) * m.  A binary
variant replaces "values" with {"file": path, "dtype": "<f8"} holding the
same row-major doubles, little-endian.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .errors import ConfigError, SkelhomError
from .experiments import (ExperimentConfig, emit_report, run_convergence,
                          run_degree_demo, run_kernel_verification,
                          run_pipeline, run_w11_failure, select_good_T)
from .extension import extend_skeleton_map
from .fields import FieldMap, grid_field, make_field
from .mesh import Box, MeshSpec
from .metrics import gagliardo_seminorm_p, lp_norm, wsp_distance

PASS_VERDICTS = {"decreasing-to-tolerance", "failure-reproduced",
                 "obstruction-exhibited", "bounded", "pass"}


def load_field(spec: dict) -> FieldMap:
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind == "grid":
        return _load_grid_field(spec)
    n = int(spec.pop("n"))
    return make_field(kind, n, **spec)


def _load_grid_field(spec: dict) -> FieldMap:
    n, m = int(spec["n"]), int(spec["m"])
    axes = [np.asarray(a, dtype=float) for a in spec["axes"]]
    if len(axes) != n:
        raise ConfigError("grid field: len(axes) != n")
    shape = tuple(len(a) for a in axes)
    values = spec["values"]
    if isinstance(values, dict):
        path = values["file"]
        dtype = np.dtype(values.get("dtype", "<f8"))
        flat = np.fromfile(path, dtype=dtype).astype(float)
    else:
        flat = np.asarray(values, dtype=float)
    expected = int(np.prod(shape)) * m
    if flat.size != expected:
        raise ConfigError(
            f"grid field: got {flat.size} values, expected {expected}")
    return grid_field(axes, flat.reshape(shape + (m,)),
                      name=spec.get("name", "grid"))


def cmd_norm(cfg: ExperimentConfig) -> dict:
    """L^p norm and Gagliardo seminorm of the configured field on the inner box."""
    f = load_field(cfg.field_spec or {"kind": "gauss-bump", "n": 2})
    box = cfg.inner_box
    lp = lp_norm(f, box, cfg.p, cfg.quad)
    sem = gagliardo_seminorm_p(f, box, cfg.s, cfg.p, cfg.quad)
    return {"config": cfg.name, "verdict": "pass",
            "rows": [{"eps": 0.0,
                      "lp_norm": lp.value, "lp_std_error": lp.std_error,
                      "seminorm_p": sem.value,
                      "seminorm_std_error": sem.std_error,
                      "diagonal_cutoff": sem.extras["diagonal_cutoff"]}]}


def cmd_approx_eval(cfg: ExperimentConfig) -> dict:
    """Best-of-T extension error for each mesh size (no trend verdict)."""
    f = load_field(cfg.field_spec or {"kind": "gauss-bump", "n": 2})
    rows = []
    for eps in cfg.eps_schedule:
        T, err, _ = select_good_T(
            f, eps, cfg.j, cfg.s, cfg.p, cfg.t_count,
            cfg.quad.with_(seed=cfg.seed + int(round(1000 * eps))),
            inner=cfg.inner_box)
        rows.append({"eps": eps, "T_best": list(T), "min_error_p": err})
    return {"config": cfg.name, "verdict": "pass", "rows": rows}


RUNNERS = {
    "norm": cmd_norm,
    "approx-eval": cmd_approx_eval,
    "converge": lambda cfg: run_convergence(cfg).to_dict(),
    "w11-failure": run_w11_failure,
    "degree": run_degree_demo,
    "kernel-check": run_kernel_verification,
    "pipeline": run_pipeline,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="skelhom",
        description="Homogeneous-extension approximation experiments")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("config", help="JSON experiment config")
        sp.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
        sp.add_argument("--out-dir", default=None,
                        help="report output directory (default: config name "
                             "under ./reports)")
        sp.add_argument("--samples", type=int, default=None,
                        help="override the Monte-Carlo sample count")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.load(args.config)
        if cfg.experiment != args.command:
            raise ConfigError(
                f"config is for experiment {cfg.experiment!r}, "
                f"invoked as {args.command!r}")
        if args.seed is not None:
            cfg.seed = args.seed
        if args.samples is not None:
            if args.samples <= 0:
                raise ConfigError("--samples must be positive")
            cfg.samples = args.samples
        report = RUNNERS[args.command](cfg)
        out_dir = args.out_dir or os.path.join("reports", cfg.name)
        paths = emit_report(report, out_dir, cfg.name)
        verdict = report.get("verdict", "pass")
        print(f"{cfg.name}: verdict={verdict}")
        for p in paths:
            print(f"  wrote {p}")
        return 0 if verdict in PASS_VERDICTS else 2
    except (ConfigError, SkelhomError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
