"""Experiment drivers: translation selection, convergence studies, the
W^{1,1} failure reproduction, degree demos, kernel-bound verification, and
deterministic report emission (JSON + CSV + plot-ready two-column files)."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.integrate import dblquad

from .errors import ConfigError
from .extension import extend_skeleton_map, extension_values
from .fields import FieldMap, make_field
from .manifolds import (circle_points, sphere_target, target_from_config,
                        winding_number)
from .mesh import Box, MeshSpec, cube_index
from .metrics import QuadratureSpec, verify_kernel_bound, wsp_distance
from .util import rng_for


@dataclass
class ExperimentConfig:
    """One experiment run, loadable from a JSON file."""
    experiment: str
    name: str = "experiment"
    field_spec: dict = None
    s: float = 0.5
    p: float = 2.0
    j: int = 1
    eps_schedule: tuple = (0.4, 0.2, 0.1, 0.05)
    t_count: int = 32
    samples: int = 20_000
    seed: int = 0
    diagonal_cutoff: float = 0.0
    inner: Optional[list] = None            # [[lo, hi], ...]
    target: Optional[dict] = None
    tolerance: float = 0.5
    stages: int = 2
    circle_radius: float = 0.9
    circle_samples: int = 1024
    kernel_grid: list = field(default_factory=lambda: [
        [2, 1, 0.5, 2.0], [3, 1, 0.6, 2.0]])
    kernel_pairs: int = 100
    kernel_quadrature: int = 16
    with_fractional_comparison: bool = False

    KNOWN = ("norm", "approx-eval", "converge", "w11-failure", "degree",
             "kernel-check", "pipeline")

    def __post_init__(self):
        if self.experiment not in self.KNOWN:
            raise ConfigError(f"unknown experiment {self.experiment!r}; "
                              f"known: {self.KNOWN}")
        eps = tuple(float(e) for e in self.eps_schedule)
        if any(e <= 0 for e in eps) or any(a <= b for a, b in zip(eps, eps[1:])):
            raise ConfigError("eps schedule must be positive and strictly decreasing")
        self.eps_schedule = eps
        if self.experiment in ("converge", "pipeline", "norm", "approx-eval"):
            if not 0.0 < self.s < 1.0:
                raise ConfigError(
                    "hypothesis 0 < s < 1 violated (Gagliardo seminorm)")
            if self.experiment == "converge" and not self.s * self.p < self.j + 1:
                raise ConfigError(
                    f"hypothesis sp < j+1 violated: sp={self.s * self.p}, "
                    f"j={self.j}")

    @property
    def quad(self) -> QuadratureSpec:
        return QuadratureSpec(samples=self.samples, seed=self.seed,
                              diagonal_cutoff=self.diagonal_cutoff)

    @property
    def inner_box(self) -> Box:
        if self.inner is None:
            n = self.field_spec.get("n", 2) if self.field_spec else 2
            return Box((0.0,) * n, (1.0,) * n)
        return Box([p[0] for p in self.inner], [p[1] for p in self.inner])

    def build_field(self) -> FieldMap:
        spec = dict(self.field_spec or {"kind": "gauss-bump", "n": 2})
        kind = spec.pop("kind")
        n = int(spec.pop("n"))
        return make_field(kind, n, **spec)

    def build_target(self):
        if self.target is None:
            return None
        return target_from_config(self.target)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        d = json.loads(text)
        known = {"experiment", "name", "field", "s", "p", "j", "eps", "t_count",
                 "samples", "seed", "diagonal_cutoff", "inner", "target",
                 "tolerance", "stages", "circle_radius", "circle_samples",
                 "kernel_grid", "kernel_pairs", "kernel_quadrature",
                 "with_fractional_comparison"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        kw = {}
        rename = {"field": "field_spec", "eps": "eps_schedule"}
        for key, val in d.items():
            kw[rename.get(key, key)] = val
        return cls(**kw)

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                return cls.from_json(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}")


@dataclass
class ConvergenceReport:
    rows: List[dict]
    verdict: str
    config_name: str

    def to_dict(self) -> dict:
        return {"config": self.config_name, "rows": self.rows,
                "verdict": self.verdict}


def _mesh_for(inner: Box, T, eps: float, margin_factor: float = 2.0) -> MeshSpec:
    margin = margin_factor * eps
    bounds = Box(tuple(l - margin for l in inner.lo),
                 tuple(h + margin for h in inner.hi))
    return MeshSpec(T=tuple(T), eps=eps, n=inner.n, bounds=bounds)


def select_good_T(f: FieldMap, eps: float, j: int, s: float, p: float,
                  count: int, quad: QuadratureSpec, inner: Box = None,
                  bounds: Box = None):
    """Sample translations T uniformly in Q_eps and keep the one minimizing
    the estimated ||f - f_{T,eps}||^p_{W^{s,p}} over the inner box.

    Returns (T_best, best error, all per-T sample dicts).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if inner is None:
        inner = Box((0.0,) * f.n, (1.0,) * f.n)
    rng = rng_for(quad.seed, "select-T", eps)
    Ts = rng.uniform(-eps, eps, size=(count, f.n))
    rows = []
    best = None
    for i, T in enumerate(Ts):
        if bounds is None:
            mesh = _mesh_for(inner, T, eps)
        else:
            mesh = MeshSpec(T=tuple(T), eps=eps, n=f.n, bounds=bounds)
        f_ext = extend_skeleton_map(f, mesh, j, m=f.m)
        rep = wsp_distance(f, f_ext, inner, s, p, quad.with_(seed=quad.seed + i))
        rows.append({"T": [float(v) for v in T], "error_p": rep.value,
                     "std_error": rep.std_error})
        if best is None or rep.value < best[1]:
            best = (tuple(float(v) for v in T), rep.value, rep.std_error)
    return best[0], best[1], rows


def run_convergence(cfg: ExperimentConfig) -> ConvergenceReport:
    """Mesh-size sweep of the best-of-T extension error (Theorem-style trend).

    Verdict "decreasing-to-tolerance" iff the min-error is nonincreasing
    within one combined standard error across consecutive mesh sizes and the
    final min-error is below tolerance times the initial one.
    """
    f = cfg.build_field()
    inner = cfg.inner_box
    rows = []
    for eps in cfg.eps_schedule:
        T, err, samples = select_good_T(
            f, eps, cfg.j, cfg.s, cfg.p, cfg.t_count,
            cfg.quad.with_(seed=cfg.seed + int(round(1000 * eps))),
            inner=inner)
        errors = np.array([r["error_p"] for r in samples])
        ses = np.array([r["std_error"] for r in samples])
        rows.append({
            "eps": eps,
            "T_best": list(T),
            "min_error_p": float(np.min(errors)),
            "mean_error_p": float(np.mean(errors)),
            "std_over_T": float(np.std(errors)),
            "min_std_error": float(ses[int(np.argmin(errors))]),
            "t_count": cfg.t_count,
        })
    verdict = trend_verdict([r["min_error_p"] for r in rows],
                            [r["min_std_error"] for r in rows],
                            cfg.tolerance)
    return ConvergenceReport(rows=rows, verdict=verdict, config_name=cfg.name)


def trend_verdict(values, std_errors, tolerance: float) -> str:
    values = list(values)
    nonincreasing = all(
        b <= a + (sa + sb)
        for a, b, sa, sb in zip(values, values[1:], std_errors, std_errors[1:]))
    if nonincreasing and values[-1] < tolerance * values[0]:
        return "decreasing-to-tolerance"
    if values[-1] >= values[0]:
        return "non-decreasing"
    return "inconclusive"


def c_star_oracle() -> float:
    """mean of |x1| / ||x||_2 over [-1,1]^2 by adaptive 2D quadrature.

    This is the per-cube radial-derivative mismatch of the 1-homogeneous
    extension of u(x) = x1; scale-invariant, so one reference cube suffices.
    """
    def integrand(y, x):
        r = np.hypot(x, y)
        return x / r if r > 0.0 else 0.0     # bounded; origin is measure zero

    # sign symmetry: quadrant integral times 4
    val, _ = dblquad(integrand, 0.0, 1.0, 0.0, 1.0)
    return val


def covered_area(mesh: MeshSpec, inner: Box) -> float:
    """Total area of mesh cubes entirely inside the inner box."""
    n = mesh.n
    lo = cube_index(inner.lo_arr[None, :] + 1e-12, mesh)[0]
    hi = cube_index(inner.hi_arr[None, :] - 1e-12, mesh)[0]
    count = 1
    for i in range(n):
        lo_i, hi_i = int(lo[i]), int(hi[i])
        whole = 0
        for k in range(lo_i, hi_i + 1):
            c = mesh.T[i] + 2.0 * mesh.eps * k
            if c - mesh.eps >= inner.lo[i] - 1e-12 \
                    and c + mesh.eps <= inner.hi[i] + 1e-12:
                whole += 1
        count *= whole
    return count * (2.0 * mesh.eps) ** n


def w11_mismatch_estimate(mesh: MeshSpec, inner: Box,
                          quad: QuadratureSpec) -> float:
    """MC estimate of the radial-derivative mismatch integral for u(x) = x1.

    The 1-homogeneous extension is constant along rays from the cube center,
    so |grad u_T - grad u| >= |V_1| with V the unit ray direction; the
    integral of |V_1| over the inner box is the reported lower bound.
    """
    rng = rng_for(quad.seed, "w11", mesh.T, mesh.eps)
    X = inner.sample(rng, quad.samples)
    centers = mesh.T_arr + 2.0 * mesh.eps * cube_index(X, mesh)
    D = X - centers
    r = np.linalg.norm(D, axis=1)
    ok = r > 1e-12 * mesh.eps
    vals = np.zeros(len(X))
    vals[ok] = np.abs(D[ok, 0]) / r[ok]
    return inner.volume * float(np.mean(vals))


def run_w11_failure(cfg: ExperimentConfig) -> dict:
    """Reproduce the W^{1,1} non-approximation floor for u(x) = x1, n = 2.

    For every (eps, T) the radial mismatch estimate is compared against the
    analytic floor c* times the area covered by whole cubes; the fractional
    comparison reruns the same meshes at (s,p) = (0.4, 2) where the error
    does decay.
    """
    inner = cfg.inner_box
    if inner.n != 2:
        raise ConfigError("W^{1,1} failure experiment is 2-dimensional")
    c_star = c_star_oracle()
    f = make_field("linear-x1", 2)
    rows = []
    frac_rows = []
    for eps in cfg.eps_schedule:
        rng = rng_for(cfg.seed, "w11-T", eps)
        Ts = rng.uniform(-eps, eps, size=(cfg.t_count, 2))
        estimates = []
        frac_errors = []
        cov = None
        for i, T in enumerate(Ts):
            mesh = _mesh_for(inner, T, eps)
            cov = covered_area(mesh, inner)
            est = w11_mismatch_estimate(
                mesh, inner, cfg.quad.with_(seed=cfg.seed + i))
            estimates.append(est)
            if cfg.with_fractional_comparison:
                f_ext = extend_skeleton_map(f, mesh, 1, m=1)
                rep = wsp_distance(f, f_ext, inner, 0.4, 2.0,
                                   cfg.quad.with_(seed=cfg.seed + i))
                frac_errors.append(rep.value)
        estimates = np.array(estimates)
        rows.append({
            "eps": eps,
            "min_estimate": float(np.min(estimates)),
            "mean_estimate": float(np.mean(estimates)),
            "covered_area": cov,
            "floor": c_star * cov,
            "t_count": cfg.t_count,
        })
        if cfg.with_fractional_comparison:
            frac_rows.append({
                "eps": eps,
                "min_error_p": float(np.min(frac_errors)),
                "mean_error_p": float(np.mean(frac_errors)),
            })
    overall_min = min(r["min_estimate"] for r in rows)
    threshold = 0.8 * (c_star / 2.0)
    verdict = "failure-reproduced" if overall_min >= threshold else "not-reproduced"
    out = {
        "config": cfg.name,
        "c_star": c_star,
        "threshold": threshold,
        "min_estimate": overall_min,
        "rows": rows,
        "verdict": verdict,
    }
    if cfg.with_fractional_comparison:
        mins = [r["min_error_p"] for r in frac_rows]
        out["fractional_rows"] = frac_rows
        out["fractional_decreasing"] = bool(
            all(b < a for a, b in zip(mins, mins[1:])))
    return out


def run_degree_demo(cfg: ExperimentConfig) -> dict:
    """Winding numbers of the vortex, a null-homotopic comparison map, and
    the extension of the vortex, on a common circle."""
    n = 2
    vor = make_field("vortex", n)
    smooth = make_field("s1-bump", n)
    eps = cfg.eps_schedule[-1]
    inner = cfg.inner_box
    mesh = _mesh_for(inner, (0.0, 0.0), eps)
    vor_ext = extend_skeleton_map(vor, mesh, 1, m=2)
    radius = cfg.circle_radius
    rows = [
        {"map": "vortex", "winding": winding_number(
            vor, (0.0, 0.0), radius, cfg.circle_samples), "expected": 1},
        {"map": "s1-bump", "winding": winding_number(
            smooth, (0.0, 0.0), radius, cfg.circle_samples), "expected": 0},
        {"map": "extended-vortex", "winding": winding_number(
            vor_ext, (0.0, 0.0), radius, cfg.circle_samples), "expected": 1},
    ]
    verdict = "obstruction-exhibited" if all(
        r["winding"] == r["expected"] for r in rows) else "mismatch"
    return {"config": cfg.name, "eps": eps, "radius": radius,
            "samples": cfg.circle_samples, "rows": rows, "verdict": verdict}


def run_kernel_verification(cfg: ExperimentConfig) -> dict:
    """Sector kernel bound sweep: max ratio per (n,j,s,p) row plus its
    stability when the inner quadrature is refined (nodes doubled per axis)."""
    rows = []
    stable = True
    for n, j, s, p in cfg.kernel_grid:
        n, j = int(n), int(j)
        if not s * p < j + 1:
            raise ConfigError(f"kernel row needs sp < j+1: {(n, j, s, p)}")
        coarse = verify_kernel_bound(n, j, s, p, cfg.kernel_pairs,
                                     seed=cfg.seed, grid=cfg.kernel_quadrature)
        fine = verify_kernel_bound(n, j, s, p, cfg.kernel_pairs,
                                   seed=cfg.seed,
                                   grid=2 * cfg.kernel_quadrature)
        change = abs(fine["max_ratio"] - coarse["max_ratio"]) \
            / coarse["max_ratio"]
        if change >= 0.05:
            stable = False
        rows.append({"n": n, "j": j, "s": s, "p": p,
                     "max_ratio": coarse["max_ratio"],
                     "max_ratio_refined": fine["max_ratio"],
                     "mean_ratio": coarse["mean_ratio"],
                     "relative_change": change,
                     "skipped": coarse["skipped"],
                     "pairs": coarse["pairs"]})
    verdict = "bounded" if stable else "unstable"
    return {"config": cfg.name, "rows": rows, "verdict": verdict,
            "quadrature": cfg.kernel_quadrature}


def run_pipeline(cfg: ExperimentConfig) -> dict:
    """Full mesh-refinement pipeline for an N-valued field (thme-style)."""
    from .pipeline import thme_pipeline

    f = cfg.build_field()
    target = cfg.build_target()
    if target is None:
        raise ConfigError("pipeline experiment needs a target manifold")
    reports = thme_pipeline(f, target, cfg.inner_box, cfg.s, cfg.p,
                            cfg.eps_schedule, t_samples=cfg.t_count,
                            quad=cfg.quad, stages=cfg.stages)
    errors = [r.final_error_p for r in reports]
    verdict = ("decreasing-to-tolerance"
               if errors[-1] < cfg.tolerance * errors[0]
               and all(b <= a * 1.25 for a, b in zip(errors, errors[1:]))
               else ("non-decreasing" if errors[-1] >= errors[0]
                     else "inconclusive"))
    return {"config": cfg.name, "rows": [r.to_dict() for r in reports],
            "verdict": verdict}


def _fmt(v) -> str:
    if isinstance(v, float):
        return "%.12g" % v
    if isinstance(v, (list, tuple)):
        return "[" + " ".join(_fmt(x) for x in v) + "]"
    return str(v)


def report_curves(report: dict) -> dict:
    """Two-column plot series extracted from a report's rows."""
    rows = report.get("rows", [])
    curves = {}
    if not rows:
        return curves
    ycols = [k for k in ("min_error_p", "min_estimate", "final_error_p",
                         "max_ratio") if k in rows[0]]
    xcol = "eps" if "eps" in rows[0] else None
    if xcol:
        for y in ycols:
            curves[y] = [(r[xcol], r[y]) for r in rows]
    return curves


def emit_report(report: dict, out_dir: str, name: str) -> list:
    """Write <name>.json, <name>.csv, and one <name>_<series>.dat per curve.

    Output is byte-identical for identical report contents: keys are sorted,
    floats use a fixed %.12g format, and no timestamps are embedded.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    jpath = os.path.join(out_dir, f"{name}.json")
    try:
        with open(jpath, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise IOError(f"cannot write report {jpath}: {exc}")
    paths.append(jpath)

    rows = report.get("rows", [])
    if rows:
        cols = sorted(rows[0].keys())
        cpath = os.path.join(out_dir, f"{name}.csv")
        with open(cpath, "w") as fh:
            fh.write(",".join(cols) + "\n")
            for r in rows:
                fh.write(",".join(_fmt(r.get(c, "")) for c in cols) + "\n")
        paths.append(cpath)

    for series, pts in sorted(report_curves(report).items()):
        dpath = os.path.join(out_dir, f"{name}_{series}.dat")
        with open(dpath, "w") as fh:
            for x, y in pts:
                fh.write("%.12g %.12g\n" % (x, y))
        paths.append(dpath)
    return paths
