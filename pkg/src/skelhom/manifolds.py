"""Target manifolds N in R^m: tube membership, nearest-point projection,
canonical test maps, and the circle winding number."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ExceptionalPoint, OutsideTube, Undersampled
from .fields import FieldMap, vortex_field


@dataclass
class ManifoldTarget:
    """Manifold given by distance + projection callbacks, with a tube radius
    delta on which the nearest-point projection is single-valued."""
    name: str
    ambient_dim: int
    delta: float
    distance_fn: Callable           # (N, m) -> (N,)
    projection_fn: Callable         # (N, m) -> (N, m)

    def distance(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.asarray(self.distance_fn(x), dtype=float)

    def to_config(self) -> dict:
        raise NotImplementedError


def sphere_target(k: int, delta: float = 0.2) -> ManifoldTarget:
    """S^k embedded in R^{k+1}.

    delta < 1 keeps the projection single-valued on the whole tube; larger
    tubes are accepted (the projection stays well-defined away from the
    center, which raises ExceptionalPoint).
    """
    if delta <= 0.0:
        raise ValueError("need delta > 0")
    m = k + 1

    def dist(x):
        return np.abs(np.linalg.norm(x, axis=1) - 1.0)

    def proj(x):
        r = np.linalg.norm(x, axis=1)
        if np.any(r == 0.0):
            raise ExceptionalPoint("sphere projection undefined at the center")
        return x / r[:, None]

    t = ManifoldTarget(name=f"sphere-S{k}", ambient_dim=m, delta=delta,
                       distance_fn=dist, projection_fn=proj)
    t.to_config = lambda: {"kind": "sphere", "k": k, "delta": delta}
    return t


def target_from_config(cfg: dict) -> ManifoldTarget:
    if cfg.get("kind") != "sphere":
        raise ValueError(f"unknown target kind {cfg.get('kind')!r}")
    return sphere_target(int(cfg["k"]), float(cfg.get("delta", 0.2)))


def nearest_point_projection(x, target: ManifoldTarget) -> np.ndarray:
    """Closest point of N; only defined on the tube dist(x, N) <= delta."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xx = np.atleast_2d(x)
    d = target.distance(xx)
    if np.any(d > target.delta):
        raise OutsideTube(
            f"distance {float(np.max(d)):.4g} exceeds tube radius {target.delta}")
    out = np.asarray(target.projection_fn(xx), dtype=float)
    return out[0] if single else out


def project_field(f: FieldMap, target: ManifoldTarget) -> FieldMap:
    """Compose a tube-valued field with the nearest-point projection."""

    def fn(X):
        return nearest_point_projection(f(X), target)

    return FieldMap(f.n, target.ambient_dim, fn, name=f"proj[{f.name}]")


def vortex_map(n: int, k: int = 1) -> FieldMap:
    """The S^k-valued vortex x -> (x_1..x_{k+1}) / |(x_1..x_{k+1})|_2."""
    return vortex_field(n, k)


def in_tube(x, target: ManifoldTarget):
    """dist(x, N) <= delta, elementwise."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    res = target.distance(np.atleast_2d(x)) <= target.delta
    return bool(res[0]) if single else res


def uniform_tube_check(u, region_sampler, target: ManifoldTarget,
                       samples: int, rng: np.random.Generator) -> dict:
    """Sample the region and report the max distance of u-values to N."""
    X = region_sampler(rng, samples)
    d = target.distance(np.atleast_2d(u(X)))
    return {"max_distance": float(np.max(d)),
            "inside": bool(np.max(d) <= target.delta)}


def circle_points(center, radius: float, samples: int, n: int = None) -> np.ndarray:
    """Sample points of the circle C(center, radius) in the (x1, x2)-plane."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if n is None:
        n = len(center)
    theta = 2.0 * np.pi * np.arange(samples + 1) / samples   # closed loop
    pts = np.tile(center, (samples + 1, 1))
    pts[:, 0] += radius * np.cos(theta)
    pts[:, 1] += radius * np.sin(theta)
    return pts


def winding_number(u, center, radius: float, samples: int = 256) -> int:
    """Total phase change of an S^1-valued map around a circle, over 2*pi.

    Sums principal-branch phase increments along the sampled circle; the
    result is certified only when every increment is below pi/2, otherwise
    Undersampled is raised.
    """
    pts = circle_points(center, radius, samples)
    vals = np.atleast_2d(np.asarray(u(pts), dtype=float))
    if vals.shape[1] < 2:
        raise ValueError("winding number needs at least 2 value components")
    ang = np.arctan2(vals[:, 1], vals[:, 0])
    inc = np.diff(ang)
    inc = (inc + np.pi) % (2.0 * np.pi) - np.pi     # principal branch
    if np.max(np.abs(inc)) >= np.pi / 2.0:
        raise Undersampled(
            f"max phase increment {float(np.max(np.abs(inc))):.3f} >= pi/2 "
            f"at {samples} samples")
    total = float(np.sum(inc)) / (2.0 * np.pi)
    w = int(round(total))
    if abs(total - w) > 0.25:
        raise Undersampled(f"phase sum {total:.4f} not close to an integer")
    return w
