"""Radial skeleton projections and the piecewise j-homogeneous extension.

The projection sends a cube-local point X to the point of the j-skeleton
obtained by pinning its n-j largest coordinates (in absolute value) to
+-eps and rescaling the rest by eps / |(n-j)-th largest coordinate|.  The
extension of a skeleton map g evaluates g at the projected point of the
containing cube; no smoothing or averaging is involved anywhere, so values
of the extension are values of g.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import ExceptionalPoint, OutOfBounds, SingularPoint
from .fields import FieldMap
from .mesh import (MeshSpec, Sector, SkeletonPoint, cube_index,
                   dual_skeleton_distances, local_coords, magnitude_order,
                   sector_of)


@dataclass(frozen=True)
class ProjectionResult:
    target: SkeletonPoint
    sector: Sector
    scale_chain: tuple    # |local_{sigma(1)}|, ..., |local_{sigma(n-j)}|


def _signs(vals: np.ndarray) -> np.ndarray:
    """sign with sign(0) = +1."""
    return np.where(vals >= 0.0, 1.0, -1.0)


def project_points(local: np.ndarray, j: int, eps: float,
                   on_exceptional: str = "raise"):
    """Vectorized projection of cube-local points onto the j-skeleton.

    Returns (proj, order, valid): proj is (N, n) with pinned coordinates at
    +-eps, order is the magnitude ordering of axes, valid marks rows whose
    pivot coordinate is nonzero.  With on_exceptional="raise", any invalid
    row raises ExceptionalPoint; with "mask", invalid rows are left as NaN.
    """
    local = np.atleast_2d(np.asarray(local, dtype=float))
    N, n = local.shape
    if not 0 <= j < n:
        raise ValueError("need 0 <= j < n")
    order = magnitude_order(local)
    rows = np.arange(N)
    pivot = np.abs(local[rows, order[:, n - j - 1]])
    valid = pivot > 0.0
    if not np.all(valid):
        if on_exceptional == "raise":
            raise ExceptionalPoint(
                "projection undefined where the pivot coordinate vanishes")
        pivot = np.where(valid, pivot, np.nan)
    proj = eps * local / pivot[:, None]
    pin = order[:, : n - j]
    proj[rows[:, None], pin] = eps * _signs(local[rows[:, None], pin])
    return proj, order, valid


def project_to_skeleton(local, j: int, eps: float = 1.0) -> ProjectionResult:
    """Project one cube-local point onto the j-skeleton of its cube."""
    local = np.asarray(local, dtype=float)
    n = local.shape[0]
    proj, order, _ = project_points(local[None, :], j, eps)
    pin = tuple(int(a) for a in order[0, : n - j])
    free = tuple(sorted(int(a) for a in order[0, n - j:]))   # match free_axes
    pt = SkeletonPoint(cube=(0,) * n, local=tuple(proj[0]), pinned_axes=pin,
                       dim=j, eps=eps)
    # reference values for further exact projection steps
    object.__setattr__(pt, "_ref_free", tuple(local[a] for a in free))
    chain = tuple(float(abs(local[order[0, k]])) for k in range(n - j))
    return ProjectionResult(target=pt, sector=sector_of(local, j), scale_chain=chain)


def embed_skeleton_point(local, level: int, eps: float = 1.0) -> SkeletonPoint:
    """Wrap a point already on the level-skeleton (given in cube-local
    coordinates with n-level coordinates at +-eps) as a SkeletonPoint."""
    local = np.asarray(local, dtype=float)
    n = local.shape[0]
    pinned = tuple(i for i in range(n) if abs(local[i]) == eps)
    if len(pinned) < n - level:
        raise ValueError("point is not on the requested skeleton level")
    pinned = pinned[: n - level]
    pt = SkeletonPoint(cube=(0,) * n, local=tuple(local), pinned_axes=pinned,
                       dim=level, eps=eps)
    free = tuple(i for i in range(n) if i not in pinned)
    object.__setattr__(pt, "_ref_free", tuple(local[a] for a in free))
    return pt


def project_step(pt: SkeletonPoint) -> SkeletonPoint:
    """One radial projection step: level-l skeleton point -> level l-1.

    Projection is centered at the face center; scaling uses the reference
    (pre-rescaling) coordinate values carried by the point, so composing
    steps reproduces project_to_skeleton bit-for-bit.
    """
    if pt.dim < 1:
        raise ValueError("already at the 0-skeleton")
    eps = pt.eps
    free = list(pt.free_axes)
    ref = np.array(getattr(pt, "_ref_free", tuple(pt.local[a] for a in free)))
    k = int(np.argmax(np.abs(ref)))            # ties -> smallest axis index
    if ref[k] == 0.0:
        raise ExceptionalPoint("face center: projection step undefined")
    piv = abs(ref[k])
    new_local = np.array(pt.local)
    for idx, a in enumerate(free):
        new_local[a] = eps * ref[idx] / piv
    new_local[free[k]] = eps * (1.0 if ref[k] >= 0 else -1.0)
    new_pin = pt.pinned_axes + (free[k],)
    out = SkeletonPoint(cube=pt.cube, local=tuple(new_local),
                        pinned_axes=new_pin, dim=pt.dim - 1, eps=eps)
    object.__setattr__(out, "_ref_free",
                       tuple(ref[i] for i in range(len(free)) if i != k))
    return out


def _check_bounds(X: np.ndarray, mesh: MeshSpec):
    inside = mesh.bounds.contains(X)
    if not np.all(inside):
        bad = X[~inside][0]
        raise OutOfBounds(f"point {bad} outside mesh bounds")


def extension_values(g, mesh: MeshSpec, j: int, X,
                     on_exceptional: str = "raise") -> np.ndarray:
    """Vectorized f_{T,eps}-style evaluation: g at the projected skeleton points.

    ``g`` is any callable accepting (N, n) ambient points (a FieldMap or a
    skeleton map).  With on_exceptional="mask", rows hitting the exceptional
    set come back as NaN instead of raising.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    _check_bounds(X, mesh)
    K, local = local_coords(X, mesh)
    proj, _, valid = project_points(local, j, mesh.eps,
                                    on_exceptional=on_exceptional)
    U = mesh.T_arr + 2.0 * mesh.eps * K
    if np.all(valid):
        return np.asarray(g(U + proj), dtype=float)
    vals = np.asarray(g(U[valid] + proj[valid]), dtype=float)
    out = np.full((X.shape[0], vals.shape[1]), np.nan)
    out[valid] = vals
    return out


def eval_extension(f, mesh: MeshSpec, j: int, X) -> np.ndarray:
    """Value of the piecewise j-homogeneous extension of f|_skeleton at X."""
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    out = extension_values(f, mesh, j, np.atleast_2d(X))
    return out[0] if single else out


def extend_skeleton_map(g, mesh: MeshSpec, j: int, m: int = None) -> FieldMap:
    """The piecewise j-homogeneous extension of a skeleton map as a FieldMap."""
    if m is None:
        probe = enumerate_probe_point(mesh, j)
        m = np.atleast_2d(np.asarray(g(probe[None, :]), dtype=float)).shape[1]

    def fn(X):
        return extension_values(g, mesh, j, X)

    name = getattr(g, "name", "skeleton-map")
    return FieldMap(mesh.n, m, fn, name=f"ext[{name}]")


def enumerate_probe_point(mesh: MeshSpec, j: int) -> np.ndarray:
    """A generic point of the j-skeleton of the central cube (for probing m)."""
    local = np.full(mesh.n, 0.37 * mesh.eps)
    local[: mesh.n - j] = mesh.eps
    K = cube_index(mesh.bounds.lo_arr[None, :] * 0.25
                   + mesh.bounds.hi_arr[None, :] * 0.75, mesh)[0]
    return mesh.T_arr + 2.0 * mesh.eps * K + local


def extension_gradient(f, mesh: MeshSpec, j: int, X,
                       rel_step: float = 1e-4) -> np.ndarray:
    """Gradient (m, n) of the extension at X by central finite differences.

    The step is rel_step * min(eps, dist(X, Sigma)); requesting the gradient
    too close to the dual skeleton raises SingularPoint.
    """
    X = np.asarray(X, dtype=float)
    d = float(dual_skeleton_distances(X[None, :], mesh, j)[0])
    if d < 1e-9 * mesh.eps:
        raise SingularPoint("point on (or numerically on) the dual skeleton")
    h = rel_step * min(mesh.eps, d)
    n = mesh.n
    pts = np.repeat(X[None, :], 2 * n, axis=0)
    for i in range(n):
        pts[2 * i, i] += h
        pts[2 * i + 1, i] -= h
    vals = extension_values(f, mesh, j, pts)
    m = vals.shape[1]
    grad = np.empty((m, n))
    for i in range(n):
        grad[:, i] = (vals[2 * i] - vals[2 * i + 1]) / (2.0 * h)
    return grad
