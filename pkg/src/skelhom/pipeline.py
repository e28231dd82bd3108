"""Skeleton-level machinery for Lipschitz approximation of manifold-valued
skeleton maps: per-face hole-filling, mollification on face interiors, cutoff
blending against the one-level-down restriction, the recursion over the
skeleton dimension, and the end-to-end mesh-refinement pipeline.

Skeleton maps are plain callables on ambient points of the j-skeleton; all
stage constructions evaluate the input map at (rescaled) skeleton points, so
stage values are always values of the input map or convex averages taken
inside the tube around the target manifold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
from scipy.integrate import quad as _quad1d

from .errors import TubeEscape, WindowEscapes
from .extension import extend_skeleton_map
from .fields import FieldMap
from .manifolds import ManifoldTarget
from .mesh import Box, MeshSpec
from .metrics import (QuadratureSpec, SkeletonDomain, skeleton_gagliardo_p,
                      skeleton_lp_p, wsp_distance)
from .util import gauss_legendre_01, rng_for


class FaceGeometry:
    """Resolves ambient j-skeleton points into (face center, free axes,
    face-normalized coordinates).

    Points on lower-dimensional faces belong to several j-faces; the first
    n-j pinned axes (smallest indices) are chosen, which is harmless for the
    stage maps because they agree with the boundary map there.
    """

    def __init__(self, mesh: MeshSpec, j: int, tol: float = 1e-9):
        self.mesh = mesh
        self.j = j
        self.tol = tol

    def decompose(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        mesh, j = self.mesh, self.j
        n = mesh.n
        d = (X - mesh.T_arr) / mesh.eps
        near = np.round(d)
        pinned_like = (np.abs(d - near) < self.tol) & (np.mod(near, 2) != 0)
        if np.any(np.sum(pinned_like, axis=1) < n - j):
            raise ValueError("point not on the j-skeleton")
        order = np.argsort(~pinned_like, axis=1, kind="stable")
        pin_idx = order[:, : n - j]
        free_idx = np.sort(order[:, n - j:], axis=1)
        rows = np.arange(X.shape[0])[:, None]
        center = X.copy()
        center[rows, pin_idx] = mesh.T_arr[pin_idx] \
            + mesh.eps * near[rows, pin_idx]
        d_free = d[rows, free_idx]
        even = 2.0 * np.round(d_free / 2.0)
        center[rows, free_idx] = mesh.T_arr[free_idx] + mesh.eps * even
        xi = np.clip((X[rows, free_idx] - center[rows, free_idx]) / mesh.eps,
                     -1.0, 1.0)
        return center, free_idx, xi

    def embed(self, center, free_idx, xi):
        out = np.array(center, dtype=float)
        rows = np.arange(out.shape[0])[:, None]
        out[rows, free_idx] = center[rows, free_idx] + self.mesh.eps * xi
        return out

    def boundary_projection(self, X):
        """Within-face radial projection to the face boundary (level j-1)."""
        center, free_idx, xi = self.decompose(X)
        r = np.max(np.abs(xi), axis=1)
        if np.any(r == 0.0):
            raise ValueError("face center has no boundary projection")
        return self.embed(center, free_idx, xi / r[:, None])


@dataclass(frozen=True)
class CutoffProfile:
    """C^1 cutoff eta: 1 on [0, plateau_inner], 0 beyond support_outer."""
    plateau_inner: float
    support_outer: float

    def __post_init__(self):
        if not 0.0 < self.plateau_inner < self.support_outer < 1.0:
            raise ValueError("need 0 < plateau_inner < support_outer < 1")

    def eta(self, r):
        r = np.asarray(r, dtype=float)
        a, b = self.plateau_inner, self.support_outer
        s = np.clip((b - r) / (b - a), 0.0, 1.0)
        return s * s * (3.0 - 2.0 * s)

    @classmethod
    def for_collar(cls, mu: float) -> "CutoffProfile":
        # eta = 1 on [0, 1-mu/2], 0 beyond 1-mu/3
        return cls(plateau_inner=1.0 - mu / 2.0, support_outer=1.0 - mu / 3.0)


def _bump_norm() -> float:
    v, _ = _quad1d(lambda x: np.exp(-1.0 / (1.0 - x * x)), -1.0, 1.0)
    return v


_BUMP_NORM = _bump_norm()


def standard_bump(u: np.ndarray) -> np.ndarray:
    """Product bump on the unit cube [-1,1]^j with unit integral."""
    u = np.atleast_2d(np.asarray(u, dtype=float))
    inside = np.abs(u) < 1.0
    vals = np.zeros_like(u)
    vals[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    vals[~inside] = 0.0
    return np.prod(vals / _BUMP_NORM, axis=1)


@dataclass
class MollifierSpec:
    """Mollifier rho (nonnegative, unit integral, support in the unit cube)
    at scale t, with the quadrature order used for the convolution."""
    t: float
    rho: Callable = standard_bump
    order: int = 12

    def __post_init__(self):
        if not 0.0 < self.t < 1.0:
            raise ValueError("need 0 < t < 1")

    def check_unit_mass(self, j: int, tol: float = 1e-6) -> float:
        x, w = gauss_legendre_01(64)
        u = 2.0 * x - 1.0
        grids = np.meshgrid(*([u] * j), indexing="ij")
        U = np.stack([g.ravel() for g in grids], axis=1)
        W = np.prod(np.stack(np.meshgrid(*([2.0 * w] * j), indexing="ij"),
                             axis=0).reshape(j, -1), axis=0)
        mass = float(np.sum(W * self.rho(U)))
        if abs(mass - 1.0) > tol:
            raise ValueError(f"mollifier mass {mass} not within {tol} of 1")
        return mass


@dataclass
class PipelineStage:
    label: str
    payload: Callable
    params: dict = field(default_factory=dict)


def fill_hole(g, mesh: MeshSpec, j: int, mu: float):
    """Per-face rescaling g_mu: values of g, boundary value on the outer
    collar of width mu (face-normalized)."""
    if not 0.0 < mu < 1.0:
        raise ValueError("need 0 < mu < 1")
    geo = FaceGeometry(mesh, j)

    def fn(X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        center, free_idx, xi = geo.decompose(X)
        r = np.max(np.abs(xi), axis=1)
        outer = r >= 1.0 - mu
        pts = np.empty_like(X)
        inner = ~outer
        if np.any(inner):
            pts[inner] = geo.embed(center[inner], free_idx[inner],
                                   xi[inner] / (1.0 - mu))
        if np.any(outer):
            pts[outer] = geo.embed(center[outer], free_idx[outer],
                                   xi[outer] / r[outer, None])
        return np.atleast_2d(np.asarray(g(pts), dtype=float))

    fn.name = f"hole-filled[{getattr(g, 'name', 'g')}]"
    return fn


def mollify_on_cube(g, mesh: MeshSpec, j: int, spec: MollifierSpec, X):
    """Face-plane convolution g * rho_t at skeleton points X.

    Requires every point to satisfy |X - face center| < (1 - t) * eps in the
    face-normalized sup norm, so the window stays inside the face.
    """
    geo = FaceGeometry(mesh, j)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    center, free_idx, xi = geo.decompose(X)
    r = np.max(np.abs(xi), axis=1)
    if np.any(r >= 1.0 - spec.t):
        raise WindowEscapes(
            f"mollification window escapes the face (max r={float(np.max(r)):.4f},"
            f" t={spec.t})")
    return _convolve(g, geo, center, free_idx, xi, spec)


def _convolve(g, geo: FaceGeometry, center, free_idx, xi, spec: MollifierSpec):
    """g * rho_t at face-normalized positions xi (window assumed inside)."""
    j = geo.j
    x1, w1 = gauss_legendre_01(spec.order)
    u1 = 2.0 * x1 - 1.0
    grids = np.meshgrid(*([u1] * j), indexing="ij")
    U = np.stack([gg.ravel() for gg in grids], axis=1)          # (M, j)
    W = np.prod(np.stack(np.meshgrid(*([2.0 * w1] * j), indexing="ij"),
                         axis=0).reshape(j, -1), axis=0)        # (M,)
    Wr = W * spec.rho(U)
    Wr = Wr / np.sum(Wr)        # discrete unit mass: constants are exact
    N, M = xi.shape[0], U.shape[0]
    # evaluation points: xi - t*u for every node, flattened
    XI = xi[:, None, :] - spec.t * U[None, :, :]
    big_center = np.repeat(center, M, axis=0)
    big_free = np.repeat(free_idx, M, axis=0)
    pts = geo.embed(big_center, big_free, XI.reshape(N * M, j))
    vals = np.atleast_2d(np.asarray(g(pts), dtype=float))
    m = vals.shape[1]
    vals = vals.reshape(N, M, m)
    return np.einsum("nmc,m->nc", vals, Wr)


def blend_lipschitz(g, boundary_map, mesh: MeshSpec, j: int, t: float,
                    profile: CutoffProfile, mu: float = None,
                    order: int = 12):
    """eta(r) * (g * rho_t) + (1 - eta(r)) * boundary_map(X^{j-1}).

    ``g`` must already be hole-filled at collar width mu (it agrees with its
    boundary values on the outer collar) and t < mu/3, so the mollification
    window never escapes where eta > 0.
    """
    if mu is not None and not t < mu / 3.0:
        raise ValueError("need t < mu/3")
    geo = FaceGeometry(mesh, j)
    spec = MollifierSpec(t=t, order=order)

    def fn(X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        center, free_idx, xi = geo.decompose(X)
        r = np.max(np.abs(xi), axis=1)
        eta = profile.eta(r)
        need_core = eta > 0.0
        need_bdry = eta < 1.0
        if np.any(need_core & (r >= 1.0 - t)):
            raise WindowEscapes("cutoff support reaches the mollification margin")
        out = None
        if np.any(need_core):
            core = _convolve(g, geo, center[need_core], free_idx[need_core],
                             xi[need_core], spec)
            out = np.zeros((X.shape[0], core.shape[1]))
            out[need_core] += eta[need_core, None] * core
        if np.any(need_bdry):
            sel = need_bdry & (r > 0.0)
            bpts = geo.embed(center[sel], free_idx[sel],
                             xi[sel] / r[sel, None])
            bvals = np.atleast_2d(np.asarray(boundary_map(bpts), dtype=float))
            if out is None:
                out = np.zeros((X.shape[0], bvals.shape[1]))
            out[sel] += (1.0 - eta[sel, None]) * bvals
        return out

    fn.name = f"blended[{getattr(g, 'name', 'g')}]"
    return fn


def project_skeleton_map(g, target: ManifoldTarget, mesh: MeshSpec, j: int):
    """Compose a tube-valued skeleton map with the nearest-point projection."""

    def fn(X):
        vals = np.atleast_2d(np.asarray(g(X), dtype=float))
        d = target.distance(vals)
        if np.any(d > target.delta):
            raise TubeEscape(
                f"stage leaves the tube: max distance {float(np.max(d)):.4g} "
                f"> delta {target.delta}")
        return np.asarray(target.projection_fn(vals), dtype=float)

    fn.name = f"projected[{getattr(g, 'name', 'g')}]"
    return fn


def default_schedule(stages: int):
    """mu_k = 2^{-k-1}, t_k = mu_k / 4 (strictly inside t < mu/3)."""
    return [(2.0 ** (-k - 1), 2.0 ** (-k - 1) / 4.0) for k in range(stages)]


def skeleton_wsp_distance_p(a, b, mesh: MeshSpec, j: int, s: float, p: float,
                            quad: QuadratureSpec) -> float:
    """||a-b||_{L^p}^p + |a-b|_{W^{s,p}}^p on the j-skeleton."""

    def diff(X):
        return np.atleast_2d(np.asarray(a(X), dtype=float)) \
            - np.atleast_2d(np.asarray(b(X), dtype=float))

    diff.name = f"diff[{getattr(a, 'name', 'a')}]"
    lp = skeleton_lp_p(diff, mesh, j, p, quad)
    sem = skeleton_gagliardo_p(diff, mesh, j, s, p, quad)
    return lp + sem.value


def empirical_lipschitz(g, mesh: MeshSpec, j: int, samples: int,
                        rng: np.random.Generator) -> float:
    """Max difference quotient of g over random skeleton point pairs."""
    dom = SkeletonDomain(mesh, j)
    idx = rng.integers(0, len(dom.faces), size=(samples, 2))
    best = 0.0
    X = np.empty((samples, mesh.n))
    Y = np.empty((samples, mesh.n))
    for fi, face in enumerate(dom.faces):
        sel = np.flatnonzero(idx[:, 0] == fi)
        if len(sel):
            X[sel] = face.sample(rng, len(sel), mesh.eps)
        sel = np.flatnonzero(idx[:, 1] == fi)
        if len(sel):
            Y[sel] = face.sample(rng, len(sel), mesh.eps)
    d = np.max(np.abs(X - Y), axis=1)
    ok = d > 1e-12
    vals = np.linalg.norm(
        np.atleast_2d(np.asarray(g(X[ok]), dtype=float))
        - np.atleast_2d(np.asarray(g(Y[ok]), dtype=float)), axis=1)
    if np.any(ok):
        best = float(np.max(vals / d[ok]))
    return best


def lipschitz_approximate(g, target: ManifoldTarget, mesh: MeshSpec, j: int,
                          s: float, p: float, schedule=None,
                          quad: QuadratureSpec = None,
                          mollifier_order: int = 12) -> List[PipelineStage]:
    """Sequence of Lipschitz N-valued approximations of an N-valued skeleton map.

    Recursion over the skeleton dimension: the base level blends the
    hole-filled map against the (finite) vertex values; higher levels first
    approximate the one-level-down restriction, then blend.  Each emitted
    stage is finished with the nearest-point projection, so its values lie on
    the target manifold.  Requires 1 <= j <= sp < n.
    """
    sp = s * p
    if not 1 <= j <= sp < mesh.n:
        raise ValueError(f"need 1 <= j <= sp < n (j={j}, sp={sp}, n={mesh.n})")
    if schedule is None:
        schedule = default_schedule(3)
    if quad is None:
        quad = QuadratureSpec(samples=20_000)
    stages: List[PipelineStage] = []
    for k, (mu, t) in enumerate(schedule):
        blended = _lipschitz_stage(g, target, mesh, j, mu, t, k, schedule,
                                   mollifier_order)
        projected = project_skeleton_map(blended, target, mesh, j)
        err = skeleton_wsp_distance_p(projected, g, mesh, j, s, p,
                                      quad.with_(seed=quad.seed + k))
        stages.append(PipelineStage(
            label="projected",
            payload=projected,
            params={"k": k, "mu": mu, "t": t, "error_p": err}))
    return stages


def _lipschitz_stage(g, target, mesh, j, mu, t, k, schedule, order):
    """One blended (pre-projection) stage at level j."""
    g_mu = fill_hole(g, mesh, j, mu)
    profile = CutoffProfile.for_collar(mu)
    if j == 1:
        # vertex values are exact: the boundary map is g itself on the
        # (finite) 0-skeleton
        boundary = g
    else:
        sub = _lipschitz_stage(g, target, mesh, j - 1, mu, t, k, schedule,
                               order)
        boundary = project_skeleton_map(sub, target, mesh, j - 1)
    return blend_lipschitz(g_mu, boundary, mesh, j, t, profile, mu=mu,
                           order=order)


@dataclass
class PipelineReport:
    eps: float
    T: tuple
    selection_error_p: float
    stage_errors_p: list
    final_error_p: float
    lipschitz_estimate: float
    tube_check: dict

    def to_dict(self) -> dict:
        return {"eps": self.eps, "T": list(self.T),
                "selection_error_p": self.selection_error_p,
                "stage_errors_p": list(self.stage_errors_p),
                "final_error_p": self.final_error_p,
                "lipschitz_estimate": self.lipschitz_estimate,
                "tube_check": self.tube_check}


def thme_pipeline(f: FieldMap, target: ManifoldTarget, inner: Box,
                  s: float, p: float, eps_schedule, t_samples: int = 32,
                  quad: QuadratureSpec = None, stages: int = 2,
                  select_quad: QuadratureSpec = None,
                  margin_factor: float = 2.0) -> List[PipelineReport]:
    """End-to-end pipeline: per mesh size, pick a good translation, run the
    Lipschitz approximation of the restricted map, extend homogeneously, and
    report the distance to f on the inner box.

    Requires 0 < s < 1 and 1 <= sp < n; the skeleton dimension is floor(sp).
    """
    from .experiments import select_good_T     # local import: no cycle at load

    sp = s * p
    if not (0.0 < s < 1.0 and 1.0 <= sp < f.n):
        raise ValueError("need 0 < s < 1 and 1 <= sp < n")
    j = int(np.floor(sp))
    if quad is None:
        quad = QuadratureSpec(samples=50_000)
    if select_quad is None:
        select_quad = quad.with_(samples=max(2000, quad.samples // 5))
    reports = []
    for idx, eps in enumerate(eps_schedule):
        margin = margin_factor * eps
        bounds = Box(tuple(l - margin for l in inner.lo),
                     tuple(h + margin for h in inner.hi))
        T, sel_err, _ = select_good_T(f, eps, j, s, p, count=t_samples,
                                      quad=select_quad.with_(seed=quad.seed + idx),
                                      inner=inner, bounds=bounds)
        mesh = MeshSpec(T=T, eps=eps, n=f.n, bounds=bounds)
        stage_list = lipschitz_approximate(
            f, target, mesh, j, s, p,
            schedule=default_schedule(stages),
            quad=quad.with_(samples=max(2000, quad.samples // 5),
                            seed=quad.seed + 100 + idx))
        final = stage_list[-1].payload
        f_k = extend_skeleton_map(final, mesh, j, m=f.m)
        err = wsp_distance(f, f_k, inner, s, p, quad.with_(seed=quad.seed + idx))
        rng = rng_for(quad.seed, "pipeline-lip", idx)
        lip = empirical_lipschitz(final, mesh, j, 2000, rng)
        vals_on_target = target.distance(
            np.atleast_2d(final(SkeletonDomain(mesh, j).faces[0].sample(
                rng, 256, mesh.eps))))
        reports.append(PipelineReport(
            eps=eps, T=tuple(T), selection_error_p=sel_err,
            stage_errors_p=[st.params["error_p"] for st in stage_list],
            final_error_p=err.value,
            lipschitz_estimate=lip,
            tube_check={"max_distance": float(np.max(vals_on_target))}))
    return reports
