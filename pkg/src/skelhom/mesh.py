"""Cubical meshes, their skeletons, sectors, and the dual skeleton.

The mesh of half-width eps translated by T consists of the open cubes
T + 2*eps*K + (-eps, eps)^n, K in Z^n.  All distances here use the sup norm.
Boundary/tie conventions (the mesh is only defined a.e. by the construction):
points on a cube boundary belong to the cube of lexicographically smallest K,
ties in coordinate magnitudes are broken by smallest axis index, sign(0) = +1.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Tuple

import numpy as np


@dataclass(frozen=True)
class Box:
    """Axis-aligned box [lo_1, hi_1] x ... x [lo_n, hi_n]."""
    lo: tuple
    hi: tuple

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        if len(self.lo) != len(self.hi):
            raise ValueError("lo/hi dimension mismatch")
        if not all(h > l for l, h in zip(self.lo, self.hi)):
            raise ValueError("degenerate box")

    @property
    def n(self) -> int:
        return len(self.lo)

    @property
    def lo_arr(self):
        return np.array(self.lo)

    @property
    def hi_arr(self):
        return np.array(self.hi)

    @property
    def volume(self) -> float:
        return float(np.prod(self.hi_arr - self.lo_arr))

    @property
    def diameter(self) -> float:
        """Sup-norm diameter."""
        return float(np.max(self.hi_arr - self.lo_arr))

    def contains(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.all((X >= self.lo_arr) & (X <= self.hi_arr), axis=1)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(self.lo_arr, self.hi_arr, size=(count, self.n))

    def as_pairs(self):
        return [[l, h] for l, h in zip(self.lo, self.hi)]


@dataclass(frozen=True)
class MeshSpec:
    """Cubical mesh of half-width eps centered (mod 2*eps) at T, clipped to bounds."""
    T: tuple
    eps: float
    n: int
    bounds: Box

    def __post_init__(self):
        object.__setattr__(self, "T", tuple(float(v) for v in self.T))
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.n < 1 or len(self.T) != self.n or self.bounds.n != self.n:
            raise ValueError("inconsistent dimensions")

    @property
    def T_arr(self):
        return np.array(self.T)

    def cube_center(self, K) -> np.ndarray:
        return self.T_arr + 2.0 * self.eps * np.asarray(K, dtype=float)

    def to_json(self) -> str:
        return json.dumps({"T": list(self.T), "eps": self.eps, "n": self.n,
                           "bounds": self.bounds.as_pairs()})

    @classmethod
    def from_json(cls, text: str) -> "MeshSpec":
        d = json.loads(text)
        lo = [p[0] for p in d["bounds"]]
        hi = [p[1] for p in d["bounds"]]
        return cls(T=tuple(d["T"]), eps=float(d["eps"]), n=int(d["n"]),
                   bounds=Box(lo, hi))


@dataclass(frozen=True)
class Sector:
    """Sign pattern q and injective axis map sigma ordering coordinate magnitudes."""
    q: Tuple[int, ...]
    sigma: Tuple[int, ...]

    def __post_init__(self):
        if len(set(self.sigma)) != len(self.sigma):
            raise ValueError("sigma must be injective")
        if any(abs(s) != 1 for s in self.q):
            raise ValueError("q entries must be +-1")


@dataclass(frozen=True)
class SkeletonPoint:
    """Point of the j-skeleton in cube-local coordinates.

    ``local`` has exactly n-j coordinates pinned at +-eps (at ``pinned_axes``);
    the others are free with magnitude <= eps.
    """
    cube: Tuple[int, ...]
    local: tuple
    pinned_axes: Tuple[int, ...]
    dim: int
    eps: float = 1.0

    @property
    def local_arr(self):
        return np.array(self.local)

    @property
    def free_axes(self) -> Tuple[int, ...]:
        return tuple(i for i in range(len(self.local)) if i not in self.pinned_axes)


def cube_index(X, mesh: MeshSpec) -> np.ndarray:
    """Vectorized cube index: (N, n) points -> (N, n) integer K.

    Boundary points go to the lexicographically smallest candidate K.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    v = (X - mesh.T_arr + mesh.eps) / (2.0 * mesh.eps)
    K = np.floor(v).astype(np.int64)
    # exact boundary: v integral means local coordinate would be -eps; the
    # lower cube (local +eps) has the smaller index
    K[v == K] -= 1
    return K


def cube_of(X, mesh: MeshSpec) -> Tuple[int, ...]:
    """Index K of the cube Q_eps(T + 2*eps*K) containing the point X."""
    return tuple(int(k) for k in cube_index(X, mesh)[0])


def local_coords(X, mesh: MeshSpec):
    """Return (K, local) with X = T + 2*eps*K + local, local in [-eps, eps]^n."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    K = cube_index(X, mesh)
    local = X - mesh.T_arr - 2.0 * mesh.eps * K
    return K, local


def magnitude_order(local) -> np.ndarray:
    """Axis order by decreasing |coordinate|, ties to the smallest axis index."""
    local = np.atleast_2d(np.asarray(local, dtype=float))
    return np.argsort(-np.abs(local), axis=1, kind="stable")


def sector_of(local, j: int) -> Sector:
    """Sector (q, sigma) of a cube-local point for target skeleton dimension j."""
    local = np.asarray(local, dtype=float)
    n = local.shape[0]
    if not 0 <= j < n:
        raise ValueError("need 0 <= j < n")
    order = magnitude_order(local)[0][: n - j]
    q = tuple(1 if local[a] >= 0 else -1 for a in order)
    return Sector(q=q, sigma=tuple(int(a) + 1 for a in order))


@dataclass(frozen=True)
class Face:
    """Open j-face of the mesh: n-j coordinates pinned, the rest spanning 2*eps."""
    center: tuple                    # ambient coordinates of the face center
    spanning_axes: Tuple[int, ...]   # axes along which the face extends
    pinned: tuple                    # ((axis, value), ...) for the fixed axes

    @property
    def center_arr(self):
        return np.array(self.center)

    @property
    def dim(self) -> int:
        return len(self.spanning_axes)

    def sample(self, rng: np.random.Generator, count: int, eps: float) -> np.ndarray:
        pts = np.tile(self.center_arr, (count, 1))
        if self.spanning_axes:
            pts[:, list(self.spanning_axes)] += rng.uniform(
                -eps, eps, size=(count, len(self.spanning_axes)))
        return pts

    def embed(self, free: np.ndarray, eps: float) -> np.ndarray:
        """Map face-normalized free coordinates in [-1,1]^j to ambient points."""
        free = np.atleast_2d(np.asarray(free, dtype=float))
        pts = np.tile(self.center_arr, (free.shape[0], 1))
        if self.spanning_axes:
            pts[:, list(self.spanning_axes)] += eps * free
        return pts


def enumerate_skeleton_cubes(mesh: MeshSpec, j: int) -> Iterator[Face]:
    """Yield every open j-face of the mesh that meets the (closed) bounds.

    Faces have n-j coordinates at odd multiples of eps relative to T and face
    centers at even multiples; identification is by integer keys, so the
    enumeration is exact.
    """
    n = mesh.n
    if not 0 <= j <= n:
        raise ValueError("need 0 <= j <= n")
    lo, hi = mesh.bounds.lo_arr, mesh.bounds.hi_arr
    T, eps = mesh.T_arr, mesh.eps

    # odd integers c with T_i + eps*c in [lo_i, hi_i]
    def odd_range(i):
        a = int(np.ceil((lo[i] - T[i]) / eps))
        b = int(np.floor((hi[i] - T[i]) / eps))
        return [c for c in range(a, b + 1) if c % 2 != 0]

    # even integers c with the open interval (T_i+eps*(c-1), T_i+eps*(c+1))
    # meeting [lo_i, hi_i]
    def even_range(i):
        a = int(np.ceil((lo[i] - T[i]) / eps - 1.0))
        b = int(np.floor((hi[i] - T[i]) / eps + 1.0))
        out = []
        for c in range(a, b + 1):
            if c % 2 != 0:
                continue
            if T[i] + eps * (c + 1) > lo[i] and T[i] + eps * (c - 1) < hi[i]:
                out.append(c)
        return out

    for pinned_axes in itertools.combinations(range(n), n - j):
        spanning = tuple(i for i in range(n) if i not in pinned_axes)
        pinned_choices = [odd_range(i) for i in pinned_axes]
        free_choices = [even_range(i) for i in spanning]
        for pinned_vals in itertools.product(*pinned_choices):
            for free_vals in itertools.product(*free_choices):
                center = T.copy()
                for ax, c in zip(pinned_axes, pinned_vals):
                    center[ax] += eps * c
                for ax, c in zip(spanning, free_vals):
                    center[ax] += eps * c
                yield Face(center=tuple(center), spanning_axes=spanning,
                           pinned=tuple((ax, float(T[ax] + eps * c))
                                        for ax, c in zip(pinned_axes, pinned_vals)))


def skeleton_faces(mesh: MeshSpec, j: int) -> list:
    return list(enumerate_skeleton_cubes(mesh, j))


def dual_skeleton_distance(X, mesh: MeshSpec, j: int) -> float:
    """Sup-norm distance from X to the dual (n-j-1)-skeleton Sigma.

    Sigma is the (n-j-1)-skeleton of the mesh shifted by (eps,...,eps); in
    cube-local coordinates the distance is the (n-j)-th largest |coordinate|.
    """
    return float(dual_skeleton_distances(np.atleast_2d(X), mesh, j)[0])


def dual_skeleton_distances(X, mesh: MeshSpec, j: int) -> np.ndarray:
    if not 1 <= j <= mesh.n - 1:
        raise ValueError("need 1 <= j <= n-1")
    _, local = local_coords(X, mesh)
    a = np.sort(np.abs(local), axis=1)[:, ::-1]
    return a[:, mesh.n - j - 1]
