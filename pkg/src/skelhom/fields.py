"""Everywhere-evaluatable maps R^n -> R^m.

A FieldMap wraps a vectorized callable; evaluation accepts a single point of
shape (n,) or a batch of shape (N, n) and returns (m,) / (N, m) accordingly.
Analytic fields live in a small registry keyed by name; sampled fields are
evaluated through multilinear interpolation so they are defined everywhere on
their grid box (Borel representative).
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import ExceptionalPoint


class FieldMap:
    """Map R^n -> R^m with optional analytic gradient.

    ``fn`` must accept an (N, n) array and return (N, m).
    ``grad`` (optional) must accept (N, n) and return (N, m, n).
    """

    def __init__(self, n: int, m: int, fn: Callable, grad: Optional[Callable] = None,
                 name: str = "field"):
        self.n = n
        self.m = m
        self._fn = fn
        self._grad = grad
        self.name = name

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        XX = np.atleast_2d(X)
        if XX.shape[1] != self.n:
            raise ValueError(f"expected points in R^{self.n}, got shape {X.shape}")
        out = np.asarray(self._fn(XX), dtype=float)
        return out[0] if single else out

    @property
    def has_gradient(self) -> bool:
        return self._grad is not None

    def gradient(self, X):
        """Analytic gradient, shape (N, m, n). Raises if unavailable."""
        if self._grad is None:
            raise ValueError(f"field {self.name!r} has no analytic gradient")
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        XX = np.atleast_2d(X)
        out = np.asarray(self._grad(XX), dtype=float)
        return out[0] if single else out

    def __repr__(self):
        return f"FieldMap({self.name!r}, n={self.n}, m={self.m})"


def constant_field(n: int, value) -> FieldMap:
    value = np.atleast_1d(np.asarray(value, dtype=float))
    m = value.shape[0]

    def fn(X):
        return np.broadcast_to(value, (X.shape[0], m)).copy()

    def grad(X):
        return np.zeros((X.shape[0], m, n))

    return FieldMap(n, m, fn, grad, name="constant")


def linear_x1_field(n: int) -> FieldMap:
    def fn(X):
        return X[:, :1].copy()

    def grad(X):
        g = np.zeros((X.shape[0], 1, n))
        g[:, 0, 0] = 1.0
        return g

    return FieldMap(n, 1, fn, grad, name="linear-x1")


def gauss_bump_field(n: int, center=None, width: float = 0.25,
                     amplitude: float = 1.0) -> FieldMap:
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)

    def fn(X):
        d2 = np.sum((X - c) ** 2, axis=1)
        return (amplitude * np.exp(-d2 / (2.0 * width ** 2)))[:, None]

    def grad(X):
        d = X - c
        v = amplitude * np.exp(-np.sum(d ** 2, axis=1) / (2.0 * width ** 2))
        return (-(v / width ** 2))[:, None, None] * d[:, None, :]

    return FieldMap(n, 1, fn, grad, name="gauss-bump")


def vortex_field(n: int, k: int = 1) -> FieldMap:
    """S^k-valued map x -> (x_1..x_{k+1}) / |(x_1..x_{k+1})|_2.

    Undefined on the plane where the first k+1 coordinates vanish.
    """
    if not 2 <= k + 1 <= n:
        raise ValueError("need 2 <= k+1 <= n")
    d = k + 1

    def fn(X):
        Y = X[:, :d]
        r = np.linalg.norm(Y, axis=1)
        if np.any(r == 0.0):
            raise ExceptionalPoint("vortex map undefined on its singular plane")
        return Y / r[:, None]

    def grad(X):
        Y = X[:, :d]
        r = np.linalg.norm(Y, axis=1)
        if np.any(r == 0.0):
            raise ExceptionalPoint("vortex map undefined on its singular plane")
        G = np.zeros((X.shape[0], d, n))
        # d/dx_j (y_i/r) = delta_ij/r - y_i y_j / r^3 on the first d axes
        eye = np.eye(d)
        G[:, :, :d] = eye[None, :, :] / r[:, None, None] \
            - Y[:, :, None] * Y[:, None, :] / (r ** 3)[:, None, None]
        return G

    return FieldMap(n, d, fn, grad, name="vortex")


def s1_phase_bump_field(n: int, center=None, width: float = 0.25,
                        amplitude: float = 1.0) -> FieldMap:
    """Globally smooth S^1-valued map e^{i phi} with phi a Gaussian bump."""
    phi = gauss_bump_field(n, center=center, width=width, amplitude=amplitude)

    def fn(X):
        ph = phi(X)[:, 0]
        return np.stack([np.cos(ph), np.sin(ph)], axis=1)

    def grad(X):
        ph = phi(X)[:, 0]
        gph = phi.gradient(X)[:, 0, :]          # (N, n)
        out = np.empty((X.shape[0], 2, n))
        out[:, 0, :] = -np.sin(ph)[:, None] * gph
        out[:, 1, :] = np.cos(ph)[:, None] * gph
        return out

    return FieldMap(n, 2, fn, grad, name="s1-bump")


def grid_field(axes, values, name: str = "grid") -> FieldMap:
    """Field interpolating samples multilinearly on a regular grid.

    ``axes`` is a sequence of n strictly increasing 1-d arrays; ``values`` has
    shape grid_shape + (m,). Points outside the grid box are clamped to it.
    """
    axes = [np.asarray(a, dtype=float) for a in axes]
    values = np.asarray(values, dtype=float)
    n = len(axes)
    if values.ndim == n:
        values = values[..., None]
    m = values.shape[-1]
    interp = RegularGridInterpolator(axes, values, method="linear",
                                     bounds_error=False, fill_value=None)
    lo = np.array([a[0] for a in axes])
    hi = np.array([a[-1] for a in axes])

    def fn(X):
        return interp(np.clip(X, lo, hi))

    return FieldMap(n, m, fn, name=name)


def make_field(name: str, n: int, **params) -> FieldMap:
    """Construct a registry field by name."""
    try:
        ctor = _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown field {name!r}; known: {sorted(_REGISTRY)}")
    return ctor(n, **params)


_REGISTRY = {
    "constant": lambda n, value=1.0: constant_field(n, value),
    "linear-x1": linear_x1_field,
    "gauss-bump": gauss_bump_field,
    "vortex": vortex_field,
    "s1-bump": s1_phase_bump_field,
}

FIELD_NAMES = tuple(sorted(_REGISTRY))
