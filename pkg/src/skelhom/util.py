"""Seeding and quadrature helpers."""

from __future__ import annotations

import zlib
from functools import lru_cache

import numpy as np


def rng_for(seed: int, *tags) -> np.random.Generator:
    """Deterministic substream keyed by (seed, tags).

    Tags are hashed into the seed sequence entropy, so substreams do not
    depend on creation order.
    """
    entropy = [int(seed) & 0xFFFFFFFF]
    for t in tags:
        entropy.append(zlib.crc32(str(t).encode()) & 0xFFFFFFFF)
    return np.random.default_rng(np.random.SeedSequence(entropy))


@lru_cache(maxsize=64)
def gauss_legendre_01(num: int):
    """Gauss-Legendre nodes/weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(num)
    return 0.5 * (x + 1.0), 0.5 * w


def stratified_uniform(rng: np.random.Generator, count: int) -> np.ndarray:
    """count stratified U(0,1) samples (one per equal-width stratum)."""
    return (np.arange(count) + rng.random(count)) / count


def sup_sphere_surface(n: int) -> float:
    """Surface measure of the sup-norm unit sphere in R^n."""
    return n * 2.0 ** n


def sample_sup_sphere(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    """Uniform points on the boundary of [-1, 1]^n."""
    pts = rng.uniform(-1.0, 1.0, size=(count, n))
    axis = rng.integers(0, n, size=count)
    sign = rng.choice([-1.0, 1.0], size=count)
    pts[np.arange(count), axis] = sign
    return pts


def euclid_sphere_surface(n: int) -> float:
    from scipy.special import gamma
    return float(2.0 * np.pi ** (n / 2.0) / gamma(n / 2.0))


def sample_euclid_sphere(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    pts = rng.standard_normal((count, n))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def sample_power_law(rng: np.random.Generator, count: int, a: float, b: float,
                     sp: float, stratified: bool = True):
    """Sample radii with density proportional to r^{-1-sp} on [a, b].

    Returns (radii, normalization Z) with Z = (a^{-sp} - b^{-sp}) / sp; the
    sampling density is r^{-1-sp} / Z.  Stratified inverse-CDF sampling.
    """
    if not 0 < a < b:
        raise ValueError("need 0 < a < b")
    u = stratified_uniform(rng, count) if stratified else rng.random(count)
    rng.shuffle(u)
    A, B = a ** (-sp), b ** (-sp)
    r = (A - u * (A - B)) ** (-1.0 / sp)
    return r, (A - B) / sp
