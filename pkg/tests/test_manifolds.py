import numpy as np
import pytest

from skelhom.errors import ExceptionalPoint, OutsideTube, Undersampled
from skelhom.extension import extend_skeleton_map
from skelhom.fields import FieldMap, constant_field, s1_phase_bump_field
from skelhom.manifolds import (in_tube, nearest_point_projection,
                               project_field, sphere_target,
                               target_from_config, uniform_tube_check,
                               vortex_map, winding_number)
from skelhom.mesh import Box, MeshSpec


def test_sphere_projection_examples():
    t = sphere_target(1, delta=1.5)
    np.testing.assert_allclose(nearest_point_projection((1.1, 0.0), t),
                               (1.0, 0.0))
    np.testing.assert_allclose(nearest_point_projection((0.3, 0.4), t),
                               (0.6, 0.8))
    with pytest.raises(ExceptionalPoint):
        nearest_point_projection((0.0, 0.0), t)


def test_projection_identities():
    t = sphere_target(2, delta=0.4)
    rng = np.random.default_rng(0)
    x = rng.normal(size=(100, 3))
    x = x / np.linalg.norm(x, axis=1, keepdims=True) * rng.uniform(
        0.7, 1.3, size=(100, 1))
    p = nearest_point_projection(x, t)
    # Pi o Pi = Pi and |Pi(x) - x| = dist(x, N)
    np.testing.assert_allclose(nearest_point_projection(p, t), p, atol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(p - x, axis=1), t.distance(x),
                               atol=1e-12)


def test_tube_membership():
    t = sphere_target(1, delta=0.2)
    assert in_tube((1.1, 0.0), t)
    assert not in_tube((1.3, 0.0), t)
    with pytest.raises(OutsideTube):
        nearest_point_projection((1.3, 0.0), t)


def test_uniform_tube_check():
    t = sphere_target(1, delta=0.2)
    f = s1_phase_bump_field(2)
    out = uniform_tube_check(f, lambda rng, k: rng.uniform(-1, 1, (k, 2)), t,
                             500, np.random.default_rng(1))
    assert out["inside"] and out["max_distance"] < 1e-12


def test_target_from_config_roundtrip():
    t = sphere_target(1, delta=0.3)
    again = target_from_config(t.to_config())
    assert again.name == t.name and again.delta == t.delta


def test_winding_numbers():
    vor = vortex_map(2)
    assert winding_number(vor, (0.0, 0.0), 0.5, 256) == 1
    assert winding_number(constant_field(2, [1.0, 0.0]), (0, 0), 0.5, 256) == 0
    assert winding_number(s1_phase_bump_field(2), (0, 0), 0.5, 256) == 0

    def double(X):
        X = np.atleast_2d(X)
        z = (X[:, 0] + 1j * X[:, 1]) ** 2
        z = z / np.abs(z)
        return np.stack([z.real, z.imag], axis=1)

    assert winding_number(FieldMap(2, 2, double), (0, 0), 1.0, 4096) == 2


def test_winding_radius_invariance():
    vor = vortex_map(2)
    assert {winding_number(vor, (0, 0), r, 512)
            for r in (0.25, 0.5, 0.75)} == {1}


def test_winding_undersampled():
    def double(X):
        X = np.atleast_2d(X)
        z = (X[:, 0] + 1j * X[:, 1]) ** 8
        z = z / np.abs(z)
        return np.stack([z.real, z.imag], axis=1)

    with pytest.raises(Undersampled):
        winding_number(FieldMap(2, 2, double), (0, 0), 1.0, 16)


def test_winding_stable_under_small_perturbation_with_projection():
    t = sphere_target(1, delta=0.2)
    vor = vortex_map(2)
    rng = np.random.default_rng(5)

    def perturbed(X):
        return vor(np.atleast_2d(X)) + 0.15 * np.cos(7.0 * np.atleast_2d(X))

    u = project_field(FieldMap(2, 2, perturbed), t)
    assert winding_number(u, (0, 0), 0.8, 2048) == 1


def test_winding_of_extension():
    mesh = MeshSpec(T=(0.0, 0.0), eps=0.1, n=2,
                    bounds=Box((-1.5, -1.5), (1.5, 1.5)))
    ext = extend_skeleton_map(vortex_map(2), mesh, 1, m=2)
    assert winding_number(ext, (0.0, 0.0), 0.9, 1024) == 1
