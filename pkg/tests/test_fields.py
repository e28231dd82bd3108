import numpy as np
import pytest

from skelhom.errors import ExceptionalPoint
from skelhom.fields import (FIELD_NAMES, gauss_bump_field, grid_field,
                            make_field, s1_phase_bump_field, vortex_field)


def test_registry_names():
    assert "vortex" in FIELD_NAMES and "gauss-bump" in FIELD_NAMES
    with pytest.raises(ValueError):
        make_field("nope", 2)


def test_single_and_batch_shapes():
    f = gauss_bump_field(2)
    assert f(np.zeros(2)).shape == (1,)
    assert f(np.zeros((5, 2))).shape == (5, 1)


def test_vortex_values_and_gradient():
    f = vortex_field(3, 1)
    v = f(np.array([[3.0, 4.0, 7.0]]))
    np.testing.assert_allclose(v, [[0.6, 0.8]])
    # analytic gradient vs finite differences
    rng = np.random.default_rng(0)
    X = rng.uniform(0.5, 1.5, size=(20, 3))
    G = f.gradient(X)
    h = 1e-6
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        fd = (f(X + e) - f(X - e)) / (2 * h)
        np.testing.assert_allclose(G[:, :, i], fd, atol=1e-6)
    with pytest.raises(ExceptionalPoint):
        f(np.array([[0.0, 0.0, 1.0]]))


def test_s1_bump_on_circle():
    f = s1_phase_bump_field(2)
    rng = np.random.default_rng(1)
    X = rng.uniform(-1, 1, size=(100, 2))
    np.testing.assert_allclose(np.linalg.norm(f(X), axis=1), 1.0, atol=1e-12)
    g = f.gradient(X)
    assert g.shape == (100, 2, 2)


def test_grid_field_interpolation_and_clamp():
    ax = np.linspace(0.0, 1.0, 11)
    vals = np.add.outer(ax, ax)          # f(x, y) = x + y, multilinear-exact
    f = grid_field([ax, ax], vals)
    X = np.array([[0.25, 0.35], [0.5, 0.5]])
    np.testing.assert_allclose(f(X)[:, 0], [0.6, 1.0], atol=1e-12)
    # outside points are clamped to the grid box
    np.testing.assert_allclose(f(np.array([[2.0, 2.0]]))[0, 0], 2.0)
