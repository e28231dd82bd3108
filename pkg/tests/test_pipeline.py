import numpy as np
import pytest

from skelhom.errors import WindowEscapes
from skelhom.fields import FieldMap, constant_field, gauss_bump_field
from skelhom.manifolds import sphere_target, vortex_map
from skelhom.mesh import Box, MeshSpec
from skelhom.metrics import QuadratureSpec, SkeletonDomain
from skelhom.pipeline import (CutoffProfile, FaceGeometry, MollifierSpec,
                              blend_lipschitz, default_schedule,
                              empirical_lipschitz, fill_hole,
                              lipschitz_approximate, mollify_on_cube,
                              skeleton_wsp_distance_p, thme_pipeline)
from skelhom.util import rng_for


@pytest.fixture
def edge_mesh():
    return MeshSpec(T=(0.0, 0.0), eps=1.0, n=2, bounds=Box((-2, -2), (2, 2)))


def x1_map(X):
    return np.atleast_2d(X)[:, :1]


def test_fill_hole_formula(edge_mesh):
    g_mu = fill_hole(x1_map, edge_mesh, 1, 0.5)
    # edge centered at (0, 1): face-normalized coordinate is x1
    assert g_mu([[0.25, 1.0]])[0, 0] == pytest.approx(0.5)
    assert g_mu([[0.8, 1.0]])[0, 0] == pytest.approx(1.0)


def test_fill_hole_mu_to_zero(edge_mesh):
    g_mu = fill_hole(x1_map, edge_mesh, 1, 1e-9)
    pts = [[0.37, 1.0], [-0.8, 1.0], [1.0, 0.25]]
    np.testing.assert_allclose(g_mu(pts), x1_map(np.array(pts)), atol=1e-8)


def test_fill_hole_value_preservation(edge_mesh):
    # values of g_mu are values of g: for g = x1 on edges all values lie in
    # the value set {[-1, 1] on horizontal edges} U {+-1}
    # values of g_mu are values of g on the same face: for g = x1 they stay
    # in the face's x1 range (constant on vertical edges)
    g_mu = fill_hole(x1_map, edge_mesh, 1, 0.3)
    rng = rng_for(0, "vp")
    dom = SkeletonDomain(edge_mesh, 1)
    for face in dom.faces:
        X = face.sample(rng, 50, edge_mesh.eps)
        vals = g_mu(X)[:, 0]
        if 0 in face.spanning_axes:
            assert np.all(np.abs(vals - face.center[0]) <= 1.0 + 1e-12)
        else:
            np.testing.assert_allclose(vals, face.center[0], atol=1e-12)


def test_fill_hole_trend(edge_mesh):
    # ||g_mu - g|| decreasing along mu (criterion-8 shape, small scale)
    g = gauss_bump_field(2, center=(0.3, 0.2))
    quad = QuadratureSpec(samples=8000, seed=5)
    errs = [skeleton_wsp_distance_p(fill_hole(g, edge_mesh, 1, mu), g,
                                    edge_mesh, 1, 0.4, 2.0, quad)
            for mu in (0.3, 0.2, 0.1, 0.05)]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_mollify_constant_and_linear(edge_mesh):
    spec = MollifierSpec(t=0.1)
    spec.check_unit_mass(1)
    c = lambda X: np.full((np.atleast_2d(X).shape[0], 1), 3.25)
    assert mollify_on_cube(c, edge_mesh, 1, spec, [[0.3, 1.0]])[0, 0] \
        == pytest.approx(3.25, abs=1e-12)
    assert mollify_on_cube(x1_map, edge_mesh, 1, spec, [[0.3, 1.0]])[0, 0] \
        == pytest.approx(0.3, abs=1e-9)


def test_mollify_window_escape(edge_mesh):
    spec = MollifierSpec(t=0.1)
    with pytest.raises(WindowEscapes):
        mollify_on_cube(x1_map, edge_mesh, 1, spec, [[0.95, 1.0]])


def test_mollify_vortex_modulus_of_continuity(edge_mesh):
    # vortex restricted to the edge at distance 1 from the singular plane is
    # 1-Lipschitz-ish there; t = 0.05 perturbs values by < 0.01
    vor = vortex_map(2)
    spec = MollifierSpec(t=0.05)
    xs = np.linspace(-0.9, 0.9, 41)
    pts = np.stack([xs, np.ones_like(xs)], axis=1)
    out = mollify_on_cube(vor, edge_mesh, 1, spec, pts)
    assert np.max(np.linalg.norm(out - vor(pts), axis=1)) < 0.01


def test_blend_constant(edge_mesh):
    c = lambda X: np.full((np.atleast_2d(X).shape[0], 1), -2.0)
    G = blend_lipschitz(c, c, edge_mesh, 1, 0.05, CutoffProfile.for_collar(0.2),
                        mu=0.2)
    pts = [[0.0, 1.0], [0.5, 1.0], [0.93, 1.0], [1.0, 0.2]]
    np.testing.assert_allclose(G(pts), -2.0, atol=1e-12)


def test_blend_requires_t_below_mu_third(edge_mesh):
    c = lambda X: np.zeros((np.atleast_2d(X).shape[0], 1))
    with pytest.raises(ValueError):
        blend_lipschitz(c, c, edge_mesh, 1, 0.1, CutoffProfile.for_collar(0.2),
                        mu=0.2)


def test_cutoff_profile_shape():
    prof = CutoffProfile.for_collar(0.4)
    assert prof.eta(0.0) == 1.0
    assert prof.eta(1.0 - 0.4 / 2.0) == 1.0
    assert prof.eta(1.0 - 0.4 / 3.0) == 0.0
    r = np.linspace(0, 0.99, 100)
    e = prof.eta(r)
    assert np.all((0.0 <= e) & (e <= 1.0)) and np.all(np.diff(e) <= 1e-12)


def test_rescaling_comparability(edge_mesh):
    # hole-fill rescaling moves points; the displacement ratio across pairs
    # stays bounded and its max is stable under doubling the sample
    ident = FieldMap(2, 2, lambda X: np.array(X))
    R = fill_hole(ident, edge_mesh, 1, 0.25)
    dom = SkeletonDomain(edge_mesh, 1)

    def max_ratio(count, seed):
        rng = rng_for(seed, "cmp")
        idx = rng.integers(0, len(dom.faces), size=count)
        X = np.concatenate([dom.faces[i].sample(rng, 1, edge_mesh.eps)
                            for i in idx])
        Y = np.concatenate([dom.faces[i].sample(rng, 1, edge_mesh.eps)
                            for i in rng.integers(0, len(dom.faces), count)])
        d = np.max(np.abs(X - Y), axis=1)
        ok = d > 1e-9
        dr = np.max(np.abs(R(X) - R(Y)), axis=1)
        return float(np.max(dr[ok] / d[ok]))

    m1 = max_ratio(2000, 1)
    m2 = max_ratio(4000, 1)
    assert m1 < 10.0 and m2 <= m1 * 1.15


def test_lipschitz_approximate_trend_and_certificate():
    target = sphere_target(1, delta=0.3)
    mesh = MeshSpec(T=(0.13, 0.21), eps=0.5, n=2,
                    bounds=Box((-1.1, -1.1), (1.1, 1.1)))
    stages = lipschitz_approximate(vortex_map(2), target, mesh, 1, 0.6, 2.0,
                                   quad=QuadratureSpec(samples=8000, seed=3))
    errs = [st.params["error_p"] for st in stages]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    # Lipschitz certificate: finite and stable under sample refinement
    lip1 = empirical_lipschitz(stages[-1].payload, mesh, 1, 2000, rng_for(1, "l"))
    lip2 = empirical_lipschitz(stages[-1].payload, mesh, 1, 4000, rng_for(1, "l"))
    assert np.isfinite(lip1) and lip2 <= lip1 * 1.25
    # tube discipline: projected stage lies on the manifold
    dom = SkeletonDomain(mesh, 1)
    X = dom.faces[0].sample(rng_for(2, "t"), 200, mesh.eps)
    assert np.max(target.distance(stages[-1].payload(X))) < 1e-12


def test_lipschitz_approximate_rejects_bad_hypothesis():
    target = sphere_target(1, delta=0.3)
    mesh = MeshSpec(T=(0.0, 0.0), eps=0.5, n=2, bounds=Box((-1, -1), (1, 1)))
    with pytest.raises(ValueError):
        # sp = 0.8 < j = 1
        lipschitz_approximate(vortex_map(2), target, mesh, 1, 0.4, 2.0)


def test_thme_pipeline_constant():
    target = sphere_target(1, delta=0.3)
    f = constant_field(2, [1.0, 0.0])
    reports = thme_pipeline(f, target, Box((0, 0), (1, 1)), 0.6, 2.0,
                            (0.4, 0.2), t_samples=2,
                            quad=QuadratureSpec(samples=2000, seed=0),
                            stages=1)
    assert all(r.final_error_p == pytest.approx(0.0, abs=1e-20)
               for r in reports)
    assert all(r.tube_check["max_distance"] < 1e-12 for r in reports)


def test_default_schedule_preconditions():
    for mu, t in default_schedule(4):
        assert 0 < t < mu / 3.0 and 0 < mu < 1.0
