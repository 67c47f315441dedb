import numpy as np
import pytest
import scipy.optimize
from hypothesis import given, settings
from hypothesis import strategies as st

from graphssl.continuum import discretize
from graphssl.density import Density, sample_cloud
from graphssl.graph import Kernel, build_graph, laplacian
from graphssl.labels import Ball, Model1Spec, Model2Spec, assign_labels
from graphssl.models import (
    IndicatorPotential,
    LevelSetPotential,
    MapSolverConfig,
    MapSolverError,
    ProbitPotential,
    continuum_krige,
    continuum_labeled_nodes,
    continuum_probit_map,
    krige,
    levelset_objective,
    log_psi,
    map_gradient_norm,
    probit_map,
    probit_objective,
    psi_ratio,
    sparse_krige,
    sparse_probit_map,
)
from graphssl.spectral import FractionalOperator, decompose_graph


def _prior(graph, alpha=2.0, tau=1.0):
    eig = decompose_graph(graph)
    return FractionalOperator(eig, alpha=alpha, tau=tau, scale=graph.s_n)


class TestLogPsi:
    def test_against_mpmath(self):
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 40
        zs = np.linspace(-30.0, 8.0, 200)
        ours = log_psi(zs, 1.0)
        refs = np.array([float(mp.log(mp.ncdf(mp.mpf(float(z))))) for z in zs])
        assert np.max(np.abs(ours - refs) / np.abs(refs)) < 1e-10

    def test_gamma_scaling(self):
        assert log_psi(0.3, 0.1) == pytest.approx(log_psi(3.0, 1.0), rel=1e-14)

    def test_monotone_and_negative(self):
        zs = np.linspace(-35.0, 10.0, 500)
        vals = log_psi(zs, 1.0)
        assert np.all(np.isfinite(vals))
        assert np.all(np.diff(vals) > 0)
        assert np.all(vals < 0)

    def test_invalid_gamma(self):
        with pytest.raises(ValueError):
            log_psi(0.0, 0.0)

    def test_ratio_is_derivative(self):
        for z in (-5.0, -1.0, 0.0, 2.0):
            h = 1e-6
            num = (log_psi(z + h, 1.0) - log_psi(z - h, 1.0)) / (2 * h)
            assert psi_ratio(z, 1.0) == pytest.approx(num, rel=1e-6)

    def test_ratio_finite_deep_tail(self):
        r = psi_ratio(np.array([-50.0, -200.0]), 1.0)
        assert np.all(np.isfinite(r)) and np.all(r > 0)


@settings(deadline=None, max_examples=80)
@given(z=st.floats(-30.0, 8.0), gamma=st.floats(1e-3, 10.0))
def test_log_psi_stability_property(z, gamma):
    v = log_psi(z * gamma, gamma)
    assert np.isfinite(v) and v < 0


class TestPotentials:
    def test_probit_curvature_positive(self):
        pot = ProbitPotential(gamma=0.5, indices=np.array([0, 1]),
                              y=np.array([1.0, -1.0]), weights=np.ones(2))
        for ul in ([0.5, -0.5], [-3.0, 3.0], [0.0, 0.0]):
            assert np.all(pot.curvature_at_labeled(np.array(ul)) > 0)

    def test_probit_invalid_gamma(self):
        with pytest.raises(ValueError):
            ProbitPotential(gamma=-1.0, indices=np.array([0]),
                            y=np.array([1.0]), weights=np.ones(1))

    def test_levelset_values(self):
        pot = LevelSetPotential(gamma=0.5, indices=np.array([0, 1]),
                                y=np.array([1.0, -1.0]), weights=np.ones(2))
        assert pot.value_at_labeled(np.array([2.0, -2.0])) == 0.0
        # one wrong sign: |y - S(u)|^2 = 4, weight 1, / (2 gamma^2)
        assert pot.value_at_labeled(np.array([2.0, 2.0])) == pytest.approx(4 / 0.5)

    def test_indicator_values(self):
        pot = IndicatorPotential(indices=np.array([0]), y=np.array([1.0]))
        assert pot.value(np.array([0.5, 9.9])) == 0.0
        assert pot.value(np.array([-0.5, 9.9])) == np.inf

    def test_indicator_empty_is_zero(self):
        pot = IndicatorPotential(indices=np.array([], dtype=int), y=np.array([]))
        assert pot.value(np.array([1.0, -1.0])) == 0.0


class TestKrige:
    def test_interpolates_labels(self, small_graph):
        graph, labels = small_graph
        prior = _prior(graph)
        u = krige(prior, labels)
        assert np.allclose(u[labels.indices], labels.y, atol=1e-8)

    def test_minimum_energy_among_interpolants(self, small_graph):
        graph, labels = small_graph
        prior = _prior(graph)
        u = krige(prior, labels)
        rng = np.random.default_rng(0)
        from graphssl.spectral import quadratic_form
        for _ in range(5):
            z = rng.standard_normal(graph.n)
            v = z + krige(prior, labels.indices, labels.y - z[labels.indices])
            assert np.allclose(v[labels.indices], labels.y, atol=1e-8)
            assert quadratic_form(prior, v) >= quadratic_form(prior, u) - 1e-12

    def test_sparse_route_matches_spectral(self, small_graph):
        graph, labels = small_graph
        prior = _prior(graph, alpha=2.0, tau=1.0)
        u_spec = krige(prior, labels)
        base = laplacian(graph) * graph.s_n
        u_sparse = sparse_krige(base, 2, 1.0, labels.indices, labels.y)
        assert np.allclose(u_spec, u_sparse, rtol=1e-9, atol=1e-11)

    def test_sparse_requires_integer_alpha(self, small_graph):
        graph, labels = small_graph
        base = laplacian(graph) * graph.s_n
        with pytest.raises(ValueError):
            sparse_krige(base, 1.5, 1.0, labels.indices, labels.y)

    def test_duplicate_labels_singular(self, small_graph):
        graph, labels = small_graph
        prior = _prior(graph)
        idx = np.array([labels.indices[0], labels.indices[0]])
        with pytest.raises(ValueError, match="singular"):
            krige(prior, idx, np.array([1.0, -1.0]))


class TestProbitMap:
    def test_first_order_optimality(self, small_graph):
        graph, labels = small_graph
        prior = _prior(graph)
        pot = ProbitPotential.for_graph(labels, 0.1)
        u = probit_map(prior, pot)
        assert map_gradient_norm(prior, pot, u) < 1e-6

    def test_matches_generic_optimizer(self):
        # independent oracle: BFGS on the node-space objective, tiny problem
        cloud = sample_cloud(Density("uniform"), 28, seed=3)
        spec = Model2Spec(points=np.array([[0.25, 0.25], [0.75, 0.75]]),
                          signs=np.array([1.0, -1.0]))
        cloud, labels = assign_labels(cloud, spec)
        g = build_graph(cloud, Kernel(epsilon=0.5, dim=2))
        prior = _prior(g, alpha=1.0, tau=1.0)
        pot = ProbitPotential.for_graph(labels, 0.5)
        u = probit_map(prior, pot)
        res = scipy.optimize.minimize(
            lambda v: probit_objective(v, prior, pot), np.zeros(g.n),
            method="BFGS", options={"gtol": 1e-12, "maxiter": 2000})
        assert np.allclose(u, res.x, atol=1e-5)

    def test_init_independence(self, small_graph):
        graph, labels = small_graph
        prior = _prior(graph)
        pot = ProbitPotential.for_graph(labels, 0.1)
        rng = np.random.default_rng(4)
        u1 = probit_map(prior, pot, init=rng.standard_normal(graph.n))
        u2 = probit_map(prior, pot, init=5.0 * rng.standard_normal(graph.n))
        assert np.allclose(u1, u2, atol=1e-6)

    def test_requires_positive_spectrum(self, small_graph):
        graph, labels = small_graph
        eig = decompose_graph(graph)
        prior = FractionalOperator(eig, alpha=1.0, tau=0.0, scale=graph.s_n)
        pot = ProbitPotential.for_graph(labels, 0.1)
        with pytest.raises(ValueError, match="tau"):
            probit_map(prior, pot)

    def test_budget_exhaustion_raises(self, small_graph):
        graph, labels = small_graph
        prior = _prior(graph)
        pot = ProbitPotential.for_graph(labels, 1e-4)
        with pytest.raises(MapSolverError) as err:
            probit_map(prior, pot, cfg=MapSolverConfig(tol=1e-14, max_iter=1))
        assert err.value.iterate.shape == (graph.n,)

    def test_sparse_route_matches_spectral(self, small_graph):
        graph, labels = small_graph
        prior = _prior(graph, alpha=3.0, tau=1.0)
        pot = ProbitPotential.for_graph(labels, 0.1)
        u_spec = probit_map(prior, pot)
        base = laplacian(graph) * graph.s_n
        u_sparse = sparse_probit_map(base, np.full(graph.n, 1.0 / graph.n),
                                     3, 1.0, pot)
        assert np.allclose(u_spec, u_sparse, rtol=1e-7, atol=1e-9)

    def test_midpoint_convexity(self, small_graph):
        graph, labels = small_graph
        prior = _prior(graph)
        pot = ProbitPotential.for_graph(labels, 0.3)
        rng = np.random.default_rng(5)
        for _ in range(20):
            u, v = rng.standard_normal((2, graph.n))
            mid = probit_objective(0.5 * (u + v), prior, pot)
            avg = 0.5 * (probit_objective(u, prior, pot) + probit_objective(v, prior, pot))
            assert mid < avg


class TestLevelSetScaling:
    def test_zero_misfit_rescaling_decreases_objective(self, small_graph):
        graph, labels = small_graph
        prior = _prior(graph)
        pot = LevelSetPotential.for_graph(labels, 0.5)
        u = krige(prior, labels)  # correct signs at labels: zero misfit
        assert pot.value(u) == 0.0
        vals = [levelset_objective(c * u, prior, pot) for c in (1.0, 0.5, 0.1)]
        assert vals[0] > vals[1] > vals[2] > 0.0


class TestContinuumSolvers:
    def test_continuum_krige_routes_agree(self):
        op = discretize(Density("uniform"), 16)
        idx = np.array([40, 200])
        y = np.array([1.0, -1.0])
        direct = continuum_krige(op, 2, 0.8, idx, y)
        spectral = continuum_krige(op, 2.0 + 1e-12, 0.8, idx, y, m=op.grid.size)
        assert np.allclose(direct, spectral, rtol=1e-7, atol=1e-9)
        assert np.allclose(direct[idx], y, atol=1e-8)

    def test_continuum_probit_routes_agree(self):
        op = discretize(Density("uniform"), 16)
        spec = Model1Spec(omega_plus=Ball((0.25, 0.25), 0.1),
                          omega_minus=Ball((0.75, 0.75), 0.1))
        idx, y, w = continuum_labeled_nodes(op, spec)
        pot = ProbitPotential(gamma=0.1, indices=idx, y=y, weights=w)
        direct = continuum_probit_map(op, 2.0, tau=1.0, pot=pot)
        spectral = continuum_probit_map(op, 2.0, tau=1.0, pot=pot, m=op.grid.size)
        assert np.allclose(direct, spectral, rtol=1e-6, atol=1e-8)

    def test_labeled_nodes_model1_weights(self):
        op = discretize(Density("uniform"), 16)
        spec = Model1Spec(omega_plus=Ball((0.25, 0.25), 0.1),
                          omega_minus=Ball((0.75, 0.75), 0.1))
        idx, y, w = continuum_labeled_nodes(op, spec)
        assert len(idx) > 0 and set(np.unique(y)) == {-1.0, 1.0}
        assert np.allclose(w, op.weights[idx])

    def test_labeled_nodes_model2_snaps(self):
        op = discretize(Density("uniform"), 16)
        spec = Model2Spec(points=np.array([[0.25, 0.25]]), signs=np.array([1.0]))
        idx, y, w = continuum_labeled_nodes(op, spec)
        coords = op.grid.coordinates()
        assert np.linalg.norm(coords[idx[0]] - [0.25, 0.25]) <= op.grid.h
        assert w[0] == 1.0
