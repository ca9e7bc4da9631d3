import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize

from rwdro.costs import CostSpec, cost_matrix
from rwdro.errors import SizeError
from rwdro.measures import DiscreteMeasure, Grid, marginal
from rwdro.ot import MAX_ATOMS, sinkhorn, sinkhorn_dual_value, wasserstein_exact


def test_exact_uniform_to_dirac():
    g = Grid(((0, 1),), 2)
    P = DiscreteMeasure.uniform(g)
    Q = DiscreteMeasure.dirac(g, 1)
    r = wasserstein_exact(P, Q, CostSpec("l2", 1))
    assert r.value == pytest.approx(0.5, abs=1e-12)


def test_exact_identity_is_zero(rng):
    g = Grid(((0, 1),), 6)
    P = DiscreteMeasure(g, rng.dirichlet(np.ones(6)))
    assert wasserstein_exact(P, P, CostSpec("l2", 2)).value == pytest.approx(0.0, abs=1e-12)


def test_exact_matches_1d_quantile_formula(rng):
    # in one dimension with c = |x - y| the optimal cost is the L1 distance between CDFs
    g = Grid(((0, 1),), 9)
    P = DiscreteMeasure(g, rng.dirichlet(np.ones(9)))
    Q = DiscreteMeasure(g, rng.dirichlet(np.ones(9)))
    h = g.spacing[0]
    expected = h * np.abs(np.cumsum(P.weights) - np.cumsum(Q.weights))[:-1].sum()
    r = wasserstein_exact(P, Q, CostSpec("l2", 1))
    assert r.value == pytest.approx(expected, abs=1e-10)
    np.testing.assert_allclose(marginal(r.coupling, "first").weights, P.weights, atol=1e-9)
    np.testing.assert_allclose(marginal(r.coupling, "second").weights, Q.weights, atol=1e-9)


def test_exact_size_cap():
    g = Grid(((0, 1),), MAX_ATOMS + 1)
    P = DiscreteMeasure.uniform(g)
    with pytest.raises(SizeError):
        wasserstein_exact(P, P, CostSpec())


def _dual_oracle(P, Q, spec, eps):
    """Maximize the semi-dual with a quasi-Newton method."""
    J = Q.support
    def neg(gJ):
        g = np.zeros(P.grid.size)
        g[J] = gJ
        return -sinkhorn_dual_value(P, Q, spec, eps, g)
    res = minimize(neg, np.zeros(len(J)), method="BFGS", options={"gtol": 1e-12, "maxiter": 10000})
    return -res.fun


@pytest.mark.parametrize("eps", [0.5, 0.1])
def test_sinkhorn_value_matches_quasi_newton_dual(rng, eps):
    g = Grid(((0, 1),), 5)
    P = DiscreteMeasure(g, rng.dirichlet(np.ones(5)))
    Q = DiscreteMeasure(g, rng.dirichlet(np.ones(5)))
    spec = CostSpec("l2", 2)
    r = sinkhorn(P, Q, spec, eps)
    assert r.converged and r.marginal_error <= 1e-9
    assert r.value == pytest.approx(_dual_oracle(P, Q, spec, eps), abs=1e-7)


def test_sinkhorn_tends_to_exact_value(rng):
    g = Grid(((0, 1),), 5)
    P = DiscreteMeasure(g, rng.dirichlet(np.ones(5)))
    Q = DiscreteMeasure(g, rng.dirichlet(np.ones(5)))
    spec = CostSpec("l2", 1)
    exact = wasserstein_exact(P, Q, spec).value
    gaps = [sinkhorn(P, Q, spec, e).value - exact for e in (0.1, 0.03, 0.01)]
    assert all(x >= -1e-9 for x in gaps)
    # value includes eps*KL(pi|PxQ) which is bounded by eps*log(5)
    assert gaps[-1] <= 0.01 * np.log(5) + 1e-9


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1))
def test_sinkhorn_weak_duality(seed):
    rng = np.random.default_rng(seed)
    g = Grid(((0, 1),), 5)
    P = DiscreteMeasure(g, rng.dirichlet(np.ones(5)))
    Q = DiscreteMeasure(g, rng.dirichlet(np.ones(5)))
    spec = CostSpec("l2", 1)
    r = sinkhorn(P, Q, spec, 0.1)
    # any potential gives a lower bound on the primal value
    for _ in range(3):
        assert sinkhorn_dual_value(P, Q, spec, 0.1, rng.normal(size=5)) <= r.value + 1e-9
    assert sinkhorn_dual_value(P, Q, spec, 0.1, r.potential) == pytest.approx(r.value, abs=1e-8)


def test_sinkhorn_sparse_support():
    g = Grid(((0, 1),), 5)
    P = DiscreteMeasure(g, [0.5, 0, 0.5, 0, 0])
    Q = DiscreteMeasure(g, [0, 0, 0, 0.3, 0.7])
    spec = CostSpec("l2", 1)
    r = sinkhorn(P, Q, spec, 0.05)
    assert r.coupling.weights[1].sum() == 0 and r.coupling.weights[:, 0].sum() == 0
    assert np.isfinite(r.value)


def test_sinkhorn_rejects_zero_eps():
    g = Grid(((0, 1),), 2)
    P = DiscreteMeasure.uniform(g)
    with pytest.raises(ValueError):
        sinkhorn(P, P, CostSpec(), 0.0)


def test_cost_matrix_consistency_for_exact():
    g = Grid(((0, 1),), 3)
    P = DiscreteMeasure.dirac(g, 0)
    Q = DiscreteMeasure.dirac(g, 2)
    assert wasserstein_exact(P, Q, CostSpec("l2", 2)).value == pytest.approx(cost_matrix(CostSpec("l2", 2), g)[0, 2])
