import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from rwdro.measures import (Coupling, DiscreteMeasure, Grid, expectation, kl_divergence,
                            load_empirical, marginal, read_samples_csv, renormalize)


def test_grid_is_lexicographic_product():
    g = Grid(((0, 1), (2, 4)), 3)
    assert g.size == 9
    assert g.points[:3].tolist() == [[0, 2], [0, 3], [0, 4]]
    assert g.points[-1].tolist() == [1, 4]
    assert sorted(map(tuple, g.points)) == list(map(tuple, g.points))


@pytest.mark.parametrize("bounds,n", [(((1, 1),), 3), (((0, 1),), 1), (((0, 1),) * 3, 2)])
def test_grid_rejects_bad_shapes(bounds, n):
    with pytest.raises(ValueError):
        Grid(bounds, n)


def test_measure_validation():
    g = Grid(((0, 1),), 3)
    with pytest.raises(ValueError):
        DiscreteMeasure(g, [0.5, 0.5, 0.1])
    with pytest.raises(ValueError):
        DiscreteMeasure(g, [1.5, -0.5, 0.0])
    with pytest.raises(ValueError):
        DiscreteMeasure(g, [1.0])


def test_renormalize_is_explicit():
    g = Grid(((0, 1),), 2)
    with pytest.raises(ValueError):
        DiscreteMeasure(g, [2.0, 2.0])
    assert DiscreteMeasure(g, renormalize([2.0, 2.0])).weights.tolist() == [0.5, 0.5]


def test_product_coupling_marginals():
    g = Grid(((0, 1),), 4)
    P = DiscreteMeasure(g, [0.1, 0.2, 0.3, 0.4])
    Q = DiscreteMeasure(g, [0.4, 0.4, 0.1, 0.1])
    pi = Coupling.product(P, Q)
    np.testing.assert_allclose(marginal(pi, "first").weights, P.weights, atol=1e-15)
    np.testing.assert_allclose(marginal(pi, "second").weights, Q.weights, atol=1e-15)


def test_diagonal_coupling_marginals():
    g = Grid(((0, 1),), 3)
    P = DiscreteMeasure(g, [0.2, 0.3, 0.5])
    pi = Coupling.diagonal(P)
    assert marginal(pi, "first").weights.tolist() == P.weights.tolist()
    assert marginal(pi, "second").weights.tolist() == P.weights.tolist()


def test_random_coupling_marginals_match_loops(rng):
    g = Grid(((0, 1),), 3)
    w = rng.random((3, 3))
    w /= w.sum()
    pi = Coupling(g, w)
    rows = [sum(w[i][j] for j in range(3)) for i in range(3)]
    cols = [sum(w[i][j] for i in range(3)) for j in range(3)]
    np.testing.assert_allclose(marginal(pi, "first").weights, rows, atol=1e-15)
    np.testing.assert_allclose(marginal(pi, "second").weights, cols, atol=1e-15)


def test_coupling_checks_declared_first_marginal():
    g = Grid(((0, 1),), 2)
    P = DiscreteMeasure(g, [0.5, 0.5])
    with pytest.raises(ValueError):
        Coupling(g, [[0.25, 0.25], [0.0, 0.5]], first=DiscreteMeasure(g, [1.0, 0.0]))
    Coupling(g, [[0.25, 0.25], [0.0, 0.5]], first=P)


def test_expectation():
    g = Grid(((0, 1),), 2)
    assert expectation(DiscreteMeasure.uniform(g), [0, 1]) == 0.5
    g5 = Grid(((0, 1),), 5)
    v = [3.0, -1.0, 7.5, 2.0, 0.25]
    assert expectation(DiscreteMeasure.dirac(g5, 2), v) == 7.5
    with pytest.raises(ValueError):
        expectation(DiscreteMeasure.uniform(g5), [1, 2])


def test_expectation_matches_loop(rng):
    g = Grid(((0, 1),), 7)
    w = rng.dirichlet(np.ones(7))
    v = rng.normal(size=7)
    total = 0.0
    for i in range(7):
        total += w[i] * v[i]
    assert expectation(DiscreteMeasure(g, w), v) == pytest.approx(total, abs=1e-15)


def test_kl_basic():
    g = Grid(((0, 1),), 2)
    a = Coupling(g, [[0.1, 0.2], [0.3, 0.4]])
    assert kl_divergence(a, a) == 0.0
    b = Coupling(g, [[0.5, 0.0], [0.0, 0.5]])
    assert kl_divergence(a, b) == math.inf
    # zero cells of the numerator contribute nothing
    assert math.isfinite(kl_divergence(b, a))


def test_kl_two_by_two_term_by_term():
    g = Grid(((0, 1),), 2)
    a = [[0.1, 0.2], [0.3, 0.4]]
    b = [[0.25, 0.25], [0.4, 0.1]]
    expected = (0.1 * math.log(0.1 / 0.25) + 0.2 * math.log(0.2 / 0.25)
                + 0.3 * math.log(0.3 / 0.4) + 0.4 * math.log(0.4 / 0.1))
    assert kl_divergence(Coupling(g, a), Coupling(g, b)) == pytest.approx(expected, abs=1e-15)


@given(hnp.arrays(float, (3, 3), elements=st.floats(0, 1)),
       hnp.arrays(float, (3, 3), elements=st.floats(1e-3, 1)))
def test_gibbs_inequality(a, b):
    if a.sum() <= 0:
        a = np.ones((3, 3))
    g = Grid(((0, 1),), 3)
    A = Coupling(g, a / a.sum())
    B = Coupling(g, b / b.sum())
    assert kl_divergence(A, B) >= -1e-15


@given(hnp.arrays(float, (4, 4), elements=st.floats(1e-6, 1)))
def test_coupling_mass_through_marginal(w):
    g = Grid(((0, 1),), 4)
    pi = Coupling(g, w / w.sum())
    assert expectation(marginal(pi, "first"), np.ones(4)) == pytest.approx(1.0, abs=1e-12)


def test_load_empirical_distinct_and_duplicates():
    g = Grid(((0, 1),), 5)
    m = load_empirical(g, [[0.0], [0.25], [0.5], [1.0]])
    assert sorted(m.weights[m.support].tolist()) == [0.25] * 4
    m2 = load_empirical(g, [[0.5], [0.5]])
    assert m2.weights[2] == 1.0 and len(m2.support) == 1


def test_load_empirical_rejects_out_of_bounds_row():
    g = Grid(((0, 1),), 5)
    with pytest.raises(ValueError, match="row 2"):
        load_empirical(g, [[0.1], [0.2], [1.3]])


def test_snapping_tie_goes_to_smaller_point():
    g = Grid(((0, 1),), 3)  # 0, 0.5, 1
    m = load_empirical(g, [[0.25]])
    assert m.weights[0] == 1.0


@given(st.lists(st.floats(0, 1), min_size=1, max_size=60))
def test_empirical_total_mass_exact(xs):
    g = Grid(((0, 1),), 11)
    m = load_empirical(g, [[x] for x in xs])
    assert expectation(m, np.ones(g.size)) == 1.0


def test_read_samples_csv(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("# x,y\n0.1,0.2\n0.9,0.8\n")
    rows = read_samples_csv(p, 2)
    assert rows == [[0.1, 0.2], [0.9, 0.8]]
    g = Grid(((0, 1), (0, 1)), 3)
    m = load_empirical(g, rows)
    assert m.weights[g.index_of([0, 0])] == 0.5
    p.write_text("0.1\n")
    with pytest.raises(ValueError):
        read_samples_csv(p, 2)
