import numpy as np
import pytest
from hypothesis import given, strategies as st

from treecap import (
    adjoint_field,
    carleson_norm,
    carleson_ratios,
    chain_tree,
    energy,
    energy_density,
    equilibrium,
    hardy,
    hardy_sum,
    homogeneous_tree,
    maximal_field,
    maximal_fn,
    measure_from_masses,
    potential_V,
    wolff_potential,
)
from treecap.potential import weak_type_sides
from treecap.tree import zero_measure

from conftest import exponents, seeds, tree_and_measure, tree_and_set


def _leaf_atom(n):
    tree = chain_tree(n)
    return tree, measure_from_masses(tree, [(n, 1.0)])


def test_hardy_examples():
    tree = homogeneous_tree(2, 3)
    leaf = int(tree.leaves[0])
    assert hardy_sum(tree, 1.0, leaf) == 4.0
    root_only = np.zeros(tree.n_nodes)
    root_only[0] = 1.0
    np.testing.assert_array_equal(hardy(tree, root_only), np.ones(tree.n_nodes))
    assert hardy_sum(tree, 0.0, leaf) == 0.0


def test_adjoint_examples():
    tree = homogeneous_tree(2, 2)
    mu = measure_from_masses(tree, [(v, 0.25) for v in tree.leaves])
    ist = adjoint_field(tree, mu)
    assert ist[0] == 1.0 and ist[1] == ist[2] == 0.5
    np.testing.assert_array_equal(adjoint_field(tree, zero_measure(tree)), 0.0)


@pytest.mark.parametrize("n", [0, 1, 4, 9])
def test_leaf_atom_values(n):
    tree, mu = _leaf_atom(n)
    assert energy(tree, mu, 2.0) == pytest.approx(n + 1)
    assert potential_V(tree, mu, 2.0, n) == pytest.approx(n + 1)
    assert carleson_norm(tree, mu, 2.0) == pytest.approx(n + 1)


def test_potential_off_geodesic():
    tree = homogeneous_tree(2, 3)
    mu = measure_from_masses(tree, [(int(tree.leaves[0]), 1.0)])
    assert potential_V(tree, mu, 2.0, int(tree.leaves[-1])) == pytest.approx(1.0)


def test_zero_measure_conventions():
    tree = homogeneous_tree(3, 2)
    z = zero_measure(tree)
    assert energy(tree, z, 2.0) == 0.0
    assert carleson_norm(tree, z, 2.0) == 0.0
    np.testing.assert_array_equal(wolff_potential(tree, z, 3.0), 0.0)
    with pytest.raises(ValueError, match="zero measure"):
        maximal_fn(tree, z, 1.0, 0)


def test_p_must_exceed_one():
    tree, mu = _leaf_atom(2)
    for fn in (energy, carleson_norm):
        with pytest.raises(ValueError):
            fn(tree, mu, 1.0)


@given(tree_and_measure(), exponents)
def test_energy_homogeneity(tm, p):
    tree, mu = tm
    q = p / (p - 1)
    assert energy(tree, mu.scaled(2.0), p) == pytest.approx(2.0**q * energy(tree, mu, p), rel=1e-12)


@given(tree_and_measure(), seeds)
def test_fubini(tm, seed):
    tree, mu = tm
    f = np.random.default_rng(seed).random(tree.n_nodes)
    left = float(np.sum(hardy(tree, f)[mu.support] * mu.mass))
    right = float(np.sum(f * mu.istar))
    assert left == pytest.approx(right, rel=1e-12)


@given(tree_and_measure(), exponents)
def test_energy_is_integral_of_potential(tm, p):
    tree, mu = tm
    V = wolff_potential(tree, mu, p)
    assert energy(tree, mu, p) == pytest.approx(float(np.sum(V[mu.support] * mu.mass)), rel=1e-12)
    assert energy(tree, mu, p) == pytest.approx(float(np.sum(energy_density(tree, mu, p))), rel=1e-14)


@given(tree_and_measure(), exponents, st.floats(1e-3, 1e3))
def test_carleson_homogeneity(tm, p, c):
    tree, mu = tm
    assert carleson_norm(tree, mu.scaled(c), p) == pytest.approx(c * carleson_norm(tree, mu, p), rel=1e-10)


@given(tree_and_measure(), exponents)
def test_carleson_norm_dominates_root_ratio(tm, p):
    tree, mu = tm
    ratios = carleson_ratios(tree, mu, p)
    assert np.all(np.isnan(ratios) == (mu.istar == 0))
    root = energy(tree, mu, p) / mu.total
    assert carleson_norm(tree, mu, p) >= root ** (p - 1) * (1 - 1e-12)


@given(tree_and_set(), exponents)
def test_equilibrium_norm_is_one(te, p):
    tree, E = te
    eq = equilibrium(tree, E, p)
    assert carleson_norm(tree, eq.mu, p) == pytest.approx(1.0, rel=1e-9)


@given(tree_and_measure(), seeds)
def test_maximal_function(tm, seed):
    tree, mu = tm
    rng = np.random.default_rng(seed)
    np.testing.assert_allclose(maximal_field(tree, mu, 1.0)[mu.istar > 0], 1.0, rtol=1e-12)
    np.testing.assert_allclose(maximal_field(tree, mu, 3.5)[mu.istar > 0], 3.5, rtol=1e-12)
    M = maximal_field(tree, mu, rng.random(tree.n_nodes))
    child = np.arange(1, tree.n_nodes)
    ok = np.isfinite(M[child]) & np.isfinite(M[tree.parent[child]])
    assert np.all(M[child][ok] >= M[tree.parent[child]][ok])


@given(tree_and_measure(), exponents, seeds)
def test_weak_type_bound(tm, p, seed):
    tree, mu = tm
    rng = np.random.default_rng(seed)
    q = p / (p - 1)
    sigma = rng.exponential(size=tree.n_nodes) * (rng.random(tree.n_nodes) < 0.7)
    g = rng.exponential(size=tree.n_nodes)
    lhs, rhs = weak_type_sides(tree, mu, sigma, g, p)
    assert lhs <= 2 * q / (q - 1) * rhs * (1 + 1e-12)
