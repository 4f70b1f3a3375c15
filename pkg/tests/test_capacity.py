import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from treecap import (
    OracleConvergenceError,
    capacity,
    capacity_dual_oracle,
    capacity_p2_direct,
    capacity_point,
    capacity_primal_oracle,
    chain_tree,
    d_pi,
    energy,
    equilibrium,
    hardy,
    homogeneous_tree,
    measure_from_masses,
    normalize_antichain,
    target_nodes,
)
from treecap.capacity import dual_oracle_targets

from conftest import exponents, seeds, tree_and_set


def test_capacity_examples():
    tree = homogeneous_tree(2, 2)
    assert capacity(tree, tree.leaves, 2.0) == pytest.approx(4 / 7, rel=1e-15)
    assert capacity(tree, [], 2.0) == 0.0
    assert capacity(chain_tree(2), [2], 3.0) == pytest.approx(1 / 9, rel=1e-15)


@pytest.mark.parametrize("h", range(0, 21, 4))
def test_binary_closed_form(h):
    tree = homogeneous_tree(2, h)
    assert capacity(tree, [0], 2.0) == pytest.approx(2.0**h / (2.0 ** (h + 1) - 1), rel=1e-12)


@pytest.mark.parametrize("h", range(1, 5))
def test_binary_closed_form_oracle(h):
    tree = homogeneous_tree(2, h)
    assert capacity_primal_oracle(tree, [0], 2.0) == pytest.approx(2.0**h / (2.0 ** (h + 1) - 1), rel=1e-7)


def test_capacity_rejects():
    tree = homogeneous_tree(2, 2)
    with pytest.raises(ValueError):
        capacity(tree, [1, 3], 2.0)
    with pytest.raises(ValueError):
        capacity(tree, [1], 1.0)


def test_point_capacity_examples():
    tree = homogeneous_tree(2, 3)
    assert capacity_point(tree, int(tree.leaves[0]), 2.0) == pytest.approx(0.25)
    w = homogeneous_tree(2, 1, weight=2.7)
    assert capacity_point(w, 0, 3.0) == pytest.approx(2.7, rel=1e-14)
    vals = [capacity_point(chain_tree(n), n, 2.0) for n in (1, 10, 100, 1000)]
    assert vals == sorted(vals, reverse=True) and vals[-1] < 1e-2


@given(tree_and_set(), exponents)
def test_point_capacity_matches_recursion(te, p):
    tree, _ = te
    for v in range(tree.n_nodes):
        assert capacity_point(tree, v, p) == pytest.approx(capacity(tree, [v], p, interior=True), rel=1e-12)
        assert capacity_point(tree, v, p) == pytest.approx(d_pi(tree, v, p) ** (1 - p), rel=1e-12)


def test_equilibrium_chain():
    n = 4
    eq = equilibrium(chain_tree(n), [n], 2.0)
    np.testing.assert_allclose(eq.phi, 1 / (n + 1), rtol=1e-14)
    assert eq.capacity == pytest.approx(1 / (n + 1))
    assert eq.mu.support.tolist() == [n]
    assert eq.mu.mass[0] == pytest.approx(1 / (n + 1))


def test_equilibrium_binary_one_level():
    tree = homogeneous_tree(2, 1)
    eq = equilibrium(tree, tree.leaves, 2.0)
    assert eq.phi[0] == pytest.approx(2 / 3)
    np.testing.assert_allclose(eq.phi[1:], 1 / 3)
    np.testing.assert_allclose(hardy(tree, eq.phi)[1:], 1.0)
    assert eq.capacity == pytest.approx(2 / 3)
    assert "capacity" in eq.report()


def test_equilibrium_empty():
    with pytest.raises(ValueError):
        equilibrium(homogeneous_tree(2, 1), [], 2.0)


@given(tree_and_set(), exponents)
def test_equilibrium_invariants(te, p):
    tree, E = te
    q = p / (p - 1)
    eq = equilibrium(tree, E, p)
    assert eq.capacity == pytest.approx(capacity(tree, E, p), rel=1e-12)
    assert eq.capacity == pytest.approx(eq.phi[0] ** (p - 1) * tree.weight[0], rel=1e-10)
    If = hardy(tree, eq.phi)
    np.testing.assert_allclose(If[target_nodes(tree, E)], 1.0, atol=1e-8)
    span = eq.mu.istar > 0
    np.testing.assert_allclose(eq.phi[span], eq.mu.istar[span] ** (q - 1) * tree.weight[span] ** (1 - q),
                               rtol=1e-11)
    assert eq.mu.total == pytest.approx(eq.capacity, rel=1e-10)
    assert eq.max_residual <= 1e-8


def test_oracle_examples():
    tree = homogeneous_tree(2, 1)
    assert capacity_primal_oracle(tree, tree.leaves, 2.0) == pytest.approx(2 / 3, rel=1e-7)
    assert capacity_dual_oracle(tree, tree.leaves, 2.0) == pytest.approx(2 / 3, rel=1e-7)
    assert capacity_primal_oracle(chain_tree(2), [2], 2.0) == pytest.approx(1 / 3, rel=1e-7)
    assert capacity_primal_oracle(tree, [], 2.0) == 0.0
    assert capacity_dual_oracle(tree, [], 2.0) == 0.0


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_dual_ratio_scale_invariant(t):
    tree = chain_tree(3)
    p = 3.0
    mu = measure_from_masses(tree, [(3, t)])
    assert t**p / energy(tree, mu, p) ** (p - 1) == pytest.approx(d_pi(tree, 3, p) ** (1 - p), rel=1e-12)


def test_dual_certificate_measure():
    tree = homogeneous_tree(3, 2, weight=1.3)
    res = dual_oracle_targets(tree, tree.leaves, 1.5, tol=1e-9)
    cap = capacity(tree, [0], 1.5)
    assert res.value <= cap * (1 + 1e-12) <= res.upper * (1 + 1e-12)
    assert res.value == pytest.approx(cap, rel=1e-8)
    assert res.measure.total == pytest.approx(1.0)


def test_oracle_non_convergence_is_reported():
    # asymmetric weights so the uniform starting measure is not optimal
    tree = homogeneous_tree(3, 3).with_weights(np.linspace(0.5, 2.0, 40))
    with pytest.raises(OracleConvergenceError) as info:
        capacity_dual_oracle(tree, tree.leaves, 2.0, tol=1e-300, max_iter=3)
    assert info.value.residual > 0


@settings(max_examples=25)
@given(tree_and_set(), st.sampled_from([1.5, 2.0, 3.0]))
def test_oracles_agree(te, p):
    tree, E = te
    cap = capacity(tree, E, p)
    assert capacity_primal_oracle(tree, E, p, tol=1e-6) == pytest.approx(cap, rel=1e-5)
    assert capacity_dual_oracle(tree, E, p, tol=1e-8) == pytest.approx(cap, rel=1e-7)


@given(tree_and_set())
def test_p2_direct_solve(te):
    tree, E = te
    assert capacity_p2_direct(tree, E) == pytest.approx(capacity(tree, E, 2.0), rel=1e-9)


@given(tree_and_set(), exponents, seeds)
def test_set_monotonicity(te, p, seed):
    tree, E = te
    rng = np.random.default_rng(seed)
    extra = rng.choice(tree.n_nodes, size=2).tolist()
    F = normalize_antichain(tree, list(E.nodes) + extra)
    assert capacity(tree, E, p) <= capacity(tree, F, p) * (1 + 1e-12)


@given(tree_and_set(), exponents, seeds)
def test_truncation_monotonicity(te, p, seed):
    tree, E = te
    rng = np.random.default_rng(seed)
    deeper = []
    for a in E.nodes:
        kids = list(tree.children(a))
        deeper.append(int(rng.choice(kids)) if kids else a)
    assert capacity(tree, deeper, p) <= capacity(tree, E, p) * (1 + 1e-12)


@given(tree_and_set(), exponents)
def test_sibling_merge_invariance(te, p):
    tree, E = te
    for a in E.nodes:
        kids = list(tree.children(a))
        if kids:
            split = [b for b in E.nodes if b != a] + kids
            assert capacity(tree, split, p) == pytest.approx(capacity(tree, E, p), rel=1e-12)


@settings(max_examples=20)
@given(tree_and_set(), seeds, st.sampled_from([1.5, 2.0, 3.0]))
def test_subadditivity(te, seed, p):
    tree, E = te
    rng = np.random.default_rng(seed)
    F = normalize_antichain(tree, rng.choice(tree.n_nodes, size=2).tolist())
    union = normalize_antichain(tree, list(E.nodes) + list(F.nodes))
    cap_union = capacity_primal_oracle(tree, union, p, tol=1e-7)
    assert cap_union <= (capacity(tree, E, p) + capacity(tree, F, p)) * (1 + 1e-6)


def test_interior_mode_dominates_boundary():
    tree = homogeneous_tree(2, 2)
    assert capacity(tree, [0], 2.0, interior=True) == 1.0
    assert capacity(tree, [0], 2.0) == pytest.approx(4 / 7)
