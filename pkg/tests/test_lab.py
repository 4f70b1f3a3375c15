import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from treecap import (
    SpaceMeasure,
    capacity,
    chain_tree,
    check_capacity_transfer,
    check_cmcap,
    check_energy_equivalence,
    check_monotonicity,
    check_mww,
    check_shadow,
    check_trace_conditions,
    equilibrium,
    homogeneous_tree,
    lebesgue,
    log_slope,
    make_space,
    measure_from_masses,
    normalize_antichain,
    random_antichain,
    random_measure,
    random_tree,
    weight_pi_s,
)
from treecap.lab import _cap_ratio
from treecap.lab import testing_constant as c1_constant
from treecap.tree import zero_measure

from conftest import seeds, tree_and_measure, tree_and_set


def test_log_slope():
    xs = np.arange(5)
    assert log_slope(xs, np.exp(0.3 * xs)) == pytest.approx(0.3)
    assert log_slope([1], [2.0]) == 0.0


def test_random_instances_are_seeded():
    a = random_tree(np.random.default_rng(7))
    b = random_tree(np.random.default_rng(7))
    np.testing.assert_array_equal(a.parent, b.parent)
    leaves_depth = a.depth[a.leaves]
    assert np.all(leaves_depth == leaves_depth[0])
    E = random_antichain(np.random.default_rng(1), a)
    assert len(E) >= 1 and normalize_antichain(a, E.nodes) == E
    mu = random_measure(np.random.default_rng(1), a)
    assert set(mu.support.tolist()) <= set(a.leaves.tolist())


def test_report_serializes():
    tree = homogeneous_tree(2, 2)
    rep = check_cmcap(tree, [0], 2.0, n_samples=5, seed=3)
    rec = json.loads(rep.to_json())
    assert rec["name"] == "cmcap" and rec["seed"] == 3 and rec["passed"] is True


def test_cmcap_examples():
    n = 5
    tree = chain_tree(n)
    atom = measure_from_masses(tree, [(n, 2.0)])
    assert _cap_ratio(tree, atom, normalize_antichain(tree, [n]), 2.0) == pytest.approx(1 / (n + 1))
    binary = homogeneous_tree(2, 2)
    eq = equilibrium(binary, [0], 2.0)
    assert _cap_ratio(binary, eq.mu, normalize_antichain(binary, [0]), 2.0) == pytest.approx(4 / 7)
    assert _cap_ratio(binary, zero_measure(binary), normalize_antichain(binary, [0]), 2.0) == 0.0
    with pytest.raises(ValueError):
        check_cmcap(binary, [], 2.0)


@settings(max_examples=25)
@given(tree_and_set(), st.sampled_from([1.5, 2.0, 3.0]), seeds)
def test_cmcap_passes(te, p, seed):
    tree, E = te
    rep = check_cmcap(tree, E, p, n_samples=40, seed=seed)
    assert rep.empirical["part_a"] and rep.empirical["part_b"] and rep.empirical["part_c"]
    assert rep.passed


def test_monotonicity_examples():
    tree = homogeneous_tree(2, 3)
    mu = equilibrium(tree, [0], 2.0).mu
    one = check_monotonicity(tree, mu, 1.0, 2.0)
    assert one.passed and one.ratio <= 1 + 1e-12
    zero = check_monotonicity(tree, mu, 0.0, 2.0)
    assert zero.passed and zero.left == 0.0 and zero.right == 0.0
    with pytest.raises(ValueError):
        check_monotonicity(tree, mu, 1.5, 2.0)


@given(tree_and_measure(), st.sampled_from([1.5, 2.0, 3.0]), seeds)
def test_monotonicity_random(tm, p, seed):
    tree, mu = tm
    lam = np.random.default_rng(seed).random(tree.n_nodes)
    rep = check_monotonicity(tree, mu, lam, p)
    assert rep.passed
    assert rep.empirical["norm_ratio"] <= p ** (p - 1) * (1 + 1e-9)


def test_trace_examples():
    tree = homogeneous_tree(2, 3)
    E = normalize_antichain(tree, [1, 5])
    eq = equilibrium(tree, E, 2.0)
    rep = check_trace_conditions(tree, eq.mu, 2.0, [E])
    assert rep.empirical["C1"] == pytest.approx(1.0)
    assert rep.empirical["capacitary_constant"] == pytest.approx(1.0)
    assert rep.passed
    n = 4
    chain = chain_tree(n)
    atom = measure_from_masses(chain, [(n, 1.0)])
    rep = check_trace_conditions(chain, atom, 2.0, [[n]])
    assert c1_constant(chain, atom, 2.0) == pytest.approx(n + 1)
    assert rep.empirical["capacitary_constant"] == pytest.approx(1.0)
    z = check_trace_conditions(chain, zero_measure(chain), 2.0, [[n]])
    assert z.empirical["C1"] == 0.0 and z.empirical["testing_norm"] == 0.0 and z.passed


@settings(max_examples=30)
@given(tree_and_measure(), st.sampled_from([1.5, 2.0, 3.0]), seeds)
def test_trace_random(tm, p, seed):
    tree, mu = tm
    rng = np.random.default_rng(seed)
    family = [random_antichain(rng, tree, density=0.2) for _ in range(4)]
    rep = check_trace_conditions(tree, mu, p, family, f_samples=10, seed=seed)
    assert rep.passed
    assert rep.left <= p ** (p - 1) * (1 + 1e-9)


def test_shadow_examples():
    tree = homogeneous_tree(2, 2)
    rep = check_shadow(tree, [0], 2.0)
    assert rep.ratio == pytest.approx(7 / 4)
    assert rep.empirical["interior_oracle"] == pytest.approx(1.0, rel=1e-5)
    assert check_shadow(tree, [], 2.0).passed


@pytest.mark.parametrize("s,p", [(0.5, 2.0), (0.75, 2.0)])
def test_shadow_constant_stable(s, p):
    ratios = []
    for depth in range(4, 10):
        sp = make_space("interval", depth)
        tree = weight_pi_s(sp, s, p)
        rep = check_shadow(tree, [sp.node_at(2, 1)], p, oracle_limit=0)
        assert rep.passed
        ratios.append(rep.ratio)
    assert all(r >= 1 for r in ratios)
    assert ratios == sorted(ratios)


def test_energy_equivalence_examples():
    sp = make_space("interval", 9)
    rep = check_energy_equivalence(sp, lebesgue(sp), 0.5, 2.0, range(4, 9))
    assert rep.passed, rep.empirical
    scaled = check_energy_equivalence(sp, lebesgue(sp).scaled(5.0), 0.5, 2.0, range(4, 9))
    np.testing.assert_allclose(scaled.empirical["ratios"], rep.empirical["ratios"], rtol=1e-10)
    zero = check_energy_equivalence(sp, SpaceMeasure(), 0.5, 2.0, range(4, 6))
    assert zero.passed and zero.left == zero.right == 0.0


def test_energy_equivalence_atom():
    sp = make_space("interval", 10)
    # s < 1/p' keeps the atom's energy finite
    rep = check_energy_equivalence(sp, [(Fraction(1, 3), 1.0)], 0.3, 2.0, range(4, 9))
    assert rep.passed, rep.empirical
    assert not rep.empirical["divergent"]
    div = check_energy_equivalence(sp, [(Fraction(1, 3), 1.0)], 0.6, 2.0, range(4, 9))
    assert div.empirical["divergent"]


def test_capacity_transfer_interval():
    sp = make_space("interval", 1)
    rep = check_capacity_transfer(sp, "interval 0 1/4", 0.5, 2.0, range(4, 9))
    assert rep.passed
    assert 1.0 <= rep.empirical["window"][0] and rep.empirical["C"] < 1.1


def test_mww_examples():
    sp = make_space("interval", 6)
    rep = check_mww(sp, lebesgue(sp), 2.0, 5)
    assert rep.passed and rep.empirical["elementary_holds"]
    leaf = int(sp.tree.leaves[3])
    atom = check_mww(sp, measure_from_masses(sp.tree, [(leaf, 1.0)]), 1.5, 6)
    assert atom.passed and math.isfinite(atom.ratio)
    zero = check_mww(sp, zero_measure(sp.tree), 2.0, 4)
    assert zero.passed and zero.left == 0.0 and zero.right == 0.0
    with pytest.raises(ValueError):
        check_mww(sp, lebesgue(sp), 0.5, 4)


@pytest.mark.parametrize("kind", ["cube-2", "cantor"])
def test_mww_other_spaces(kind):
    sp = make_space(kind, 4)
    rep = check_mww(sp, lebesgue(sp), 2.0, 4)
    assert rep.passed
    assert rep.empirical["max_neighbours"] <= 25


def test_capacity_transfer_matches_direct_capacity():
    rep = check_capacity_transfer(make_space("cantor", 1), "ifs 1/3 0 1/3 2/3", 0.5, 2.0, [4])
    sp = make_space("cantor", 4)
    direct = capacity(weight_pi_s(sp, 0.5, 2.0), sp.tree.leaves, 2.0)
    assert rep.empirical["capacities"][0] == pytest.approx(direct, rel=1e-12)
