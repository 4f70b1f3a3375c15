import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from treecap import (
    SpaceMeasure,
    ball_capacity_estimate,
    ball_mass,
    cantor_distance,
    cantor_function,
    capacity,
    continuous_energy,
    discretize_set,
    graph_predecessor_set,
    kernel_K,
    lambda_map,
    lebesgue,
    make_space,
    measure_from_masses,
    parse_set_descriptor,
    pull_back_atomic,
    pull_back_rays,
    push_forward,
    weight_pi_s,
)

# scipy adaptive quadrature of the Lebesgue energy on [0,1], s=1/2, p=2
LEBESGUE_ENERGY = 1.981498713745968


def test_make_space_examples():
    sp = make_space("interval", 3)
    leaves = sp.tree.leaves
    assert leaves.size == 8
    np.testing.assert_array_equal(sp.masses[leaves], 1 / 8)
    c = make_space("cantor", 2)
    assert c.tree.leaves.size == 4
    np.testing.assert_array_equal(c.masses[c.tree.leaves], 1 / 4)
    assert c.diameter(2) == pytest.approx(1 / 9)
    assert make_space("cube-2", 2).tree.leaves.size == 16
    assert make_space("cube", 1, Q=3).branching == 8


@pytest.mark.parametrize("kwargs", [
    dict(kind="interval", depth=3, delta=1.5),
    dict(kind="interval", depth=3, delta=0.0),
    dict(kind="cantor", depth=3, delta=0.5),
    dict(kind="sphere", depth=2),
    dict(kind="cube", depth=2, Q=4),
    dict(kind="interval", depth=40),
])
def test_make_space_rejects(kwargs):
    with pytest.raises(ValueError):
        make_space(**kwargs)


@pytest.mark.parametrize("kind", ["interval", "cube-2", "cube-3", "cantor"])
def test_mass_additivity_and_tiling(kind):
    sp = make_space(kind, 3)
    m = sp.masses
    tree = sp.tree
    for v in range(int(tree.level_bounds[3])):
        assert m[v] == sum(m[c] for c in tree.children(v))
    boxes = [sp.cell_box(v) for v in sp.nodes_at(2)]
    for v in sp.nodes_at(2):
        box = sp.cell_box(int(v))
        kids = [sp.cell_box(int(c)) for c in tree.children(int(v))]
        for kb in kids:
            assert all(lo >= a and hi <= b for (lo, hi), (a, b) in zip(kb, box))
        assert all(hi - lo == Fraction(1, sp.base**2) for lo, hi in box)
    assert len(boxes) == sp.branching**2


def test_weight_pi_s_examples():
    sp = make_space("interval", 5)
    np.testing.assert_allclose(weight_pi_s(sp, 0.5, 2.0).weight, 1.0)
    np.testing.assert_allclose(weight_pi_s(make_space("cantor", 4), 2 / 3, 3.0).weight, 1.0, rtol=1e-14)
    d = sp.tree.depth
    np.testing.assert_allclose(weight_pi_s(sp, 0.75, 2.0).weight, 2.0 ** (-d / 2), rtol=1e-14)
    np.testing.assert_allclose(weight_pi_s(sp, 0.9, 2.0).weight, 2.0 ** (-0.8 * d), rtol=1e-14)
    with pytest.raises(ValueError):
        weight_pi_s(sp, 1.0, 2.0)


def test_discretize_examples():
    sp = make_space("interval", 3)
    E = discretize_set(sp, "interval 0 1/4", 3)
    assert [sp.cell_box(v)[0] for v in E.nodes] == [(0, Fraction(1, 8)), (Fraction(1, 8), Fraction(1, 4))]
    cantor = discretize_set(sp, "ifs 1/3 0 1/3 2/3", 3)
    assert [sp.locate(v)[1] for v in cantor.nodes] == [0, 1, 2, 5, 6, 7]
    pt = discretize_set(sp, "points 1/3", 2)
    assert [sp.cell_box(v)[0] for v in pt.nodes] == [(Fraction(1, 4), Fraction(1, 2))]
    with pytest.raises(ValueError):
        parse_set_descriptor("interval")
    with pytest.raises(ValueError):
        discretize_set(sp, "points 1/3", 4)


def _cantor_cells_oracle(k):
    """Cells ``[j/2^k, (j+1)/2^k]`` meeting the level-``m`` Cantor intervals, ``m`` large."""
    intervals = [(Fraction(0), Fraction(1))]
    for _ in range(12):
        intervals = [piece for lo, hi in intervals
                     for piece in ((lo, lo + (hi - lo) / 3), (hi - (hi - lo) / 3, hi))]
    keep = []
    for j in range(2**k):
        a, b = Fraction(j, 2**k), Fraction(j + 1, 2**k)
        # every level-12 interval contains Cantor points at both its ends
        if any(lo <= b and hi >= a and (lo < b and hi > a or lo == b or hi == a) for lo, hi in intervals):
            keep.append(j)
    return keep


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_discretize_cantor_against_interval_oracle(k):
    sp = make_space("interval", k)
    E = discretize_set(sp, "ifs 1/3 0 1/3 2/3", k)
    assert [sp.locate(v)[1] for v in E.nodes] == _cantor_cells_oracle(k)


def test_kernel_examples():
    sp = make_space("interval", 4)
    assert kernel_K(sp, 0.25, 0.5, 0.5) == pytest.approx(1.0)
    assert kernel_K(sp, 0.3, 0.3, 0.5) == math.inf
    assert kernel_K(sp, 0.1, 0.7, 1e-9) == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(ValueError):
        kernel_K(sp, 1.5, 0.2, 0.5)
    with pytest.raises(ValueError):
        kernel_K(make_space("cantor", 3), 0.5, 0.0, 0.5)


def test_ball_mass_cantor():
    sp = make_space("cantor", 4)
    assert float(ball_mass(sp, 0.0, 1 / 3)) == pytest.approx(0.5)
    assert float(ball_mass(sp, 0.0, 1.0)) == pytest.approx(1.0)
    assert float(cantor_function(0.25)) == pytest.approx(1 / 3)
    assert float(cantor_distance(0.25)) == 0.0
    assert float(cantor_distance(0.5)) == pytest.approx(1 / 6)


def test_continuous_energy_basic():
    sp = make_space("interval", 2)
    assert continuous_energy(sp, SpaceMeasure(), 0.5, 2.0, 6) == 0.0
    e1 = continuous_energy(sp, lebesgue(sp), 0.5, 3.0, 7)
    e3 = continuous_energy(sp, lebesgue(sp).scaled(3.0), 0.5, 3.0, 7)
    assert e3 == pytest.approx(3.0**1.5 * e1, rel=1e-12)
    with pytest.raises(ValueError):
        continuous_energy(sp, measure_from_masses(sp.tree, [(int(sp.tree.leaves[0]), 1.0)]), 0.5, 2.0, 2)


def _lebesgue_energy_quad():
    from scipy.integrate import IntegrationWarning, quad

    def ball(x, r):
        return min(1.0, x + r) - max(0.0, x - r)

    def K(x, y):
        r = abs(x - y)
        return (ball(x, r) + ball(y, r)) ** -0.5

    def Kw(x):
        return quad(lambda y: K(x, y), 0, x, limit=200)[0] + quad(lambda y: K(x, y), x, 1, limit=200)[0]

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        return quad(lambda x: Kw(x) ** 2, 0, 1, limit=200, epsabs=1e-10, epsrel=1e-10)[0]


def test_lebesgue_energy_oracle_frozen():
    pytest.importorskip("scipy")
    assert _lebesgue_energy_quad() == pytest.approx(LEBESGUE_ENERGY, rel=1e-7)


def test_lebesgue_energy_quadrature():
    sp = make_space("interval", 1)
    e10 = continuous_energy(sp, lebesgue(sp), 0.5, 2.0, 10)
    e11 = continuous_energy(sp, lebesgue(sp), 0.5, 2.0, 11)
    assert abs(e11 - e10) <= 0.02 * e11
    assert e11 == pytest.approx(LEBESGUE_ENERGY, rel=0.01)


def test_lambda_map_examples():
    sp = make_space("interval", 6)
    assert lambda_map(sp, [0], "right") == (Fraction(1, 2),)
    assert lambda_map(sp, [], "left") == (Fraction(0),)
    c = make_space("cantor", 6)
    # fixed point of x -> x/3 composed with x -> x/3 + 2/3
    x = lambda_map(c, [], period=[0, 1])[0]
    assert x == Fraction(1, 4)
    assert x == (x / 3 + Fraction(2, 3)) / 3


@given(st.lists(st.integers(0, 1), max_size=8), st.sampled_from(["left", "right"]))
def test_lambda_map_lies_in_every_cell(digits, cont):
    sp = make_space("interval", 8)
    x = lambda_map(sp, digits, cont)[0]
    node = 0
    for d in digits:
        node = list(sp.tree.children(node))[d]
        lo, hi = sp.cell_box(node)[0]
        assert lo <= x <= hi


def test_push_forward_examples():
    sp = make_space("interval", 3)
    leaf = int(sp.tree.leaves[2])
    nu = measure_from_masses(sp.tree, [(leaf, 0.3), (int(sp.tree.leaves[5]), 0.2)])
    omega = push_forward(sp, nu, ray_atoms=[([0], "right", 0.5)])
    assert (leaf, 0.3) in omega.cells
    assert omega.atoms == (((Fraction(1, 2),), 0.5),)
    assert omega.total == pytest.approx(1.0)


def test_pull_back_examples():
    sp = make_space("interval", 5)
    for depth in range(1, 6):
        mu = pull_back_atomic(sp, [(0.5, 1.0)], depth)
        np.testing.assert_allclose(mu.mass, [0.5, 0.5])
        lows = [sp.cell_box(int(v))[0] for v in mu.support]
        assert lows[0][1] == Fraction(1, 2) == lows[1][0]
        assert pull_back_atomic(sp, [(Fraction(1, 3), 1.0)], depth).mass.tolist() == [1.0]


def _round_trip(sp, atoms):
    back = push_forward(sp, measure_from_masses(sp.tree, []), pull_back_rays(sp, atoms))
    got: dict = {}
    for x, m in back.atoms:
        got[x[0]] = got.get(x[0], 0.0) + m
    return got


dyadic_atoms = st.lists(
    st.tuples(st.integers(0, 2**6).map(lambda j: Fraction(j, 2**6)), st.floats(0.01, 5.0)),
    min_size=1, max_size=5)


@given(dyadic_atoms)
def test_pull_back_then_push_forward_is_identity(atoms):
    sp = make_space("interval", 10)
    mu = pull_back_atomic(sp, atoms, 7)
    assert mu.total == pytest.approx(sum(m for _, m in atoms), rel=1e-12)
    want: dict = {}
    for x, m in atoms:
        want[x] = want.get(x, 0.0) + m
    got = _round_trip(sp, atoms)
    assert got.keys() == want.keys()
    for k in want:
        assert got[k] == pytest.approx(want[k], rel=1e-12)


@given(st.fractions(0, 1, max_denominator=1000), st.floats(0.01, 5.0))
def test_round_trip_within_resolution(x, m):
    sp = make_space("interval", 12)
    got = _round_trip(sp, [(x, m)])
    assert sum(got.values()) == pytest.approx(m, rel=1e-12)
    assert all(abs(y - x) <= Fraction(1, 2**12) for y in got)


def test_graph_predecessor_examples():
    sp = make_space("interval", 4)
    lev1 = {int(v) for v in sp.nodes_at(1)}
    assert lev1 <= graph_predecessor_set(sp, 0.5, 1)
    assert lev1 <= graph_predecessor_set(sp, 0.0, 1)
    counts = []
    for depth in range(1, 11):
        big = make_space("interval", depth)
        P = graph_predecessor_set(big, Fraction(1, 3), depth)
        counts.append(max(sum(1 for v in P if big.locate(v)[0] == k) for k in range(depth + 1)))
    assert max(counts) <= 5


def test_ball_estimate_examples():
    sp = make_space("interval", 10)
    assert ball_capacity_estimate(sp, 2.0**-8, 0.5, 2.0).value == pytest.approx(1 / 8)
    assert ball_capacity_estimate(sp, 2.0**-4, 0.75, 2.0).value == pytest.approx(0.25)
    assert ball_capacity_estimate(sp, 1.0, 0.75, 2.0).value == 1.0
    assert ball_capacity_estimate(sp, 1.0, 0.5, 2.0).value == 1.0
    assert ball_capacity_estimate(sp, 0.25, 0.3, 2.0).regime == "positive point capacity"


@pytest.mark.parametrize("s,p", [(0.5, 2.0), (0.6, 2.0), (0.75, 2.0), (2 / 3, 3.0)])
def test_ball_estimate_comparable_to_capacity(s, p):
    ratios = []
    for k in range(2, 11):
        sp = make_space("interval", k + 8)
        E = discretize_set(sp, f"interval 0 {2.0**-k}", k + 8)
        cap = capacity(weight_pi_s(sp, s, p), E, p)
        ratios.append(cap / ball_capacity_estimate(sp, 2.0**-k, s, p).value)
    C = max(max(ratios), 1 / min(ratios))
    print(f"s={s:.4g} p={p}: C={C:.3f}")
    assert np.all(np.isfinite(ratios)) and min(ratios) > 0
