"""The acceptance suite, shared by the test-suite and ``treecap selftest``.

Each criterion returns a :class:`CriterionResult`; :func:`run_all` prints
one pass/fail line per criterion.
"""

from __future__ import annotations

import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .capacity import (
    capacity,
    capacity_dual_oracle,
    capacity_point,
    capacity_primal_oracle,
    equilibrium,
    target_nodes,
)
from .lab import (
    SLOPE_LIMIT,
    check_ball_capacities,
    check_capacity_transfer,
    check_cmcap,
    check_energy_equivalence,
    check_monotonicity,
    check_mww,
    check_trace_conditions,
    log_slope,
    random_antichain,
    random_measure,
    random_tree,
)
from .potential import carleson_norm, hardy
from .spaces import SpaceMeasure, lebesgue, make_space, weight_pi_s
from .tree import (
    WeightedTree,
    chain_tree,
    d_pi,
    homogeneous_tree,
    measure_from_masses,
    normalize_antichain,
    parse_tree,
    serialize_tree,
    tree_from_parents,
)

SEED = 20240611
P_VALUES = (1.5, 2.0, 3.0)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str = ""
    runtime: float = 0.0
    data: dict = field(default_factory=dict)

    def line(self, timing: bool = True) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"criterion {self.number:2d} [{status}] {self.title}: {self.detail}"
        return text + (f" ({self.runtime:.1f}s)" if timing else "")


def _rng(offset: int) -> np.random.Generator:
    return np.random.default_rng(SEED + offset)


def criterion_1() -> CriterionResult:
    """Recursion against the convex primal oracle and the measure-side oracle."""
    t0 = time.perf_counter()
    rng = _rng(1)
    worst_primal = worst_dual = 0.0
    count = 0
    for _ in range(100):
        tree = random_tree(rng, 4, 3, (0.5, 2.0))
        E = random_antichain(rng, tree)
        for p in P_VALUES:
            cap = capacity(tree, E, p)
            primal = capacity_primal_oracle(tree, E, p, tol=1e-6)
            dual = capacity_dual_oracle(tree, E, p, tol=1e-6)
            worst_primal = max(worst_primal, abs(cap - primal) / cap)
            worst_dual = max(worst_dual, abs(cap - dual) / cap)
            count += 1
    runtime = time.perf_counter() - t0
    ok = worst_primal <= 1e-3 and worst_dual <= 1e-3 and runtime < 60
    return CriterionResult(1, "oracle equivalence", ok,
                           f"{count} cases, max rel gap primal {worst_primal:.2e} dual {worst_dual:.2e}",
                           runtime, {"primal": worst_primal, "dual": worst_dual})


def criterion_2() -> CriterionResult:
    t0 = time.perf_counter()
    worst_bin = 0.0
    for h in range(21):
        tree = homogeneous_tree(2, h)
        exact = 2.0**h / (2.0 ** (h + 1) - 1.0)
        worst_bin = max(worst_bin, abs(capacity(tree, [0], 2.0) - exact) / exact)
    worst_chain = 0.0
    for n in range(51):
        tree = chain_tree(n)
        exact = 1.0 / (n + 1)
        worst_chain = max(worst_chain, abs(capacity(tree, [n], 2.0) - exact) / exact)
    ok = worst_bin <= 1e-10 and worst_chain <= 1e-13
    return CriterionResult(2, "closed forms", ok,
                           f"binary h<=20 rel err {worst_bin:.1e}, chain n<=50 rel err {worst_chain:.1e}",
                           time.perf_counter() - t0)


def criterion_3() -> CriterionResult:
    """Point capacity formula against the recursion with one interior target."""
    t0 = time.perf_counter()
    rng = _rng(3)
    worst = 0.0
    count = 0
    for _ in range(100):
        tree = random_tree(rng, 4, 3, (0.5, 2.0))
        for p in P_VALUES:
            for v in range(tree.n_nodes):
                rec = capacity(tree, [v], p, interior=True)
                worst = max(worst, abs(capacity_point(tree, v, p) - rec) / rec)
                count += 1
    return CriterionResult(3, "point capacity", worst <= 1e-12,
                           f"{count} nodes, max rel err {worst:.1e}", time.perf_counter() - t0)


def criterion_4() -> CriterionResult:
    t0 = time.perf_counter()
    rng = _rng(4)
    r_res = r_cap = r_norm = 0.0
    for _ in range(50):
        tree = random_tree(rng, 4, 3, (0.5, 2.0))
        E = random_antichain(rng, tree)
        p = float(rng.choice(P_VALUES))
        eq = equilibrium(tree, E, p)
        r_res = max(r_res, eq.max_residual)
        pred = eq.phi[0] ** (p - 1) * tree.weight[0]
        r_cap = max(r_cap, abs(eq.capacity - pred) / eq.capacity)
        r_norm = max(r_norm, abs(carleson_norm(tree, eq.mu, p) - 1.0))
    ok = r_res <= 1e-8 and r_cap <= 1e-10 and r_norm <= 1e-6
    return CriterionResult(4, "equilibrium diagnostics", ok,
                           f"max |Iφ-1| {r_res:.1e}, cap vs φ(o) {r_cap:.1e}, |[μ]-1| {r_norm:.1e}",
                           time.perf_counter() - t0)


def criterion_5() -> CriterionResult:
    t0 = time.perf_counter()
    rng = _rng(5)
    failures = 0
    worst_in = worst_out = worst_eq = 0.0
    for i in range(50):
        tree = random_tree(rng, 4, 3, (0.5, 2.0))
        E = random_antichain(rng, tree)
        p = float(rng.choice(P_VALUES))
        rep = check_cmcap(tree, E, p, n_samples=200, seed=SEED + 500 + i)
        failures += not rep.passed
        worst_in = max(worst_in, rep.empirical["max_supported_ratio"])
        worst_out = max(worst_out, rep.empirical["max_unrestricted_ratio"] / p ** (p - 1))
        worst_eq = max(worst_eq, abs(rep.ratio - 1.0))
    return CriterionResult(5, "capacity as sup over measures", failures == 0,
                           f"50 instances, {failures} failed; |eq/Cap-1| {worst_eq:.1e}, "
                           f"max supported/Cap {worst_in:.4f}, max unrestricted/(p^(p-1)Cap) {worst_out:.4f}",
                           time.perf_counter() - t0)


def criterion_6() -> CriterionResult:
    t0 = time.perf_counter()
    rng = _rng(6)
    failures = 0
    worst_root = worst_norm = 0.0
    for i in range(200):
        tree = random_tree(rng, 4, 3, (0.5, 2.0))
        p = float(rng.choice(P_VALUES))
        if i % 2:
            mu = equilibrium(tree, random_antichain(rng, tree), p).mu
        else:
            mu = random_measure(rng, tree, random_antichain(rng, tree).nodes, sparsity=0.8)
        lam = rng.random(tree.n_nodes) * (rng.random(tree.n_nodes) < 0.8)
        rep = check_monotonicity(tree, mu, lam, p)
        failures += not rep.passed
        worst_root = max(worst_root, rep.ratio / p)
        worst_norm = max(worst_norm, rep.empirical["norm_ratio"] / p ** (p - 1))
    return CriterionResult(6, "monotonicity of the testing norm", failures == 0,
                           f"200 pairs, {failures} failed; max root ratio/p {worst_root:.4f}, "
                           f"max [λμ]/(p^(p-1)[μ]) {worst_norm:.4f}",
                           time.perf_counter() - t0)


def _cylinder_families(rng, tree: WeightedTree, n: int = 12):
    return [random_antichain(rng, tree, density=float(rng.uniform(0.05, 0.5))) for _ in range(n)]


def criterion_7() -> CriterionResult:
    t0 = time.perf_counter()
    rng = _rng(7)
    failures = 0
    worst = 0.0
    cases = []
    for i in range(20):
        kind = i % 3
        p = float(P_VALUES[i % len(P_VALUES)])
        if kind == 0:
            tree = random_tree(rng, 4, 3, (0.5, 2.0))
            mu = equilibrium(tree, random_antichain(rng, tree), p).mu
        elif kind == 1:
            tree = random_tree(rng, 4, 3, (0.5, 2.0))
            leaf = int(rng.choice(tree.leaves))
            mu = measure_from_masses(tree, [(leaf, float(rng.uniform(0.5, 2.0)))])
        else:
            space = make_space("interval", int(rng.integers(3, 7)))
            tree = weight_pi_s(space, float(rng.choice([0.5, 0.6, 0.75])), p)
            leaves = tree.leaves
            mu = measure_from_masses(tree, [(int(v), 1.0 / leaves.size) for v in leaves])
        rep = check_trace_conditions(tree, mu, p, _cylinder_families(rng, tree), f_samples=30,
                                     seed=SEED + 700 + i)
        failures += not rep.passed
        worst = max(worst, rep.empirical["capacitary_constant"] / p ** (p - 1))
        cases.append(rep.record())
    return CriterionResult(7, "testing implies capacitary", failures == 0,
                           f"20 measures, {failures} failed; max μ(E)/([μ]Cap(E)p^(p-1)) {worst:.4f}",
                           time.perf_counter() - t0, {"reports": cases})


BALL_CASES = ((0.5, 2.0), (0.6, 2.0), (0.75, 2.0), (2.0 / 3.0, 3.0))


def criterion_8(cases=BALL_CASES) -> CriterionResult:
    t0 = time.perf_counter()
    parts = []
    ok = True
    reports = []
    for s, p in cases:
        rep = check_ball_capacities(s, p, range(1, 13))
        ok &= rep.passed
        reports.append(rep.record())
        parts.append(f"(s={s:.3g},p={p:g}) c={rep.empirical['c']:.3f} slope={rep.empirical['log_slope']:+.3f}"
                     + ("" if rep.passed else " FAIL"))
    return CriterionResult(8, "ball capacities", ok, "; ".join(parts), time.perf_counter() - t0,
                           {"reports": reports})


CANTOR = "ifs 1/3 0 1/3 2/3"
TRANSFER_SETS = (
    ("interval", "interval 0 1/4"),
    ("interval", "interval 0 1/4 1/2 3/4"),
    ("interval", CANTOR),
    ("cantor", CANTOR),
)


def criterion_9() -> CriterionResult:
    t0 = time.perf_counter()
    depths = range(4, 11)
    ok = True
    parts = []
    reports = []
    for kind in ("interval", "cantor"):
        space = make_space(kind, 11)
        rep = check_energy_equivalence(space, lebesgue(space), 0.5, 2.0, depths)
        ok &= rep.passed
        reports.append(rep.record())
        lo, hi = rep.empirical["window"]
        parts.append(f"energy {kind} window [{lo:.3f},{hi:.3f}] slope {rep.empirical['log_slope']:+.4f}")
    for kind, sd in TRANSFER_SETS:
        for s, p in ((0.5, 2.0), (0.75, 2.0)):
            rep = check_capacity_transfer(make_space(kind, 0), sd, s, p, depths)
            ok &= rep.passed
            reports.append(rep.record())
            parts.append(f"cap {kind} '{sd}' s={s} C={rep.empirical['C']:.3f} slope {rep.empirical['log_slope']:+.4f}")
    return CriterionResult(9, "energy equivalence and capacity transfer", ok, "; ".join(parts),
                           time.perf_counter() - t0, {"reports": reports})


def criterion_10() -> CriterionResult:
    t0 = time.perf_counter()
    depths = list(range(4, 11))
    space = make_space("interval", 10)
    families = {
        "lebesgue": lebesgue(space),
        "atom": SpaceMeasure(atoms=(((Fraction(1, 3),), 1.0),)),
    }
    ok = True
    parts = []
    for name, omega in families.items():
        for q in P_VALUES:
            reps = [check_mww(space, omega, q, n, s=0.5) for n in depths]
            elementary = all(r.empirical["elementary_holds"] for r in reps)
            finite = all(math.isfinite(r.ratio) for r in reps)
            slope = log_slope(depths, [r.ratio for r in reps])
            good = elementary and finite and abs(slope) <= SLOPE_LIMIT
            ok &= good
            parts.append(f"{name} q={q:g} slope {slope:+.4f}" + ("" if good else " FAIL"))
    return CriterionResult(10, "MWW harness", ok, "; ".join(parts), time.perf_counter() - t0)


def _nested_pair(rng, tree: WeightedTree):
    big = random_antichain(rng, tree, density=0.4)
    leaves = target_nodes(tree, big)
    keep = leaves[rng.random(leaves.size) < 0.5]
    if keep.size == 0:
        keep = leaves[:1]
    return normalize_antichain(tree, keep.tolist()), big


def criterion_11() -> CriterionResult:
    t0 = time.perf_counter()
    rng = _rng(11)
    set_viol = trunc_viol = 0
    for _ in range(200):
        tree = random_tree(rng, 4, 3, (0.5, 2.0))
        p = float(rng.choice(P_VALUES))
        small, big = _nested_pair(rng, tree)
        if capacity(tree, small, p) > capacity(tree, big, p) * (1 + 1e-12):
            set_viol += 1
        # covers of a leaf set by cylinders at increasing depth decrease to it
        K = target_nodes(tree, small)
        prev = math.inf
        for k in range(tree.height + 1):
            cover = set()
            for v in K:
                path = tree.path(int(v))
                cover.add(int(path[min(k, len(path) - 1)]))
            c = capacity(tree, sorted(cover), p)
            if c > prev * (1 + 1e-12):
                trunc_viol += 1
            prev = c
    ok = set_viol == 0 and trunc_viol == 0
    return CriterionResult(11, "set and truncation monotonicity", ok,
                           f"200 pairs, {set_viol} set and {trunc_viol} truncation violations",
                           time.perf_counter() - t0)


def criterion_12() -> CriterionResult:
    from . import cli

    t0 = time.perf_counter()
    rng = _rng(12)
    mismatches = 0
    for i in range(50):
        tree = random_tree(rng, 4, 3, (0.5, 2.0))
        if i % 2:
            labels = [f"n{v}_{int(rng.integers(1000))}" for v in range(tree.n_nodes)]
            order = rng.permutation(tree.n_nodes)
            pos = np.empty(tree.n_nodes, dtype=np.int64)
            pos[order] = np.arange(tree.n_nodes)
            parents = [None if tree.parent[j] < 0 else int(pos[tree.parent[j]]) for j in order]
            tree = tree_from_parents(parents, [float(tree.weight[j]) for j in order],
                                     delta=float(rng.uniform(0.1, 0.9)),
                                     labels=[labels[j] for j in order])
        text = serialize_tree(tree)
        if serialize_tree(parse_tree(text)) != text:
            mismatches += 1
    code_ok = cli.run(["selftest", "--criteria", "2,3", "--quiet"]) == 0
    code_fail = cli.exit_code_for([CriterionResult(0, "synthetic", False)]) == cli.EXIT_CHECK
    ok = mismatches == 0 and code_ok and code_fail
    return CriterionResult(12, "round trip and selftest exit code", ok,
                           f"50 trees, {mismatches} mismatches; selftest exit codes "
                           f"{'consistent' if code_ok and code_fail else 'inconsistent'}",
                           time.perf_counter() - t0)


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
    5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8,
    9: criterion_9, 10: criterion_10, 11: criterion_11, 12: criterion_12,
}


def run_all(numbers=None, stream=sys.stdout) -> list[CriterionResult]:
    results = []
    for n in (numbers or sorted(CRITERIA)):
        res = CRITERIA[n]()
        if stream is not None:
            print(res.line(), file=stream, flush=True)
        results.append(res)
    return results
