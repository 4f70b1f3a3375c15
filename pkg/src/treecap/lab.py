"""Numerical checks of the comparison inequalities between trees and spaces.

Every check returns a :class:`CheckReport`.  Inequalities with an explicit
constant are asserted with that constant; the others are summarized by an
empirical constant that is recorded, and across sweeps by the flatness of
the log of the ratio against the depth.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .capacity import capacity, capacity_point, equilibrium, primal_oracle_targets, target_nodes
from .potential import carleson_norm, carleson_ratios, energy, energy_density, hardy
from .spaces import (
    DyadicSpace,
    SetDescriptor,
    SpaceMeasure,
    _cell_masses,
    _closed_cells_containing,
    _exact_point,
    continuous_energy,
    discretize_set,
    parse_set_descriptor,
    pull_back_atomic,
    push_forward,
    weight_pi_s,
)
from .tree import (
    BoundarySet,
    TreeMeasure,
    WeightedTree,
    as_boundary_set,
    conjugate,
    d_pi,
    measure_from_masses,
    normalize_antichain,
)

__all__ = [
    "CheckReport",
    "log_slope",
    "random_tree",
    "random_antichain",
    "random_measure",
    "check_mww",
    "check_cmcap",
    "check_monotonicity",
    "check_trace_conditions",
    "check_shadow",
    "check_energy_equivalence",
    "check_capacity_transfer",
    "check_ball_capacities",
]

SLOPE_LIMIT = 0.05


@dataclass
class CheckReport:
    """Outcome of one check on one instance.

    ``bound`` is the explicit constant asserted, if any; ``empirical``
    holds recorded constants, ratios and series.
    """

    name: str
    instance: str
    left: float
    right: float
    ratio: float
    passed: bool
    bound: float | None = None
    empirical: dict = field(default_factory=dict)
    seed: int | None = None
    runtime: float = 0.0
    notes: str = ""

    def record(self) -> dict:
        return {k: _plain(v) for k, v in asdict(self).items()}

    def to_json(self) -> str:
        return json.dumps(self.record(), sort_keys=True)


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_plain(x) for x in v]
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _ratio(a: float, b: float) -> float:
    if b == 0:
        return 0.0 if a == 0 else math.inf
    return a / b


def log_slope(xs, ys) -> float:
    """Least-squares slope of ``log y`` against ``x``."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 2:
        return 0.0
    return float(np.polyfit(xs, np.log(ys), 1)[0])


# random instances -------------------------------------------------------------

def random_tree(rng: np.random.Generator, max_depth: int = 4, max_branching: int = 3,
                weight_range=(0.5, 2.0)) -> WeightedTree:
    """Tree with every leaf at one depth, 1..``max_branching`` children per node."""
    h = int(rng.integers(1, max_depth + 1))
    parent = [-1]
    level = [0]
    for _ in range(h):
        nxt = []
        for v in level:
            for _ in range(int(rng.integers(1, max_branching + 1))):
                parent.append(v)
                nxt.append(len(parent) - 1)
        level = nxt
    w = rng.uniform(*weight_range, size=len(parent))
    return WeightedTree(np.array(parent, dtype=np.int64), w)


def random_antichain(rng: np.random.Generator, tree: WeightedTree, density: float = 0.3) -> BoundarySet:
    """Nonempty antichain from a random node sample."""
    pick = np.flatnonzero(rng.random(tree.n_nodes) < density)
    if pick.size == 0:
        pick = rng.choice(tree.n_nodes, size=1)
    return normalize_antichain(tree, pick.tolist())


def random_measure(rng: np.random.Generator, tree: WeightedTree, nodes=None,
                   sparsity: float = 0.6) -> TreeMeasure:
    """Random masses on a random subset of an antichain (leaves by default)."""
    nodes = np.asarray(tree.leaves if nodes is None else nodes, dtype=np.int64)
    keep = nodes[rng.random(nodes.size) < sparsity]
    if keep.size == 0:
        keep = rng.choice(nodes, size=1)
    mass = rng.exponential(1.0, size=keep.size) ** 2
    return measure_from_masses(tree, list(zip(keep.tolist(), mass.tolist())))


# Muckenhoupt-Wheeden-Wolff ---------------------------------------------------

def _neighbours_of(space: DyadicSpace, k: int, cells: np.ndarray) -> np.ndarray:
    """Graph neighbours (self included) of level-``k`` cells, padded with -1.

    Closed cells of one level are within ``δ^k`` of each other when their
    grid positions differ by at most 2 per axis; distinct Cantor cells are
    that close only for siblings.
    """
    cells = np.asarray(cells, dtype=np.int64)
    if space.kind == "cantor":
        if k == 0:
            return cells[:, None]
        return np.stack([cells, cells ^ 1], axis=1)
    coords = space.lower_ints(k, cells)
    shifts = np.arange(-2, 3)
    grids = np.meshgrid(*([shifts] * space.dim), indexing="ij")
    offs = np.stack([g.ravel() for g in grids], axis=1)
    cand = coords[:, None, :] + offs[None, :, :]
    ok = np.all((cand >= 0) & (cand < 2**k), axis=2)
    idx = space.index_of(k, np.where(ok[..., None], cand, 0).reshape(-1, space.dim)).reshape(ok.shape)
    return np.where(ok, idx, -1)


def _closed_cell_masses(space: DyadicSpace, omega: SpaceMeasure, depth: int) -> list[np.ndarray]:
    """``ω(closed cell)`` for every cell at levels ``0..depth``."""
    fine = _cell_masses(space, SpaceMeasure(cells=omega.cells), depth) if omega.cells else np.zeros(space.branching**depth)
    out = []
    b = space.branching
    for k in range(depth, -1, -1):
        out.append(fine.copy())
        if k:
            fine = fine.reshape(-1, b).sum(axis=1)
    out.reverse()
    for x, m in omega.atoms:
        for k in range(depth + 1):
            for j in _closed_cells_containing(space, x, k):
                out[k][j] += m
    return out


def _sample_cells(space: DyadicSpace, n: int, k: int) -> np.ndarray:
    """Level-``k`` cell holding the sample point of every level-``n`` cell.

    Sample points sit at relative position 2/7 per axis (never a dyadic
    boundary, and away from the usual test atoms) or 1/4 on the Cantor set
    (ternary digits 0202...).
    """
    j = np.arange(space.branching**n, dtype=np.int64)
    if k <= n:
        return j // space.branching ** (n - k)
    m = k - n
    if space.kind == "cantor":
        tail = sum(((i % 2) << (m - 1 - i)) for i in range(m))
        return (j << m) | tail
    coords = space.lower_ints(n, j) * 2**m + (2 * 2**m) // 7
    return space.index_of(k, coords)


def check_mww(space: DyadicSpace, mu, q: float, depth: int, s: float = 0.5,
              extra_levels: int = 6) -> CheckReport:
    """Compare ``∫ I_G ω^q``, ``∫ S_G ω^q`` and ``∫ Σ (ω(α)/m(α)^s)^q`` over ``X``.

    ``mu`` is a TreeMeasure on ``space.tree`` (read as its push-forward) or
    a :class:`SpaceMeasure`.  One sample point per level-``depth`` cell;
    graph sums are enumerated ``extra_levels`` further and the remaining
    levels are added as a geometric tail (exact where the density is locally
    constant).
    """
    t0 = time.perf_counter()
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    if not 0 < s < 1:
        raise ValueError(f"s must lie in (0,1), got {s}")
    omega = push_forward(space, mu) if isinstance(mu, TreeMeasure) else mu
    n = int(depth)
    b = space.branching
    K = n + max(0, min(int(extra_levels), int(22 / math.log2(b)) - n))
    masses = _closed_cell_masses(space, omega, K)
    npts = b**n
    I = np.zeros(npts)
    S = np.zeros(npts)
    W = np.zeros(npts)
    max_deg = 0
    for k in range(K + 1):
        a = masses[k] / float(space.mass_at_level(k)) ** s
        rows = _neighbours_of(space, k, _sample_cells(space, n, k))
        max_deg = max(max_deg, int((rows >= 0).sum(axis=1).max()))
        vals = np.where(rows >= 0, a[np.maximum(rows, 0)], 0.0)
        I += vals.sum(axis=1)
        S = np.maximum(S, vals.max(axis=1))
        W += (vals**q).sum(axis=1)
        last_I, last_W = vals.sum(axis=1), (vals**q).sum(axis=1)
    rho = float(b) ** (-(1.0 - s))
    I += last_I * rho / (1 - rho)
    W += last_W * rho**q / (1 - rho**q)
    mL = float(space.mass_at_level(n))
    intI = mL * float(np.sum(I**q))
    intS = mL * float(np.sum(S**q))
    intW = mL * float(np.sum(W))
    elementary = bool(np.all(I**q >= W * (1 - 1e-12)))
    r_s = _ratio(intI, intS)
    r_w = _ratio(intI, intW)
    passed = elementary and math.isfinite(r_s) and math.isfinite(r_w)
    return CheckReport(
        name="mww", instance=f"{space.kind} depth={n} q={q} s={s}",
        left=intI, right=intS, ratio=r_s, passed=passed,
        empirical={"ratio_I_S": r_s, "ratio_I_wolff": r_w, "wolff_integral": intW,
                   "elementary_holds": elementary, "levels": K, "max_neighbours": max_deg},
        runtime=time.perf_counter() - t0,
    )


# capacity as a supremum over measures ------------------------------------------

def _cap_ratio(tree: WeightedTree, mu: TreeMeasure, E: BoundarySet, p: float) -> float:
    # E is a boundary set: only mass on the leaves it covers counts as μ(E)
    mass = mu.restricted(target_nodes(tree, E)).total
    if mass == 0:
        return 0.0
    return mass / carleson_norm(tree, mu, p)


def check_cmcap(tree: WeightedTree, E, p: float, n_samples: int = 200, seed: int = 0,
                tol_eq: float = 1e-6, slack: float = 1e-8) -> CheckReport:
    """``Cap(E) = sup μ(E)/[μ]`` over measures on ``E``; ``≤ p^{p-1} Cap(E)`` for all measures."""
    t0 = time.perf_counter()
    conjugate(p)
    E = as_boundary_set(tree, E)
    if len(E) == 0:
        raise ValueError("empty set")
    rng = np.random.default_rng(seed)
    cap = capacity(tree, E, p)
    eq = equilibrium(tree, E, p)
    r_eq = _cap_ratio(tree, eq.mu, E, p)
    ok_a = abs(r_eq - cap) <= tol_eq * cap
    targets = target_nodes(tree, E)
    worst_in = 0.0
    for _ in range(n_samples):
        # boundary sets carry mass only on the leaves they cover
        mu = random_measure(rng, tree, targets, sparsity=float(rng.uniform(0.1, 1.0)))
        worst_in = max(worst_in, _cap_ratio(tree, mu, E, p) / cap)
    bound = p ** (p - 1)
    worst_out = 0.0
    for _ in range(n_samples):
        if rng.random() < 0.5:
            mu = random_measure(rng, tree, tree.leaves, sparsity=float(rng.uniform(0.1, 1.0)))
        else:
            mu = random_measure(rng, tree, random_antichain(rng, tree).nodes)
        worst_out = max(worst_out, _cap_ratio(tree, mu, E, p) / cap)
    ok_b = worst_in <= 1 + slack
    ok_c = worst_out <= bound * (1 + slack)
    return CheckReport(
        name="cmcap", instance=f"n={tree.n_nodes} |E|={len(E)} p={p}",
        left=r_eq, right=cap, ratio=_ratio(r_eq, cap), passed=bool(ok_a and ok_b and ok_c),
        bound=bound, seed=seed,
        empirical={"equilibrium_ratio": r_eq, "max_supported_ratio": worst_in,
                   "max_unrestricted_ratio": worst_out, "part_a": bool(ok_a),
                   "part_b": bool(ok_b), "part_c": bool(ok_c)},
        runtime=time.perf_counter() - t0,
    )


# monotonicity of the testing condition ----------------------------------------

def check_monotonicity(tree: WeightedTree, mu: TreeMeasure, lam, p: float,
                       slack: float = 1e-9) -> CheckReport:
    """``I*σ_{λμ}(o) ≤ p I*(λμ)(o)`` once ``[μ] ≤ 1``, and ``[λμ] ≤ p^{p-1}[μ]``."""
    t0 = time.perf_counter()
    conjugate(p)
    lam = np.broadcast_to(np.asarray(lam, dtype=float), (tree.n_nodes,))
    if np.any(lam < 0) or np.any(lam > 1):
        raise ValueError("lambda must take values in [0, 1]")
    norm = carleson_norm(tree, mu, p)
    if norm == 0:
        return CheckReport("monotonicity", "zero measure", 0.0, 0.0, 0.0, True, bound=p,
                           runtime=time.perf_counter() - t0)
    # [cμ] = c[μ], so dividing by [μ] puts μ at the hypothesis
    mu1 = mu.scaled(1.0 / norm)
    nu = mu1.reweighted(lam)
    left = float(np.sum(energy_density(tree, nu, p)))
    right = nu.total
    ok_root = left <= p * right * (1 + slack) + 1e-300
    ratios = carleson_ratios(tree, nu, p)
    ist = nu.istar
    node_ok = bool(np.all(np.nan_to_num(ratios, nan=0.0) <= p * (1 + slack)))
    nu_norm = carleson_norm(tree, mu.reweighted(lam), p)
    bound = p ** (p - 1)
    ok_norm = nu_norm <= bound * norm * (1 + slack)
    return CheckReport(
        name="monotonicity", instance=f"n={tree.n_nodes} p={p}",
        left=left, right=right, ratio=_ratio(left, right), passed=bool(ok_root and ok_norm),
        bound=p,
        empirical={"norm_mu": norm, "norm_lambda_mu": nu_norm,
                   "norm_ratio": _ratio(nu_norm, norm), "norm_bound": bound,
                   "all_nodes_within_p": node_ok, "root_mass": float(ist[0])},
        runtime=time.perf_counter() - t0,
    )


# trace inequality and capacitary condition --------------------------------------

def testing_constant(tree: WeightedTree, mu: TreeMeasure, p: float) -> float:
    """``C_1(μ) = sup_a I*σ_μ(a) / I*μ(a)`` (so ``[μ] = C_1^{p-1}``)."""
    r = carleson_ratios(tree, mu, p)
    return 0.0 if np.all(np.isnan(r)) else float(np.nanmax(r))


def _embedding_ratio(tree: WeightedTree, mu: TreeMeasure, f: np.ndarray, p: float) -> float:
    den = float(np.sum(f**p * tree.weight))
    if den == 0:
        return 0.0
    If = hardy(tree, f)
    return float(np.sum(mu.mass * If[mu.support] ** p)) / den


def check_trace_conditions(tree: WeightedTree, mu: TreeMeasure, p: float, E_family,
                           f_samples: int = 50, seed: int = 0, slack: float = 1e-9) -> CheckReport:
    """Testing constant, capacitary condition and a sampled embedding norm.

    Asserts ``μ(E) ≤ p^{p-1} [μ] Cap(E)`` for every ``E`` (``[μ] = C_1^{p-1}``)
    and that the sampled norm is at least ``[μ]``.  The test functions
    ``(I*(μ|S(a)))^{p'-1} π^{1-p'}`` at the maximizing node certify the
    lower bound; random functions only add to the maximum.
    """
    t0 = time.perf_counter()
    q = conjugate(p)
    rng = np.random.default_rng(seed)
    C1 = testing_constant(tree, mu, p)
    norm = carleson_norm(tree, mu, p)
    bound = p ** (p - 1)
    worst = 0.0
    ok_cap = True
    for E in E_family:
        E = as_boundary_set(tree, E)
        if len(E) == 0:
            continue
        cap = capacity(tree, E, p)
        mE = mu.restricted(target_nodes(tree, E)).total
        ok_cap &= mE <= bound * norm * cap * (1 + slack)
        if norm > 0:
            worst = max(worst, mE / (norm * cap))
    best = 0.0
    if mu.total > 0:
        r = carleson_ratios(tree, mu, p)
        order = np.argsort(np.nan_to_num(r, nan=-1.0))[::-1][:5]
        for a in order:
            if np.isnan(r[a]):
                continue
            mu_a = mu.restricted([int(a)])
            f = mu_a.istar ** (q - 1.0) * tree.weight ** (1.0 - q)
            best = max(best, _embedding_ratio(tree, mu, f, p))
        for _ in range(f_samples):
            f = rng.exponential(1.0, tree.n_nodes) * (rng.random(tree.n_nodes) < 0.5)
            best = max(best, _embedding_ratio(tree, mu, f, p))
    ok_lower = best >= norm * (1 - slack)
    return CheckReport(
        name="trace", instance=f"n={tree.n_nodes} p={p} family={len(E_family)}",
        left=worst, right=bound, ratio=_ratio(best, norm), passed=bool(ok_cap and ok_lower),
        bound=bound, seed=seed,
        empirical={"C1": C1, "testing_norm": norm, "capacitary_constant": worst,
                   "embedding_lower_bound": best, "C_p_empirical": _ratio(best, norm)},
        runtime=time.perf_counter() - t0,
    )


# interior sets versus their shadows --------------------------------------------------

def check_shadow(tree: WeightedTree, E, p: float, oracle_limit: int = 400) -> CheckReport:
    """``Cap(∪ S̄(x_j))`` against ``Cap(∪ ∂S(x_j))`` for ``E = {x_j}``.

    The hypothesis ``Cap(∂S(x)) d_π(x)^{p-1} ≥ c`` is measured first on every
    node and ``c`` recorded.  When the spanning problem is small the
    interior capacity is confirmed by the convex oracle.
    """
    t0 = time.perf_counter()
    conjugate(p)
    E = as_boundary_set(tree, E)
    if len(E) == 0:
        return CheckReport("shadow", "empty set", 0.0, 0.0, 1.0, True,
                           runtime=time.perf_counter() - t0)
    cs = [capacity(tree, [v], p) * d_pi(tree, v, p) ** (p - 1) for v in range(tree.n_nodes)]
    c = float(min(cs))
    hyp = math.isfinite(c) and c > 0
    interior = capacity(tree, E, p, interior=True)
    shadow = capacity(tree, E, p)
    ratio = _ratio(interior, shadow)
    emp = {"hypothesis_constant": c, "interior": interior, "shadow": shadow}
    if tree.n_nodes <= oracle_limit:
        emp["interior_oracle"] = primal_oracle_targets(tree, np.array(E.nodes), p, tol=1e-6)
    passed = hyp and ratio >= 1 - 1e-12
    return CheckReport(
        name="shadow", instance=f"n={tree.n_nodes} |E|={len(E)} p={p}",
        left=interior, right=shadow, ratio=ratio, passed=bool(passed),
        empirical=emp, notes="" if hyp else "hypothesis not satisfied",
        runtime=time.perf_counter() - t0,
    )


# tree and space energies ---------------------------------------------------------------

def _pull_back(space: DyadicSpace, omega: SpaceMeasure, n: int) -> TreeMeasure:
    if omega.atoms:
        return pull_back_atomic(space, omega.atoms, n)
    masses = _cell_masses(space, omega, n)
    base = int(space.tree.level_bounds[n])
    nz = np.flatnonzero(masses)
    return measure_from_masses(space.tree, list(zip((base + nz).tolist(), masses[nz].tolist())))


def discrete_energy(space: DyadicSpace, omega: SpaceMeasure, s: float, p: float, n: int) -> float:
    """``Σ_α ω(α)^{p'} / m(α)^{sp'-1}`` over cells of level ``≤ n`` for ``Λ*ω``."""
    tree = weight_pi_s(space, s, p)
    nu = _pull_back(space, omega, n)
    return energy(tree, TreeMeasure(tree, nu.support, nu.mass), p)


def check_energy_equivalence(space: DyadicSpace, omega, s: float, p: float, depths,
                             extra: int = 1) -> CheckReport:
    """Ratios ``E_tree(Λ*ω) / E_X(ω)`` across depths.

    The continuous side uses quadrature level ``depth + extra``.  For atoms
    with ``s ≥ 1/p'`` both energies diverge and resolution-limited values
    (no refinement at the atoms) are compared instead.
    """
    t0 = time.perf_counter()
    q = conjugate(p)
    if isinstance(omega, TreeMeasure):
        omega = push_forward(space, omega)
    elif not isinstance(omega, SpaceMeasure):
        omega = SpaceMeasure(atoms=tuple((_exact_point(space, x)[0], float(m)) for x, m in omega))
    divergent = bool(omega.atoms) and s >= 1.0 / q
    depths = [int(n) for n in depths]
    disc, cont = [], []
    for n in depths:
        disc.append(discrete_energy(space, omega, s, p, n))
        cont.append(continuous_energy(space, omega, s, p, n + extra, truncate=divergent))
    ratios = [_ratio(a, b) for a, b in zip(disc, cont)]
    if omega.total == 0:
        return CheckReport("energy_equivalence", "zero measure", 0.0, 0.0, 0.0, True,
                           empirical={"depths": depths, "ratios": ratios},
                           runtime=time.perf_counter() - t0)
    slope = log_slope(depths, ratios)
    lo, hi = min(ratios), max(ratios)
    C = max(hi, 1.0 / lo)
    passed = all(math.isfinite(r) and r > 0 for r in ratios) and abs(slope) <= SLOPE_LIMIT
    return CheckReport(
        name="energy_equivalence", instance=f"{space.kind} s={s} p={p} depths={depths[0]}..{depths[-1]}",
        left=disc[-1], right=cont[-1], ratio=ratios[-1], passed=bool(passed),
        empirical={"depths": depths, "discrete": disc, "continuous": cont, "ratios": ratios,
                   "window": [lo, hi], "C": C, "log_slope": slope, "divergent": divergent},
        runtime=time.perf_counter() - t0,
    )


def check_capacity_transfer(space: DyadicSpace, sd, s: float, p: float, depths,
                            gap: int = 2) -> CheckReport:
    """Ratios ``Cap_n / Cap_{n+gap}`` of the discretized set under ``π_s``.

    ``Cap_n`` is computed on the space truncated at level ``n``; only the
    kind of ``space`` is used.
    """
    t0 = time.perf_counter()
    if isinstance(sd, str):
        sd = parse_set_descriptor(sd, space.dim)
    from .spaces import make_space

    depths = [int(n) for n in depths]
    caps = {}
    # the depth-n value lives on the tree truncated at level n
    for n in sorted(set(depths) | {n + gap for n in depths}):
        sp_n = make_space(space.kind, n, Q=int(space.Q) if space.kind == "cube" else None)
        caps[n] = capacity(weight_pi_s(sp_n, s, p), discretize_set(sp_n, sd, n), p)
    ratios = [_ratio(caps[n], caps[n + gap]) for n in depths]
    slope = log_slope(depths, ratios)
    lo, hi = min(ratios), max(ratios)
    passed = all(math.isfinite(r) and r > 0 for r in ratios) and abs(slope) <= SLOPE_LIMIT
    return CheckReport(
        name="capacity_transfer", instance=f"{space.kind} s={s} p={p}",
        left=caps[depths[-1]], right=caps[depths[-1] + gap], ratio=ratios[-1], passed=bool(passed),
        empirical={"depths": depths, "capacities": [caps[n] for n in depths], "ratios": ratios,
                   "window": [lo, hi], "C": max(hi, 1.0 / lo), "log_slope": slope},
        runtime=time.perf_counter() - t0,
    )


def check_ball_capacities(s: float, p: float, depths=range(1, 13), extra: int = 8,
                          slack: float = 1e-9) -> CheckReport:
    """``Cap(∂S(α)) / Cap({α})`` for the leftmost depth-``k`` cell of the interval under ``π_s``.

    The cylinder is resolved ``extra`` levels below ``α``.
    """
    from .spaces import make_space

    t0 = time.perf_counter()
    depths = [int(k) for k in depths]
    ratios = []
    for k in depths:
        space = make_space("interval", k + extra)
        tree = weight_pi_s(space, s, p)
        a = space.node_at(k, 0)
        ratios.append(capacity(tree, [a], p) / capacity_point(tree, a, p))
    slope = log_slope(depths, ratios)
    c = min(ratios)
    passed = c > 0 and max(ratios) <= 1 + slack and abs(slope) <= SLOPE_LIMIT
    return CheckReport(
        name="ball_capacities", instance=f"interval s={s:.6g} p={p}",
        left=c, right=max(ratios), ratio=c, passed=bool(passed), bound=1.0,
        empirical={"depths": depths, "ratios": ratios, "c": c, "log_slope": slope},
        runtime=time.perf_counter() - t0,
    )
