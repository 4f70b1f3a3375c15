"""Exact tree capacities, equilibrium pairs and brute-force oracles.

A :class:`~treecap.tree.BoundarySet` node ``α`` stands for the boundary
cylinder below it; on a truncated tree that is the set of leaves under
``α``.  Passing ``interior=True`` instead puts the constraint on the node
itself, which is the capacity of the closed set ``S̄(α)`` seen from inside
the tree.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .potential import carleson_norm, energy, hardy
from .tree import (BoundarySet, TreeMeasure, WeightedTree, as_boundary_set, conjugate,
                   d_pi, measure_from_masses)

__all__ = [
    "OracleConvergenceError",
    "EquilibriumResult",
    "target_nodes",
    "relative_capacities",
    "capacity",
    "capacity_point",
    "equilibrium",
    "capacity_primal_oracle",
    "capacity_p2_direct",
    "capacity_dual_oracle",
    "DualOracleResult",
]


class OracleConvergenceError(RuntimeError):
    """An oracle did not certify its value within the iteration budget."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


def target_nodes(tree: WeightedTree, E, interior: bool = False) -> np.ndarray:
    """Nodes where the constraint ``Iφ ≥ 1`` is imposed.

    Boundary mode expands each antichain node to the leaves beneath it.
    """
    E = as_boundary_set(tree, E)
    mark = np.zeros(tree.n_nodes, dtype=bool)
    mark[list(E.nodes)] = True
    if interior:
        return np.flatnonzero(mark)
    covered = tree.below_marked(mark)
    return np.flatnonzero(covered & (tree.n_children == 0))


def _check_targets(tree: WeightedTree, targets) -> np.ndarray:
    t = np.unique(np.asarray(targets, dtype=np.int64))
    if t.size and (t[0] < 0 or t[-1] >= tree.n_nodes):
        raise IndexError("target node out of range")
    return t


def relative_capacities(tree: WeightedTree, targets, p: float) -> np.ndarray:
    """Capacity of ``targets ∩ S(v)`` computed with ``v`` as root, for every ``v``.

    Bottom-up: a target contributes ``π(v)``; any other node combines its
    children's values ``S = Σ c_j`` as ``S / (1 + π(v)^{1-p'} S^{p'-1})^{p-1}``.
    """
    q = conjugate(p)
    targets = _check_targets(tree, targets)
    is_t = np.zeros(tree.n_nodes, dtype=bool)
    is_t[targets] = True
    w = tree.weight
    c = np.zeros(tree.n_nodes)
    S = np.zeros(tree.n_nodes)
    b = tree.level_bounds
    for k in range(tree.height, -1, -1):
        lo, hi = int(b[k]), int(b[k + 1])
        s = S[lo:hi]
        pos = s > 0
        comb = np.zeros(hi - lo)
        comb[pos] = s[pos] / (1.0 + w[lo:hi][pos] ** (1.0 - q) * s[pos] ** (q - 1.0)) ** (p - 1.0)
        c[lo:hi] = np.where(is_t[lo:hi], w[lo:hi], comb)
        if k > 0:
            plo = int(b[k - 1])
            S[plo:lo] += np.bincount(tree.parent[lo:hi] - plo, weights=c[lo:hi],
                                     minlength=lo - plo)
    return c


def capacity(tree: WeightedTree, E, p: float, interior: bool = False) -> float:
    """Capacity of the cylinder union described by the antichain ``E``."""
    conjugate(p)
    targets = target_nodes(tree, E, interior)
    if targets.size == 0:
        return 0.0
    return float(relative_capacities(tree, targets, p)[0])


def capacity_of_targets(tree: WeightedTree, targets, p: float) -> float:
    targets = _check_targets(tree, targets)
    if targets.size == 0:
        return 0.0
    return float(relative_capacities(tree, targets, p)[0])


def capacity_point(tree: WeightedTree, zeta: int, p: float) -> float:
    """``Cap({ζ}) = d_π(ζ)^{1-p}``."""
    return d_pi(tree, zeta, p) ** (1.0 - p)


@dataclass(frozen=True, eq=False)
class EquilibriumResult:
    capacity: float
    phi: np.ndarray
    mu: TreeMeasure
    targets: np.ndarray
    max_residual: float
    carleson: float

    def report(self) -> dict:
        tree = self.mu.tree
        labels = tree.node_labels
        nz = np.flatnonzero(self.phi)
        return {
            "capacity": self.capacity,
            "phi": {labels[v]: float(self.phi[v]) for v in nz},
            "mu": {labels[v]: float(m) for v, m in zip(self.mu.support, self.mu.mass)},
            "max_residual": self.max_residual,
            "carleson_norm": self.carleson,
        }


def equilibrium_of_targets(tree: WeightedTree, targets, p: float) -> EquilibriumResult:
    q = conjugate(p)
    targets = _check_targets(tree, targets)
    if targets.size == 0:
        raise ValueError("equilibrium needs a nonempty set")
    c = relative_capacities(tree, targets, p)
    w = tree.weight
    # Each child subtree solves its relative problem rescaled by the common
    # factor (1 - Iφ(v))^{p-1}, so the measure splits in proportion to the
    # relative capacities.  Splitting avoids the cancellation in 1 - Iφ.
    S = np.bincount(tree.parent[1:], weights=c[1:], minlength=tree.n_nodes)
    ist = np.zeros(tree.n_nodes)
    ist[0] = c[0]
    is_t = np.zeros(tree.n_nodes, dtype=bool)
    is_t[targets] = True
    b = tree.level_bounds
    for k in range(1, tree.height + 1):
        lo, hi = int(b[k]), int(b[k + 1])
        par = tree.parent[lo:hi]
        live = (S[par] > 0) & ~is_t[par]
        ist[lo:hi] = np.where(live, ist[par] * c[lo:hi] / np.where(live, S[par], 1.0), 0.0)
    phi = np.where(ist > 0, ist ** (q - 1.0) * w ** (1.0 - q), 0.0)
    masses = ist[targets]
    mu = measure_from_masses(tree, list(zip(targets.tolist(), masses.tolist())))
    Iphi = hardy(tree, phi)
    return EquilibriumResult(
        capacity=float(c[0]),
        phi=phi,
        mu=mu,
        targets=targets,
        max_residual=float(np.max(np.abs(Iphi[targets] - 1.0))),
        carleson=carleson_norm(tree, mu, p),
    )


def equilibrium(tree: WeightedTree, E, p: float, interior: bool = False) -> EquilibriumResult:
    """Extremal function ``φ^E`` and measure ``m^E`` of a nonempty set."""
    conjugate(p)
    targets = target_nodes(tree, E, interior)
    if targets.size == 0:
        raise ValueError("equilibrium needs a nonempty set")
    return equilibrium_of_targets(tree, targets, p)


# oracles --------------------------------------------------------------------

def _incidence(tree: WeightedTree, targets: np.ndarray):
    """Spanning nodes of ``targets ∪ {o}`` and the 0/1 matrix ``A[i, j] = [j ∈ [o, t_i]]``."""
    mark = np.zeros(tree.n_nodes, dtype=bool)
    mark[targets] = True
    span = np.flatnonzero(tree.above_marked(mark))
    col = {int(v): j for j, v in enumerate(span)}
    A = np.zeros((targets.size, span.size))
    for i, t in enumerate(targets):
        for v in tree.path(int(t)):
            A[i, col[int(v)]] = 1.0
    return span, A


def _dual_bound(w_span: np.ndarray, A: np.ndarray, x: np.ndarray, p: float) -> float:
    """``x(E)^p / E(x)^{p-1}`` for masses ``x`` on the targets."""
    q = conjugate(p)
    ist = A.T @ x
    e = float(np.sum(ist**q * w_span ** (1.0 - q)))
    tot = float(np.sum(x))
    if e <= 0:
        return 0.0
    return tot**p / e ** (p - 1.0)


def _primal_bound(w_span: np.ndarray, A: np.ndarray, phi: np.ndarray, p: float) -> float:
    """``‖φ‖^p / (min_E Iφ)^p``: the cost of ``φ`` rescaled to be admissible."""
    phi = np.maximum(phi, 0.0)
    low = float(np.min(A @ phi))
    if low <= 0:
        return np.inf
    return float(np.sum(w_span * phi**p)) / low**p


def capacity_primal_oracle(tree: WeightedTree, E, p: float, tol: float = 1e-8,
                           interior: bool = False) -> float:
    """Minimize ``Σ φ^p π`` subject to ``Iφ ≥ 1`` on ``E`` with a conic solver.

    The returned value is the cost of the rescaled (hence admissible)
    solver output.  It is certified against the lower bound built from the
    solver's constraint multipliers.
    """
    conjugate(p)
    targets = target_nodes(tree, E, interior)
    return primal_oracle_targets(tree, targets, p, tol)


def primal_oracle_targets(tree: WeightedTree, targets, p: float, tol: float = 1e-8) -> float:
    import cvxpy as cp

    targets = _check_targets(tree, targets)
    if targets.size == 0:
        return 0.0
    span, A = _incidence(tree, targets)
    w = tree.weight[span]
    phi = cp.Variable(span.size, nonneg=True)
    cons = [A @ phi >= 1]
    prob = cp.Problem(cp.Minimize(w @ cp.power(phi, p)), cons)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-11, tol_gap_rel=1e-11,
                       tol_feas=1e-11, max_iter=500)
    except cp.error.SolverError as exc:
        raise OracleConvergenceError(f"conic solver failed: {exc}", np.inf) from exc
    if phi.value is None or cons[0].dual_value is None:
        raise OracleConvergenceError(f"solver status {prob.status}", np.inf)
    upper = _primal_bound(w, A, np.asarray(phi.value), p)
    lower = _dual_bound(w, A, np.maximum(np.asarray(cons[0].dual_value), 0.0), p)
    gap = (upper - lower) / upper if upper > 0 else np.inf
    if not gap <= tol:
        raise OracleConvergenceError("primal oracle gap above tolerance", gap)
    return upper


def capacity_p2_direct(tree: WeightedTree, E, interior: bool = False) -> float:
    """``p = 2`` cross-check: solve the stationarity system with every constraint active.

    ``2πφ = Aᵀλ`` and ``Aφ = 1`` give ``(A diag(1/2π) Aᵀ) λ = 1``; a
    nonnegative ``λ`` certifies optimality.
    """
    targets = target_nodes(tree, E, interior)
    if targets.size == 0:
        return 0.0
    span, A = _incidence(tree, targets)
    w = tree.weight[span]
    G = (A / (2.0 * w)) @ A.T
    lam = np.linalg.solve(G, np.ones(targets.size))
    if np.any(lam < -1e-12):
        raise OracleConvergenceError("stationarity solve produced a negative multiplier",
                                     float(-lam.min()))
    phi = A.T @ lam / (2.0 * w)
    return float(np.sum(w * phi**2))


@dataclass(frozen=True, eq=False)
class DualOracleResult:
    value: float
    upper: float
    measure: TreeMeasure
    iterations: int


def _project_simplex(v: np.ndarray) -> np.ndarray:
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def _dual_upper(w: np.ndarray, A: np.ndarray, x: np.ndarray, q: float, p: float) -> float:
    s = A.T @ x
    V = A @ (w * s ** (q - 1.0))
    low = float(np.min(V))
    return float(np.sum(w * s**q)) / low**p if low > 0 else np.inf


def _newton_polish(w: np.ndarray, wp: np.ndarray, A: np.ndarray, x: np.ndarray,
                   p: float, steps: int = 30):
    """Newton's method on ``V(x) = λ`` over the targets with ``Σx = 1``.

    Returns ``(lower, upper, x)`` or ``None`` when an iterate leaves the
    open simplex.  Near the optimum the first-order upper bound converges
    much faster this way than by gradient steps.
    """
    q = conjugate(p)
    n = x.size
    x = x / x.sum()
    for _ in range(steps):
        if np.any(x <= 0):
            return None
        s = A.T @ x
        V = A @ (w * s ** (q - 1.0))
        lam = float(x @ V)
        H = (q - 1.0) * (A * (w * s ** (q - 2.0))) @ A.T
        J = np.zeros((n + 1, n + 1))
        J[:n, :n] = H
        J[:n, n] = -1.0
        J[n, :n] = 1.0
        F = np.concatenate([V - lam, [x.sum() - 1.0]])
        try:
            d = np.linalg.solve(J, -F)[:n]
        except np.linalg.LinAlgError:
            return None
        x = x + d
        if np.max(np.abs(F)) <= 1e-15 * max(1.0, abs(lam)):
            break
    if np.any(x <= 0):
        return None
    x = x / x.sum()
    return _dual_bound(wp, A, x, p), _dual_upper(w, A, x, q, p), x


def dual_oracle_targets(tree: WeightedTree, targets, p: float, tol: float = 1e-8,
                        max_iter: int = 100_000) -> DualOracleResult:
    q = conjugate(p)
    targets = _check_targets(tree, targets)
    if targets.size == 0:
        return DualOracleResult(0.0, 0.0, measure_from_masses(tree, []), 0)
    span, A = _incidence(tree, targets)
    w = tree.weight[span] ** (1.0 - q)
    wp = tree.weight[span]

    def f(x):
        return float(np.sum(w * (A.T @ x) ** q))

    def grad(x):
        # gradient of the energy is q times the Wolff potential on the targets
        return q * (A @ (w * (A.T @ x) ** (q - 1.0)))

    n = targets.size
    x = np.full(n, 1.0 / n)
    y = x.copy()
    fx = f(x)
    t = 1.0
    step = 1.0 / max(1e-300, float(np.max(np.abs(grad(x)))))
    best = (0.0, np.inf, x)
    gap = np.inf
    stalls = 0
    for it in range(1, max_iter + 1):
        gy = grad(y)
        fy = f(y)
        while True:
            xn = _project_simplex(y - step * gy)
            d = xn - y
            fn = f(xn)
            if fn <= fy + gy @ d + 0.5 / step * (d @ d) + 1e-15 * abs(fy):
                break
            step *= 0.5
            if step < 1e-300:
                raise OracleConvergenceError("dual oracle line search collapsed", gap)
        if fn > fx:
            # restart momentum when the objective goes up; from x itself this
            # only happens at roundoff level
            stalls = stalls + 1 if np.array_equal(y, x) else 0
            t = 1.0
            y = x.copy()
        else:
            stalls = 0
            tn = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            y = xn + ((t - 1.0) / tn) * (xn - x)
            y = np.maximum(y, 0.0)
            y /= y.sum()
            x, fx, t = xn, fn, tn
            step *= 1.2
        if it % 10 and it != 1 and not stalls:
            continue
        lower = _dual_bound(wp, A, x, p)
        upper = _dual_upper(w, A, x, q, p)
        if lower > best[0]:
            best = (lower, min(upper, best[1]), x.copy())
        else:
            best = (best[0], min(upper, best[1]), best[2])
        gap = (best[1] - best[0]) / best[1]
        if tol < gap <= 1e-2 or stalls:
            polished = _newton_polish(w, wp, A, x, p)
            if polished is not None and polished[0] >= best[0] * (1 - 1e-12):
                best = (max(best[0], polished[0]), min(best[1], polished[1]), polished[2])
                gap = (best[1] - best[0]) / best[1]
        if gap <= tol:
            mu = measure_from_masses(tree, list(zip(targets.tolist(), best[2].tolist())))
            return DualOracleResult(best[0], best[1], mu, it)
        if stalls > 3:
            break
    raise OracleConvergenceError("dual oracle did not reach tolerance", gap)


def capacity_dual_oracle(tree: WeightedTree, E, p: float, tol: float = 1e-8,
                         interior: bool = False, max_iter: int = 100_000) -> float:
    """Maximize ``μ(E)^p / E(μ)^{p-1}`` over probability measures on ``E``.

    Projected accelerated gradient on the simplex.  Stops once the ratio
    is within ``tol`` (relative) of the admissible cost of the measure's
    own potential rescaled to ``≥ 1`` on ``E``.
    """
    conjugate(p)
    targets = target_nodes(tree, E, interior)
    return dual_oracle_targets(tree, targets, p, tol, max_iter).value
