"""Hardy operator, its adjoint, energies, Wolff potentials and testing norms."""

from __future__ import annotations

import numpy as np

from .tree import TreeMeasure, WeightedTree, conjugate

__all__ = [
    "hardy",
    "hardy_sum",
    "adjoint_field",
    "energy",
    "energy_density",
    "potential_V",
    "wolff_potential",
    "carleson_ratios",
    "carleson_norm",
    "maximal_fn",
    "maximal_field",
]


def _node_function(tree: WeightedTree, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.ndim == 0:
        return np.full(tree.n_nodes, float(f))
    if f.shape != (tree.n_nodes,):
        raise ValueError(f"node function must have length {tree.n_nodes}")
    return f


def hardy(tree: WeightedTree, f) -> np.ndarray:
    """``If`` at every node: the sum of ``f`` along ``[o, v]``."""
    return tree.path_sum(_node_function(tree, f))


def hardy_sum(tree: WeightedTree, f, target: int) -> float:
    f = _node_function(tree, f)
    return float(np.sum(f[tree.path(target)]))


def adjoint_field(tree: WeightedTree, mu: TreeMeasure) -> np.ndarray:
    """``I*μ``: the mass of descendants-or-self of every node."""
    return np.array(mu.istar)


def energy_density(tree: WeightedTree, mu: TreeMeasure, p: float) -> np.ndarray:
    """Node measure ``σ_μ = (I*μ)^{p'} π^{1-p'}``."""
    q = conjugate(p)
    return mu.istar**q * tree.weight ** (1.0 - q)


def energy(tree: WeightedTree, mu: TreeMeasure, p: float) -> float:
    """``E(μ) = Σ_α (I*μ(α))^{p'} π(α)^{1-p'}``."""
    return float(np.sum(energy_density(tree, mu, p)))


def wolff_potential(tree: WeightedTree, mu: TreeMeasure, p: float) -> np.ndarray:
    """``V(μ) = I[π^{1-p'} (I*μ)^{p'-1}]`` at every node."""
    q = conjugate(p)
    return tree.path_sum(tree.weight ** (1.0 - q) * mu.istar ** (q - 1.0))


def potential_V(tree: WeightedTree, mu: TreeMeasure, p: float, xi: int) -> float:
    tree.check_node(xi)
    return float(wolff_potential(tree, mu, p)[xi])


def carleson_ratios(tree: WeightedTree, mu: TreeMeasure, p: float) -> np.ndarray:
    """``I*σ_μ(a) / I*μ(a)`` per node, NaN where ``I*μ(a) = 0``."""
    local = tree.subtree_sum(energy_density(tree, mu, p))
    ist = mu.istar
    out = np.full(tree.n_nodes, np.nan)
    pos = ist > 0
    out[pos] = local[pos] / ist[pos]
    return out


def carleson_norm(tree: WeightedTree, mu: TreeMeasure, p: float) -> float:
    """Testing norm ``[μ] = (sup_a I*σ_μ(a)/I*μ(a))^{p-1}``; zero for the zero measure.

    Nodes carrying no mass are left out of the supremum.
    """
    r = carleson_ratios(tree, mu, p)
    if np.all(np.isnan(r)):
        return 0.0
    return float(np.nanmax(r) ** (p - 1.0))


def maximal_field(tree: WeightedTree, mu: TreeMeasure, g) -> np.ndarray:
    """``M_μ g`` at every node: ``max_{β∈[o,v]} I*(g dμ)(β) / I*μ(β)``."""
    if mu.total <= 0:
        raise ValueError("maximal function undefined for zero measure")
    g = _node_function(tree, g)
    if np.any(g[mu.support] < 0):
        raise ValueError("g must be nonnegative on the support of mu")
    weighted = tree.subtree_sum(mu.dense * g)
    ist = mu.istar
    ratio = np.full(tree.n_nodes, -np.inf)
    pos = ist > 0
    ratio[pos] = weighted[pos] / ist[pos]
    return tree.path_max(ratio)


def maximal_fn(tree: WeightedTree, mu: TreeMeasure, g, zeta: int) -> float:
    tree.check_node(zeta)
    return float(maximal_field(tree, mu, g)[zeta])


def maximal_of_measure(tree: WeightedTree, mu: TreeMeasure, sigma) -> np.ndarray:
    """``M_μ(σ)`` for a node measure ``σ``: ``max_{β≤v} I*σ(β) / I*μ(β)``."""
    if mu.total <= 0:
        raise ValueError("maximal function undefined for zero measure")
    s = tree.subtree_sum(_node_function(tree, sigma))
    ist = mu.istar
    ratio = np.full(tree.n_nodes, -np.inf)
    pos = ist > 0
    ratio[pos] = s[pos] / ist[pos]
    return tree.path_max(ratio)


def weak_type_sides(tree: WeightedTree, mu: TreeMeasure, sigma, g, p: float):
    """Both sides of ``∫(M_μ g)^{p'} dσ ≤ C ∫ g^{p'} M_μ(σ) dμ`` (without ``C``).

    ``sigma`` is a node measure; ``g`` a nonnegative node function read on
    the support of ``mu``.  Nodes outside the region where ``M_μ g`` is
    defined contribute nothing on the left.
    """
    q = conjugate(p)
    sigma = _node_function(tree, sigma)
    mg = maximal_field(tree, mu, g)
    mg = np.where(np.isfinite(mg), mg, 0.0)
    lhs = float(np.sum(mg**q * sigma))
    msig = maximal_of_measure(tree, mu, sigma)
    g = _node_function(tree, g)
    s = mu.support
    rhs = float(np.sum(g[s] ** q * msig[s] * mu.mass))
    return lhs, rhs
