"""Capacity of cylinder unions on a small weighted tree.

Computes the capacity by the bottom-up recursion, reconstructs the
equilibrium function and measure, and confirms the value with the two
optimization oracles.
"""

import numpy as np

from treecap import (
    capacity,
    capacity_dual_oracle,
    capacity_primal_oracle,
    carleson_norm,
    equilibrium,
    hardy,
    homogeneous_tree,
    normalize_antichain,
)

p = 3.0
tree = homogeneous_tree(3, 3).with_weights(np.linspace(0.5, 2.0, 40))
E = normalize_antichain(tree, [1, 8, 12, 30, 31])
print(f"tree with {tree.n_nodes} nodes, E = {E.nodes}, p = {p}")

cap = capacity(tree, E, p)
print(f"recursion      {cap:.12f}")
print(f"primal oracle  {capacity_primal_oracle(tree, E, p):.12f}")
print(f"dual oracle    {capacity_dual_oracle(tree, E, p):.12f}")

eq = equilibrium(tree, E, p)
If = hardy(tree, eq.phi)
print(f"phi(o)^(p-1) pi(o) = {eq.phi[0] ** (p - 1) * tree.weight[0]:.12f}")
print(f"I phi on the targets ranges over [{If[eq.targets].min():.15f}, {If[eq.targets].max():.15f}]")
print(f"mass of the equilibrium measure {eq.mu.total:.12f}, testing norm {carleson_norm(tree, eq.mu, p):.12f}")
