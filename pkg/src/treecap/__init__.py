"""Nonlinear potential theory on weighted trees and dyadic models of Ahlfors-regular spaces.

The package computes p-capacities of boundary sets of weighted rooted trees,
equilibrium potentials and measures, Carleson testing norms, and transfers
capacity and energy estimates to the unit interval, cubes and the Cantor set
through their dyadic trees.
"""

from .capacity import (
    DualOracleResult,
    EquilibriumResult,
    OracleConvergenceError,
    capacity,
    capacity_dual_oracle,
    capacity_p2_direct,
    capacity_point,
    capacity_primal_oracle,
    equilibrium,
    relative_capacities,
    target_nodes,
)
from .lab import (
    CheckReport,
    check_ball_capacities,
    check_capacity_transfer,
    check_cmcap,
    check_energy_equivalence,
    check_monotonicity,
    check_mww,
    check_shadow,
    check_trace_conditions,
    log_slope,
    random_antichain,
    random_measure,
    random_tree,
)
from .potential import (
    adjoint_field,
    carleson_norm,
    carleson_ratios,
    energy,
    energy_density,
    hardy,
    hardy_sum,
    maximal_field,
    maximal_fn,
    potential_V,
    wolff_potential,
)
from .spaces import (
    BallEstimate,
    DyadicSpace,
    SetDescriptor,
    SpaceMeasure,
    ball_capacity_estimate,
    ball_mass,
    cantor_distance,
    cantor_function,
    continuous_energy,
    discretize_set,
    graph_predecessor_set,
    kernel_K,
    lambda_map,
    lebesgue,
    make_space,
    parse_set_descriptor,
    pull_back_atomic,
    pull_back_rays,
    push_forward,
    weight_pi_s,
)
from .tree import (
    BoundarySet,
    TreeMeasure,
    WeightedTree,
    build_tree,
    chain_tree,
    confluent,
    conjugate,
    d_pi,
    homogeneous_tree,
    measure_from_masses,
    normalize_antichain,
    parse_tree,
    serialize_tree,
    tree_from_parents,
)

__version__ = "0.1.0"
