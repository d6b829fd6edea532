"""Dilute q-state clock model: random-cluster representation and its checks."""

from clockrc.clock import WeightTable, build_weight_table, hamiltonian, pair_class
from clockrc.cluster import (
    BOTTOM,
    conditional_spin_weights,
    hat_phi_weight,
    is_compatible,
    phi_weight_unnormalized,
    sample_edges_given_spins,
)
from clockrc.domination import beta0, beta0_upper_bound, varphi
from clockrc.errors import DomainError, InvariantViolation, SizeGuardError
from clockrc.lattice import (
    Disorder,
    Graph,
    apply_disorder,
    build_box_graph,
    connected_to_boundary,
    identify_boundary,
)

__version__ = "0.1.0"
