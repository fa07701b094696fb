"""Entropy of dynamical systems on MV-algebras (finite tribes of fuzzy sets)."""

from .dynamics import (
    EntropySequence,
    H_n,
    IsomorphismMap,
    CrispBoundResult,
    classical_join_masses,
    classical_ks_oracle,
    entropy_sequence,
    h_bar,
    h_of_partition,
    h_of_system,
    is_stabilized,
    join_entropy,
    maliczky_vs_product_check,
    map_order,
    orbit_partitions,
    theorem4_check,
    transport_partition,
    transport_system,
)
from .errors import (
    BudgetExceededError,
    ConfigError,
    DomainError,
    InvariantViolation,
    IsomorphismError,
    MvEntropyError,
    NotIdempotentError,
    PreconditionError,
    SpaceMismatchError,
    UndefinedSumError,
)
from .mv import (
    DynamicalSystem,
    FiniteSpace,
    MvElement,
    NumericMode,
    StateM,
    TransformationTau,
    mv_neg,
    mv_odot,
    mv_oplus,
    partial_add,
    riesz_decompose,
    state_eval,
    tau_apply,
)
from .oracle import brute_force_oracle
from .partitions import (
    EntropyValue,
    Partition,
    RefinementTensor,
    conditional_entropy,
    entropy_H,
    h_parallel,
    is_idempotent,
    phi,
    product_refine,
    refine_lemma1,
    refine_lemma1_chain,
    tau_partition,
    tensor_entropy,
)
from .polytope import LocalPolytope, enumerate_local_vertices, greedy_vertices
from .refine import RefinementSolution, SolverConfig, min_entropy_refinement

__version__ = "0.1.0"
