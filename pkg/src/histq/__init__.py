"""Numerical toolkit for decoherence functionals on finite-dimensional history spaces."""

from .consistency import analyze_partition, coarse_grain_check
from .decoherence import (
    ILSOperator, ProjectorSampler, Propagator, QuantumState, build_X, build_Y, check_axioms,
    check_ils_constraints, class_operator, eval_ils, eval_standard, ils_functional,
)
from .histories import (
    BooleanPartition, HistoryProjector, HistorySpec, HomogeneousHistory, embed_homogeneous, lattice_op,
    orthogonal, product_partition,
)
from .linalg import Tolerance, eigh, kron, norms, nullspace_projector, sqrt_psd, validate
from .representations import (
    estimate_R_norm, gns_eval, make_gns, realign, reconstruct_from_family, semi_inner_split,
    trace_family_decomposition,
)
from .asymptotics import divergence_probe, norm_sweep, state_family, tracial_bound_probe

__version__ = "0.1.0"
