"""Random walks on the irreducible-representation tree of a free unitary
quantum group: fusion rules, classical and perturbed transition matrices,
Green and Martin kernels, and numerical audits of the kernel estimates."""

from .words import (
    ball,
    branch,
    classical_dim,
    format_word,
    geodesic,
    indecomposable_factors,
    involution,
    parse_word,
    qbinom,
    qdim,
    qnumber,
    tree_distance,
)
from .fusion import (
    Measure,
    TransitionMatrix,
    dual_audit,
    fuse,
    is_generating,
    multiplicity,
    norm_upper_bound,
    transition_matrix,
    transition_prob,
    uniform_irreducibility_constants,
)
from .intertwiners import (
    Intertwiner,
    IntertwinerEngine,
    ModelConfig,
    TensorCapError,
    build_duality_maps,
    vtilde_norm_indecomposable,
)
from .kernels import (
    KernelTable,
    RayProfile,
    boundary_profile,
    green_table,
    harnack_audit,
    last_entry_audit,
    multiplicativity_audit,
    ray_words,
    truncation_error_bound,
    weighted_operator_norm,
)
from .perturbed import (
    BranchContext,
    QhatStore,
    boundary_positivity_and_ratio,
    decay_audit,
    gdif_audit,
    green_Q,
    martin_Q,
    q_matrix,
    qhat_entry,
    qhat_oracle,
)

__version__ = "0.1.0"

__all__ = [
    "ball", "branch", "classical_dim", "format_word", "geodesic",
    "indecomposable_factors", "involution", "parse_word", "qbinom", "qdim",
    "qnumber", "tree_distance",
    "Measure", "TransitionMatrix", "dual_audit", "fuse", "is_generating",
    "multiplicity", "norm_upper_bound", "transition_matrix", "transition_prob",
    "uniform_irreducibility_constants",
    "Intertwiner", "IntertwinerEngine", "ModelConfig", "TensorCapError",
    "build_duality_maps", "vtilde_norm_indecomposable",
    "KernelTable", "RayProfile", "boundary_profile", "green_table",
    "harnack_audit", "last_entry_audit", "multiplicativity_audit", "ray_words",
    "truncation_error_bound", "weighted_operator_norm",
    "BranchContext", "QhatStore", "boundary_positivity_and_ratio",
    "decay_audit", "gdif_audit", "green_Q", "martin_Q", "q_matrix",
    "qhat_entry", "qhat_oracle",
    "__version__",
]
