"""SLOCC witnesses from maximal orbit overlaps, their two-copy embedding, and PPT bounds."""

__version__ = "0.1.0"

from .errors import (
    BudgetExceededError,
    DegenerateOperatorError,
    ShapeError,
    SloccError,
    UnknownStateError,
    ValidationError,
)
from .overlap import (
    OptimizerConfig,
    OverlapResult,
    OverlapTable,
    maximize_slocc_overlap,
    overlap_objective,
    overlap_table,
    per_party_update,
)
from .states import PSI_IDS, StateId, parse_state_id, random_ginibre, representative
from .tensor import (
    DensityMatrix,
    HermitianOperator,
    LocalOperatorTuple,
    PureState,
    apply_local,
    hermitian_eig,
    partial_transpose,
    vectorize,
)
from .witness import (
    EmbeddedWitness,
    SloccWitness,
    Verdict,
    bestate_sigma,
    build_witness,
    embed,
    expectation,
    verify_slocc_witness,
)

__all__ = [
    "BudgetExceededError", "DegenerateOperatorError", "ShapeError", "SloccError",
    "UnknownStateError", "ValidationError", "OptimizerConfig", "OverlapResult",
    "OverlapTable", "maximize_slocc_overlap", "overlap_objective", "overlap_table",
    "per_party_update", "PSI_IDS", "StateId", "parse_state_id", "random_ginibre",
    "representative", "DensityMatrix", "HermitianOperator", "LocalOperatorTuple",
    "PureState", "apply_local", "hermitian_eig", "partial_transpose", "vectorize",
    "EmbeddedWitness", "SloccWitness", "Verdict", "bestate_sigma", "build_witness",
    "embed", "expectation", "verify_slocc_witness",
]
