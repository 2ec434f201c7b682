"""Random quantum graphs as operator systems: sampling, laws, symmetries and
rigidity certificates for classical graphs."""
from .classical_rigidity import (
    RigidityCertificate,
    Verdict,
    adjacency_spectrum,
    char_poly_integer,
    classical_aut_trivial,
    distance_profiles,
    distinct_profiles,
    gm_switch,
    isospectral_check,
    no_zero_coordinates,
    quantum_isomorphism_obstruction,
    quantum_rigidity_certificate,
    thickness_check,
)
from .exceptions import (
    BadPartitionError,
    ExhaustedRetriesError,
    InvalidOperatorSystemError,
    LinearlyDependentError,
    NotHermitianError,
    NotRegularError,
    NotReflexiveError,
    NotSymmetricError,
    NotUnitaryError,
    ParameterOutOfRangeError,
    QGLabError,
    UnsupportedPatternError,
)
from .graphs import Graph
from .matrix_core import (
    eig_hermitian,
    gram_schmidt,
    hermitian_basis_f,
    hermitian_frame,
    sample_gue_traceless,
    simple_spectrum,
    tau,
    trace_inner,
)
from .operator_system import (
    OperatorSystem,
    Superoperator,
    check_cp,
    check_idempotent_law,
    check_reflexive,
    check_symmetric,
    degree_matrix,
    explicit_rigid_tuple,
    from_generators,
    from_graph,
    orthogonal_complement_system,
    project,
    projection_superoperator,
    quantum_adjacency,
)
from .random_models import (
    ModelConfig,
    qg_np_exceptional_probability,
    sample_gnp,
    sample_gnr,
    sample_qg_nd,
    sample_qg_np,
)
from .rng import seeded_rng
from .symmetry import (
    AutSearchReport,
    PhaseSolution,
    StabilizerAlgebra,
    degree_commutant_check,
    diagonal_phase_solver,
    discrete_aut_search,
    distance_from_scalars,
    is_abelian,
    stabilizer_lie_algebra,
    verify_automorphism,
)

__version__ = "0.1.0"

__all__ = [
    "AutSearchReport",
    "BadPartitionError",
    "ExhaustedRetriesError",
    "Graph",
    "InvalidOperatorSystemError",
    "LinearlyDependentError",
    "ModelConfig",
    "NotHermitianError",
    "NotReflexiveError",
    "NotRegularError",
    "NotSymmetricError",
    "NotUnitaryError",
    "OperatorSystem",
    "ParameterOutOfRangeError",
    "PhaseSolution",
    "QGLabError",
    "RigidityCertificate",
    "StabilizerAlgebra",
    "Superoperator",
    "UnsupportedPatternError",
    "Verdict",
    "adjacency_spectrum",
    "char_poly_integer",
    "check_cp",
    "check_idempotent_law",
    "check_reflexive",
    "check_symmetric",
    "classical_aut_trivial",
    "degree_commutant_check",
    "degree_matrix",
    "diagonal_phase_solver",
    "discrete_aut_search",
    "distance_from_scalars",
    "distance_profiles",
    "distinct_profiles",
    "eig_hermitian",
    "explicit_rigid_tuple",
    "from_generators",
    "from_graph",
    "gm_switch",
    "gram_schmidt",
    "hermitian_basis_f",
    "hermitian_frame",
    "is_abelian",
    "isospectral_check",
    "no_zero_coordinates",
    "orthogonal_complement_system",
    "project",
    "projection_superoperator",
    "qg_np_exceptional_probability",
    "quantum_adjacency",
    "quantum_isomorphism_obstruction",
    "quantum_rigidity_certificate",
    "sample_gnp",
    "sample_gnr",
    "sample_gue_traceless",
    "sample_qg_nd",
    "sample_qg_np",
    "seeded_rng",
    "simple_spectrum",
    "stabilizer_lie_algebra",
    "tau",
    "thickness_check",
    "trace_inner",
    "verify_automorphism",
]
