"""Basis-gate selection and transpilation for driven two-qubit couplers."""

from .exceptions import (
    BasisGateError,
    BothZero,
    DegenerateBoundary,
    EmptyInput,
    IncompatibleBases,
    IncompleteCoverage,
    NoIntersection,
    NonHermitianInput,
    NonUnitaryInput,
    SchemaError,
    SynthesisFailure,
)
from .weyl import (
    MakhlinInvariants,
    WeylPoint,
    canonical_coordinate,
    haar_random_local,
    haar_random_unitary4,
    makhlin_invariants,
    makhlin_loss,
)
from .hamiltonian import (
    ConversionGainParams,
    ParallelDriveParams,
    conversion_gain_unitary,
    drive_ratio,
    hermitian_expm4,
    parallel_drive_unitary,
)
from .speedlimit import (
    LinearSpeedLimit,
    ScaledGateCost,
    SpeedLimit,
    SquaredSpeedLimit,
    TabulatedSpeedLimit,
    boundary_for_ratio,
    min_time,
    normalize,
    scaled_duration,
)
from .hull import ConvexPolytope3, convex_hull3
from .optimize import OptimizerConfig, nelder_mead
from .coverage import (
    BasisSpec,
    CoverageSet,
    JointCoverage,
    build_coverage,
    build_joint_coverage,
    canonical_basis,
    expected_k,
    haar_volume,
    template_coordinate,
)
from .costs import (
    ScoreReport,
    TargetDistribution,
    best_basis_sweep,
    d_cost,
    k_cost,
    score_report,
    v_score,
    w_score,
)
from .transpile import (
    Circuit,
    FidelityParams,
    GateOp,
    Schedule,
    TranspilerContext,
    consolidate_1q,
    decompose_2q,
    fidelity,
    parse_circuit,
    schedule,
    transpile,
)

__version__ = "0.1.0"
