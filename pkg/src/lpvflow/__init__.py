"""Dynamic state-feedback control for polytopic LPV systems.

Online LQR policy-gradient adaptation of a state-feedback gain constrained to
a certified hyperrectangle: stability-region polynomials, quadratic-stability
certificates, optimal-gain boxes, projected gradient flow simulation, and a
bundled benchmark with a reproduction pipeline.
"""

from .boxes import Box, HyperRectangle
from .bounds import (
    ContainmentReport,
    ContainmentWitness,
    GainBoxResult,
    compute_gain_box,
    verify_containment,
)
from .cert import (
    HurwitzCheck,
    LmiVerification,
    RouthTable,
    StabilityCertificate,
    check_hurwitz,
    find_common_lyapunov,
    hurwitz_verdict,
    routh_table,
    stability_polynomials,
    stability_var_names,
    verify_lmi,
)
from .errors import (
    CareFailure,
    DegreeGuard,
    DimensionMismatch,
    DriftTooLarge,
    IntegrationError,
    LpvFlowError,
    MismatchedScenarios,
    NoStabilizingInit,
    NotConverged,
    NotHurwitz,
    NotHurwitzInput,
    NotSymmetric,
    OutsideManifold,
    ParamOutOfRange,
    SchemaError,
    SingularMatrix,
    ZeroPivot,
)
from .lpv_model import (
    AssumptionReport,
    ParamTrajectory,
    PolytopicLpvSystem,
    assumption_report,
    closed_loop_vertices,
    eval_A,
    load_system,
    system_from_dict,
    system_to_dict,
)
from .lqr_core import LqrEvaluation, evaluate, solve_care, solve_lyapunov
from .multipoly import MultiPoly
from .projection import eval_constraints, projected_gradient
from .sim import (
    CostComparison,
    SimConfig,
    SimTrace,
    compare_costs,
    simulate_closed_loop,
    simulate_static,
)

__version__ = "0.1.0"

__all__ = [
    "AssumptionReport",
    "Box",
    "CareFailure",
    "ContainmentReport",
    "ContainmentWitness",
    "CostComparison",
    "DegreeGuard",
    "DimensionMismatch",
    "DriftTooLarge",
    "GainBoxResult",
    "HurwitzCheck",
    "HyperRectangle",
    "IntegrationError",
    "LmiVerification",
    "LpvFlowError",
    "LqrEvaluation",
    "MismatchedScenarios",
    "MultiPoly",
    "NoStabilizingInit",
    "NotConverged",
    "NotHurwitz",
    "NotHurwitzInput",
    "NotSymmetric",
    "OutsideManifold",
    "ParamOutOfRange",
    "ParamTrajectory",
    "PolytopicLpvSystem",
    "RouthTable",
    "SchemaError",
    "SimConfig",
    "SimTrace",
    "SingularMatrix",
    "StabilityCertificate",
    "ZeroPivot",
    "assumption_report",
    "check_hurwitz",
    "closed_loop_vertices",
    "compare_costs",
    "compute_gain_box",
    "eval_A",
    "eval_constraints",
    "evaluate",
    "find_common_lyapunov",
    "hurwitz_verdict",
    "load_system",
    "projected_gradient",
    "routh_table",
    "simulate_closed_loop",
    "simulate_static",
    "solve_care",
    "solve_lyapunov",
    "stability_polynomials",
    "stability_var_names",
    "system_from_dict",
    "system_to_dict",
    "verify_containment",
    "verify_lmi",
]
