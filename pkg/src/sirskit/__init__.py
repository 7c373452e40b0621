"""SIRS epidemic model toolkit with pluggable nonlinear incidence.

Provides the model vector field and feasible region, the basic
reproduction number, endemic-equilibrium solving, numerical
global-stability certificates and trajectory simulation, plus a CLI.
"""

from .errors import (
    BlowUpError,
    BracketFailureError,
    ConfigError,
    DegenerateParameterError,
    EvaluationError,
    HypothesisViolationError,
    InvarianceViolationError,
    LimitConvergenceError,
    SingularPointError,
    SirsKitError,
    VerificationError,
)
from .incidence import (
    HypothesisReport,
    IncidenceFunction,
    check_hypotheses,
    check_incidence_bound,
    compute_beta,
    from_callables,
    make_builtin,
    small_i_limit,
)
from .model import ModelParams, State, dfe, in_omega, r0, vector_field
from .equilibria import (
    EquilibriumReport,
    equilibrium_line,
    find_endemic,
    i_axis_intercept,
    verify_equilibrium,
)
from .stability import (
    A1Check,
    A2Scan,
    CertificateReport,
    certify,
    check_a1,
    check_a2,
    default_k2,
    dfe_lyapunov_bound,
    dvdt_at,
    dvdt_scan,
    find_k1,
    lyapunov_v,
    pq_matrices,
    secant_slope,
)
from .simulate import (
    StepStats,
    SweepReport,
    SweepRun,
    Trajectory,
    attractor,
    conservation_check,
    integrate,
    omega_lattice,
    sweep,
)

__version__ = "0.1.0"

__all__ = [
    "A1Check",
    "A2Scan",
    "BlowUpError",
    "BracketFailureError",
    "CertificateReport",
    "ConfigError",
    "DegenerateParameterError",
    "EquilibriumReport",
    "EvaluationError",
    "HypothesisReport",
    "HypothesisViolationError",
    "IncidenceFunction",
    "InvarianceViolationError",
    "LimitConvergenceError",
    "ModelParams",
    "SingularPointError",
    "SirsKitError",
    "State",
    "StepStats",
    "SweepReport",
    "SweepRun",
    "Trajectory",
    "VerificationError",
    "attractor",
    "certify",
    "check_a1",
    "check_a2",
    "check_hypotheses",
    "check_incidence_bound",
    "compute_beta",
    "conservation_check",
    "default_k2",
    "dfe",
    "dfe_lyapunov_bound",
    "dvdt_at",
    "dvdt_scan",
    "equilibrium_line",
    "find_endemic",
    "find_k1",
    "from_callables",
    "i_axis_intercept",
    "in_omega",
    "integrate",
    "lyapunov_v",
    "make_builtin",
    "omega_lattice",
    "pq_matrices",
    "r0",
    "secant_slope",
    "small_i_limit",
    "sweep",
    "vector_field",
    "verify_equilibrium",
]
