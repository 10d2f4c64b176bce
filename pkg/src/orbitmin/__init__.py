"""orbitmin: variational solver for fixed-energy periodic orbits of singular Hamiltonian systems."""

__version__ = "0.1.0"

from .errors import (
    CollisionError,
    ConfigError,
    DegenerateCertificateError,
    DegenerateLoopError,
    NegativeRateError,
    NoConvergenceError,
    OrbitminError,
    ProjectionError,
    SingularityError,
    StepFailureError,
)
from .functionals import (
    EnergyProblem,
    OrbitSolution,
    constraint_g,
    critical_radius,
    f_constrained,
    f_free,
    grad_f_free,
    period_from_loop,
    project_to_F,
    rescale_to_solution,
)
from .loops import (
    FourierLoop,
    GridLoop,
    InequalityReport,
    evaluate,
    h1_norm,
    inequality_report,
    kinetic_integral,
    min_radius,
    project_antisymmetric,
    project_zero_mean,
)
from .potentials import (
    AuditConfig,
    AuditReport,
    PotentialSpec,
    audit_assumptions,
    potential_gradient,
    potential_value,
    radial_euler_quantities,
)

__all__ = [
    "__version__",
    "AuditConfig",
    "AuditReport",
    "CollisionError",
    "ConfigError",
    "DegenerateCertificateError",
    "DegenerateLoopError",
    "EnergyProblem",
    "FourierLoop",
    "GridLoop",
    "InequalityReport",
    "NegativeRateError",
    "NoConvergenceError",
    "OrbitSolution",
    "OrbitminError",
    "PotentialSpec",
    "ProjectionError",
    "SingularityError",
    "StepFailureError",
    "audit_assumptions",
    "constraint_g",
    "critical_radius",
    "evaluate",
    "f_constrained",
    "f_free",
    "grad_f_free",
    "h1_norm",
    "inequality_report",
    "kinetic_integral",
    "min_radius",
    "period_from_loop",
    "potential_gradient",
    "potential_value",
    "project_antisymmetric",
    "project_to_F",
    "project_zero_mean",
    "radial_euler_quantities",
    "rescale_to_solution",
]
