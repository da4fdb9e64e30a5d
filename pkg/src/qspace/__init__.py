"""Exact algebra and numeric dynamics on the q-deformed quantum n-space."""

__version__ = "0.1.0"

from .dynamics import (
    CPoly,
    VectorField,
    apply_field,
    bracket_apply,
    classicalize,
    compose,
    jacobian,
    leibniz_residual,
    validate_field,
)
from .qalgebra import QPoly, eval_classical, mono_mul, poly_op, substitute
from .qcoeff import QScalar, scalar_eval, scalar_invert, scalar_ring_op
from .qparse import SystemDef, parse_expr, parse_system, print_canonical
from .simulate import (
    IntegratorConfig,
    Trajectory,
    equilibria,
    integrate,
    quantum_limit_sweep,
    rate_of_change,
    residual_defect,
    tangent_trajectory,
)
from .stability import StabilityQuery, StabilityReport, classify_equilibrium, probe_stability
