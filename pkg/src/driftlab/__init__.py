"""driftlab: principal eigenpairs of small-diffusion advection operators on
flat tori, with predicted concentration limits and diagnostics."""

__version__ = "0.1.0"

from .expr import TrigExpr, ExprSyntaxError, parse_expr, trig_monomial

__all__ = [
    "__version__",
    "TrigExpr",
    "ExprSyntaxError",
    "parse_expr",
    "trig_monomial",
]
