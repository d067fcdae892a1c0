"""BRST-extended KdV-family hierarchies: exact graded differential algebra,
sl(2,R) gauge structure, integrable reductions, and pseudospectral solvers.
"""

from .graded import (
    GradedPoly,
    DerivationRuleSet,
    parameter,
    total_x_derivative,
    apply_derivation,
    t_prolong,
    reduce_on_shell,
    substitute_family,
    euler_operator,
    odd_gradient,
    to_string,
)
from .grammar import parse, ParseError

__version__ = "0.1.0"

__all__ = [
    "GradedPoly",
    "DerivationRuleSet",
    "parameter",
    "total_x_derivative",
    "apply_derivation",
    "t_prolong",
    "reduce_on_shell",
    "substitute_family",
    "euler_operator",
    "odd_gradient",
    "to_string",
    "parse",
    "ParseError",
    "__version__",
]
