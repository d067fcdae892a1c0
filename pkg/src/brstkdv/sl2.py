"""sl(2,R) structure data and the canonical graded symmetry of the
first-order gauge multiplet.

Basis labels are "0", "+", "-".  The generator matrices are normalised so
that tr(T_a T_b) = eta_ab / 2 with eta_00 = 1, eta_+- = eta_-+ = 1; the
structure constants are then f_{0+}^+ = 1, f_{0-}^- = -1, f_{+-}^0 = 1
(antisymmetric in the lower pair), and the fully lowered constants
f_abc = f_ab^d eta_dc coincide with the antisymmetric symbol normalised by
f_{0+-} = +1.

Field-name convention for the canonical multiplet (suffix 0/p/m for the
basis label): a* for the spatial connection, p* for its conjugate momenta,
c* for ghosts, m* for the odd multipliers paired with the constraints.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import sympy as sp

from .graded import DerivationRuleSet, GradedPoly

__all__ = [
    "BASIS",
    "SUFFIX",
    "CANONICAL_EVEN",
    "CANONICAL_ODD",
    "CANONICAL_FIELDS",
    "structure_constant",
    "structure_table",
    "killing_form",
    "epsilon_lower",
    "generator_matrices",
    "matrix_structure_constants",
    "commutator_components",
    "curvature_residual",
    "constraint_polynomials",
    "canonical_brst_rules",
    "ConnectionGrid",
]

BASIS = ("0", "+", "-")
SUFFIX = {"0": "0", "+": "p", "-": "m"}

CANONICAL_EVEN = ("a0", "ap", "am", "p0", "pp", "pm")
CANONICAL_ODD = ("c0", "cp", "cm", "m0", "mp", "mm")
CANONICAL_FIELDS = CANONICAL_EVEN + CANONICAL_ODD

_IDX = {"0": 0, "+": 1, "-": 2}

# eta_ab = 2 tr(T_a T_b); self-inverse, so it raises and lowers alike
_ETA = ((1, 0, 0), (0, 0, 1), (0, 1, 0))


def structure_table():
    """f[a][b][c] = f_ab^c as a nested tuple of ints."""
    f = [[[0] * 3 for _ in range(3)] for _ in range(3)]
    for (a, b, c), v in {("0", "+", "+"): 1, ("0", "-", "-"): -1, ("+", "-", "0"): 1}.items():
        f[_IDX[a]][_IDX[b]][_IDX[c]] = v
        f[_IDX[b]][_IDX[a]][_IDX[c]] = -v
    return tuple(tuple(tuple(r) for r in m) for m in f)


_F = structure_table()


def structure_constant(a, b, c):
    """f_ab^c for basis labels a, b, c."""
    return _F[_IDX[a]][_IDX[b]][_IDX[c]]


def killing_form(a, b):
    """eta_ab = 2 tr(T_a T_b)."""
    return _ETA[_IDX[a]][_IDX[b]]


def epsilon_lower(a, b, c):
    """Fully lowered f_abc = f_ab^d eta_dc (antisymmetric, f_{0+-} = 1)."""
    return sum(_F[_IDX[a]][_IDX[b]][d] * _ETA[d][_IDX[c]] for d in range(3))


def generator_matrices(exact=False):
    """The 2x2 generators {label: matrix}; sympy matrices when exact."""
    if exact:
        s = 1 / sp.sqrt(2)
        return {
            "0": sp.Matrix([[sp.Rational(1, 2), 0], [0, -sp.Rational(1, 2)]]),
            "+": sp.Matrix([[0, s], [0, 0]]),
            "-": sp.Matrix([[0, 0], [s, 0]]),
        }
    s = 1.0 / np.sqrt(2.0)
    return {
        "0": np.array([[0.5, 0.0], [0.0, -0.5]]),
        "+": np.array([[0.0, s], [0.0, 0.0]]),
        "-": np.array([[0.0, 0.0], [s, 0.0]]),
    }


def matrix_structure_constants():
    """Recompute f_ab^c from the exact matrices via
    f_ab^c = 2 tr([T_a, T_b] T_d) eta^dc; ground truth for the tables."""
    T = generator_matrices(exact=True)
    out = [[[0] * 3 for _ in range(3)] for _ in range(3)]
    for a in BASIS:
        for b in BASIS:
            comm = T[a] * T[b] - T[b] * T[a]
            for c in BASIS:
                val = 0
                for d in BASIS:
                    val += 2 * (comm * T[d]).trace() * _ETA[_IDX[d]][_IDX[c]]
                val = sp.nsimplify(sp.simplify(val))
                out[_IDX[a]][_IDX[b]][_IDX[c]] = int(val)
    return tuple(tuple(tuple(r) for r in m) for m in out)


def _acc(acc, term):
    return term if acc is None else acc + term


def commutator_components(x, y, f=None):
    """[x, y]^a = f_bc^a x^b y^c for component triples (polys or arrays)."""
    f = _F if f is None else f
    out = []
    for a in range(3):
        acc = None
        for b in range(3):
            for c in range(3):
                if f[b][c][a]:
                    acc = _acc(acc, f[b][c][a] * (x[b] * y[c]))
        out.append(acc if acc is not None else 0 * (x[0] * y[0]))
    return out


def curvature_residual(dt_a1, dx_a0, a0, a1, f=None):
    """Components of dt A1 - dx A0 + [A0, A1], given the derivative grids."""
    quad = commutator_components(a0, a1, f=f)
    return [dt_a1[a] - dx_a0[a] + quad[a] for a in range(3)]


@dataclass(frozen=True)
class ConnectionGrid:
    """Sampled connection: components indexed by basis position (0, +, -)."""

    x: np.ndarray
    length: float
    a0: np.ndarray  # shape (3, N)
    a1: np.ndarray  # shape (3, N)


# ---------------------------------------------------------------------------
# canonical multiplet

def _ogen(sym, order=0):
    return GradedPoly.gen(sym, order, odd_syms=frozenset(CANONICAL_ODD))


def _fields(prefix):
    return {lab: _ogen(prefix + SUFFIX[lab]) for lab in BASIS}


def constraint_polynomials(f=None):
    """Gauss-law densities phi_a = d/dx p_a + f_ab^c a1^b p_c, fully expanded."""
    f = _F if f is None else f
    a1 = _fields("a")
    p = _fields("p")
    out = {}
    for a in BASIS:
        acc = _ogen("p" + SUFFIX[a], 1)
        for b in BASIS:
            for c in BASIS:
                v = f[_IDX[a]][_IDX[b]][_IDX[c]]
                if v:
                    acc = acc + Fraction(v) * a1[b] * p[c]
        out[a] = acc
    return out


def canonical_brst_rules(f=None):
    """The odd symmetry of the canonical multiplet as a rule set.

    On ghosts:      d c^a  = -1/2 f_bc^a c^b c^c
    on connection:  d a1^a = d/dx c^a + f_bc^a a1^b c^c
    on momenta:     d p_a  = -f_ab^c p_c c^b
    on multipliers: d m_a  = phi_a - f_ab^d c^b m_d

    A nonstandard structure table may be injected for sensitivity tests.
    """
    f = _F if f is None else f
    a1 = _fields("a")
    p = _fields("p")
    c = _fields("c")
    m = _fields("m")
    phi = constraint_polynomials(f)
    base = {}
    for a in BASIS:
        acc = GradedPoly.zero(frozenset(CANONICAL_ODD))
        for b in BASIS:
            for d in BASIS:
                v = f[_IDX[b]][_IDX[d]][_IDX[a]]
                if v:
                    acc = acc - Fraction(v, 2) * c[b] * c[d]
        base["c" + SUFFIX[a]] = acc
    for a in BASIS:
        acc = _ogen("c" + SUFFIX[a], 1)
        for b in BASIS:
            for d in BASIS:
                v = f[_IDX[b]][_IDX[d]][_IDX[a]]
                if v:
                    acc = acc + Fraction(v) * a1[b] * c[d]
        base["a" + SUFFIX[a]] = acc
    for a in BASIS:
        acc = GradedPoly.zero(frozenset(CANONICAL_ODD))
        for b in BASIS:
            for d in BASIS:
                v = f[_IDX[a]][_IDX[b]][_IDX[d]]
                if v:
                    acc = acc - Fraction(v) * p[d] * c[b]
        base["p" + SUFFIX[a]] = acc
    for a in BASIS:
        acc = phi[a]
        for b in BASIS:
            for d in BASIS:
                v = f[_IDX[a]][_IDX[b]][_IDX[d]]
                if v:
                    acc = acc - Fraction(v) * c[b] * m[d]
        base["m" + SUFFIX[a]] = acc
    return DerivationRuleSet("canonical-brst", parity=1, base=base)
