"""Ring and calculus laws of the graded differential polynomial engine.

Expected values in the point tests are derived by hand (chain rule,
integration by parts, permutation signs) before being compared against the
engine; the hypothesis tests check the algebraic laws themselves.
"""

from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from brstkdv import parse
from brstkdv.graded import (
    DerivationRuleSet,
    GradedPoly,
    apply_derivation,
    as_scalar,
    base_symbol,
    euler_operator,
    marker,
    odd_gradient,
    parameter,
    reduce_on_shell,
    substitute_family,
    t_prolong,
    to_string,
    total_x_derivative,
)

ODD = frozenset({"c"})


def P(text):
    return parse(text, odd=("c",))


def gen(sym, order=0, exp=1):
    return GradedPoly.gen(sym, order, exp, odd_syms=ODD)


# --- strategies -------------------------------------------------------------

coeffs = st.fractions(min_value=-4, max_value=4, max_denominator=6).filter(bool)


@st.composite
def term_triples(draw, odd_ok=True, max_terms=4):
    terms = []
    for _ in range(draw(st.integers(0, max_terms))):
        coeff = draw(coeffs)
        even = tuple(
            ((draw(st.sampled_from(["u", "T"])), draw(st.integers(0, 2))),
             draw(st.integers(1, 3)))
            for _ in range(draw(st.integers(0, 2)))
        )
        odd = ()
        if odd_ok:
            orders = draw(st.lists(st.integers(0, 2), max_size=2, unique=True))
            odd = tuple(("c", o) for o in orders)
        terms.append((coeff, even, odd))
    return terms


def from_triples(terms):
    return GradedPoly.from_terms(terms, odd_syms=ODD)


polys = term_triples().map(from_triples)
even_polys = term_triples(odd_ok=False).map(from_triples)
ghost_linear = term_triples().map(
    lambda ts: from_triples([t for t in ts if len(t[2]) == 1])
)


@st.composite
def monomials(draw):
    """Single products of generators: parity-homogeneous by construction."""
    coeff = draw(coeffs)
    even = tuple(
        (("u", draw(st.integers(0, 2))), draw(st.integers(1, 2)))
        for _ in range(draw(st.integers(0, 2)))
    )
    orders = draw(st.lists(st.integers(0, 2), max_size=2, unique=True))
    return GradedPoly.from_terms([(coeff, even, tuple(("c", o) for o in orders))],
                                 odd_syms=ODD)


# --- ring laws --------------------------------------------------------------

@given(polys, polys)
def test_addition_commutes(p, q):
    assert p + q == q + p


@given(polys, polys, polys)
def test_addition_associates(p, q, r):
    assert (p + q) + r == p + (q + r)


@given(polys)
def test_subtraction_cancels(p):
    assert (p - p).is_zero
    assert p + GradedPoly.zero(ODD) == p


@given(polys, polys, polys)
def test_multiplication_associates(p, q, r):
    assert (p * q) * r == p * (q * r)


@given(polys, polys, polys)
def test_left_distributivity(p, q, r):
    assert p * (q + r) == p * q + p * r


@given(even_polys, polys)
def test_even_factors_commute(p, q):
    assert p * q == q * p


@given(monomials(), monomials())
def test_graded_commutativity(p, q):
    """p q = (-1)^{|p||q|} q p for parity-homogeneous factors."""
    sp_, sq = p.parity(), q.parity()
    if sp_ is None or sq is None:  # a factor collapsed to 0
        return
    rhs = q * p
    assert p * q == (rhs if sp_ * sq == 0 else -rhs)


def test_odd_generators_anticommute():
    c, cx = gen("c"), gen("c", 1)
    assert c * cx == -(cx * c)
    assert (c * c).is_zero
    assert (gen("c", 0, 2)).is_zero  # squared at construction
    assert gen("u") * c == c * gen("u")


@given(st.permutations(list(range(4))))
def test_odd_sorting_sign_matches_permutation_parity(perm):
    gens = [("c", 0), ("c", 1), ("c", 2), ("c", 3)]
    seq = [gens[i] for i in perm]
    # independent parity: count inversions of the index sequence
    inv = sum(1 for i in range(4) for j in range(i + 1, 4) if perm[i] > perm[j])
    p = GradedPoly.from_terms([(1, (), seq)], odd_syms=ODD)
    sorted_p = GradedPoly.from_terms([(1, (), gens)], odd_syms=ODD)
    assert p == (sorted_p if inv % 2 == 0 else -sorted_p)


def test_repeated_odd_factor_annihilates():
    p = GradedPoly.from_terms([(1, (), [("c", 1), ("c", 0), ("c", 1)])], odd_syms=ODD)
    assert p.is_zero


def test_powers():
    u = gen("u")
    assert u ** 0 == GradedPoly.number(1, ODD)
    assert u ** 3 == u * u * u
    assert (P("u + u_x")) ** 2 == P("u^2 + 2*u*u_x + u_x^2")
    with pytest.raises(ValueError):
        (u + 1) ** -1
    with pytest.raises(ValueError):
        (u + 1) ** Fraction(1, 2)


def test_scalar_exactness():
    assert 2 * gen("u") == gen("u") + gen("u")
    with pytest.raises(TypeError):
        as_scalar(0.5)
    with pytest.raises(TypeError):
        as_scalar(True)
    assert as_scalar(Fraction(4, 2)) == 2
    assert as_scalar("3/4") == Fraction(3, 4)


def test_generator_validation():
    with pytest.raises(ValueError):
        gen("u", 1, Fraction(1, 2))  # derivative generators: integer powers only
    with pytest.raises(ValueError):
        gen("c", 0, Fraction(1, 2))
    assert gen("u", 0, -2) * gen("u", 0, 2) == 1
    assert gen("u", 2, 0) == GradedPoly.number(1, ODD)


def test_parity_classification():
    assert P("u^2 + T").parity() == 0
    assert P("u*c_x").parity() == 1
    assert P("u + c").parity() is None
    assert GradedPoly.zero(ODD).parity() == 0


def test_mixed_parity_declaration_conflict():
    p = parse("q", odd=())          # q even here
    q = parse("q", odd=("q",))      # q odd there
    with pytest.raises(ValueError):
        p * q


# --- d/dx -------------------------------------------------------------------

@given(polys, polys)
def test_dx_leibniz(p, q):
    assert (total_x_derivative(p * q)
            == total_x_derivative(p) * q + p * total_x_derivative(q))


@given(polys, polys)
def test_dx_linear(p, q):
    assert (total_x_derivative(p + q)
            == total_x_derivative(p) + total_x_derivative(q))


def test_dx_point_cases():
    assert total_x_derivative(P("3*u^2 + u_x")) == P("6*u*u_x + u_xx")
    assert total_x_derivative(P("u*c_x")) == P("u_x*c_x + u*c_xx")
    assert total_x_derivative(GradedPoly.number(7)).is_zero


def test_dx_fractional_power_chain_rule():
    assert total_x_derivative(gen("T", 0, Fraction(1, 2))) == \
        Fraction(1, 2) * gen("T", 0, Fraction(-1, 2)) * gen("T", 1)


def test_dx_symbolic_exponent_chain_rule():
    beta = parameter("beta")
    got = total_x_derivative(GradedPoly.gen("T", 0, beta))
    want = beta * GradedPoly.gen("T", 0, beta - 1) * GradedPoly.gen("T", 1)
    assert got == want


def test_dx_with_explicit_xrule():
    # a constrained odd generator whose x-derivative is polynomial, not a jet
    odd = ("c", "cm")
    rules = DerivationRuleSet("aux", 1, base={}, xrules={"cm": parse("2*R*cm", odd=odd)})
    cm = parse("cm", odd=odd)
    assert total_x_derivative(cm, rules) == parse("2*R*cm", odd=odd)
    got = total_x_derivative(parse("R*cm", odd=odd), rules)
    assert got == parse("R_x*cm + 2*R^2*cm", odd=odd)
    with pytest.raises(ValueError):
        total_x_derivative(GradedPoly.gen("cm", 1, odd_syms=frozenset(odd)), rules)


# --- graded derivations -----------------------------------------------------

BRST = DerivationRuleSet("test-odd", 1, base={
    "u": parse("u_x*c + 2*u*c_x + c_xxx", odd=("c",)),
    "T": parse("1/2*c_xxx + T_x*c + 2*T*c_x", odd=("c",)),
    "c": parse("c*c_x", odd=("c",)),
})


@given(monomials(), polys)
def test_graded_leibniz(p, q):
    """D(pq) = D(p) q + (-1)^{|p|} p D(q) for homogeneous p."""
    par = p.parity()
    if par is None:
        return
    lhs = apply_derivation(p * q, BRST)
    sign = 1 if par == 0 else -1
    rhs = apply_derivation(p, BRST) * q + sign * (p * apply_derivation(q, BRST))
    assert lhs == rhs


def test_derivation_left_leibniz_ordering():
    # delta(c u) = delta(c) u - c delta(u); the c * (.. c ..) cross terms die
    got = apply_derivation(P("c*u"), BRST)
    want = P("c*c_x")*gen("u") - gen("c") * P("u_x*c + 2*u*c_x + c_xxx")
    assert got == want
    assert got == P("u*c*c_x - 2*u*c*c_x - c*c_xxx")


def test_derivation_commutes_with_dx():
    p = P("u^2*c_x + T*u_x")
    assert (apply_derivation(total_x_derivative(p), BRST)
            == total_x_derivative(apply_derivation(p, BRST)))


def test_derivation_missing_rule():
    with pytest.raises(KeyError):
        apply_derivation(parse("w"), BRST)


def test_ruleset_validation():
    with pytest.raises(ValueError):
        DerivationRuleSet("bad", 2, base={})
    assert BRST.odd_symbols() == frozenset({"c"})


def test_extended_with_markers():
    ext = BRST.extended_with_markers(["u", "c"])
    assert ext.base[marker("u")] == t_prolong(BRST.base["u"])
    assert marker("T") not in ext.base
    # a rule whose image already carries a marker cannot be prolonged
    slice_rules = DerivationRuleSet("slice", 1, base={
        "u": parse("c_t - u*c_x + u_x*c", odd=("c",)),
        "c": parse("c*c_x", odd=("c",)),
    })
    with pytest.raises(ValueError):
        slice_rules.extended_with_markers()
    ok = slice_rules.extended_with_markers(["c"])
    assert marker("c") in ok.base


# --- time markers and on-shell reduction ------------------------------------

def test_marker_names():
    assert marker("u") == "u_t"
    assert base_symbol("u_t") == "u"
    assert base_symbol("u") == "u"
    with pytest.raises(ValueError):
        marker("u_t")


def test_t_prolong():
    assert t_prolong(P("u*T")) == P("u_t*T + u*T_t")
    assert t_prolong(P("u_x")) == P("u_t_x")
    assert t_prolong(P("u^3")) == P("3*u^2*u_t")
    with pytest.raises(ValueError):
        t_prolong(P("u_t"))


def test_t_prolong_odd_markers_inherit_parity():
    p = t_prolong(P("u*c"))
    # u_t c - wait: both summands must be ghost-linear and odd overall
    assert p == P("u_t*c + u*c_t")
    assert p.parity() == 1


def test_reduce_on_shell_with_dict():
    rhs = {"u": P("u*u_x")}
    got = reduce_on_shell(P("2*u_t_x"), rhs)
    assert got == P("2*u_x^2 + 2*u*u_xx")
    assert reduce_on_shell(P("u_t - u*u_x"), rhs).is_zero


def test_reduce_on_shell_missing_rule():
    with pytest.raises(ValueError):
        reduce_on_shell(P("T_t"), {"u": P("u_x")})
    with pytest.raises(ValueError):
        reduce_on_shell(P("u_t"), {"u": None})


# --- substitution -----------------------------------------------------------

def test_substitute_family_point_case():
    got = substitute_family(P("u^2 + u_x"), "u", P("2*v"))
    assert got == P("4*v^2 + 2*v_x")


def test_substitute_family_markers():
    got = substitute_family(P("u_t"), "u", P("v^2"))
    assert got == P("2*v*v_t")
    got = substitute_family(P("u_t_x"), "u", P("v^2"))
    assert got == P("2*v_x*v_t + 2*v*v_t_x")


def test_substitute_family_leaves_other_symbols():
    got = substitute_family(P("T*u_x + c"), "u", P("v"))
    assert got == P("T*v_x + c")


def test_substitute_family_rejects_nonpolynomial_powers():
    with pytest.raises(ValueError):
        substitute_family(gen("u", 0, -1), "u", P("v"))
    with pytest.raises(ValueError):
        substitute_family(gen("u", 0, Fraction(1, 2)), "u", P("v"))


@given(even_polys)
def test_substitution_is_a_ring_map(p):
    repl = P("v + v_x")
    q = substitute_family(p * p, "u", repl)
    r = substitute_family(p, "u", repl)
    assert q == r * r


# --- variational operators --------------------------------------------------

def test_euler_point_cases():
    assert euler_operator(P("1/2*u^2"), "u") == P("u")
    assert euler_operator(P("1/2*u_x^2"), "u") == P("-u_xx")
    assert euler_operator(P("u*u_xx"), "u") == P("2*u_xx")
    assert euler_operator(P("u"), "u") == GradedPoly.number(1, ODD)


def test_euler_fractional_and_symbolic_powers():
    beta = parameter("beta")
    got = euler_operator(GradedPoly.gen("T", 0, beta + 1), "T")
    assert got == (beta + 1) * GradedPoly.gen("T", 0, beta)
    got = euler_operator(gen("T", 0, Fraction(3, 2)), "T")
    assert got == Fraction(3, 2) * gen("T", 0, Fraction(1, 2))


@given(even_polys)
def test_euler_annihilates_total_derivatives(p):
    assert euler_operator(total_x_derivative(p), "u").is_zero


@given(polys, polys)
def test_euler_ignores_exact_terms(p, q):
    lhs = euler_operator(p + total_x_derivative(q), "u")
    assert lhs == euler_operator(p, "u")


def test_euler_sees_ghost_densities():
    # d/du of u c_xxx is just the ghost factor
    assert euler_operator(P("u*c_xxx"), "u") == P("c_xxx")


def test_euler_validation():
    with pytest.raises(ValueError):
        euler_operator(P("c*c_x"), "c")
    with pytest.raises(ValueError):
        euler_operator(P("u_t*u"), "u")
    # markers of *other* fields pass through untouched
    assert euler_operator(P("u*T_t"), "u") == P("T_t")


def test_odd_gradient_point_cases():
    assert odd_gradient(P("u*c_x"), "c") == P("-u_x")
    assert odd_gradient(P("u*c_xxx"), "c") == P("-u_xxx")
    assert odd_gradient(P("u^2*c"), "c") == P("u^2")


@given(ghost_linear)
def test_odd_gradient_annihilates_total_derivatives(p):
    assert odd_gradient(total_x_derivative(p), "c").is_zero


@given(ghost_linear, ghost_linear)
def test_odd_gradient_separates_densities_mod_exact(p, q):
    same = odd_gradient(p, "c") == odd_gradient(q, "c")
    diff_grad = odd_gradient(p - q, "c")
    assert same == diff_grad.is_zero


def test_odd_gradient_validation():
    with pytest.raises(ValueError):
        odd_gradient(P("u"), "u")
    with pytest.raises(ValueError):
        odd_gradient(P("c*c_x"), "c")  # quadratic
    with pytest.raises(ValueError):
        odd_gradient(P("u^2"), "c")  # no ghost at all


# --- printing ---------------------------------------------------------------

def test_to_string_stability():
    assert to_string(P("u_xxx + 3*u*u_x")) == "3*u*u_x + u_xxx"
    assert to_string(GradedPoly.zero()) == "0"
    assert to_string(P("-1/2*T^-1/2*T_x")) == "-1/2*T^-1/2*T_x"
    beta = parameter("beta")
    s = to_string((beta + 1) * GradedPoly.gen("T", 0, beta))
    assert "beta" in s and "T^" in s


def test_equality_against_raw_scalars():
    assert GradedPoly.number(3) == 3
    assert P("u") != 3
    assert GradedPoly.zero() == 0
