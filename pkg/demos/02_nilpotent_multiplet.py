"""
The canonical multiplet and its nilpotent symmetry
==================================================

Twelve generators — a connection pair, three even momenta, three ghosts,
and three odd antifields — carry an odd derivation built from the sl(2,R)
structure constants.  It squares to zero on every generator.
"""

import numpy as np

from brstkdv.graded import GradedPoly, apply_derivation
from brstkdv.sl2 import (
    CANONICAL_FIELDS,
    CANONICAL_ODD,
    canonical_brst_rules,
    commutator_components,
    curvature_residual,
    killing_form,
    structure_constant,
    structure_table,
)

# Structure constants in the (0, +, -) basis; the full table is fixed by
# antisymmetry and three nonzero entries.
print("f_{0+}^+ =", structure_constant("0", "+", "+"))
print("f_{0-}^- =", structure_constant("0", "-", "-"))
print("f_{+-}^0 =", structure_constant("+", "-", "0"))
print("pairing  =", [[killing_form(a, b) for b in "0+-"] for a in "0+-"])

# commutator_components gives [X, Y]^a for component triples; on basis
# vectors it reads out one line of the table.
e0, ep = (1, 0, 0), (0, 1, 0)
print("\n[T0, T+] components:", commutator_components(e0, ep))
assert list(structure_table()[0][1]) == list(commutator_components(e0, ep))

# The full odd derivation: one transformation rule per generator.
rules = canonical_brst_rules()
for name in CANONICAL_FIELDS:
    print(f"  D({name:2s}) = {rules.base[name]}")

# Nilpotency, generator by generator.
worst = 0
for name in CANONICAL_FIELDS:
    g = GradedPoly.gen(name, odd_syms=frozenset(CANONICAL_ODD))
    worst = max(worst, len(apply_derivation(apply_derivation(g, rules), rules)))
print("\nmax monomials in D^2(generator) over the multiplet:", worst)
assert worst == 0

# The same table builds the curvature residual of a sampled connection;
# for constant data only the bracket survives.
n, zeros, ones = 8, np.zeros(8), np.ones(8)
ztrip = [zeros, zeros, zeros]
res = curvature_residual(ztrip, ztrip, [ones, zeros, zeros], [zeros, ones, zeros])
print("curvature of constant data along (T0, T+):",
      [float(r[0]) for r in res])
