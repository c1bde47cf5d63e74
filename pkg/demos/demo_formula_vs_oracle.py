"""
Closed forms against brute force
================================

The E-torsion of a twisted u-power torsion module has a closed form, a sum
of min(e, p^n r) terms.  Here we compare it with the oracle, which just
builds the finite module and counts the kernel of E.
"""

from bkmod import BKModule, EisensteinPoly, FUr, PUr, e_torsion_length, oracle

p, e = 3, 4
E = EisensteinPoly.default(p, e)   # u^4 - 3

# a p-torsion module and one killed by u + 3
M = BKModule.of(p, PUr(1, 2), FUr(1, 1, 3))
print("M =", M)

for n in range(4):
    formula = e_torsion_length(M, E, n)
    brute = oracle.e_torsion_length(M, E, n, detail=True)
    print(f"n={n}  formula {formula}  oracle {brute.value} (via {brute.route})")

# the oracle picks its route by size: listing elements, a kernel over
# (Z/p^m)-modules, or |ker| = |coker| for big twists.  All three agree.

# %%
# The module itself can be inspected element by element.
N = oracle.enumerate(BKModule.of(2, FUr(1, 1, 2)))
print(N, "with", N.cardinality, "elements")
shape = oracle.annihilator_shape(N)
print("p kills it:", shape.p_kills, " alpha:", shape.alpha, " u^alpha + p x with x =", shape.simple_element[1])
