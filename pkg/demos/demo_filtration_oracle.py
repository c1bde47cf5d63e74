"""
Reading the canonical filtration off a presentation
===================================================

A module given by generators and relations over S = Z_p[[u]] has a u-power
torsion part, a p-power torsion part without u-torsion, a free rank, and a
finite defect Mbar measuring how far the torsion-free quotient is from free.
brute_force_filtration recovers the lengths of these pieces from finite
truncations M/(p^K, u^L).
"""

from bkmod import BKModule, EisensteinPoly, FiltrationPieces, PUr, Presentation, RingParams, oracle
from bkmod.lengths import length_contributions

p = 3


def show(name, rels, ngens, m=3, M=3):
    pres = Presentation(RingParams(p, m, M), ngens, rels, False)
    f = oracle.brute_force_filtration(BKModule.from_presentation(pres))
    print(f"{name:22s} u_infty {f.u_infty}  tor rank {f.tor_u_tf_rank}  free {f.free_rank}  mbar {f.mbar}")
    return pres


show("S/(p^2, p u)", (((p * p,),), ((0, p),)), 1)
ideal = show("the ideal (p, u)", (((0, 1), (-p,)),), 2, m=2, M=2)
show("S", (), 1, m=1, M=1)

# %%
# The ideal (p, u) is free of rank 1 up to Mbar = k.  Modulo E its p-power
# torsion is exactly the Mbar term of the three-term formula.
E = EisensteinPoly.default(p, 4)
pieces = FiltrationPieces.build(p, free_rank=1, mbar=[PUr(1, 1)])
for n in range(3):
    print(n, oracle.mod_e_length(BKModule.from_presentation(ideal), E, n, p_infty_only=True),
          length_contributions(pieces, E, n).as_tuple())
