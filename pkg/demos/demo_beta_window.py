"""
Where the beta profile stops being monotone
===========================================

Inside the window 1 <= alpha(M) <= floor(e/(p-1)), p alpha(M) != e, the
profile f(n) = length of M^(n+1)[E] never decreases.  The sweep checks this
exhaustively.  Asking it to audit the excluded cells shows the coincidence
p alpha = e is a real boundary: there u^(p alpha) and E can cancel and f drops.
"""

from bkmod import BKModule, EisensteinPoly, FUr, SweepConfig, oracle, sweep_beta
from bkmod.conjectures import beta_profile

rep = sweep_beta(SweepConfig(primes=(3,), r_max=2, max_summands=2, audit_excluded=True))
print(len(rep.rows), "cells,", len(rep.violations), "violations inside the window")

for row in rep.rows:
    if row.verdict == "excluded":
        print(f"  p={row.p} e={row.e}  {row.module:28s} f = {row.values}")

# %%
# One of them in detail: p = 3, e = 3, x = 2, so p alpha = e and after one
# twist E = u^3 - 3 = -9 modulo u^3 + 6, deep in the DVR.
p, e = 3, 3
E = EisensteinPoly.default(p, e)
M = BKModule.of(p, FUr(1, 2, 1), FUr(1, 2, 2))
print(M, beta_profile(M, E, 3).values)
print("oracle:", [oracle.e_torsion_length(M, E, n + 1) for n in range(4)])
