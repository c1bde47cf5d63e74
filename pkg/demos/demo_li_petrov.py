"""
Worked examples of length ledgers
=================================

Torsion lengths of crystalline and de Rham cohomology are compared by
l_crys <= l_dR <= e l_crys.  The Li-Petrov surfaces give one side sharp in
degree 2 and both sides strict in degree 3.
"""

from bkmod import example_li_petrov, main_inequality_check
from bkmod.conjectures import example_bk_group_scheme

for p in (2, 3, 5):
    r = example_li_petrov(p)
    print(f"p={p} e={r.e}: degree 2 ({r.l2_crys}, {r.l2_dR}) slack {r.degree2.left_slack}/{r.degree2.right_slack};"
          f" degree 3 ({r.l3_crys}, {r.l3_dR}) slack {r.degree3.left_slack}/{r.degree3.right_slack}")

print(main_inequality_check(1, 0, 5))   # a made-up violation

# %%
# For M = S/(p, u) the profile is min(e, p^(n+1)), flat from n = a on.
r = example_bk_group_scheme(3, e=7)
print("f =", r.profile.values, " beta:", r.beta.passed)
