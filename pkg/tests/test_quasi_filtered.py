import pytest

from bkmod.errors import HypothesisUnmet
from bkmod.modules import BKModule, FUr, Presentation, PUr
from bkmod.quasi_filtered import (CONDITIONS, PTorsionCertificate, QuasiFilteredBK, SimpleAnnihilator, alpha_bound,
                                  alpha_bound_sweep, alpha_report, check_alpha_bound, derived_frobenius, direct_sum,
                                  frobenius_relations, height2_family, identity_example, mutant,
                                  residue_field_example, simple_annihilator, theorem_cases, validate)
from bkmod.ring import EisensteinPoly, RingParams

E = EisensteinPoly.default


@pytest.mark.parametrize("p", [2, 3, 5])
def test_identity_example_validates(p):
    rep = validate(identity_example(p, 2))
    assert rep.valid and rep.violations == []
    assert all(rep.checks.values())


def test_h_zero_is_not_injective():
    q = identity_example(3, 2)
    zero_h = QuasiFilteredBK(1, q.M, q.N, q.f, q.g, (((0,),),), q.h_prime, q.E)
    rep = validate(zero_h)
    assert not rep.valid and "h_injective" in rep.violations


@pytest.mark.parametrize("condition", CONDITIONS)
def test_each_mutant_names_its_condition(condition):
    rep = validate(mutant(identity_example(3, 2), condition))
    assert not rep.valid
    assert condition in rep.violations


def test_unknown_mutant():
    with pytest.raises(ValueError):
        mutant(identity_example(3, 2), "nope")


def test_residue_field_example_fails_on_g():
    # 1: k -> S/(p, u^p) does not respect u * 1 = 0
    rep = validate(residue_field_example(3, 2))
    assert rep.violations == ["well_defined:g"]


def test_map_shapes_checked():
    q = identity_example(3, 2)
    with pytest.raises(ValueError):
        QuasiFilteredBK(1, q.M, q.N, ((((1,), (0,)),)), q.g, q.h, q.h_prime, q.E)
    with pytest.raises(ValueError):
        QuasiFilteredBK(0, q.M, q.N, q.f, q.g, q.h, q.h_prime, q.E)


def test_derived_frobenius_identity_example():
    q = identity_example(3, 2)
    phi, psi = derived_frobenius(q)
    assert phi == (((1,),),)
    assert psi == ((E(3, 2).integer_coeffs(),),)
    assert frobenius_relations(q) == {"psi_phi": True, "phi_psi": True}


def test_derived_frobenius_zero_module():
    P = Presentation(RingParams(3, 1, 1), 0, (), True)
    q = QuasiFilteredBK(2, P, P, (), (), (), (), E(3, 2))
    assert validate(q).valid
    assert derived_frobenius(q) == ((), ())
    assert frobenius_relations(q) == {"psi_phi": True, "phi_psi": True}


@pytest.mark.parametrize("p,e", [(2, 3), (3, 4), (3, 5), (5, 8)])
def test_height2_family_valid_with_frobenius_relations(p, e):
    for r in range(1, e // (p - 1) + 1):
        q = height2_family(p, e, r)
        assert validate(q).valid
        assert frobenius_relations(q) == {"psi_phi": True, "phi_psi": True}
    with pytest.raises(ValueError):
        height2_family(p, e, e // (p - 1) + 1)


def test_direct_sum_validates():
    q = direct_sum(height2_family(3, 4, 1), height2_family(3, 4, 2))
    assert validate(q).valid
    assert check_alpha_bound(q).alpha == 2


def test_check_alpha_bound_examples():
    rep = check_alpha_bound(height2_family(3, 4, 2))
    assert (rep.alpha, rep.bound, rep.passed) == (2, 2, True)
    assert rep.ann_twist_ok
    rep = alpha_report(BKModule.of(3, PUr(1, 3)), 2, E(3, 4))
    assert (rep.alpha, rep.bound, rep.passed) == (3, 2, False)
    assert alpha_bound(4, 1, 3) == 0
    rep = alpha_report(BKModule.of(3, PUr(1, 1)), 1, E(3, 4))
    assert not rep.passed
    assert alpha_report(BKModule.of(3), 1, E(3, 4)).passed


def test_alpha_bound_sweep_has_no_failures():
    rows = alpha_bound_sweep((2, 3), 6)
    assert rows
    assert all(r.valid and r.passed for r in rows)


def verdicts(cases):
    return {c.case: (c.hypothesis, c.conclusion) for c in cases}


def test_theorem_cases_examples():
    v = verdicts(theorem_cases(BKModule.of(3, PUr(1, 1)), 1, 4, 3))
    assert v[1] == (True, False)
    v = verdicts(theorem_cases(BKModule.of(3), 1, 4, 3))
    assert v[1] == (True, True)
    v = verdicts(theorem_cases(BKModule.of(3, PUr(1, 1)), 2, 2, 3))
    assert v[2] == (True, True)
    v = verdicts(theorem_cases(BKModule.of(3, PUr(1, 2)), 2, 4, 3))
    assert v[4] == (True, True)
    assert v[2][0] is False


def test_simple_annihilator_examples():
    assert isinstance(simple_annihilator(BKModule.of(3, PUr(1, 3)), 2, 2, 3), PTorsionCertificate)
    assert isinstance(simple_annihilator(BKModule.of(3), 2, 2, 3), PTorsionCertificate)
    s = simple_annihilator(BKModule.of(3, FUr(1, 1, 2)), 2, 2, 3)
    assert isinstance(s, SimpleAnnihilator)
    assert s.alpha == 1 and s.unit.coeffs[0] % 3 == 1


def test_simple_annihilator_outside_hypotheses():
    with pytest.raises(HypothesisUnmet):
        simple_annihilator(BKModule.of(3, PUr(1, 1)), 3, 2, 3)
    with pytest.raises(HypothesisUnmet):
        simple_annihilator(BKModule.of(3, PUr(1, 1)), 2, 6, 3)
