import pytest
from hypothesis import given, settings, strategies as st

from bkmod import oracle
from bkmod.errors import BudgetExceeded, InfiniteModule, NotPPower
from bkmod.lengths import e_torsion_length, mod_e_length
from bkmod.modules import BKModule, FiltrationPieces, Free, FUr, Ppow, Presentation, PUr
from bkmod.ring import EisensteinPoly, RingParams, TruncatedSeries

E = EisensteinPoly.default


def test_enumerate_examples():
    assert oracle.enumerate(BKModule.of(2, PUr(1, 2))).cardinality == 4
    assert oracle.enumerate(BKModule.of(3, PUr(2, 1))).cardinality == 9
    # S/(u + 2, u^2): u = -2 forces 4 = u^2 = 0, so the module is Z/4
    N = oracle.enumerate(BKModule.of(2, FUr(1, 1, 2)))
    assert N.cardinality == 4
    assert len(N.elements()) == 4


def test_enumerate_refuses_infinite_and_large():
    with pytest.raises(InfiniteModule):
        oracle.enumerate(BKModule.of(3, Ppow(1)))
    with pytest.raises(InfiniteModule):
        oracle.enumerate(BKModule.of(3, Free()))
    with pytest.raises(BudgetExceeded):
        oracle.enumerate(BKModule.of(3, PUr(1, 8)), budget=1000)


def test_budget_from_environment(monkeypatch):
    monkeypatch.setenv("BKCTL_BUDGET", "10")
    with pytest.raises(BudgetExceeded):
        oracle.enumerate(BKModule.of(2, PUr(1, 4)))
    monkeypatch.setenv("BKCTL_BUDGET", "16")
    assert oracle.enumerate(BKModule.of(2, PUr(1, 4))).cardinality == 16


def test_length_via_cardinality():
    assert oracle.length_via_cardinality(oracle.enumerate(BKModule.of(2, PUr(1, 3)))) == 3
    assert oracle.length_via_cardinality(oracle.enumerate(BKModule.of(3))) == 0
    assert oracle.length_via_cardinality(oracle.enumerate(BKModule.of(3, PUr(2, 1)))) == 2
    with pytest.raises(NotPPower):
        oracle._log_p(12, 2)


def test_kernel_of_scalar_examples():
    N = oracle.enumerate(BKModule.of(3, PUr(1, 5)))
    P = N.params
    assert oracle.kernel_of_scalar(N, TruncatedSeries.monomial(P, 1, 3)).cardinality == 27
    assert oracle.kernel_of_scalar(N, TruncatedSeries.one(P)).cardinality == 1
    assert oracle.kernel_of_scalar(N, TruncatedSeries.zero(P)).cardinality == N.cardinality


def test_kernel_routes_agree():
    M = BKModule.of(3, PUr(1, 3), FUr(1, 2, 2))
    N = oracle.enumerate(M)
    for s in [(0, 1), (0, 0, 1), (3,), (3, 1), (0, 3, 1)]:
        a = oracle.kernel_of_scalar(N, s, method="enumerate").length
        b = oracle.kernel_of_scalar(N, s, method="linalg").length
        assert a == b


def test_u_power_kernels_nest_and_stabilise():
    N = oracle.enumerate(BKModule.of(2, PUr(1, 3), FUr(1, 1, 2)))
    sizes = [oracle.kernel_of_scalar(N, (0,) * b + (1,)).length for b in range(6)]
    assert sizes == sorted(sizes)
    assert oracle.u_power_torsion(N).length == sizes[-1] == N.length


def test_e_torsion_routes():
    M = BKModule.of(5, PUr(1, 2))
    seen = {}
    for n in (0, 1, 4):
        r = oracle.e_torsion_length(M, E(5, 4), n, detail=True)
        seen[r.route] = r.value
    assert seen == {"enumerate": 2, "linalg": 4, "index": 4}
    assert oracle.e_torsion_length(BKModule.of(3, Ppow(2), Free()), E(3, 2), 1) == 0


def test_annihilator_shape_examples():
    s = oracle.annihilator_shape(oracle.enumerate(BKModule.of(3, PUr(1, 3))))
    assert s.p_kills and s.alpha == 3 and s.simple_element is None
    s = oracle.annihilator_shape(oracle.enumerate(BKModule.of(2, FUr(1, 1, 2))))
    assert not s.p_kills and s.alpha == 1
    alpha, unit = s.simple_element
    assert alpha == 1 and unit.is_unit()
    N = oracle.enumerate(BKModule.of(2, FUr(1, 1, 2)))
    P = N.params
    assert oracle.annihilates(N, TruncatedSeries.monomial(P, 1, alpha) + unit * 2)
    z = oracle.annihilator_shape(oracle.enumerate(BKModule.of(2)))
    assert z.p_kills and z.alpha == 0


def test_annihilator_shape_of_sum():
    s = oracle.annihilator_shape(oracle.enumerate(BKModule.of(3, PUr(1, 1), FUr(2, 1, 3))))
    assert not s.p_kills and s.alpha == 2


def pres(p, m, M, g, rels):
    return BKModule.from_presentation(Presentation(RingParams(p, m, M), g, rels, False))


@pytest.mark.parametrize("p", [2, 3])
def test_brute_force_filtration_cases(p):
    # PUr(1, 2) = S/(p, u^2)
    f = oracle.brute_force_filtration(pres(p, 2, 3, 1, (((p,),), ((0, 0, 1),))))
    assert (f.u_infty, f.tor_u_tf_rank, f.free_rank, f.mbar) == (2, 0, 0, 0)
    # the free module S
    f = oracle.brute_force_filtration(pres(p, 1, 1, 1, ()))
    assert (f.u_infty, f.tor_u_tf_rank, f.free_rank, f.mbar) == (0, 0, 1, 0)
    # S/(p^2, p u): extension of S/p by k
    f = oracle.brute_force_filtration(pres(p, 3, 2, 1, (((p * p,),), ((0, p),))))
    assert (f.u_infty, f.tor_u_tf_rank, f.free_rank, f.mbar) == (1, 1, 0, 0)
    # the ideal (p, u) = S^2 / (u e1 - p e2): free of rank 1 with Mbar = k
    f = oracle.brute_force_filtration(pres(p, 2, 2, 2, (((0, 1), (-p,)),)))
    assert (f.u_infty, f.tor_u_tf_rank, f.free_rank, f.mbar) == (0, 0, 1, 1)


def test_brute_force_filtration_matches_summands():
    from bkmod.modules import to_presentation

    M = BKModule.of(2, Ppow(2), PUr(1, 3), Free())
    f = oracle.brute_force_filtration(BKModule.from_presentation(to_presentation(M)))
    assert f.matches(FiltrationPieces.build(2, u_infty=[PUr(1, 3)], tor_u_tf=[Ppow(2)], free_rank=1))


@pytest.mark.parametrize("M", [BKModule.of(3, PUr(2, 2)), BKModule.of(2, PUr(1, 2), FUr(1, 1, 3))])
def test_length_additivity_kernel_image(M):
    # 0 -> ker s -> M -> sM -> 0, counted element by element
    N = oracle.enumerate(M)
    Z = N.elements()
    for s in [(0, 1), (N.p,), (N.p, 1)]:
        image = {tuple(row) for row in N.act(s, Z).tolist()}
        assert len(Z) == oracle.kernel_of_scalar(N, s).cardinality * len(image)


summand = st.one_of(
    st.builds(PUr, st.integers(1, 2), st.integers(1, 4)),
    st.builds(FUr, st.integers(1, 2), st.sampled_from([(1,), (1, 1)]), st.integers(1, 4)),
    st.builds(Ppow, st.integers(1, 2)),
)


@settings(max_examples=30)
@given(st.sampled_from([2, 3]), st.integers(1, 4), st.lists(summand, min_size=1, max_size=2), st.integers(0, 2))
def test_formula_equals_oracle(p, e, ss, n):
    M = BKModule.of(p, *ss)
    Ep = E(p, e)
    assert e_torsion_length(M, Ep, n) == oracle.e_torsion_length(M, Ep, n)
    assert mod_e_length(M, Ep, n) == oracle.mod_e_length(M, Ep, n)


@settings(max_examples=20)
@given(st.sampled_from([2, 3]), st.integers(1, 4), st.lists(summand, min_size=1, max_size=2))
def test_presentation_mode_matches_summand_mode(p, e, ss):
    from bkmod.modules import to_presentation

    M = BKModule.of(p, *ss)
    Mp = BKModule.from_presentation(to_presentation(M))
    Ep = E(p, e)
    assert oracle.e_torsion_length(Mp, Ep, 0) == oracle.e_torsion_length(M, Ep, 0)
    assert oracle.mod_e_length(Mp, Ep, 0, p_infty_only=True) == oracle.mod_e_length(M, Ep, 0, p_infty_only=True)
