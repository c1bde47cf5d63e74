import pytest
from hypothesis import given, strategies as st

from bkmod import oracle
from bkmod.modules import (BKModule, CyclicSummand, FiltrationPieces, Free, FUr, Ppow, Presentation, PUr, assemble,
                           filtration, poly_str, summand_presentation, to_presentation, twist)
from bkmod.ring import RingParams, TruncatedSeries


def test_summand_validation():
    with pytest.raises(ValueError):
        PUr(1, 0)
    with pytest.raises(ValueError):
        Ppow(0)
    with pytest.raises(ValueError):
        FUr(0, 1, 2)
    with pytest.raises(ValueError):
        CyclicSummand("Weird")
    with pytest.raises(ValueError):
        BKModule.of(3, FUr(1, (3,), 2))
    BKModule.of(3, FUr(1, (2, 3), 2))


def test_unit_accepts_series():
    P = RingParams(5, 2, 3)
    x = TruncatedSeries.from_coeffs(P, [1, 1])
    assert FUr(1, x, 2) == FUr(1, (1, 1), 2)


def test_poly_str():
    assert poly_str((1,)) == "1"
    assert poly_str((1, 1)) == "1+u"
    assert poly_str((2, 0, -3)) == "2-3u^2"
    assert poly_str((0, -1)) == "-u"
    assert poly_str((0,)) == "0"


def test_labels_and_canonical_order():
    M = BKModule.of(3, Free(), PUr(1, 3), Ppow(2), FUr(1, (1, 1), 2))
    N = BKModule.of(3, FUr(1, (1, 1), 2), Ppow(2), Free(), PUr(1, 3))
    assert M == N
    assert M.label() == N.label()
    assert "FUr(1,1+u,2)" in M.label()
    assert BKModule.of(2).label() == "0"


def test_twist_examples():
    assert twist(BKModule.of(3, PUr(1, 2)), 1) == BKModule.of(3, PUr(1, 6))
    M = BKModule.of(3, PUr(1, 2), Ppow(1), Free())
    assert twist(M, 0) == M
    assert twist(BKModule.of(2, FUr(1, 1, 2)), 1) == BKModule.of(2, FUr(2, 1, 4))
    assert twist(BKModule.of(3, FUr(1, (1, 1), 2)), 1).summands[0].unit == (1, 0, 0, 1)
    assert twist(BKModule.of(5, Ppow(2), Free()), 2) == BKModule.of(5, Ppow(2), Free())
    with pytest.raises(ValueError):
        twist(M, -1)


summand = st.one_of(
    st.builds(PUr, st.integers(1, 3), st.integers(1, 5)),
    st.builds(FUr, st.integers(1, 3), st.sampled_from([(1,), (2,), (1, 1)]), st.integers(1, 5)),
    st.builds(Ppow, st.integers(1, 3)),
    st.just(Free()),
)


@given(st.lists(summand, max_size=4), st.integers(0, 2), st.integers(0, 2))
def test_twist_composition(ss, n, m):
    M = BKModule.of(3, *ss)
    assert twist(twist(M, n), m) == twist(M, n + m)


def test_presentation_twist_is_entrywise():
    P = RingParams(2, 2, 8)
    u = TruncatedSeries.gen(P)
    pres = Presentation(P, 1, ((u + 2,),), True)
    tw = twist(BKModule.from_presentation(pres), 2).presentation
    # the truncation u^8 twists to u^32
    Q = RingParams(2, 2, 32)
    assert tw.params == Q
    assert tw.relations[0][0] == TruncatedSeries.monomial(Q, 1, 4) + 2


def test_presentations_match_summand_cardinalities():
    cases = [(2, PUr(1, 2), 2), (3, PUr(2, 1), 2), (2, FUr(1, 1, 2), 2), (3, FUr(1, (2,), 3), 3)]
    for p, s, length in cases:
        assert oracle.module_from_presentation(summand_presentation(s, p)).length == length
        M = BKModule.of(p, s)
        assert oracle.module_from_presentation(to_presentation(M)).length == length


def test_block_presentation_of_sum():
    M = BKModule.of(2, PUr(1, 2), PUr(2, 1), FUr(1, 1, 2))
    assert oracle.module_from_presentation(to_presentation(M)).length == 2 + 2 + 2


def test_filtration_examples():
    M = BKModule.of(3, PUr(1, 3), Ppow(2), Free())
    F = filtration(M)
    assert F.u_infty.summands == (PUr(1, 3),)
    assert F.tor_u_tf.summands == (Ppow(2),)
    assert F.free_rank == 1
    assert F.mbar.is_zero()
    Z = filtration(BKModule.of(3))
    assert Z.u_infty.is_zero() and Z.tor_u_tf.is_zero() and Z.free_rank == 0 and Z.mbar.is_zero()
    F2 = filtration(BKModule.of(2, FUr(1, 1, 2)))
    assert F2.u_infty.summands == (FUr(1, 1, 2),)


def test_fur_summand_killed_by_u2_and_p2():
    N = oracle.enumerate(BKModule.of(2, FUr(1, 1, 2)))
    P = N.params
    assert oracle.annihilates(N, TruncatedSeries.monomial(P, 1, 2))
    assert oracle.annihilates(N, TruncatedSeries.const(P, 4))
    assert not oracle.annihilates(N, TruncatedSeries.const(P, 2))


def test_assemble_inverts_filtration():
    M = BKModule.of(5, PUr(1, 3), FUr(1, 2, 2), Ppow(2), Free(), Free())
    assert assemble(filtration(M)) == M


def test_filtration_pieces_validation():
    with pytest.raises(ValueError):
        FiltrationPieces.build(3, u_infty=[Ppow(1)])
    with pytest.raises(ValueError):
        FiltrationPieces.build(3, tor_u_tf=[PUr(1, 1)])
    with pytest.raises(ValueError):
        FiltrationPieces.build(3, free_rank=-1)
    with pytest.raises(ValueError):
        filtration(BKModule.from_presentation(Presentation(RingParams(3, 1, 2), 1, (), True)))
