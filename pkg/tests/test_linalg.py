from itertools import product

import numpy as np
from hypothesis import given, strategies as st

from bkmod.linalg import FinGroup, iter_elements, left_kernel


def span_size(rows, p, m, dim):
    """Size of the subgroup of (Z/p^m)^dim spanned by rows, by closure."""
    mod = p ** m
    seen = {(0,) * dim}
    frontier = list(seen)
    gens = [tuple(int(x) % mod for x in r) for r in rows]
    while frontier:
        nxt = []
        for v in frontier:
            for g in gens:
                w = tuple((a + b) % mod for a, b in zip(v, g))
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return len(seen)


@st.composite
def presentations(draw):
    p, m = draw(st.sampled_from([(2, 1), (2, 2), (3, 1), (3, 2), (5, 1)]))
    dim = draw(st.integers(1, 3 if p ** m <= 4 else 2))
    k = draw(st.integers(0, 3))
    rows = [[draw(st.integers(0, p ** m - 1)) for _ in range(dim)] for _ in range(k)]
    return p, m, dim, rows


@given(presentations())
def test_quotient_cardinality_matches_closure(data):
    p, m, dim, rows = data
    G = FinGroup(p, m, dim, np.array(rows, dtype=object).reshape(len(rows), dim))
    assert G.cardinality * span_size(rows, p, m, dim) == p ** (m * dim)
    assert G.cardinality == sum(1 for _ in iter_elements(G.orders, p))


@given(presentations())
def test_coords_vanish_exactly_on_relations(data):
    p, m, dim, rows = data
    G = FinGroup(p, m, dim, np.array(rows, dtype=object).reshape(len(rows), dim))
    mod = p ** m
    zero = 0
    for v in product(range(mod), repeat=dim):
        if not G.coords([list(v)]).any():
            zero += 1
    assert zero == span_size(rows, p, m, dim)


@given(presentations())
def test_ambient_round_trip(data):
    p, m, dim, rows = data
    G = FinGroup(p, m, dim, np.array(rows, dtype=object).reshape(len(rows), dim))
    for z in iter_elements(G.orders, p):
        z = np.array([z], dtype=object)
        assert (G.coords(G.ambient(z)) == G.reduce(z)).all()


@given(st.sampled_from([(2, 2), (3, 1), (3, 2)]), st.integers(1, 3), st.integers(1, 2), st.data())
def test_left_kernel_brute_force(pm, rows, cols, data):
    p, m = pm
    mod = p ** m
    A = np.array([[data.draw(st.integers(0, mod - 1)) for _ in range(cols)] for _ in range(rows)], dtype=object)
    K = left_kernel(A, p, m, cols)
    for k in K:
        assert not ((np.array(k, dtype=object) @ A) % mod).any()
    brute = sum(1 for x in product(range(mod), repeat=rows) if not ((np.array(x, dtype=object) @ A) % mod).any())
    assert span_size(K.tolist(), p, m, rows) == brute


def test_elements_and_budget():
    G = FinGroup(3, 2, 2, np.array([[3, 0]], dtype=object))
    assert G.orders and G.cardinality == 27
    assert len(G.elements(100)) == 27
    import pytest
    from bkmod.errors import BudgetExceeded

    with pytest.raises(BudgetExceeded):
        G.elements(10)


def test_zero_group():
    G = FinGroup(2, 1, 1, np.array([[1]], dtype=object))
    assert G.cardinality == 1 and G.length == 0
    assert G.elements(1).shape == (1, 0)
