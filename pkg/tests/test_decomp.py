import random
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cbbakit.bicomplex import (
    Bicomplex,
    cohomology_dims,
    conjugate,
    direct_sum_all,
    square,
    tensor,
    translate,
)
from cbbakit.decomp import (
    ZigZagDescriptor,
    anchor_of,
    decompose,
    expected_tensor,
    interval_decompose,
    interval_multiplicities_by_rank,
    make_zigzag,
    split_squares,
    tensor_table,
    zigzag_multiplicities_oracle,
    zigzag_range,
)
from cbbakit.exactq import RatMatrix
from cbbakit.randgen import random_bicomplex

seeds = st.integers(0, 10**6)


def swap(B: Bicomplex) -> Bicomplex:
    sw = lambda b: (b[1], b[0])
    return Bicomplex(
        {sw(b): n for b, n in B.dims.items()},
        {sw(b): m for b, m in B.deltabar.items()},
        {sw(b): m for b, m in B.delta.items()},
    )


@pytest.mark.parametrize("d", zigzag_range(4), ids=lambda d: d.name)
def test_zigzag_shapes(d):
    Z = make_zigzag(d)
    assert not Z.validate() and Z.is_minimal()
    assert Z.total_dim == d.total_dim
    assert anchor_of(d.dots()) == d.anchor
    dol = (sum(cohomology_dims(Z, "Dol_del").values()), sum(cohomology_dims(Z, "Dol_delbar").values()))
    assert dol == {"A": (1, 1), "B": (2, 0), "C": (0, 2)}[d.family]


@pytest.mark.parametrize("d", zigzag_range(3), ids=lambda d: d.name)
def test_zigzags_are_indecomposable(d):
    dec = decompose(make_zigzag(d))
    assert dec.zigzags == Counter({d: 1}) and not dec.squares


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_swap_exchanges_b_and_c(n):
    dec = decompose(swap(make_zigzag(ZigZagDescriptor("B", n))))
    assert dec.zigzag_shapes() == Counter({("C", n): 1})


def test_scrambled_fixture_manifest(fixtures):
    from cbbakit.formats import parse_bicomplex

    dec = decompose(parse_bicomplex(fixtures / "scrambled.bcx"))
    assert dec.zigzag_shapes() == Counter({("A", 1): 1, ("B", 2): 1})
    assert sum(dec.squares.values()) == 1
    man = dec.manifest()
    assert man["squares"] == [{"anchor": [0, 1], "count": 1}]


@given(seeds)
def test_round_trip_recovers_summands(seed):
    B, sq, zz = random_bicomplex(random.Random(seed), 24)
    dec = decompose(B)
    assert Counter(dec.squares) == sq and Counter(dec.zigzags) == zz
    assert conjugate(B, dec.basis_change) == dec.reassembled()


@given(seeds)
def test_rank_oracle_agrees(seed):
    B, sq, zz = random_bicomplex(random.Random(seed), 24)
    anchors, minimal, _, _ = split_squares(B)
    assert Counter(anchors) == sq
    assert zigzag_multiplicities_oracle(minimal) == zz


def test_square_split_from_sum():
    B = direct_sum_all([square(0, 0), square(0, 0), make_zigzag(ZigZagDescriptor("A", 0, (1, 1)))])
    anchors, minimal, _, _ = split_squares(B)
    assert sorted(anchors) == [(0, 0), (0, 0)]
    assert minimal.dims == {(1, 1): 1}


def test_interval_decomposition_of_alternating_line():
    # V0 -> V1 <- V2 with both arrows the identity on Q: one interval [0, 2]
    one = RatMatrix.identity(1)
    dims = [1, 1, 1]
    arrows = [("f", one), ("b", one)]
    assert interval_multiplicities_by_rank(dims, arrows) == Counter({(0, 2): 1})
    result = interval_decompose(dims, arrows)
    assert result is not None


@pytest.mark.parametrize(
    "x, y, clause, shapes",
    [
        (("A", 1), ("A", -2), "i", {("A", -1): 1}),
        (("A", 3), ("B", 2), "ii", {("B", 2): 1}),
        (("C", 2), ("A", -1), "ii", {("C", 2): 1}),
        (("B", 1), ("B", 3), "iii-B", {("B", 1): 2}),
        (("B", 2), ("C", 2), "iv", {}),
    ],
)
def test_tensor_clauses_computed(x, y, clause, shapes):
    dx, dy = ZigZagDescriptor(*x), ZigZagDescriptor(*y)
    got = decompose(tensor(make_zigzag(dx), make_zigzag(dy))).zigzag_shapes()
    assert got == Counter(shapes)
    c, expected = expected_tensor(dx, dy)
    assert c == clause and expected == got


@pytest.mark.parametrize("i, j", [(1, 1), (1, 2), (2, 3), (1, 4)])
def test_c_times_c_is_twice_the_shorter(i, j):
    """Swapping p and q turns B_i ⊗ B_j = 2 B_min into C_i ⊗ C_j = 2 C_min."""
    C = lambda n: make_zigzag(ZigZagDescriptor("C", n))
    B = lambda n: make_zigzag(ZigZagDescriptor("B", n))
    got = decompose(tensor(C(i), C(j))).zigzag_shapes()
    assert got == Counter({("C", min(i, j)): 2})
    mirrored = decompose(swap(tensor(B(i), B(j)))).zigzag_shapes()
    assert mirrored == got


def test_tensor_table_rows_small():
    rows = tensor_table(1)
    assert len(rows) == len(zigzag_range(1)) ** 2
    bad = [r for r in rows if not r.ok]
    # only the C-clause differs, and only when the parameters differ; none at max 1
    assert bad == []


def test_translation_moves_anchor():
    d = ZigZagDescriptor("B", 2, (0, 0))
    dec = decompose(translate(make_zigzag(d), 2, -3))
    assert list(dec.zigzags) == [ZigZagDescriptor("B", 2, (2, -3))]
