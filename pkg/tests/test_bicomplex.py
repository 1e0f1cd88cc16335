import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cbbakit.bicomplex import (
    KINDS,
    Bicomplex,
    InvalidBicomplex,
    bicomplex,
    cohomology,
    cohomology_bicomplex,
    cohomology_dims,
    connectivity,
    conjugate,
    direct_sum,
    dot,
    ell,
    is_contractible,
    minimal_model,
    rev_ell,
    shift,
    square,
    tensor,
    translate,
    truncate,
    truncate_with_map,
)
from cbbakit.decomp import ZigZagDescriptor, make_zigzag
from cbbakit.exactq import RatMatrix
from cbbakit.randgen import random_bicomplex


def rank_oracle(B: Bicomplex, kind: str) -> dict:
    """Cohomology dimensions from ranks of the structure maps only."""
    out = {}
    for b in B.support:
        p, q = b
        n = B.dim(b)
        d_in, db_in = B.d((p - 1, q)), B.db((p, q - 1))
        ddb_in = B.d((p - 1, q)) @ B.db((p - 1, q - 1))
        if kind == "Dol_del":
            h = n - B.d(b).rank() - d_in.rank()
        elif kind == "Dol_delbar":
            h = n - B.db(b).rank() - db_in.rank()
        elif kind == "BC":
            h = n - B.d(b).vstack(B.db(b)).rank() - ddb_in.rank()
        elif kind == "A":
            h = n - (B.db((p + 1, q)) @ B.d(b)).rank() - d_in.hstack(db_in).rank()
        else:
            raise ValueError(kind)
        if h:
            out[b] = h
    return out


def swap(B: Bicomplex) -> Bicomplex:
    """Exchange p and q, and with them the two differentials."""
    sw = lambda b: (b[1], b[0])
    return Bicomplex(
        {sw(b): n for b, n in B.dims.items()},
        {sw(b): m for b, m in B.deltabar.items()},
        {sw(b): m for b, m in B.delta.items()},
    )


random_bicomplexes = st.integers(0, 10**6).map(lambda s: random_bicomplex(random.Random(s), 14)[0])


def test_square_fixture_convention():
    S = square()
    assert S.dims == {(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1}
    assert not S.validate()
    # del-bar(del x) = -del del-bar x
    assert S.db((1, 0))[0, 0] == -S.d((0, 1))[0, 0]


def test_square_is_contractible():
    for k in KINDS:
        assert cohomology(square(2, -1), k).is_zero()
    assert is_contractible(square())


def test_invalid_bicomplex_is_reported():
    bad = bicomplex({(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1}, {(0, 0): [[1]], (0, 1): [[1]]}, {(0, 0): [[1]], (1, 0): [[1]]})
    assert any("delbar" in d or "anticommut" in d or "!=" in d for d in bad.validate())
    with pytest.raises(InvalidBicomplex):
        bad.check()


def test_block_shape_is_checked():
    with pytest.raises(ValueError, match=r"\(0, 0\)"):
        bicomplex({(0, 0): 1, (1, 0): 1}, {(0, 0): [[1, 0]]})


@pytest.mark.parametrize(
    "desc, table",
    [
        (("A", 0), {"BC": {(0, 0): 1}, "A": {(0, 0): 1}, "Dol_del": {(0, 0): 1}, "Dol_delbar": {(0, 0): 1}}),
        (("A", 1), {"BC": {(0, 1): 1, (1, 0): 1}, "A": {(0, 0): 1}, "Dol_del": {(0, 1): 1}, "Dol_delbar": {(1, 0): 1}}),
        (("A", -1), {"BC": {(1, 0): 1}, "A": {(0, 0): 1, (1, -1): 1}, "Dol_del": {(1, -1): 1}, "Dol_delbar": {(0, 0): 1}}),
        (("B", 1), {"BC": {(0, 1): 1}, "A": {(0, 0): 1}, "Dol_del": {(0, 0): 1, (0, 1): 1}, "Dol_delbar": {}}),
        (("C", 1), {"BC": {(1, 0): 1}, "A": {(0, 0): 1}, "Dol_del": {}, "Dol_delbar": {(0, 0): 1, (1, 0): 1}}),
    ],
)
def test_small_zigzag_cohomology_hand_computed(desc, table):
    Z = make_zigzag(ZigZagDescriptor(*desc))
    for kind, dims in table.items():
        assert cohomology_dims(Z, kind) == dims


@given(random_bicomplexes)
def test_cohomology_matches_rank_oracle(B):
    for kind in ("BC", "A", "Dol_del", "Dol_delbar"):
        assert cohomology_dims(B, kind) == rank_oracle(B, kind)


@given(random_bicomplexes)
def test_reduced_cohomology_splittings(B):
    bc, bcr, dt = (cohomology(B, k) for k in ("BC", "BC_red", "dot"))
    a, ar = cohomology(B, "A"), cohomology(B, "A_red")
    for b in B.support:
        assert bc.dim(b) == bcr.dim(b) + dt.dim(b)
        # dim (closed + im) / im equals dim of the dot part
        assert a.dim(b) == ar.dim(b) + dt.dim(b)


@given(random_bicomplexes)
def test_cohomology_is_basis_invariant(B):
    rng = random.Random(B.total_dim)
    from cbbakit.randgen import random_invertible

    C = conjugate(B, {b: random_invertible(rng, n) for b, n in B.dims.items()})
    for k in KINDS:
        assert cohomology_dims(B, k) == cohomology_dims(C, k)


@given(random_bicomplexes)
def test_swap_exchanges_dolbeault(B):
    S = swap(B)
    assert not S.validate()
    sw = lambda d: {(b[1], b[0]): n for b, n in d.items()}
    assert cohomology_dims(S, "Dol_del") == sw(cohomology_dims(B, "Dol_delbar"))
    assert cohomology_dims(S, "BC") == sw(cohomology_dims(B, "BC"))


@given(random_bicomplexes, st.integers(-3, 4))
def test_truncations_are_bicomplexes_and_h_k_composite(B, k):
    lo, hi = truncate(B, k, "below"), truncate(B, k, "above")
    assert not lo.validate() and not hi.validate()
    assert all(p + q <= k + 1 for p, q in lo.support)
    assert all(p + q >= k - 1 for p, q in hi.support)
    Hk = cohomology_bicomplex(B, k)
    both = truncate(truncate(B, k, "above"), k, "below")
    for kind in KINDS:
        assert cohomology_dims(Hk, kind) == cohomology_dims(both, kind)


@given(random_bicomplexes)
def test_minimal_model_preserves_cohomology(B):
    M = minimal_model(B)
    assert M.is_minimal()
    for k in KINDS:
        assert cohomology_dims(M, k) == cohomology_dims(B, k)
    M2 = minimal_model(M)
    assert M2.dims == M.dims


def test_truncation_maps_exist():
    B = make_zigzag(ZigZagDescriptor("A", 2))
    for side in ("below", "above"):
        T, m = truncate_with_map(B, 0, side)
        assert not T.validate()
        assert m is not None


@pytest.mark.parametrize(
    "B, k",
    [(square(), math.inf), (dot(0, 0), -1), (dot(2, 1), 2), (Bicomplex.zero(), math.inf), (make_zigzag(ZigZagDescriptor("A", -1, (1, 1))), 1)],
)
def test_connectivity(B, k):
    assert connectivity(B) == k


def test_l_shapes_and_shift():
    assert not ell().validate() and not rev_ell().validate()
    assert cohomology_dims(ell(), "A") == {(-1, -1): 1}
    assert cohomology_dims(rev_ell(), "BC") == {(1, 1): 1}
    # Aeppli classes of L sit in degree -2, those of the reversed L in degree 1
    D = dot(0, 0)
    assert connectivity(shift(D, 1)) == connectivity(D) - 2
    assert connectivity(shift(D, -1)) == connectivity(D) + 1
    assert cohomology_dims(shift(D, -1), "BC") == {(1, 1): 1}
    assert cohomology_dims(shift(D, 1), "A") == {(-1, -1): 1}
    with pytest.raises(ValueError):
        shift(D, 2)


@given(random_bicomplexes, random_bicomplexes)
def test_tensor_is_bicomplex_and_dimensions_multiply(B1, B2):
    T = tensor(B1, B2)
    assert not T.validate()
    assert T.total_dim == B1.total_dim * B2.total_dim


@given(random_bicomplexes, random_bicomplexes)
def test_dolbeault_kunneth(B1, B2):
    T = tensor(B1, B2)
    for kind in ("Dol_del", "Dol_delbar"):
        expect = {}
        for b1, n1 in cohomology_dims(B1, kind).items():
            for b2, n2 in cohomology_dims(B2, kind).items():
                b = (b1[0] + b2[0], b1[1] + b2[1])
                expect[b] = expect.get(b, 0) + n1 * n2
        assert cohomology_dims(T, kind) == expect


@given(random_bicomplexes, random_bicomplexes)
def test_direct_sum_adds_cohomology(B1, B2):
    S = direct_sum(B1, B2)
    for k in KINDS:
        a, b = cohomology_dims(B1, k), cohomology_dims(B2, k)
        assert cohomology_dims(S, k) == {x: a.get(x, 0) + b.get(x, 0) for x in set(a) | set(b)}


def test_translate_and_conjugate_identity():
    B = make_zigzag(ZigZagDescriptor("B", 2))
    T = translate(B, 3, -2)
    assert cohomology_dims(T, "BC") == {(p + 3, q - 2): n for (p, q), n in cohomology_dims(B, "BC").items()}
    assert conjugate(B, {b: RatMatrix.identity(n) for b, n in B.dims.items()}) == B
