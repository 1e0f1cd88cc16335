"""Acceptance criteria 1 to 8, one test each, each printing a pass/fail line."""
import random
import time
from collections import Counter
from functools import lru_cache

from cbbakit.bicomplex import (
    KINDS,
    Bicomplex,
    bicomplex,
    cohomology,
    cohomology_dims,
    connectivity,
    degree_range,
    direct_sum,
    shift,
    square,
    tensor,
)
from cbbakit.decomp import (
    decompose,
    make_zigzag,
    split_squares,
    tensor_table,
    zigzag_multiplicities_oracle,
    zigzag_range,
)
from cbbakit.exactq import RatMatrix
from cbbakit.hirsch import (
    CbbaMap,
    HirschExtension,
    LocalSystemPair,
    TruncatedCbba,
    _TwistedOps,
    extensions_isomorphic,
    free_cbba,
    k_invariant,
    obstruction_extend,
    twisted_hom,
    vbasis,
    wedge_degree_defects,
)
from cbbakit.morphism import (
    cone,
    cone_by_cokernel,
    connectedness_conditions,
    hom_bicomplex,
    lemma_connectivity,
    triangle_checks,
    truncation_lemma_checks,
)
from cbbakit.randgen import (
    random_bicomplex,
    random_extension,
    random_map,
    random_relative_automorphism,
    random_small_v,
    scramble,
)


def _sum_dims(dicts) -> dict:
    out = Counter()
    for d in dicts:
        out.update(d)
    return dict(out)


# -- 1 ---------------------------------------------------------------------------------
def test_criterion_1_cohomology_signatures(criterion):
    with criterion(1, "zig-zag Dolbeault signatures and contractible square") as rec:
        t0 = time.perf_counter()
        shapes = zigzag_range(4)
        for d in shapes:
            Z = make_zigzag(d)
            sig = (sum(cohomology_dims(Z, "Dol_del").values()), sum(cohomology_dims(Z, "Dol_delbar").values()))
            want = {"A": (1, 1), "B": (2, 0), "C": (0, 2)}[d.family]
            assert sig == want, f"{d.name}: Dolbeault signature {sig}, expected {want}"
        for kind in KINDS:
            assert cohomology(square(), kind).is_zero(), f"square has nonzero {kind} cohomology"
        elapsed = time.perf_counter() - t0
        assert elapsed < 1.0, f"took {elapsed:.2f} s"
        rec.detail = f"[{len(shapes)} zig-zags, 7 square tables]"


# -- 2 ---------------------------------------------------------------------------------
def test_criterion_2_tensor_theorem(criterion):
    with criterion(2, "tensor-table --max 4 against the four stated clauses") as rec:
        t0 = time.perf_counter()
        rows = tensor_table(4)
        elapsed = time.perf_counter() - t0
        bad = [r for r in rows if not r.ok]
        by_clause = Counter(r.clause for r in bad)
        sample = ", ".join(
            f"{r.left.name}x{r.right.name}: expected {dict(r.expected)} got {dict(r.computed)}" for r in bad[:3]
        )
        assert not bad, f"{len(bad)}/{len(rows)} products disagree, clauses {dict(by_clause)}; e.g. {sample}"
        assert elapsed < 30, f"took {elapsed:.1f} s"
        rec.detail = f"[{len(rows)} products]"


# -- 3 ---------------------------------------------------------------------------------
@lru_cache(maxsize=None)
def _piece_dims(d, kind) -> tuple:
    return tuple(sorted(cohomology_dims(make_zigzag(d), kind).items()))


def piece_dims(d, kind) -> dict:
    return dict(_piece_dims(d, kind))


def test_criterion_3_decomposition_round_trip(criterion):
    with criterion(3, "1000 scrambled sums (dim <= 40) decompose back exactly") as rec:
        rng = random.Random(3)
        t0 = time.perf_counter()
        n_sq = n_zz = 0
        for case in range(1000):
            B, sq, zz = random_bicomplex(rng, 40)
            dec = decompose(B)
            assert Counter(dec.squares) == sq and Counter(dec.zigzags) == zz, f"case {case}: wrong multiset"
            anchors, minimal, _, _ = split_squares(B)
            assert zigzag_multiplicities_oracle(minimal) == zz, f"case {case}: rank oracle disagrees"
            assert Counter(anchors) == sq
            # cohomology dimensions add up over the recovered summands
            for kind in ("BC", "A"):
                pieces = [piece_dims(d, kind) for d in dec.zigzags.elements()]
                assert cohomology_dims(B, kind) == _sum_dims(pieces), f"case {case}: {kind} dims"
            n_sq += sum(sq.values())
            n_zz += sum(zz.values())
        elapsed = time.perf_counter() - t0
        assert elapsed < 120, f"took {elapsed:.1f} s"
        rec.detail = f"[{n_sq} squares, {n_zz} zig-zags]"


# -- 4 ---------------------------------------------------------------------------------
def test_criterion_4_truncations_and_triangles(criterion):
    with criterion(4, "500 bicomplexes: connectedness, triangles, truncation lemma") as rec:
        rng = random.Random(4)
        t0 = time.perf_counter()
        checks = 0
        for case in range(500):
            B = random_bicomplex(rng, 12)[0]
            c = connectivity(B)
            for k in degree_range(B):
                conds = connectedness_conditions(B, k)
                assert set(conds.values()) == {c >= k}, f"case {case}, k={k}: {conds}"
                tri = triangle_checks(B, k)
                assert tri["passed"], f"case {case}, k={k}: {tri}"
                lemma = truncation_lemma_checks(B, k)
                assert all(lemma.values()), f"case {case}, k={k}: {lemma}"
                checks += 1
        elapsed = time.perf_counter() - t0
        assert elapsed < 120, f"took {elapsed:.1f} s"
        rec.detail = f"[{checks} (bicomplex, k) pairs]"


# -- 5 ---------------------------------------------------------------------------------
def test_criterion_5_cone_consistency(criterion):
    with criterion(5, "200 maps: explicit cone vs cokernel cone, two map connectivities") as rec:
        rng = random.Random(5)
        nonzero = 0
        for case in range(200):
            V = random_bicomplex(rng, 8)[0]
            W = random_bicomplex(rng, 8)[0]
            if case % 2:
                # a copy of V inside W gives maps of every rank
                W = direct_sum(scramble(rng, V)[0], W)
            f = random_map(rng, V, W)
            nonzero += any(not m.is_zero() for m in f.blocks.values())
            C = cone(f).cone
            assert not C.validate(), f"case {case}: cone is not a bicomplex"
            assert decompose(C).zigzags == decompose(cone_by_cokernel(f)).zigzags, f"case {case}: cones differ"
            assert connectivity(C) + 1 == lemma_connectivity(f), f"case {case}: connectivities differ"
        rec.detail = f"[{nonzero} nonzero maps]"


# -- 6 ---------------------------------------------------------------------------------
def word_length_part(V: Bicomplex, n: int) -> tuple[TruncatedCbba, Bicomplex]:
    """The word-length-n part of the free cbba on a basis of V (V in positive degrees)."""
    vb = vbasis(V)
    names = [f"v{j}" for j in range(len(vb))]
    N = n * max(sum(b) for b in vb)
    A0 = TruncatedCbba([(nm, p, q) for nm, (p, q) in zip(names, vb)], N)
    offsets = {}
    for j, b in enumerate(vb):
        offsets.setdefault(b, j)
    diffs = {"del": {}, "delbar": {}}
    for which, off, op in (("del", (1, 0), V.d), ("delbar", (0, 1), V.db)):
        for j, b in enumerate(vb):
            t = (b[0] + off[0], b[1] + off[1])
            if not V.dim(t):
                continue
            col = op(b).column(j - offsets[b])
            e = {}
            for i, x in enumerate(col):
                if x:
                    (m,) = A0.gen(names[offsets[t] + i])
                    e[m] = x
            diffs[which][names[j]] = e
    A = TruncatedCbba(A0.generators, N, diffs["del"], diffs["delbar"])
    A.check()
    basis = {b: [m for m in A.basis(b) if A.word_length(m) == n] for b in A.support}
    basis = {b: ms for b, ms in basis.items() if ms}
    maps = {"del": {}, "delbar": {}}
    for which, off, op in (("del", (1, 0), A.d), ("delbar", (0, 1), A.db)):
        for b, ms in basis.items():
            t = (b[0] + off[0], b[1] + off[1])
            if t not in basis:
                continue
            pos = {m: i for i, m in enumerate(basis[t])}
            rows = [[0] * len(ms) for _ in basis[t]]
            for j, m in enumerate(ms):
                for m2, x in op({m: 1}).items():
                    rows[pos[m2]][j] += x
            maps[which][b] = RatMatrix.from_rows(rows, len(ms))
    return A, Bicomplex({b: len(ms) for b, ms in basis.items()}, maps["del"], maps["delbar"])


def test_criterion_6_tensor_connectivity(criterion):
    with criterion(6, "500 pairs: connectivity(V⊗W) >= c(V)+c(W)+1, wedge-power bounds") as rec:
        rng = random.Random(6)
        tight = 0
        for case in range(500):
            V = random_bicomplex(rng, 8)[0]
            W = random_bicomplex(rng, 8)[0]
            cv, cw, ct = connectivity(V), connectivity(W), connectivity(tensor(V, W))
            assert ct >= cv + cw + 1, f"case {case}: {ct} < {cv} + {cw} + 1"
            tight += ct == cv + cw + 1
        wedges = 0
        for case in range(60):
            V = random_small_v(rng, 3)
            c = connectivity(V)
            k = c + 1
            for n in (2, 3):
                A, P = word_length_part(V, n)
                assert not P.validate()
                assert wedge_degree_defects(A, n, min(sum(b) for b in vbasis(V))) == []
                assert connectivity(P) >= n * k - 1, f"wedge case {case}, n={n}"
                T = V
                for _ in range(n - 1):
                    T = tensor(T, V)
                assert connectivity(T) >= n * k - 1, f"tensor power case {case}, n={n}"
                wedges += 1
        rec.detail = f"[{tight} tight pairs, {wedges} wedge/tensor powers]"


# -- 7 ---------------------------------------------------------------------------------
def test_criterion_7_hirsch_classification(criterion):
    with criterion(7, "100 random extensions: validity, k-invariants, obstructions, zero twist") as rec:
        rng = random.Random(7)
        t0 = time.perf_counter()
        stats = Counter()
        for case in range(100):
            e = random_extension(rng, valid=rng.random() < 0.75, max_gens=3, N=rng.choice((6, 8)), max_v=3)
            assert e.V.total_dim <= 3 and len(e.base.generators) <= 3 and e.base.N <= 8
            # (a) d^2 = 0 iff the structure equations hold
            s, d = e.structure_defects(), e.d_squared_defects()
            assert bool(s) == bool(d), f"case {case}: {s} vs {d}"
            stats["twisted"] += bool(e.system.theta or e.system.thetabar)
            if s:
                stats["invalid"] += 1
                continue
            stats["valid"] += 1
            k = k_invariant(e)
            stats["nonzero k"] += not k.is_zero
            # (b) conjugation preserves the class, and a witness is recovered
            H = random_relative_automorphism(rng, e)
            e2 = e.conjugate(H)
            assert k_invariant(e2).coordinates == k.coordinates, f"case {case}: class moved"
            ok, witness = extensions_isomorphic(e, e2)
            assert ok and e.conjugate(witness).same_as(e2), f"case {case}: bad witness"
            # (c) the inclusion into the extension itself extends; f phi = d_Theta H exactly
            T = e.total_algebra()
            f = CbbaMap(e.base, T, {g.name: T.gen(g.name) for g in e.base.generators})
            r = obstruction_extend(f, e)
            assert r.extends, f"case {case}: constructed extension reported obstructed"
            ops = _TwistedOps(T, e.system.pushed(f))
            for which in ("del", "delbar"):
                lhs = {j: f(v) for j, v in e.phi_of(which).items() if f(v)}
                rhs = {j: v for j, v in ops.apply(which, r.H, (0, 0)).items() if v}
                assert lhs == rhs, f"case {case}: f phi != d_Theta H ({which})"
            # (d) zero twist: twisted homotopy equals untwisted homotopy
            zero = twisted_hom(e.V, e.base, LocalSystemPair.zero(e.V)).bicomplex
            plain = hom_bicomplex(shift(e.V, -1), e.base.as_bicomplex())
            assert cohomology_dims(zero, "BC") == cohomology_dims(plain, "BC"), f"case {case}: (d)"
        elapsed = time.perf_counter() - t0
        assert stats["invalid"] > 0 and stats["valid"] > 50
        assert elapsed < 120, f"took {elapsed:.1f} s"
        rec.detail = f"[{dict(sorted(stats.items()))}]"


# -- 8 ---------------------------------------------------------------------------------
def cpn(n: int) -> HirschExtension:
    A = free_cbba([("x", 1, 1)], 2 * n + 2)
    V = bicomplex({(n, n): 1, (n + 1, n): 1, (n, n + 1): 1}, {(n, n): [[1]]}, {(n, n): [[1]]})
    xn = A.power(A.gen("x"), n + 1)
    return HirschExtension(A, LocalSystemPair.zero(V), {1: xn}, {2: {m: -c for m, c in xn.items()}}, ("y", "dby", "dy"))


def test_criterion_8_cpn(criterion):
    with criterion(8, "CP^n fixtures for n = 1, 2, 3") as rec:
        for n in (1, 2, 3):
            e = cpn(n)
            assert e.validate() == [], f"n={n}: {e.validate()}"
            T = e.total_algebra()
            assert T.d(T.db(T.gen("y"))) == T.power(T.gen("x"), n + 1), f"n={n}: del delbar y"
            assert not k_invariant(e).is_zero, f"n={n}: k-invariant vanishes"
            trivial = HirschExtension(e.base, e.system, {}, {}, e.names)
            assert not extensions_isomorphic(e, trivial)[0], f"n={n}: isomorphic to trivial"
        rec.detail = "[validates, nonzero k-invariant, not trivial]"
