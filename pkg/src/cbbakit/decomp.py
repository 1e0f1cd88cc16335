"""Splitting bicomplexes into squares and zig-zags.

A minimal bicomplex (del delbar = 0) satisfies im del + im delbar ⊆ ker del ∩
ker delbar.  Choosing complements C of the closed part and D of the exact
part inside it, the pieces between total degrees d and d+1 form a
representation of an alternating type-A quiver along the antidiagonal::

    I(p, d+1-p) <-delbar- C(p, d-p) -del-> I(p+1, d-p) <-delbar- C(p+1, d-p-1) ...

whose interval summands are exactly the zig-zags; D contributes the dots.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

from .bicomplex import (
    Bicomplex,
    Bidegree,
    cohomology_dims,
    conjugate,
    direct_sum_all,
    square,
    subcomplex,
    tensor,
)
from .exactq import (
    Fraction,
    RatMatrix,
    Subspace,
    kernel,
    quotient_present,
    rref,
    solve_linear,
)

FAMILIES = ("A", "B", "C")


class DecompositionError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class ZigZagDescriptor:
    family: str
    parameter: int
    anchor: Bidegree = (0, 0)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown zig-zag family {self.family!r}")
        if self.family in "BC" and self.parameter < 1:
            raise ValueError(f"{self.family}_n needs n >= 1, got {self.parameter}")
        object.__setattr__(self, "anchor", tuple(self.anchor))

    @property
    def name(self) -> str:
        return f"{self.family}{self.parameter}"

    def steps(self) -> str:
        """Walk from the top-left dot: 'D' = down (delbar arrow up), 'R' = right (del arrow)."""
        n = self.parameter
        if self.family == "A":
            return "DR" * n if n > 0 else "RD" * (-n)
        if self.family == "B":
            return "D" + "RD" * (n - 1)
        return "R" + "DR" * (n - 1)

    def dots(self) -> list[Bidegree]:
        pos = [(0, 0)]
        for s in self.steps():
            p, q = pos[-1]
            pos.append((p, q - 1) if s == "D" else (p + 1, q))
        a = min(pos, key=lambda b: (b[0] + b[1], b[0]))
        dp, dq = self.anchor[0] - a[0], self.anchor[1] - a[1]
        return [(p + dp, q + dq) for p, q in pos]

    @property
    def total_dim(self) -> int:
        return 2 * abs(self.parameter) + 1 if self.family == "A" else 2 * self.parameter

    def shape_key(self):
        return (self.family, self.parameter)


def anchor_of(dots: Sequence[Bidegree]) -> Bidegree:
    return min(dots, key=lambda b: (b[0] + b[1], b[0]))


def make_zigzag(d: ZigZagDescriptor) -> Bicomplex:
    """The pictured zig-zag with every structure map equal to 1."""
    pos = d.dots()
    delta, deltabar = {}, {}
    for i, s in enumerate(d.steps()):
        if s == "R":
            delta[pos[i]] = [[1]]
        else:
            deltabar[pos[i + 1]] = [[1]]
    return Bicomplex({b: 1 for b in pos}, delta, deltabar)


# -- squares -----------------------------------------------------------------
def _add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def split_squares(B: Bicomplex):
    """Split off all squares.

    Returns ``(anchors, minimal_part, basis)`` where ``anchors`` lists the
    corner bidegree of each square and ``basis[b]`` is a list of
    ``(label, vector)`` pairs: square vectors labelled ``("sq", i, slot)`` and
    minimal-part vectors labelled ``("min", j)``.
    """
    B.check()
    corners: dict[Bidegree, list] = {}
    for b in B.support:
        k = kernel(B.ddb(b))
        comp = k.complement_basis()
        if comp:
            corners[b] = comp
    # retraction rho_t: V^t -> coordinates on the corners at t - (1,1)
    rho: dict[Bidegree, RatMatrix] = {}
    for b, xs in corners.items():
        t = _add(b, (1, 1))
        imgs = [B.ddb(b) @ x for x in xs]
        ext = Subspace.span(B.dim(t), imgs)
        full = RatMatrix.from_columns(imgs + _complete(imgs, B.dim(t)), B.dim(t))
        rho[t] = full.inverse().submatrix(range(len(xs)), range(B.dim(t)))
        assert ext.dim == len(xs)
    family = {}
    for b in B.support:
        conds = B.ddb(b)
        if b in rho:
            conds = conds.vstack(rho[b])
        for off, op in (((1, 0), B.d), ((0, 1), B.db)):
            t = _add(b, off)
            if t in rho:
                conds = conds.vstack(rho[t] @ op(b))
        family[b] = kernel(conds)
    minimal, _ = subcomplex(B, family)
    anchors = []
    basis: dict[Bidegree, list] = {b: [] for b in B.support}
    for b in sorted(corners):
        for x in corners[b]:
            i = len(anchors)
            anchors.append(b)
            dx = B.d(b) @ x
            dbx = B.db(b) @ x
            ddbx = B.d(_add(b, (0, 1))) @ dbx
            basis[b].append((("sq", i, 0), x))
            basis[_add(b, (1, 0))].append((("sq", i, 1), dx))
            basis[_add(b, (0, 1))].append((("sq", i, 2), dbx))
            basis[_add(b, (1, 1))].append((("sq", i, 3), ddbx))
    for b, s in family.items():
        for j, v in enumerate(s.vectors()):
            basis[b].append((("min", j), v))
    for b in B.support:
        if len(basis[b]) != B.dim(b):
            raise DecompositionError(f"square splitting lost dimensions at {b}")
    return anchors, minimal, basis, family


def _complete(vectors: list, n: int) -> list:
    """Standard basis vectors completing an independent list to a basis of Q^n."""
    return Subspace.span(n, vectors).complement_basis()


# -- type-A quiver intervals -------------------------------------------------
def interval_decompose(dims: Sequence[int], arrows: Sequence[tuple[str, RatMatrix]]):
    """Interval decomposition of a representation of a linear quiver.

    ``arrows[t]`` joins vertex t and t+1 and is ``("f", M)`` with
    ``M: U_t -> U_{t+1}`` or ``("b", M)`` with ``M: U_{t+1} -> U_t``.
    Returns ``[(start, end, {t: vector})]`` such that every arrow sends the
    interval vector at one end to the one at the other end (or to zero at
    the interval boundary) and the vectors at each vertex form a basis.
    """
    L = len(dims)
    if len(arrows) != max(L - 1, 0):
        raise ValueError("need one arrow between consecutive vertices")
    closed = []
    opened = []  # [start, key, vecs]

    def key_for(start):
        if start == 0:
            return (1, 0)
        return (0, -start) if arrows[start - 1][0] == "f" else (2, start)

    def absorb(j, i, c, t):
        # x_j += c * x_i on the overlap ending at t
        xj, xi = opened[j][2], opened[i][2]
        for s in range(max(opened[j][0], opened[i][0]), t + 1):
            xj[s] = tuple(a + c * b for a, b in zip(xj[s], xi[s]))

    if L == 0:
        return []
    for e in RatMatrix.identity(dims[0]).columns():
        opened.append([0, key_for(0), {0: e}])
    for t in range(L - 1):
        kind, M = arrows[t]
        n_next = dims[t + 1]
        cont: list[tuple[int, tuple]] = []  # (open index, vector at t+1)
        if kind == "f":
            order = sorted(range(len(opened)), key=lambda i: opened[i][1], reverse=True)
            imgs: list[tuple] = []
            owners: list[int] = []
            ends = []
            for j in order:
                y = M @ opened[j][2][t]
                c = solve_linear(RatMatrix.from_columns(imgs, n_next), y) if imgs else (None if any(y) else ())
                if c is None:
                    imgs.append(y)
                    owners.append(j)
                    continue
                for ci, i in zip(c, owners):
                    if ci:
                        absorb(j, i, -ci, t)
                assert not any(M @ opened[j][2][t])
                ends.append(j)
            cont = list(zip(owners, imgs))
            fresh = _complete(imgs, n_next)
        else:
            X = RatMatrix.from_columns([o[2][t] for o in opened], dims[t])
            Xinv = X.inverse() if dims[t] else X
            coords = Xinv @ M if dims[t] else RatMatrix.zeros(0, n_next)
            m = [list(r) for r in coords.entries]
            Y = [list(col) for col in RatMatrix.identity(n_next).columns()]
            order = sorted(range(len(opened)), key=lambda i: opened[i][1])
            used: dict[int, int] = {}
            ends = []
            for pos, r in enumerate(order):
                c = next((c for c in range(n_next) if c not in used.values() and m[r][c]), None)
                if c is None:
                    ends.append(r)
                    continue
                inv = 1 / m[r][c]
                for row in m:
                    row[c] *= inv
                Y[c] = [inv * x for x in Y[c]]
                for c2 in range(n_next):
                    f = m[r][c2]
                    if c2 != c and f:
                        for row in m:
                            row[c2] -= f * row[c]
                        Y[c2] = [a - f * b for a, b in zip(Y[c2], Y[c])]
                for i in order[pos + 1:]:
                    f = m[i][c]
                    if f:
                        m[i][c] = Fraction(0)
                        absorb(r, i, f, t)
                used[r] = c
            cont = [(r, tuple(Y[c])) for r, c in used.items()]
            fresh = [tuple(Y[c]) for c in range(n_next) if c not in used.values()]
            for v in fresh:
                assert not any(M @ v)
        for j in ends:
            closed.append((opened[j][0], t, opened[j][2]))
        nxt = []
        for j, v in cont:
            opened[j][2][t + 1] = v
            nxt.append(opened[j])
        for v in fresh:
            nxt.append([t + 1, key_for(t + 1), {t + 1: v}])
        opened = nxt
    for o in opened:
        closed.append((o[0], L - 1, o[2]))
    return sorted(closed, key=lambda x: (x[0], x[1]))


def interval_multiplicities_by_rank(dims: Sequence[int], arrows) -> Counter:
    """Barcode of a linear quiver representation via the generalized rank invariant.

    rank(a, b) = rank of lim -> colim over the sub-line [a, b] counts intervals
    containing [a, b]; Möbius inversion recovers the multiplicities.
    """
    L = len(dims)
    memo = {}

    def r(a, b):
        if a < 0 or b >= L:
            return 0
        if (a, b) in memo:
            return memo[(a, b)]
        offs = []
        tot = 0
        for t in range(a, b + 1):
            offs.append(tot)
            tot += dims[t]
        # lim: kernel of the compatibility map
        cons = []
        rels = []
        for t in range(a, b):
            kind, M = arrows[t]
            o0, o1 = offs[t - a], offs[t + 1 - a]
            if kind == "f":
                for i in range(dims[t + 1]):
                    row = [Fraction(0)] * tot
                    row[o1 + i] = Fraction(1)
                    for j in range(dims[t]):
                        row[o0 + j] -= M[i, j]
                    cons.append(row)
                for j in range(dims[t]):
                    v = [Fraction(0)] * tot
                    v[o0 + j] = Fraction(1)
                    for i in range(dims[t + 1]):
                        v[o1 + i] -= M[i, j]
                    rels.append(v)
            else:
                for i in range(dims[t]):
                    row = [Fraction(0)] * tot
                    row[o0 + i] = Fraction(1)
                    for j in range(dims[t + 1]):
                        row[o1 + j] -= M[i, j]
                    cons.append(row)
                for j in range(dims[t + 1]):
                    v = [Fraction(0)] * tot
                    v[o1 + j] = Fraction(1)
                    for i in range(dims[t]):
                        v[o0 + i] -= M[i, j]
                    rels.append(v)
        lim = kernel(RatMatrix.from_rows(cons, tot)) if cons else Subspace.full(tot)
        # push each compatible tuple into the colimit through vertex a
        pushed = []
        for v in lim.vectors():
            w = [Fraction(0)] * tot
            w[: dims[a]] = v[: dims[a]]
            pushed.append(w)
        base = len(rref(rels, tot)[0]) if rels else 0
        val = len(rref(rels + pushed, tot)[0]) - base
        memo[(a, b)] = val
        return val

    out = Counter()
    for a in range(L):
        for b in range(a, L):
            m = r(a, b) - r(a - 1, b) - r(a, b + 1) + r(a - 1, b + 1)
            if m < 0:
                raise AssertionError("negative interval multiplicity")
            if m:
                out[(a, b)] = m
    return out


# -- zig-zag decomposition of minimal bicomplexes ---------------------------------
def _interval_descriptor(kinds: Sequence[str], dots: Sequence[Bidegree], a: int, b: int) -> ZigZagDescriptor:
    s, e = kinds[a], kinds[b]
    steps = b - a
    if s == "I" and e == "I" and steps:
        fam, n = "A", steps // 2
    elif s == "C" and e == "C" and steps:
        fam, n = "A", -(steps // 2)
    elif s == "I" and e == "C":
        fam, n = "B", (steps + 1) // 2
    elif s == "C" and e == "I":
        fam, n = "C", (steps + 1) // 2
    else:
        raise DecompositionError(f"interval [{a},{b}] of type {s}..{e} is not a zig-zag")
    return ZigZagDescriptor(fam, n, anchor_of(dots[a : b + 1]))


def _degree_lines(M: Bicomplex, comp: Mapping, exact: Mapping):
    """Yield (d, kinds, bidegrees, dims, arrows, vertex bases) for each antidiagonal pair."""
    degs = M.total_degrees()
    if not degs:
        return
    ps = [p for p, _ in M.support]
    pmin, pmax = min(ps), max(ps)
    for d in range(degs[0] - 1, degs[-1] + 1):
        kinds, bids, bases = [], [], []
        for p in range(pmin, pmax + 2):
            kinds.append("I")
            bids.append((p, d + 1 - p))
            bases.append(exact.get((p, d + 1 - p)))
            if p <= pmax:
                kinds.append("C")
                bids.append((p, d - p))
                bases.append(comp.get((p, d - p)))
        yield d, kinds, bids, bases


def zigzag_decompose(M: Bicomplex, verify: bool = True) -> "Decomposition":
    """Decompose a minimal bicomplex into zig-zags (dots included as A_0)."""
    M.check()
    if not M.is_minimal():
        raise DecompositionError("input is not minimal (del delbar != 0)")
    comp: dict[Bidegree, list] = {}
    exact: dict[Bidegree, Subspace] = {}
    dots: dict[Bidegree, list] = {}
    for b in M.support:
        s = M.spaces(b)
        comp[b] = s.closed.complement_basis()
        exact[b] = s.im_sum
        chosen = list(s.im_sum.vectors())
        r = len(chosen)
        extra = []
        for v in s.closed.vectors():
            if len(rref(chosen + [v], M.dim(b))[0]) > r:
                chosen.append(v)
                extra.append(v)
                r += 1
        dots[b] = extra
    pieces: list[tuple[ZigZagDescriptor, dict]] = []
    for b in sorted(dots):
        for v in dots[b]:
            pieces.append((ZigZagDescriptor("A", 0, b), {b: v}))
    for d, kinds, bids, bases in _degree_lines(M, comp, exact):
        vdims = []
        for kind, b, base in zip(kinds, bids, bases):
            vdims.append(len(base) if kind == "C" and base else (base.dim if base is not None and kind == "I" else 0))
        if not any(vdims):
            continue
        arrows = _line_arrows(M, kinds, bids, bases, vdims)
        for a, e, vecs in interval_decompose(vdims, arrows):
            desc = _interval_descriptor(kinds, bids, a, e)
            amb = {}
            for t, v in vecs.items():
                if kinds[t] == "C":
                    amb[bids[t]] = RatMatrix.from_columns(bases[t], M.dim(bids[t])) @ v
                else:
                    amb[bids[t]] = bases[t].basis @ v
            pieces.append((desc, amb))
    dec = _assemble(M, [], pieces)
    if verify:
        dec.verify(M)
        oracle = zigzag_multiplicities_oracle(M)
        if oracle != dec.zigzags:
            raise DecompositionError(f"constructive decomposition {dict(dec.zigzags)} disagrees with rank oracle {dict(oracle)}")
    return dec


def _line_arrows(M, kinds, bids, bases, vdims):
    arrows = []
    for t in range(len(kinds) - 1):
        if kinds[t] == "I":
            # C at t+1 maps back to I at t by delbar
            c, i, ci = t + 1, t, "b"
            op = M.db
        else:
            c, i, ci = t, t + 1, "f"
            op = M.d
        cols = []
        for v in bases[c] or []:
            w = op(bids[c]) @ v
            coords = bases[i].coordinates(w) if bases[i] is not None else ()
            if coords is None:
                raise AssertionError("differential of complement leaves exact part")
            cols.append(coords)
        arrows.append((ci, RatMatrix.from_columns(cols, vdims[i])))
    return arrows


def zigzag_multiplicities_oracle(M: Bicomplex) -> Counter:
    """Zig-zag multiset of a minimal bicomplex from rank invariants alone.

    Sources are presented as the quotient V/(ker del ∩ ker delbar), targets as
    im del + im delbar, dots counted by dim H_dot; no basis from the
    constructive path is reused.
    """
    out = Counter()
    for b, n in cohomology_dims(M, "dot").items():
        out[ZigZagDescriptor("A", 0, b)] += n
    quot = {}
    exact = {}
    for b in M.support:
        s = M.spaces(b)
        quot[b] = quotient_present(Subspace.full(M.dim(b)), s.closed)
        exact[b] = s.im_sum
    degs = M.total_degrees()
    if not degs:
        return out
    ps = [p for p, _ in M.support]
    pmin, pmax = min(ps), max(ps)
    for d in range(degs[0] - 1, degs[-1] + 1):
        kinds, bids = [], []
        for p in range(pmin, pmax + 2):
            kinds.append("I")
            bids.append((p, d + 1 - p))
            if p <= pmax:
                kinds.append("C")
                bids.append((p, d - p))
        vdims = [
            (quot[b].dim if b in quot else 0) if k == "C" else (exact[b].dim if b in exact else 0)
            for k, b in zip(kinds, bids)
        ]
        if not any(vdims):
            continue
        arrows = []
        for t in range(len(kinds) - 1):
            if kinds[t] == "I":
                c, i, kind, op = t + 1, t, "b", M.db
            else:
                c, i, kind, op = t, t + 1, "f", M.d
            cols = []
            if bids[c] in quot:
                for r in quot[bids[c]].representatives():
                    cols.append(exact.get(bids[i], Subspace.zero(0)).coordinates(op(bids[c]) @ r))
            arrows.append((kind, RatMatrix.from_columns(cols, vdims[i])))
        # intervals never cross a zero vertex, so each nonzero run is independent
        t = 0
        while t < len(vdims):
            if not vdims[t]:
                t += 1
                continue
            u = t
            while u + 1 < len(vdims) and vdims[u + 1]:
                u += 1
            sub = interval_multiplicities_by_rank(vdims[t:u + 1], arrows[t:u])
            for (a, e), m in sub.items():
                out[_interval_descriptor(kinds, bids, a + t, e + t)] += m
            t = u + 1
    return out


# -- decompositions ------------------------------------------------------------
@dataclass
class Decomposition:
    """Squares (by corner) and zig-zags with an explicit basis change.

    ``order`` lists the summands; ``basis_change[b]`` has as columns, summand
    by summand, the vectors spanning each summand at bidegree b.
    """

    squares: Counter
    zigzags: Counter
    order: list
    basis_change: dict

    def pieces(self) -> list[Bicomplex]:
        out = []
        for kind, item in self.order:
            out.append(square(*item) if kind == "square" else make_zigzag(item))
        return out

    def reassembled(self) -> Bicomplex:
        return direct_sum_all(self.pieces())

    def verify(self, B: Bicomplex) -> None:
        if conjugate(B, self.basis_change) != self.reassembled():
            raise DecompositionError("basis change does not block-diagonalize the input")

    def zigzag_shapes(self) -> Counter:
        """Zig-zag multiset with anchors forgotten."""
        return _shape_counts(self.zigzags)

    def manifest(self) -> dict:
        return {
            "squares": [{"anchor": list(b), "count": n} for b, n in sorted(self.squares.items())],
            "zigzags": [
                {"family": d.family, "parameter": d.parameter, "anchor": list(d.anchor), "count": n}
                for d, n in sorted(self.zigzags.items())
            ],
            "basis_change": {
                f"{p},{q}": m.to_strings() for (p, q), m in sorted(self.basis_change.items())
            },
        }


def _shape_counts(zz: Counter) -> Counter:
    out = Counter()
    for d, n in zz.items():
        out[(d.family, d.parameter)] += n
    return out


def _assemble(B: Bicomplex, square_vectors, pieces) -> Decomposition:
    """Order summands canonically and collect basis vectors bidegree by bidegree."""
    cols: dict[Bidegree, list] = {b: [] for b in B.support}
    order = []
    sq = Counter()
    for anchor, vecs in sorted(square_vectors, key=lambda x: x[0]):
        order.append(("square", anchor))
        sq[anchor] += 1
        for b in sorted(vecs, key=lambda b: (b[0] + b[1], b[0])):
            cols[b].append(vecs[b])
    zz = Counter()
    for desc, vecs in sorted(pieces, key=lambda x: x[0]):
        order.append(("zigzag", desc))
        zz[desc] += 1
        for b in desc.dots():
            cols[b].append(vecs[b])
    change = {}
    for b, vs in cols.items():
        if len(vs) != B.dim(b):
            raise DecompositionError(f"summands span {len(vs)} of {B.dim(b)} dimensions at {b}")
        change[b] = RatMatrix.from_columns(vs, B.dim(b))
    return Decomposition(sq, zz, order, change)


def decompose(B: Bicomplex, verify: bool = True) -> Decomposition:
    """Full structure decomposition: squares plus zig-zags, with basis change."""
    anchors, minimal, basis, family = split_squares(B)
    mdec = zigzag_decompose(minimal, verify=verify)
    square_vectors = []
    sq_vecs: dict[int, dict] = {}
    for b, items in basis.items():
        for label, v in items:
            if label[0] == "sq":
                sq_vecs.setdefault(label[1], {})[b] = v
    for i, anchor in enumerate(anchors):
        square_vectors.append((anchor, sq_vecs[i]))
    # push the minimal-part pieces back to ambient coordinates
    pieces = []
    used: dict[Bidegree, int] = {}
    for kind, item in mdec.order:
        vecs = {}
        for b in item.dots():
            j = used.get(b, 0)
            used[b] = j + 1
            vecs[b] = family[b].basis @ mdec.basis_change[b].column(j)
        pieces.append((item, vecs))
    dec = _assemble(B, square_vectors, pieces)
    if verify:
        dec.verify(B)
    return dec


# -- tensor products of zig-zags ---------------------------------------------------
def zigzag_range(max_n: int) -> list[ZigZagDescriptor]:
    out = [ZigZagDescriptor("A", n) for n in range(-max_n, max_n + 1)]
    out += [ZigZagDescriptor(f, n) for f in "BC" for n in range(1, max_n + 1)]
    return out


def expected_tensor(x: ZigZagDescriptor, y: ZigZagDescriptor) -> tuple[str, Counter]:
    """Clause label and zig-zag shape multiset predicted for x ⊗ y, squares ignored.

    Clauses are read as stated for i <= j and extended to i > j through the
    symmetry of the tensor product; for example C_i ⊗ C_j with i > j is read as
    C_j ⊗ C_i = 2 C_i.
    """
    fx, fy = x.family, y.family
    i, j = x.parameter, y.parameter
    if fx == fy == "A":
        return "i", Counter({("A", i + j): 1})
    if "A" in (fx, fy):
        other = y if fx == "A" else x
        return "ii", Counter({(other.family, other.parameter): 1})
    if fx == fy == "B":
        return "iii-B", Counter({("B", min(i, j)): 2})
    if fx == fy == "C":
        return "iii-C", Counter({("C", max(i, j)): 2})
    return "iv", Counter()


@dataclass(frozen=True)
class TensorRow:
    left: ZigZagDescriptor
    right: ZigZagDescriptor
    clause: str
    expected: Counter
    computed: Counter
    squares: int
    anchors: tuple

    @property
    def ok(self) -> bool:
        return self.expected == self.computed


def _fmt_shapes(c: Counter) -> str:
    if not c:
        return "0"
    return " + ".join(f"{n}{f}{k}" if n > 1 else f"{f}{k}" for (f, k), n in sorted(c.items()))


def tensor_table(max_n: int) -> list[TensorRow]:
    """Decompose every product of zig-zags with parameters up to ``max_n``."""
    shapes = zigzag_range(max_n)
    built = {d: make_zigzag(d) for d in shapes}
    rows = []
    for x in shapes:
        for y in shapes:
            dec = decompose(tensor(built[x], built[y]))
            clause, expected = expected_tensor(x, y)
            anchors = tuple(sorted(d.anchor for d in dec.zigzags.elements()))
            rows.append(
                TensorRow(x, y, clause, expected, dec.zigzag_shapes(), sum(dec.squares.values()), anchors)
            )
    return rows
