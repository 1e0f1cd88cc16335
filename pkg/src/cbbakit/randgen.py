"""Seeded random bicomplexes and maps built from known summands."""
from __future__ import annotations

import random
from collections import Counter

from .bicomplex import Bicomplex, conjugate, direct_sum_all, square
from .decomp import ZigZagDescriptor, make_zigzag
from .exactq import RatMatrix
from .morphism import BicomplexMap, validate_map


def random_invertible(rng: random.Random, n: int, lo: int = -2, hi: int = 2) -> RatMatrix:
    while True:
        m = RatMatrix.from_rows([[rng.randint(lo, hi) for _ in range(n)] for _ in range(n)], n)
        if m.rank() == n:
            return m


def random_descriptor(rng: random.Random, max_param: int = 3, box: int = 2) -> ZigZagDescriptor:
    fam = rng.choice("AABC")
    if fam == "A":
        n = rng.randint(-max_param, max_param)
    else:
        n = rng.randint(1, max_param)
    return ZigZagDescriptor(fam, n, (rng.randint(-box, box), rng.randint(-box, box)))


def random_pieces(rng: random.Random, max_dim: int = 12, max_param: int = 3, box: int = 2):
    """Random list of ("square", anchor) / ("zigzag", descriptor) with total dim <= max_dim."""
    pieces = []
    total = 0
    target = rng.randint(1, max_dim)
    while total < target:
        if rng.random() < 0.3:
            if total + 4 > max_dim:
                break
            a = (rng.randint(-box, box), rng.randint(-box, box))
            pieces.append(("square", a))
            total += 4
        else:
            d = random_descriptor(rng, max_param, box)
            if total + d.total_dim > max_dim:
                if total:
                    break
                continue
            pieces.append(("zigzag", d))
            total += d.total_dim
    return pieces


def build(pieces) -> Bicomplex:
    return direct_sum_all(square(*x) if k == "square" else make_zigzag(x) for k, x in pieces)


def scramble(rng: random.Random, B: Bicomplex):
    change = {b: random_invertible(rng, n) for b, n in B.dims.items()}
    return conjugate(B, change), change


def random_bicomplex(rng: random.Random, max_dim: int = 12, **kw):
    """Scrambled sum of random pieces; returns (bicomplex, squares Counter, zig-zag Counter)."""
    pieces = random_pieces(rng, max_dim, **kw)
    B, _ = scramble(rng, build(pieces))
    sq = Counter(a for k, a in pieces if k == "square")
    zz = Counter(d for k, d in pieces if k == "zigzag")
    return B, sq, zz


def random_map(rng: random.Random, V: Bicomplex, W: Bicomplex) -> BicomplexMap:
    """A random chain map V -> W, found as a random point of the solution space."""
    from fractions import Fraction

    from .exactq import kernel

    # unknowns: all entries of all blocks at common bidegrees
    common = [b for b in V.support if W.dim(b)]
    index = {}
    n = 0
    for b in common:
        index[b] = n
        n += W.dim(b) * V.dim(b)
    if n == 0:
        return BicomplexMap(V, W, {})
    rows = []

    def var(b, i, j):
        return index[b] + i * V.dim(b) + j

    for b in V.support:
        for off, dv, dw in (((1, 0), V.d, W.d), ((0, 1), V.db, W.db)):
            t = (b[0] + off[0], b[1] + off[1])
            # dw(b) f_b - f_t dv(b) = 0, entry (i, j) with i in W^t, j in V^b
            for i in range(W.dim(t)):
                for j in range(V.dim(b)):
                    row = [Fraction(0)] * n
                    if b in index:
                        for k in range(W.dim(b)):
                            x = dw(b)[i, k]
                            if x:
                                row[var(b, k, j)] += x
                    if t in index:
                        for k in range(V.dim(t)):
                            x = dv(b)[k, j]
                            if x:
                                row[var(t, i, k)] -= x
                    if any(row):
                        rows.append(row)
    sols = kernel(RatMatrix.from_rows(rows, n)).vectors() if rows else RatMatrix.identity(n).columns()
    x = [Fraction(0)] * n
    for s in sols:
        c = rng.randint(-2, 2)
        if c:
            x = [a + c * y for a, y in zip(x, s)]
    blocks = {}
    for b in common:
        o = index[b]
        blocks[b] = RatMatrix.from_rows(
            [[x[o + i * V.dim(b) + j] for j in range(V.dim(b))] for i in range(W.dim(b))], V.dim(b)
        )
    f = BicomplexMap(V, W, blocks)
    assert not validate_map(f)
    return f


# -- cbba's and Hirsch extensions ------------------------------------------------
def _random_vec(rng: random.Random, basis, lo: int = -2, hi: int = 2):
    from fractions import Fraction

    n = len(basis[0]) if basis else 0
    x = [Fraction(0)] * n
    for s in basis:
        c = rng.randint(lo, hi)
        if c:
            x = [a + c * y for a, y in zip(x, s)]
    return tuple(x)


def random_cbba(rng: random.Random, max_gens: int = 3, N: int = 6, max_degree: int = 3):
    """Free cbba whose generator differentials are random solutions of d^2 = 0 in earlier generators."""
    from .exactq import kernel
    from .hirsch import Generator, TruncatedCbba

    k = rng.randint(1, max_gens)
    gens = []
    for n in range(k):
        deg = rng.choice([d for d in (1, 1, 2, 2, 3) if d <= max_degree])
        p = rng.randint(0, deg)
        gens.append(Generator(f"a{n}", p, deg - p))
    gens.sort(key=lambda g: (g.degree, g.p, g.name))
    dd, ddb = {}, {}
    for n, g in enumerate(gens):
        cut = lambda e: {m[:n]: c for m, c in e.items()}
        prev = TruncatedCbba(gens[:n], N, {a: cut(e) for a, e in dd.items()}, {a: cut(e) for a, e in ddb.items()})
        P = prev.as_bicomplex()
        ba, bb = (g.p + 1, g.q), (g.p, g.q + 1)
        na, nb = P.dim(ba), P.dim(bb)
        if not (na or nb) or rng.random() < 0.3:
            continue
        top = P.d(ba).hstack(RatMatrix.zeros(P.dim((g.p + 2, g.q)), nb))
        mid = RatMatrix.zeros(P.dim((g.p, g.q + 2)), na).hstack(P.db(bb))
        bot = P.db(ba).hstack(P.d(bb))
        sols = kernel(top.vstack(mid).vstack(bot)).vectors()
        x = _random_vec(rng, sols)
        pad = (0,) * (k - n)
        dd[g.name] = {m + pad: c for m, c in prev.element(x[:na], ba).items()}
        ddb[g.name] = {m + pad: c for m, c in prev.element(x[na:], bb).items()}
    A = TruncatedCbba(gens, N, dd, ddb)
    A.check()
    return A


def random_small_v(rng: random.Random, max_dim: int = 3) -> Bicomplex:
    """Scrambled sum of dots and short zig-zags placed in p, q >= 0 with total degree >= 1."""
    from .bicomplex import translate

    shapes = [("A", 1), ("A", -1), ("B", 1), ("C", 1), ("A", 0)]
    parts, total = [], 0
    while total < max_dim:
        fam, n = rng.choice(shapes)
        z = make_zigzag(ZigZagDescriptor(fam, n, (0, 0)))
        if total + z.total_dim > max_dim:
            if total:
                break
            continue
        p0, _, q0, _ = z.bounding_box()
        dp, dq = rng.randint(0, 1), rng.randint(0, 1)
        if -p0 + dp + -q0 + dq + p0 + q0 < 1:
            dp += 1
        z = translate(z, -p0 + dp, -q0 + dq)
        parts.append(z)
        total += z.total_dim
        if rng.random() < 0.4:
            break
    return scramble(rng, direct_sum_all(parts))[0]


def random_system(rng: random.Random, A, V, tries: int = 25):
    """A commuting pair of local systems, often zero, found by rejection."""
    from .hirsch import LocalSystemPair, validate_system, vbasis

    vb = vbasis(V)
    P = A.as_bicomplex()
    eligible = {}
    for which, off in (("del", (1, 0)), ("delbar", (0, 1))):
        eligible[which] = []
        for j in range(len(vb)):
            for i in range(len(vb)):
                b = (vb[j][0] + off[0] - vb[i][0], vb[j][1] + off[1] - vb[i][1])
                if sum(b) >= 1 and A.dim(b):
                    eligible[which].append((j, i, b))
    for _ in range(tries):
        ent = {"del": {}, "delbar": {}}
        for which in ("del", "delbar"):
            if not eligible[which] or rng.random() < 0.35:
                continue
            for _ in range(rng.choice((1, 1, 2))):
                j, i, b = rng.choice(eligible[which])
                closed = P.spaces(b).closed.vectors()
                if closed and rng.random() < 0.7:
                    vec = _random_vec(rng, closed)
                else:
                    vec = [rng.randint(-2, 2) for _ in A.basis(b)]
                coeff = A.element(vec, b)
                if coeff:
                    ent[which].setdefault(j, []).append((i, coeff))
        sys = LocalSystemPair(V, ent["del"], ent["delbar"])
        if not validate_system(sys, A):
            return sys
    return LocalSystemPair.zero(V)


def random_phi(rng: random.Random, A, sys, valid: bool = True):
    """(phi, phibar) solving the structure equations, or arbitrary ones when ``valid`` is False."""
    from .exactq import kernel
    from .hirsch import _TwistedOps

    ops = _TwistedOps(A, sys)
    n1, n2 = len(ops.hom_basis((1, 0))), len(ops.hom_basis((0, 1)))
    if not valid:
        x = [rng.randint(-1, 1) for _ in range(n1 + n2)]
    else:
        D10, Db10 = ops.matrix("del", (1, 0)), ops.matrix("delbar", (1, 0))
        D01, Db01 = ops.matrix("del", (0, 1)), ops.matrix("delbar", (0, 1))
        top = D10.hstack(RatMatrix.zeros(D10.rows, n2))
        mid = RatMatrix.zeros(Db01.rows, n1).hstack(Db01)
        bot = Db10.hstack(D01)
        x = _random_vec(rng, kernel(top.vstack(mid).vstack(bot)).vectors()) if n1 + n2 else ()
    return ops.from_vec(x[:n1], (1, 0)), ops.from_vec(x[n1:], (0, 1))


def random_extension(rng: random.Random, valid: bool = True, max_gens: int = 3, N: int = 6, max_v: int = 3):
    from .hirsch import HirschExtension

    A = random_cbba(rng, max_gens=max_gens, N=N)
    V = random_small_v(rng, max_v)
    sys = random_system(rng, A, V)
    phi, phibar = random_phi(rng, A, sys, valid)
    return HirschExtension(A, sys, phi, phibar)


def random_relative_automorphism(rng: random.Random, ext):
    """Random H: V -> A of bidegree (0,0), as a dict of elements."""
    from .hirsch import _TwistedOps

    ops = _TwistedOps(ext.base, ext.system)
    return ops.from_vec([rng.randint(-2, 2) for _ in ops.hom_basis((0, 0))], (0, 0))
