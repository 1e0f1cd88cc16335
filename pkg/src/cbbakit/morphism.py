"""Bicomplex maps, induced maps on cohomology, mapping cones and triangles."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from .bicomplex import (
    Bicomplex,
    Bidegree,
    InvalidBicomplex,
    cohomology_at,
    cohomology_dims,
    connectivity,
    direct_sum,
    quotient_complex,
    rev_ell,
    square,
    tensor,
    tensor_layout,
    truncate_with_map,
)
from .exactq import Fraction, RatMatrix, Subspace

__all__ = [
    "BicomplexMap",
    "ConeResult",
    "InvalidMap",
    "validate_map",
    "identity_map",
    "zero_map",
    "compose",
    "induced_map",
    "is_quasi_iso",
    "cone",
    "cone_by_cokernel",
    "reduced_cone",
    "phi_map",
    "map_connectivity",
    "lemma_connectivity",
    "truncation_inclusion",
    "truncation_projection",
    "triangle_checks",
    "exactness_defects",
    "hom_bicomplex",
    "connectedness_conditions",
    "truncation_lemma_checks",
]


class InvalidMap(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


@dataclass(frozen=True, eq=False)
class BicomplexMap:
    """Bidegree-(0,0) map; ``blocks[b]`` is V^b -> W^b, absent blocks are zero."""

    source: Bicomplex
    target: Bicomplex
    blocks: Mapping[Bidegree, RatMatrix] = field(default_factory=dict)

    def __post_init__(self):
        blocks = {}
        for b, m in self.blocks.items():
            if not isinstance(m, RatMatrix):
                m = RatMatrix.from_rows(m, self.source.dim(tuple(b)))
            blocks[tuple(b)] = m
        object.__setattr__(self, "blocks", blocks)

    def block(self, b: Bidegree) -> RatMatrix:
        m = self.blocks.get(b)
        if m is not None and m.shape == (self.target.dim(b), self.source.dim(b)):
            return m
        return RatMatrix.zeros(self.target.dim(b), self.source.dim(b))

    def check(self) -> "BicomplexMap":
        diags = validate_map(self)
        if diags:
            raise InvalidMap(diags)
        return self


def validate_map(f: BicomplexMap) -> list[str]:
    out = []
    V, W = f.source, f.target
    for b, m in sorted(f.blocks.items()):
        want = (W.dim(b), V.dim(b))
        if m.shape != want:
            out.append(f"block at {b} has shape {m.shape}, expected {want}")
    if out:
        return out
    for b in V.support:
        for off, dv, dw, name in (((1, 0), V.d, W.d, "del"), ((0, 1), V.db, W.db, "delbar")):
            t = (b[0] + off[0], b[1] + off[1])
            if not (dw(b) @ f.block(b) - f.block(t) @ dv(b)).is_zero():
                out.append(f"map does not commute with {name} at {b}")
    return out


def identity_map(V: Bicomplex) -> BicomplexMap:
    return BicomplexMap(V, V, {b: RatMatrix.identity(n) for b, n in V.dims.items()})


def zero_map(V: Bicomplex, W: Bicomplex) -> BicomplexMap:
    return BicomplexMap(V, W, {})


def compose(g: BicomplexMap, f: BicomplexMap) -> BicomplexMap:
    """g ∘ f."""
    return BicomplexMap(f.source, g.target, {b: g.block(b) @ f.block(b) for b in f.source.support})


def induced_map(f: BicomplexMap, kind: str) -> dict[Bidegree, RatMatrix]:
    """Per-bidegree matrix of f on the chosen cohomology (quotient coordinates)."""
    f.check()
    out = {}
    for b in sorted(set(f.source.support) | set(f.target.support)):
        qs = cohomology_at(f.source, b, kind) if f.source.dim(b) else None
        qt = cohomology_at(f.target, b, kind) if f.target.dim(b) else None
        ns = qs.dim if qs else 0
        nt = qt.dim if qt else 0
        if not ns and not nt:
            continue
        m = f.block(b)
        cols = []
        if ns and nt:
            for v in qs.modded.vectors():
                if not qt.modded.contains(m @ v):
                    raise AssertionError(f"induced map on {kind} not well defined at {b}")
            for r in qs.representatives():
                cols.append(qt.project(m @ r))
        elif ns:
            cols = [()] * ns
        out[b] = RatMatrix.from_columns(cols, nt) if cols else RatMatrix.zeros(nt, ns)
    return out


def is_quasi_iso(f: BicomplexMap) -> bool:
    for kind in ("BC", "A"):
        for m in induced_map(f, kind).values():
            if m.rows != m.cols or m.rank() != m.rows:
                return False
    return True


# -- cones ---------------------------------------------------------------------
@dataclass(frozen=True)
class ConeResult:
    """Cone(f) = W ⊕ V[1]; at bidegree (p,q) the slots are
    W^{p,q}, c ∈ V^{p+1,q}, a ∈ V^{p+1,q+1}, b ∈ V^{p,q+1} in that order."""

    cone: Bicomplex
    inclusion: BicomplexMap
    slots: Mapping[Bidegree, dict]

    def slot(self, b: Bidegree, name: str) -> range:
        return self.slots[b][name]


def _cone_slots(V: Bicomplex, W: Bicomplex):
    keys = set(W.support)
    for p, q in V.support:
        keys |= {(p - 1, q), (p - 1, q - 1), (p, q - 1)}
    slots = {}
    for p, q in keys:
        sizes = [("w", W.dim((p, q))), ("c", V.dim((p + 1, q))), ("a", V.dim((p + 1, q + 1))), ("b", V.dim((p, q + 1)))]
        off = 0
        s = {}
        for name, n in sizes:
            s[name] = range(off, off + n)
            off += n
        if off:
            slots[(p, q)] = s
    return slots


def cone(f: BicomplexMap) -> ConeResult:
    """Mapping cone with the explicit differentials

    del(w, c, a, b)    = (del w - f c, -del c, del a, a - del b)
    delbar(w, c, a, b) = (delbar w + f b, a - delbar c, delbar a, -delbar b)
    """
    f.check()
    V, W = f.source, f.target
    slots = _cone_slots(V, W)
    dims = {b: s["b"].stop for b, s in slots.items()}

    def put(m, rows, cols, blk, sign=1):
        for i, r in zip(rows, blk.entries):
            for j, x in zip(cols, r):
                if x:
                    m[i][j] += sign * x

    delta, deltabar = {}, {}
    for (p, q), s in slots.items():
        for off, out in (((1, 0), delta), ((0, 1), deltabar)):
            t = (p + off[0], q + off[1])
            if t not in slots:
                continue
            st = slots[t]
            m = [[Fraction(0)] * dims[(p, q)] for _ in range(dims[t])]
            if off == (1, 0):
                put(m, st["w"], s["w"], W.d((p, q)))
                put(m, st["w"], s["c"], f.block((p + 1, q)), -1)
                put(m, st["c"], s["c"], V.d((p + 1, q)), -1)
                put(m, st["a"], s["a"], V.d((p + 1, q + 1)))
                put(m, st["b"], s["a"], RatMatrix.identity(V.dim((p + 1, q + 1))))
                put(m, st["b"], s["b"], V.d((p, q + 1)), -1)
            else:
                put(m, st["w"], s["w"], W.db((p, q)))
                put(m, st["w"], s["b"], f.block((p, q + 1)))
                put(m, st["c"], s["a"], RatMatrix.identity(V.dim((p + 1, q + 1))))
                put(m, st["c"], s["c"], V.db((p + 1, q)), -1)
                put(m, st["a"], s["a"], V.db((p + 1, q + 1)))
                put(m, st["b"], s["b"], V.db((p, q + 1)), -1)
            out[(p, q)] = RatMatrix.from_rows(m, dims[(p, q)])
    C = Bicomplex(dims, delta, deltabar)
    C.check()
    incl = {}
    for b in W.support:
        n = dims[b]
        incl[b] = RatMatrix.from_columns(
            [tuple(Fraction(1) if i == j else Fraction(0) for i in range(n)) for j in slots[b]["w"]], n
        )
    return ConeResult(C, BicomplexMap(W, C, incl), slots)


def cone_by_cokernel(f: BicomplexMap) -> Bicomplex:
    """coker(V -> W ⊕ □⊗V), the □ corner ∂∂̄x sitting in bidegree (0,0)."""
    f.check()
    V, W = f.source, f.target
    sq = square(-1, -1)
    SV = tensor(sq, V)
    total = direct_sum(W, SV)
    layout = tensor_layout(sq, V)
    family = {}
    for b in V.support:
        rows, _ = layout[b]
        off = next(o for b1, b2, o in rows if b1 == (0, 0))
        n = total.dim(b)
        vecs = []
        fb = f.block(b)
        for j in range(V.dim(b)):
            v = [Fraction(0)] * n
            for i in range(W.dim(b)):
                v[i] = fb[i, j]
            v[W.dim(b) + off + j] = Fraction(1)
            vecs.append(v)
        family[b] = Subspace.span(n, vecs)
    return quotient_complex(total, family)[0]


def reduced_cone(W: Bicomplex, V: Bicomplex, phi: Mapping, phibar: Mapping) -> Bicomplex:
    """W ⊕ V with del(w, v) = (del w + phi v, del v), delbar likewise.

    ``phi[b]``: V^b -> W^{b+(1,0)}, ``phibar[b]``: V^b -> W^{b+(0,1)}.
    """
    keys = set(W.support) | set(V.support)
    dims = {b: W.dim(b) + V.dim(b) for b in keys}
    delta, deltabar = {}, {}
    for b in keys:
        for off, dw, dv, ph, out in (((1, 0), W.d, V.d, phi, delta), ((0, 1), W.db, V.db, phibar, deltabar)):
            t = (b[0] + off[0], b[1] + off[1])
            if t not in dims:
                continue
            blk = ph.get(b)
            if blk is None:
                blk = RatMatrix.zeros(W.dim(t), V.dim(b))
            elif not isinstance(blk, RatMatrix):
                blk = RatMatrix.from_rows(blk, V.dim(b))
            top = dw(b).hstack(blk)
            bot = RatMatrix.zeros(V.dim(t), W.dim(b)).hstack(dv(b))
            out[b] = top.vstack(bot)
    R = Bicomplex(dims, delta, deltabar)
    diags = []
    for b in V.support:
        pb = _blk(phi, b, W.dim((b[0] + 1, b[1])), V.dim(b))
        pbb = _blk(phibar, b, W.dim((b[0], b[1] + 1)), V.dim(b))
        checks = [
            ("del_W phi + phi del_V = 0", W.d((b[0] + 1, b[1])) @ pb + _blk(phi, (b[0] + 1, b[1]), W.dim((b[0] + 2, b[1])), V.dim((b[0] + 1, b[1]))) @ V.d(b)),
            ("delbar_W phibar + phibar delbar_V = 0", W.db((b[0], b[1] + 1)) @ pbb + _blk(phibar, (b[0], b[1] + 1), W.dim((b[0], b[1] + 2)), V.dim((b[0], b[1] + 1))) @ V.db(b)),
            (
                "del_W phibar + phi delbar_V + delbar_W phi + phibar del_V = 0",
                W.d((b[0], b[1] + 1)) @ pbb
                + _blk(phi, (b[0], b[1] + 1), W.dim((b[0] + 1, b[1] + 1)), V.dim((b[0], b[1] + 1))) @ V.db(b)
                + W.db((b[0] + 1, b[1])) @ pb
                + _blk(phibar, (b[0] + 1, b[1]), W.dim((b[0] + 1, b[1] + 1)), V.dim((b[0] + 1, b[1]))) @ V.d(b),
            ),
        ]
        for name, m in checks:
            if not m.is_zero():
                diags.append(f"{name} fails at {b}")
    if diags:
        raise InvalidBicomplex(diags)
    return R.check()


def _blk(m: Mapping, b, rows, cols) -> RatMatrix:
    x = m.get(b)
    if x is None:
        return RatMatrix.zeros(rows, cols)
    if not isinstance(x, RatMatrix):
        x = RatMatrix.from_rows(x, cols)
    return x


def phi_map(W: Bicomplex, V: Bicomplex, phi: Mapping, phibar: Mapping) -> BicomplexMap:
    """The map Φ: V[-1] -> W assembled from (φ, φ̄).

    V[-1] = revL ⊗ V with revL = {y (0,1) -del-> x (1,1) <-delbar- z (1,0)}.
    Since delbar z = x = del y while delbar del = -del delbar, the element
    playing the role of "del" is -z and that of "delbar" is y:
    Φ(z⊗v) = -φ v, Φ(y⊗v) = φ̄ v, Φ(x⊗v) = del_W φ̄ v + φ̄ del_V v.
    This is a chain map exactly when (φ, φ̄) satisfies the identities
    checked by :func:`reduced_cone`.
    """
    L = rev_ell()
    S = tensor(L, V)
    layout = tensor_layout(L, V)
    blocks = {}
    for t, (rows, n) in layout.items():
        m = [[Fraction(0)] * n for _ in range(W.dim(t))]
        for b1, b2, off in rows:
            nv = V.dim(b2)
            if b1 == (1, 0):
                blk = -_blk(phi, b2, W.dim(t), nv)
            elif b1 == (0, 1):
                blk = _blk(phibar, b2, W.dim(t), nv)
            else:
                mid = (b2[0], b2[1] + 1)
                blk = W.d(mid) @ _blk(phibar, b2, W.dim(mid), nv) + _blk(
                    phibar, (b2[0] + 1, b2[1]), W.dim(t), V.dim((b2[0] + 1, b2[1]))
                ) @ V.d(b2)
            for i, r in enumerate(blk.entries):
                for j, x in enumerate(r):
                    m[i][off + j] = x
        if W.dim(t):
            blocks[t] = RatMatrix.from_rows(m, n)
    return BicomplexMap(S, W, blocks)


# -- connectivity of maps -------------------------------------------------------
def lemma_connectivity(f: BicomplexMap) -> float:
    """Largest k with H_A^{<=k-1}(f) surjective and H_BC^{<=k+1}(f) injective."""
    bad_surj = [b[0] + b[1] for b, m in induced_map(f, "A").items() if m.rank() != m.rows]
    bad_inj = [b[0] + b[1] for b, m in induced_map(f, "BC").items() if m.rank() != m.cols]
    s = min(bad_surj) if bad_surj else math.inf
    t = min(bad_inj) if bad_inj else math.inf
    return min(s, t - 2)


def map_connectivity(f: BicomplexMap) -> float:
    """connectivity(Cone f) + 1, cross-checked against the surjective/injective criterion."""
    k = connectivity(cone(f).cone) + 1
    k2 = lemma_connectivity(f)
    if k != k2:
        raise AssertionError(f"cone connectivity gives {k}, induced-map criterion gives {k2}")
    return k


# -- truncation maps and triangles --------------------------------------------------
def truncation_inclusion(B: Bicomplex, k: int) -> BicomplexMap:
    T, incl = truncate_with_map(B, k, "below")
    return BicomplexMap(T, B, incl)


def truncation_projection(B: Bicomplex, k: int) -> BicomplexMap:
    T, proj = truncate_with_map(B, k, "above")
    return BicomplexMap(B, T, proj)


def triangle_checks(B: Bicomplex, k: int) -> dict:
    """Check that τ≤k B -> B -> τ≥k+1 B is distinguished.

    The canonical map Cone(τ≤k B -> B) -> τ≥k+1 B, (w, c, a, b) ↦ π(w), must
    be a quasi-isomorphism.
    """
    B.check()
    i = truncation_inclusion(B, k)
    p = truncation_projection(B, k + 1)
    comp_zero = all(m.is_zero() for m in compose(p, i).blocks.values())
    cr = cone(i)
    C = cr.cone
    blocks = {}
    for b in C.support:
        if p.target.dim(b):
            m = [[Fraction(0)] * C.dim(b) for _ in range(p.target.dim(b))]
            pb = p.block(b)
            for r in range(pb.rows):
                for j, col in enumerate(cr.slot(b, "w")):
                    m[r][col] = pb[r, j]
            blocks[b] = RatMatrix.from_rows(m, C.dim(b))
    g = BicomplexMap(C, p.target, blocks)
    diags = validate_map(g)
    qiso = not diags and is_quasi_iso(g)
    return {
        "k": k,
        "composite_zero": comp_zero,
        "chain_map": not diags,
        "quasi_isomorphism": qiso,
        "passed": comp_zero and not diags and qiso,
    }


def exactness_defects(f: BicomplexMap, kind: str = "A") -> list[Bidegree]:
    """Bidegrees where im H(f) != ker(H(W) -> H(Cone f)) fails dimensionwise."""
    cr = cone(f)
    fa = induced_map(f, kind)
    ia = induced_map(cr.inclusion, kind)
    bad = []
    for b in f.target.support:
        dw = cohomology_at(f.target, b, kind).dim
        if not dw:
            continue
        r = fa[b].rank() if b in fa else 0
        ri = ia[b].rank() if b in ia else 0
        if r + ri != dw:
            bad.append(b)
    return bad


def hom_bicomplex(X: Bicomplex, Y: Bicomplex) -> Bicomplex:
    """Hom(X, Y) with d psi = d_Y psi - (-1)^|psi| psi d_X (same for dbar).

    The basis of Hom^u runs over source bidegrees b of X (sorted), then the
    source basis index j, then the target index i in Y^{b+u}.
    """
    def basis(u):
        out = []
        for b in X.support:
            t = (b[0] + u[0], b[1] + u[1])
            for j in range(X.dim(b)):
                for i in range(Y.dim(t)):
                    out.append((b, j, i))
        return out

    us = sorted({(t[0] - b[0], t[1] - b[1]) for b in X.support for t in Y.support})
    bases = {u: basis(u) for u in us}
    dims = {u: len(v) for u, v in bases.items() if v}
    delta, deltabar = {}, {}
    for u in dims:
        sign = -1 if (u[0] + u[1]) % 2 else 1
        for off, dx, dy, out in (((1, 0), X.d, Y.d, delta), ((0, 1), X.db, Y.db, deltabar)):
            v = (u[0] + off[0], u[1] + off[1])
            if v not in dims:
                continue
            pos = {k: n for n, k in enumerate(bases[v])}
            rows = [[Fraction(0)] * dims[u] for _ in range(dims[v])]
            for col, (b, j, i) in enumerate(bases[u]):
                t = (b[0] + u[0], b[1] + u[1])
                # d_Y applied to the elementary map e_j -> f_i
                my = dy(t)
                t2 = (t[0] + off[0], t[1] + off[1])
                for i2 in range(Y.dim(t2)):
                    x = my[i2, i]
                    if x:
                        rows[pos[(b, j, i2)]][col] += x
                # -sign * psi d_X: contributes on sources b0 with d_X b0 -> b
                b0 = (b[0] - off[0], b[1] - off[1])
                mx = dx(b0)
                for j0 in range(X.dim(b0)):
                    x = mx[j, j0]
                    if x:
                        rows[pos[(b0, j0, i)]][col] -= sign * x
            out[u] = RatMatrix.from_rows(rows, dims[u])
    return Bicomplex(dims, delta, deltabar)


def connectedness_conditions(B: Bicomplex, k: int) -> dict[str, bool]:
    """The four equivalent forms of "B is k-connected", each computed on its own."""
    from .bicomplex import cohomology_bicomplex, is_contractible, truncate

    B.check()
    lo = min(B.total_degrees(), default=0) - 1
    return {
        "truncation_contractible": is_contractible(truncate(B, k, "below")),
        "projection_quasi_iso": is_quasi_iso(truncation_projection(B, k + 1)),
        "cohomology_bicomplexes_vanish": all(
            cohomology_bicomplex(B, i).total_dim == 0 for i in range(lo, k + 1)
        ),
        "aeppli_vanishes": all(p + q > k for p, q in cohomology_dims(B, "A")),
    }


def truncation_lemma_checks(B: Bicomplex, k: int) -> dict[str, bool]:
    """Dimension form of the truncation lemma for τ≤k and τ≥k.

    τ≤k B has no H^i for i >= k+1 and the same H^i as B for i <= k; τ≥k B
    has no H^i for i <= k-1 and the same H^i as B for i >= k.
    """
    from .bicomplex import cohomology_bicomplex, truncate

    B.check()
    below, above = truncate(B, k, "below"), truncate(B, k, "above")
    degs = B.total_degrees()
    lo, hi = (min(degs) - 2, max(degs) + 2) if degs else (k - 2, k + 2)
    lo, hi = min(lo, k - 2), max(hi, k + 2)
    H = lambda X, i: cohomology_bicomplex(X, i).dims
    rng = range(lo, hi + 1)
    return {
        "below_vanishes_above_k": all(not H(below, i) for i in rng if i >= k + 1),
        "below_matches_up_to_k": all(H(below, i) == H(B, i) for i in rng if i <= k),
        "above_vanishes_below_k": all(not H(above, i) for i in rng if i <= k - 1),
        "above_matches_from_k": all(H(above, i) == H(B, i) for i in rng if i >= k),
    }
