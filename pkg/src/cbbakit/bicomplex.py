"""Finite bicomplexes over Q and their intrinsic invariants."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

from .exactq import (
    Fraction,
    QuotientPresentation,
    RatMatrix,
    Subspace,
    block_diag,
    image,
    kernel,
    kron,
    quotient_present,
    sum_and_intersection,
)

Bidegree = tuple[int, int]

KINDS = ("BC", "BC_red", "dot", "A", "A_red", "Dol_del", "Dol_delbar")

DEL = (1, 0)
DELBAR = (0, 1)


def _add(a: Bidegree, b: Bidegree) -> Bidegree:
    return (a[0] + b[0], a[1] + b[1])


class InvalidBicomplex(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


class _Spaces(NamedTuple):
    ker_del: Subspace
    ker_delbar: Subspace
    closed: Subspace  # ker del ∩ ker delbar
    ker_ddbar: Subspace
    im_del: Subspace
    im_delbar: Subspace
    im_ddbar: Subspace
    im_sum: Subspace  # im del + im delbar


@dataclass(frozen=True, eq=False)
class Bicomplex:
    """Bigraded space with anticommuting differentials of bidegree (1,0), (0,1).

    ``dims`` maps bidegrees to dimensions (zeros dropped).  ``delta[b]`` is
    the block V^b -> V^{b+(1,0)} and ``deltabar[b]`` the block
    V^b -> V^{b+(0,1)}; absent blocks are zero maps.
    """

    dims: Mapping[Bidegree, int]
    delta: Mapping[Bidegree, RatMatrix] = field(default_factory=dict)
    deltabar: Mapping[Bidegree, RatMatrix] = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        dims = {tuple(b): int(n) for b, n in self.dims.items() if n}
        if any(n < 0 for n in dims.values()):
            raise ValueError("negative dimension")
        object.__setattr__(self, "dims", dims)
        for name, off in (("delta", DEL), ("deltabar", DELBAR)):
            blocks = {}
            for b, m in getattr(self, name).items():
                b = tuple(b)
                if not isinstance(m, RatMatrix):
                    m = list(m)
                    m = RatMatrix.from_rows(m, len(m[0]) if m else dims.get(b, 0))
                want = (dims.get(_add(b, off), 0), dims.get(b, 0))
                if m.shape != want:
                    raise ValueError(f"{name} block at {b} has shape {m.shape}, expected {want}")
                if want[0] and want[1] and not m.is_zero():
                    blocks[b] = m
            object.__setattr__(self, name, blocks)

    # -- basic accessors -------------------------------------------------
    @classmethod
    def zero(cls) -> "Bicomplex":
        return cls({})

    def dim(self, b: Bidegree) -> int:
        return self.dims.get(b, 0)

    @property
    def total_dim(self) -> int:
        return sum(self.dims.values())

    @property
    def support(self) -> list[Bidegree]:
        return sorted(self.dims)

    def total_degrees(self) -> list[int]:
        return sorted({p + q for p, q in self.dims})

    def d(self, b: Bidegree) -> RatMatrix:
        m = self.delta.get(b)
        return m if m is not None else RatMatrix.zeros(self.dim(_add(b, DEL)), self.dim(b))

    def db(self, b: Bidegree) -> RatMatrix:
        m = self.deltabar.get(b)
        return m if m is not None else RatMatrix.zeros(self.dim(_add(b, DELBAR)), self.dim(b))

    def ddb(self, b: Bidegree) -> RatMatrix:
        """The composite del∘delbar out of V^b."""
        return self.d(_add(b, DELBAR)) @ self.db(b)

    def is_minimal(self) -> bool:
        return all(self.ddb(b).is_zero() for b in self.dims)

    def __eq__(self, other):
        if not isinstance(other, Bicomplex):
            return NotImplemented
        return self.dims == other.dims and self.delta == other.delta and self.deltabar == other.deltabar

    def __repr__(self):
        return f"Bicomplex(dims={dict(sorted(self.dims.items()))})"

    def validate(self) -> list[str]:
        """Diagnostics for every failing block; empty iff this is a bicomplex."""
        out = []
        for b in sorted(self.dims):
            if not (self.d(_add(b, DEL)) @ self.d(b)).is_zero():
                out.append(f"del^2 != 0 at {b}")
            if not (self.db(_add(b, DELBAR)) @ self.db(b)).is_zero():
                out.append(f"delbar^2 != 0 at {b}")
            anti = self.d(_add(b, DELBAR)) @ self.db(b) + self.db(_add(b, DEL)) @ self.d(b)
            if not anti.is_zero():
                out.append(f"del delbar + delbar del != 0 at {b}")
        return out

    def check(self) -> "Bicomplex":
        if self._cache.get("valid"):
            return self
        diags = self.validate()
        if diags:
            raise InvalidBicomplex(diags)
        self._cache["valid"] = True
        return self

    # -- subspaces ---------------------------------------------------------
    def spaces(self, b: Bidegree) -> _Spaces:
        key = ("spaces", b)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        n = self.dim(b)
        kd = kernel(self.d(b))
        kdb = kernel(self.db(b))
        closed = kernel(self.d(b).vstack(self.db(b)))
        kddb = kernel(self.ddb(b))
        imd = image(self.d((b[0] - 1, b[1]))) if n else Subspace.zero(0)
        imdb = image(self.db((b[0], b[1] - 1))) if n else Subspace.zero(0)
        imddb = image(self.ddb((b[0] - 1, b[1] - 1))) if n else Subspace.zero(0)
        imsum = sum_and_intersection(imd, imdb)[0]
        s = _Spaces(kd, kdb, closed, kddb, imd, imdb, imddb, imsum)
        self._cache[key] = s
        return s

    def bounding_box(self):
        if not self.dims:
            return None
        ps = [p for p, _ in self.dims]
        qs = [q for _, q in self.dims]
        return (min(ps), max(ps), min(qs), max(qs))


def bicomplex(dims, delta=None, deltabar=None) -> Bicomplex:
    """Convenience constructor accepting plain nested lists for blocks."""
    return Bicomplex(dict(dims), dict(delta or {}), dict(deltabar or {}))


# -- fixtures ---------------------------------------------------------------
def dot(p: int = 0, q: int = 0) -> Bicomplex:
    return Bicomplex({(p, q): 1})


def square(p: int = 0, q: int = 0) -> Bicomplex:
    """Square with corner x at (p,q); basis x, del x, delbar x, del delbar x."""
    one = [[1]]
    return bicomplex(
        {(p, q): 1, (p + 1, q): 1, (p, q + 1): 1, (p + 1, q + 1): 1},
        {(p, q): one, (p, q + 1): one},
        {(p, q): one, (p + 1, q): [[-1]]},
    )


def ell() -> Bicomplex:
    """The L shape used for V[1]: x at (-1,-1) with del x and delbar x."""
    return bicomplex({(-1, -1): 1, (0, -1): 1, (-1, 0): 1}, {(-1, -1): [[1]]}, {(-1, -1): [[1]]})


def rev_ell() -> Bicomplex:
    """The reversed L used for V[-1]: y -> x <- z with corner x at (1,1)."""
    return bicomplex({(0, 1): 1, (1, 0): 1, (1, 1): 1}, {(0, 1): [[1]]}, {(1, 0): [[1]]})


# -- cohomology ---------------------------------------------------------------
@dataclass(frozen=True)
class CohomologyTable:
    kind: str
    entries: Mapping[Bidegree, QuotientPresentation]

    def dims(self) -> dict[Bidegree, int]:
        return {b: q.dim for b, q in sorted(self.entries.items()) if q.dim}

    def dim(self, b: Bidegree) -> int:
        q = self.entries.get(b)
        return q.dim if q is not None else 0

    def total(self, i: int) -> int:
        return sum(q.dim for (p, r), q in self.entries.items() if p + r == i)

    def is_zero(self) -> bool:
        return not self.dims()


def cohomology_at(B: Bicomplex, b: Bidegree, kind: str) -> QuotientPresentation:
    key = ("coh", kind, b)
    hit = B._cache.get(key)
    if hit is not None:
        return hit
    s = B.spaces(b)
    if kind == "BC":
        num, den = s.closed, s.im_ddbar
    elif kind == "BC_red":
        num, den = s.closed & s.im_sum, s.im_ddbar
    elif kind == "dot":
        num, den = s.closed, s.closed & s.im_sum
    elif kind == "A":
        num, den = s.ker_ddbar, s.im_sum
    elif kind == "A_red":
        num, den = s.ker_ddbar, s.closed + s.im_sum
    elif kind == "Dol_del":
        num, den = s.ker_del, s.im_del
    elif kind == "Dol_delbar":
        num, den = s.ker_delbar, s.im_delbar
    else:
        raise ValueError(f"unknown cohomology kind {kind!r}; expected one of {KINDS}")
    q = quotient_present(num, den)
    B._cache[key] = q
    return q


def cohomology(B: Bicomplex, kind: str) -> CohomologyTable:
    if kind not in KINDS:
        raise ValueError(f"unknown cohomology kind {kind!r}; expected one of {KINDS}")
    B.check()
    return CohomologyTable(kind, {b: cohomology_at(B, b, kind) for b in B.support})


def cohomology_dims(B: Bicomplex, kind: str) -> dict[Bidegree, int]:
    return {b: n for b in B.support if (n := cohomology_at(B, b, kind).dim)}


def is_contractible(B: Bicomplex) -> bool:
    B.check()
    return not cohomology_dims(B, "BC") and not cohomology_dims(B, "A")


# -- sub- and quotient complexes -----------------------------------------
def _restrict(B: Bicomplex, family: Mapping[Bidegree, Subspace]):
    dims = {b: s.dim for b, s in family.items() if s.dim}
    delta, deltabar = {}, {}
    for b in dims:
        src = family[b].vectors()
        for off, op, out in ((DEL, B.d, delta), (DELBAR, B.db, deltabar)):
            t = _add(b, off)
            tgt = family.get(t)
            cols = []
            for v in src:
                w = op(b) @ v
                if tgt is None or tgt.dim == 0:
                    if any(w):
                        raise AssertionError(f"family not closed under differential at {b}")
                    continue
                c = tgt.coordinates(w)
                if c is None:
                    raise AssertionError(f"family not closed under differential at {b}")
                cols.append(c)
            if tgt is not None and tgt.dim:
                out[b] = RatMatrix.from_columns(cols, tgt.dim)
    inclusion = {b: family[b].basis for b in dims}
    return Bicomplex(dims, delta, deltabar), inclusion


def subcomplex(B: Bicomplex, family: Mapping[Bidegree, Subspace]):
    """Sub-bicomplex spanned by a differential-closed family; returns (sub, inclusion blocks)."""
    return _restrict(B, family)


def quotient_complex(B: Bicomplex, family: Mapping[Bidegree, Subspace]):
    """Quotient of B by a differential-closed family; returns (quotient, projection blocks)."""
    pres = {}
    for b in B.support:
        den = family.get(b) or Subspace.zero(B.dim(b))
        pres[b] = quotient_present(Subspace.full(B.dim(b)), den)
    dims = {b: q.dim for b, q in pres.items() if q.dim}
    delta, deltabar = {}, {}
    for b in dims:
        q = pres[b]
        den = family.get(b)
        for off, op, out in ((DEL, B.d, delta), (DELBAR, B.db, deltabar)):
            t = _add(b, off)
            if den is not None:
                tden = family.get(t) or Subspace.zero(B.dim(t))
                for v in den.vectors():
                    if not tden.contains(op(b) @ v):
                        raise AssertionError(f"modded family not closed under differential at {b}")
            qt = pres.get(t)
            if qt is None or qt.dim == 0:
                continue
            cols = [qt.project(op(b) @ r) for r in q.representatives()]
            out[b] = RatMatrix.from_columns(cols, qt.dim)
    projection = {b: pres[b].projection for b in dims}
    return Bicomplex(dims, delta, deltabar), projection


# -- truncations --------------------------------------------------------------
def truncation_family(B: Bicomplex, k: int, side: str) -> dict[Bidegree, Subspace]:
    """Per-bidegree subspaces: τ≤k itself (side='below'), or what τ≥k mods out ('above')."""
    fam = {}
    for b in B.support:
        i = b[0] + b[1]
        n = B.dim(b)
        s = B.spaces(b)
        if side == "below":
            if i <= k - 1:
                fam[b] = Subspace.full(n)
            elif i == k:
                fam[b] = s.ker_ddbar
            elif i == k + 1:
                fam[b] = s.closed & s.im_sum
        elif side == "above":
            if i <= k - 1:
                fam[b] = Subspace.full(n)
            elif i == k:
                fam[b] = s.im_sum
            elif i == k + 1:
                fam[b] = s.im_ddbar
        else:
            raise ValueError(f"side must be 'below' or 'above', got {side!r}")
    return fam


def truncate_with_map(B: Bicomplex, k: int, side: str):
    """Truncation plus the blocks of the canonical inclusion (below) or projection (above)."""
    key = ("trunc", k, side)
    hit = B._cache.get(key)
    if hit is not None:
        return hit
    B.check()
    fam = truncation_family(B, k, side)
    out = subcomplex(B, fam) if side == "below" else quotient_complex(B, fam)
    B._cache[key] = out
    return out


def truncate(B: Bicomplex, k: int, side: str) -> Bicomplex:
    return truncate_with_map(B, k, side)[0]


def cohomology_bicomplex(B: Bicomplex, k: int) -> Bicomplex:
    """H^k = τ≤k τ≥k, concentrated in total degrees k and k+1."""
    key = ("H", k)
    hit = B._cache.get(key)
    if hit is None:
        hit = B._cache[key] = truncate(truncate(B, k, "above"), k, "below")
    return hit


def degree_range(B: Bicomplex) -> range:
    degs = B.total_degrees()
    if not degs:
        return range(0)
    return range(degs[0] - 1, degs[-1] + 1)


def minimal_model(B: Bicomplex) -> Bicomplex:
    B.check()
    out = Bicomplex.zero()
    for k in degree_range(B):
        out = direct_sum(out, cohomology_bicomplex(B, k))
    return out


def connectivity(B: Bicomplex) -> float:
    """Largest k with H_A vanishing in total degrees <= k (math.inf if none)."""
    B.check()
    degs = [b[0] + b[1] for b, n in cohomology_dims(B, "A").items()]
    return min(degs) - 1 if degs else math.inf


# -- sums, tensors, shifts ------------------------------------------------------
def direct_sum(B1: Bicomplex, B2: Bicomplex) -> Bicomplex:
    keys = set(B1.dims) | set(B2.dims)
    dims = {b: B1.dim(b) + B2.dim(b) for b in keys}
    delta = {b: block_diag([B1.d(b), B2.d(b)]) for b in keys}
    deltabar = {b: block_diag([B1.db(b), B2.db(b)]) for b in keys}
    return Bicomplex(dims, delta, deltabar)


def direct_sum_all(parts: Iterable[Bicomplex]) -> Bicomplex:
    out = Bicomplex.zero()
    for p in parts:
        out = direct_sum(out, p)
    return out


def tensor_layout(B1: Bicomplex, B2: Bicomplex):
    """For each target bidegree, the ordered list of (b1, b2, offset)."""
    layout: dict[Bidegree, list] = {}
    for b1 in B1.support:
        for b2 in B2.support:
            layout.setdefault(_add(b1, b2), []).append((b1, b2))
    out = {}
    for b, pairs in layout.items():
        off = 0
        rows = []
        for b1, b2 in sorted(pairs):
            rows.append((b1, b2, off))
            off += B1.dim(b1) * B2.dim(b2)
        out[b] = (rows, off)
    return out


def tensor(B1: Bicomplex, B2: Bicomplex) -> Bicomplex:
    """Tensor product with del(a⊗b) = del a⊗b + (-1)^{|a|} a⊗del b."""
    layout = tensor_layout(B1, B2)
    dims = {b: n for b, (_, n) in layout.items()}
    offsets = {(b1, b2): off for b, (rows, _) in layout.items() for b1, b2, off in rows}
    delta, deltabar = {}, {}
    for b, (rows, n) in layout.items():
        for off_dir, op1, op2, out in ((DEL, B1.d, B2.d, delta), (DELBAR, B1.db, B2.db, deltabar)):
            t = _add(b, off_dir)
            if t not in dims:
                continue
            m = [[Fraction(0)] * n for _ in range(dims[t])]
            for b1, b2, off in rows:
                sign = -1 if (b1[0] + b1[1]) % 2 else 1
                i1 = RatMatrix.identity(B1.dim(b1))
                i2 = RatMatrix.identity(B2.dim(b2))
                for tgt, blk in (
                    ((_add(b1, off_dir), b2), kron(op1(b1), i2)),
                    ((b1, _add(b2, off_dir)), kron(i1, op2(b2)).scale(sign)),
                ):
                    toff = offsets.get(tgt)
                    if toff is None or blk.is_zero():
                        continue
                    for i, row in enumerate(blk.entries):
                        mrow = m[toff + i]
                        for j, x in enumerate(row):
                            if x:
                                mrow[off + j] += x
            out[b] = RatMatrix.from_rows(m, n)
    return Bicomplex(dims, delta, deltabar)


def shift(B: Bicomplex, direction: int) -> Bicomplex:
    """V[1] = L ⊗ V, V[-1] = revL ⊗ V."""
    if direction == 1:
        return tensor(ell(), B)
    if direction == -1:
        return tensor(rev_ell(), B)
    raise ValueError("shift direction must be +1 or -1")


def translate(B: Bicomplex, dp: int, dq: int) -> Bicomplex:
    """Move every block by (dp, dq) without changing any matrix."""
    mv = lambda b: (b[0] + dp, b[1] + dq)
    return Bicomplex(
        {mv(b): n for b, n in B.dims.items()},
        {mv(b): m for b, m in B.delta.items()},
        {mv(b): m for b, m in B.deltabar.items()},
    )


def conjugate(B: Bicomplex, change: Mapping[Bidegree, RatMatrix]) -> Bicomplex:
    """Express B in a new basis: columns of ``change[b]`` are the new basis of V^b."""
    inv = {b: change[b].inverse() for b in change}
    ident = lambda b: RatMatrix.identity(B.dim(b))
    delta, deltabar = {}, {}
    for b in B.support:
        p = change.get(b) or ident(b)
        for off, op, out in ((DEL, B.d, delta), (DELBAR, B.db, deltabar)):
            t = _add(b, off)
            if B.dim(t):
                out[b] = (inv.get(t) or ident(t)) @ op(b) @ p
    return Bicomplex(dict(B.dims), delta, deltabar)
