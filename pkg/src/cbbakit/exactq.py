"""Exact linear algebra over the rationals.

Everything downstream (cohomology, truncations, decompositions, twisted Hom
complexes) reduces to kernels, images, sums, intersections and quotients of
finite-dimensional rational vector spaces.  Values here are immutable; vectors
are plain tuples of :class:`fractions.Fraction`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "Fraction",
    "RatMatrix",
    "Subspace",
    "QuotientPresentation",
    "kernel",
    "image",
    "sum_and_intersection",
    "quotient_present",
    "solve_linear",
    "rref",
    "rank",
    "parse_rational",
    "format_rational",
    "DimensionError",
]

ZERO = Fraction(0)
ONE = Fraction(1)


class DimensionError(ValueError):
    """Shapes or ambient dimensions do not match."""


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"``, ``"p"`` (or an int / Fraction) into a Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError(f"not a rational: {text!r}")
    s = text.strip()
    num, sep, den = s.partition("/")
    try:
        n = int(num)
        d = int(den) if sep else 1
    except ValueError:
        raise ValueError(f"malformed rational {text!r}") from None
    if d == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(n, d)


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def rref(rows: Sequence[Sequence], ncols: int | None = None):
    """Reduced row echelon form.

    Pivots are chosen as the first nonzero entry in column order.  Returns
    ``(nonzero_rows, pivot_columns)`` where rows are lists of Fractions.
    """
    m = [[Fraction(x) for x in r] for r in rows]
    if ncols is None:
        ncols = len(m[0]) if m else 0
    pivots: list[int] = []
    r = 0
    nrows = len(m)
    for c in range(ncols):
        if r == nrows:
            break
        piv = None
        for i in range(r, nrows):
            if m[i][c]:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        prow = m[r]
        inv = 1 / prow[c]
        if inv != 1:
            for j in range(c, ncols):
                if prow[j]:
                    prow[j] *= inv
        nz = [j for j in range(c, ncols) if prow[j]]
        for i in range(nrows):
            if i != r:
                row = m[i]
                f = row[c]
                if f:
                    for j in nz:
                        row[j] -= f * prow[j]
        pivots.append(c)
        r += 1
    return m[:r], pivots


@dataclass(frozen=True)
class RatMatrix:
    """Dense rational matrix, row-major."""

    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise DimensionError("entries length must be rows x cols")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable], cols: int | None = None) -> "RatMatrix":
        data = tuple(tuple(parse_rational(x) if isinstance(x, str) else Fraction(x) for x in r) for r in rows)
        if cols is None:
            cols = len(data[0]) if data else 0
        return cls(len(data), cols, data)

    @classmethod
    def from_columns(cls, columns: Iterable[Sequence], nrows: int) -> "RatMatrix":
        columns = list(columns)
        return cls(nrows, len(columns), tuple(tuple(Fraction(c[i]) for c in columns) for i in range(nrows)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RatMatrix":
        return cls(rows, cols, tuple((ZERO,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls(n, n, tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self.entries)

    def columns(self) -> list[tuple]:
        return [self.column(j) for j in range(self.cols)]

    @property
    def T(self) -> "RatMatrix":
        return RatMatrix(self.cols, self.rows, tuple(zip(*self.entries)) if self.rows else tuple(() for _ in range(self.cols)))

    def is_zero(self) -> bool:
        return not any(any(r) for r in self.entries)

    def __matmul__(self, other):
        if isinstance(other, RatMatrix):
            if self.cols != other.rows:
                raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
            if not self.rows or not other.cols:
                return RatMatrix.zeros(self.rows, other.cols)
            ocols = other.T.entries if other.rows else tuple(() for _ in range(other.cols))
            out = []
            for r in self.entries:
                nz = [(k, a) for k, a in enumerate(r) if a]
                out.append(tuple(sum((a * c[k] for k, a in nz), ZERO) for c in ocols))
            return RatMatrix(self.rows, other.cols, tuple(out))
        v = tuple(other)
        if len(v) != self.cols:
            raise DimensionError(f"cannot apply {self.shape} matrix to vector of length {len(v)}")
        return tuple(sum((a * b for a, b in zip(r, v) if a and b), ZERO) for r in self.entries)

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        if self.shape != other.shape:
            raise DimensionError(f"cannot add {self.shape} and {other.shape}")
        return RatMatrix(self.rows, self.cols, tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.entries, other.entries)))

    def __neg__(self) -> "RatMatrix":
        return RatMatrix(self.rows, self.cols, tuple(tuple(-a for a in r) for r in self.entries))

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        return self + (-other)

    def scale(self, c) -> "RatMatrix":
        c = Fraction(c)
        return RatMatrix(self.rows, self.cols, tuple(tuple(c * a for a in r) for r in self.entries))

    def hstack(self, other: "RatMatrix") -> "RatMatrix":
        if self.rows != other.rows:
            raise DimensionError("hstack row mismatch")
        return RatMatrix(self.rows, self.cols + other.cols, tuple(a + b for a, b in zip(self.entries, other.entries)))

    def vstack(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.cols:
            raise DimensionError("vstack column mismatch")
        return RatMatrix(self.rows + other.rows, self.cols, self.entries + other.entries)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "RatMatrix":
        return RatMatrix(len(rows), len(cols), tuple(tuple(self.entries[i][j] for j in cols) for i in rows))

    def rank(self) -> int:
        return len(rref(self.entries, self.cols)[0])

    def inverse(self) -> "RatMatrix":
        n = self.rows
        if n != self.cols:
            raise DimensionError("inverse of non-square matrix")
        aug = [list(r) + [ONE if i == j else ZERO for j in range(n)] for i, r in enumerate(self.entries)]
        red, piv = rref(aug, 2 * n)
        if piv[:n] != list(range(n)) or len(red) < n:
            raise ZeroDivisionError("matrix is singular")
        return RatMatrix(n, n, tuple(tuple(r[n:]) for r in red))

    def to_strings(self) -> list[list[str]]:
        return [[format_rational(x) for x in r] for r in self.entries]


def block_diag(mats: Sequence[RatMatrix]) -> RatMatrix:
    rows = sum(m.rows for m in mats)
    cols = sum(m.cols for m in mats)
    out = [[ZERO] * cols for _ in range(rows)]
    r0 = c0 = 0
    for m in mats:
        for i, row in enumerate(m.entries):
            out[r0 + i][c0:c0 + m.cols] = row
        r0 += m.rows
        c0 += m.cols
    return RatMatrix(rows, cols, tuple(tuple(r) for r in out))


def kron(a: RatMatrix, b: RatMatrix) -> RatMatrix:
    out = []
    for ra in a.entries:
        for rb in b.entries:
            out.append(tuple(x * y for x in ra for y in rb))
    return RatMatrix(a.rows * b.rows, a.cols * b.cols, tuple(out))


def rank(a: RatMatrix) -> int:
    return a.rank()


@dataclass(frozen=True)
class Subspace:
    """Subspace of Q^n, stored by its canonical (reduced echelon) basis.

    ``basis`` has the basis vectors as columns; transposed it is the reduced
    row echelon form of any spanning set, so equal subspaces compare equal.
    """

    ambient_dim: int
    basis: RatMatrix

    @classmethod
    def span(cls, ambient_dim: int, vectors: Iterable[Sequence]) -> "Subspace":
        vecs = [tuple(v) for v in vectors]
        for v in vecs:
            if len(v) != ambient_dim:
                raise DimensionError(f"vector of length {len(v)} in Q^{ambient_dim}")
        red, _ = rref(vecs, ambient_dim)
        return cls(ambient_dim, RatMatrix.from_columns(red, ambient_dim))

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n, RatMatrix.zeros(n, 0))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, RatMatrix.identity(n))

    @property
    def dim(self) -> int:
        return self.basis.cols

    def vectors(self) -> list[tuple]:
        return self.basis.columns()

    def pivots(self) -> list[int]:
        out = []
        for v in self.vectors():
            out.append(next(i for i, x in enumerate(v) if x))
        return out

    def contains(self, v: Sequence) -> bool:
        return self.coordinates(v) is not None

    def contains_subspace(self, other: "Subspace") -> bool:
        return all(self.contains(v) for v in other.vectors())

    def coordinates(self, v: Sequence):
        """Coordinates of ``v`` in the canonical basis, or None if v is outside."""
        v = [Fraction(x) for x in v]
        if len(v) != self.ambient_dim:
            raise DimensionError("coordinate request for vector of wrong length")
        coords = []
        for b, p in zip(self.vectors(), self.pivots()):
            c = v[p]
            coords.append(c)
            if c:
                for i, x in enumerate(b):
                    if x:
                        v[i] -= c * x
        if any(v):
            return None
        return tuple(coords)

    def __add__(self, other: "Subspace") -> "Subspace":
        return sum_and_intersection(self, other)[0]

    def __and__(self, other: "Subspace") -> "Subspace":
        return sum_and_intersection(self, other)[1]

    def complement_basis(self) -> list[tuple]:
        """Standard basis vectors completing this subspace to the ambient space."""
        piv = set(self.pivots())
        n = self.ambient_dim
        return [tuple(ONE if i == j else ZERO for i in range(n)) for j in range(n) if j not in piv]


def kernel(a: RatMatrix) -> Subspace:
    red, piv = rref(a.entries, a.cols)
    free = [j for j in range(a.cols) if j not in piv]
    vecs = []
    for f in free:
        v = [ZERO] * a.cols
        v[f] = ONE
        for r, p in zip(red, piv):
            v[p] = -r[f]
        vecs.append(v)
    return Subspace.span(a.cols, vecs)


def image(a: RatMatrix) -> Subspace:
    return Subspace.span(a.rows, a.columns())


def sum_and_intersection(u: Subspace, w: Subspace) -> tuple[Subspace, Subspace]:
    """Return ``(U + W, U ∩ W)`` via the Zassenhaus algorithm."""
    if u.ambient_dim != w.ambient_dim:
        raise DimensionError(f"ambient mismatch: {u.ambient_dim} vs {w.ambient_dim}")
    n = u.ambient_dim
    rows = [tuple(v) + tuple(v) for v in u.vectors()]
    rows += [tuple(v) + (ZERO,) * n for v in w.vectors()]
    red, piv = rref(rows, 2 * n)
    s = [r[:n] for r, p in zip(red, piv) if p < n]
    i = [r[n:] for r, p in zip(red, piv) if p >= n]
    return Subspace.span(n, s), Subspace.span(n, i)


@dataclass(frozen=True)
class QuotientPresentation:
    """Presentation of ``ambient / modded``.

    ``projection`` maps numerator coordinates (w.r.t. ``ambient.basis``) to
    quotient coordinates, ``section`` maps quotient coordinates back.
    """

    ambient: Subspace
    modded: Subspace
    projection: RatMatrix
    section: RatMatrix

    @property
    def dim(self) -> int:
        return self.projection.rows

    def project(self, v: Sequence) -> tuple:
        """Quotient coordinates of an ambient-space vector lying in the numerator."""
        c = self.ambient.coordinates(v)
        if c is None:
            raise ValueError("vector is not in the numerator subspace")
        return self.projection @ c

    def lift(self, c: Sequence) -> tuple:
        """A representative (in the ambient space) of quotient class ``c``."""
        return self.ambient.basis @ (self.section @ tuple(c))

    def representatives(self) -> list[tuple]:
        return [self.lift(e) for e in RatMatrix.identity(self.dim).columns()]


def quotient_present(numerator: Subspace, denominator: Subspace) -> QuotientPresentation:
    if numerator.ambient_dim != denominator.ambient_dim:
        raise DimensionError("ambient mismatch")
    dcoords = []
    for v in denominator.vectors():
        c = numerator.coordinates(v)
        if c is None:
            raise ValueError("denominator is not contained in numerator")
        dcoords.append(c)
    a = numerator.dim
    dsub = Subspace.span(a, dcoords)
    comp = dsub.complement_basis()
    full = RatMatrix.from_columns(dsub.vectors() + comp, a)
    inv = full.inverse() if a else RatMatrix.zeros(0, 0)
    b = dsub.dim
    projection = inv.submatrix(range(b, a), range(a))
    section = RatMatrix.from_columns(comp, a)
    return QuotientPresentation(numerator, denominator, projection, section)


def solve_linear(a: RatMatrix, b: Sequence):
    """Some x with ``a @ x == b``, or None when the system is inconsistent."""
    b = tuple(Fraction(x) for x in b)
    if len(b) != a.rows:
        raise DimensionError(f"right-hand side of length {len(b)} for {a.shape} system")
    aug = [list(r) + [y] for r, y in zip(a.entries, b)]
    red, piv = rref(aug, a.cols + 1)
    if piv and piv[-1] == a.cols:
        return None
    x = [ZERO] * a.cols
    for r, p in zip(red, piv):
        x[p] = r[a.cols]
    return tuple(x)
