"""Truncated free cbba's, linear Hirsch extensions and twisted homotopy.

A :class:`TruncatedCbba` is the free graded-commutative bigraded algebra on
finitely many generators, with Leibniz-extended differentials, taken modulo
the ideal of total degree > N.  That ideal is closed under both
differentials, so the truncation is itself an honest cbba and every identity
below is checked exactly in it.

Elements are dicts ``{monomial: Fraction}``; a monomial is a tuple of
exponents in generator order (odd generators have exponent 0 or 1).
Maps ``V -> A`` are dicts ``{j: element}`` indexed by the global basis
index ``j`` of the bicomplex ``V`` (bidegrees in ``V.support`` order, then
position inside the block).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .bicomplex import Bicomplex, CohomologyTable, cohomology
from .exactq import RatMatrix, parse_rational, format_rational, quotient_present, solve_linear

__all__ = [
    "Generator",
    "TruncatedCbba",
    "InvalidCbba",
    "CbbaMap",
    "free_cbba",
    "LocalSystemPair",
    "validate_system",
    "HirschExtension",
    "TwistedHomComplex",
    "twisted_hom",
    "twisted_homotopy",
    "KInvariant",
    "k_invariant",
    "extensions_isomorphic",
    "ExtensionResult",
    "obstruction_extend",
    "vbasis",
    "wedge_degree_defects",
]

Bidegree = tuple[int, int]
Monomial = tuple[int, ...]
Element = dict  # Monomial -> Fraction

DEL, DELBAR = (1, 0), (0, 1)


class InvalidCbba(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


@dataclass(frozen=True, order=True)
class Generator:
    name: str
    p: int
    q: int

    @property
    def degree(self) -> int:
        return self.p + self.q

    @property
    def bidegree(self) -> Bidegree:
        return (self.p, self.q)

    @property
    def odd(self) -> bool:
        return self.degree % 2 == 1


# -- element helpers ----------------------------------------------------------
def _acc(out: dict, key, c) -> None:
    v = out.get(key, 0) + c
    if v:
        out[key] = v
    else:
        out.pop(key, None)


def _add(a: Element, b: Element, c=1) -> Element:
    out = dict(a)
    for m, x in b.items():
        _acc(out, m, c * x)
    return out


def _scale(a: Element, c) -> Element:
    return {m: c * x for m, x in a.items()} if c else {}


_NAME = r"[A-Za-z_][A-Za-z0-9_']*"
_TOKEN = re.compile(rf"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<name>{_NAME})|(?P<op>[-+*^]))")


class TruncatedCbba:
    """Free cbba on ``generators`` modulo total degree > ``N``.

    ``delta_gen`` and ``deltabar_gen`` give the differentials of generators
    (missing entries are zero).  Construction does not validate; use
    :func:`free_cbba` or :meth:`validate`.
    """

    def __init__(
        self,
        generators: Iterable,
        N: int,
        delta_gen: Mapping[str, Element] | None = None,
        deltabar_gen: Mapping[str, Element] | None = None,
    ):
        gens = [g if isinstance(g, Generator) else Generator(*g) for g in generators]
        gens.sort(key=lambda g: (g.degree, g.p, g.name))
        names = [g.name for g in gens]
        if len(set(names)) != len(names):
            raise InvalidCbba([f"duplicate generator names in {names}"])
        bad = [g.name for g in gens if g.p < 0 or g.q < 0 or g.degree < 1]
        if bad:
            raise InvalidCbba([f"generator {n} must sit in p, q >= 0 with total degree >= 1" for n in bad])
        self.generators: tuple[Generator, ...] = tuple(gens)
        self.N = int(N)
        self.index = {g.name: i for i, g in enumerate(gens)}
        self.delta_gen = {n: dict(e) for n, e in (delta_gen or {}).items() if e}
        self.deltabar_gen = {n: dict(e) for n, e in (deltabar_gen or {}).items() if e}
        for n in list(self.delta_gen) + list(self.deltabar_gen):
            if n not in self.index:
                raise InvalidCbba([f"differential given for unknown generator {n!r}"])
        self._basis: dict[Bidegree, list[Monomial]] = {}
        self._enumerate()
        self._pos = {b: {m: i for i, m in enumerate(ms)} for b, ms in self._basis.items()}
        self._dcache: dict = {}

    # -- structure ---------------------------------------------------------
    def _enumerate(self) -> None:
        gens = self.generators
        k = len(gens)

        def rec(i, exps, p, q):
            if i == k:
                self._basis.setdefault((p, q), []).append(tuple(exps))
                return
            g = gens[i]
            top = 1 if g.odd else (self.N - p - q) // g.degree
            e = 0
            while e <= top and p + q + e * g.degree <= self.N:
                exps.append(e)
                rec(i + 1, exps, p + e * g.p, q + e * g.q)
                exps.pop()
                e += 1

        if self.N >= 0:
            rec(0, [], 0, 0)
        for b in self._basis:
            self._basis[b].sort(key=lambda m: tuple(-e for e in m))

    @property
    def one(self) -> Monomial:
        return (0,) * len(self.generators)

    def unit(self) -> Element:
        return {self.one: Fraction(1)} if self.N >= 0 else {}

    def gen(self, name: str) -> Element:
        i = self.index[name]
        m = [0] * len(self.generators)
        m[i] = 1
        m = tuple(m)
        return {m: Fraction(1)} if self.generators[i].degree <= self.N else {}

    def bidegree(self, m: Monomial) -> Bidegree:
        p = sum(e * g.p for e, g in zip(m, self.generators))
        q = sum(e * g.q for e, g in zip(m, self.generators))
        return (p, q)

    def degree(self, m: Monomial) -> int:
        return sum(self.bidegree(m))

    def word_length(self, m: Monomial) -> int:
        return sum(m)

    @property
    def support(self) -> list[Bidegree]:
        return sorted(self._basis)

    def basis(self, b: Bidegree) -> list[Monomial]:
        return self._basis.get(tuple(b), [])

    def dim(self, b: Bidegree) -> int:
        return len(self.basis(b))

    def dims(self) -> dict[Bidegree, int]:
        return {b: len(ms) for b, ms in self._basis.items()}

    # -- multiplication ------------------------------------------------------
    def mul_monomials(self, m1: Monomial, m2: Monomial):
        """``(sign, product)`` of two normal-ordered monomials, or None if zero."""
        sign = 1
        odd_later = 0  # odd generators of m1 with index > current, counted right to left
        gens = self.generators
        for i in range(len(gens) - 1, -1, -1):
            if gens[i].odd:
                if m1[i] and m2[i]:
                    return None
                if m2[i] and odd_later % 2:
                    sign = -sign
                odd_later += m1[i]
        prod = tuple(a + b for a, b in zip(m1, m2))
        if self.degree(prod) > self.N:
            return None
        return sign, prod

    def mul(self, a: Element, b: Element) -> Element:
        out: dict = {}
        for m1, x in a.items():
            for m2, y in b.items():
                r = self.mul_monomials(m1, m2)
                if r is not None:
                    _acc(out, r[1], r[0] * x * y)
        return out

    def power(self, a: Element, n: int) -> Element:
        out = self.unit()
        for _ in range(n):
            out = self.mul(out, a)
        return out

    # -- differentials -------------------------------------------------------
    def _gen_diff(self, i: int, which: str) -> Element:
        table = self.delta_gen if which == "del" else self.deltabar_gen
        g = self.generators[i]
        if g.degree + 1 > self.N:
            return {}
        return {m: x for m, x in table.get(g.name, {}).items() if self.degree(m) <= self.N}

    def _dmono(self, m: Monomial, which: str) -> Element:
        key = (which, m)
        hit = self._dcache.get(key)
        if hit is not None:
            return hit
        if self.degree(m) + 1 > self.N or not any(m):
            out: Element = {}
        else:
            i = next(k for k, e in enumerate(m) if e)
            g = [0] * len(m)
            g[i] = 1
            g = tuple(g)
            rest = list(m)
            rest[i] -= 1
            rest = tuple(rest)
            first = self.mul(self._gen_diff(i, which), {rest: Fraction(1)})
            sign = -1 if self.generators[i].odd else 1
            second = self.mul({g: Fraction(1)}, self._dmono(rest, which))
            out = _add(first, second, sign)
        self._dcache[key] = out
        return out

    def d(self, a: Element) -> Element:
        out: dict = {}
        for m, x in a.items():
            for m2, y in self._dmono(m, "del").items():
                _acc(out, m2, x * y)
        return out

    def db(self, a: Element) -> Element:
        out: dict = {}
        for m, x in a.items():
            for m2, y in self._dmono(m, "delbar").items():
                _acc(out, m2, x * y)
        return out

    def apply(self, which: str, a: Element) -> Element:
        return self.d(a) if which == "del" else self.db(a)

    # -- validation ----------------------------------------------------------
    def validate(self) -> list[str]:
        """Diagnostics naming every offending generator; empty iff a valid cbba."""
        out = []
        for g in self.generators:
            for which, table, off in (("del", self.delta_gen, DEL), ("delbar", self.deltabar_gen, DELBAR)):
                want = (g.p + off[0], g.q + off[1])
                for m in table.get(g.name, {}):
                    if self.bidegree(m) != want:
                        out.append(
                            f"{which}({g.name}) has a term {self.format({m: 1})} of bidegree "
                            f"{self.bidegree(m)}, expected {want}"
                        )
        if out:
            return out
        for g in self.generators:
            x = self.gen(g.name)
            if not x:
                continue
            if self.d(self.d(x)):
                out.append(f"del^2({g.name}) = {self.format(self.d(self.d(x)))} != 0")
            if self.db(self.db(x)):
                out.append(f"delbar^2({g.name}) = {self.format(self.db(self.db(x)))} != 0")
            anti = _add(self.d(self.db(x)), self.db(self.d(x)))
            if anti:
                out.append(f"(del delbar + delbar del)({g.name}) = {self.format(anti)} != 0")
        return out

    def beyond_cutoff(self) -> list[str]:
        """Generator identities that the truncation makes vacuous (degree + 2 > N)."""
        return [
            f"d^2({g.name}) lies in degree {g.degree + 2} > N = {self.N}"
            for g in self.generators
            if g.degree + 2 > self.N
        ]

    def check(self) -> "TruncatedCbba":
        diags = self.validate()
        if diags:
            raise InvalidCbba(diags)
        return self

    def __eq__(self, other):
        if not isinstance(other, TruncatedCbba):
            return NotImplemented
        return (
            self.generators == other.generators
            and self.N == other.N
            and self.delta_gen == other.delta_gen
            and self.deltabar_gen == other.deltabar_gen
        )

    def __hash__(self):
        return hash((self.generators, self.N))

    def __repr__(self):
        gs = ", ".join(f"{g.name}{g.bidegree}" for g in self.generators)
        return f"TruncatedCbba([{gs}], N={self.N})"

    # -- vectors ------------------------------------------------------------
    def vector(self, a: Element, b: Bidegree) -> tuple:
        pos = self._pos.get(tuple(b), {})
        v = [Fraction(0)] * len(pos)
        for m, x in a.items():
            if m not in pos:
                raise ValueError(f"element has a term outside bidegree {b}")
            v[pos[m]] += x
        return tuple(v)

    def element(self, vec, b: Bidegree) -> Element:
        return {m: Fraction(x) for m, x in zip(self.basis(b), vec) if x}

    def homogeneous_parts(self, a: Element) -> dict[Bidegree, Element]:
        out: dict = {}
        for m, x in a.items():
            out.setdefault(self.bidegree(m), {})[m] = x
        return out

    def as_bicomplex(self) -> Bicomplex:
        """The underlying bicomplex, basis ``self.basis(b)`` in each bidegree."""
        delta, deltabar = {}, {}
        for b in self.support:
            for off, op, out in ((DEL, self.d, delta), (DELBAR, self.db, deltabar)):
                t = (b[0] + off[0], b[1] + off[1])
                if self.dim(t):
                    cols = [self.vector(op({m: Fraction(1)}), t) for m in self.basis(b)]
                    out[b] = RatMatrix.from_columns(cols, self.dim(t))
        return Bicomplex(self.dims(), delta, deltabar)

    # -- text ------------------------------------------------------------------
    def format(self, a: Element) -> str:
        if not a:
            return "0"
        terms = []
        for m in sorted(a, key=lambda m: (self.degree(m), tuple(-e for e in m))):
            x = a[m]
            factors = [
                g.name if e == 1 else f"{g.name}^{e}" for g, e in zip(self.generators, m) if e
            ]
            mono = "*".join(factors)
            if not mono:
                body = format_rational(abs(x))
            elif abs(x) == 1:
                body = mono
            else:
                body = f"{format_rational(abs(x))}*{mono}"
            terms.append(("-" if x < 0 else "+", body))
        s = " ".join(f"{sg} {t}" for sg, t in terms)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]

    def parse(self, text: str) -> Element:
        """Parse sums like ``2*x^2*y - 1/3*z + 1`` (factor order matters for odd names)."""
        text = str(text).strip()
        if text in ("", "0"):
            return {}
        pos = 0
        tokens = []
        while pos < len(text):
            mt = _TOKEN.match(text, pos)
            if not mt or mt.end() == pos:
                raise ValueError(f"cannot parse {text!r} at position {pos}")
            tokens.append((mt.lastgroup, mt.group(mt.lastgroup)))
            pos = mt.end()
            while pos < len(text) and text[pos].isspace():
                pos += 1
        out: Element = {}
        i = 0
        while i < len(tokens):
            sign = 1
            while i < len(tokens) and tokens[i] in (("op", "+"), ("op", "-")):
                if tokens[i][1] == "-":
                    sign = -sign
                i += 1
            term = {self.one: Fraction(sign)}
            expect_factor = True
            while i < len(tokens):
                kind, val = tokens[i]
                if expect_factor:
                    if kind == "num":
                        term = _scale(term, parse_rational(val))
                        i += 1
                    elif kind == "name":
                        if val not in self.index:
                            raise ValueError(f"unknown generator {val!r} in {text!r}")
                        i += 1
                        exp = 1
                        if i < len(tokens) and tokens[i] == ("op", "^"):
                            if i + 1 >= len(tokens) or tokens[i + 1][0] != "num":
                                raise ValueError(f"bad exponent in {text!r}")
                            exp = int(tokens[i + 1][1])
                            i += 2
                        for _ in range(exp):
                            term = self.mul(term, self.gen(val))
                    else:
                        raise ValueError(f"expected a factor in {text!r}, got {val!r}")
                    expect_factor = False
                elif (kind, val) == ("op", "*"):
                    expect_factor = True
                    i += 1
                else:
                    break
            if expect_factor:
                raise ValueError(f"dangling operator in {text!r}")
            out = _add(out, term)
        return out


def free_cbba(generators: Iterable, N: int, differentials: Mapping | None = None) -> TruncatedCbba:
    """Build and validate a truncated free cbba.

    ``generators`` are ``(name, p, q)`` triples or :class:`Generator`s;
    ``differentials`` maps a name to ``(del_value, delbar_value)`` given as
    expression strings or elements.
    """
    A = TruncatedCbba(generators, N)
    if differentials:
        dd, ddb = {}, {}
        for name, (x, y) in differentials.items():
            dd[name] = A.parse(x) if isinstance(x, str) else dict(x)
            ddb[name] = A.parse(y) if isinstance(y, str) else dict(y)
        A = TruncatedCbba(A.generators, N, dd, ddb)
    return A.check()


def wedge_degree_defects(A: TruncatedCbba, n: int, k: int) -> list[Monomial]:
    """Monomials of word length ``n`` and total degree < n*k, given generators of degree >= k.

    Empty whenever every generator has degree >= k, which is the degree count
    behind the connectivity of exterior powers.
    """
    out = []
    for b in A.support:
        for m in A.basis(b):
            if A.word_length(m) == n and sum(b) < n * k:
                out.append(m)
    return out


@dataclass(frozen=True, eq=False)
class CbbaMap:
    """Algebra map given by generator images; ``images[name]`` is an element of ``target``."""

    source: TruncatedCbba
    target: TruncatedCbba
    images: Mapping[str, Element]

    def image_of(self, name: str) -> Element:
        return self.images.get(name, {})

    def __call__(self, a: Element) -> Element:
        out: dict = {}
        T = self.target
        for m, x in a.items():
            val = T.unit()
            for g, e in zip(self.source.generators, m):
                for _ in range(e):
                    val = T.mul(val, self.image_of(g.name))
            for m2, y in val.items():
                _acc(out, m2, x * y)
        return out

    def validate(self) -> list[str]:
        out = []
        S, T = self.source, self.target
        if T.N > S.N:
            out.append(f"target truncation N = {T.N} exceeds source N = {S.N}; the map is not well defined")
        for g in S.generators:
            img = self.image_of(g.name)
            if any(T.bidegree(m) != g.bidegree for m in img):
                out.append(f"image of {g.name} is not of bidegree {g.bidegree}")
        if out:
            return out
        for g in S.generators:
            x = S.gen(g.name)
            for which in ("del", "delbar"):
                lhs = self(S.apply(which, x))
                rhs = T.apply(which, self(x))
                if _add(lhs, rhs, -1):
                    out.append(f"map does not commute with {which} on {g.name}")
        return out

    def check(self) -> "CbbaMap":
        diags = self.validate()
        if diags:
            raise InvalidCbba(diags)
        return self


# -- maps V -> A -----------------------------------------------------------------
def vbasis(V: Bicomplex) -> list[Bidegree]:
    """Bidegree of each global basis index of ``V``."""
    return [b for b in V.support for _ in range(V.dim(b))]


def _voffsets(V: Bicomplex) -> dict[Bidegree, int]:
    out, n = {}, 0
    for b in V.support:
        out[b] = n
        n += V.dim(b)
    return out


def _clean_map(psi: Mapping[int, Element]) -> dict[int, Element]:
    return {j: dict(e) for j, e in psi.items() if e}


def _map_add(a: Mapping, b: Mapping, c=1) -> dict:
    out = {j: dict(e) for j, e in a.items()}
    for j, e in b.items():
        out[j] = _add(out.get(j, {}), e, c)
    return _clean_map(out)


def _vdiff_columns(V: Bicomplex, which: str) -> dict[int, list[tuple[int, Fraction]]]:
    """For each source index j, the nonzero (i, coefficient) of d_V e_j."""
    off = _voffsets(V)
    out: dict = {}
    for b in V.support:
        if which == "del":
            m, t = V.d(b), (b[0] + 1, b[1])
        else:
            m, t = V.db(b), (b[0], b[1] + 1)
        if not V.dim(t):
            continue
        for jj in range(V.dim(b)):
            col = [(off[t] + ii, m[ii, jj]) for ii in range(V.dim(t)) if m[ii, jj]]
            if col:
                out[off[b] + jj] = col
    return out


@dataclass(frozen=True, eq=False)
class LocalSystemPair:
    """Twisting coefficients on ``V``.

    ``theta[j]`` lists ``(i, coefficient)`` with ``Theta(e_j) = sum coefficient ⊗ e_i``;
    coefficients lie in the positive part of the base and have bidegree
    ``b_j + (1,0) - b_i`` (``(0,1)`` for ``thetabar``).
    """

    V: Bicomplex
    theta: Mapping[int, list] = field(default_factory=dict)
    thetabar: Mapping[int, list] = field(default_factory=dict)

    def entries(self, which: str) -> Mapping[int, list]:
        return self.theta if which == "del" else self.thetabar

    def normalized(self) -> dict:
        out = {}
        for which in ("del", "delbar"):
            d = {}
            for j, col in self.entries(which).items():
                acc: dict = {}
                for i, c in col:
                    acc[i] = _add(acc.get(i, {}), c)
                acc = {i: c for i, c in acc.items() if c}
                if acc:
                    d[j] = acc
            out[which] = d
        return out

    def same_as(self, other: "LocalSystemPair") -> bool:
        return self.V == other.V and self.normalized() == other.normalized()

    def pushed(self, f: "CbbaMap") -> "LocalSystemPair":
        push = lambda t: {j: [(i, f(c)) for i, c in col] for j, col in t.items()}
        return LocalSystemPair(self.V, push(self.theta), push(self.thetabar))

    @classmethod
    def zero(cls, V: Bicomplex) -> "LocalSystemPair":
        return cls(V, {}, {})


class _TwistedOps:
    """The operators d_Theta, dbar_Thetabar on Hom(V, A) and their matrices."""

    def __init__(self, base: TruncatedCbba, sys: LocalSystemPair):
        self.base = base
        self.sys = sys
        self.V = sys.V
        self.vb = vbasis(self.V)
        self.vd = {"del": _vdiff_columns(self.V, "del"), "delbar": _vdiff_columns(self.V, "delbar")}
        self._mat: dict = {}

    # Hom^u has basis (j, monomial) with monomial in A^{b_j + u}
    def hom_basis(self, u: Bidegree) -> list[tuple[int, Monomial]]:
        out = []
        for j, b in enumerate(self.vb):
            for m in self.base.basis((b[0] + u[0], b[1] + u[1])):
                out.append((j, m))
        return out

    def hom_support(self) -> list[Bidegree]:
        us = set()
        for b in set(self.vb):
            for a in self.base.support:
                us.add((a[0] - b[0], a[1] - b[1]))
        return sorted(us)

    def to_vec(self, psi: Mapping[int, Element], u: Bidegree) -> tuple:
        basis = self.hom_basis(u)
        pos = {k: n for n, k in enumerate(basis)}
        v = [Fraction(0)] * len(basis)
        for j, e in psi.items():
            for m, x in e.items():
                if (j, m) not in pos:
                    raise ValueError(f"map has a component outside Hom bidegree {u}")
                v[pos[(j, m)]] += x
        return tuple(v)

    def from_vec(self, vec, u: Bidegree) -> dict[int, Element]:
        out: dict = {}
        for (j, m), x in zip(self.hom_basis(u), vec):
            if x:
                out.setdefault(j, {})[m] = Fraction(x)
        return out

    def apply(self, which: str, psi: Mapping[int, Element], u: Bidegree) -> dict[int, Element]:
        """d_Theta psi = d_A psi - (-1)^|psi| psi d_V - (-1)^|psi| (1⊗psi) Theta."""
        A = self.base
        s = -1 if (u[0] + u[1]) % 2 else 1
        deg_psi = u[0] + u[1]
        out: dict = {}
        for j, e in psi.items():
            out[j] = _add(out.get(j, {}), A.apply(which, e))
        for j, col in self.vd[which].items():
            for i, c in col:
                if i in psi:
                    out[j] = _add(out.get(j, {}), psi[i], -s * c)
        for j, col in self.sys.entries(which).items():
            for i, theta in col:
                if i not in psi:
                    continue
                theta_deg = self.vb[j][0] + self.vb[j][1] + 1 - self.vb[i][0] - self.vb[i][1]
                k = -s * (-1 if (deg_psi * theta_deg) % 2 else 1)
                out[j] = _add(out.get(j, {}), A.mul(theta, psi[i]), k)
        return _clean_map(out)

    def matrix(self, which: str, u: Bidegree) -> RatMatrix:
        key = (which, u)
        hit = self._mat.get(key)
        if hit is not None:
            return hit
        off = DEL if which == "del" else DELBAR
        t = (u[0] + off[0], u[1] + off[1])
        rows = len(self.hom_basis(t))
        cols = []
        for j, m in self.hom_basis(u):
            cols.append(self.to_vec(self.apply(which, {j: {m: Fraction(1)}}, u), t))
        M = RatMatrix.from_columns(cols, rows)
        self._mat[key] = M
        return M

    def defects(self) -> list[str]:
        out = []
        for u in self.hom_support():
            n = len(self.hom_basis(u))
            if not n:
                continue
            D = lambda w: self.matrix("del", w)
            Db = lambda w: self.matrix("delbar", w)
            r, l = (u[0] + 1, u[1]), (u[0], u[1] + 1)
            if not (D(r) @ D(u)).is_zero():
                out.append(f"d_Theta^2 != 0 on Hom bidegree {u}")
            if not (Db(l) @ Db(u)).is_zero():
                out.append(f"dbar_Thetabar^2 != 0 on Hom bidegree {u}")
            if not (D(l) @ Db(u) + Db(r) @ D(u)).is_zero():
                out.append(f"d_Theta dbar_Thetabar + dbar_Thetabar d_Theta != 0 on Hom bidegree {u}")
        return out


def _system_shape_defects(base: TruncatedCbba, sys: LocalSystemPair) -> list[str]:
    out = []
    V = sys.V
    vb = vbasis(V)
    for b in V.support:
        if b[0] < 0 or b[1] < 0 or b[0] + b[1] < 1:
            out.append(f"V has a block at {b}; expected p, q >= 0 and total degree >= 1")
    for which, off in (("del", DEL), ("delbar", DELBAR)):
        for j, col in sys.entries(which).items():
            if not 0 <= j < len(vb):
                out.append(f"{which} twisting names source index {j} outside V")
                continue
            for i, c in col:
                if not 0 <= i < len(vb):
                    out.append(f"{which} twisting names target index {i} outside V")
                    continue
                want = (vb[j][0] + off[0] - vb[i][0], vb[j][1] + off[1] - vb[i][1])
                for m in c:
                    if base.bidegree(m) != want:
                        out.append(f"{which} twisting entry ({i},{j}) has a term of bidegree "
                                   f"{base.bidegree(m)}, expected {want}")
                    elif not any(m):
                        out.append(f"{which} twisting entry ({i},{j}) has a constant term")
    return out


def validate_system(sys: LocalSystemPair, base: TruncatedCbba) -> list[str]:
    """Diagnostics for the commuting-pair equations; empty iff they all hold."""
    shape = _system_shape_defects(base, sys)
    if shape:
        return shape
    return _TwistedOps(base, sys).defects()


# -- the twisted Hom bicomplex ---------------------------------------------------------
_SLOTS = ("f", "h", "g")
_SLOT_OFF = {"f": (0, 1), "h": (1, 1), "g": (1, 0)}


@dataclass(frozen=True, eq=False)
class TwistedHomComplex:
    """Hom(V[-1], A) in triple coordinates (f, h, g) with the twisted differentials.

    At bidegree ``(r, s)`` the slots are ``f`` in Hom^{(r,s+1)}, ``h`` in
    Hom^{(r+1,s+1)} and ``g`` in Hom^{(r+1,s)}, stacked in that order.
    """

    bicomplex: Bicomplex
    ops: _TwistedOps
    layout: Mapping[Bidegree, dict]

    def slot_bidegree(self, u: Bidegree, name: str) -> Bidegree:
        o = _SLOT_OFF[name]
        return (u[0] + o[0], u[1] + o[1])

    def join(self, u: Bidegree, f: Mapping, h: Mapping, g: Mapping) -> tuple:
        parts = []
        for name, psi in zip(_SLOTS, (f, h, g)):
            parts.extend(self.ops.to_vec(psi, self.slot_bidegree(u, name)))
        return tuple(parts)

    def split(self, u: Bidegree, vec) -> tuple[dict, dict, dict]:
        out = []
        pos = 0
        for name in _SLOTS:
            w = self.slot_bidegree(u, name)
            n = len(self.ops.hom_basis(w))
            out.append(self.ops.from_vec(vec[pos:pos + n], w))
            pos += n
        return tuple(out)


def _stack(blocks: list[list[RatMatrix | None]], rdims: list[int], cdims: list[int]) -> RatMatrix:
    rows = []
    for bi, rd in enumerate(rdims):
        for r in range(rd):
            row = []
            for bj, cd in enumerate(cdims):
                m = blocks[bi][bj]
                row.extend(m.entries[r] if m is not None else [Fraction(0)] * cd)
            rows.append(row)
    return RatMatrix.from_rows(rows, sum(cdims))


def _twisted_from_ops(ops: _TwistedOps) -> TwistedHomComplex:
    hs = set(ops.hom_support())
    us = set()
    for w in hs:
        for o in _SLOT_OFF.values():
            us.add((w[0] - o[0], w[1] - o[1]))
    hdim = lambda w: len(ops.hom_basis(w))
    dims, layout = {}, {}
    for u in us:
        sd = [hdim((u[0] + _SLOT_OFF[s][0], u[1] + _SLOT_OFF[s][1])) for s in _SLOTS]
        if sum(sd):
            dims[u] = sum(sd)
            layout[u] = dict(zip(_SLOTS, sd))
    delta, deltabar = {}, {}
    for u in dims:
        r, s = u
        sg = -1 if (r + s) % 2 else 1  # (-1)^{|h|} with |h| = r + s + 2
        src = [layout[u][x] for x in _SLOTS]
        # del: (f, h, g) -> (h - sg d f, -sg d h, -sg d g)
        t = (r + 1, s)
        if t in dims:
            tgt = [layout[t][x] for x in _SLOTS]
            D = lambda w: ops.matrix("del", w)
            blocks = [
                [D((r, s + 1)).scale(-sg), RatMatrix.identity(src[1]), None],
                [None, D((r + 1, s + 1)).scale(-sg), None],
                [None, None, D((r + 1, s)).scale(-sg)],
            ]
            delta[u] = _stack(blocks, tgt, src)
        # delbar: (f, h, g) -> (-sg db f, -sg db h, -h - sg db g)
        t = (r, s + 1)
        if t in dims:
            tgt = [layout[t][x] for x in _SLOTS]
            Db = lambda w: ops.matrix("delbar", w)
            blocks = [
                [Db((r, s + 1)).scale(-sg), None, None],
                [None, Db((r + 1, s + 1)).scale(-sg), None],
                [None, RatMatrix.identity(src[1]).scale(-1), Db((r + 1, s)).scale(-sg)],
            ]
            deltabar[u] = _stack(blocks, tgt, src)
    B = Bicomplex(dims, delta, deltabar)
    return TwistedHomComplex(B, ops, layout)


def twisted_hom(V: Bicomplex, base: TruncatedCbba, sys: LocalSystemPair) -> TwistedHomComplex:
    if sys.V != V:
        raise ValueError("local system is defined on a different V")
    diags = validate_system(sys, base)
    if diags:
        raise InvalidCbba(diags)
    T = _twisted_from_ops(_TwistedOps(base, sys))
    T.bicomplex.check()
    return T


def twisted_homotopy(V: Bicomplex, base: TruncatedCbba, sys: LocalSystemPair) -> CohomologyTable:
    """Bott-Chern cohomology of the twisted Hom bicomplex."""
    return cohomology(twisted_hom(V, base, sys).bicomplex, "BC")


# -- Hirsch extensions -------------------------------------------------------------------
# A "linear element" of A ⊗ Λ V is a pair (a, {i: c_i}) meaning a + sum c_i e_i.


@dataclass(frozen=True, eq=False)
class HirschExtension:
    """``A ⊗ ΛV`` with ``d e = d_V e + phi(e) + Theta(e)`` and likewise for dbar."""

    base: TruncatedCbba
    system: LocalSystemPair
    phi: Mapping[int, Element] = field(default_factory=dict)
    phibar: Mapping[int, Element] = field(default_factory=dict)
    names: tuple[str, ...] | None = None

    @property
    def V(self) -> Bicomplex:
        return self.system.V

    def vnames(self) -> tuple[str, ...]:
        if self.names is not None:
            return tuple(self.names)
        return tuple(f"e{j}" for j in range(self.V.total_dim))

    def phi_of(self, which: str) -> dict[int, Element]:
        return _clean_map(self.phi if which == "del" else self.phibar)

    def ops(self) -> _TwistedOps:
        return _TwistedOps(self.base, self.system)

    # -- the two independent validity routes -----------------------------------
    def structure_defects(self) -> list[str]:
        """The commuting-pair equations plus d_Theta phi = 0, dbar phibar = 0, d phibar + dbar phi = 0."""
        out = _system_shape_defects(self.base, self.system)
        vb = vbasis(self.V)
        for which, off in (("del", DEL), ("delbar", DELBAR)):
            for j, e in self.phi_of(which).items():
                want = (vb[j][0] + off[0], vb[j][1] + off[1])
                if any(self.base.bidegree(m) != want for m in e):
                    out.append(f"{'phi' if which == 'del' else 'phibar'}(e{j}) is not of bidegree {want}")
        if out:
            return out
        ops = self.ops()
        out = ops.defects()
        phi, phibar = self.phi_of("del"), self.phi_of("delbar")
        if ops.apply("del", phi, DEL):
            out.append("d_Theta phi != 0")
        if ops.apply("delbar", phibar, DELBAR):
            out.append("dbar_Thetabar phibar != 0")
        if _map_add(ops.apply("del", phibar, DELBAR), ops.apply("delbar", phi, DEL)):
            out.append("d_Theta phibar + dbar_Thetabar phi != 0")
        return out

    def _gen_value(self, which: str, j: int):
        a = dict(self.phi_of(which).get(j, {}))
        c: dict = {}
        unit = self.base.unit()
        vd = _vdiff_columns(self.V, which)
        for i, x in vd.get(j, []):
            c[i] = _add(c.get(i, {}), unit, x)
        for i, t in self.system.entries(which).get(j, []):
            c[i] = _add(c.get(i, {}), t)
        return a, {i: v for i, v in c.items() if v}

    def lin_apply(self, which: str, x):
        """Derivation of the extension applied to a linear element."""
        A = self.base
        a, c = x
        out_a = A.apply(which, a)
        out_c: dict = {}
        for i, coeff in c.items():
            da = A.apply(which, coeff)
            if da:
                out_c[i] = _add(out_c.get(i, {}), da)
            ga, gc = self._gen_value(which, i)
            for m, y in coeff.items():
                sign = -1 if A.degree(m) % 2 else 1
                mono = {m: y * sign}
                out_a = _add(out_a, A.mul(mono, ga))
                for k, ck in gc.items():
                    out_c[k] = _add(out_c.get(k, {}), A.mul(mono, ck))
        return out_a, {i: v for i, v in out_c.items() if v}

    def d_squared_defects(self) -> list[str]:
        """d^2, dbar^2 and d dbar + dbar d on each generator of V, by direct expansion."""
        out = []
        for j in range(self.V.total_dim):
            e = ({}, {j: self.base.unit()})
            for label, first, second in (("d^2", "del", "del"), ("dbar^2", "delbar", "delbar")):
                a, c = self.lin_apply(second, self.lin_apply(first, e))
                if a or c:
                    out.append(f"{label}(e{j}) != 0")
            a1, c1 = self.lin_apply("del", self.lin_apply("delbar", e))
            a2, c2 = self.lin_apply("delbar", self.lin_apply("del", e))
            if _add(a1, a2) or _map_add(c1, c2):
                out.append(f"(d dbar + dbar d)(e{j}) != 0")
        return out

    def validate(self) -> list[str]:
        s = self.structure_defects()
        if s and any("bidegree" in x or "outside" in x or "constant" in x for x in s):
            return s
        d2 = self.d_squared_defects()
        if bool(s) != bool(d2):
            raise AssertionError(f"validity routes disagree: equations {s} vs d^2 {d2}")
        return s + d2

    def check(self) -> "HirschExtension":
        diags = self.validate()
        if diags:
            raise InvalidCbba(diags)
        return self

    def same_as(self, other: "HirschExtension") -> bool:
        return (
            self.base == other.base
            and self.system.same_as(other.system)
            and self.phi_of("del") == other.phi_of("del")
            and self.phi_of("delbar") == other.phi_of("delbar")
        )

    # -- derived objects ---------------------------------------------------------
    def phi_triple(self) -> tuple[dict, dict, dict]:
        """(f, h, g) = (phibar, d_Theta phibar, phi) at bidegree (0,0)."""
        phibar = self.phi_of("delbar")
        return phibar, self.ops().apply("del", phibar, DELBAR), self.phi_of("del")

    def conjugate(self, H: Mapping[int, Element]) -> "HirschExtension":
        """Conjugate by the automorphism e -> e + H(e), computed as sigma^{-1} d sigma."""
        A = self.base
        H = _clean_map(H)
        vb = vbasis(self.V)
        for j, e in H.items():
            if any(A.bidegree(m) != vb[j] for m in e):
                raise ValueError(f"H(e{j}) must have bidegree {vb[j]}")
        new = {}
        for which in ("del", "delbar"):
            phi2, th2 = {}, {}
            vd = _vdiff_columns(self.V, which)
            for j in range(self.V.total_dim):
                a, c = self.lin_apply(which, (dict(H.get(j, {})), {j: A.unit()}))
                for i, ci in c.items():  # sigma^{-1}: e_i -> e_i - H(e_i)
                    a = _add(a, A.mul(ci, H.get(i, {})), -1)
                for i, x in vd.get(j, []):
                    c[i] = _add(c.get(i, {}), A.unit(), -x)
                phi2[j] = a
                th2[j] = [(i, ci) for i, ci in sorted(c.items()) if ci]
            new[which] = (_clean_map(phi2), {j: col for j, col in th2.items() if col})
        system = LocalSystemPair(self.V, new["del"][1], new["delbar"][1])
        return HirschExtension(A, system, new["del"][0], new["delbar"][0], self.names)

    def total_algebra(self) -> TruncatedCbba:
        """``A ⊗ ΛV`` truncated at the same N, as a free cbba on the combined generators."""
        A = self.base
        names = self.vnames()
        clash = set(names) & set(A.index)
        if clash:
            raise ValueError(f"V generator names clash with the base: {sorted(clash)}")
        vb = vbasis(self.V)
        gens = list(A.generators) + [Generator(n, b[0], b[1]) for n, b in zip(names, vb)]
        T = TruncatedCbba(gens, A.N)
        embed = CbbaMap(A, T, {g.name: T.gen(g.name) for g in A.generators})
        dd, ddb = {}, {}
        for g in A.generators:
            dd[g.name] = embed(A.delta_gen.get(g.name, {}))
            ddb[g.name] = embed(A.deltabar_gen.get(g.name, {}))
        for j, n in enumerate(names):
            for which, table in (("del", dd), ("delbar", ddb)):
                a, c = self._gen_value(which, j)
                val = embed(a)
                for i, ci in c.items():
                    val = _add(val, T.mul(embed(ci), T.gen(names[i])))
                table[n] = val
        return TruncatedCbba(gens, A.N, dd, ddb)


def _ddbar_solve(T: TwistedHomComplex, target: tuple):
    """Psi at (-1,-1) with d dbar Psi = target at (0,0), or None."""
    B = T.bicomplex
    u = (-1, -1)
    n0 = B.dim((0, 0))
    if not B.dim(u):
        return None if any(target) else ()
    M = B.d((-1, 0)) @ B.db(u)
    if M.rows != n0:
        M = RatMatrix.zeros(n0, B.dim(u))
    return solve_linear(M, target)


def _witness(T: TwistedHomComplex, psi_vec) -> dict[int, Element]:
    """H = h - d_Theta f + dbar_Thetabar g for Psi = (f, h, g) at (-1,-1)."""
    u = (-1, -1)
    if not psi_vec:
        return {}
    f, h, g = T.split(u, psi_vec)
    ops = T.ops
    H = _map_add(h, ops.apply("del", f, T.slot_bidegree(u, "f")), -1)
    return _map_add(H, ops.apply("delbar", g, T.slot_bidegree(u, "g")))


@dataclass(frozen=True)
class KInvariant:
    vector: tuple
    coordinates: tuple
    is_zero: bool


def _class_of(T: TwistedHomComplex, vec: tuple) -> KInvariant:
    B = T.bicomplex
    if not B.dim((0, 0)):
        return KInvariant((), (), True)
    s = B.spaces((0, 0))
    if not s.closed.contains(vec):
        raise AssertionError("Phi is not a twisted cocycle")
    q = quotient_present(s.closed, s.im_ddbar)
    coords = tuple(q.project(vec))
    return KInvariant(vec, coords, not any(coords))


def k_invariant(ext: HirschExtension) -> KInvariant:
    ext.check()
    T = twisted_hom(ext.V, ext.base, ext.system)
    vec = T.join((0, 0), *ext.phi_triple()) if T.bicomplex.dim((0, 0)) else ()
    return _class_of(T, vec)


def extensions_isomorphic(e1: HirschExtension, e2: HirschExtension):
    """``(True, H)`` with ``e1.conjugate(H)`` equal to ``e2``, or ``(False, None)``."""
    if e1.base != e2.base or e1.V != e2.V:
        raise ValueError("extensions must share the base algebra and V")
    e1.check()
    e2.check()
    if not e1.system.same_as(e2.system):
        return False, None
    T = twisted_hom(e1.V, e1.base, e1.system)
    if not T.bicomplex.dim((0, 0)):
        return True, {}
    diff = tuple(a - b for a, b in zip(T.join((0, 0), *e1.phi_triple()), T.join((0, 0), *e2.phi_triple())))
    psi = _ddbar_solve(T, diff)
    if psi is None:
        return False, None
    H = _witness(T, psi)
    if not e1.conjugate(H).same_as(e2):
        raise AssertionError("reconstructed automorphism does not conjugate e1 to e2")
    return True, H


@dataclass(frozen=True)
class ExtensionResult:
    extends: bool
    H: dict | None = None
    obstruction: KInvariant | None = None


def obstruction_extend(f: CbbaMap, ext: HirschExtension) -> ExtensionResult:
    """Decide whether ``f: A -> C`` extends over ``A ⊗ ΛV``.

    On success ``H`` gives the images of the generators of V and satisfies
    ``f phi = d_{fTheta} H`` and ``f phibar = dbar_{fThetabar} H``.
    """
    if f.source != ext.base:
        raise ValueError("map source differs from the extension base")
    f.check()
    ext.check()
    C = f.target
    sys = ext.system.pushed(f)
    T = twisted_hom(ext.V, C, sys)
    ops = T.ops
    push = lambda psi: _clean_map({j: f(e) for j, e in psi.items()})
    fphibar, fh, fphi = (push(x) for x in ext.phi_triple())
    if not T.bicomplex.dim((0, 0)):
        return ExtensionResult(True, {})
    vec = T.join((0, 0), fphibar, fh, fphi)
    psi = _ddbar_solve(T, vec)
    if psi is None:
        return ExtensionResult(False, None, _class_of(T, vec))
    H = {j: _scale(e, -1) for j, e in _witness(T, psi).items()}
    if _map_add(ops.apply("del", H, (0, 0)), fphi, -1) or _map_add(ops.apply("delbar", H, (0, 0)), fphibar, -1):
        raise AssertionError("null-homotopy does not produce a valid extension")
    return ExtensionResult(True, H)
