"""JSON text formats for bicomplexes, maps, cbba's and Hirsch extensions.

Every document carries ``"format"`` and ``"version"`` keys.  Rationals are
strings such as ``"-3/4"``.  Nested objects (the source of a map, the base of
an extension, ...) may be given inline or as a path relative to the file
that references them.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .bicomplex import Bicomplex, InvalidBicomplex
from .exactq import RatMatrix, format_rational, parse_rational
from .hirsch import CbbaMap, HirschExtension, LocalSystemPair, TruncatedCbba, vbasis
from .morphism import BicomplexMap

VERSION = 1
FORMATS = {
    "bicomplex": ".bcx",
    "bicomplex-map": ".bmap",
    "cbba": ".cbba",
    "cbba-map": ".cmap",
    "hirsch-extension": ".hext",
}


class FormatError(ValueError):
    """Malformed input; the message names the file and the offending field."""


def _ctx(where: str, msg: str) -> FormatError:
    return FormatError(f"{where}: {msg}")


def read_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: top level must be an object")
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _header(doc: dict, kind: str, where: str) -> None:
    got = doc.get("format")
    if got != kind:
        raise _ctx(where, f"expected format {kind!r}, found {got!r}")
    if doc.get("version") != VERSION:
        raise _ctx(where, f"unsupported version {doc.get('version')!r} (expected {VERSION})")


def _int(x, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise _ctx(where, f"expected an integer, found {x!r}")
    return x


def _rational(x, where: str):
    try:
        return parse_rational(x)
    except (ValueError, TypeError, ZeroDivisionError):
        raise _ctx(where, f"malformed rational {x!r}") from None


def _resolve(ref, base_dir: Path, where: str):
    """Inline object, or a path relative to ``base_dir``; returns (doc, its directory, label)."""
    if isinstance(ref, str):
        p = (base_dir / ref) if not Path(ref).is_absolute() else Path(ref)
        return read_json(p), p.parent, str(p)
    if isinstance(ref, dict):
        return ref, base_dir, where
    raise _ctx(where, "expected an inline object or a file path")


# -- bicomplexes ------------------------------------------------------------------
def bicomplex_from_doc(doc: dict, where: str = "<bicomplex>", check: bool = True) -> Bicomplex:
    _header(doc, "bicomplex", where)
    dims = {}
    for n, blk in enumerate(doc.get("blocks", [])):
        w = f"{where}: blocks[{n}]"
        if not isinstance(blk, dict):
            raise FormatError(f"{w}: expected an object")
        b = (_int(blk.get("p"), w + ".p"), _int(blk.get("q"), w + ".q"))
        d = _int(blk.get("dim"), w + ".dim")
        if d < 0:
            raise FormatError(f"{w}: negative dimension at {b}")
        if b in dims:
            raise FormatError(f"{w}: block at {b} declared twice")
        dims[b] = d
    maps = {}
    for key in ("delta", "deltabar"):
        off = (1, 0) if key == "delta" else (0, 1)
        out = {}
        for n, blk in enumerate(doc.get(key, [])):
            w = f"{where}: {key}[{n}]"
            b = (_int(blk.get("p"), w + ".p"), _int(blk.get("q"), w + ".q"))
            if b in out:
                raise FormatError(f"{w}: {key} block at {b} given twice")
            rows = blk.get("rows", [])
            t = (b[0] + off[0], b[1] + off[1])
            want = (dims.get(t, 0), dims.get(b, 0))
            if len(rows) != want[0] or any(len(r) != want[1] for r in rows):
                got = (len(rows), len(rows[0]) if rows else 0)
                raise FormatError(f"{w}: {key} block at {b} has shape {got}, expected {want}")
            out[b] = RatMatrix.from_rows(
                [[_rational(x, f"{w}.rows[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(rows)],
                want[1],
            )
        maps[key] = out
    B = Bicomplex(dims, maps["delta"], maps["deltabar"])
    if check:
        diags = B.validate()
        if diags:
            raise InvalidBicomplex([f"{where}: {d}" for d in diags])
    return B


def _rows(m: RatMatrix) -> list[list[str]]:
    return [[format_rational(x) for x in row] for row in m.entries]


def bicomplex_to_doc(B: Bicomplex) -> dict:
    return {
        "format": "bicomplex",
        "version": VERSION,
        "blocks": [{"p": p, "q": q, "dim": n} for (p, q), n in sorted(B.dims.items())],
        "delta": [{"p": p, "q": q, "rows": _rows(m)} for (p, q), m in sorted(B.delta.items())],
        "deltabar": [{"p": p, "q": q, "rows": _rows(m)} for (p, q), m in sorted(B.deltabar.items())],
    }


def parse_bicomplex(path, check: bool = True) -> Bicomplex:
    return bicomplex_from_doc(read_json(path), str(path), check)


def _sub_bicomplex(ref, base_dir: Path, where: str) -> Bicomplex:
    doc, _, label = _resolve(ref, base_dir, where)
    return bicomplex_from_doc(doc, label)


# -- bicomplex maps -------------------------------------------------------------------
def map_from_doc(doc: dict, where: str = "<map>", base_dir: Path = Path(".")) -> BicomplexMap:
    _header(doc, "bicomplex-map", where)
    if "source" not in doc or "target" not in doc:
        raise _ctx(where, "a map needs 'source' and 'target'")
    S = _sub_bicomplex(doc["source"], base_dir, f"{where}: source")
    T = _sub_bicomplex(doc["target"], base_dir, f"{where}: target")
    blocks = {}
    for n, blk in enumerate(doc.get("blocks", [])):
        w = f"{where}: blocks[{n}]"
        b = (_int(blk.get("p"), w + ".p"), _int(blk.get("q"), w + ".q"))
        rows = blk.get("rows", [])
        want = (T.dim(b), S.dim(b))
        if len(rows) != want[0] or any(len(r) != want[1] for r in rows):
            raise FormatError(f"{w}: block at {b} has the wrong shape, expected {want}")
        blocks[b] = RatMatrix.from_rows(
            [[_rational(x, f"{w}.rows[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(rows)],
            want[1],
        )
    return BicomplexMap(S, T, blocks)


def map_to_doc(f: BicomplexMap) -> dict:
    return {
        "format": "bicomplex-map",
        "version": VERSION,
        "source": bicomplex_to_doc(f.source),
        "target": bicomplex_to_doc(f.target),
        "blocks": [
            {"p": p, "q": q, "rows": _rows(m)} for (p, q), m in sorted(f.blocks.items()) if not m.is_zero()
        ],
    }


def parse_map(path) -> BicomplexMap:
    return map_from_doc(read_json(path), str(path), Path(path).parent)


# -- cbba's ---------------------------------------------------------------------------
def _expr(A: TruncatedCbba, text, where: str):
    if not isinstance(text, str):
        raise _ctx(where, f"expected an expression string, found {text!r}")
    try:
        return A.parse(text)
    except ValueError as exc:
        raise _ctx(where, str(exc)) from None


def cbba_from_doc(doc: dict, where: str = "<cbba>") -> TruncatedCbba:
    _header(doc, "cbba", where)
    N = _int(doc.get("N"), f"{where}: N")
    gens = []
    for n, g in enumerate(doc.get("generators", [])):
        w = f"{where}: generators[{n}]"
        name = g.get("name")
        if not isinstance(name, str) or not name:
            raise FormatError(f"{w}: missing name")
        gens.append((name, _int(g.get("p"), w + ".p"), _int(g.get("q"), w + ".q")))
    A = TruncatedCbba(gens, N)
    dd, ddb = {}, {}
    for n, ent in enumerate(doc.get("differentials", [])):
        w = f"{where}: differentials[{n}]"
        name = ent.get("generator")
        if name not in A.index:
            raise FormatError(f"{w}: unknown generator {name!r}")
        dd[name] = _expr(A, ent.get("del", "0"), w + ".del")
        ddb[name] = _expr(A, ent.get("delbar", "0"), w + ".delbar")
    return TruncatedCbba(A.generators, N, dd, ddb)


def cbba_to_doc(A: TruncatedCbba) -> dict:
    diffs = []
    for g in A.generators:
        d, db = A.delta_gen.get(g.name, {}), A.deltabar_gen.get(g.name, {})
        if d or db:
            diffs.append({"generator": g.name, "del": A.format(d), "delbar": A.format(db)})
    return {
        "format": "cbba",
        "version": VERSION,
        "N": A.N,
        "generators": [{"name": g.name, "p": g.p, "q": g.q} for g in A.generators],
        "differentials": diffs,
    }


def parse_cbba(path) -> TruncatedCbba:
    return cbba_from_doc(read_json(path), str(path))


def _sub_cbba(ref, base_dir: Path, where: str) -> TruncatedCbba:
    doc, _, label = _resolve(ref, base_dir, where)
    return cbba_from_doc(doc, label)


def cbba_map_from_doc(doc: dict, where: str = "<cbba-map>", base_dir: Path = Path(".")) -> CbbaMap:
    _header(doc, "cbba-map", where)
    S = _sub_cbba(doc.get("source"), base_dir, f"{where}: source")
    T = _sub_cbba(doc.get("target"), base_dir, f"{where}: target")
    images = {}
    for n, ent in enumerate(doc.get("images", [])):
        w = f"{where}: images[{n}]"
        name = ent.get("generator")
        if name not in S.index:
            raise FormatError(f"{w}: unknown source generator {name!r}")
        images[name] = _expr(T, ent.get("value", "0"), w + ".value")
    return CbbaMap(S, T, images)


def cbba_map_to_doc(f: CbbaMap) -> dict:
    return {
        "format": "cbba-map",
        "version": VERSION,
        "source": cbba_to_doc(f.source),
        "target": cbba_to_doc(f.target),
        "images": [
            {"generator": g.name, "value": f.target.format(f.image_of(g.name))} for g in f.source.generators
        ],
    }


def parse_cbba_map(path) -> CbbaMap:
    return cbba_map_from_doc(read_json(path), str(path), Path(path).parent)


# -- Hirsch extensions ----------------------------------------------------------------
def _vindex(ref, V: Bicomplex, names: tuple, where: str) -> int:
    """A V basis element given as an index, a name, or [p, q, k]."""
    n = V.total_dim
    if isinstance(ref, str):
        if ref not in names:
            raise _ctx(where, f"unknown V basis name {ref!r}")
        return names.index(ref)
    if isinstance(ref, list) and len(ref) == 3:
        p, q, k = (_int(x, where) for x in ref)
        vb = vbasis(V)
        hits = [j for j, b in enumerate(vb) if b == (p, q)]
        if not 0 <= k < len(hits):
            raise _ctx(where, f"no basis element {k} at ({p},{q})")
        return hits[k]
    j = _int(ref, where)
    if not 0 <= j < n:
        raise _ctx(where, f"V basis index {j} out of range 0..{n - 1}")
    return j


def extension_from_doc(doc: dict, where: str = "<extension>", base_dir: Path = Path(".")) -> HirschExtension:
    _header(doc, "hirsch-extension", where)
    A = _sub_cbba(doc.get("base"), base_dir, f"{where}: base")
    V = _sub_bicomplex(doc.get("V"), base_dir, f"{where}: V")
    names = doc.get("names")
    if names is not None:
        if not (isinstance(names, list) and len(names) == V.total_dim and all(isinstance(x, str) for x in names)):
            raise _ctx(where, f"'names' must list {V.total_dim} strings")
        names = tuple(names)
    label = names or tuple(f"e{j}" for j in range(V.total_dim))
    twist = {}
    for key in ("theta", "thetabar"):
        out: dict = {}
        for n, ent in enumerate(doc.get(key, [])):
            w = f"{where}: {key}[{n}]"
            j = _vindex(ent.get("source"), V, label, w + ".source")
            i = _vindex(ent.get("target"), V, label, w + ".target")
            out.setdefault(j, []).append((i, _expr(A, ent.get("coeff", "0"), w + ".coeff")))
        twist[key] = out
    phis = {}
    for key in ("phi", "phibar"):
        out = {}
        for n, ent in enumerate(doc.get(key, [])):
            w = f"{where}: {key}[{n}]"
            j = _vindex(ent.get("source"), V, label, w + ".source")
            if j in out:
                raise FormatError(f"{w}: {key} of basis element {j} given twice")
            out[j] = _expr(A, ent.get("value", "0"), w + ".value")
        phis[key] = out
    system = LocalSystemPair(V, twist["theta"], twist["thetabar"])
    return HirschExtension(A, system, phis["phi"], phis["phibar"], names)


def extension_to_doc(e: HirschExtension) -> dict:
    A = e.base
    doc: dict[str, Any] = {
        "format": "hirsch-extension",
        "version": VERSION,
        "base": cbba_to_doc(A),
        "V": bicomplex_to_doc(e.V),
    }
    if e.names is not None:
        doc["names"] = list(e.names)
    for key, which in (("theta", "del"), ("thetabar", "delbar")):
        doc[key] = [
            {"source": j, "target": i, "coeff": A.format(c)}
            for j, col in sorted(e.system.entries(which).items())
            for i, c in col
        ]
    for key, which in (("phi", "del"), ("phibar", "delbar")):
        doc[key] = [{"source": j, "value": A.format(v)} for j, v in sorted(e.phi_of(which).items())]
    return doc


def parse_extension(path) -> HirschExtension:
    return extension_from_doc(read_json(path), str(path), Path(path).parent)
