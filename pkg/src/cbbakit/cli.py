"""Command line front end.

Exit status: 0 when the computation succeeds, 1 when a mathematical check
fails (an invalid bicomplex under ``validate``, a tensor-table mismatch,
disagreeing cone constructions, ...), 2 on unreadable or malformed input.
"""
from __future__ import annotations

import argparse
import json
import math
import random
import sys
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from . import formats
from .bicomplex import (
    KINDS,
    Bicomplex,
    InvalidBicomplex,
    cohomology,
    cohomology_dims,
    connectivity,
    direct_sum,
    minimal_model,
    shift,
    tensor,
    truncate,
)
from .decomp import DecompositionError, _fmt_shapes, decompose, tensor_table
from .exactq import RatMatrix
from .hirsch import (
    CbbaMap,
    InvalidCbba,
    extensions_isomorphic,
    k_invariant,
    obstruction_extend,
    twisted_hom,
)
from .morphism import (
    InvalidMap,
    cone,
    cone_by_cokernel,
    connectedness_conditions,
    exactness_defects,
    induced_map,
    is_quasi_iso,
    lemma_connectivity,
    phi_map,
    reduced_cone,
    validate_map,
)

VERBS = (
    "validate",
    "cohomology",
    "truncate",
    "minimal-model",
    "shift",
    "sum",
    "tensor",
    "connectivity",
    "decompose",
    "classify",
    "tensor-table",
    "cone",
    "reduced-cone",
    "map-check",
    "cbba-validate",
    "hirsch-validate",
    "twisted-homotopy",
    "k-invariant",
    "ext-iso",
    "obstruct",
)


class MathFailure(Exception):
    """A check that the input data fails; reported with exit status 1."""


@dataclass
class Report:
    status: str = "ok"
    tables: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)
    log: list = field(default_factory=list)

    def line(self, text: str = "") -> None:
        self.log.append(text)

    def fail(self, text: str) -> None:
        self.status = "fail"
        self.log.append(f"FAIL: {text}")

    def to_json(self) -> dict:
        return {"status": self.status, "tables": self.tables, "artifacts": self.artifacts, "log": self.log}


# -- rendering --------------------------------------------------------------------
def _fmt_num(x) -> str:
    if x == math.inf:
        return "inf"
    return str(x)


def grid(dims: dict, box=None) -> list[str]:
    """Per-bidegree grid, q decreasing downwards, p increasing to the right."""
    if box is None:
        if not dims:
            return ["(zero)"]
        ps = [p for p, _ in dims]
        qs = [q for _, q in dims]
        box = (min(ps), max(ps), min(qs), max(qs))
    p0, p1, q0, q1 = box
    width = max([len(str(v)) for v in dims.values()] + [len(str(p)) for p in range(p0, p1 + 1)] + [1])
    lines = ["q\\p " + " ".join(str(p).rjust(width) for p in range(p0, p1 + 1))]
    for q in range(q1, q0 - 1, -1):
        cells = " ".join(str(dims.get((p, q), 0)).rjust(width) for p in range(p0, p1 + 1))
        lines.append(f"{str(q).rjust(3)} {cells}")
    return lines


def _table(dims: dict) -> list:
    return [[p, q, n] for (p, q), n in sorted(dims.items())]


def _emit_grid(rep: Report, name: str, dims: dict, box=None) -> None:
    rep.tables[name] = _table(dims)
    rep.line(name)
    for ln in grid(dims, box):
        rep.line("  " + ln)


def _write(rep: Report, path, doc: dict) -> None:
    Path(path).write_text(formats.dumps(doc))
    rep.artifacts.append(str(path))
    rep.line(f"wrote {path}")


def _emit_bicomplex(rep: Report, B: Bicomplex, out, name: str = "dims") -> None:
    _emit_grid(rep, name, B.dims)
    if out:
        _write(rep, out, formats.bicomplex_to_doc(B))


# -- verbs ---------------------------------------------------------------------------
def cmd_validate(a, rep):
    B = formats.parse_bicomplex(a.file, check=False)
    _emit_grid(rep, "dims", B.dims)
    diags = B.validate()
    for d in diags:
        rep.fail(d)
    if not diags:
        rep.line("valid bicomplex")


def cmd_cohomology(a, rep):
    B = formats.parse_bicomplex(a.file)
    kinds = KINDS if a.kind in (None, "all") else (a.kind,)
    box = B.bounding_box()
    for k in kinds:
        _emit_grid(rep, f"H_{k}", cohomology(B, k).dims(), box)


def cmd_truncate(a, rep):
    B = formats.parse_bicomplex(a.file)
    if a.degree is None:
        raise formats.FormatError("truncate needs --degree")
    _emit_bicomplex(rep, truncate(B, a.degree, a.side), a.out, f"tau_{'<=' if a.side == 'below' else '>='}{a.degree}")


def cmd_minimal_model(a, rep):
    _emit_bicomplex(rep, minimal_model(formats.parse_bicomplex(a.file)), a.out, "minimal_model")


def cmd_shift(a, rep):
    _emit_bicomplex(rep, shift(formats.parse_bicomplex(a.file), a.direction), a.out, f"shift[{a.direction:+d}]")


def cmd_sum(a, rep):
    B1, B2 = formats.parse_bicomplex(a.files[0]), formats.parse_bicomplex(a.files[1])
    _emit_bicomplex(rep, direct_sum(B1, B2), a.out, "sum")


def cmd_tensor(a, rep):
    B1, B2 = formats.parse_bicomplex(a.files[0]), formats.parse_bicomplex(a.files[1])
    _emit_bicomplex(rep, tensor(B1, B2), a.out, "tensor")


def cmd_connectivity(a, rep):
    B = formats.parse_bicomplex(a.file)
    k = connectivity(B)
    rep.tables["connectivity"] = _fmt_num(k)
    rep.line(f"connectivity {_fmt_num(k)}")
    if a.degree is not None:
        conds = connectedness_conditions(B, a.degree)
        rep.tables["conditions"] = conds
        for name, v in conds.items():
            rep.line(f"  {a.degree}-connected via {name}: {v}")
        if len(set(conds.values())) != 1:
            rep.fail("the equivalent connectedness conditions disagree")


def _manifest_lines(rep: Report, dec) -> None:
    for (p, q), n in sorted(dec.squares.items()):
        rep.line(f"  square at ({p},{q}) x{n}")
    for d, n in sorted(dec.zigzags.items()):
        rep.line(f"  {d.name} anchored at ({d.anchor[0]},{d.anchor[1]}) x{n}")
    shapes = dec.zigzag_shapes()
    rep.line(f"  summary: {_fmt_shapes(shapes)}; {sum(dec.squares.values())} square(s)")


def _self_test_decompose(a, rep):
    from .randgen import random_bicomplex

    rng = random.Random(a.seed)
    bad = 0
    for n in range(a.self_test):
        B, sq, zz = random_bicomplex(rng, a.max or 12)
        dec = decompose(B)
        if Counter(dec.squares) != sq or Counter(dec.zigzags) != zz:
            bad += 1
            rep.fail(f"round trip {n} recovered a different multiset")
    rep.tables["self_test"] = {"cases": a.self_test, "failures": bad, "seed": a.seed}
    rep.line(f"{a.self_test} randomized round trips, {bad} failures (seed {a.seed})")


def cmd_decompose(a, rep):
    if a.self_test:
        return _self_test_decompose(a, rep)
    if not a.file:
        raise formats.FormatError("decompose needs a bicomplex file or --self-test")
    B = formats.parse_bicomplex(a.file)
    dec = decompose(B)
    man = dec.manifest()
    rep.tables["manifest"] = {"squares": man["squares"], "zigzags": man["zigzags"]}
    rep.line("decomposition")
    _manifest_lines(rep, dec)
    if a.out:
        _write(rep, a.out, man)


def _family_of(h_del: int, h_delbar: int):
    return {(1, 1): "A", (2, 0): "B", (0, 2): "C"}.get((h_del, h_delbar))


def cmd_classify(a, rep):
    from .decomp import make_zigzag

    B = formats.parse_bicomplex(a.file)
    dec = decompose(B)
    rows = []
    for d, n in sorted(dec.zigzags.items()):
        Z = make_zigzag(d)
        hd = sum(cohomology_dims(Z, "Dol_del").values())
        hdb = sum(cohomology_dims(Z, "Dol_delbar").values())
        fam = _family_of(hd, hdb)
        rows.append({"zigzag": d.name, "anchor": list(d.anchor), "count": n, "H_del": hd, "H_delbar": hdb, "family": fam})
        rep.line(f"  {d.name} at {d.anchor}: dim H_del = {hd}, dim H_delbar = {hdb} -> family {fam}")
        if fam != d.family:
            rep.fail(f"{d.name} has Dolbeault signature ({hd},{hdb}) of family {fam}")
    rep.tables["classification"] = rows
    rep.line(f"squares: {sum(dec.squares.values())}")


def cmd_tensor_table(a, rep):
    n = a.max if a.max is not None else 3
    rows = tensor_table(n)
    out, bad = [], 0
    for r in rows:
        out.append(
            {
                "left": r.left.name,
                "right": r.right.name,
                "clause": r.clause,
                "expected": _fmt_shapes(r.expected),
                "computed": _fmt_shapes(r.computed),
                "squares": r.squares,
                "anchors": [list(x) for x in r.anchors],
                "ok": r.ok,
            }
        )
        mark = "ok " if r.ok else "MISMATCH"
        rep.line(f"  {r.left.name:>4} x {r.right.name:<4} [{r.clause:>5}] expected {_fmt_shapes(r.expected):<10} "
                 f"computed {_fmt_shapes(r.computed):<10} {mark}")
        if not r.ok:
            bad += 1
    rep.tables["tensor_table"] = out
    by_clause = Counter(r.clause for r in rows if not r.ok)
    rep.line(f"{len(rows)} products, {bad} mismatches" + (f" ({dict(sorted(by_clause.items()))})" if bad else ""))
    if bad:
        rep.fail(f"{bad} products disagree with the stated clauses")


def cmd_cone(a, rep):
    f = formats.parse_map(a.file)
    diags = validate_map(f)
    if diags:
        raise InvalidMap(diags)
    C = cone(f).cone
    _emit_grid(rep, "cone", C.dims)
    alt = cone_by_cokernel(f)
    d1, d2 = decompose(C), decompose(alt)
    same = d1.zigzags == d2.zigzags
    rep.tables["cone_zigzags"] = _fmt_shapes(d1.zigzag_shapes())
    rep.line(f"cone zig-zags: {_fmt_shapes(d1.zigzag_shapes())}; cokernel construction agrees: {same}")
    if not same:
        rep.fail("explicit cone and cokernel cone are not quasi-isomorphic")
    if a.out:
        _write(rep, a.out, formats.bicomplex_to_doc(C))


def _phi_blocks(doc: dict, V: Bicomplex, W: Bicomplex, key: str, off, where: str) -> dict:
    out = {}
    for n, blk in enumerate(doc.get(key, [])):
        w = f"{where}: {key}[{n}]"
        b = (formats._int(blk.get("p"), w + ".p"), formats._int(blk.get("q"), w + ".q"))
        t = (b[0] + off[0], b[1] + off[1])
        rows = blk.get("rows", [])
        want = (W.dim(t), V.dim(b))
        if len(rows) != want[0] or any(len(r) != want[1] for r in rows):
            raise formats.FormatError(f"{w}: block at {b} has the wrong shape, expected {want}")
        out[b] = RatMatrix.from_rows([[formats._rational(x, w) for x in r] for r in rows], want[1])
    return out


def cmd_reduced_cone(a, rep):
    W = formats.parse_bicomplex(a.files[0])
    V = formats.parse_bicomplex(a.files[1])
    doc = formats.read_json(a.files[2])
    formats._header(doc, "phi-pair", a.files[2])
    phi = _phi_blocks(doc, V, W, "phi", (1, 0), a.files[2])
    phibar = _phi_blocks(doc, V, W, "phibar", (0, 1), a.files[2])
    try:
        R = reduced_cone(W, V, phi, phibar)
    except InvalidBicomplex as exc:
        for d in exc.diagnostics:
            rep.fail(d)
        return
    _emit_grid(rep, "reduced_cone", R.dims)
    full = cone(phi_map(W, V, phi, phibar)).cone
    same = decompose(R).zigzags == decompose(full).zigzags
    rep.line(f"quasi-isomorphic to Cone(Phi): {same}")
    if not same:
        rep.fail("reduced cone differs from the cone of Phi")
    if a.out:
        _write(rep, a.out, formats.bicomplex_to_doc(R))


def cmd_map_check(a, rep):
    f = formats.parse_map(a.file)
    diags = validate_map(f)
    for d in diags:
        rep.fail(d)
    if diags:
        return
    rep.line("chain map: ok")
    ranks = {}
    for kind in ("BC", "A"):
        ranks[kind] = {f"{p},{q}": m.rank() for (p, q), m in sorted(induced_map(f, kind).items())}
        rep.line(f"  rank H_{kind}(f): {ranks[kind]}")
    q = is_quasi_iso(f)
    k_cone = connectivity(cone(f).cone) + 1
    k_lemma = lemma_connectivity(f)
    rep.tables["map_check"] = {
        "ranks": ranks,
        "quasi_isomorphism": q,
        "connectivity_via_cone": _fmt_num(k_cone),
        "connectivity_via_induced_maps": _fmt_num(k_lemma),
        "exactness_defects": {k: [list(b) for b in exactness_defects(f, k)] for k in ("BC", "A")},
    }
    rep.line(f"quasi-isomorphism: {q}")
    rep.line(f"map connectivity: {_fmt_num(k_cone)} (cone), {_fmt_num(k_lemma)} (induced maps)")
    if k_cone != k_lemma:
        rep.fail("the two connectivity characterizations disagree")
    for k, bad in rep.tables["map_check"]["exactness_defects"].items():
        if bad:
            rep.fail(f"H_{k}(V) -> H_{k}(W) -> H_{k}(Cone) not exact at {bad}")


def cmd_cbba_validate(a, rep):
    A = formats.parse_cbba(a.file)
    _emit_grid(rep, "monomial_basis", A.dims())
    for note in A.beyond_cutoff():
        rep.line(f"  unverifiable above cutoff: {note}")
    diags = A.validate()
    for d in diags:
        rep.fail(d)
    if not diags:
        rep.line("valid cbba")


def _self_test_hirsch(a, rep):
    from .randgen import random_extension

    rng = random.Random(a.seed)
    agree = 0
    for n in range(a.self_test):
        e = random_extension(rng, valid=rng.random() < 0.7)
        s, d = e.structure_defects(), e.d_squared_defects()
        agree += bool(s) == bool(d)
        if bool(s) != bool(d):
            rep.fail(f"case {n}: structure equations and d^2 disagree")
    rep.tables["self_test"] = {"cases": a.self_test, "agreeing": agree, "seed": a.seed}
    rep.line(f"{a.self_test} random extensions, routes agree on {agree} (seed {a.seed})")


def cmd_hirsch_validate(a, rep):
    if a.self_test:
        return _self_test_hirsch(a, rep)
    if not a.file:
        raise formats.FormatError("hirsch-validate needs an extension file or --self-test")
    e = formats.parse_extension(a.file)
    s, d = e.structure_defects(), e.d_squared_defects()
    rep.tables["structure_equations"] = s
    rep.tables["d_squared"] = d
    rep.line(f"structure equations: {'hold' if not s else '; '.join(s)}")
    rep.line(f"d^2 on generators: {'zero' if not d else '; '.join(d)}")
    if bool(s) != bool(d):
        rep.fail("the two validity routes disagree")
    elif s:
        rep.fail("not a linear Hirsch extension")


def cmd_twisted_homotopy(a, rep):
    e = formats.parse_extension(a.file)
    T = twisted_hom(e.V, e.base, e.system)
    _emit_grid(rep, "twisted_hom", T.bicomplex.dims)
    _emit_grid(rep, "twisted_homotopy", cohomology(T.bicomplex, "BC").dims())


def cmd_k_invariant(a, rep):
    e = formats.parse_extension(a.file)
    k = k_invariant(e)
    rep.tables["k_invariant"] = {"coordinates": [str(x) for x in k.coordinates], "zero": k.is_zero}
    rep.line(f"k-invariant coordinates: {[str(x) for x in k.coordinates]}")
    rep.line("k-invariant is zero" if k.is_zero else "k-invariant is nonzero")


def _fmt_H(A, names, H) -> dict:
    return {names[j]: A.format(v) for j, v in sorted(H.items())}


def cmd_ext_iso(a, rep):
    e1, e2 = formats.parse_extension(a.files[0]), formats.parse_extension(a.files[1])
    ok, H = extensions_isomorphic(e1, e2)
    rep.tables["isomorphic"] = ok
    rep.line(f"isomorphic: {ok}")
    if ok:
        w = _fmt_H(e1.base, e1.vnames(), H)
        rep.tables["witness"] = w
        rep.line(f"witness H: {w if w else 'zero'}")


def cmd_obstruct(a, rep):
    e = formats.parse_extension(a.file)
    if a.map:
        f = formats.parse_cbba_map(a.map)
    elif a.into_total:
        T = e.total_algebra()
        f = CbbaMap(e.base, T, {g.name: T.gen(g.name) for g in e.base.generators})
    else:
        f = CbbaMap(e.base, e.base, {g.name: e.base.gen(g.name) for g in e.base.generators})
    r = obstruction_extend(f, e)
    rep.tables["extends"] = r.extends
    if r.extends:
        w = _fmt_H(f.target, e.vnames(), r.H)
        rep.tables["H"] = w
        rep.line(f"extends; H = {w if w else 'zero'}")
    else:
        rep.tables["obstruction"] = [str(x) for x in r.obstruction.coordinates]
        rep.line(f"obstructed; class coordinates {[str(x) for x in r.obstruction.coordinates]}")


HANDLERS = {
    "validate": cmd_validate,
    "cohomology": cmd_cohomology,
    "truncate": cmd_truncate,
    "minimal-model": cmd_minimal_model,
    "shift": cmd_shift,
    "sum": cmd_sum,
    "tensor": cmd_tensor,
    "connectivity": cmd_connectivity,
    "decompose": cmd_decompose,
    "classify": cmd_classify,
    "tensor-table": cmd_tensor_table,
    "cone": cmd_cone,
    "reduced-cone": cmd_reduced_cone,
    "map-check": cmd_map_check,
    "cbba-validate": cmd_cbba_validate,
    "hirsch-validate": cmd_hirsch_validate,
    "twisted-homotopy": cmd_twisted_homotopy,
    "k-invariant": cmd_k_invariant,
    "ext-iso": cmd_ext_iso,
    "obstruct": cmd_obstruct,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cbbakit", description="Exact bicomplex and cbba computations.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", metavar="PATH", help="also write the report as JSON")
    sub = ap.add_subparsers(dest="verb", required=True, metavar="VERB")

    def add(verb, help_text, files=1, optional_file=False):
        p = sub.add_parser(verb, parents=[common], help=help_text)
        if files == 1:
            p.add_argument("file", nargs="?" if optional_file else None)
        elif files > 1:
            p.add_argument("files", nargs=files)
        return p

    add("validate", "check the bicomplex identities")
    add("cohomology", "cohomology tables").add_argument("--kind", choices=KINDS + ("all",), default="all")
    p = add("truncate", "truncate by total degree")
    p.add_argument("--degree", type=int)
    p.add_argument("--side", choices=("below", "above"), default="below")
    p.add_argument("--out")
    add("minimal-model", "sum of the cohomology bicomplexes").add_argument("--out")
    p = add("shift", "V[1] or V[-1]")
    p.add_argument("--direction", type=int, choices=(1, -1), default=1)
    p.add_argument("--out")
    add("sum", "direct sum", files=2).add_argument("--out")
    add("tensor", "tensor product", files=2).add_argument("--out")
    add("connectivity", "connectivity and the equivalent conditions").add_argument("--degree", type=int)
    p = add("decompose", "squares and zig-zags", optional_file=True)
    p.add_argument("--out")
    p.add_argument("--self-test", type=int, default=0, metavar="N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max", type=int, help="largest total dimension in self-tests")
    add("classify", "Dolbeault signatures of the zig-zag summands")
    add("tensor-table", "tensor products of zig-zags", files=0).add_argument("--max", type=int, default=3)
    add("cone", "mapping cone of a map").add_argument("--out")
    add("reduced-cone", "W + V twisted by (phi, phibar)", files=3).add_argument("--out")
    add("map-check", "chain map checks, induced maps and connectivity")
    add("cbba-validate", "check a truncated cbba")
    p = add("hirsch-validate", "check a linear Hirsch extension", optional_file=True)
    p.add_argument("--self-test", type=int, default=0, metavar="N")
    p.add_argument("--seed", type=int, default=0)
    add("twisted-homotopy", "twisted homotopy groups")
    add("k-invariant", "class of (phi, phibar)")
    add("ext-iso", "isomorphism of two extensions", files=2)
    p = add("obstruct", "extension of a cbba map over the extension")
    p.add_argument("--map", help="cbba map from the base (default: identity)")
    p.add_argument("--into-total", action="store_true", help="use the inclusion into the extension itself")
    return ap


def run(argv=None) -> tuple[int, Report]:
    args = build_parser().parse_args(argv)
    rep = Report()
    try:
        HANDLERS[args.verb](args, rep)
    except (formats.FormatError, FileNotFoundError) as exc:
        rep.status = "fail"
        rep.line(f"input error: {exc}")
        return 2, rep
    except (InvalidBicomplex, InvalidMap, InvalidCbba) as exc:
        rep.status = "fail"
        rep.line(f"invalid input: {exc}")
        return 2, rep
    except (MathFailure, DecompositionError, AssertionError) as exc:
        rep.fail(str(exc))
    return (0 if rep.status == "ok" else 1), rep


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    code, rep = run(argv)
    out = sys.stdout if code != 2 else sys.stderr
    for ln in rep.log:
        print(ln, file=out)
    if getattr(args, "json", None):
        Path(args.json).write_text(json.dumps(rep.to_json(), indent=2, sort_keys=True) + "\n")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
