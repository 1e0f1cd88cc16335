import json
import subprocess
import sys

import pytest

from cbbakit import cli, formats
from cbbakit.bicomplex import cohomology_dims, square
from cbbakit.decomp import ZigZagDescriptor, make_zigzag


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


# -- formats -----------------------------------------------------------------------
@pytest.mark.parametrize(
    "name, parse, to_doc, from_doc",
    [
        ("square.bcx", formats.parse_bicomplex, formats.bicomplex_to_doc, formats.bicomplex_from_doc),
        ("scrambled.bcx", formats.parse_bicomplex, formats.bicomplex_to_doc, formats.bicomplex_from_doc),
        ("empty.bcx", formats.parse_bicomplex, formats.bicomplex_to_doc, formats.bicomplex_from_doc),
        ("square_identity.bmap", formats.parse_map, formats.map_to_doc, formats.map_from_doc),
        ("three_gens.cbba", formats.parse_cbba, formats.cbba_to_doc, formats.cbba_from_doc),
        ("cp1_identity.cmap", formats.parse_cbba_map, formats.cbba_map_to_doc, formats.cbba_map_from_doc),
    ],
)
def test_round_trip(fixtures, name, parse, to_doc, from_doc):
    x = parse(fixtures / name)
    doc = to_doc(x)
    y = from_doc(json.loads(formats.dumps(doc)))
    assert to_doc(y) == doc


@pytest.mark.parametrize("n", [1, 2, 3])
def test_extension_round_trip(fixtures, n):
    e = formats.parse_extension(fixtures / f"cp{n}.hext")
    doc = formats.extension_to_doc(e)
    e2 = formats.extension_from_doc(json.loads(formats.dumps(doc)))
    assert e2.same_as(e) and formats.extension_to_doc(e2) == doc


def test_square_fixture_parses(fixtures):
    B = formats.parse_bicomplex(fixtures / "square.bcx")
    assert B == square() and len(B.dims) == 4


def test_empty_block_list_is_zero(fixtures):
    assert formats.parse_bicomplex(fixtures / "empty.bcx").total_dim == 0


@pytest.mark.parametrize(
    "name, pattern",
    [
        ("bad_shape.bcx", r"delta\[0\].*\(0, 0\).*shape"),
        ("bad_rational.bcx", r"malformed rational '1/0'"),
        ("duplicate_block.bcx", r"declared twice"),
    ],
)
def test_parse_errors_carry_context(fixtures, name, pattern):
    with pytest.raises(formats.FormatError, match=pattern):
        formats.parse_bicomplex(fixtures / name)


def test_wrong_header(tmp_path):
    p = tmp_path / "x.bcx"
    p.write_text(json.dumps({"format": "cbba", "version": 1}))
    with pytest.raises(formats.FormatError, match="expected format 'bicomplex'"):
        formats.parse_bicomplex(p)
    p.write_text("{not json")
    with pytest.raises(formats.FormatError, match="line 1"):
        formats.parse_bicomplex(p)


def test_extension_names_and_index_forms(fixtures, tmp_path):
    doc = json.loads((fixtures / "cp1.hext").read_text())
    doc["phi"] = [{"source": "dby", "value": "x^2"}]
    doc["phibar"] = [{"source": [2, 1, 0], "value": "-x^2"}]
    p = tmp_path / "e.hext"
    p.write_text(json.dumps(doc))
    e = formats.parse_extension(p)
    assert e.same_as(formats.parse_extension(fixtures / "cp1.hext"))
    doc["phi"] = [{"source": "nope", "value": "x^2"}]
    p.write_text(json.dumps(doc))
    with pytest.raises(formats.FormatError, match="unknown V basis name"):
        formats.parse_extension(p)


# -- the command line ------------------------------------------------------------------
def test_cohomology_square_all_zero(capsys, fixtures):
    code, out, _ = run(capsys, "cohomology", "--kind", "A", fixtures / "square.bcx")
    assert code == 0
    grid = [ln.split()[1:] for ln in out.splitlines()[2:]]
    assert grid and all(x == "0" for row in grid for x in row)


def test_grid_orientation():
    assert cli.grid({(0, 0): 1, (1, 1): 2}) == ["q\\p 0 1", "  1 0 2", "  0 1 0"]


def test_decompose_scrambled(capsys, fixtures, tmp_path):
    out_path = tmp_path / "m.json"
    code, out, _ = run(capsys, "decompose", fixtures / "scrambled.bcx", "--out", out_path)
    assert code == 0
    assert "summary: A1 + B2; 1 square(s)" in out
    man = json.loads(out_path.read_text())
    assert {(z["family"], z["parameter"]) for z in man["zigzags"]} == {("A", 1), ("B", 2)}


@pytest.mark.parametrize(
    "argv, code",
    [
        (["validate", "square.bcx"], 0),
        (["validate", "not_anticommuting.bcx"], 1),
        (["validate", "bad_shape.bcx"], 2),
        (["validate", "missing.bcx"], 2),
        (["cohomology", "bad_rational.bcx"], 2),
        (["connectivity", "--degree", "0", "scrambled.bcx"], 0),
        (["classify", "scrambled.bcx"], 0),
        (["minimal-model", "scrambled.bcx"], 0),
        (["truncate", "--degree", "1", "scrambled.bcx"], 0),
        (["truncate", "scrambled.bcx"], 2),
        (["shift", "--direction", "-1", "a1.bcx"], 0),
        (["sum", "a1.bcx", "b1.bcx"], 0),
        (["tensor", "a1.bcx", "b1.bcx"], 0),
        (["cone", "square_identity.bmap"], 0),
        (["reduced-cone", "w_dot10.bcx", "dot.bcx", "phi_pair.json"], 0),
        (["map-check", "square_identity.bmap"], 0),
        (["map-check", "dot_into_a1.bmap"], 0),
        (["cbba-validate", "three_gens.cbba"], 0),
        (["cbba-validate", "broken.cbba"], 1),
        (["hirsch-validate", "cp2.hext"], 0),
        (["hirsch-validate", "cp1_broken.hext"], 1),
        (["twisted-homotopy", "cp1.hext"], 0),
        (["k-invariant", "cp3.hext"], 0),
        (["ext-iso", "cp1.hext", "cp1_trivial.hext"], 0),
        (["obstruct", "cp1.hext"], 0),
        (["obstruct", "--into-total", "cp1.hext"], 0),
        (["obstruct", "--map", "cp1_zero.cmap", "cp1.hext"], 0),
        (["decompose"], 2),
    ],
)
def test_exit_codes(capsys, fixtures, monkeypatch, argv, code):
    monkeypatch.chdir(fixtures)
    got, out, err = run(capsys, *argv)
    assert got == code, out + err


def test_unknown_verb_rejected_before_reading(monkeypatch, capsys):
    def boom(*a, **k):
        raise AssertionError("file read")

    monkeypatch.setattr(formats, "read_json", boom)
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate", "square.bcx"])
    assert exc.value.code == 2


def test_self_tests(capsys):
    code, out, _ = run(capsys, "decompose", "--self-test", "15", "--seed", "4")
    assert code == 0 and "0 failures" in out
    code, out, _ = run(capsys, "hirsch-validate", "--self-test", "8", "--seed", "4")
    assert code == 0 and "routes agree on 8" in out


def test_k_invariant_and_iso_reports(capsys, fixtures):
    code, out, _ = run(capsys, "k-invariant", fixtures / "cp2.hext")
    assert "nonzero" in out
    code, out, _ = run(capsys, "ext-iso", fixtures / "cp2.hext", fixtures / "cp2_trivial.hext")
    assert "isomorphic: False" in out
    code, out, _ = run(capsys, "obstruct", fixtures / "cp2_trivial.hext")
    assert code == 0 and out.startswith("extends")


def test_truncate_writes_valid_output(capsys, fixtures, tmp_path):
    out_path = tmp_path / "t.bcx"
    code, _, _ = run(capsys, "truncate", "--degree", "0", "--side", "above", fixtures / "scrambled.bcx", "--out", out_path)
    assert code == 0
    T = formats.parse_bicomplex(out_path)
    assert all(p + q >= -1 for p, q in T.support)


def test_tensor_table_small_is_clean(capsys):
    code, out, _ = run(capsys, "tensor-table", "--max", "1")
    assert code == 0 and "0 mismatches" in out


def test_tensor_table_reports_c_clause(capsys):
    code, out, _ = run(capsys, "tensor-table", "--max", "2")
    assert code == 1
    assert "C1 x C2" in out and "MISMATCH" in out
    assert all("[iii-C]" in ln for ln in out.splitlines() if "MISMATCH" in ln)


def test_reports_are_deterministic(fixtures, tmp_path):
    outs = []
    for n in range(2):
        j = tmp_path / f"r{n}.json"
        r = subprocess.run(
            [sys.executable, "-m", "cbbakit", "cohomology", str(fixtures / "scrambled.bcx"), "--json", str(j)],
            capture_output=True,
        )
        assert r.returncode == 0
        outs.append((r.stdout, j.read_bytes()))
    assert outs[0] == outs[1]
    rep = json.loads(outs[0][1])
    assert rep["status"] == "ok" and set(rep) == {"status", "tables", "artifacts", "log"}


def test_written_bicomplex_matches_in_memory(capsys, fixtures, tmp_path):
    out_path = tmp_path / "s.bcx"
    run(capsys, "sum", fixtures / "a1.bcx", fixtures / "b1.bcx", "--out", out_path)
    S = formats.parse_bicomplex(out_path)
    A1 = make_zigzag(ZigZagDescriptor("A", 1))
    assert cohomology_dims(S, "BC")[(0, 1)] == 2
    assert S.total_dim == A1.total_dim + 2
