"""Regenerate the JSON fixtures in this directory: ``python3 tests/fixtures/build.py``."""
from __future__ import annotations

import json
import random
from pathlib import Path

from cbbakit import formats
from cbbakit.bicomplex import bicomplex, direct_sum_all, square, translate
from cbbakit.decomp import ZigZagDescriptor, make_zigzag
from cbbakit.hirsch import CbbaMap, HirschExtension, LocalSystemPair, free_cbba
from cbbakit.morphism import BicomplexMap
from cbbakit.randgen import scramble

HERE = Path(__file__).parent


def write(name: str, doc: dict) -> None:
    (HERE / name).write_text(formats.dumps(doc))


def cpn(n: int) -> HirschExtension:
    """Base Lambda(x), x at (1,1); y at (n,n) with del del-bar y = x^(n+1)."""
    A = free_cbba([("x", 1, 1)], 2 * n + 2)
    V = bicomplex({(n, n): 1, (n + 1, n): 1, (n, n + 1): 1}, {(n, n): [[1]]}, {(n, n): [[1]]})
    xn = A.power(A.gen("x"), n + 1)
    # V basis order: y (n,n), dby (n,n+1), dy (n+1,n)
    return HirschExtension(A, LocalSystemPair.zero(V), {1: xn}, {2: {m: -c for m, c in xn.items()}}, ("y", "dby", "dy"))


def main() -> None:
    rng = random.Random(2024)
    write("square.bcx", formats.bicomplex_to_doc(square()))
    write("empty.bcx", formats.bicomplex_to_doc(direct_sum_all([])))
    plain = direct_sum_all(
        [
            make_zigzag(ZigZagDescriptor("A", 1, (0, 0))),
            translate(make_zigzag(ZigZagDescriptor("B", 2, (0, 0))), 1, -1),
            square(0, 1),
        ]
    )
    write("scrambled.bcx", formats.bicomplex_to_doc(scramble(rng, plain)[0]))
    dot_a = make_zigzag(ZigZagDescriptor("A", 0, (0, 0)))
    write("dot.bcx", formats.bicomplex_to_doc(dot_a))
    write("a1.bcx", formats.bicomplex_to_doc(make_zigzag(ZigZagDescriptor("A", 1, (0, 0)))))
    write("b1.bcx", formats.bicomplex_to_doc(make_zigzag(ZigZagDescriptor("B", 1, (0, 0)))))

    bad = formats.bicomplex_to_doc(square())
    bad["delta"][0]["rows"] = [["1", "0"]]
    write("bad_shape.bcx", bad)
    bad = formats.bicomplex_to_doc(square())
    bad["delta"][0]["rows"] = [["1/0"]]
    write("bad_rational.bcx", bad)
    bad = formats.bicomplex_to_doc(square())
    bad["blocks"].append(dict(bad["blocks"][0]))
    write("duplicate_block.bcx", bad)
    bad = formats.bicomplex_to_doc(square())
    bad["deltabar"] = [{"p": p, "q": q, "rows": [["1"]]} for p, q in ((0, 0), (1, 0))]
    write("not_anticommuting.bcx", bad)

    # identity of the square: a quasi-isomorphism between contractible objects
    sq = square()
    f = BicomplexMap(sq, sq, {b: [[1]] for b in sq.dims})
    doc = formats.map_to_doc(f)
    doc["source"] = doc["target"] = "square.bcx"
    write("square_identity.bmap", doc)
    # a dot mapping onto the top of A_1 is not a chain map; onto the bottom it is
    a1 = make_zigzag(ZigZagDescriptor("A", 1, (0, 0)))
    write("dot_into_a1.bmap", {**formats.map_to_doc(BicomplexMap(dot_a, a1, {})), "source": "dot.bcx", "target": "a1.bcx"})

    # (phi, phibar) = (1, 0) from V = dot at (0,0) into W = dot at (1,0) collapses the cone
    write("w_dot10.bcx", formats.bicomplex_to_doc(translate(dot_a, 1, 0)))
    write(
        "phi_pair.json",
        {"format": "phi-pair", "version": 1, "phi": [{"p": 0, "q": 0, "rows": [["1"]]}], "phibar": []},
    )

    A = free_cbba([("x", 1, 1)], 4)
    write("lambda_x.cbba", formats.cbba_to_doc(A))
    B = free_cbba([("a", 1, 0), ("b", 0, 1), ("c", 1, 1)], 4, {"c": ("0", "0")})
    write("three_gens.cbba", formats.cbba_to_doc(B))
    broken = formats.cbba_to_doc(free_cbba([("a", 1, 0), ("b", 1, 1)], 4))
    broken["differentials"] = [{"generator": "b", "del": "0", "delbar": "a"}]
    write("broken.cbba", broken)

    for n in (1, 2, 3):
        e = cpn(n)
        write(f"cp{n}.hext", formats.extension_to_doc(e))
        triv = HirschExtension(e.base, e.system, {}, {}, e.names)
        write(f"cp{n}_trivial.hext", formats.extension_to_doc(triv))
    e = cpn(1)
    bad = formats.extension_to_doc(e)
    bad["phibar"] = []
    write("cp1_broken.hext", bad)
    idm = CbbaMap(e.base, e.base, {"x": e.base.gen("x")})
    write("cp1_identity.cmap", formats.cbba_map_to_doc(idm))
    zero = CbbaMap(e.base, e.base, {"x": {}})
    write("cp1_zero.cmap", formats.cbba_map_to_doc(zero))


if __name__ == "__main__":
    main()
    print(json.dumps(sorted(p.name for p in HERE.iterdir() if p.suffix != ".py")))
