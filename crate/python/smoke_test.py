#!/usr/bin/env python3
"""Smoke test for the curvecoh_py extension module.

Builds nothing itself: expects `cargo build -p curvecoh-py` (or `maturin
develop` inside crates/py) to have produced the cdylib. The script locates
the library under target/, loads it under the importable name, and checks a
few known values end to end.
"""

import importlib.util
import pathlib
import shutil
import sys
import tempfile


def load_module():
    root = pathlib.Path(__file__).resolve().parent.parent
    candidates = []
    for profile in ("debug", "release"):
        base = root / "target" / profile
        candidates += [
            base / "libcurvecoh_py.so",
            base / "libcurvecoh_py.dylib",
            base / "curvecoh_py.dll",
        ]
    lib = next((c for c in candidates if c.exists()), None)
    if lib is None:
        sys.exit(
            "curvecoh_py library not found; run `cargo build -p curvecoh-py` first"
        )
    tmp = pathlib.Path(tempfile.mkdtemp(prefix="curvecoh-py-"))
    target = tmp / ("curvecoh_py" + (".so" if lib.suffix != ".dll" else ".pyd"))
    shutil.copy2(lib, target)
    spec = importlib.util.spec_from_file_location("curvecoh_py", target)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


TORUS = """
[curve]
component c0 genus=1 punctures=0
[base]
kind = separably-closed
[sheaf]
modulus = 2
"""

NODAL = """
[curve]
component c0 genus=0 punctures=0 marked=p,q
point node = c0:p c0:q
[base]
kind = separably-closed
[sheaf]
modulus = 3
"""

SPLIT_ELLIPTIC = """
[curve]
component c0 genus=1 punctures=0
[base]
kind = finite-field
[sheaf]
modulus = 2
"""


def main():
    m = load_module()

    # exact linear algebra: the Howell form of [[2,1]] mod 4 needs the
    # closure row (0,2) to decide membership
    assert m.howell_form(4, [[2, 1]]) == [[2, 1], [0, 2]]

    torus = m.CurveDoc(TORUS)
    v = torus.validate()
    assert v["euler_characteristic"] == 0 and v["genus_hypothesis"]
    assert torus.generators() == ["a0_1", "b0_1"]
    assert torus.h1_orders() == [2, 2]
    assert torus.tower_orders(3) == [1, 4, 16, 64]
    assert torus.cohomology_orders(0) == [2]
    assert torus.cohomology_orders(1) == [2, 2]
    assert torus.cohomology_orders(2) == [2]
    assert torus.effaceability(1)
    cup = torus.cup11()
    assert cup["table"][0][1] == [1] and cup["table"][0][0] == [0]

    nodal = m.CurveDoc(NODAL)
    assert nodal.h1_orders() == [3]
    assert not nodal.validate()["genus_hypothesis"]

    elliptic = m.CurveDoc(SPLIT_ELLIPTIC)
    assert elliptic.cohomology_orders(1) == [2, 2, 2]
    assert elliptic.cohomology_orders(3) == [2]

    # parse errors surface as ValueError with a located message
    try:
        m.CurveDoc("[curve]\ncomponent c0 genus=banana\n")
    except ValueError as e:
        assert "genus" in str(e)
    else:
        sys.exit("expected a parse error")

    print("curvecoh_py smoke test: all checks passed")


if __name__ == "__main__":
    main()
