"""Smoke test for the viewcheck Python bindings.

Build and install first:
    pip install --no-build-isolation -e crates/python
"""

import pathlib
import sys

import viewcheck_py as vc

CORPUS = pathlib.Path(__file__).resolve().parent.parent / "corpus"


def main() -> int:
    fig2 = vc.check_file(str(CORPUS / "fig2_array.vats"))
    assert fig2.ok, fig2.diagnostics
    assert "get" in fig2.functions
    erased = fig2.erase()
    assert "getPtr p" in erased and "pf" not in erased, erased
    assert fig2.run() is None

    demo = vc.check_file(str(CORPUS / "write_read_demo.vats"))
    res = demo.run()
    assert res.status == "value" and res.value == "42", res
    assert res.store == {}
    assert demo.run(instrumented=True).value == "42"

    arr = vc.check_file(str(CORPUS / "arraymap_demo.vats")).run()
    assert list(arr.store.values()) == ["11", "21", "31", "41", "51"], arr.store

    src = (CORPUS / "fig2_array.vats").read_text()
    bad = vc.check(src.replace("i <= n} .<i>.", "i <= n+1} .<i>.", 1))
    assert not bad.ok
    d = bad.diagnostics[0]
    assert d.severity == "error" and d.line == 23, d
    try:
        bad.erase()
    except vc.TypeError:
        pass
    else:
        raise AssertionError("erasing an ill-typed program must fail")

    try:
        vc.check("fun f (x: int): int =")
    except vc.ParseError:
        pass
    else:
        raise AssertionError("expected a parse error")

    loop = vc.check("fun loop (x: int): int = loop x\nval main = loop 0\n").run(fuel=50)
    assert loop.status == "out_of_fuel", loop

    print("python smoke test: ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
