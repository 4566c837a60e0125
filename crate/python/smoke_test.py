#!/usr/bin/env python3
"""Smoke test for the stonebis_py extension module.

Builds are picked up from target/release or target/debug; run
`cargo build -p stonebis-py --release` first.
"""

import importlib.machinery
import importlib.util
import pathlib
import sys


def load_module():
    root = pathlib.Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / "release" / "libstonebis_py.so",
        root / "target" / "debug" / "libstonebis_py.so",
        root / "target" / "release" / "stonebis_py.dll",
        root / "target" / "debug" / "stonebis_py.dll",
        root / "target" / "release" / "libstonebis_py.dylib",
        root / "target" / "debug" / "libstonebis_py.dylib",
    ]
    for path in candidates:
        if path.exists():
            loader = importlib.machinery.ExtensionFileLoader("stonebis_py", str(path))
            spec = importlib.util.spec_from_loader("stonebis_py", loader)
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            return module
    sys.exit("stonebis_py is not built; run: cargo build -p stonebis-py --release")


def check(name, condition):
    if not condition:
        sys.exit(f"FAIL {name}")
    print(f"PASS {name}")


def main():
    sb = load_module()

    check(
        "enumerate powerset",
        sb.enumerate_values("P", "{a,b}") == ["{}", "{a}", "{a,b}", "{b}"],
    )
    check(
        "barr lift of a single pair",
        sb.barr_lift("P", "{a}", "{1,2}", [("a", "1")])
        == [("{}", "{}"), ("{a}", "{1}")],
    )
    check(
        "diamond semantics",
        sb.diamond("{0,1}", "{0}") == ["{0}", "{0,1}"],
    )
    check(
        "box semantics",
        sb.box_("{0,1}", "{0,1}") == ["{}", "{0}", "{0,1}", "{1}"],
    )
    check(
        "nabla of the empty formula",
        sb.eval_nabla("P", "{0,1}", "{}") == ["{}"],
    )
    check(
        "algebra atoms are singletons",
        sb.algebra_atoms("P", "{0,1}")
        == ["{{}}", "{{0}}", "{{0,1}}", "{{1}}"],
    )

    cycle = sb.Coalgebra("functor: P\na -> {b}\nb -> {a}")
    loop = sb.Coalgebra("functor: P\n1 -> {1}")
    dead = sb.Coalgebra.from_map("P", {"a": "{}"})

    check("coalgebra repr", cycle.states() == ["a", "b"] and cycle.functor() == "P")
    check(
        "cycle state is equivalent to loop state",
        sb.behaviourally_equivalent(cycle, "a", loop, "1"),
    )
    check(
        "deadlock is not equivalent to loop",
        not sb.behaviourally_equivalent(dead, "a", loop, "1"),
    )
    check(
        "greatest Barr bisimulation is the full relation",
        sb.greatest_l_bisimulation(cycle, loop) == [("a", "1"), ("b", "1")],
    )
    check(
        "greatest neighbourhood bisimulation agrees",
        sb.greatest_nbisim(cycle, loop) == [("a", "1"), ("b", "1")],
    )

    holds, witness, mode = sb.nbisim_check(dead, loop, [("a", "1")])
    check(
        "deadlock neighbourhood witness",
        not holds and witness == ("a", "1", "{}", "{}", "forward") and mode == "nabla",
    )
    holds, witness = sb.vietoris_check(cycle, loop, [("a", "1"), ("b", "1")])
    check("vietoris check on cycle vs loop", holds and witness is None)

    check(
        "closure probe on the shift tower",
        sb.cantor_probe(4, "dense-identity") == [True] * 5
        and sb.cantor_probe(4, "complement") == [True] * 5,
    )

    laws = sb.check_lax_laws("P", samples=50, seed=7)
    check(
        "lax extension laws",
        laws["l1"] and laws["l2"] and laws["l2_equality"] and laws["l3"] and laws["symmetry"],
    )

    print("all smoke checks passed")


if __name__ == "__main__":
    main()
