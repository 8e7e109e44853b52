#!/usr/bin/env python3
"""Smoke test for the entlab_py extension module.

Builds nothing itself: run `cargo build --release -p entlab-py` first, then
`python3 python/smoke_test.py`. The script copies the cdylib next to itself
under the importable name if needed.
"""

import math
import pathlib
import shutil
import sys

HERE = pathlib.Path(__file__).resolve().parent
ROOT = HERE.parent


def ensure_module():
    target = HERE / "entlab_py.so"
    if not target.exists():
        for candidate in [
            ROOT / "target" / "release" / "libentlab_py.so",
            ROOT / "target" / "debug" / "libentlab_py.so",
        ]:
            if candidate.exists():
                shutil.copy(candidate, target)
                break
        else:
            sys.exit("build the extension first: cargo build --release -p entlab-py")
    sys.path.insert(0, str(HERE))


def close(a, b, tol=1e-9):
    assert abs(a - b) < tol, f"{a} vs {b}"


def main():
    ensure_module()
    import entlab_py as el

    # Bell pair basics
    bell = el.ghz(2)
    close(el.negativity(bell, [0]), 0.5)
    close(el.concurrence(bell), 1.0)
    close(el.eof(bell), 1.0)
    close(el.chsh_optimal_value(el.werner(1.0)), 2.0 * math.sqrt(2.0), 1e-9)

    # amplitude damping trajectory point: C(p) = 2(1-p)|b|(|a|-p|b|)
    damped = el.apply_channel(bell, "ad", 0.5)
    close(el.concurrence(damped), 0.25, 1e-9)

    # depolarized GHZ3 loses genuine multipartite entanglement gradually
    g3 = el.ghz(3)
    close(el.multipartite_negativity(g3), 0.5, 1e-3)
    noisy = el.apply_channel(g3, "d", 0.2)
    assert 0.0 < el.multipartite_negativity(noisy) < 0.5

    # PPT margins: Smolin state is PPT on 2:2 cuts, NPT on 1:3 cuts
    sm = el.smolin()
    assert el.ppt_margin(sm, [0, 1]) <= 1e-9
    assert el.ppt_margin(sm, [0]) > 1e-9

    # entropies of the maximally mixed qubit pair
    vn, lin = el.entropies(el.apply_channel(bell, "d", 1.0))
    close(vn, 2.0 * math.log(2.0), 1e-9)
    close(lin, 0.75, 1e-9)

    # graph state on a 2-chain is Bell-equivalent
    cz = el.graph_state(2, [(0, 1)])
    close(el.negativity(cz, [0]), 0.5)

    # threshold law round trip
    closed, root, ok = el.time_law("ad", 3, 0.5, math.sqrt(0.75))
    close(closed, (0.5 / math.sqrt(0.75)) ** (2.0 / 3.0), 1e-9)
    assert ok and root is not None

    # two-mode squeezed state: PT symplectic eigenvalue e^{-2r}, criteria agree
    pt, duan, ppt = el.tmsv_checks(1.0)
    close(pt[-1], math.exp(-2.0), 1e-8)
    assert duan and ppt

    # Haar sampler determinism
    assert el.haar_random(3, 42) == el.haar_random(3, 42)

    print("smoke test: all checks passed")


if __name__ == "__main__":
    main()
