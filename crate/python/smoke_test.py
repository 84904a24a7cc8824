#!/usr/bin/env python3
"""Smoke test for the interferolab_py extension module.

Build the module first:

    cargo build -p interferolab-py --release

The script copies the compiled cdylib into a temporary directory under the
importable name interferolab_py.so, then exercises every binding once.
"""

import json
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        REPO / "target" / profile / "libinterferolab_py.so"
        for profile in ("release", "debug")
    ]
    lib = next((c for c in candidates if c.exists()), None)
    if lib is None:
        sys.exit("build the extension first: cargo build -p interferolab-py")
    tmp = tempfile.mkdtemp(prefix="interferolab_py.")
    shutil.copy2(lib, Path(tmp) / "interferolab_py.so")
    sys.path.insert(0, tmp)
    import interferolab_py

    return interferolab_py


def approx(a, b, tol):
    assert abs(a - b) <= tol, f"{a} is not within {tol} of {b}"


def main():
    il = load_module()

    cfg = il.Config.dark_port()
    identity = il.Filter.identity()

    # Dark port: the witness is -1/2 while each single-arm marginal is 1/4.
    r = il.delta(cfg, identity, identity)
    approx(r.delta, -0.5, 1e-15)
    approx(r.p_both, 0.0, 1e-15)
    approx(r.p_1, 0.25, 1e-15)
    approx(r.p_2, 0.25, 1e-15)
    approx(il.p(cfg, identity, identity), 0.0, 1e-15)

    # Any additive hidden-variable model predicts zero, here via quadrature.
    hv = il.hv_delta_malus(cfg, il.Filter.polarizer(0.3), identity)
    approx(hv.delta, 0.0, 1e-10)

    # Monte Carlo runs are reproducible and consistent with the null.
    a = il.mc_hv(cfg, identity, identity, 200000, seed=42, workers=3)
    b = il.mc_hv(cfg, identity, identity, 200000, seed=42, workers=3)
    assert (a.estimate, a.stderr) == (b.estimate, b.stderr)
    assert a.stderr > 0.0 and abs(a.estimate) <= 4 * a.stderr

    dark = il.mc_quantum(cfg, identity, identity, 1000, seed=1)
    assert dark.estimate == 0.0 and dark.stderr == 0.0

    # Compilation: the identity needs no elements, a Haar unitary verifies.
    netlist, err = il.compile_operator([[1, 0], [0, 1]])
    assert json.loads(netlist)["elements"] == []
    assert err == 0.0
    _, err = il.compile_operator(il.haar_unitary(4, seed=7), check=True)
    assert err <= 1e-10

    # Tomography round-trip from exact witness values of a mixed state.
    rho = [[0.6, 0.1 + 0.2j], [0.1 - 0.2j, 0.3]]
    s = 2**-0.5
    bs = [[s, 1j * s], [1j * s, s]]
    mixed = il.Config(sa=bs, sb=bs, q=1.0, rho1=rho)
    design = il.default_design(mixed)
    meas = [(a1, a2, il.delta(mixed, a1, a2).delta) for a1, a2 in design]
    est, valid, violations = il.infer_density(meas, mixed)
    assert valid and not violations, violations
    for i in range(2):
        for j in range(2):
            approx(est[i][j], rho[i][j], 1e-8)

    # Validation surfaces as exceptions.
    try:
        il.Config(sa=[[1, 0], [0, 0.5]], sb=bs, q=1.0, psi1=[1, 0])
    except ValueError as e:
        assert "unitary" in str(e)
    else:
        sys.exit("non-unitary splitter was accepted")

    try:
        il.infer_density(meas[:1], mixed)
    except RuntimeError as e:
        assert "rank" in str(e)
    else:
        sys.exit("rank-deficient design was accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
