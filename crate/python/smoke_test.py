"""Smoke test for the pframe Python extension.

Build and install first, e.g. `maturin develop -m crates/py/Cargo.toml`,
then run `python python/smoke_test.py`.
"""

import math

import pframe


def mercedes():
    h = math.sqrt(3.0) / 2.0
    return pframe.Measure([[0.0, 1.0], [-h, -0.5], [h, -0.5]])


def main():
    mb = mercedes()
    cert = pframe.frame_bounds(mb)
    assert abs(cert.A - 0.5) < 1e-12 and abs(cert.B - 0.5) < 1e-12
    assert cert.classification == "tight"

    dual = pframe.canonical_dual(mb)
    assert abs(pframe.frame_bounds(dual).A - 2.0) < 1e-12
    parseval = pframe.canonical_parseval(mb)
    assert abs(pframe.frame_bounds(parseval).B - 1.0) < 1e-12

    member, objective, witness = pframe.dual_membership(mb, dual)
    assert member and objective <= 1e-8 and witness is not None
    member, objective, witness = pframe.dual_membership(mb, pframe.Measure([[0.0, 0.0]]))
    assert not member and abs(objective - 2.0) < 1e-12 and witness is None

    a = pframe.Measure([[0.0, 0.0]])
    b = pframe.Measure([[3.0, 4.0]])
    d, plan = pframe.w2(a, b)
    assert abs(d - 5.0) < 1e-12 and plan.entries == [(0, 0, 1.0)]

    s = pframe.certify_sweetie(mb, mb)
    assert s.premise_ok and s.premise_value == 0.0
    assert pframe.validate(s, mb).verdict
    assert pframe.Certificate.from_json(s.to_json()).to_json() == s.to_json()

    far = pframe.Measure([[30.0, 0.0], [0.0, 30.0]])
    assert not pframe.certify_w2(mb, far).premise_ok

    x = mb.points
    y = [[p[0] * 1.01, p[1]] for p in x]
    pw = pframe.certify_paley(x, y)
    assert pw.premise_ok
    delta = pw.extras["delta"]
    assert pframe.falsify_paley(x, y, 0.99 * delta) is not None

    q = pframe.certify_quadclose(mb, parseval)
    assert q.coupling_source == "w2-optimal"

    try:
        pframe.canonical_dual(pframe.Measure([[0.0, 0.0]]))
    except pframe.NotAFrameError:
        pass
    else:
        raise AssertionError("Dirac at origin accepted as a frame")

    csv, violations = pframe.run_battery(seed=1, trials=5)
    assert violations == 0 and csv.startswith("theorem,seed,")

    print("pframe smoke test passed")


if __name__ == "__main__":
    main()
