"""Smoke test for the hyperstress extension module.

Build first: pip install --no-build-isolation -e crates/python
"""

import json
import math

import hyperstress as hs


def main():
    w = hs.Field(1, ["sin(x1)"])
    jet = w.jet([0.0], 3)
    assert [a[0] for a in jet] == [0.0, 1.0, 0.0, -1.0], jet

    u = hs.Field(2, ["x1 + x2^2", "exp(x1)*x2"])
    s = hs.Stress1(2, ["x1*x2", "sin(x1)"], ["x1^2", "x2", "cos(x2)", "x1*x2^2"])
    r = s.balance(u, hs.Body.unit_box(2), quad_order=10)
    assert r["relative"] <= 1e-10, r
    assert math.isclose(r["lhs"], r["interior"] + r["boundary"], rel_tol=1e-10)

    s2 = hs.Stress2(2, ["x1"], ["x2^2", "x1*x2"], ["1 + x1", "x2", "x1*x2", "cos(x1)"])
    powers = []
    for lam in (0.0, 0.5, 1.0):
        x = s2.lift(lam)
        b = x.balance(hs.Field(2, ["x1^2*x2 + sin(x2)"]), hs.Body.unit_box(2), quad_order=10)
        assert b["relative"] <= 1e-9, b
        powers.append(b["lhs"])
    assert max(powers) - min(powers) <= 1e-13, powers

    sym = hs.NonHolonomicStress(3, ["0"], ["0"] * 3, ["0"] * 3, ["x1", "1", "x2", "1", "x3", "0", "x2", "0", "1"])
    assert all(abs(c) == 0.0 for form in sym.second_contraction([0.2, 0.3, 0.4]) for _, c in form)

    ok, report = hs.run_scenario(hs.generate(seed=4, n=2, degree=2, d=2))
    lines = [json.loads(line) for line in report.splitlines()]
    assert ok and lines[-1]["record"] == "summary", lines[-1]

    try:
        hs.Field(2, ["x3"])
    except ValueError:
        pass
    else:
        raise AssertionError("x3 on R^2 should be rejected")

    print("python smoke test passed: %d checks in the generated scenario" % (len(lines) - 1))


if __name__ == "__main__":
    main()
