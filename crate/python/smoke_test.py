"""Quick end-to-end check of the Python bindings.

    pip install -e crates/py --no-build-isolation
    python python/smoke_test.py
"""

import math
from fractions import Fraction

import hclass


def check(label, ok):
    print(("ok   " if ok else "FAIL ") + label)
    return ok


def main():
    results = []
    results.append(check("H_{2,1,1}(0) = 1/120", hclass.hurwitz_class_number(2, 1, 1, 0) == Fraction(1, 120)))
    results.append(check("H_{2,1,1}(4) = -7/12", hclass.hurwitz_class_number(2, 1, 1, 4) == Fraction(-7, 12)))

    e4 = hclass.holomorphic_eisenstein_coefficients(2, 1, 10)
    sigma3 = [sum(d**3 for d in range(1, n + 1) if n % d == 0) for n in range(11)]
    results.append(check("level one weight 4 Eisenstein series", all(e4[n] == 240 * sigma3[n] for n in range(1, 11)) and e4[0] == 1))

    k = hclass.half_integral_kloosterman(1, 0, 0, 4)
    results.append(check("K_{1/2}(0,0;4) = 1+i", abs(k - (1 + 1j)) < 1e-12))

    z = hclass.zeta_k_level(3, 2, 2)
    results.append(check("exact level zeta value carries pi^-4", z.pi_exponent == -4 and math.isclose(float(z), float(z.coefficient) * math.pi**-4)))

    closed = hclass.plus_zeta_closed(3, 1, 5)
    direct, tail = hclass.plus_zeta_direct(3, 1, 5, 4000)
    results.append(check("plus space zeta: series within its tail bound", abs(closed - direct) <= tail))

    classes = hclass.heegner_classes(1, -23)
    results.append(check("three classes of discriminant -23", len(classes) == 3 and all(c.representative.discriminant() == -23 for c in classes)))

    cfg = hclass.RunConfig(quick=True, seed=5)
    reports = hclass.verify_primitives(cfg)
    results.append(check(f"primitives suite ({len(reports)} reports)", all(r.passed and r.recheck() for r in reports)))

    shadow = hclass.verify_shadow_preimage(2, 3, 20)
    results.append(check("shadow preimage identity at level 3", all(r.passed for r in shadow)))

    failed = results.count(False)
    print(f"{len(results) - failed} passed, {failed} failed")
    raise SystemExit(1 if failed else 0)


if __name__ == "__main__":
    main()
