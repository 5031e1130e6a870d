"""Smoke test for the Python bindings: run after `pip install -e crates/py --no-build-isolation`."""

import cmath
import json
import math

import bergman


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    names = [c[0] for c in bergman.catalog()]
    assert {"disk", "ellipse", "square", "square-map"} <= set(names), names
    assert bergman.auto_precision(10) == 60

    # disk: p_n = sqrt((n+1)/pi) z^n
    disk = bergman.Domain("disk", digits=50)
    b = disk.basis(6)
    for n, lam in enumerate(b.lambdas()):
        assert close(float(lam), math.sqrt((n + 1) / math.pi), 1e-14)
    assert b.gram_residual < 1e-40
    assert all(abs(z) < 1e-20 for z in b.zeros(4))

    # ellipse: Faber polynomials and the exterior map
    ell = bergman.Domain("ellipse", ["1", "0.25"], digits=40)
    fab = ell.faber(5)
    f1 = fab.f(1)
    assert close(f1[1], 1.0, 1e-14) and abs(f1[0]) < 1e-30
    w = 1.7 * cmath.exp(0.3j)
    z = w + 0.25 / w
    phi, dphi = ell.exterior_map(z)
    assert close(phi, w, 1e-12), (phi, w)
    assert close(dphi, 1.0 / (1.0 - 0.25 / w**2), 1e-12)

    # square: capacity estimate, kernel-method interior map, report
    sq = bergman.Domain("square", digits=80)
    assert sq.is_polygon and sq.has_map
    basis = sq.basis(16)
    _, cap_hat = basis.capacity(15)
    assert abs(float(cap_hat) - float(sq.capacity)) < 5e-3
    f0 = basis.interior_map(0j)
    assert abs(f0) < 1e-12, f0
    assert abs(basis.interior_map(0.45 + 0.0j)) < 1.0
    report = json.loads(sq.report(8))
    assert report["n_max"] == 8 and len(report["per_n"]) == 9

    nodes, worst, ok = bergman.Domain("ellipse", ["1", "0.25"], digits=30).distortion()
    assert ok and nodes > 0 and worst <= 1.0

    assert bergman.corner_integral(1.0, 8) <= 2 * math.log(2)
    [(cid, name, passed, detail)] = bergman.verify([13])
    assert cid == 13 and passed, detail

    try:
        bergman.Domain("nope")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown domain accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
