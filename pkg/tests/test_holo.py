import json

import numpy as np
import pytest

from minlab.errors import (
    NotZeroFree,
    PointOutsideDomain,
    SegmentExitsDomain,
)
from minlab.holo import (
    Domain,
    Exp,
    Poly,
    Prod,
    Quot,
    from_json,
    hexp,
    hprod,
    hquot,
    hsum,
    integrate_polyline,
    integrate_segment,
    integrate_segments,
    poly,
    to_json,
    var,
)

rng = np.random.default_rng(20240811)


def random_poly(degree, domain=Domain.PLANE, scale=1.0):
    c = scale * (rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1))
    return poly(c, domain)


def exp_series(w, terms=60):
    """Independent oracle: term-by-term Taylor summation of exp(w).

    Scaling-and-squaring keeps the partial sums well conditioned.
    """
    k = 0
    while abs(w) > 0.5:
        w = w / 2
        k += 1
    acc = 0j
    t = 1.0 + 0j
    for n in range(1, terms):
        acc += t
        t = t * w / n
    for _ in range(k):
        acc = acc * acc
    return acc


# -- eval ---------------------------------------------------------------


def test_eval_square():
    f = poly([0, 0, 1])
    assert f(1 + 1j) == pytest.approx(2j)


def test_eval_exp_of_zero():
    f = hexp(poly([0.0, 0.0]))
    for z in [0, 1 + 2j, -3j]:
        assert f(z) == pytest.approx(1.0)


def test_eval_exp_poly_matches_series_oracle():
    p = random_poly(5, scale=0.4)
    f = hexp(p)
    zs = 0.8 * (rng.standard_normal(40) + 1j * rng.standard_normal(40))
    for z in zs:
        expected = exp_series(p(z))
        got = f(z)
        assert abs(got - expected) <= 1e-12 * abs(expected)


def test_eval_vectorized_matches_scalar():
    f = hsum(hexp(random_poly(3, scale=0.3)), random_poly(4))
    zs = rng.standard_normal(17) + 1j * rng.standard_normal(17)
    batch = f.eval(zs)
    for i, z in enumerate(zs):
        assert batch[i] == pytest.approx(f(z))


def test_eval_outside_disk_raises():
    f = poly([1.0], Domain.DISK)
    with pytest.raises(PointOutsideDomain):
        f(1.5)


# -- derivative ---------------------------------------------------------


def test_derivative_power_rule():
    f = poly([0, 0, 0, 1])
    assert f.derivative() == poly([0, 0, 3])


def test_derivative_exp_chain_rule():
    p = poly([0.0, 2.0, 1.0])
    f = hexp(p)
    df = f.derivative()
    for z in [0.3, 1 - 0.5j, -2j]:
        assert df(z) == pytest.approx(p.derivative()(z) * f(z))


def test_derivative_matches_central_difference():
    f = random_poly(6)
    df = f.derivative()
    h = 1e-5
    zs = rng.standard_normal(100) + 1j * rng.standard_normal(100)
    for z in zs:
        fd = (f(z + h) - f(z - h)) / (2 * h)
        assert abs(df(z) - fd) <= 1e-6 * max(1.0, abs(df(z)))


def test_derivative_quotient_rule():
    num = random_poly(3)
    den = hexp(poly([0.1, 0.5]))
    f = hquot(num, den)
    df = f.derivative()
    h = 1e-6
    for z in [0.2, 1 + 1j, -0.7j]:
        fd = (f(z + h) - f(z - h)) / (2 * h)
        assert abs(df(z) - fd) <= 1e-6 * max(1.0, abs(df(z)))


# -- quadrature ---------------------------------------------------------


def test_integrate_constant():
    assert integrate_segment(poly([1.0]), 0, 1 + 1j) == pytest.approx(1 + 1j)


def test_integrate_linear():
    assert integrate_segment(var(), 0, 2) == pytest.approx(2.0)


def test_integrate_exp_closed_form():
    val = integrate_segment(hexp(var()), 0, 1j * np.pi)
    assert val == pytest.approx(np.exp(1j * np.pi) - 1)
    assert val == pytest.approx(-2.0)


def test_integrate_monomials_exact():
    for k in range(9):
        f = poly([0] * k + [1])
        assert integrate_segment(f, 0, 1) == pytest.approx(1 / (k + 1), abs=1e-14)


def test_integrate_segments_batch():
    f = hexp(var())
    ends = np.array([1.0, 1j, 2 - 1j, 0.5])
    vals = integrate_segments(f, np.zeros(4), ends)
    for v, b in zip(vals, ends):
        assert v == pytest.approx(np.exp(b) - 1)


def test_path_independence_polylines():
    f = hprod(hexp(random_poly(4, scale=0.3)), random_poly(3))
    tol = 1e-10
    z = 0.7 + 0.4j
    direct = integrate_polyline(f, [0, z], tol=tol)
    dogleg = integrate_polyline(f, [0, 0.7, z], tol=tol)
    detour = integrate_polyline(f, [0, -0.2 - 0.3j, 0.9j, z], tol=tol)
    assert abs(direct - dogleg) <= 2 * tol
    assert abs(direct - detour) <= 2 * tol


def test_derivative_integral_round_trip():
    f = hsum(hexp(random_poly(3, scale=0.5)), random_poly(5))
    tol = 1e-10
    a, b = 0.2 - 0.1j, -0.8 + 0.6j
    val = integrate_segment(f.derivative(), a, b, tol=tol)
    assert abs(val - (f(b) - f(a))) <= 10 * tol


def test_segment_outside_disk_raises():
    f = poly([1.0], Domain.DISK)
    with pytest.raises(SegmentExitsDomain):
        integrate_segment(f, 0, 1.2)


# -- zero-freeness and quotients -----------------------------------------


def test_exp_is_zero_free_and_nonzero_everywhere():
    p = random_poly(6, scale=0.5)
    f = hexp(p)
    assert f.is_zero_free()
    zs = 0.6 * (rng.standard_normal(200) + 1j * rng.standard_normal(200))
    assert np.all(np.abs(f.eval(zs)) > 0)


def test_plane_polynomial_denominator_rejected():
    with pytest.raises(NotZeroFree):
        hquot(poly([1.0]), poly([1.0, 0, 1.0]))  # 1 + z^2 vanishes at +-i


def test_disk_polynomial_denominator_with_outside_roots_ok():
    den = poly([2.0, 1.0], Domain.DISK)  # root at -2, outside the disk
    f = hquot(poly([1.0], Domain.DISK), den)
    assert isinstance(f, Quot)
    assert f(0.5) == pytest.approx(1 / 2.5)


def test_disk_polynomial_denominator_with_inside_root_rejected():
    den = poly([-0.5, 1.0], Domain.DISK)  # root at 0.5
    with pytest.raises(NotZeroFree):
        hquot(poly([1.0], Domain.DISK), den)


def test_quot_self_cancellation():
    f = hexp(random_poly(3))
    assert hquot(f, f) == poly([1.0])


def test_quot_exact_poly_division():
    z = var()
    q = hquot(hprod(z, z), z)
    assert q == poly([0.0, 1.0])


def test_quot_by_exp_becomes_product():
    p = poly([0.0, 1.0])
    f = hquot(poly([1.0, 1.0]), hexp(p))
    assert isinstance(f, Prod)
    assert f(0.7) == pytest.approx((1 + 0.7) * np.exp(-0.7))


def test_nested_quot_flattening():
    g0 = poly([0.0, 2.0])
    h1 = hexp(poly([0.0, 0.3]))
    h2 = hexp(poly([0.1, -0.2]))
    g1 = hquot(g0, h1)
    g2 = hquot(g1, h2)
    # phi3 / g2 with phi3 == g0 must collapse to h1 * h2
    ratio = hquot(g0, g2)
    z = 0.4 - 0.2j
    assert ratio(z) == pytest.approx(h1(z) * h2(z))
    assert isinstance(ratio, Exp)


def test_prod_merges_exponentials():
    a, b = random_poly(2), random_poly(3)
    f = hprod(hexp(a), hexp(b))
    assert isinstance(f, Exp)
    z = 0.3 + 0.1j
    assert f(z) == pytest.approx(np.exp(a(z) + b(z)))


# -- serialization --------------------------------------------------------


def test_json_round_trip():
    f = hsum(
        hquot(random_poly(2), hexp(random_poly(1))),
        hprod(random_poly(1), hexp(random_poly(2, scale=0.2))),
    )
    blob = json.dumps(to_json(f))
    g = from_json(json.loads(blob))
    zs = rng.standard_normal(20) + 1j * rng.standard_normal(20)
    np.testing.assert_allclose(g.eval(zs), f.eval(zs), rtol=1e-13)


def test_json_kinds_match_schema():
    f = hquot(poly([1.0, 2.0]), hexp(poly([0.0, 1.0])))
    node = to_json(f)
    kinds = set()

    def walk(n):
        kinds.add(n["kind"])
        for key in ("terms", "factors"):
            for ch in n.get(key, []):
                walk(ch)
        for key in ("num", "den", "arg"):
            if key in n:
                walk(n[key])

    walk(node)
    assert kinds <= {"poly", "sum", "prod", "quot", "exp"}
