import numpy as np
import pytest

from minlab.errors import GaussMapZero, IdenticallyZero
from minlab.holo import Domain, hexp, poly, var
from minlab.weierstrass import (
    WeierstrassData,
    data_from_json,
    data_to_json,
    harmonic_lift,
    immerse,
    immerse_via,
    log_metric_factor,
    metric_factor,
    phi_triple,
)

rng = np.random.default_rng(515253)

FLAT = WeierstrassData(poly([1.0]), poly([1.0]), Domain.PLANE)
ENNEPER = WeierstrassData(var(), var(), Domain.PLANE)


def enneper_exact(z: complex) -> np.ndarray:
    """Closed-form Enneper immersion anchored at 0."""
    return np.array(
        [
            (0.5 * (z - z**3 / 3)).real,
            (0.5j * (z + z**3 / 3)).real,
            (z**2 / 2).real,
        ]
    )


def random_data(max_deg=4):
    def rpoly(deg):
        c = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
        return poly(c)

    # zero-free g via exp keeps phi_triple defined everywhere
    g = hexp(rpoly(rng.integers(1, max_deg)))
    phi3 = rpoly(rng.integers(1, max_deg))
    return WeierstrassData(g, phi3, Domain.PLANE)


# -- phi_triple -----------------------------------------------------------


def test_phi_triple_flat():
    np.testing.assert_allclose(phi_triple(FLAT, 0.3 + 0.2j), [0, 1j, 1], atol=1e-15)


def test_phi_triple_enneper_at_two():
    got = phi_triple(ENNEPER, 2.0)
    np.testing.assert_allclose(got, [-1.5, 2.5j, 2.0], atol=1e-14)


def test_phi_triple_conformality_random():
    for _ in range(200):
        data = random_data()
        z = rng.standard_normal() + 1j * rng.standard_normal()
        p = phi_triple(data, z)
        residual = abs(p[0] ** 2 + p[1] ** 2 + p[2] ** 2)
        norm2 = sum(abs(c) ** 2 for c in p)
        assert residual <= 1e-12 * max(norm2, 1e-300)


def test_phi_triple_gauss_map_zero():
    with pytest.raises(GaussMapZero):
        phi_triple(WeierstrassData(var(), poly([1.0]), Domain.PLANE), 0.0)


# -- immerse --------------------------------------------------------------


def test_immerse_flat_plane():
    zs = rng.standard_normal(20) + 1j * rng.standard_normal(20)
    sample = immerse(FLAT, zs)
    for z, X in sample:
        np.testing.assert_allclose(X, [0.0, -z.imag, z.real], atol=1e-12)


def test_immerse_enneper_closed_form():
    zs = np.array([1.0, 0.5 + 0.5j, -0.3j, 1.2 - 0.7j])
    sample = immerse(ENNEPER, zs)
    for z, X in sample:
        np.testing.assert_allclose(X, enneper_exact(complex(z)), atol=1e-10)
    np.testing.assert_allclose(sample.X[0], [1 / 3, 0.0, 0.5], atol=1e-12)


def test_immerse_at_origin():
    for data in (FLAT, ENNEPER, random_data()):
        sample = immerse(data, [0.0])
        np.testing.assert_allclose(sample.X[0], 0.0, atol=1e-14)


def test_immerse_path_independence():
    data = random_data()
    z = 0.8 - 0.6j
    radial = immerse(data, [z], tol=1e-10).X[0]
    rect = immerse_via(data, [0, z.real, z], tol=1e-10)
    np.testing.assert_allclose(radial, rect, atol=2e-10)


# -- metric ---------------------------------------------------------------


def test_metric_flat_is_one():
    for z in (0.0, 1 + 1j, -2j):
        assert metric_factor(FLAT, z) == pytest.approx(1.0)


def test_metric_enneper_value():
    assert metric_factor(ENNEPER, 0.6j) == pytest.approx(0.68)


def test_metric_matches_first_fundamental_form():
    h = 1e-4
    for data in (ENNEPER, FLAT):
        zs = 0.8 * (rng.standard_normal(25) + 1j * rng.standard_normal(25))
        flat_pts = np.stack([zs + h, zs - h]).ravel()
        X = immerse(data, flat_pts, tol=1e-12).X
        dX = (X[: zs.size] - X[zs.size :]) / (2 * h)
        E = np.sum(dX * dX, axis=1)
        lam2 = np.array([metric_factor(data, z) ** 2 for z in zs])
        np.testing.assert_allclose(E, lam2, rtol=1e-5)


def test_log_metric_factor_consistency():
    data = random_data()
    zs = rng.standard_normal(10) + 1j * rng.standard_normal(10)
    lam = np.array([metric_factor(data, z) for z in zs])
    loglam = log_metric_factor(data, zs)
    np.testing.assert_allclose(np.exp(loglam), lam, rtol=1e-12)


# -- harmonic lift ----------------------------------------------------------


def test_lift_linear():
    data = harmonic_lift(poly([1.0]))
    assert data.g_base == data.phi3
    zs = rng.standard_normal(10) + 1j * rng.standard_normal(10)
    sample = immerse(data, zs)
    np.testing.assert_allclose(sample.X[:, 2], zs.real, atol=1e-10)


def test_lift_square():
    data = harmonic_lift(poly([0.0, 2.0]))  # u = Re z^2
    X = immerse(data, [1 + 1j]).X[0]
    assert X[2] == pytest.approx(((1 + 1j) ** 2).real, abs=1e-10)
    assert X[2] == pytest.approx(0.0, abs=1e-10)


def test_lift_exp():
    data = harmonic_lift(hexp(var()))
    X1 = immerse(data, [1.0]).X[0]
    X0 = immerse(data, [0.0]).X[0]
    assert X1[2] - X0[2] == pytest.approx(np.e - 1, abs=1e-8)


def test_lift_third_coordinate_is_primitive():
    fprime = poly([0.3, -1.0, 2.5])
    data = harmonic_lift(fprime)
    zs = rng.standard_normal(30) + 1j * rng.standard_normal(30)
    sample = immerse(data, zs)
    # independent primitive: coefficients integrated term by term
    F = poly([0.0, 0.3, -0.5, 2.5 / 3])
    np.testing.assert_allclose(sample.X[:, 2], [F(z).real for z in zs], atol=1e-9)


def test_lift_rejects_zero():
    with pytest.raises(IdenticallyZero):
        harmonic_lift(poly([0.0]))


# -- serialization ----------------------------------------------------------


def test_data_json_round_trip():
    data = random_data()
    node = data_to_json(data)
    back = data_from_json(node)
    z = 0.3 + 0.4j
    np.testing.assert_allclose(phi_triple(back, z), phi_triple(data, z), rtol=1e-12)
    assert node["domain"] == "plane"
