import math

import numpy as np
import pytest

from minlab.errors import ConstraintViolated, ZeroDetected
from minlab.holo import Domain, poly, var
from minlab.labyrinth import Labyrinth, build, contains, min_phi3_modulus

rng = np.random.default_rng(7181)


def oracle_contains(lab: Labyrinth, z: complex) -> bool:
    """Literal re-implementation of the set definition, piece by piece."""
    N = lab.N
    for n in range(1, 2 * N**2 + 1):
        s_n = lab.R_prime - n / N**3
        s_prev = lab.R_prime - (n - 1) / N**3
        lo = s_n + 1 / (4 * N**3)
        hi = s_prev - 1 / (4 * N**3)
        if lo <= abs(z) <= hi:
            w = ((-1) ** n) * z
            a = math.atan2(w.imag, w.real) % (2 * math.pi)
            return 1 / N**2 <= a <= 2 * math.pi - 1 / N**2
    return False


def test_build_basic_geometry():
    lab = build(4, 0.3, 0.9)
    assert lab.n_pieces == 32
    assert lab.s(1) == pytest.approx(0.884375)
    lo, hi = lab.band(1)
    assert lo == pytest.approx(0.88828125)
    assert hi == pytest.approx(0.89609375)


def test_build_constraint_violation():
    with pytest.raises(ConstraintViolated):
        build(4, 0.5, 0.9)  # 2/4 = 0.5 >= 0.4


def test_build_n6_inner_radius():
    lab = build(6, 0.3, 0.9)
    assert lab.s(72) == pytest.approx(0.9 - 1 / 3)
    assert lab.s(72) > 0.3


def test_build_disk_requires_R_below_one():
    with pytest.raises(ConstraintViolated):
        build(4, 0.3, 1.1, domain=Domain.DISK)


def test_contains_spec_cases():
    lab = build(4, 0.3, 0.9)
    assert contains(lab, 0.892 * np.exp(1j * np.pi / 2))
    assert not contains(lab, 0.892 * np.exp(1j * np.pi))  # gate of K_1
    assert not contains(lab, 0.88 + 0j)  # band of K_2 but in its gate


def test_contains_matches_oracle_on_grid():
    lab = build(3, 0.25, 0.95)
    radii = np.linspace(0.01, 1.05, 120)
    theta = np.linspace(0, 2 * np.pi, 97, endpoint=False)
    zs = (radii[:, None] * np.exp(1j * theta[None, :])).ravel()
    got = lab.contains(zs)
    want = np.array([oracle_contains(lab, complex(z)) for z in zs])
    np.testing.assert_array_equal(got, want)


def test_piece_disjointness_on_samples():
    lab = build(4, 0.3, 0.9)
    zs = (0.2 + 0.8 * rng.random(4000)) * np.exp(2j * np.pi * rng.random(4000))
    idx = lab.piece_index(zs)
    inside = idx > 0
    # every contained point lies in exactly the band its index claims
    for z, n in zip(zs[inside], idx[inside]):
        lo, hi = lab.band(int(n))
        assert lo <= abs(z) <= hi


def test_gate_alternation():
    lab = build(5, 0.3, 0.9)
    for n in range(1, lab.n_pieces):
        delta = abs(lab.gate_angle(n + 1) - lab.gate_angle(n))
        assert delta == pytest.approx(np.pi)


def test_annulus_confinement():
    lab = build(4, 0.3, 0.9)
    zs = 1.2 * (rng.random(5000) * np.exp(2j * np.pi * rng.random(5000)))
    inside = lab.contains(zs)
    r = np.abs(zs[inside])
    assert np.all(r > lab.r_prime)
    assert np.all(r < lab.R_prime)


def test_gap_width_exact():
    lab = build(4, 0.3, 0.9)
    for n in range(1, lab.n_pieces):
        gap = lab.band(n)[0] - lab.band(n + 1)[1]
        assert gap == pytest.approx(1.0 / (2 * lab.N**3), abs=1e-15)


def test_min_phi3_constant():
    assert min_phi3_modulus(poly([1.0]), 0.3, 0.9) == pytest.approx(0.9)


def test_min_phi3_linear():
    # |z| minimized at the inner radius
    assert min_phi3_modulus(var(), 0.3, 0.9, samples=301) == pytest.approx(0.27)


def test_min_phi3_zero_detected_and_shifted_annulus():
    shifted = poly([-0.5, 1.0])  # zero at 0.5
    with pytest.raises(ZeroDetected):
        min_phi3_modulus(shifted, 0.3, 0.9, samples=401)
    val = min_phi3_modulus(shifted, 0.6, 0.9, samples=401)
    assert val == pytest.approx(0.09, rel=2e-2)


def test_boundary_loops_lie_on_piece_boundary():
    lab = build(3, 0.2, 0.95)
    loops = lab.boundary_loops(64)
    assert len(loops) == lab.n_pieces
    for n, loop in enumerate(loops, start=1):
        lo, hi = lab.band(n)
        r = np.abs(loop)
        assert np.all(r >= lo - 1e-12)
        assert np.all(r <= hi + 1e-12)


def test_svg_emits_polygons():
    lab = build(3, 0.2, 0.95)
    svg = lab.to_svg(points_per_arc=16)
    assert svg.count("<polygon") == lab.n_pieces
    assert svg.startswith("<svg")
