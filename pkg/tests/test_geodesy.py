import numpy as np
import pytest

from minlab.errors import ConstraintViolated
from minlab.geodesy import (
    build_grid,
    claim_scan,
    distance,
    ring_to_ring_distance,
)
from minlab.labyrinth import build as build_labyrinth

rng = np.random.default_rng(424242)


def const_factor(c):
    return lambda z: np.full(np.shape(z), float(c))


def enneper_factor(z):
    r = np.abs(np.asarray(z))
    return 0.5 * (1.0 + r**2)


def test_flat_metric_radial_distance():
    grid = build_grid(const_factor(1.0), 1.0, base_resolution=48, ensure_radii=(0.5,))
    est = distance(grid, 0.5)
    assert est.distance == pytest.approx(0.5, rel=0.02)
    assert est.converged


def test_scaled_metric_radial_distance():
    grid = build_grid(const_factor(2.0), 1.0, base_resolution=48, ensure_radii=(0.5,))
    est = distance(grid, 0.5)
    assert est.distance == pytest.approx(1.0, rel=0.02)


def test_enneper_radial_distance_closed_form():
    grid = build_grid(enneper_factor, 0.8, base_resolution=64, ensure_radii=(0.8,))
    est = distance(grid, 0.8)
    assert est.distance == pytest.approx(0.485333, rel=0.02)


def test_witness_path_endpoints():
    grid = build_grid(const_factor(1.0), 1.0, base_resolution=32, ensure_radii=(0.5,))
    est = distance(grid, 0.5)
    assert est.path[0] == 0
    assert abs(est.path[-1]) == pytest.approx(0.5, abs=1e-12)


def test_metric_homogeneity_exact():
    def bumpy(z):
        r = np.abs(np.asarray(z))
        return 1.0 + 0.5 * np.sin(3 * r) ** 2

    g1 = build_grid(bumpy, 1.0, base_resolution=32, ensure_radii=(0.7,))
    g3 = build_grid(lambda z: 3.0 * bumpy(z), 1.0, base_resolution=32, ensure_radii=(0.7,))
    d1 = distance(g1, 0.7)
    d3 = distance(g3, 0.7)
    assert d3.distance == pytest.approx(3 * d1.distance, rel=1e-9)
    # tie-breaking may pick a different argmin polyline of the same length;
    # endpoints and scaled length must agree
    assert d3.path[0] == d1.path[0] == 0
    assert abs(d3.path[-1]) == pytest.approx(abs(d1.path[-1]), abs=1e-12)


def test_metric_monotonicity_random_grids():
    for trial in range(5):
        coeffs = rng.random(4) + 0.2

        def lam1(z, c=coeffs):
            r = np.abs(np.asarray(z))
            th = np.angle(np.asarray(z) + 0j)
            return c[0] + c[1] * r**2 + 0.3 * c[2] * np.cos(th) ** 2

        def lam2(z, c=coeffs):
            return lam1(z) + 0.1 + 0.4 * c[3] * np.abs(np.asarray(z))

        g1 = build_grid(lam1, 1.0, base_resolution=24, ensure_radii=(0.8,))
        g2 = build_grid(lam2, 1.0, base_resolution=24, ensure_radii=(0.8,))
        d1 = distance(g1, 0.8)
        d2 = distance(g2, 0.8)
        assert d1.distance <= d2.distance


def test_refinement_delta_small_on_smooth_metric():
    grid = build_grid(enneper_factor, 0.9, base_resolution=48, ensure_radii=(0.9,))
    est = distance(grid, 0.9)
    assert est.refinement_delta < 0.02


def test_nonpositive_factor_rejected():
    with pytest.raises(ConstraintViolated):
        build_grid(lambda z: np.zeros(np.shape(z)), 1.0, base_resolution=16)


def test_missing_ring_rejected():
    grid = build_grid(const_factor(1.0), 1.0, base_resolution=16)
    with pytest.raises(ConstraintViolated):
        distance(grid, 0.434537)


def test_grid_spacing_invariants_with_labyrinth():
    lab = build_labyrinth(4, 0.3, 0.9)
    grid = build_grid(const_factor(1.0), 1.0, lab=lab, base_resolution=24)
    radii = grid.ring_radii
    fine = (radii >= lab.inner_edge) & (radii <= lab.R_prime)
    gaps = np.diff(radii[fine])
    assert gaps.max() <= 1.0 / (8 * lab.N**3) + 1e-12
    assert 2 * np.pi / grid.n_angles <= 1.0 / (2 * lab.N**2) + 1e-12


def test_claim_scan_single_n_floor():
    rep = claim_scan(1.0, [4], 0.3, 0.9, base_resolution=24)
    assert rep.distances[0] >= 1.0


def test_claim_scan_c_homogeneity():
    r1 = claim_scan(1.0, [4], 0.3, 0.9, base_resolution=24)
    r2 = claim_scan(2.0, [4], 0.3, 0.9, base_resolution=24)
    assert r2.distances[0] == pytest.approx(2 * r1.distances[0], rel=1e-6)


def test_ring_to_ring_flat():
    grid = build_grid(const_factor(1.0), 1.0, base_resolution=32, ensure_radii=(0.2, 0.9))
    d = ring_to_ring_distance(grid, 0.2, 0.9)
    assert d == pytest.approx(0.7, rel=0.02)
