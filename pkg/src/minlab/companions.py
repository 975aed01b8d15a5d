"""Companion constructions sharing the Weierstrass data.

The same triple that immerses a minimal surface in Euclidean space yields a
maximal surface in Lorentz-Minkowski space (rotating the first two
components by i, keeping the height; lightlike-degenerate where |g| = 1)
and a holomorphic null curve (dropping the real part). A ray-integral
diagnostic measures the integrability of |phi_j| along disk radii, the
quantity whose finiteness obstructs bounded coordinates on complete disks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PointOutsideDomain, ToleranceNotReached
from .holo import Domain, hprod, poly, integrate_segments
from .weierstrass import ImmersionSample, WeierstrassData, phi_funs

__all__ = [
    "MaximalSample",
    "maximal_immerse",
    "null_curve",
    "ray_integral",
    "LIGHTLIKE_TOL",
]

LIGHTLIKE_TOL = 1e-9


@dataclass(frozen=True)
class MaximalSample:
    points: np.ndarray
    X: np.ndarray  # shape (n, 3), coordinates in Lorentz-Minkowski space
    singular: np.ndarray  # boolean; True where the metric degenerates

    def __iter__(self):
        return iter(zip(self.points, self.X, self.singular))


def maximal_immerse(
    data: WeierstrassData, points, tol: float = 1e-10
) -> MaximalSample:
    """Spacelike zero-mean-curvature immersion with the same height.

    Integrates (i phi1, i phi2, phi3) from 0 and flags points where
    | |g| - 1 | < LIGHTLIKE_TOL, the lightlike degeneracy of the induced
    Lorentzian metric.
    """
    pts = np.asarray(points, dtype=complex).ravel()
    data.domain.require(pts)
    f1, f2, f3 = phi_funs(data)
    i_const = poly([1j], data.domain)
    out = np.empty((pts.size, 3))
    starts = np.zeros_like(pts)
    for j, f in enumerate((hprod(i_const, f1), hprod(i_const, f2), f3)):
        out[:, j] = integrate_segments(f, starts, pts, tol=tol).real
    gv = np.abs(data.eval_g(pts))
    singular = np.abs(gv - 1.0) < LIGHTLIKE_TOL
    return MaximalSample(pts, out, singular)


def null_curve(data: WeierstrassData, points, tol: float = 1e-10) -> np.ndarray:
    """F(z) = integral of the triple from 0, real part not taken.

    Componentwise holomorphic with F1'^2 + F2'^2 + F3'^2 = 0; Re F is the
    minimal immersion. Prescribing the third component F3 = f means feeding
    harmonic_lift with f'.
    """
    pts = np.asarray(points, dtype=complex).ravel()
    data.domain.require(pts)
    out = np.empty((pts.size, 3), dtype=complex)
    starts = np.zeros_like(pts)
    for j, f in enumerate(phi_funs(data)):
        out[:, j] = integrate_segments(f, starts, pts, tol=tol)
    return out


# 7-point Gauss / 15-point Kronrod on [-1, 1] for real-valued integrands
from .holo import _XK, _WK, _G7_IDX, _WG  # noqa: E402


def _quad_real(fn, a: float, b: float, tol: float, max_depth: int = 48) -> float:
    stack = [(a, b, 0)]
    total = b - a
    acc = 0.0
    while stack:
        lo, hi, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        xs = mid + half * _XK
        vals = fn(xs)
        k15 = float(np.sum(vals * _WK) * half)
        g7 = float(np.sum(vals[_G7_IDX] * _WG) * half)
        err = abs(k15 - g7)
        if err <= tol * (hi - lo) / total or depth >= max_depth:
            if depth >= max_depth and err > tol * (hi - lo) / total:
                raise ToleranceNotReached(
                    "ray integral did not converge", best=acc + k15, err=err
                )
            acc += k15
        else:
            stack.append((lo, mid, depth + 1))
            stack.append((mid, hi, depth + 1))
    return acc


def ray_integral(
    data: WeierstrassData,
    theta: float,
    coordinate: int,
    upper: float,
    tol: float = 1e-10,
) -> float:
    """Integral of |phi_j| along the ray r e^{i theta}, r from 0 to upper.

    Only meaningful on the disk with upper < 1; a finite value for the full
    norm along some ray is what rules out bounded coordinates on complete
    disks, so this is exposed as a diagnostic.
    """
    if data.domain is not Domain.DISK:
        raise PointOutsideDomain("ray integrals are a disk diagnostic")
    if not (0 < upper < 1):
        raise ValueError("upper must lie in (0, 1)")
    if coordinate not in (1, 2, 3):
        raise ValueError("coordinate must be 1, 2 or 3")
    f = phi_funs(data)[coordinate - 1]
    direction = np.exp(1j * theta)

    def integrand(r):
        return np.abs(f._ev(np.asarray(r, dtype=complex) * direction))

    return _quad_real(integrand, 0.0, upper, tol)


def ray_norm_integral(
    data: WeierstrassData, theta: float, upper: float, tol: float = 1e-10
) -> float:
    """Like ray_integral but for the full Euclidean norm of the triple."""
    if data.domain is not Domain.DISK:
        raise PointOutsideDomain("ray integrals are a disk diagnostic")
    f1, f2, f3 = phi_funs(data)
    direction = np.exp(1j * theta)

    def integrand(r):
        z = np.asarray(r, dtype=complex) * direction
        return np.sqrt(
            np.abs(f1._ev(z)) ** 2 + np.abs(f2._ev(z)) ** 2 + np.abs(f3._ev(z)) ** 2
        )

    return _quad_real(integrand, 0.0, upper, tol)
