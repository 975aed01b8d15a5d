"""Weierstrass data, induced immersions, conformal metric, harmonic lift.

A pair (g, phi3) of holomorphic functions on the plane or the unit disk
determines a conformal minimal immersion X(z) = Re integral of the triple

    phi1 = (1/g - g) phi3 / 2,   phi2 = i (1/g + g) phi3 / 2,   phi3,

anchored at X(0) = 0. The Gauss map is kept internally in factored form
(g_base divided by a list of zero-free factors) so that iterated
deformations evaluate through sums of exponents rather than nested
quotients; the public `g` is the combined quotient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GaussMapZero, IdenticallyZero
from .holo import (
    Domain,
    Exp,
    HoloFun,
    from_json,
    hprod,
    hquot,
    hsum,
    integrate_segments,
    poly,
    to_json,
)

__all__ = [
    "WeierstrassData",
    "ImmersionSample",
    "phi_triple",
    "phi_funs",
    "immerse",
    "immerse_via",
    "metric_factor",
    "log_metric_factor",
    "harmonic_lift",
    "data_to_json",
    "data_from_json",
]


@dataclass(frozen=True)
class WeierstrassData:
    """Gauss map and height differential on a simply connected domain."""

    g_base: HoloFun
    phi3: HoloFun
    domain: Domain
    divisors: tuple = ()

    @property
    def g(self) -> HoloFun:
        """The combined Gauss map g_base / (product of divisors)."""
        if not self.divisors:
            return self.g_base
        return hquot(self.g_base, hprod(*self.divisors))

    def eval_g(self, z) -> np.ndarray:
        val = np.asarray(self.g_base._ev(np.asarray(z, dtype=complex)))
        for d in self.divisors:
            val = val / d._ev(np.asarray(z, dtype=complex))
        return val

    def log_abs_g(self, z) -> np.ndarray:
        """log |g(z)|, stable under extreme exponential factors."""
        zz = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore"):
            acc = np.log(np.abs(self.g_base._ev(zz)))
        for d in self.divisors:
            if isinstance(d, Exp):
                acc = acc - d.arg._ev(zz).real
            else:
                acc = acc - np.log(np.abs(d._ev(zz)))
        return acc


@dataclass(frozen=True)
class ImmersionSample:
    points: np.ndarray
    X: np.ndarray  # shape (n, 3)

    def __iter__(self):
        return iter(zip(self.points, self.X))


def phi_triple(data: WeierstrassData, z):
    """(phi1, phi2, phi3) at z; conformal: phi1^2 + phi2^2 + phi3^2 = 0."""
    zz = np.asarray(z, dtype=complex)
    data.domain.require(zz)
    gv = data.eval_g(zz)
    if np.any(np.abs(gv) == 0.0):
        raise GaussMapZero("Gauss map vanishes at a queried point")
    p3 = data.phi3._ev(zz) + np.zeros_like(gv)
    inv = 1.0 / gv
    phi1 = 0.5 * (inv - gv) * p3
    phi2 = 0.5j * (inv + gv) * p3
    return np.stack([phi1, phi2, p3], axis=0)


def phi_funs(data: WeierstrassData) -> tuple:
    """The triple as HoloFun integrands, with removable quotients cancelled."""
    ratio = hquot(data.phi3, data.g_base)  # phi3 / g_base
    if data.divisors:
        ratio = hprod(ratio, *data.divisors)  # phi3 / g
        direct = hquot(hprod(data.g_base, data.phi3), hprod(*data.divisors))
    else:
        direct = hprod(data.g_base, data.phi3)  # g * phi3
    half = poly([0.5], data.domain)
    ihalf = poly([0.5j], data.domain)
    f1 = hprod(half, hsum(ratio, -direct))
    f2 = hprod(ihalf, hsum(ratio, direct))
    return f1, f2, data.phi3


def immerse(
    data: WeierstrassData, points, tol: float = 1e-10, paths=None
) -> ImmersionSample:
    """X(z) = Re of the integral of the triple from 0 to each point.

    Integration runs along radial segments by default; `paths` may supply a
    polyline (list of vertices, final vertex replaced per point) shared by
    all points when the radial path is unsuitable.
    """
    pts = np.asarray(points, dtype=complex).ravel()
    data.domain.require(pts)
    f1, f2, f3 = phi_funs(data)
    if paths is None:
        starts = np.zeros_like(pts)
        out = np.empty((pts.size, 3))
        for j, f in enumerate((f1, f2, f3)):
            out[:, j] = integrate_segments(f, starts, pts, tol=tol).real
    else:
        out = np.empty((pts.size, 3))
        for i, z in enumerate(pts):
            verts = list(paths[:-1]) + [z]
            out[i] = immerse_via(data, verts, tol=tol)
    return ImmersionSample(pts, out)


def immerse_via(data: WeierstrassData, polyline, tol: float = 1e-10) -> np.ndarray:
    """X at the final vertex of an explicit polyline path from 0."""
    verts = np.asarray(polyline, dtype=complex)
    if verts[0] != 0:
        verts = np.concatenate([[0.0 + 0j], verts])
    out = np.empty(3)
    for j, f in enumerate(phi_funs(data)):
        per_seg = integrate_segments(
            f, verts[:-1], verts[1:], tol=tol / max(1, len(verts) - 1)
        )
        out[j] = per_seg.sum().real
    return out


def metric_factor(data: WeierstrassData, z):
    """Conformal factor lambda = (1/|g| + |g|) |phi3| / 2 (may overflow)."""
    lam = np.exp(log_metric_factor(data, z))
    if np.ndim(z) == 0:
        return float(lam)
    return lam


def log_metric_factor(data: WeierstrassData, z):
    """log lambda, finite even where the factored g overflows doubles."""
    zz = np.asarray(z, dtype=complex)
    data.domain.require(zz)
    L = data.log_abs_g(zz)
    if np.any(np.isinf(L) & (L < 0)) or np.any(np.isnan(L)):
        raise GaussMapZero("Gauss map vanishes at a queried point")
    with np.errstate(divide="ignore"):
        val = np.log(0.5) + np.logaddexp(L, -L) + np.log(np.abs(data.phi3._ev(zz)))
    if np.ndim(z) == 0:
        return float(val)
    return val


def harmonic_lift(fprime: HoloFun) -> WeierstrassData:
    """Weierstrass data (f', f') whose immersion has third coordinate Re f.

    `fprime` is the derivative of the holomorphic completion f = u + i*v of
    the prescribed harmonic function u; the height differential f' dz equals
    du + i (conjugate differential), so X3(z) = Re f(z) - Re f(0).
    """
    if _is_identically_zero(fprime):
        msg = "fprime is identically zero; the prescribed function is constant"
        if fprime.domain is Domain.PLANE:
            msg += " (on the plane the flat plane x3 = const realizes it)"
        raise IdenticallyZero(msg)
    return WeierstrassData(fprime, fprime, fprime.domain)


def _is_identically_zero(f: HoloFun) -> bool:
    if f.is_zero():
        return True
    t = np.linspace(0.05, 0.9, 16)
    zs = t * np.exp(1j * np.pi * t)
    return bool(np.all(np.abs(f.eval(zs)) < 1e-15))


def data_to_json(data: WeierstrassData) -> dict:
    return {
        "g": to_json(data.g),
        "phi3": to_json(data.phi3),
        "domain": data.domain.value,
    }


def data_from_json(node: dict) -> WeierstrassData:
    domain = Domain(node.get("domain", "plane"))
    g = from_json(node["g"], domain)
    phi3 = from_json(node["phi3"], domain)
    return WeierstrassData(g, phi3, domain)
