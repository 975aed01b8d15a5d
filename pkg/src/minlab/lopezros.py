"""Zero-free deformation of Weierstrass data preserving the height.

Dividing the Gauss map by a zero-free holomorphic h leaves the height
differential untouched, so the third coordinate of the immersion is
preserved exactly while the conformal factor is reshaped to

    lambda_h = (|h|/|g| + |g|/|h|) |phi3| / 2  >=  |phi3|,

the inequality being arithmetic-geometric. Choosing h large on a compact
set amplifies intrinsic lengths there without moving the inner disk.
"""

from __future__ import annotations

import numpy as np

from .errors import NotZeroFree
from .holo import Exp, HoloFun
from .weierstrass import WeierstrassData

__all__ = ["transform", "deformed_metric_factor", "log_deformed_metric_factor"]


def transform(data: WeierstrassData, h: HoloFun) -> WeierstrassData:
    """Data with Gauss map g/h and the identical height differential."""
    if not h.is_zero_free():
        raise NotZeroFree("deformation parameter h must be zero-free")
    return WeierstrassData(
        data.g_base, data.phi3, data.domain, data.divisors + (h,)
    )


def _log_abs_h(h: HoloFun, zz: np.ndarray) -> np.ndarray:
    if isinstance(h, Exp):
        return h.arg._ev(zz).real
    return np.log(np.abs(h._ev(zz)))


def log_deformed_metric_factor(data: WeierstrassData, h: HoloFun, z):
    """log of the deformed conformal factor, overflow-safe."""
    zz = np.asarray(z, dtype=complex)
    data.domain.require(zz)
    L = _log_abs_h(h, zz) - data.log_abs_g(zz)
    with np.errstate(divide="ignore"):
        val = np.log(0.5) + np.logaddexp(L, -L) + np.log(np.abs(data.phi3._ev(zz)))
    if np.ndim(z) == 0:
        return float(val)
    return val


def deformed_metric_factor(data: WeierstrassData, h: HoloFun, z):
    """Conformal factor of the transformed immersion at z."""
    lam = np.exp(log_deformed_metric_factor(data, h, z))
    if np.ndim(z) == 0:
        return float(lam)
    return lam
