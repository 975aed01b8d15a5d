"""Closed algebra of exactly differentiable holomorphic functions.

Functions are expression trees over complex polynomials, sums, products,
quotients and exponentials, on either the full plane or the open unit disk.
Derivatives are symbolic; evaluation is vectorized over numpy arrays;
contour integration along segments and polylines uses an adaptive
Gauss-Kronrod 7/15 rule batched over many segments at once.

Quotient denominators must be zero-free on the domain by construction
(exponentials, validated zero-free polynomials, and products/quotients of
those), so evaluation never divides by zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    NotZeroFree,
    PointOutsideDomain,
    SegmentExitsDomain,
    ToleranceNotReached,
)

__all__ = [
    "Domain",
    "HoloFun",
    "Poly",
    "Sum",
    "Prod",
    "Quot",
    "Exp",
    "poly",
    "const",
    "var",
    "hsum",
    "hprod",
    "hquot",
    "hexp",
    "integrate_segment",
    "integrate_segments",
    "integrate_polyline",
    "to_json",
    "from_json",
]


class Domain(Enum):
    """Where a function lives: the complex plane or the open unit disk."""

    PLANE = "plane"
    DISK = "disk"

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if self is Domain.PLANE:
            return np.isfinite(z.real) & np.isfinite(z.imag)
        return np.abs(z) < 1.0

    def require(self, z) -> None:
        ok = self.contains(z)
        if not np.all(ok):
            raise PointOutsideDomain(f"point outside {self.value} domain")


def _meet(a: Domain, b: Domain) -> Domain:
    return Domain.DISK if Domain.DISK in (a, b) else Domain.PLANE


_ZERO_TOL = 1e-14


class HoloFun:
    """Base class; concrete nodes are Poly, Sum, Prod, Quot, Exp."""

    domain: Domain

    # -- public API ---------------------------------------------------------

    def eval(self, z):
        """Value of the expression at z (scalar or ndarray of complex)."""
        zz = np.asarray(z, dtype=complex)
        self.domain.require(zz)
        out = self._ev(zz)
        if np.isscalar(z) or np.ndim(z) == 0:
            return complex(out)
        return out

    def __call__(self, z):
        return self.eval(z)

    def derivative(self) -> "HoloFun":
        """Exact symbolic derivative (product/quotient/chain rules)."""
        raise NotImplementedError

    def is_zero_free(self) -> bool:
        """True when the tree certifies the function never vanishes."""
        raise NotImplementedError

    def is_zero(self) -> bool:
        """True when the tree is structurally the zero function."""
        return False

    # -- operators ----------------------------------------------------------

    def __add__(self, other):
        return hsum(self, _as_holo(other, self.domain))

    __radd__ = __add__

    def __neg__(self):
        return hprod(poly([-1.0], self.domain), self)

    def __sub__(self, other):
        return hsum(self, -_as_holo(other, self.domain))

    def __rsub__(self, other):
        return hsum(_as_holo(other, self.domain), -self)

    def __mul__(self, other):
        return hprod(self, _as_holo(other, self.domain))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return hquot(self, _as_holo(other, self.domain))

    def __rtruediv__(self, other):
        return hquot(_as_holo(other, self.domain), self)

    # -- internals ----------------------------------------------------------

    def _ev(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def _as_holo(x, domain: Domain) -> HoloFun:
    if isinstance(x, HoloFun):
        return x
    return poly([complex(x)], domain)


@dataclass(frozen=True)
class Poly(HoloFun):
    """Complex-coefficient polynomial, coefficients in ascending order."""

    coeffs: tuple
    domain: Domain = Domain.PLANE

    def _ev(self, z):
        acc = np.zeros_like(z) + self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * z + c
        return acc

    def derivative(self):
        if len(self.coeffs) == 1:
            return Poly((0j,), self.domain)
        d = tuple(k * c for k, c in enumerate(self.coeffs) if k > 0)
        return Poly(d, self.domain)

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self):
        return all(abs(c) == 0.0 for c in self.coeffs)

    def is_zero_free(self):
        trimmed = _trim(self.coeffs)
        if len(trimmed) == 1:
            return abs(trimmed[0]) > 0.0
        if self.domain is Domain.PLANE:
            return False
        roots = np.roots(list(reversed(trimmed)))
        return bool(np.all(np.abs(roots) >= 1.0 - 1e-12))


def _trim(coeffs):
    last = 0
    for k, c in enumerate(coeffs):
        if abs(c) > 0.0:
            last = k
    return tuple(coeffs[: last + 1])


@dataclass(frozen=True)
class Sum(HoloFun):
    terms: tuple
    domain: Domain = Domain.PLANE

    def _ev(self, z):
        acc = self.terms[0]._ev(z)
        for t in self.terms[1:]:
            acc = acc + t._ev(z)
        return acc

    def derivative(self):
        return hsum(*(t.derivative() for t in self.terms))

    def is_zero_free(self):
        return False


@dataclass(frozen=True)
class Prod(HoloFun):
    factors: tuple
    domain: Domain = Domain.PLANE

    def _ev(self, z):
        acc = self.factors[0]._ev(z)
        for f in self.factors[1:]:
            acc = acc * f._ev(z)
        return acc

    def derivative(self):
        parts = []
        for i, f in enumerate(self.factors):
            others = self.factors[:i] + self.factors[i + 1 :]
            parts.append(hprod(f.derivative(), *others))
        return hsum(*parts)

    def is_zero_free(self):
        return all(f.is_zero_free() for f in self.factors)

    def is_zero(self):
        return any(f.is_zero() for f in self.factors)


@dataclass(frozen=True)
class Quot(HoloFun):
    num: HoloFun
    den: HoloFun
    domain: Domain = Domain.PLANE

    def _ev(self, z):
        return self.num._ev(z) / self.den._ev(z)

    def derivative(self):
        n, d = self.num, self.den
        return hsum(
            hquot(n.derivative(), d),
            -hquot(hprod(n, d.derivative()), hprod(d, d)),
        )

    def is_zero_free(self):
        return self.num.is_zero_free() and self.den.is_zero_free()

    def is_zero(self):
        return self.num.is_zero()


@dataclass(frozen=True)
class Exp(HoloFun):
    arg: HoloFun
    domain: Domain = Domain.PLANE

    def _ev(self, z):
        with np.errstate(over="ignore"):
            return np.exp(self.arg._ev(z))

    def derivative(self):
        return hprod(self.arg.derivative(), self)

    def is_zero_free(self):
        return True


# -- smart constructors -----------------------------------------------------


def poly(coeffs, domain: Domain = Domain.PLANE) -> Poly:
    """Polynomial from ascending coefficients (scalars or array)."""
    cs = tuple(complex(c) for c in np.atleast_1d(np.asarray(coeffs)))
    if not cs:
        cs = (0j,)
    return Poly(_trim(cs), domain)


def const(c, domain: Domain = Domain.PLANE) -> Poly:
    return poly([c], domain)


def var(domain: Domain = Domain.PLANE) -> Poly:
    """The coordinate function z."""
    return poly([0.0, 1.0], domain)


def hsum(*terms: HoloFun) -> HoloFun:
    flat = []
    domain = Domain.PLANE
    for t in terms:
        domain = _meet(domain, t.domain)
        if isinstance(t, Sum):
            flat.extend(t.terms)
        else:
            flat.append(t)
    polys = [t for t in flat if isinstance(t, Poly)]
    rest = [t for t in flat if not isinstance(t, Poly)]
    if polys:
        n = max(len(p.coeffs) for p in polys)
        acc = np.zeros(n, dtype=complex)
        for p in polys:
            acc[: len(p.coeffs)] += p.coeffs
        merged = poly(acc, domain)
        if not merged.is_zero() or not rest:
            rest.insert(0, merged)
    if not rest:
        return poly([0.0], domain)
    if len(rest) == 1:
        return _with_domain(rest[0], domain)
    return Sum(tuple(rest), domain)


def hprod(*factors: HoloFun) -> HoloFun:
    flat = []
    domain = Domain.PLANE
    for f in factors:
        domain = _meet(domain, f.domain)
        if isinstance(f, Prod):
            flat.extend(f.factors)
        else:
            flat.append(f)
    if any(f.is_zero() for f in flat):
        return poly([0.0], domain)
    polys = [f for f in flat if isinstance(f, Poly)]
    exps = [f for f in flat if isinstance(f, Exp)]
    rest = [f for f in flat if not isinstance(f, (Poly, Exp))]
    out = []
    if polys:
        acc = np.array([1.0 + 0j])
        for p in polys:
            acc = np.convolve(acc, np.asarray(p.coeffs))
        merged = poly(acc, domain)
        if merged.coeffs != (1 + 0j,):
            out.append(merged)
    if exps:
        out.append(Exp(hsum(*(e.arg for e in exps)), domain))
    out.extend(rest)
    if not out:
        return poly([1.0], domain)
    if len(out) == 1:
        return _with_domain(out[0], domain)
    return Prod(tuple(out), domain)


def hquot(num: HoloFun, den: HoloFun) -> HoloFun:
    """Quotient with structural simplification; denominator must be zero-free
    unless it cancels exactly."""
    domain = _meet(num.domain, den.domain)
    if den.is_zero():
        raise NotZeroFree("denominator is identically zero")
    if num == den:
        return poly([1.0], domain)
    if isinstance(num, Quot):
        return hquot(num.num, hprod(num.den, den))
    if isinstance(den, Quot):
        return hquot(hprod(num, den.den), den.num)
    if isinstance(den, Exp):
        return hprod(num, Exp(-den.arg, domain))
    if isinstance(den, Poly):
        if den.degree() == 0:
            return hprod(poly([1.0 / den.coeffs[0]], domain), num)
        if isinstance(num, Poly):
            q = _try_polydiv(num, den)
            if q is not None:
                return _with_domain(q, domain)
    if isinstance(num, Prod) and den in num.factors:
        i = num.factors.index(den)
        return hprod(*(num.factors[:i] + num.factors[i + 1 :]))
    if isinstance(den, Prod) and num in den.factors:
        i = den.factors.index(num)
        return hquot(poly([1.0], domain), hprod(*(den.factors[:i] + den.factors[i + 1 :])))
    if not den.is_zero_free():
        raise NotZeroFree(
            "denominator is not structurally zero-free on the domain"
        )
    return Quot(num, den, domain)


def _try_polydiv(num: Poly, den: Poly):
    """Exact polynomial division, or None when the remainder is nonzero."""
    if num.is_zero():
        return poly([0.0], num.domain)
    if num.degree() < den.degree():
        return None
    q, r = np.polydiv(
        np.array(list(reversed(num.coeffs))), np.array(list(reversed(den.coeffs)))
    )
    scale = max(abs(c) for c in num.coeffs)
    if np.all(np.abs(r) <= 1e-12 * scale):
        return poly(list(reversed(q)))
    return None


def hexp(arg: HoloFun) -> HoloFun:
    return Exp(arg, arg.domain)


def _with_domain(f: HoloFun, domain: Domain) -> HoloFun:
    if f.domain is domain:
        return f
    if isinstance(f, Poly):
        return Poly(f.coeffs, domain)
    if isinstance(f, Sum):
        return Sum(f.terms, domain)
    if isinstance(f, Prod):
        return Prod(f.factors, domain)
    if isinstance(f, Quot):
        return Quot(f.num, f.den, domain)
    if isinstance(f, Exp):
        return Exp(f.arg, domain)
    raise TypeError(type(f))


# -- serialization ----------------------------------------------------------


def to_json(f: HoloFun) -> dict:
    """Expression tree as a JSON-ready dict (domain kept separately)."""
    if isinstance(f, Poly):
        return {"kind": "poly", "coeffs": [[c.real, c.imag] for c in f.coeffs]}
    if isinstance(f, Sum):
        return {"kind": "sum", "terms": [to_json(t) for t in f.terms]}
    if isinstance(f, Prod):
        return {"kind": "prod", "factors": [to_json(t) for t in f.factors]}
    if isinstance(f, Quot):
        return {"kind": "quot", "num": to_json(f.num), "den": to_json(f.den)}
    if isinstance(f, Exp):
        return {"kind": "exp", "arg": to_json(f.arg)}
    raise TypeError(type(f))


def from_json(node: dict, domain: Domain = Domain.PLANE) -> HoloFun:
    kind = node.get("kind")
    if kind == "poly":
        return poly([complex(re, im) for re, im in node["coeffs"]], domain)
    if kind == "sum":
        return hsum(*(from_json(t, domain) for t in node["terms"]))
    if kind == "prod":
        return hprod(*(from_json(t, domain) for t in node["factors"]))
    if kind == "quot":
        return hquot(from_json(node["num"], domain), from_json(node["den"], domain))
    if kind == "exp":
        return hexp(from_json(node["arg"], domain))
    raise ValueError(f"unknown node kind: {kind!r}")


# -- quadrature -------------------------------------------------------------

# Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
_XK_HALF = np.array(
    [
        0.207784955007898467600689403773245,
        0.405845151377397166906606412076961,
        0.586087235467691130294144838258730,
        0.741531185599394439863864773280788,
        0.864864423359769072789712788640926,
        0.949107912342758524526189684047851,
        0.991455371120812639206854697526329,
    ]
)
_XK = np.concatenate([-_XK_HALF[::-1], [0.0], _XK_HALF])
_WK_HALF = np.array(
    [
        0.204432940075298892414161999234649,
        0.190350578064785409913256402421014,
        0.169004726639267902826583426598550,
        0.140653259715525918745189590510238,
        0.104790010322250183839876322541518,
        0.063092092629978553290700663189204,
        0.022935322010529224963732008058970,
    ]
)
_WK = np.concatenate([_WK_HALF[::-1], [0.209482141084727828012999174891714], _WK_HALF])
_G7_IDX = np.array([1, 3, 5, 7, 9, 11, 13])
_WG = np.array(
    [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
        0.381830050505118944950369775488975,
        0.279705391489276667901467771423780,
        0.129484966168869693270611432679082,
    ]
)


def _check_segment(domain: Domain, a: complex, b: complex):
    if domain is Domain.DISK:
        if abs(a) >= 1.0 or abs(b) >= 1.0:
            raise SegmentExitsDomain("segment endpoint outside the unit disk")


def integrate_segments(f: HoloFun, starts, ends, tol: float = 1e-10, max_depth: int = 48):
    """Batched contour integrals of f along straight segments.

    Adaptive Gauss-Kronrod 7/15 with recursive bisection; the absolute error
    budget `tol` is shared across each segment by arc-length fraction.
    Returns a complex array of integrals, one per segment.
    """
    a0 = np.asarray(starts, dtype=complex).ravel()
    b0 = np.asarray(ends, dtype=complex).ravel()
    if a0.shape != b0.shape:
        raise ValueError("starts and ends must have matching shapes")
    n = a0.size
    for ai, bi in zip(a0, b0):
        _check_segment(f.domain, ai, bi)
    total_len = np.abs(b0 - a0)
    result = np.zeros(n, dtype=complex)
    live = total_len > 0
    a = a0[live]
    b = b0[live]
    owner = np.nonzero(live)[0]
    depth = np.zeros(a.size, dtype=int)

    while a.size:
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        zs = mid[:, None] + half[:, None] * _XK[None, :]
        vals = f._ev(zs.reshape(-1)).reshape(zs.shape)
        k15 = (vals * _WK).sum(axis=1) * half
        g7 = (vals[:, _G7_IDX] * _WG).sum(axis=1) * half
        err = np.abs(k15 - g7)
        budget = tol * np.abs(half) * 2.0 / total_len[owner]
        done = err <= budget
        overflow = depth >= max_depth
        if np.any(overflow & ~done):
            bad = owner[overflow & ~done][0]
            raise ToleranceNotReached(
                f"quadrature error target not reached on segment for point index {bad}",
                best=k15[overflow & ~done][0],
                err=float(err[overflow & ~done][0]),
            )
        np.add.at(result, owner[done], k15[done])
        keep = ~done
        a_k, b_k, m_k = a[keep], b[keep], mid[keep]
        owner = np.concatenate([owner[keep], owner[keep]])
        depth = np.concatenate([depth[keep] + 1, depth[keep] + 1])
        a = np.concatenate([a_k, m_k])
        b = np.concatenate([m_k, b_k])
    return result


def integrate_segment(f: HoloFun, a, b, tol: float = 1e-10) -> complex:
    """Contour integral of f along the straight segment from a to b."""
    return complex(integrate_segments(f, [a], [b], tol=tol)[0])


def integrate_polyline(f: HoloFun, vertices, tol: float = 1e-10) -> complex:
    """Contour integral of f along a polyline through the given vertices."""
    vs = np.asarray(vertices, dtype=complex)
    if vs.size < 2:
        return 0j
    segs = integrate_segments(f, vs[:-1], vs[1:], tol=tol / max(1, vs.size - 1))
    return complex(segs.sum())
