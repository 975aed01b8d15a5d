"""Constructive zero-free approximation of two-level targets.

Produces h = exp(p) with p a polynomial fit by weighted least squares to
log-targets: 0 on the closed inner disk and log(beta) on the labyrinth, so
that |h - 1| and |h - beta| are small on the respective sets while h is
structurally zero-free. The basis is orthonormalized sample-wise by an
incremental Arnoldi recurrence (stable at degrees far beyond what raw
Vandermonde systems allow), degree escalates geometrically, and sup errors
are certified on dense validation grids that are independent of the fit
samples and re-checked under density doubling.

Optional weak samples pulling p toward 0 on an outer collar keep the
polynomial tail from exploding beyond the fit region; iterated
constructions evaluate earlier parameters out there.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegreeExhausted, IllConditioned
from .holo import Domain, Exp, HoloFun, hexp, poly
from .labyrinth import Labyrinth

__all__ = [
    "RungeRequest",
    "RungeCertificate",
    "FitSamples",
    "fit_samples",
    "fit_exponent",
    "fit_misfit",
    "build_h",
    "validate_h",
]

_GOLD = 0.6180339887498949


@dataclass(frozen=True)
class RungeRequest:
    """Approximation request: near 1 on |z| <= r, near beta on the labyrinth."""

    inner_radius: float
    labyrinth: Labyrinth | None
    beta: float
    max_degree: int = 512
    validation_density: int = 256
    domain: Domain = Domain.PLANE
    disk_weight: float = 1.0
    lab_weight: float | None = None
    tail_radius: float | None = None
    tail_weight: float = 1e-6
    ridge: float = 1e-10

    def __post_init__(self):
        if self.beta < 1.0:
            raise ValueError("beta must be at least 1")
        if self.inner_radius <= 0:
            raise ValueError("inner radius must be positive")
        if self.labyrinth is not None and self.inner_radius >= self.labyrinth.r_prime:
            raise ValueError(
                "closed inner disk must be disjoint from the labyrinth annulus "
                f"(r = {self.inner_radius} >= r' = {self.labyrinth.r_prime})"
            )

    @property
    def log_beta(self) -> float:
        return float(np.log(self.beta))

    def effective_lab_weight(self) -> float:
        if self.lab_weight is not None:
            return self.lab_weight
        return float(min(self.beta, 1e4))


@dataclass(frozen=True)
class RungeCertificate:
    """Validated approximation: both sup errors strictly below 1/beta."""

    h: HoloFun
    beta: float
    degree: int
    sup_error_disk: float
    sup_error_labyrinth: float
    validation_density: int
    stability_disk: float
    stability_labyrinth: float

    def __post_init__(self):
        target = 1.0 / self.beta
        if not (self.sup_error_disk < target and self.sup_error_labyrinth < target):
            raise ValueError("certificate errors must be below 1/beta")

    def to_json(self) -> dict:
        exponent = self.h.arg if isinstance(self.h, Exp) else None
        return {
            "degree": self.degree,
            "sup_error_disk": self.sup_error_disk,
            "sup_error_labyrinth": self.sup_error_labyrinth,
            "validation_density": self.validation_density,
            "stability_disk": self.stability_disk,
            "stability_labyrinth": self.stability_labyrinth,
            "exponent_coeffs": None
            if exponent is None
            else [[c.real, c.imag] for c in exponent.coeffs],
        }


@dataclass
class FitSamples:
    points: np.ndarray
    targets: np.ndarray
    weights: np.ndarray
    ring_slice: slice = slice(0, 0)  # rows lying on the conversion ring
    ring_radius: float = 0.0


def _disk_points(r: float, n_interior: int, n_boundary: int) -> np.ndarray:
    k = np.arange(n_interior)
    radii = r * np.sqrt((k + 0.5) / max(n_interior, 1))
    sunflower = radii * np.exp(2j * np.pi * _GOLD * k)
    theta = 2 * np.pi * (np.arange(n_boundary) + 0.5) / max(n_boundary, 1)
    ring = r * np.exp(1j * theta)
    return np.concatenate([sunflower, ring])


def _piece_points(lab: Labyrinth, n: int, n_ang: int, n_rad: int = 3) -> np.ndarray:
    lo, hi = lab.band(n)
    start = lab.gate_angle(n) + lab.gate_half_width
    span = 2 * np.pi - 2 * lab.gate_half_width
    j = np.arange(n_ang)
    theta = start + ((j + (n * _GOLD) % 1.0) / n_ang) * span
    radii = np.linspace(lo, hi, n_rad)
    pts = (radii[:, None] * np.exp(1j * theta[None, :])).ravel()
    # gate edges are where overshoot concentrates; pin them explicitly
    edges = np.concatenate(
        [radii * np.exp(1j * start), radii * np.exp(1j * (start + span))]
    )
    return np.concatenate([pts, edges])


def fit_samples(req: RungeRequest, degree: int | None = None) -> FitSamples:
    """Weighted fit sample set; depends only on the request (and the degree
    cap), so least-squares misfit is monotone along degree escalation.

    Besides the target rows (inner disk and labyrinth pieces) the set always
    carries a weakly weighted zero-target ring enclosing everything: it tames
    the polynomial tail outside the fit region and doubles as the circle from
    which plain coefficients are recovered by FFT.
    """
    deg = req.max_degree if degree is None else degree
    n_coeff = deg + 1
    m = int(np.clip(4 * n_coeff, 512, 200_000))
    pts = []
    tgt = []
    wgt = []

    n_disk = max(128, int(0.3 * m))
    disk = _disk_points(req.inner_radius, (2 * n_disk) // 3, n_disk // 3)
    pts.append(disk)
    tgt.append(np.zeros(disk.size))
    wgt.append(np.full(disk.size, req.disk_weight))

    outer = req.inner_radius
    if req.labyrinth is not None:
        lab = req.labyrinth
        span = 2 * np.pi - 2 * lab.gate_half_width
        thickness = 1.0 / (2 * lab.N**3)
        # resolve the fitted degree on each piece: angular Nyquist along the
        # arcs, a few radial levels across the thin band
        n_ang = int(np.clip(0.75 * deg * span / np.pi, 24, 4096))
        n_rad = int(np.clip(2.2 * deg * thickness / (np.pi * lab.R_prime) + 2, 3, 16))
        budget = 64_000
        if lab.n_pieces * n_ang * n_rad > budget:
            n_ang = max(24, budget // (lab.n_pieces * n_rad))
        w_lab = req.effective_lab_weight()
        for n in range(1, lab.n_pieces + 1):
            p = _piece_points(lab, n, n_ang, n_rad)
            pts.append(p)
            tgt.append(np.full(p.size, req.log_beta))
            wgt.append(np.full(p.size, w_lab))
        outer = lab.R_prime

    if req.tail_radius is not None and req.tail_radius > outer * 1.001:
        radii = np.geomspace(outer * 1.01, req.tail_radius, 4)[:-1]
        n_ang = max(64, m // 24)
        theta = 2 * np.pi * (np.arange(n_ang) + 0.25) / n_ang
        collar = (radii[:, None] * np.exp(1j * theta[None, :])).ravel()
        pts.append(collar)
        tgt.append(np.zeros(collar.size))
        wgt.append(np.full(collar.size, req.tail_weight))
        outer = req.tail_radius

    ring_radius = max(outer, req.inner_radius) * 1.02
    nfft = 1
    while nfft < 2 * (req.max_degree + 1):
        nfft *= 2
    ring = ring_radius * np.exp(2j * np.pi * np.arange(nfft) / nfft)
    start = sum(p.size for p in pts)
    # ring rows act as a uniform coefficient ridge (Parseval on the circle);
    # the weight must be a vanishing fraction of the target mass or it vetoes
    # the gate-dip structure the exponent has to grow
    mass = sum(float(np.sum(w**2)) for w in wgt)
    w_ring = np.sqrt(req.ridge * mass / nfft)
    pts.append(ring)
    tgt.append(np.zeros(nfft))
    wgt.append(np.full(nfft, w_ring))

    return FitSamples(
        np.concatenate(pts),
        np.concatenate(tgt),
        np.concatenate(wgt),
        ring_slice=slice(start, start + nfft),
        ring_radius=ring_radius,
    )


class ArnoldiFitter:
    """Incremental weighted polynomial least squares on scattered samples.

    Maintains an orthonormal (w.r.t. the weighted discrete inner product)
    polynomial basis via the Arnoldi recurrence. The sample set includes a
    uniform ring enclosing everything, so the fitted values on that ring
    come from orthonormal rows (no extrapolating replay) and the plain
    monomial coefficients are recovered stably by FFT.
    """

    def __init__(self, samples: FitSamples, max_degree: int):
        self.z = samples.points.astype(complex)
        self.t = samples.targets.astype(complex)
        self.w2 = (samples.weights.astype(float)) ** 2
        self.ring = samples.ring_slice
        self.ring_radius = samples.ring_radius
        self.max_degree = max_degree
        m = self.z.size
        if max_degree + 1 > m:
            raise IllConditioned("more coefficients than samples")
        nring = self.ring.stop - self.ring.start
        if nring < 2 * (max_degree + 1):
            raise IllConditioned("conversion ring under-resolves the degree")
        self.Q = np.empty((m, max_degree + 1), dtype=complex)
        n0 = np.sqrt(np.sum(self.w2))
        self.Q[:, 0] = 1.0 / n0
        self.built = 0  # highest basis degree available

    def _project(self, k: int, v: np.ndarray) -> np.ndarray:
        # Q[:, :k]^H (w2 * v) without materializing the conjugate transpose
        return np.conj(self.Q[:, :k].T @ (self.w2 * np.conj(v)))

    def extend(self, degree: int) -> None:
        degree = min(degree, self.max_degree)
        while self.built < degree:
            k = self.built
            v = self.z * self.Q[:, k]
            scale = np.sqrt(np.real(np.vdot(v * self.w2, v)))
            # classical Gram-Schmidt, twice, against all built columns
            for _ in range(2):
                proj = self._project(k + 1, v)
                v = v - self.Q[:, : k + 1] @ proj
            norm = np.sqrt(np.real(np.vdot(v * self.w2, v)))
            if not np.isfinite(norm) or norm <= 1e-14 * max(scale, 1e-300):
                raise IllConditioned(
                    f"basis saturated at degree {k + 1}; samples cannot resolve it"
                )
            self.Q[:, k + 1] = v / norm
            self.built = k + 1

    def solve(self, degree: int):
        """Fitted polynomial of the given degree and its weighted RMS misfit."""
        self.extend(degree)
        d = min(degree, self.built)
        coeff_basis = self._project(d + 1, self.t)
        residual = self.t - self.Q[:, : d + 1] @ coeff_basis
        misfit = float(
            np.sqrt(np.real(np.vdot(residual * self.w2, residual)) / np.sum(self.w2))
        )
        ring_vals = self.Q[self.ring, : d + 1] @ coeff_basis
        spectrum = np.fft.fft(ring_vals) / ring_vals.size
        mono = spectrum[: d + 1] / self.ring_radius ** np.arange(d + 1)
        return poly(mono), misfit


def fit_exponent(req: RungeRequest, degree: int):
    """Least-squares exponent polynomial of the given degree.

    Raises IllConditioned when the orthogonalization saturates before the
    requested degree.
    """
    if degree > req.max_degree:
        raise ValueError(f"degree {degree} exceeds max_degree {req.max_degree}")
    samples = fit_samples(req)
    fitter = ArnoldiFitter(samples, degree)
    p, _ = fitter.solve(degree)
    return _with_domain_of(p, req.domain)


def _with_domain_of(p, domain):
    return poly(p.coeffs, domain)


def fit_misfit(req: RungeRequest, p) -> float:
    """Weighted RMS misfit of an exponent polynomial on the fit samples."""
    s = fit_samples(req)
    vals = p._ev(s.points)
    r = vals - s.targets
    w2 = s.weights**2
    return float(np.sqrt(np.sum(w2 * np.abs(r) ** 2) / np.sum(w2)))


class ModulusFitter:
    """Fit log|h| instead of log h on the labyrinth: the phase there is free.

    The two-level target constrains h fully near 1 on the inner disk but
    only in modulus on the labyrinth; pinning the phase to zero there makes
    the problem unapproximable at practical degrees (the gate structure
    forces large conjugate-function sweeps), so Im p on labyrinth rows is
    released. A moderate-degree real-stacked least squares escapes the
    constant-fit basin and seeds a phase-feedback iteration on the full
    orthonormal basis.
    """

    def __init__(
        self,
        samples: FitSamples,
        max_degree: int,
        seed_degree: int = 384,
        fitter: "ArnoldiFitter | None" = None,
    ):
        self.samples = samples
        self.fitter = fitter if fitter is not None else ArnoldiFitter(samples, max_degree)
        self.lab_rows = np.real(samples.targets) > 1e-12
        self.seed_degree = min(seed_degree, max_degree)
        self._seeded_target = None

    def _seed_phase(self, re_targets: np.ndarray):
        """Real-stacked least squares with Im free on the labyrinth.

        Must be solved at the actual Re targets: the winding structure of
        the phase depends on the target height, and the later feedback
        iteration cannot change winding numbers.
        """
        s = self.samples
        f = self.fitter
        d = min(self.seed_degree, self.fitter.max_degree)
        f.extend(d)
        w = np.sqrt(f.w2)
        lab = self.lab_rows
        other = ~lab
        lab_idx = np.nonzero(lab)[0][::2]  # the seed needs structure, not density
        Qo = f.Q[other, : d + 1]
        Ql = f.Q[lab_idx, : d + 1]
        wo = w[other, None]
        wl = w[lab_idx, None]
        A = np.vstack(
            [
                np.hstack([Qo.real * wo, -Qo.imag * wo]),
                np.hstack([Qo.imag * wo, Qo.real * wo]),
                np.hstack([Ql.real * wl, -Ql.imag * wl]),
            ]
        )
        b = np.concatenate(
            [
                s.targets[other].real * w[other],
                s.targets[other].imag * w[other],
                re_targets[::2] * w[lab_idx],
            ]
        )
        x, *_ = np.linalg.lstsq(A, b, rcond=None)
        y = x[: d + 1] + 1j * x[d + 1 :]
        vals = f.Q[:, : d + 1] @ y
        return vals.imag

    def solve(self, degree: int, feedback_rounds: int = 8, re_targets=None):
        """Exponent polynomial with free labyrinth phase.

        `re_targets` optionally overrides the labyrinth rows' Re targets
        pointwise (the pipeline raises them to per-point metric floors plus
        a cushion absorbing the fit ripple). Returns the polynomial and the
        largest Re residual against the targets on the labyrinth rows.
        """
        f = self.fitter
        f.extend(degree)
        d = min(degree, f.built)
        lab = self.lab_rows
        re_t = (
            self.samples.targets[lab].real.astype(float)
            if re_targets is None
            else np.asarray(re_targets, dtype=float)
        )
        stale = self._seeded_target is None or (
            np.max(np.abs(self._seeded_target[lab].real - re_t)) > 1.0
        )
        if stale:
            phase = self._seed_phase(re_t)
            t = self.samples.targets.astype(complex).copy()
            t[lab] = re_t + 1j * phase[lab]
            self._seeded_target = t
        t = self._seeded_target.copy()
        t[lab] = re_t + 1j * t[lab].imag
        coeff = None
        Q = f.Q[:, : d + 1]
        for _ in range(feedback_rounds):
            coeff = f._project(d + 1, t)
            vals = Q @ coeff
            t[lab] = t[lab].real + 1j * vals[lab].imag
        self._seeded_target = t
        ring_vals = f.Q[f.ring, : d + 1] @ coeff
        spectrum = np.fft.fft(ring_vals) / ring_vals.size
        mono = spectrum[: d + 1] / f.ring_radius ** np.arange(d + 1)
        re_resid = np.abs(vals[lab].real - t[lab].real)
        return poly(mono), float(re_resid.max())


# -- validation -------------------------------------------------------------


def _validation_disk(req: RungeRequest, density: int) -> np.ndarray:
    n_r = max(8, density // 24)
    radii = np.linspace(0.0, req.inner_radius, n_r + 1)[1:]
    theta = 2 * np.pi * np.arange(density) / density
    grid = (radii[:, None] * np.exp(1j * theta[None, :])).ravel()
    return np.concatenate([[0j], grid])


def _validation_labyrinth(req: RungeRequest, density: int) -> np.ndarray:
    lab = req.labyrinth
    out = []
    for n in range(1, lab.n_pieces + 1):
        lo, hi = lab.band(n)
        start = lab.gate_angle(n) + lab.gate_half_width
        span = 2 * np.pi - 2 * lab.gate_half_width
        theta = start + span * np.linspace(0.0, 1.0, density)
        for r in (lo, 0.5 * (lo + hi), hi):
            out.append(r * np.exp(1j * theta))
    return np.concatenate(out)


def _sup_errors(h: HoloFun, req: RungeRequest, density: int) -> tuple[float, float]:
    disk = _validation_disk(req, density)
    e_disk = float(np.max(np.abs(h._ev(disk) - 1.0)))
    if req.labyrinth is None:
        return e_disk, float(abs(1.0 - req.beta))
    lab_pts = _validation_labyrinth(req, density)
    e_lab = float(np.max(np.abs(h._ev(lab_pts) - req.beta)))
    return e_disk, e_lab


def validate_h(h: HoloFun, req: RungeRequest) -> tuple[float, float]:
    """Sup |h-1| on the inner disk and sup |h-beta| on the labyrinth.

    Measured at the request's validation density and re-measured at double
    density; the finer (more pessimistic in practice) values are returned.
    """
    e1 = _sup_errors(h, req, req.validation_density)
    e2 = _sup_errors(h, req, 2 * req.validation_density)
    return max(e1[0], e2[0]), max(e1[1], e2[1])


def _stability(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def _escalation_degrees(start: int, cap: int):
    degrees = []
    d = min(start, cap)
    while True:
        degrees.append(d)
        if d == cap:
            break
        d = min(2 * d, cap)
    return degrees


def build_h(req: RungeRequest, start_degree: int = 8):
    """Escalate degree until both validated sup errors fall below 1/beta.

    Stage one escalates the plain least-squares fit of the log targets; when
    its misfit plateaus far from target (the two-level target with a pinned
    phase is unreachable for hard labyrinths), a second stage releases the
    phase on the labyrinth (modulus fit), which a snapped-phase refit then
    tries to promote to a full certificate.

    Returns a RungeCertificate; raises DegreeExhausted carrying the best
    exponential found, so callers with weaker (directly measured) gates can
    still proceed.
    """
    target = 1.0 / req.beta
    samples = fit_samples(req)
    fitter = ArnoldiFitter(samples, req.max_degree)
    best = None

    def consider(h, d):
        nonlocal best
        e1 = _sup_errors(h, req, req.validation_density)
        e2 = _sup_errors(h, req, 2 * req.validation_density)
        e_disk = max(e1[0], e2[0])
        e_lab = max(e1[1], e2[1])
        score = max(e_disk, e_lab) / target
        if best is None or score < best[0]:
            best = (score, h, e_disk, e_lab, d)
        if e_disk < target and e_lab < target:
            return RungeCertificate(
                h=h,
                beta=req.beta,
                degree=d,
                sup_error_disk=e_disk,
                sup_error_labyrinth=e_lab,
                validation_density=req.validation_density,
                stability_disk=_stability(e1[0], e2[0]),
                stability_labyrinth=_stability(e1[1], e2[1]),
            )
        return None

    # stage 1: pinned-phase least squares, escalating degree
    last_misfit = None
    for d in _escalation_degrees(start_degree, req.max_degree):
        try:
            p, misfit = fitter.solve(d)
        except IllConditioned:
            break
        h = hexp(_with_domain_of(p, req.domain))
        cert = consider(h, d)
        if cert is not None:
            return cert
        plateau = last_misfit is not None and misfit > 0.97 * last_misfit
        if plateau and best is not None and best[0] > 10.0:
            break  # far from target and not improving: release the phase
        if last_misfit is not None and misfit > last_misfit * (1 + 1e-9):
            break
        last_misfit = misfit

    # stage 2: free phase on the labyrinth, then a snapped-phase refit
    if req.labyrinth is not None:
        mod = ModulusFitter(samples, req.max_degree, fitter=fitter)
        lab_rows = mod.lab_rows
        for d in _escalation_degrees(max(start_degree, 64), req.max_degree):
            try:
                p, _ = mod.solve(d)
            except IllConditioned:
                break
            h = hexp(_with_domain_of(p, req.domain))
            cert = consider(h, d)
            if cert is not None:
                return cert
            # snap the achieved phase to whole turns and refit with it pinned
            vals = p._ev(samples.points[lab_rows])
            snapped = samples.targets[lab_rows].real + 2j * np.pi * np.round(
                vals.imag / (2 * np.pi)
            )
            t = samples.targets.astype(complex).copy()
            t[lab_rows] = snapped
            Q = fitter.Q[:, : min(d, fitter.built) + 1]
            coeff = fitter._project(Q.shape[1], t)
            ring_vals = fitter.Q[fitter.ring, : Q.shape[1]] @ coeff
            spectrum = np.fft.fft(ring_vals) / ring_vals.size
            mono = spectrum[: Q.shape[1]] / fitter.ring_radius ** np.arange(Q.shape[1])
            h2 = hexp(_with_domain_of(poly(mono), req.domain))
            cert = consider(h2, d)
            if cert is not None:
                return cert

    if best is None:
        raise IllConditioned("no fit succeeded at any degree")
    _, h, e_disk, e_lab, d = best
    raise DegreeExhausted(
        f"no certificate at max_degree {req.max_degree}: "
        f"sup errors ({e_disk:.3e}, {e_lab:.3e}) vs target {target:.3e}",
        best_h=h,
        errors=(e_disk, e_lab),
        degree=d,
    )
