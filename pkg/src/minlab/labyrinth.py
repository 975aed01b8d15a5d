"""Labyrinth of compact annular pieces with alternating gates.

The labyrinth lives in the annulus r' < |z| < R' and consists of 2N^2 thin
annular bands; band n keeps all angles except an excluded sector (the gate)
of angular half-width 1/N^2, and consecutive gates sit at opposite angles
(pi for odd n, 0 for even n). Any curve crossing the annulus must either
thread the alternating gates or cross bands radially, which is what makes
an amplified conformal metric expensive to traverse.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConstraintViolated, ZeroDetected
from .holo import Domain, HoloFun

__all__ = ["Labyrinth", "build", "contains", "min_phi3_modulus"]


@dataclass(frozen=True)
class Labyrinth:
    N: int
    r_prime: float
    R_prime: float

    @property
    def n_pieces(self) -> int:
        return 2 * self.N**2

    def s(self, n: int) -> float:
        """Reference radius s_n = R' - n/N^3, for n = 0 .. 2 N^2."""
        return self.R_prime - n / self.N**3

    @property
    def radii(self) -> np.ndarray:
        return self.R_prime - np.arange(self.n_pieces + 1) / self.N**3

    def band(self, n: int) -> tuple[float, float]:
        """Closed radial interval of piece n."""
        quarter = 1.0 / (4 * self.N**3)
        return (self.s(n) + quarter, self.s(n - 1) - quarter)

    def gate_angle(self, n: int) -> float:
        """Center angle of the excluded sector of piece n."""
        return np.pi if n % 2 == 1 else 0.0

    @property
    def gate_half_width(self) -> float:
        return 1.0 / self.N**2

    @property
    def inner_edge(self) -> float:
        """Smallest radius belonging to any piece."""
        return self.s(self.n_pieces) + 1.0 / (4 * self.N**3)

    # -- queries ------------------------------------------------------------

    def piece_index(self, z) -> np.ndarray:
        """Index (1-based) of the piece containing each point, 0 if none."""
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        N3 = self.N**3
        u = (self.R_prime - r) * N3
        n = np.floor(u).astype(int) + 1
        in_band = (
            (u >= n - 0.75) & (u <= n - 0.25) & (n >= 1) & (n <= self.n_pieces)
        )
        ang = np.mod(np.angle(z) + np.pi * (n % 2), 2 * np.pi)
        hw = self.gate_half_width
        keep = in_band & (ang >= hw) & (ang <= 2 * np.pi - hw)
        return np.where(keep, n, 0)

    def contains(self, z):
        """True where z lies in some piece."""
        idx = self.piece_index(z)
        if np.ndim(z) == 0:
            return bool(idx)
        return idx > 0

    # -- geometry export ----------------------------------------------------

    def boundary_loops(self, points_per_arc: int = 256) -> list[np.ndarray]:
        """Closed boundary polylines of every piece, as complex arrays."""
        loops = []
        for n in range(1, self.n_pieces + 1):
            lo, hi = self.band(n)
            start = self.gate_angle(n) + self.gate_half_width
            end = self.gate_angle(n) + 2 * np.pi - self.gate_half_width
            theta = np.linspace(start, end, points_per_arc)
            outer = hi * np.exp(1j * theta)
            inner = lo * np.exp(1j * theta[::-1])
            loops.append(np.concatenate([outer, inner, outer[:1]]))
        return loops

    def to_svg(self, size: int = 800, points_per_arc: int = 180) -> str:
        """Standalone SVG drawing of the pieces and the bounding annulus."""
        scale = size / (2.1 * self.R_prime)

        def sx(z):
            return size / 2 + scale * z.real

        def sy(z):
            return size / 2 - scale * z.imag

        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
            f'viewBox="0 0 {size} {size}">',
            f'<rect width="{size}" height="{size}" fill="white"/>',
        ]
        for r in (self.r_prime, self.R_prime):
            parts.append(
                f'<circle cx="{size/2}" cy="{size/2}" r="{scale*r:.2f}" '
                'fill="none" stroke="#999" stroke-dasharray="4 4"/>'
            )
        for loop in self.boundary_loops(points_per_arc):
            pts = " ".join(f"{sx(z):.2f},{sy(z):.2f}" for z in loop)
            parts.append(f'<polygon points="{pts}" fill="#444" stroke="none"/>')
        parts.append("</svg>")
        return "\n".join(parts)

    def to_json(self, points_per_arc: int = 64) -> dict:
        return {
            "N": self.N,
            "r_prime": self.r_prime,
            "R_prime": self.R_prime,
            "pieces": [
                {
                    "n": n,
                    "radial": list(self.band(n)),
                    "gate_angle": self.gate_angle(n),
                    "gate_half_width": self.gate_half_width,
                    "boundary": [[z.real, z.imag] for z in loop],
                }
                for n, loop in enumerate(self.boundary_loops(points_per_arc), start=1)
            ],
        }


def build(
    N: int, r_prime: float, R_prime: float, domain: Domain | None = None
) -> Labyrinth:
    """Labyrinth with 2 N^2 pieces in the annulus (r', R')."""
    if N < 1:
        raise ConstraintViolated("N must be a positive integer")
    if not (0 < r_prime < R_prime):
        raise ConstraintViolated("need 0 < r' < R'")
    if 2.0 / N >= R_prime - r_prime:
        raise ConstraintViolated(
            f"2/N = {2.0/N:.6g} must be smaller than R' - r' = {R_prime - r_prime:.6g}"
        )
    if domain is Domain.DISK and R_prime >= 1.0:
        raise ConstraintViolated("R' must be below 1 on the unit disk")
    return Labyrinth(int(N), float(r_prime), float(R_prime))


def contains(lab: Labyrinth, z):
    return lab.contains(z)


def min_phi3_modulus(
    phi3: HoloFun, r_prime: float, R_prime: float, samples: int = 256
) -> float:
    """Conservative positive floor for |phi3| on the closed annulus.

    Samples a polar grid and returns 0.9 times the observed minimum. Raises
    ZeroDetected when the minimum is consistent with a zero inside the
    annulus: either below the 1e-12 floor, or shrinking roughly linearly
    when the grid is refined (the safety margin a single grid cannot give).
    The caller should then move or shrink the annulus.
    """

    def grid_min(k):
        radii = np.linspace(r_prime, R_prime, k)
        theta = np.linspace(0.0, 2 * np.pi, k, endpoint=False)
        zs = radii[:, None] * np.exp(1j * theta[None, :])
        return float(np.abs(phi3.eval(zs.ravel())).min())

    coarse = grid_min(samples)
    fine = grid_min(2 * samples)
    if fine < 1e-12 or fine < 0.6 * coarse:
        raise ZeroDetected(
            f"|phi3| minimum fell from {coarse:.3e} to {fine:.3e} under grid "
            f"doubling on the annulus [{r_prime}, {R_prime}]"
        )
    return 0.9 * fine
