"""Triangle-mesh export of immersed disks in Wavefront OBJ text format."""

from __future__ import annotations

import numpy as np

from .weierstrass import WeierstrassData, immerse

__all__ = ["surface_mesh", "write_obj"]


def surface_mesh(
    data: WeierstrassData,
    R: float,
    n_radial: int = 24,
    n_angular: int = 64,
    tol: float = 1e-8,
):
    """Vertices and faces of the immersed polar grid over the disk of radius R.

    The center maps to the origin by anchoring; rings split into triangles
    (a fan at the center, two per quad elsewhere).
    """
    radii = np.linspace(R / n_radial, R, n_radial)
    theta = 2 * np.pi * np.arange(n_angular) / n_angular
    grid = (radii[:, None] * np.exp(1j * theta[None, :])).ravel()
    pts = np.concatenate([[0j], grid])
    sample = immerse(data, pts, tol=tol)
    vertices = sample.X

    def vid(i, j):
        return 1 + i * n_angular + (j % n_angular)

    faces = []
    for j in range(n_angular):
        faces.append((0, vid(0, j), vid(0, j + 1)))
    for i in range(n_radial - 1):
        for j in range(n_angular):
            a, b = vid(i, j), vid(i, j + 1)
            c, d = vid(i + 1, j), vid(i + 1, j + 1)
            faces.append((a, b, d))
            faces.append((a, d, c))
    return vertices, faces


def write_obj(path, vertices, faces) -> None:
    """Plain-text OBJ: one `v` line per vertex, one `f` (1-indexed) per face."""
    with open(path, "w", encoding="utf-8") as fh:
        for v in vertices:
            fh.write(f"v {v[0]:.12g} {v[1]:.12g} {v[2]:.12g}\n")
        for f in faces:
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")
