"""Cell-wise 2x2 Gauss evaluation of bilinear fields on tensor meshes.

Returns flattened per-Gauss-point arrays; the fixed cell ordering (active
cells in row-major order, four Gauss points each) makes every reduction
deterministic.
"""

from __future__ import annotations

import numpy as np

from .mesh import TensorMesh
from .solver import cell_corner_nodes

_G = 0.5 - 0.5 / np.sqrt(3.0)
GAUSS_1D = np.array([_G, 1.0 - _G])   # reference coordinates on [0, 1]


def region_cells(mesh: TensorMesh, region: int, active_only: bool = True):
    """(ci, cj) index arrays of the cells of one region."""
    mask = mesh.cell_region == int(region)
    if active_only:
        mask &= mesh.active
    return np.nonzero(mask)


def corner_values(mesh: TensorMesh, values: np.ndarray, ci, cj):
    sw, se, ne, nw = cell_corner_nodes(mesh, ci, cj)
    return values[sw], values[se], values[ne], values[nw]


def cell_gauss(mesh: TensorMesh, values: np.ndarray, ci, cj):
    """Gradients, coordinates, and weights at the 2x2 Gauss points.

    Returns ``(gx, gy, xg, yg, w)``, each of shape ``(ncell, 4)``; the
    weights already include the cell area factor.
    """
    a = mesh.dx1[ci]
    b = mesh.dx2[cj]
    x0 = mesh.x1[ci]
    y0 = mesh.x2[cj]
    v00, v10, v11, v01 = corner_values(mesh, values, ci, cj)

    s = GAUSS_1D
    t = GAUSS_1D
    ss, tt = np.meshgrid(s, t, indexing="ij")
    ss = ss.ravel()[None, :]           # (1, 4)
    tt = tt.ravel()[None, :]

    inv_a = (1.0 / a)[:, None]
    inv_b = (1.0 / b)[:, None]
    d10 = (v10 - v00)[:, None]
    d01 = (v01 - v00)[:, None]
    dx_top = (v11 - v01)[:, None]
    dy_right = (v11 - v10)[:, None]

    gx = inv_a * (d10 * (1.0 - tt) + dx_top * tt)
    gy = inv_b * (d01 * (1.0 - ss) + dy_right * ss)
    xg = x0[:, None] + a[:, None] * ss
    yg = y0[:, None] + b[:, None] * tt
    w = (a * b)[:, None] / 4.0 * np.ones_like(ss)
    return gx, gy, xg, yg, w


def cell_values_at_gauss(mesh: TensorMesh, values: np.ndarray, ci, cj):
    """Bilinear field values at the 2x2 Gauss points, shape (ncell, 4)."""
    v00, v10, v11, v01 = corner_values(mesh, values, ci, cj)
    s = GAUSS_1D
    ss, tt = np.meshgrid(s, s, indexing="ij")
    ss = ss.ravel()[None, :]
    tt = tt.ravel()[None, :]
    return (
        v00[:, None] * (1.0 - ss) * (1.0 - tt)
        + v10[:, None] * ss * (1.0 - tt)
        + v11[:, None] * ss * tt
        + v01[:, None] * (1.0 - ss) * tt
    )


def cell_averages(mesh: TensorMesh, values: np.ndarray, ci, cj):
    """Exact cell integrals of the bilinear field (area times corner mean)."""
    v00, v10, v11, v01 = corner_values(mesh, values, ci, cj)
    area = mesh.dx1[ci] * mesh.dx2[cj]
    return area * 0.25 * (v00 + v10 + v11 + v01)
