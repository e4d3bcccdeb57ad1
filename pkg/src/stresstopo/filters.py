"""Linear density filter with radius-weighted neighbor averaging."""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .mesh import GridMesh


@dataclass(frozen=True)
class DensityFilter:
    """Sparse weight matrix H (nele x nele) and its row sums Hs.

    H_ij = max(0, r - dist(center_i, center_j)) over element centers on
    the unit grid; diagonal entries equal r, so r = 1 is the identity
    filter.
    """

    H: sp.csr_matrix
    Hs: np.ndarray
    radius: float


def build_filter(mesh: GridMesh, radius: float = 2.5) -> DensityFilter:
    """Precompute filter weights by lattice-offset diagonals.

    Element centers sit at integer + 0.5 coordinates; weights are
    truncated at the domain boundary and normalized per row by Hs.
    """
    if radius <= 0.0:
        raise ValueError("filter radius must be positive")
    nely, nelx, nelz = mesh.nely, mesh.nelx, mesh.nelz
    reach = int(np.ceil(radius)) - 1
    # Element linear index e = k*nelx*nely + i*nely + r  (r = row from top).
    rows_i, rows_j, vals = [], [], []
    rr, ii, kk = np.meshgrid(np.arange(nely), np.arange(nelx),
                             np.arange(nelz), indexing="ij")
    lin = (kk * nelx * nely + ii * nely + rr).ravel()
    grid = np.stack([rr.ravel(), ii.ravel(), kk.ravel()], axis=1)
    for dr in range(-reach, reach + 1):
        for di in range(-reach, reach + 1):
            for dk in range(-reach, reach + 1):
                w = radius - np.sqrt(dr * dr + di * di + dk * dk)
                if w <= 0.0:
                    continue
                nb = grid + (dr, di, dk)
                ok = ((nb[:, 0] >= 0) & (nb[:, 0] < nely)
                      & (nb[:, 1] >= 0) & (nb[:, 1] < nelx)
                      & (nb[:, 2] >= 0) & (nb[:, 2] < nelz))
                src = lin[ok]
                dst = (nb[ok, 2] * nelx * nely + nb[ok, 1] * nely + nb[ok, 0])
                rows_i.append(src)
                rows_j.append(dst)
                vals.append(np.full(src.size, w))
    H = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows_i), np.concatenate(rows_j))),
        shape=(mesh.nele, mesh.nele)).tocsr()
    Hs = np.asarray(H.sum(axis=1)).ravel()
    return DensityFilter(H=H, Hs=Hs, radius=radius)


def filter_density(f: DensityFilter, x) -> np.ndarray:
    """Weighted neighbor average (H x) / Hs; preserves constants exactly."""
    x = np.asarray(x, dtype=float).ravel()
    return (f.H @ x) / f.Hs


def filter_sensitivity(f: DensityFilter, g, paper_literal: bool = False) -> np.ndarray:
    """Chain a gradient through the density filter.

    Default is the exact adjoint of filter_density, H (g / Hs) for
    symmetric H.  paper_literal reproduces the (H g) / Hs form used by
    the reference driver, which differs near boundaries where Hs varies.
    """
    g = np.asarray(g, dtype=float).ravel()
    if paper_literal:
        return (f.H @ g) / f.Hs
    return f.H @ (g / f.Hs)
