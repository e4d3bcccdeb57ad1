"""Regular hexahedral grid and element-to-DOF connectivity."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridMesh:
    """Regular grid of unit 8-node hexahedra.

    nelx, nely, nelz are element counts along x, y, z.  Setting nelz = 1
    gives the quasi-2D problems.  Node IDs follow the column-major scheme
    of the classic MATLAB topology optimization codes: node (i, j, k) with
    i in 0..nelx, j in 0..nely (measured upward), k in 0..nelz has 1-based
    ID  k*(nelx+1)*(nely+1) + i*(nely+1) + (nely+1-j).
    """

    nelx: int
    nely: int
    nelz: int

    def __post_init__(self):
        for name in ("nelx", "nely", "nelz"):
            n = getattr(self, name)
            if not isinstance(n, (int, np.integer)) or n < 1:
                raise ValueError(f"{name} must be a positive integer, got {n!r}")

    @property
    def nele(self) -> int:
        return self.nelx * self.nely * self.nelz

    @property
    def nnode(self) -> int:
        return (self.nelx + 1) * (self.nely + 1) * (self.nelz + 1)

    @property
    def ndof(self) -> int:
        return 3 * self.nnode

    @property
    def shape(self):
        """Element-grid shape in storage order (nely, nelx, nelz)."""
        return (self.nely, self.nelx, self.nelz)


def node_id(i, j, k, mesh: GridMesh):
    """1-based node ID of grid node (i, j, k).

    Accepts scalars or arrays.  j is measured upward from the bottom face;
    IDs run top-to-bottom within a column of nodes.
    """
    i = np.asarray(i)
    j = np.asarray(j)
    k = np.asarray(k)
    if (np.any(i < 0) or np.any(i > mesh.nelx)
            or np.any(j < 0) or np.any(j > mesh.nely)
            or np.any(k < 0) or np.any(k > mesh.nelz)):
        raise IndexError("grid index out of range")
    nid = (k * (mesh.nelx + 1) * (mesh.nely + 1)
           + i * (mesh.nely + 1) + (mesh.nely + 1 - j))
    return nid if nid.shape else int(nid)


def node_coords(nid, mesh: GridMesh):
    """Invert node_id: map 1-based node IDs to (i, j, k) grid indices."""
    nid = np.asarray(nid)
    layer = (mesh.nelx + 1) * (mesh.nely + 1)
    k, rem = np.divmod(nid - 1, layer)
    i, col = np.divmod(rem, mesh.nely + 1)
    j = mesh.nely - col
    return i, j, k


def build_dof_table(mesh: GridMesh) -> np.ndarray:
    """Element-to-global-DOF connectivity, shape (nele, 24), 0-based.

    Row e lists the 24 DOFs of element e: eight nodes in the order
    (0,0,0), (1,0,0), (1,1,0), (0,1,0) then the same square shifted one
    layer in z, each contributing (ux, uy, uz).  Element order is
    y-major within an x column, then x, then z, matching the node ID
    scheme.  Entries are 0-based; add 1 for the documented node-ID
    convention.
    """
    nelx, nely, nelz = mesh.nelx, mesh.nely, mesh.nelz
    # 1-based IDs of the "anchor" node of each element in layer k=0,
    # laid out on the (nely+1, nelx+1) node grid.
    nodegrd = np.arange(1, (nely + 1) * (nelx + 1) + 1).reshape(
        (nelx + 1, nely + 1)).T
    ids2d = nodegrd[:-1, :-1].ravel(order="F")
    layer = (nely + 1) * (nelx + 1)
    ids = (ids2d[:, None] + layer * np.arange(nelz)[None, :]).ravel(order="F")
    edofvec = 3 * ids + 1
    base = np.array([0, 1, 2,
                     3 * nely + 3, 3 * nely + 4, 3 * nely + 5,
                     3 * nely + 0, 3 * nely + 1, 3 * nely + 2,
                     -3, -2, -1])
    offsets = np.concatenate([base, 3 * layer + base])
    table = edofvec[:, None] + offsets[None, :] - 1
    return table.astype(np.int32)
