"""The three benchmark problems: cantilever and 2D/3D L-brackets.

Loads, supports, and passive regions follow the reference MATLAB
snippets: a unit force of -1 is placed on every loaded DOF, the support
planes are fully clamped, and the L-bracket cut-out is a passive block
pinned at density 1e-4.
"""

from dataclasses import dataclass, field

import numpy as np

from .mesh import GridMesh, node_id
from .sensitivity import DENSITY_FLOOR
from .solver import SolverConfig
from .stress import StressParams


@dataclass
class ProblemDefinition:
    """A fully specified volume-constrained stress minimization problem."""

    name: str
    mesh: GridMesh
    load_dofs: np.ndarray        # 0-based DOF indices
    load_values: np.ndarray      # per-DOF force magnitudes
    fixed_dofs: np.ndarray       # 0-based DOF indices
    passive: np.ndarray          # bool mask, True = pinned at 1e-4
    volfrac: float = 0.3
    params: StressParams = field(default_factory=StressParams)
    radius: float = 2.5
    solver: SolverConfig = field(default_factory=SolverConfig)
    iterations: int = 100

    def __post_init__(self):
        ndof = self.mesh.ndof
        for nm, dofs in (("load", self.load_dofs), ("fixed", self.fixed_dofs)):
            dofs = np.asarray(dofs)
            if dofs.size == 0:
                raise ValueError(f"{nm} DOF set is empty")
            if dofs.min() < 0 or dofs.max() >= ndof:
                raise ValueError(f"{nm} DOF index out of range")
        if self.passive.shape != (self.mesh.nele,):
            raise ValueError("passive mask size mismatch")

    def load_vector(self) -> np.ndarray:
        F = np.zeros(self.mesh.ndof)
        np.add.at(F, self.load_dofs, self.load_values)
        return F

    def initial_density(self) -> np.ndarray:
        x = np.full(self.mesh.nele, self.volfrac)
        x[self.passive] = DENSITY_FLOOR
        return x


def cantilever(nelx: int = 200, nely: int = 60, nelz: int = 1,
               **overrides) -> ProblemDefinition:
    """Cantilever beam: left face clamped, unit loads along the
    bottom-right edge in -y."""
    mesh = GridMesh(nelx, nely, nelz)
    kk = np.arange(nelz + 1)
    load_nid = node_id(np.full(nelz + 1, nelx), np.zeros(nelz + 1, dtype=int),
                       kk, mesh)
    load_dofs = 3 * load_nid - 1 - 1  # y DOF, to 0-based
    jj, kf = np.meshgrid(np.arange(nely + 1), np.arange(nelz + 1),
                         indexing="ij")
    fixed_nid = node_id(np.zeros_like(jj), jj, kf, mesh).ravel()
    fixed_dofs = np.concatenate([3 * fixed_nid - 3, 3 * fixed_nid - 2,
                                 3 * fixed_nid - 1])
    overrides.setdefault("iterations", 100)
    return ProblemDefinition(
        name="cantilever", mesh=mesh,
        load_dofs=load_dofs.astype(np.int64),
        load_values=np.full(load_dofs.size, -1.0),
        fixed_dofs=fixed_dofs.astype(np.int64),
        passive=np.zeros(mesh.nele, dtype=bool),
        **overrides)


def _lbracket_passive(mesh: GridMesh) -> np.ndarray:
    """Upper-right cut-out block: element rows 0..nelx/2-1 (from the top),
    columns nely/2-1..end, all layers, in storage order (nely, nelx, nelz)."""
    mask = np.zeros(mesh.shape, dtype=bool, order="F")
    mask[: mesh.nelx // 2, mesh.nely // 2 - 1:, :] = True
    return mask.ravel(order="F")


def lbracket_3d(nelx: int = 100, nely: int = 100, nelz: int = 30,
                **overrides) -> ProblemDefinition:
    """3D L-bracket: top edge clamped on every layer, -y loads near the
    cut-out corner on the right face, upper-right quadrant passive."""
    if nelx != nely or nelx % 2:
        raise ValueError("L-bracket needs nelx == nely, both even")
    mesh = GridMesh(nelx, nely, nelz)
    layer = (nely + 1) * (nelx + 1)

    top_row = np.arange(1, (nely + 1) * (nelx + 1) - nely + 1, nely + 1)
    fixed_nid = (top_row[None, :]
                 + layer * np.arange(nelz + 1)[:, None]).ravel()
    fixed_dofs = np.concatenate([3 * fixed_nid - 3, 3 * fixed_nid - 2,
                                 3 * fixed_nid - 1])

    kk = np.arange(nelz + 1)
    corner_nid = node_id(np.full(nelz + 1, nelx),
                         np.zeros(nelz + 1, dtype=int), kk, mesh)
    base = 3 * corner_nid - 1 - 3 * (nelx // 2)
    load_dofs = np.union1d(np.union1d(base, base + 3), base + 6) - 1

    # Geometric sanity: loaded nodes must sit on the right face at the
    # height of the cut-out's lower edge.
    li, lj, _ = _dof_nodes(load_dofs, mesh)
    assert np.all(li == nelx) and np.all(np.isin(lj, [nely // 2 - 2,
                                                      nely // 2 - 1,
                                                      nely // 2]))

    overrides.setdefault("iterations", 60)
    overrides.setdefault("solver", SolverConfig(method="pcg"))
    return ProblemDefinition(
        name="lbracket3d", mesh=mesh,
        load_dofs=load_dofs.astype(np.int64),
        load_values=np.full(load_dofs.size, -1.0),
        fixed_dofs=fixed_dofs.astype(np.int64),
        passive=_lbracket_passive(mesh), **overrides)


def lbracket_2d(n: int = 200, **overrides) -> ProblemDefinition:
    """2D L-bracket: the nelz = 1 special case of the 3D problem."""
    if n % 2:
        raise ValueError("L-bracket size must be even")
    overrides.setdefault("iterations", 120)
    overrides.setdefault("solver", SolverConfig(method="direct"))
    prob = lbracket_3d(n, n, 1, **overrides)
    return ProblemDefinition(
        name="lbracket2d", mesh=prob.mesh, load_dofs=prob.load_dofs,
        load_values=prob.load_values, fixed_dofs=prob.fixed_dofs,
        passive=prob.passive, volfrac=prob.volfrac, params=prob.params,
        radius=prob.radius, solver=prob.solver, iterations=prob.iterations)


def _dof_nodes(dofs: np.ndarray, mesh: GridMesh):
    """Grid coordinates of the nodes owning the given 0-based DOFs."""
    from .mesh import node_coords
    nid = np.asarray(dofs) // 3 + 1
    return node_coords(nid, mesh)


PROBLEMS = {
    "cantilever": cantilever,
    "lbracket2d": lambda nelx=200, nely=200, nelz=1, **kw: lbracket_2d(nelx, **kw),
    "lbracket3d": lbracket_3d,
}
