"""Global stiffness assembly and the equilibrium/adjoint linear solves."""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .element import ElasticityModel, simp_modulus
from .mesh import GridMesh


class SolverError(RuntimeError):
    """Linear solve failed (singular system or PCG non-convergence)."""


@dataclass
class SolverConfig:
    """Linear solver selection: 'direct', 'pcg', or 'auto' by problem size."""

    method: str = "auto"
    tol: float = 1e-8
    maxit: int = 5000
    direct_limit: int = 200_000  # auto: direct below this many DOFs

    def __post_init__(self):
        if self.method not in ("auto", "direct", "pcg"):
            raise ValueError(f"unknown solver method {self.method!r}")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.maxit < 1:
            raise ValueError("maxit must be >= 1")

    def resolve(self, ndof: int) -> str:
        if self.method == "auto":
            return "direct" if ndof < self.direct_limit else "pcg"
        return self.method


@dataclass
class FemSystem:
    """Assembled symmetric stiffness with load and support definition."""

    K: sp.csc_matrix
    F: np.ndarray
    fixeddofs: np.ndarray
    freedofs: np.ndarray = field(init=False)

    def __post_init__(self):
        ndof = self.K.shape[0]
        self.fixeddofs = np.unique(np.asarray(self.fixeddofs, dtype=np.int64))
        if self.fixeddofs.size and (self.fixeddofs[0] < 0
                                    or self.fixeddofs[-1] >= ndof):
            raise ValueError("fixed DOF index out of range")
        mask = np.ones(ndof, dtype=bool)
        mask[self.fixeddofs] = False
        self.freedofs = np.flatnonzero(mask)


def assemble_global_stiffness(mesh: GridMesh, table: np.ndarray, x,
                              model: ElasticityModel,
                              KE: np.ndarray) -> sp.csc_matrix:
    """Assemble K = sum_e E(x_e) * KE scattered to element DOFs.

    Triplet assembly with a single cached KE scaled per element, then
    symmetrized as (K + K^T)/2 to kill round-off asymmetry.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != mesh.nele or table.shape != (mesh.nele, 24):
        raise ValueError("density / DOF table size mismatch with mesh")
    E = simp_modulus(x, model)
    iK = np.broadcast_to(table[:, :, None], (mesh.nele, 24, 24)).ravel()
    jK = np.broadcast_to(table[:, None, :], (mesh.nele, 24, 24)).ravel()
    sK = (E[:, None, None] * KE[None, :, :]).ravel()
    K = sp.coo_matrix((sK, (iK, jK)), shape=(mesh.ndof, mesh.ndof)).tocsc()
    return ((K + K.T) * 0.5).tocsc()


class ReducedSolver:
    """Solver for the free-DOF subsystem, reusable across right-hand sides.

    Holds either an LU factorization (direct) or the Jacobi-preconditioned
    matrix (PCG); one instance serves both the equilibrium and the adjoint
    solve of an iteration.
    """

    def __init__(self, system: FemSystem, cfg: SolverConfig):
        self.system = system
        self.cfg = cfg
        self.method = cfg.resolve(system.K.shape[0])
        self.Kff = system.K[system.freedofs][:, system.freedofs].tocsc()
        if self.method == "direct":
            try:
                # Minimum-degree ordering on K + K^T: much less fill than
                # the default COLAMD for these symmetric grid stencils.
                self._lu = spla.splu(self.Kff, permc_spec="MMD_AT_PLUS_A")
            except RuntimeError as err:
                raise SolverError(f"direct factorization failed: {err}") from err
            self._knorm = spla.norm(self.Kff, np.inf)
        else:
            diag = self.Kff.diagonal()
            if np.any(diag <= 0.0):
                raise SolverError("non-positive diagonal; system not SPD")
            self._minv = 1.0 / diag

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve K u = rhs for the full DOF vector (zeros on fixed DOFs)."""
        rhs = np.asarray(rhs, dtype=float).ravel()
        if not np.all(np.isfinite(rhs)):
            raise ValueError("right-hand side contains non-finite entries")
        b = rhs[self.system.freedofs]
        u = np.zeros(self.system.K.shape[0])
        if not np.any(b):
            return u
        if self.method == "direct":
            uf = self._lu.solve(b)
            if not np.all(np.isfinite(uf)):
                raise SolverError("singular stiffness (insufficient supports?)")
            # one step of iterative refinement: high density contrast can
            # leave the raw LU residual near 1e-6
            uf += self._lu.solve(b - self.Kff @ uf)
            # Accept on normwise backward error, not the b-relative
            # residual: with floored void elements the displacements are
            # huge and ||K u - b|| / ||b|| is dominated by round-off in
            # K u even for a perfect solve.
            r = b - self.Kff @ uf
            rnorm = np.linalg.norm(r)
            bwe = rnorm / (self._knorm * np.linalg.norm(uf)
                           + np.linalg.norm(b))
            if bwe > self.cfg.tol:
                raise SolverError(
                    f"direct solve backward error {bwe:.3e} exceeds "
                    f"tolerance {self.cfg.tol:.1e}")
            # a backward-stable "solution" of an inconsistent (singular)
            # system still leaves a large residual relative to the load
            if rnorm > 1e-2 * np.linalg.norm(b):
                raise SolverError(
                    "singular stiffness (insufficient supports?)")
        else:
            M = spla.LinearOperator(self.Kff.shape, matvec=lambda v: self._minv * v)
            uf, info = spla.cg(self.Kff, b, rtol=self.cfg.tol, atol=0.0,
                               maxiter=self.cfg.maxit, M=M)
            if info != 0:
                res = np.linalg.norm(self.Kff @ uf - b) / np.linalg.norm(b)
                raise SolverError(
                    f"PCG did not converge in {self.cfg.maxit} iterations "
                    f"(relative residual {res:.3e})")
            res = np.linalg.norm(self.Kff @ uf - b) / np.linalg.norm(b)
            if res > 10.0 * self.cfg.tol:
                raise SolverError(f"solve residual {res:.3e} exceeds tolerance")
        u[self.system.freedofs] = uf
        return u


def solve_displacement(system: FemSystem, cfg: SolverConfig = None) -> np.ndarray:
    """Solve the equilibrium system K U = F (zeros on fixed DOFs)."""
    cfg = cfg or SolverConfig()
    return ReducedSolver(system, cfg).solve(system.F)
