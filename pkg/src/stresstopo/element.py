"""Material model, element stiffness, and strain-displacement matrices.

The solid hexahedral stiffness uses the closed-form coefficient table for
a unit cube with unit modulus; the strain-displacement matrix B is the
single-evaluation-point 6x24 constant table used for centroid-style stress
recovery.  The published decimal constants of that table correspond to the
trilinear shape-function derivatives evaluated at the Gauss point
((1 + 1/sqrt(3))/2, ...) of the unit element; an analytic builder is
provided as an independent oracle.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ElasticityModel:
    """Isotropic SIMP material: E(x) = emin + x^pl (e0 - emin)."""

    nu: float = 0.3
    e0: float = 1.0
    emin: float = 1e-9
    pl: float = 3.0

    def __post_init__(self):
        if not 0.0 <= self.nu < 0.5:
            raise ValueError(f"Poisson ratio must be in [0, 0.5), got {self.nu}")
        if not 0.0 < self.emin < self.e0:
            raise ValueError("need 0 < emin < e0")
        if self.pl < 1.0:
            raise ValueError("stiffness penalization exponent must be >= 1")


@dataclass(frozen=True)
class ElementMatrices:
    """Cached per-run element matrices: D0 (6x6), B (6x24), KE (24x24)."""

    D0: np.ndarray
    B: np.ndarray
    KE: np.ndarray

    @property
    def DB(self) -> np.ndarray:
        """Stress recovery operator D0 @ B (6x24)."""
        return self.D0 @ self.B


# Local coordinates of the element's 8 nodes in DOF-table column order.
NODE_LOCAL_COORDS = np.array([
    [0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0],
    [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1],
], dtype=float)

# Evaluation point of the published B table: the (+,+,+) point of the
# 2x2x2 Gauss rule mapped to the unit cube.
B_EVAL_POINT = (1.0 + 1.0 / np.sqrt(3.0)) / 2.0


def constitutive_matrix(nu: float) -> np.ndarray:
    """6x6 isotropic constitutive matrix with unit elastic modulus."""
    if not 0.0 <= nu < 0.5:
        raise ValueError(f"Poisson ratio must be in [0, 0.5), got {nu}")
    c = 1.0 / ((1.0 + nu) * (1.0 - 2.0 * nu))
    D = np.zeros((6, 6))
    D[:3, :3] = nu
    np.fill_diagonal(D[:3, :3], 1.0 - nu)
    D[3, 3] = D[4, 4] = D[5, 5] = (1.0 - 2.0 * nu) / 2.0
    return c * D


def element_stiffness(nu: float) -> np.ndarray:
    """24x24 solid-element stiffness of the unit hexahedron (unit modulus)."""
    if not 0.0 <= nu < 0.5:
        raise ValueError(f"Poisson ratio must be in [0, 0.5), got {nu}")
    # 14 closed-form coefficients, each (A[0] + A[1]*nu)/144; verified
    # against exact 2x2x2 Gauss integration of B^T D B on the unit cube.
    A = np.array([
        [32, 6, -8, 6, -6, 4, 3, -6, -10, 3, -3, -3, -4, -8],
        [-48, 0, 0, -24, 24, 0, 0, 0, 12, -12, 0, 12, 12, 12],
    ], dtype=float)
    k = (A.T @ np.array([1.0, nu])) / 144.0
    k = np.concatenate([[0.0], k])  # shift to 1-based k(1..14)

    def blk(rows):
        return np.array([[k[K] for K in row] for row in rows])

    K1 = blk([[1, 2, 2, 3, 5, 5],
              [2, 1, 2, 4, 6, 7],
              [2, 2, 1, 4, 7, 6],
              [3, 4, 4, 1, 8, 8],
              [5, 6, 7, 8, 1, 2],
              [5, 7, 6, 8, 2, 1]])
    K2 = blk([[9, 8, 12, 6, 4, 7],
              [8, 9, 12, 5, 3, 5],
              [10, 10, 13, 7, 4, 6],
              [6, 5, 11, 9, 2, 10],
              [4, 3, 5, 2, 9, 12],
              [11, 4, 6, 12, 10, 13]])
    K3 = blk([[6, 7, 4, 9, 12, 8],
              [7, 6, 4, 10, 13, 10],
              [5, 5, 3, 8, 12, 9],
              [9, 10, 2, 6, 11, 5],
              [12, 13, 10, 11, 6, 4],
              [2, 12, 9, 4, 5, 3]])
    K4 = blk([[14, 11, 11, 13, 10, 10],
              [11, 14, 11, 12, 9, 8],
              [11, 11, 14, 12, 8, 9],
              [13, 12, 12, 14, 7, 7],
              [10, 9, 8, 7, 14, 11],
              [10, 8, 9, 7, 11, 14]])
    K5 = blk([[1, 2, 8, 3, 5, 4],
              [2, 1, 8, 4, 6, 11],
              [8, 8, 1, 5, 11, 6],
              [3, 4, 5, 1, 8, 2],
              [5, 6, 11, 8, 1, 8],
              [4, 11, 6, 2, 8, 1]])
    K6 = blk([[14, 11, 7, 13, 10, 12],
              [11, 14, 7, 12, 9, 2],
              [7, 7, 14, 10, 2, 9],
              [13, 12, 10, 14, 7, 11],
              [10, 9, 2, 7, 14, 7],
              [12, 2, 9, 11, 7, 14]])
    KE = np.block([
        [K1, K2, K3, K4],
        [K2.T, K5, K6, K3.T],
        [K3.T, K6, K5.T, K2.T],
        [K4, K3, K2, K1.T],
    ])
    return KE / ((nu + 1.0) * (1.0 - 2.0 * nu))


# The published 6x24 strain-displacement table, column blocks of 8 DOFs.
_B1 = np.array([
    [-0.044658, 0, 0, 0.044658, 0, 0, 0.16667, 0],
    [0, -0.044658, 0, 0, -0.16667, 0, 0, 0.16667],
    [0, 0, -0.044658, 0, 0, -0.16667, 0, 0],
    [-0.044658, -0.044658, 0, -0.16667, 0.044658, 0, 0.16667, 0.16667],
    [0, -0.044658, -0.044658, 0, -0.16667, -0.16667, 0, -0.62201],
    [-0.044658, 0, -0.044658, -0.16667, 0, 0.044658, -0.62201, 0],
])
_B2 = np.array([
    [0, -0.16667, 0, 0, -0.16667, 0, 0, 0.16667],
    [0, 0, 0.044658, 0, 0, -0.16667, 0, 0],
    [-0.62201, 0, 0, -0.16667, 0, 0, 0.044658, 0],
    [0, 0.044658, -0.16667, 0, -0.16667, -0.16667, 0, -0.62201],
    [0.16667, 0, -0.16667, 0.044658, 0, 0.044658, -0.16667, 0],
    [0.16667, -0.16667, 0, -0.16667, 0.044658, 0, -0.16667, 0.16667],
])
_B3 = np.array([
    [0, 0, 0.62201, 0, 0, -0.62201, 0, 0],
    [-0.62201, 0, 0, 0.62201, 0, 0, 0.16667, 0],
    [0, 0.16667, 0, 0, 0.62201, 0, 0, 0.16667],
    [0.16667, 0, 0.62201, 0.62201, 0, 0.16667, -0.62201, 0],
    [0.16667, -0.62201, 0, 0.62201, 0.62201, 0, 0.16667, 0.16667],
    [0, 0.16667, 0.62201, 0, 0.62201, 0.16667, 0, -0.62201],
])


def strain_displacement_matrix() -> np.ndarray:
    """The 6x24 constant B table (stress evaluation point), bit-faithful."""
    return np.hstack([_B1, _B2, _B3])


def strain_displacement_analytic(point=None) -> np.ndarray:
    """Analytic 6x24 B of the unit trilinear hexahedron at a local point.

    Independent oracle for the published constant table; `point` is a
    local coordinate triple in [0, 1]^3 (default: the table's evaluation
    point).  Voigt rows: (ex, ey, ez, gxy, gyz, gzx).
    """
    if point is None:
        point = (B_EVAL_POINT,) * 3
    xi, eta, zeta = point
    B = np.zeros((6, 24))
    for a, (lx, ly, lz) in enumerate(NODE_LOCAL_COORDS):
        fx = xi if lx else 1.0 - xi
        fy = eta if ly else 1.0 - eta
        fz = zeta if lz else 1.0 - zeta
        sx = 1.0 if lx else -1.0
        sy = 1.0 if ly else -1.0
        sz = 1.0 if lz else -1.0
        dx, dy, dz = sx * fy * fz, sy * fx * fz, sz * fx * fy
        c = 3 * a
        B[0, c] = dx
        B[1, c + 1] = dy
        B[2, c + 2] = dz
        B[3, c] = dy
        B[3, c + 1] = dx
        B[4, c + 1] = dz
        B[4, c + 2] = dy
        B[5, c] = dz
        B[5, c + 2] = dx
    return B


def element_matrices(nu: float = 0.3) -> ElementMatrices:
    """Build the cached (D0, B, KE) triple for a Poisson ratio."""
    return ElementMatrices(
        D0=constitutive_matrix(nu),
        B=strain_displacement_matrix(),
        KE=element_stiffness(nu),
    )


def simp_modulus(x, model: ElasticityModel):
    """SIMP-interpolated modulus E(x) = emin + x^pl (e0 - emin)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("density outside [0, 1]")
    return model.emin + x ** model.pl * (model.e0 - model.emin)


def stress_penalty(x, q: float):
    """Stress relaxation factor eta(x) = x^q (eta(0) = 0 for q > 0)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0):
        raise ValueError("density must be nonnegative")
    if q < 0.0:
        raise ValueError("relaxation exponent must be nonnegative")
    return x ** q
