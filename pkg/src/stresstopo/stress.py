"""Relaxed element stresses, von Mises values, and the p-norm aggregate."""

import warnings
from dataclasses import dataclass

import numpy as np

from .element import ElementMatrices, stress_penalty


@dataclass(frozen=True)
class StressParams:
    """q: stress relaxation exponent; p: p-norm aggregation exponent."""

    q: float = 0.5
    p: float = 10.0

    def __post_init__(self):
        if self.q < 0.0:
            raise ValueError("relaxation exponent q must be >= 0")
        if self.p < 1.0:
            raise ValueError("aggregation exponent p must be >= 1")
        if self.p > 30.0:
            warnings.warn(
                f"p = {self.p} risks ill-conditioning and oscillatory "
                "convergence; values above 30 are not recommended",
                stacklevel=2)


@dataclass
class StressField:
    """Per-element relaxed stresses.

    S: (nele, 6) relaxed stress vectors in Voigt order
    (sx, sy, sz, txy, tyz, tzx); mises: (nele,) von Mises values;
    pnorm: the aggregated scalar (NaN until computed).
    """

    S: np.ndarray
    mises: np.ndarray
    pnorm: float = np.nan


def von_mises(S: np.ndarray) -> np.ndarray:
    """Von Mises value of each row of an (n, 6) Voigt stress array."""
    S = np.atleast_2d(S)
    return np.sqrt(0.5 * ((S[:, 0] - S[:, 1]) ** 2
                          + (S[:, 0] - S[:, 2]) ** 2
                          + (S[:, 1] - S[:, 2]) ** 2
                          + 6.0 * np.sum(S[:, 3:] ** 2, axis=1)))


def element_stresses(U: np.ndarray, x, params: StressParams,
                     em: ElementMatrices, table: np.ndarray) -> StressField:
    """Relaxed stress S_e = x_e^q * D0 B u_e and von Mises per element."""
    x = np.asarray(x, dtype=float).ravel()
    if table.shape[0] != x.shape[0] or table.shape[1] != 24:
        raise ValueError("density / DOF table size mismatch")
    Ue = np.asarray(U, dtype=float).ravel()[table]  # (nele, 24)
    S = stress_penalty(x, params.q)[:, None] * (Ue @ em.DB.T)
    return StressField(S=S, mises=von_mises(S))


def pnorm_stress(mises: np.ndarray, p: float) -> float:
    """(sum mises^p)^(1/p), factored by the maximum to avoid overflow."""
    mises = np.asarray(mises, dtype=float).ravel()
    if np.any(mises < 0.0):
        raise ValueError("von Mises values must be nonnegative")
    m = mises.max(initial=0.0)
    if m == 0.0:
        return 0.0
    return m * np.sum((mises / m) ** p) ** (1.0 / p)
