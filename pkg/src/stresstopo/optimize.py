"""Outer loop for volume-constrained stress minimization with MMA."""

import time
from dataclasses import dataclass, field

import numpy as np

from .element import ElasticityModel, element_matrices
from .filters import DensityFilter, build_filter, filter_density, \
    filter_sensitivity
from .mesh import build_dof_table
from .mma import MmaState, mma_update
from .problems import ProblemDefinition
from .sensitivity import DENSITY_FLOOR, pnorm_sensitivity


@dataclass
class HistoryRow:
    iter: int
    pnorm: float
    max_vm: float
    volume: float
    dx_inf: float
    wall_time: float


@dataclass
class OptimizationResult:
    x: np.ndarray           # final raw (unfiltered) design
    x_phys: np.ndarray      # final filtered/clamped density
    history: list = field(default_factory=list)


def run_optimization(problem: ProblemDefinition,
                     model: ElasticityModel = None,
                     filt: DensityFilter = None,
                     maxiter: int = None,
                     tolx: float = 0.0,
                     move: float = 0.1,
                     paper_literal_filter: bool = False,
                     x0: np.ndarray = None,
                     callback=None) -> OptimizationResult:
    """Filter, evaluate, chain sensitivities, and take MMA steps.

    tolx = 0 disables the early exit so the fixed iteration budgets of the
    benchmarks are honored.  callback(row, x, x_phys, result) fires after
    each iteration for streaming output.
    """
    mesh = problem.mesh
    model = model or ElasticityModel()
    filt = filt or build_filter(mesh, problem.radius)
    maxiter = maxiter or problem.iterations
    table = build_dof_table(mesh)
    em = element_matrices(model.nu)
    F = problem.load_vector()

    x = problem.initial_density() if x0 is None else np.asarray(x0, float).copy()
    xmin = np.full(mesh.nele, DENSITY_FLOOR)
    xmax = np.ones(mesh.nele)
    xmax[problem.passive] = DENSITY_FLOOR  # pin passive elements
    state = MmaState(n=mesh.nele, move=move)
    dv = np.ones(mesh.nele) / mesh.nele

    result = OptimizationResult(x=x, x_phys=x.copy())
    t0 = time.perf_counter()
    for it in range(1, maxiter + 1):
        x_phys = filter_density(filt, x)
        x_phys[problem.passive] = DENSITY_FLOOR
        sens = pnorm_sensitivity(x_phys, mesh, table, em, model,
                                 problem.params, F, problem.fixed_dofs,
                                 problem.solver)
        df0 = filter_sensitivity(filt, sens.grad,
                                 paper_literal=paper_literal_filter)
        dvf = filter_sensitivity(filt, dv, paper_literal=paper_literal_filter)
        fval = np.mean(x_phys) - problem.volfrac
        xnew = mma_update(state, x, sens.pnorm, df0, [fval], dvf[None, :],
                          xmin, xmax)
        dx = float(np.abs(xnew - x).max())
        x = xnew
        row = HistoryRow(iter=it, pnorm=sens.pnorm,
                         max_vm=float(sens.field.mises.max()),
                         volume=float(np.mean(x_phys)), dx_inf=dx,
                         wall_time=time.perf_counter() - t0)
        result.history.append(row)
        result.x = x
        result.x_phys = x_phys
        if callback is not None:
            callback(row, x, x_phys, sens)
        if tolx > 0.0 and dx < tolx:
            break
    return result
