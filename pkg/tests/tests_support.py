"""Small helpers shared by test modules."""

import numpy as np

from stresstopo.element import ElasticityModel, element_matrices
from stresstopo.mesh import build_dof_table
from stresstopo.solver import (FemSystem, SolverConfig,
                               assemble_global_stiffness, solve_displacement)


def solve_problem(problem, x, model=None, cfg=None):
    """Displacement solve of a problem at density x."""
    model = model or ElasticityModel()
    table = build_dof_table(problem.mesh)
    em = element_matrices(model.nu)
    K = assemble_global_stiffness(problem.mesh, table, x, model, em.KE)
    system = FemSystem(K=K, F=problem.load_vector(),
                       fixeddofs=problem.fixed_dofs)
    return solve_displacement(system, cfg or SolverConfig(method="direct"))
