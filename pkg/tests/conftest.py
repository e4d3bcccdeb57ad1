"""Shared fixtures: small meshes and assembled model problems."""

import numpy as np
import pytest

from stresstopo.element import ElasticityModel, element_matrices
from stresstopo.mesh import GridMesh, build_dof_table
from stresstopo.problems import cantilever


@pytest.fixture(scope="session")
def em():
    return element_matrices(0.3)


@pytest.fixture(scope="session")
def small_mesh():
    return GridMesh(4, 3, 2)


@pytest.fixture(scope="session")
def small_cantilever():
    """8x4x1 cantilever: small enough for dense / FD cross-checks."""
    return cantilever(8, 4, 1)


def evaluate(problem, x, model=None, cfg=None):
    """Full sensitivity evaluation of a problem at a density vector."""
    from stresstopo.sensitivity import pnorm_sensitivity
    model = model or ElasticityModel()
    table = build_dof_table(problem.mesh)
    em = element_matrices(model.nu)
    return pnorm_sensitivity(x, problem.mesh, table, em, model,
                             problem.params, problem.load_vector(),
                             problem.fixed_dofs, cfg or problem.solver)
