"""Stress-based topology optimization with adjoint p-norm sensitivities.

Minimizes the p-norm aggregate of relaxed von Mises stresses over a
regular hexahedral grid, subject to a volume constraint, using SIMP
interpolation, a linear density filter, and the Method of Moving
Asymptotes.
"""

from .element import (ElasticityModel, ElementMatrices, constitutive_matrix,
                      element_matrices, element_stiffness, simp_modulus,
                      strain_displacement_matrix, stress_penalty)
from .filters import DensityFilter, build_filter, filter_density, \
    filter_sensitivity
from .mesh import GridMesh, build_dof_table, node_id
from .mma import MmaState, mma_update
from .optimize import OptimizationResult, run_optimization
from .problems import ProblemDefinition, cantilever, lbracket_2d, lbracket_3d
from .sensitivity import (SensitivityResult, VerificationReport,
                          finite_difference_check, pnorm_sensitivity)
from .solver import (FemSystem, SolverConfig, assemble_global_stiffness,
                     solve_displacement)
from .stress import StressField, StressParams, element_stresses, pnorm_stress

__version__ = "0.1.0"
