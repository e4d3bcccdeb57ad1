"""Von Mises values, relaxed stress recovery, and the p-norm aggregate."""

import numpy as np
import pytest

from stresstopo.element import element_matrices
from stresstopo.mesh import build_dof_table
from stresstopo.stress import (StressParams, element_stresses, pnorm_stress,
                               von_mises)


def _ulp_close(a, b, ulps=8):
    return abs(a - b) <= ulps * np.spacing(max(abs(a), abs(b), 1e-300))


def test_von_mises_uniaxial():
    rng = np.random.default_rng(0)
    for s in rng.normal(scale=5.0, size=50):
        for axis in range(3):
            S = np.zeros(6)
            S[axis] = s
            assert _ulp_close(von_mises(S)[0], abs(s))


def test_von_mises_pure_shear():
    rng = np.random.default_rng(1)
    for t in rng.normal(scale=5.0, size=50):
        for axis in range(3, 6):
            S = np.zeros(6)
            S[axis] = t
            assert _ulp_close(von_mises(S)[0], np.sqrt(3.0) * abs(t))


def test_von_mises_hydrostatic_is_zero():
    rng = np.random.default_rng(2)
    for p in rng.normal(scale=5.0, size=50):
        S = np.array([p, p, p, 0.0, 0.0, 0.0])
        assert von_mises(S)[0] == 0.0


def test_von_mises_invariance_under_deviatoric_shift():
    # Adding a hydrostatic state never changes the von Mises value.
    rng = np.random.default_rng(3)
    S = rng.normal(size=(20, 6))
    p = rng.normal(size=20)
    shifted = S.copy()
    shifted[:, :3] += p[:, None]
    np.testing.assert_allclose(von_mises(shifted), von_mises(S), rtol=1e-12)


def test_pnorm_upper_bounds_max():
    # For p >= 1 the aggregate dominates the maximum entry.
    rng = np.random.default_rng(4)
    for _ in range(50):
        vm = rng.uniform(0.0, 10.0, size=rng.integers(1, 400))
        p = rng.uniform(1.0, 30.0)
        assert pnorm_stress(vm, p) >= vm.max() - 1e-12


def test_pnorm_limits_and_scaling():
    vm = np.array([3.0, 4.0])
    assert pnorm_stress(vm, 2.0) == pytest.approx(5.0)
    assert pnorm_stress(vm, 1.0) == pytest.approx(7.0)
    # approaches the max as p grows
    assert pnorm_stress(vm, 400.0) == pytest.approx(4.0, rel=1e-3)
    # homogeneous of degree 1
    assert pnorm_stress(7.5 * vm, 8.0) == pytest.approx(
        7.5 * pnorm_stress(vm, 8.0))


def test_pnorm_overflow_safe():
    vm = np.array([1e200, 5e199])
    out = pnorm_stress(vm, 30.0)
    assert np.isfinite(out) and out >= 1e200
    assert pnorm_stress(np.zeros(5), 10.0) == 0.0


def test_pnorm_rejects_negative():
    with pytest.raises(ValueError):
        pnorm_stress(np.array([-1.0]), 8.0)


def test_stress_params_validation():
    with pytest.raises(ValueError):
        StressParams(q=-0.1)
    with pytest.raises(ValueError):
        StressParams(p=0.5)
    with pytest.warns(UserWarning):
        StressParams(p=40.0)


def test_element_stresses_uniform_tension(em):
    """A unit element stretched uniformly must recover D0 @ (1,0,0,...)
    scaled by the relaxation factor x^q."""
    from stresstopo.element import NODE_LOCAL_COORDS
    from stresstopo.mesh import GridMesh
    mesh = GridMesh(1, 1, 1)
    table = build_dof_table(mesh)
    # displacement field u_x = x on the table's node ordering
    U = np.zeros(mesh.ndof)
    U[table[0][0::3]] = NODE_LOCAL_COORDS[:, 0]
    x = np.array([0.49])
    field = element_stresses(U, x, StressParams(q=0.5, p=8), em, table)
    expected = 0.7 * em.D0[:, 0]
    np.testing.assert_allclose(field.S[0], expected, atol=1e-5)
    np.testing.assert_allclose(field.mises, von_mises(expected), rtol=1e-4)


def test_element_stresses_scale_with_relaxation(em, small_cantilever):
    from tests_support import solve_problem
    prob = small_cantilever
    table = build_dof_table(prob.mesh)
    U = solve_problem(prob, np.full(prob.mesh.nele, 0.5))
    f1 = element_stresses(U, np.full(prob.mesh.nele, 0.25),
                          StressParams(q=0.5, p=8), em, table)
    f2 = element_stresses(U, np.full(prob.mesh.nele, 1.0),
                          StressParams(q=0.5, p=8), em, table)
    np.testing.assert_allclose(f1.S, 0.5 * f2.S, rtol=1e-12)
