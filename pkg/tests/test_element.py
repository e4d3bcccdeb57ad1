"""Element stiffness, constitutive, and strain-displacement matrices."""

import numpy as np
import pytest

from stresstopo.element import (B_EVAL_POINT, NODE_LOCAL_COORDS,
                                ElasticityModel, constitutive_matrix,
                                element_matrices, element_stiffness,
                                simp_modulus, strain_displacement_analytic,
                                strain_displacement_matrix, stress_penalty)

GAUSS = ((1.0 - 1.0 / np.sqrt(3.0)) / 2.0, (1.0 + 1.0 / np.sqrt(3.0)) / 2.0)


def _gauss_stiffness(nu):
    """Oracle: exact 2x2x2 Gauss integration of B^T D B on the unit cube."""
    D = constitutive_matrix(nu)
    KE = np.zeros((24, 24))
    for gx in GAUSS:
        for gy in GAUSS:
            for gz in GAUSS:
                B = strain_displacement_analytic((gx, gy, gz))
                KE += 0.125 * B.T @ D @ B
    return KE


@pytest.mark.parametrize("nu", [0.0, 0.3, 0.45])
def test_stiffness_matches_gauss_integration(nu):
    KE = element_stiffness(nu)
    np.testing.assert_allclose(KE, _gauss_stiffness(nu), atol=1e-14)


@pytest.mark.parametrize("nu", [0.0, 0.3, 0.45])
def test_stiffness_symmetric_psd_rank18(nu):
    KE = element_stiffness(nu)
    np.testing.assert_allclose(KE, KE.T, atol=1e-15)
    w = np.linalg.eigvalsh(KE)
    assert w.min() > -1e-12                  # positive semidefinite
    assert np.sum(w > 1e-9 * w.max()) == 18  # 6 rigid-body zero modes


def test_stiffness_known_entry():
    assert element_stiffness(0.3)[0, 0] == pytest.approx(0.23504273504273512)


def test_rigid_modes_annihilated():
    # Translations and linearized rotations produce zero strain energy.
    KE = element_stiffness(0.3)
    coords = NODE_LOCAL_COORDS - 0.5
    modes = []
    for axis in range(3):
        t = np.zeros((8, 3))
        t[:, axis] = 1.0
        modes.append(t.ravel())
    for a, b in ((0, 1), (1, 2), (2, 0)):
        r = np.zeros((8, 3))
        r[:, a] = -coords[:, b]
        r[:, b] = coords[:, a]
        modes.append(r.ravel())
    for mode in modes:
        assert np.abs(KE @ mode).max() < 1e-13


def test_constitutive_matrix_values():
    D = constitutive_matrix(0.3)
    c = 1.0 / (1.3 * 0.4)
    assert D[0, 0] == pytest.approx(0.7 * c)
    assert D[0, 1] == pytest.approx(0.3 * c)
    assert D[3, 3] == pytest.approx(0.2 * c)
    np.testing.assert_allclose(D, D.T)
    assert np.all(np.linalg.eigvalsh(D) > 0)
    # nu = 0 reduces to diag(1,1,1,.5,.5,.5)
    np.testing.assert_allclose(constitutive_matrix(0.0),
                               np.diag([1, 1, 1, 0.5, 0.5, 0.5]))


def test_b_table_matches_analytic_to_print_precision():
    # The published table is the analytic B at the (+,+,+) Gauss point,
    # rounded to 5 significant decimals.
    B = strain_displacement_matrix()
    Ba = strain_displacement_analytic()
    assert B.shape == (6, 24)
    assert np.abs(B - Ba).max() < 5e-6
    assert B_EVAL_POINT == pytest.approx((1 + 1 / np.sqrt(3)) / 2)


def test_b_table_known_constants():
    B = strain_displacement_matrix()
    assert B[0, 0] == -0.044658
    assert B[0, 6] == 0.16667
    assert B[2, 20] == 0.62201
    # columns of ux DOFs: row ex entries sum to zero (constant preserved)
    assert abs(B[0, 0::3].sum()) < 1e-5


def test_b_annihilates_rigid_translations():
    B = strain_displacement_analytic()
    for axis in range(3):
        t = np.zeros((8, 3))
        t[:, axis] = 1.0
        assert np.abs(B @ t.ravel()).max() < 1e-15


def test_b_reproduces_uniform_strain():
    # Displacement u = x e_x has strain (1,0,0,0,0,0) everywhere.
    rng = np.random.default_rng(3)
    for _ in range(5):
        pt = rng.random(3)
        B = strain_displacement_analytic(pt)
        u = np.zeros((8, 3))
        u[:, 0] = NODE_LOCAL_COORDS[:, 0]
        np.testing.assert_allclose(B @ u.ravel(), [1, 0, 0, 0, 0, 0],
                                   atol=1e-14)


def test_simp_modulus():
    model = ElasticityModel()
    assert simp_modulus(1.0, model) == pytest.approx(1.0)
    assert simp_modulus(0.0, model) == pytest.approx(1e-9)
    assert simp_modulus(0.5, model) == pytest.approx(1e-9 + 0.125 * (1 - 1e-9))
    with pytest.raises(ValueError):
        simp_modulus(1.5, model)


def test_stress_penalty():
    assert stress_penalty(0.25, 0.5) == pytest.approx(0.5)
    assert stress_penalty(0.0, 0.5) == 0.0
    with pytest.raises(ValueError):
        stress_penalty(-0.1, 0.5)
    with pytest.raises(ValueError):
        stress_penalty(0.5, -1.0)


def test_model_validation():
    with pytest.raises(ValueError):
        ElasticityModel(nu=0.5)
    with pytest.raises(ValueError):
        ElasticityModel(emin=2.0)
    with pytest.raises(ValueError):
        ElasticityModel(pl=0.5)


def test_element_matrices_bundle(em):
    assert em.D0.shape == (6, 6)
    assert em.B.shape == (6, 24)
    assert em.KE.shape == (24, 24)
    np.testing.assert_allclose(em.DB, em.D0 @ em.B)
