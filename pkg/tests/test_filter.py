"""Density filter construction, normalization, and adjoint chaining."""

import numpy as np
import pytest

from stresstopo.filters import (DensityFilter, build_filter, filter_density,
                                filter_sensitivity)
from stresstopo.mesh import GridMesh


def test_invalid_radius():
    with pytest.raises(ValueError):
        build_filter(GridMesh(3, 3, 1), radius=0.0)


def test_radius_one_is_identity():
    mesh = GridMesh(5, 4, 2)
    filt = build_filter(mesh, radius=1.0)
    rng = np.random.default_rng(0)
    x = rng.random(mesh.nele)
    np.testing.assert_allclose(filter_density(filt, x), x, rtol=0, atol=0)


def test_constant_preservation_exact():
    mesh = GridMesh(7, 5, 3)
    filt = build_filter(mesh, radius=2.5)
    for c in (0.3, 1.0, 0.0):
        out = filter_density(filt, np.full(mesh.nele, c))
        # preserved to IEEE round-off (a handful of ulps), with no
        # systematic boundary shrinkage
        np.testing.assert_allclose(out, c, rtol=1e-14, atol=1e-17)


def test_weights_match_direct_distance_computation():
    """Oracle: brute-force H from pairwise element-center distances."""
    mesh = GridMesh(4, 3, 2)
    radius = 2.5
    filt = build_filter(mesh, radius)
    rr, ii, kk = np.meshgrid(np.arange(mesh.nely), np.arange(mesh.nelx),
                             np.arange(mesh.nelz), indexing="ij")
    lin = (kk * mesh.nelx * mesh.nely + ii * mesh.nely + rr).ravel()
    centers = np.stack([rr.ravel(), ii.ravel(), kk.ravel()], 1).astype(float)
    order = np.argsort(lin)
    centers = centers[order]
    dist = np.linalg.norm(centers[:, None, :] - centers[None, :, :], axis=2)
    H_ref = np.maximum(0.0, radius - dist)
    np.testing.assert_allclose(filt.H.toarray(), H_ref, atol=1e-12)
    np.testing.assert_allclose(filt.Hs, H_ref.sum(axis=1), rtol=1e-14)


def test_filter_is_symmetric():
    mesh = GridMesh(6, 5, 1)
    filt = build_filter(mesh, radius=2.5)
    assert abs(filt.H - filt.H.T).max() < 1e-12


def test_adjoint_inner_product_identity():
    # <filter(x), g> == <x, chain(g)> for the exact adjoint chaining.
    mesh = GridMesh(6, 4, 3)
    filt = build_filter(mesh, radius=2.5)
    rng = np.random.default_rng(1)
    for _ in range(20):
        x = rng.normal(size=mesh.nele)
        g = rng.normal(size=mesh.nele)
        lhs = filter_density(filt, x) @ g
        rhs = x @ filter_sensitivity(filt, g)
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_paper_literal_variant_differs_only_at_boundary():
    mesh = GridMesh(8, 8, 1)
    filt = build_filter(mesh, radius=2.5)
    rng = np.random.default_rng(2)
    g = rng.normal(size=mesh.nele)
    exact = filter_sensitivity(filt, g)
    literal = filter_sensitivity(filt, g, paper_literal=True)
    assert not np.allclose(exact, literal)
    # interior elements have the full stencil, where Hs is constant and
    # both forms coincide
    interior = np.isclose(filt.Hs, filt.Hs.max())
    inner_rows = np.asarray(
        (filt.H[interior][:, interior].sum(axis=1))).ravel()
    fully_inner = interior.copy()
    fully_inner[interior] = np.isclose(inner_rows, filt.Hs.max())
    np.testing.assert_allclose(exact[fully_inner], literal[fully_inner],
                               rtol=1e-12)


def test_filter_smooths_a_spike():
    mesh = GridMesh(9, 9, 1)
    filt = build_filter(mesh, radius=2.5)
    x = np.zeros(mesh.nele)
    x[mesh.nele // 2] = 1.0
    out = filter_density(filt, x)
    assert out.max() < 1.0
    assert out.sum() > 0.0
    assert np.count_nonzero(out) > 1
