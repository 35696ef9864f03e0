import math

import numpy as np
import pytest
import scipy.special as sp

from heatlab.deriv import Stencil, central_diff
from heatlab.domain import Disk, Interval, Rectangle
from heatlab.spectral import directional_matrix, disk_branch, enumerate_eigenpairs, value_matrix

I = Interval(math.pi)
R = Rectangle(math.pi, 2.0)
D = Disk(1.0)


def test_interval_eigenvalues():
    pairs = enumerate_eigenpairs(I, 5)
    assert [p.eigenvalue for p in pairs] == pytest.approx([1, 4, 9, 16, 25])
    assert pairs[0].value(math.pi / 2) == pytest.approx(math.sqrt(2 / math.pi))


def test_disk_eigenvalues_are_squared_zeros():
    pairs = enumerate_eigenpairs(D, 6)
    lam = [p.eigenvalue for p in pairs]
    assert lam[0] == pytest.approx(sp.jn_zeros(0, 1)[0] ** 2)
    # the m = 1 level is doubly degenerate
    assert lam[1] == pytest.approx(lam[2])
    assert lam == sorted(lam)


def test_rectangle_ordering_and_ties():
    pairs = enumerate_eigenpairs(Rectangle(1.0, 1.0), 3)
    assert [p.index for p in pairs] == [(1, 1), (1, 2), (2, 1)]


@pytest.mark.parametrize("d", [I, R, D])
def test_gram_matrix_is_identity(d):
    pairs = enumerate_eigenpairs(d, 15)
    q = d.quadrature(60)
    M = value_matrix(pairs, q.nodes if d.dim > 1 else q.nodes[:, 0])
    G = M.T @ (q.weights[:, None] * M)
    assert np.max(np.abs(G - np.eye(len(pairs)))) < 1e-12


@pytest.mark.parametrize("d", [I, R, D])
def test_pde_residual(d):
    pairs = enumerate_eigenpairs(d, 12)
    pts = d.interior_grid(9) if d.dim < 2 or not isinstance(d, Disk) else d.interior_grid(6, 12)
    arg = pts[:, 0] if d.dim == 1 else pts
    for p in pairs:
        lap = np.trace(p.hess(arg), axis1=1, axis2=2)
        assert np.max(np.abs(lap + p.eigenvalue * p.value(arg))) < 1e-10 * p.eigenvalue


@pytest.mark.parametrize("d", [I, R, D])
def test_vanishes_on_boundary(d):
    pts, _, _ = d.boundary_arrays(32 if d.dim == 2 else 2)
    arg = pts[:, 0] if d.dim == 1 else pts
    M = value_matrix(enumerate_eigenpairs(d, 10), arg)
    assert np.max(np.abs(M)) < 1e-12


@pytest.mark.parametrize("k", [1, 2, 3])
def test_disk_directional_against_finite_differences(k):
    p = enumerate_eigenpairs(D, 5)[-1]
    nu = np.array([0.6, 0.8])
    x = np.array([0.2, -0.3])
    exact = p.directional(x, nu, k)
    fd = central_diff(p.value, x, nu, Stencil(k, {1: 1e-5, 2: 1e-3, 3: 1e-2}[k]), domain=D, richardson=True)
    assert fd == pytest.approx(exact, rel=1e-5, abs=1e-6)


def test_disk_ladder_derivative_at_origin():
    # m = 1 cos mode: d/dx phi at 0 equals C kappa / 2
    p = disk_branch(D, 1, 1, "cos")[0]
    assert p.directional(np.array([0.0, 0.0]), [1.0, 0.0], 1) == pytest.approx(p.norm_const * p.sqrt_lambda / 2)


def test_directional_matrix_matches_pointwise():
    pairs = enumerate_eigenpairs(R, 6)
    pts = np.array([[0.3, 0.4], [2.0, 1.5]])
    M = directional_matrix(pairs, pts, [0.6, 0.8], 2)
    for j, p in enumerate(pairs):
        assert np.allclose(M[:, j], p.directional(pts, [0.6, 0.8], 2), atol=1e-13)


def test_outside_point_raises():
    p = enumerate_eigenpairs(D, 1)[0]
    with pytest.raises(ValueError):
        p.value([2.0, 0.0])


def test_disk_norm_constant():
    p = disk_branch(D, 0, 1)[0]
    j = sp.jn_zeros(0, 1)[0]
    assert p.norm_const == pytest.approx(1.0 / (math.sqrt(math.pi) * abs(sp.j1(j))))
