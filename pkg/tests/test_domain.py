import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heatlab.domain import Disk, Interval, Rectangle, domain_from_dict, gauss_legendre

I = Interval(math.pi)
R = Rectangle(math.pi, 2.0)
D = Disk(1.0)


def test_contains_is_strict():
    assert I.contains(1.0)
    assert not I.contains(0.0)
    assert not I.contains(math.pi)
    assert R.contains([1.0, 1.0])
    assert not R.contains([0.0, 1.0])
    assert not D.contains([1.0, 0.0])
    assert D.in_closed([1.0, 0.0])


def test_distances():
    assert D.distance_to_boundary([0.25, 0.0]) == pytest.approx(0.75)
    assert R.distance_to_boundary([1.0, 0.3]) == pytest.approx(0.3)
    d, outside = D.distance_to_boundary([2.0, 0.0], with_flag=True)
    assert d == 0.0 and outside


@settings(max_examples=50, deadline=None)
@given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
def test_disk_distance_is_euclidean(x, y):
    r = math.hypot(x, y)
    if r <= 1.0:
        assert D.distance_to_boundary([x, y]) == pytest.approx(1.0 - r, abs=1e-15)


def test_rectangle_boundary_sample_skips_corners():
    pts = R.boundary_sample(8)
    assert len(pts) == 8
    for bp in pts:
        x, y = bp.point
        assert not ((x in (0.0, R.Lx)) and (y in (0.0, R.Ly)))
        assert np.linalg.norm(bp.inward_normal) == pytest.approx(1.0)


def test_disk_boundary_normals_point_inward():
    pts, normals, H = D.boundary_arrays(16)
    assert np.allclose(pts + 0.1 * normals, 0.9 * pts)
    assert np.allclose(H, 1.0)


@pytest.mark.parametrize("d", [I, R, D])
def test_quadrature_measure(d):
    q = d.quadrature(20)
    assert q.integrate(np.ones(len(q))) == pytest.approx(d.measure, rel=1e-13)


def test_disk_quadrature_integrates_r_squared():
    q = D.quadrature(16)
    r2 = np.sum(q.nodes**2, axis=1)
    assert q.integrate(r2) == pytest.approx(math.pi / 2, rel=1e-13)


def test_gauss_legendre_degree():
    x, w = gauss_legendre(5, 0.0, 2.0)
    assert np.dot(w, x**9) == pytest.approx(2.0**10 / 10, rel=1e-13)


def test_stencil_fits_examples():
    assert I.stencil_fits(1.0, [1.0], 1e-3, 2)
    assert not I.stencil_fits(1e-4, [1.0], 1e-3, 2)
    assert not D.stencil_fits([0.9, 0.0], [1.0, 0.0], 0.05, 4)


def test_round_trip_and_validation():
    for d in (I, R, D):
        assert domain_from_dict(d.to_dict()) == d
    with pytest.raises(ValueError):
        domain_from_dict({"kind": "disk", "R": 1.0, "extra": 2})
    with pytest.raises(ValueError):
        Interval(-1.0)


def test_bridge_kill_prob_half_space():
    # one wall far away: exp(-a b / dt) with generator Laplace
    p = I.bridge_kill_prob(0.1, 0.2, 1e-3)
    assert p == pytest.approx(math.exp(-0.1 * 0.2 / 1e-3), rel=1e-6)
