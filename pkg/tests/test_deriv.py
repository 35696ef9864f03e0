import math

import numpy as np
import pytest

from heatlab.deriv import Stencil, StencilError, breakeven_step, central_diff, ftc_check
from heatlab.domain import Disk, Interval
from heatlab.spectral import enumerate_eigenpairs


def test_second_derivative_of_sine():
    v = central_diff(np.sin, math.pi / 2, [1.0], Stencil(2, 1e-3))
    assert v == pytest.approx(-1.0, abs=1e-6)


def test_cubic_third_derivative_is_exact():
    v = central_diff(lambda x: x**3, 0.7, [1.0], Stencil(3, 1e-2))
    assert v == pytest.approx(6.0, rel=1e-8)


def test_fourth_derivative_of_exponential():
    v = central_diff(np.exp, 0.0, [1.0], Stencil(4, 1e-2), richardson=True)
    assert v == pytest.approx(1.0, abs=1e-6)


def test_second_order_convergence():
    f, x = np.cos, 0.4
    err = [abs(central_diff(f, x, [1.0], Stencil(2, h)) + math.cos(x)) for h in (0.1, 0.05)]
    assert err[0] / err[1] == pytest.approx(4.0, rel=0.02)


def test_roundoff_floor_refuses_tiny_steps():
    with pytest.raises(StencilError):
        central_diff(np.sin, 1.0, [1.0], Stencil(4, breakeven_step(4) / 100))


def test_stencil_must_fit():
    with pytest.raises(StencilError):
        central_diff(np.sin, 1e-4, [1.0], Stencil(2, 1e-3), domain=Interval(math.pi))


def test_disk_hessian_by_differences():
    D = Disk(1.0)
    p = enumerate_eigenpairs(D, 3)[-1]
    x = np.array([0.1, 0.2])
    for nu in ([1.0, 0.0], [0.6, 0.8]):
        fd = central_diff(p.value, x, nu, Stencil(2, 1e-4), domain=D)
        nu = np.array(nu)
        assert fd == pytest.approx(nu @ p.hess(x) @ nu, rel=1e-6)


def test_ftc_along_a_segment():
    D = Disk(1.0)
    p = enumerate_eigenpairs(D, 4)[-1]
    a, b = np.array([-0.5, 0.1]), np.array([0.4, 0.3])
    nu = (b - a) / np.linalg.norm(b - a)
    res = ftc_check(lambda x: p.directional(x, nu, 1), lambda x: p.directional(x, nu, 2), a, b, domain=D)
    assert res < 1e-12
