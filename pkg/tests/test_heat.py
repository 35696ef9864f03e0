import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heatlab.domain import Disk, Interval, Rectangle
from heatlab.heat import (
    Truncation,
    TruncationError,
    crank_nicolson_1d,
    eigen_field,
    free_kernel,
    heat_kernel,
    images_kernel_1d,
    images_survival_1d,
    kernel_row,
    kernel_terms,
    project,
    semigroup_deriv,
    semigroup_eval,
    survival,
    survival_value,
    t_min,
)
from heatlab.spectral import enumerate_eigenpairs

I = Interval(math.pi)
R = Rectangle(math.pi, 2.0)
D = Disk(1.0)


def test_kernel_against_images():
    xs = np.linspace(0.0, math.pi, 15)
    for t in (0.01, 0.3, 2.0):
        for x in xs:
            ref = [images_kernel_1d(math.pi, t, x, y) for y in xs]
            assert np.max(np.abs(kernel_row(I, t, x, xs) - ref)) < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(0.05, 3.0), st.floats(0.01, 1.0))
def test_kernel_symmetric_and_positive(x, y, t):
    a = heat_kernel(I, t, x, y).value
    b = heat_kernel(I, t, y, x).value
    assert a == pytest.approx(b, abs=1e-13)
    assert a >= 0.0


def test_images_kernel_vanishes_at_wall():
    assert images_kernel_1d(math.pi, 0.2, 0.0, 1.0) == 0.0


def test_images_survival_closed_form_with_mpmath():
    # one wall dominates for small t: erf(x / (2 sqrt t))
    x, t = 0.05, 1e-3
    ref = float(mpmath.erf(x / (2 * mpmath.sqrt(t))))
    assert images_survival_1d(math.pi, t, x) == pytest.approx(ref, abs=1e-12)


def test_survival_value_at_the_centre():
    s = survival(I, 0.1, math.pi / 2)
    assert s == pytest.approx(images_survival_1d(math.pi, 0.1, math.pi / 2), abs=1e-12)
    assert s == pytest.approx(0.99911187, abs=1e-8)


@pytest.mark.parametrize("d,x", [(R, [1.0, 0.7]), (D, [0.3, -0.2])])
def test_survival_matches_kernel_quadrature(d, x):
    t = 0.1
    q = d.quadrature(80)
    row = kernel_row(d, t, np.array(x), q.nodes)
    assert survival(d, t, x) == pytest.approx(float(np.dot(q.weights, row)), abs=1e-10)


def test_survival_is_monotone_in_time():
    vals = [survival(D, t, [0.2, 0.1]) for t in (0.01, 0.05, 0.2, 1.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_rectangle_kernel_is_a_product():
    t = 0.07
    v = heat_kernel(R, t, [1.0, 0.5], [1.3, 0.9]).value
    a = images_kernel_1d(math.pi, t, 1.0, 1.3)
    b = images_kernel_1d(2.0, t, 0.5, 0.9)
    assert v == pytest.approx(a * b, rel=1e-10)


def test_disk_kernel_below_free_kernel():
    x = np.array([0.5, 0.0])
    ys = D.interior_grid(8, 16)
    ys = ys[D.contains(ys)]
    row = kernel_row(D, 0.05, x, ys)
    assert np.all(row <= free_kernel(0.05, x[None, :], ys) + 1e-9)


def test_truncation_adapts_to_time():
    assert len(kernel_terms(I, 0.01)) > len(kernel_terms(I, 1.0))
    assert t_min(D) == pytest.approx(0.008, rel=0.05)


def test_below_t_min_disk_raises():
    with pytest.raises(TruncationError):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            heat_kernel(D, 1e-4, [0.0, 0.0], [0.1, 0.0])


def test_fixed_truncation_reports_terms():
    kv = survival_value(I, 0.5, 1.0, Truncation(mode="fixed", n=5))
    assert kv.terms == 5


def test_semigroup_of_eigenfunction():
    p = enumerate_eigenpairs(D, 4)[-1]
    F = eigen_field(p)
    x = np.array([0.1, 0.4])
    assert semigroup_eval(F, 0.3, x) == pytest.approx(math.exp(-0.3 * p.eigenvalue) * p.value(x), abs=1e-14)


def test_projection_of_sine_is_exact():
    F = project(I, np.sin, Truncation(mode="fixed", n=8))
    assert F.coeffs[0] == pytest.approx(math.sqrt(math.pi / 2), rel=1e-13)
    assert np.max(np.abs(F.coeffs[1:])) < 1e-13
    assert F.reconstruction_error < 1e-13


def test_second_derivative_of_parabola_at_t0():
    # x(pi - x) has second derivative -2; the sine series tail is O(1/N)
    n = 400
    F = project(I, lambda x: x * (math.pi - x), Truncation(mode="fixed", n=n))
    v = semigroup_deriv(F, 0.0, 1.0, [1.0], 2)
    assert v == pytest.approx(-2.0, abs=2 * (8 / math.pi) / n)


def test_semigroup_against_crank_nicolson():
    f = lambda x: x * (math.pi - x)  # noqa: E731
    F = project(I, f, Truncation(mode="fixed", n=400))
    errs = []
    for n in (201, 401):
        x = np.linspace(0.0, math.pi, n)
        u = crank_nicolson_1d(math.pi, f(x), 0.2, 4 * n)
        errs.append(np.max(np.abs(u - semigroup_eval(F, 0.2, x))))
    assert errs[1] < 5e-6
    # second order in the mesh width
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)


def test_crank_nicolson_sine_mode():
    x = np.linspace(0.0, math.pi, 201)
    u = crank_nicolson_1d(math.pi, np.sin(x), 0.5, 500)
    assert np.max(np.abs(u - math.exp(-0.5) * np.sin(x))) < 1e-4
