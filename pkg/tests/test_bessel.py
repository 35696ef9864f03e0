import numpy as np
import pytest
import scipy.special as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from heatlab.bessel import (
    BesselError,
    bessel_block,
    bessel_j,
    bessel_j_prime,
    bessel_zero,
    bessel_zeros,
    bessel_zeros_below,
)


def test_block_matches_scipy_on_a_grid():
    x = np.linspace(0.0, 120.0, 4001)
    B = bessel_block(0, 60, x)
    ref = sp.jv(np.arange(61)[:, None], x[None, :])
    assert np.max(np.abs(B - ref)) < 1e-13


def test_negative_orders_follow_parity():
    x = np.array([0.5, 3.0, 17.0])
    B = bessel_block(-3, 3, x)
    for n in range(1, 4):
        assert np.allclose(B[3 - n], (-1) ** n * B[3 + n], atol=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 60), st.floats(0.0, 500.0))
def test_single_values_match_scipy(m, x):
    assert abs(bessel_j(m, x) - sp.jv(m, x)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 40), st.floats(0.1, 80.0))
def test_derivative_recurrence(m, x):
    assert abs(bessel_j_prime(m, x) - sp.jvp(m, x)) < 1e-12


@pytest.mark.parametrize("m", [0, 1, 2, 7, 25, 60])
def test_zeros_match_scipy(m):
    z = np.array(bessel_zeros(m, 30))
    assert np.max(np.abs(z - sp.jn_zeros(m, 30))) < 1e-11


def test_known_first_zero():
    assert abs(bessel_zero(0, 1) - 2.404825557695773) < 1e-14


def test_zeros_below_is_a_prefix():
    z = bessel_zeros_below(3, 50.0)
    assert all(v < 50.0 for v in z)
    assert z == bessel_zeros(3, len(z))
    assert bessel_zeros(3, len(z) + 1)[-1] >= 50.0


def test_out_of_range_raises():
    with pytest.raises(BesselError):
        bessel_block(0, 200, np.array([1.0]))
    with pytest.raises(BesselError):
        bessel_block(0, 2, np.array([-1.0]))


def test_values_at_the_origin():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(1, 0.0) == 0.0


def test_first_zeros_by_bisection():
    from scipy.optimize import bisect

    for m, bracket, want in ((0, (2.0, 3.0), 2.404826), (1, (3.5, 4.0), 3.831706)):
        root = bisect(lambda x: bessel_j(m, x), *bracket, xtol=1e-14)
        assert bessel_zero(m, 1) == pytest.approx(root, abs=1e-12)
        assert bessel_zero(m, 1) == pytest.approx(want, abs=1e-6)


def test_zeros_interlace():
    assert bessel_zero(0, 1) < bessel_zero(1, 1) < bessel_zero(0, 2)
