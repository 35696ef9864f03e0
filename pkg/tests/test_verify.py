import math

import numpy as np
import pytest

from heatlab import verify
from heatlab.domain import Disk, Interval, Rectangle
from heatlab.heat import SpectralField, Truncation, eigen_field, project
from heatlab.spectral import EigenPair, disk_branch, enumerate_eigenpairs

I = Interval(math.pi)
R = Rectangle(math.pi, 2.0)
D = Disk(1.0)


def _single(p):
    return SpectralField(p.domain, (p,), np.array([1.0]), 0.0, f"phi_{p.label()}")


def test_even_order_interval_eigenfunction_is_exact():
    F = _single(enumerate_eigenpairs(I, 2)[1])
    r = verify.thm1_check(F, [0.3], [1.0], 2, 0.5)
    assert r.exact_commutation
    assert r.lhs_X < 1e-12 and r.passed


def test_odd_order_eigenfunction_is_not_exact_but_bounded():
    # d/dx sin is a cosine, which the killed semigroup does not preserve
    F = _single(enumerate_eigenpairs(I, 1)[0])
    r = verify.thm1_check(F, [0.3], [1.0], 1, 0.5)
    assert not r.exact_commutation
    assert r.lhs_X > 0.1
    assert r.lhs_X <= r.rhs_all and r.passed


def test_interval_bound_against_closed_form():
    # f = phi_1, k = 1: every term is explicit
    p = enumerate_eigenpairs(I, 1)[0]
    F = _single(p)
    x, t = 1.0, 0.2
    r = verify.thm1_check(F, [x], [1.0], 1, t)
    C = math.sqrt(2 / math.pi)
    assert r.semigroup_derivative == pytest.approx(math.exp(-t) * C * math.cos(x), abs=1e-13)
    assert r.boundary_max == pytest.approx(C, rel=1e-13)


def test_report_records_grids_and_tolerances():
    F = _single(enumerate_eigenpairs(R, 2)[1])
    r = verify.thm1_check(F, [1.0, 0.5], [0.6, 0.8], 3, 0.1)
    d = r.to_dict()
    for key in ("grids", "tol_abs", "tol_rel", "boundary_max", "boundary_max_all", "pass", "kernel_terms"):
        assert key in d
    assert d["grids"]["s_points"] == 8 and len(d["grids"]["s_grid"]) == 8
    assert r.boundary_max_all >= r.boundary_max


def test_small_time_is_skipped_on_the_disk():
    F = _single(enumerate_eigenpairs(D, 1)[0])
    r = verify.thm1_check(F, [0.0, 0.0], [1.0, 0.0], 1, 1e-3)
    assert r.status == "skipped" and r.passed


def test_boundary_point_is_skipped():
    F = _single(enumerate_eigenpairs(I, 1)[0])
    r = verify.thm1_check(F, [0.0], [1.0], 1, 0.1)
    assert r.status == "skipped"


def test_angular_supremum_matches_brute_force():
    p = enumerate_eigenpairs(D, 5)[-1]
    F = _single(p)
    pts = np.array([[0.6, 0.8], [-1.0, 0.0]])
    ab = verify._angular_basis(D, F, pts, 3, 720)
    fast = verify._angular_sup(ab, F.coeffs)
    brute = max(abs(p.directional(pts, [math.cos(a), math.sin(a)], 3)).max() for a in np.linspace(0, math.pi, 3601))
    assert fast == pytest.approx(brute, rel=1e-5)


def test_kernel_integral_is_quadrature_converged():
    F = project(D, verify.polynomial_field(D), Truncation(mode="fixed", n=40))
    a = verify.Thm1Context(F, [1.0, 0.0], 2, 0.1).kernel_integral(np.array([0.2, 0.3]))
    b = verify.Thm1Context(F, [1.0, 0.0], 2, 0.1, verify.Thm1Grids(quad_order=120)).kernel_integral(np.array([0.2, 0.3]))
    assert a == pytest.approx(b, abs=1e-11)


def test_sweep_counts_and_csv():
    F = eigen_field(enumerate_eigenpairs(I, 1)[0])
    sw = verify.thm1_sweep(F, (1, 2), [[0.5], [0.0]], (0.1,), [[1.0]])
    assert (sw.passed, sw.failed, sw.skipped) == (2, 0, 2)
    csv = verify.rows_to_csv([r.to_dict() for r in sw.rows], verify.THM1_COLUMNS)
    lines = csv.strip().split("\n")
    assert lines[0].split(",") == verify.THM1_COLUMNS
    assert "skipped" in csv


def test_thm2_interval_ratio_is_one():
    rep = verify.thm2_ratio(I, 30)
    assert max(abs(r["ratio"] - 1.0) for r in rep.rows) < 1e-8


def test_thm2_disk_radial_ratio_is_constant():
    rep = verify.thm2_ratio(D, 8, pairs=disk_branch(D, 0, 8))
    ratios = [r["ratio"] for r in rep.rows]
    # Hessian at the centre over the J1 peak: 1 / (2 max J1)
    assert ratios == pytest.approx([1 / (2 * 0.5818652242815963)] * 8, rel=1e-6)


@pytest.mark.parametrize("d", [R, D])
def test_sperb_identity(d):
    for p in enumerate_eigenpairs(d, 5):
        assert verify.sperb_boundary_check(p).passed


def test_bochner_identity_and_a_broken_pair():
    p = enumerate_eigenpairs(I, 3)[-1]
    pts = np.linspace(0.1, 3.0, 20).reshape(-1, 1)
    assert verify.bochner_check(p, pts).passed
    wrong = EigenPair(I, p.index, p.eigenvalue * 1.1, p.norm_const)
    assert not verify.bochner_check(wrong, pts).passed


def test_bochner_skips_points_near_the_wall():
    p = enumerate_eigenpairs(I, 1)[0]
    rep = verify.bochner_check(p, [[1e-5], [1.0]], eps=1e-3)
    assert rep.skipped == 1 and rep.samples == 1


def test_tail_bound():
    rep = verify.tail_bound_check()
    assert rep.passed
    assert rep.extra["eps_checks"]["0.0009"]["value"] == pytest.approx(0.001803, abs=1e-6)
    with pytest.raises(ValueError):
        verify.tail_bound_check(z=[0.0, 1.0])


def test_comparison_bound_examples():
    fields = [
        ("r2", lambda x: np.sum(x**2, axis=1)),
        ("shifted", lambda x: np.sum(x**2, axis=1) / 4 + 1),
        ("exp", lambda x: np.exp(x[:, 0])),
    ]
    assert verify.comparison_bound_check(4.0, 1.0, fields[:1]).passed
    assert verify.comparison_bound_check(1.0, 1.0, fields[1:2]).passed
    assert verify.comparison_bound_check(math.exp(-1), 1.0, fields[2:]).passed


def test_line_scan_examples():
    xs = ys = np.linspace(-1, 1, 201)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    full = np.ones_like(X, dtype=bool)
    r = verify.line_fraction_scan([0, 0], 1.0, xs, ys, full, [1, 0], 0.5)
    assert r["a_fraction"] == 1.0 and r["hypothesis_met"]
    cap = ~((X > 0.2) & (Y > 0.85))
    r = verify.line_fraction_scan([0, 0], 1.0, xs, ys, cap, [1, 0], 0.5)
    assert r["a_fraction"] >= 0.97 and r["hypothesis_met"]
    big = ~(X > 0.2)
    r = verify.line_fraction_scan([0, 0], 1.0, xs, ys, big, [1, 0], 0.5)
    assert not r["hypothesis_met"]


def test_superlevel_mass_on_the_interval():
    p = enumerate_eigenpairs(I, 20)[-1]
    sm = verify.superlevel_mass(p, [1.0], 0.01 / p.eigenvalue)
    assert sm["a_mass"] <= sm["survival"] + 1e-12
    assert sm["a_mass"] > 0.99


def test_distance_bound_examples():
    assert verify.distance_bound_check([enumerate_eigenpairs(I, 5)[-1]], 1e-3).passed
    rep = verify.distance_bound_check(disk_branch(D, 0, 5)[-1:], 1e-3)
    assert rep.passed and rep.samples == 1


def test_growth_slopes():
    g = verify.growth_exponent_fit(D, 30)
    assert g["supnorm_slope"] == pytest.approx(0.25, abs=0.03)
    assert g["gradient_slope"] == pytest.approx(0.75, abs=0.05)
    assert g["hessian_slope"] == pytest.approx(1.25, abs=0.05)


def test_partition_identity():
    rep = verify.partition_check(I, 0.2, 0.3, 4000, seed=1)
    assert rep.passed


def test_monotonicity_and_eigen_relation():
    assert verify.monotonicity_check(R, 0.1, n=9).passed
    assert verify.semigroup_eigen_check(I, count=5).passed
