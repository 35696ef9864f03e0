"""Checks of the derivative inequality and the Hessian bound, with supporting identities.

The derivative inequality compares

    X = | d^k/dnu^k e^{t Laplace} f (x0) - int p_t(x0, y) d^k f/dnu^k (y) dy |

with ``(1 - int p_t(x0, y) dy) * max_{0<=s<=t, z on boundary} |d^k/dnu^k e^{s Laplace} f (z)|``.
Boundary data are zero throughout (the killed semigroup); suprema over the
boundary and over s are taken on recorded grids.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from . import stoch
from .bessel import bessel_block
from .deriv import MACHINE_EPS
from .domain import Disk, Domain, Interval, Rectangle, gauss_legendre
from .heat import (
    DEFAULT_TRUNCATION,
    SpectralField,
    Truncation,
    TruncationError,
    free_kernel,
    images_kernel_1d,
    kernel_row,
    kernel_terms,
    project,
    semigroup_eval,
    survival,
    t_min,
)
from .spectral import EigenPair, basis, directional_matrix, disk_branch, enumerate_eigenpairs, value_matrix

TOL_ABS = 1e-8
TOL_REL = 1e-6


# -- report containers -----------------------------------------------------------


@dataclass(frozen=True)
class IdentityReport:
    name: str
    max_residual: float
    tolerance: float
    samples: int
    skipped: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.tolerance)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["pass"] = self.passed
        return out


@dataclass(frozen=True)
class Thm1Grids:
    """Discretization of the derivative-inequality check; every field is reported."""

    boundary_n: int = 256
    s_points: int = 8
    angles: int = 720
    quad_order: int | None = None  # None picks an order from the spectral content
    truncation: Truncation = DEFAULT_TRUNCATION
    tol_abs: float = TOL_ABS
    tol_rel: float = TOL_REL

    def s_grid(self, t: float) -> np.ndarray:
        """``{0, t/2^(p-2), ..., t/2, t}`` with p points."""
        if self.s_points < 2:
            raise ValueError("s-grid needs at least 2 points")
        geo = [t / 2.0**j for j in range(self.s_points - 2, -1, -1)]
        return np.array([0.0] + geo)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["truncation"] = self.truncation.to_dict()
        return d


@dataclass(frozen=True)
class Thm1Report:
    domain: dict
    field: str
    x0: tuple
    nu: tuple
    k: int
    t: float
    status: str  # "ok" or "skipped"
    lhs_X: float = math.nan
    survival_deficit: float = math.nan
    boundary_max: float = math.nan
    boundary_max_all: float = math.nan
    rhs: float = math.nan
    rhs_all: float = math.nan
    margin: float = math.nan
    margin_all: float = math.nan
    tol_abs: float = math.nan
    tol_rel: float = TOL_REL
    semigroup_derivative: float = math.nan
    kernel_integral: float = math.nan
    reconstruction_error: float = math.nan
    exact_commutation: bool = False
    kernel_terms: int = 0
    grids: dict = field(default_factory=dict)
    reason: str = ""

    @property
    def passed(self) -> bool:
        if self.status != "ok":
            return True
        # the all-direction supremum is the larger, safe reading of the bound
        return bool(self.margin_all >= -self.tol_abs - self.tol_rel * self.boundary_max_all)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["pass"] = self.passed
        return out


# -- helpers ---------------------------------------------------------------------


def _arg(d: Domain, pts: np.ndarray):
    return pts[:, 0] if d.dim == 1 else pts


def _unit(d: Domain, nu) -> np.ndarray:
    nu = np.atleast_1d(np.asarray(nu, dtype=float)).reshape(d.dim)
    if abs(np.linalg.norm(nu) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    return nu


def exact_commutation(F: SpectralField, nu, k: int) -> bool:
    """True when ``d^k/dnu^k phi`` is again a Dirichlet eigenfunction with the same eigenvalue.

    Only then does X vanish for a single-eigenfunction input: even k on the
    interval, and even k along a coordinate axis on the rectangle.
    """
    nz = np.nonzero(F.coeffs)[0]
    if len(nz) != 1 or k % 2:
        return False
    d = F.domain
    if isinstance(d, Interval):
        return True
    if isinstance(d, Rectangle):
        nu = np.asarray(nu, dtype=float)
        return bool(np.min(np.abs(nu)) == 0.0)
    return False


def _quadrature_orders(d: Domain, kernel_pairs, F: SpectralField, order: int | None):
    """Radial (or per-axis) order and angular count resolving kernel times field.

    The angular count allows derivatives up to order 4 so that one kernel
    matrix serves every k.
    """
    lam_k = max(p.eigenvalue for p in kernel_pairs)
    lam_f = float(F.eigenvalues.max())
    w = math.sqrt(lam_k) + math.sqrt(lam_f)
    if isinstance(d, Interval):
        return order or int(0.6 * w * d.L) + 40, None
    if isinstance(d, Rectangle):
        return order or int(0.6 * w * max(d.Lx, d.Ly)) + 40, None
    m_k = max(p.index[0] for p in kernel_pairs)
    m_f = max(p.index[0] for p in F.pairs)
    n_r = order or int(0.5 * w * d.R) + 30
    return n_r, max(2 * (m_k + m_f + 8), 2 * n_r)


def _angular_basis(d: Domain, F: SpectralField, pts: np.ndarray, k: int, n_angles: int):
    """Matrices giving ``max over unit omega of |d^k/domega^k u|`` from coefficients.

    The k-th directional derivative is a homogeneous degree-k polynomial in
    ``(cos a, sin a)``; it is recovered from k + 1 directions and evaluated on
    a dense angle grid. Returns ``(W, inv(V), [M_0..M_k])``.
    """
    if d.dim == 1:
        return None, None, [directional_matrix(list(F.pairs), pts[:, 0], [1.0], k)]
    base = np.pi * np.arange(k + 1) / (k + 1)
    mats = [directional_matrix(list(F.pairs), pts, [math.cos(a), math.sin(a)], k) for a in base]
    V = np.stack([np.cos(base) ** j * np.sin(base) ** (k - j) for j in range(k + 1)], axis=1)
    a = np.pi * np.arange(n_angles) / n_angles
    W = np.stack([np.cos(a) ** j * np.sin(a) ** (k - j) for j in range(k + 1)], axis=1)
    return W, np.linalg.inv(V), mats


def _angular_sup(ab, coeffs: np.ndarray) -> float:
    W, Vinv, mats = ab
    vals = np.stack([M @ coeffs for M in mats])
    if W is None:
        return float(np.max(np.abs(vals)))
    return float(np.max(np.abs(W @ (Vinv @ vals))))


@lru_cache(maxsize=16)
def _kernel_matrix(d: Domain, t: float, trunc: Truncation, n_r: int, n_t: int | None):
    kern = list(kernel_terms(d, t, trunc))
    q = d.quadrature(n_r) if n_t is None else d.quadrature(n_r, angular=n_t)
    return q, value_matrix(kern, _arg(d, q.nodes))


class Thm1Context:
    """Everything about one (domain, field, k, nu, t) cell that does not depend on x0."""

    def __init__(self, F: SpectralField, nu, k: int, t: float, grids: Thm1Grids = Thm1Grids()):
        d = F.domain
        self.F, self.k, self.t, self.grids = F, k, t, grids
        self.d = d
        self.nu = _unit(d, nu)
        trunc = grids.truncation
        pairs = list(F.pairs)
        if isinstance(d, Rectangle):
            self.kx = list(kernel_terms(Interval(d.Lx), t, trunc))
            self.ky = list(kernel_terms(Interval(d.Ly), t, trunc))
            # only the largest eigenvalue matters for the quadrature order
            kern = [EigenPair(d, (0, 0), self.kx[-1].eigenvalue + self.ky[-1].eigenvalue, 1.0)]
        else:
            kern = list(kernel_terms(d, t, trunc))
        self.kernel_pairs = kern
        n_r, n_t = _quadrature_orders(d, kern, F, grids.quad_order)
        if isinstance(d, Rectangle):
            self.quad = d.quadrature(n_r)
        else:
            self.quad, Phi = _kernel_matrix(d, t, trunc, n_r, n_t)
        nodes = self.quad.nodes
        g = directional_matrix(pairs, _arg(d, nodes), self.nu, k) @ F.coeffs
        self.g_scale = float(np.max(np.abs(g))) if len(g) else 0.0
        gw = self.quad.weights * g
        if isinstance(d, Rectangle):
            # tensor nodes are stored x-major
            self.xs = np.unique(nodes[:, 0])
            self.ys = np.unique(nodes[:, 1])
            self.GW = gw.reshape(len(self.xs), len(self.ys))
            self.Px = value_matrix(self.kx, self.xs)
            self.Py = value_matrix(self.ky, self.ys)
            self.ex = np.exp(-np.array([p.eigenvalue for p in self.kx]) * t)
            self.ey = np.exp(-np.array([p.eigenvalue for p in self.ky]) * t)
            self.n_terms = len(self.kx) * len(self.ky)
        else:
            lam = np.array([p.eigenvalue for p in kern])
            self.b = np.exp(-lam * t) * (Phi.T @ gw)
            self.n_terms = len(kern)
        # boundary suprema over the s-grid
        bpts, _, _ = d.boundary_arrays(grids.boundary_n)
        self.bpts = bpts
        M = directional_matrix(pairs, _arg(d, bpts), self.nu, k)
        ab = _angular_basis(d, F, bpts, k, grids.angles)
        best, best_all = 0.0, 0.0
        for s in grids.s_grid(t):
            c = F.at_time(s)
            best = max(best, float(np.max(np.abs(M @ c))))
            best_all = max(best_all, _angular_sup(ab, c))
        self.boundary_max = best
        self.boundary_max_all = max(best_all, best)
        self.exact = exact_commutation(F, self.nu, k)

    def kernel_integral(self, x0: np.ndarray) -> float:
        """``int p_t(x0, y) g(y) dy`` by quadrature with g the k-th derivative of f_N."""
        d = self.d
        if isinstance(d, Rectangle):
            px = value_matrix(self.kx, np.array([x0[0]]))[0]
            py = value_matrix(self.ky, np.array([x0[1]]))[0]
            kx = self.Px @ (self.ex * px)
            ky = self.Py @ (self.ey * py)
            return float(kx @ self.GW @ ky)
        phi = value_matrix(self.kernel_pairs, x0.reshape(1, -1) if d.dim > 1 else x0)[0]
        return float(phi @ self.b)

    def report(self, x0) -> Thm1Report:
        d = self.d
        x = np.atleast_1d(np.asarray(x0, dtype=float))
        common = dict(
            domain=d.to_dict(),
            field=self.F.label,
            x0=tuple(float(v) for v in x),
            nu=tuple(float(v) for v in self.nu),
            k=self.k,
            t=self.t,
        )
        if not d.contains(x if d.dim > 1 else x[0]):
            return Thm1Report(**common, status="skipped", reason="x0 not interior")
        lhs_deriv = float(semigroup_deriv_at(self.F, self.t, x, self.nu, self.k))
        integral = self.kernel_integral(x)
        X = abs(lhs_deriv - integral)
        deficit = 1.0 - survival(d, self.t, x if d.dim > 1 else x[0], self.grids.truncation)
        deficit = min(max(deficit, 0.0), 1.0)
        rhs = deficit * self.boundary_max
        rhs_all = deficit * self.boundary_max_all
        scale = max(self.g_scale, abs(lhs_deriv), 1e-300)
        return Thm1Report(
            **common,
            status="ok",
            lhs_X=X,
            survival_deficit=deficit,
            boundary_max=self.boundary_max,
            boundary_max_all=self.boundary_max_all,
            rhs=rhs,
            rhs_all=rhs_all,
            margin=rhs - X,
            margin_all=rhs_all - X,
            tol_abs=self.grids.tol_abs * scale,
            tol_rel=self.grids.tol_rel,
            semigroup_derivative=lhs_deriv,
            kernel_integral=integral,
            reconstruction_error=self.F.reconstruction_error,
            exact_commutation=self.exact,
            kernel_terms=self.n_terms,
            grids={**self.grids.to_dict(), "quad_nodes": len(self.quad), "s_grid": self.grids.s_grid(self.t).tolist()},
        )


def semigroup_deriv_at(F: SpectralField, t: float, x: np.ndarray, nu, k: int) -> float:
    d = F.domain
    M = directional_matrix(list(F.pairs), x.reshape(1, -1) if d.dim > 1 else x, nu, k)
    return float((M @ F.at_time(t))[0])


def thm1_check(F: SpectralField, x0, nu, k: int, t: float, grids: Thm1Grids = Thm1Grids()) -> Thm1Report:
    """Both sides of the derivative inequality at one point."""
    d = F.domain
    if t < t_min(d, grids.truncation):
        x = np.atleast_1d(np.asarray(x0, dtype=float))
        return Thm1Report(d.to_dict(), F.label, tuple(x.tolist()), tuple(np.atleast_1d(nu).tolist()), k, t, "skipped", reason="t below t_min")
    return Thm1Context(F, nu, k, t, grids).report(x0)


@dataclass
class SweepResult:
    rows: list
    passed: int = 0
    failed: int = 0
    skipped: int = 0

    @property
    def violations(self) -> list:
        return [r for r in self.rows if not r.passed]

    def to_dict(self) -> dict:
        return {
            "rows": [r.to_dict() for r in self.rows],
            "summary": {"passed": self.passed, "failed": self.failed, "skipped": self.skipped},
        }


def thm1_sweep(F: SpectralField, ks, x0s, ts, nus, grids: Thm1Grids = Thm1Grids()) -> SweepResult:
    """Every (k, t, nu, x0) cell, in that nesting order."""
    rows = []
    d = F.domain
    for k in ks:
        for t in ts:
            for nu in nus:
                try:
                    if t < t_min(d, grids.truncation):
                        raise TruncationError("t below t_min")
                    ctx = Thm1Context(F, nu, k, t, grids)
                except TruncationError as exc:
                    for x0 in x0s:
                        x = np.atleast_1d(np.asarray(x0, dtype=float))
                        rows.append(Thm1Report(d.to_dict(), F.label, tuple(x.tolist()), tuple(np.atleast_1d(nu).tolist()), k, t, "skipped", reason=str(exc)))
                    continue
                rows.extend(ctx.report(x0) for x0 in x0s)
    res = SweepResult(rows)
    for r in rows:
        if r.status != "ok":
            res.skipped += 1
        elif r.passed:
            res.passed += 1
        else:
            res.failed += 1
    return res


def default_points(d: Domain) -> list:
    """Nine interior points: a few near the boundary, a few deep inside."""
    if isinstance(d, Interval):
        return [[f * d.L] for f in (0.02, 0.1, 0.2, 0.3, 0.45, 0.55, 0.7, 0.85, 0.97)]
    if isinstance(d, Rectangle):
        return [[a * d.Lx, b * d.Ly] for a in (0.05, 0.5, 0.85) for b in (0.1, 0.5, 0.95)]
    pts = [[0.0, 0.0]]
    for r, angles in ((0.5, (0.3, 2.0, 4.0, 5.5)), (0.92, (1.0, 2.5, 3.8, 5.0))):
        pts += [[r * d.R * math.cos(a), r * d.R * math.sin(a)] for a in angles]
    return pts


def default_directions(d: Domain) -> list:
    if d.dim == 1:
        return [[1.0], [-1.0]]
    return [[1.0, 0.0], [0.6, 0.8]]


def polynomial_field(d: Domain) -> Callable:
    """A smooth non-eigenfunction vanishing on the boundary."""
    if isinstance(d, Interval):
        return lambda x: x * (d.L - x)
    if isinstance(d, Rectangle):
        return lambda p: p[:, 0] * (d.Lx - p[:, 0]) * p[:, 1] * (d.Ly - p[:, 1])
    return lambda p: d.R**2 - p[:, 0] ** 2 - p[:, 1] ** 2


def default_fields(d: Domain, n: int = 64) -> list[SpectralField]:
    """One eigenfunction and one projected polynomial-type field."""
    p = enumerate_eigenpairs(d, 3 if d.dim == 2 else 2)[-1]
    poly = project(d, polynomial_field(d), Truncation(mode="fixed", n=n if d.dim == 1 else max(n, 100)), label="poly")
    return [SpectralField(d, (p,), np.array([1.0]), 0.0, f"phi_{p.label()}"), poly]


THM1_TIMES = (0.02, 0.1, 0.5)
THM1_ORDERS = (1, 2, 3)


THM1_COLUMNS = [
    "domain", "field", "x0", "nu", "k", "t", "status", "lhs_X", "survival_deficit",
    "boundary_max", "boundary_max_all", "rhs", "rhs_all", "margin", "margin_all",
    "tol_abs", "tol_rel", "exact_commutation", "kernel_terms", "pass", "reason",
]


def _cell(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.17g}"
    if isinstance(v, (tuple, list)):
        return " ".join(_cell(x) for x in v)
    if isinstance(v, dict):
        return " ".join(f"{k}={_cell(x)}" for k, x in sorted(v.items()))
    return str(v)


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c, "")) for c in columns])
    return buf.getvalue()


# -- the Hessian bound -------------------------------------------------------------


def _project_closed(d: Domain, p: np.ndarray) -> np.ndarray:
    if isinstance(d, Interval):
        return np.clip(p, 0.0, d.L)
    if isinstance(d, Rectangle):
        return np.array([min(max(p[0], 0.0), d.Lx), min(max(p[1], 0.0), d.Ly)])
    r = math.hypot(p[0], p[1])
    return p if r <= d.R else p * (d.R / r)


def _refined_sup(d: Domain, fun: Callable, pts: np.ndarray, top: int = 2) -> float:
    """Max of a nonnegative field: grid maximum, then local refinement of the best points."""
    vals = fun(pts)
    best = float(np.max(vals))
    order = np.argsort(-vals, kind="stable")[:top]
    spacing = d.diameter / math.sqrt(len(pts)) if d.dim == 2 else d.diameter / (len(pts) - 1)
    for i in order:
        x0 = pts[i]
        if d.dim == 1:
            a = max(0.0, x0[0] - spacing)
            b = min(d.L, x0[0] + spacing)
            r = minimize_scalar(lambda x: -float(fun(np.array([[x]]))[0]), bounds=(a, b), method="bounded", options={"xatol": 1e-13})
            best = max(best, -float(r.fun))
        else:
            # vectorized zoom: local 11 x 11 grids shrinking fivefold each round
            c, h = x0, spacing
            for _ in range(6):
                off = np.linspace(-h, h, 11)
                cand = c[None, :] + np.stack(np.meshgrid(off, off, indexing="ij"), -1).reshape(-1, 2)
                cand = np.array([_project_closed(d, q) for q in cand])
                v = fun(cand)
                j = int(np.argmax(v))
                best = max(best, float(v[j]))
                c, h = cand[j], h / 5.0
    return best


def hess_norm(p: EigenPair, pts: np.ndarray) -> np.ndarray:
    """Operator norm of the Hessian (largest absolute eigenvalue)."""
    H = p.hess(_arg(p.domain, pts))
    if p.domain.dim == 1:
        return np.abs(H[:, 0, 0])
    a, b, c = H[:, 0, 0], H[:, 1, 1], H[:, 0, 1]
    mid = 0.5 * (a + b)
    rad = np.hypot(0.5 * (a - b), c)
    return np.abs(mid) + rad


def grad_norm(p: EigenPair, pts: np.ndarray) -> np.ndarray:
    g = p.grad(_arg(p.domain, pts))
    return np.linalg.norm(g, axis=1)


def sup_grid(d: Domain, density: int | None = None) -> np.ndarray:
    if isinstance(d, Interval):
        return d.interior_grid(density or 2001)
    if isinstance(d, Rectangle):
        return d.interior_grid(density or 200)
    return d.interior_grid(density or 80, 4 * (density or 80))


@dataclass(frozen=True)
class Thm2Report:
    domain: dict
    rows: list
    slope: float
    grid: str

    def to_dict(self) -> dict:
        return asdict(self)


def _slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def thm2_ratio(d: Domain, count: int, grid: np.ndarray | None = None, pairs: list | None = None) -> Thm2Report:
    """``||D^2 phi|| / (sqrt(lambda) ||grad phi||)`` for the first ``count`` eigenpairs."""
    if count < 1:
        raise ValueError("count must be >= 1")
    pts = sup_grid(d) if grid is None else grid
    pairs = pairs if pairs is not None else enumerate_eigenpairs(d, count)
    rows = []
    for p in pairs:
        hs = _refined_sup(d, lambda x, p=p: hess_norm(p, x), pts)
        gs = _refined_sup(d, lambda x, p=p: grad_norm(p, x), pts)
        rows.append(
            {"index": list(p.index), "lambda": p.eigenvalue, "hess_sup": hs, "grad_sup": gs, "ratio": hs / (p.sqrt_lambda * gs)}
        )
    lam = [r["lambda"] for r in rows]
    ratio = [r["ratio"] for r in rows]
    slope = _slope(lam, ratio) if len(rows) > 1 else 0.0
    return Thm2Report(d.to_dict(), rows, slope, f"{len(pts)} points + local refinement")


# -- boundary and interior identities ------------------------------------------------


def sup_norm(p: EigenPair) -> float:
    """``max |phi|`` (exact for sines; dense radial scan plus refinement on the disk)."""
    d = p.domain
    if not isinstance(d, Disk):
        return p.norm_const
    m, kap = p.index[0], p.sqrt_lambda
    r = np.linspace(0.0, d.R, 4001)
    J = np.abs(bessel_block(m, m, kap * r)[0])
    i = int(np.argmax(J))
    lo, hi = r[max(i - 1, 0)], r[min(i + 1, len(r) - 1)]
    res = minimize_scalar(lambda x: -abs(bessel_block(m, m, kap * x)[0]), bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
    return p.norm_const * max(float(J[i]), -float(res.fun))


def sperb_boundary_check(p: EigenPair, n: int = 64, rel_tol: float = 1e-6) -> IdentityReport:
    """``d^2 phi/dn^2 + (dim - 1) H dphi/dn`` on the boundary, outward normal n.

    Tangential second derivatives are reported in ``extra`` without a verdict.
    """
    d = p.domain
    pts, inward, H = d.boundary_arrays(n)
    outward = -inward
    hess = p.hess(_arg(d, pts))
    grad = p.grad(_arg(d, pts))
    d_nn = np.einsum("ni,nij,nj->n", outward, hess, outward)
    d_n = np.einsum("ni,ni->n", grad, outward)
    res = np.abs(d_nn + (d.dim - 1) * H * d_n)
    extra = {"index": list(p.index), "lambda": p.eigenvalue}
    if d.dim == 2:
        tang = np.column_stack([-outward[:, 1], outward[:, 0]])
        extra["tangential_second_derivative_max"] = float(np.max(np.abs(np.einsum("ni,nij,nj->n", tang, hess, tang))))
    tol = rel_tol * p.eigenvalue * sup_norm(p)
    return IdentityReport("sperb_boundary", float(res.max()), tol, len(pts), 0, extra)


def bochner_check(p: EigenPair, pts, eps: float | None = None) -> IdentityReport:
    """``(1/2) Laplace |grad phi|^2 = -lambda |grad phi|^2 + ||D^2 phi||_F^2``.

    The left side is a central-difference Laplacian of the analytic ``|grad phi|^2``;
    points whose stencil does not fit are skipped and counted.
    """
    d = p.domain
    pts = np.asarray(pts, dtype=float).reshape(-1, d.dim)
    eps = eps or 1e-3 * d.diameter
    axes = np.eye(d.dim)
    keep = [i for i, x in enumerate(pts) if all(d.stencil_fits(x if d.dim > 1 else x[0], e, eps, 2) for e in axes)]
    skipped = len(pts) - len(keep)
    pts = pts[keep]
    G = lambda x: np.sum(p.grad(_arg(d, x)) ** 2, axis=1)  # noqa: E731
    g0 = G(pts)
    lap = np.zeros(len(pts))
    for e in axes:
        lap += (G(pts + eps * e) - 2.0 * g0 + G(pts - eps * e)) / eps**2
    H = p.hess(_arg(d, pts))
    rhs = -p.eigenvalue * g0 + np.sum(H**2, axis=(1, 2))
    res = np.abs(0.5 * lap - rhs)
    g_max = float(np.max(g0)) if len(g0) else 0.0
    # truncation (1/3) eps^2 lambda^2 G per axis, roundoff ~ 2 u G / eps^2 per axis
    tol = d.dim * (eps**2 * p.eigenvalue**2 + 20.0 * MACHINE_EPS / eps**2) * g_max
    return IdentityReport(
        "bochner", float(res.max()) if len(res) else 0.0, tol, len(pts), skipped, {"index": list(p.index), "eps": eps}
    )


# -- superlevel sets and the distance bound ---------------------------------------------


def _local_kernel(d: Domain, t: float, x0: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, str]:
    """Dirichlet kernel values near x0 and the route used."""
    if isinstance(d, Interval):
        return np.array([images_kernel_1d(d.L, t, x0[0], y) for y in ys[:, 0]]), "images"
    if isinstance(d, Rectangle):
        kx = np.array([images_kernel_1d(d.Lx, t, x0[0], y) for y in ys[:, 0]])
        ky = np.array([images_kernel_1d(d.Ly, t, x0[1], y) for y in ys[:, 1]])
        return kx * ky, "images"
    if t >= t_min(d):
        return kernel_row(d, t, x0, ys), "spectral"
    dist = float(d.distance_to_boundary(x0))
    if dist * dist / (4.0 * t) > 40.0:
        # the Dirichlet correction is below exp(-40) relative
        return free_kernel(t, x0[None, :], ys), "free"
    raise TruncationError("disk kernel unavailable: t below t_min and x0 near the boundary")


def _local_quadrature(d: Domain, x0: np.ndarray, t: float, panels: int = 40, per: int = 6):
    """Composite Gauss-Legendre on the box x0 +- 12 sqrt(t), clipped to the domain."""
    w = 12.0 * math.sqrt(t)

    def axis(c, lo, hi):
        a, b = max(c - w, lo), min(c + w, hi)
        edges = np.linspace(a, b, panels + 1)
        xs, ws = [], []
        for i in range(panels):
            x, wt = gauss_legendre(per, edges[i], edges[i + 1])
            xs.append(x)
            ws.append(wt)
        return np.concatenate(xs), np.concatenate(ws)

    if isinstance(d, Interval):
        x, wt = axis(x0[0], 0.0, d.L)
        return x.reshape(-1, 1), wt
    lo = (0.0, 0.0) if isinstance(d, Rectangle) else (-d.R, -d.R)
    hi = (d.Lx, d.Ly) if isinstance(d, Rectangle) else (d.R, d.R)
    x, wx = axis(x0[0], lo[0], hi[0])
    y, wy = axis(x0[1], lo[1], hi[1])
    X, Y = np.meshgrid(x, y, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    W = np.outer(wx, wy).ravel()
    inside = d.in_closed(pts)
    return pts[inside], W[inside]


def superlevel_mass(p: EigenPair, nu0, t: float, grid: np.ndarray | None = None) -> dict:
    """Kernel mass of ``A = {d^2 phi/dnu0^2 >= max/2}`` seen from the maximizing point x0."""
    d = p.domain
    nu0 = _unit(d, nu0)
    pts = sup_grid(d, 4001 if d.dim == 1 else 151) if grid is None else grid
    pts = pts[d.contains(_arg(d, pts))]
    vals = p.directional(_arg(d, pts), nu0, 2)
    i = int(np.argmax(vals))
    x0, top = pts[i], float(vals[i])
    ys, w = _local_quadrature(d, x0, t)
    kern, route = _local_kernel(d, t, x0, ys)
    in_a = p.directional(_arg(d, ys), nu0, 2) >= 0.5 * top
    a_mass = float(np.dot(w, kern * in_a))
    if isinstance(d, Interval):
        from .heat import images_survival_1d

        surv = images_survival_1d(d.L, t, x0[0])
    elif route == "spectral" or isinstance(d, Rectangle):
        surv = survival(d, t, x0 if d.dim > 1 else x0[0])
    else:
        surv = float(np.dot(w, kern))
    return {
        "x0": x0.tolist(),
        "max_second_derivative": top,
        "a_mass": min(a_mass, surv),
        "a_mass_raw": a_mass,
        "survival": surv,
        "kernel_route": route,
        "quad_nodes": len(w),
        "t": t,
    }


def distance_bound_check(pairs: list[EigenPair], eps: float, nu0=None) -> IdentityReport:
    """If ``A-mass >= 1 - 4 eps`` at ``t = eps/lambda``, then ``d(x0) >= (sqrt(t)/4) sqrt(log(1/eps))``."""
    worst, checked, vacuous = 0.0, 0, 0
    rows = []
    for p in pairs:
        d = p.domain
        nu = nu0 if nu0 is not None else np.eye(d.dim)[0]
        t = eps / p.eigenvalue
        sm = superlevel_mass(p, nu, t)
        x0 = np.array(sm["x0"])
        dist = float(d.distance_to_boundary(x0 if d.dim > 1 else x0[0]))
        bound = 0.25 * math.sqrt(t) * math.sqrt(math.log(1.0 / eps))
        hyp = sm["a_mass"] >= 1.0 - 4.0 * eps
        if hyp:
            checked += 1
            worst = max(worst, bound - dist)
        else:
            vacuous += 1
        rows.append({"index": list(p.index), "t": t, "a_mass": sm["a_mass"], "distance": dist, "bound": bound, "hypothesis": hyp})
    return IdentityReport("distance_bound", max(worst, 0.0), 0.0, checked, 0, {"vacuous": vacuous, "rows": rows})


def line_fraction_scan(center, radius: float, xs: np.ndarray, ys: np.ndarray, mask: np.ndarray, nu0, c4: float) -> dict:
    """Best line in direction ``nu0`` through a ball, by fraction of its chord inside A.

    ``mask[i, j]`` marks A at ``(xs[i], ys[j])`` on a regular grid. Lines run
    through the grid offsets perpendicular to ``nu0``; chords shorter than
    ``c4 * radius`` are dropped.
    """
    center = np.asarray(center, dtype=float)
    nu0 = np.asarray(nu0, dtype=float) / np.linalg.norm(nu0)
    perp = np.array([-nu0[1], nu0[0]])
    h = min(xs[1] - xs[0], ys[1] - ys[0])
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    in_ball = (X - center[0]) ** 2 + (Y - center[1]) ** 2 <= radius**2
    volume_fraction = float(np.sum(mask & in_ball) / max(np.sum(in_ball), 1))

    def lookup(p):
        i = np.clip(np.rint((p[:, 0] - xs[0]) / (xs[1] - xs[0])).astype(int), 0, len(xs) - 1)
        j = np.clip(np.rint((p[:, 1] - ys[0]) / (ys[1] - ys[0])).astype(int), 0, len(ys) - 1)
        return mask[i, j]

    best = {"offset": None, "chord": 0.0, "fraction": -1.0}
    n_off = int(radius / h)
    for o in h * np.arange(-n_off, n_off + 1):
        chord = 2.0 * math.sqrt(max(radius**2 - o * o, 0.0))
        if chord < c4 * radius:
            continue
        s = np.arange(-0.5 * chord, 0.5 * chord + 0.5 * h, h)
        s = s[np.abs(s) <= 0.5 * chord]
        line = center[None, :] + o * perp[None, :] + s[:, None] * nu0[None, :]
        frac = float(np.mean(lookup(line)))
        if frac > best["fraction"]:
            best = {"offset": float(o), "chord": chord, "fraction": frac}
    return {
        "best_offset": best["offset"],
        "intersection_length": best["chord"],
        "a_fraction": best["fraction"],
        "volume_fraction": volume_fraction,
        "hypothesis_met": volume_fraction >= 0.97,
        "fraction_ok": best["fraction"] >= 0.97,
    }


# -- tail bounds and growth exponents ---------------------------------------------------


def normal_tail(z) -> np.ndarray:
    """``P(N(0,1) > z)`` through the complementary error function."""
    return np.array([0.5 * math.erfc(v / math.sqrt(2.0)) for v in np.atleast_1d(z)])


def tail_lower_bound(z) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=float))
    return (1.0 / z - 1.0 / z**3) * np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def tail_constant(eps: float) -> float:
    """``(1/(2 pi z0)) exp(-z0^2/2)`` at ``z0 = sqrt(log(1/eps))``."""
    z0 = math.sqrt(math.log(1.0 / eps))
    return math.exp(-0.5 * z0 * z0) / (2.0 * math.pi * z0)


def tail_bound_check(z=None, eps_values=(0.0009, 1e-4)) -> IdentityReport:
    """Gaussian tail lower bound on a z-grid plus the ``> 2 eps`` constant comparison."""
    z = np.linspace(0.5, 6.0, 100) if z is None else np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise ValueError("z grid must be positive")
    margin = normal_tail(z) - tail_lower_bound(z)
    comps = {f"{e:g}": {"value": tail_constant(e), "two_eps": 2.0 * e, "holds": tail_constant(e) > 2.0 * e} for e in eps_values}
    violation = max(0.0, float(-margin.min()))
    if not all(c["holds"] for c in comps.values()):
        violation = max(violation, 1.0)
    return IdentityReport("tail_bound", violation, 0.0, len(z), 0, {"min_margin": float(margin.min()), "eps_checks": comps})


def growth_exponent_fit(d: Disk, n_max: int = 50, radial_points: int = 4001) -> dict:
    """Log-log slopes of the sup norm and its first two derivatives against lambda (m = 0 branch)."""
    if not isinstance(d, Disk):
        raise ValueError("growth fit runs on the disk")
    if n_max < 10:
        raise ValueError("n_max must be >= 10")
    pairs = disk_branch(d, 0, n_max)
    r = np.linspace(0.0, d.R, radial_points)
    line = np.column_stack([r, np.zeros_like(r)])
    sups, grads, hesses = [], [], []
    for p in pairs:
        sups.append(sup_norm(p))
        grads.append(_refined_line_sup(p, line, grad_norm))
        hesses.append(_refined_line_sup(p, line, hess_norm))
    lam = np.array([p.eigenvalue for p in pairs])
    return {
        "lambda": lam.tolist(),
        "sup": sups,
        "grad": grads,
        "hess": hesses,
        "supnorm_slope": _slope(lam, sups),
        "gradient_slope": _slope(lam, grads),
        "hessian_slope": _slope(lam, hesses),
    }


def _refined_line_sup(p: EigenPair, line: np.ndarray, fn: Callable) -> float:
    """Radial functions: sup along the positive x-axis with 1D refinement."""
    vals = fn(p, line)
    i = int(np.argmax(vals))
    h = line[1, 0] - line[0, 0]
    lo, hi = max(line[i, 0] - h, 0.0), min(line[i, 0] + h, p.domain.R)
    res = minimize_scalar(lambda x: -float(fn(p, np.array([[x, 0.0]]))[0]), bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
    return max(float(vals[i]), -float(res.fun))


# -- the probabilistic partition and comparison bounds ----------------------------------------


def partition_check(d: Domain, x0, t: float, n: int = 20000, cfg: stoch.PathConfig | None = None, seed=0) -> IdentityReport:
    """Spectral survival plus Monte Carlo exit mass equals one."""
    cfg = cfg or stoch.PathConfig.default(t)
    s = survival(d, t, x0)
    h = stoch.exit_histogram(d, x0, t, n, cfg, seed, bins=2)
    se = math.sqrt(max(h.total_exit_mass * (1.0 - h.total_exit_mass), 0.0) / n)
    res = abs(s + h.total_exit_mass - 1.0)
    spectral_only = abs(s + (1.0 - s) - 1.0)
    return IdentityReport(
        "partition",
        res,
        4.0 * se + 1e-10,
        n,
        0,
        {"survival": s, "exit_mass": h.total_exit_mass, "stderr": se, "spectral_only_residual": spectral_only, "seed": int(seed), "dt": cfg.dt},
    )


def comparison_bound_check(C: float, R: float, fields: list, n: int = 2) -> IdentityReport:
    """``sup_{B_R} f >= C R^2 / (4n)`` for fields with Laplacian >= C on the ball.

    ``fields`` holds ``(name, f)`` with f taking points of shape ``(m, n)``.
    """
    bound = C * R * R / (4.0 * n)
    if n == 1:
        pts = np.linspace(-R, R, 2001).reshape(-1, 1)
    else:
        pts = Disk(R).interior_grid(200, 400)
    worst, rows = 0.0, []
    for name, f in fields:
        sup = float(np.max(np.abs(f(pts))))
        worst = max(worst, bound - sup)
        rows.append({"field": name, "sup": sup, "bound": bound})
    return IdentityReport("comparison_bound", max(worst, 0.0), 0.0, len(fields), 0, {"rows": rows})


def monotonicity_check(d: Domain, t: float, n: int = 21) -> IdentityReport:
    """``p_t(x, y) <= free kernel + 1e-9`` on an interior grid."""
    if isinstance(d, Interval):
        g = d.interior_grid(n)[1:-1]
    elif isinstance(d, Rectangle):
        g = d.interior_grid(n)
        g = g[d.contains(g)]
    else:
        g = d.interior_grid(max(n // 2, 3), n)
        g = g[d.contains(g)]
    worst = -math.inf
    for x in g:
        row = kernel_row(d, t, x if d.dim > 1 else x[0], _arg(d, g))
        free = free_kernel(t, x[None, :], g)
        worst = max(worst, float(np.max(row - free)))
    return IdentityReport("domain_monotonicity", max(worst, 0.0), 1e-9, len(g) ** 2, 0, {"t": t, "max_excess": worst})


def semigroup_eigen_check(d: Domain, count: int = 10, ts=(0.01, 0.1, 1.0), tol: float = 1e-8) -> IdentityReport:
    """``|| e^{t Laplace} phi_k - e^{-lambda_k t} phi_k ||_inf`` with phi_k projected by quadrature."""
    pairs = enumerate_eigenpairs(d, count)
    grid = sup_grid(d, 201 if d.dim == 1 else 41)
    worst = 0.0
    for p in pairs:
        F = project(d, p.value, Truncation(mode="fixed", n=count), label=f"phi_{p.label()}")
        for t in ts:
            got = semigroup_eval(F, t, _arg(d, grid))
            want = math.exp(-p.eigenvalue * t) * p.value(_arg(d, grid))
            worst = max(worst, float(np.max(np.abs(got - want))))
    return IdentityReport("semigroup_eigen", worst, tol, count * len(ts) * len(grid), 0, {"ts": list(ts), "count": count})
