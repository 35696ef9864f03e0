"""Dirichlet heat kernel and the heat semigroup built on it.

Everything is built on the spectral sum ``p_t(x, y) = sum exp(-lam_k t) phi_k(x) phi_k(y)``
for ``u_t = Laplace u`` (variance 2t per coordinate). Two independent oracles live
here as well: the method of images on the interval and a Crank-Nicolson solver.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.linalg import solve_banded

from .domain import Disk, Domain, Interval, Quadrature, Rectangle
from .spectral import EigenPair, basis, directional_matrix, value_matrix

MAX_TERMS = 20000


class TruncationError(RuntimeError):
    """The spectral sum cannot meet its tail tolerance within the term cap."""


@dataclass(frozen=True)
class Truncation:
    """How many eigenpairs a spectral sum keeps.

    ``mode="adaptive"`` keeps every eigenvalue below a cutoff chosen so the
    estimated tail is under ``tau`` relative to the leading term;
    ``mode="fixed"`` keeps the first ``n`` eigenpairs.
    """

    mode: str = "adaptive"
    tau: float = 1e-12
    cap: int = MAX_TERMS
    n: int = 0

    def __post_init__(self):
        if self.mode not in ("adaptive", "fixed"):
            raise ValueError(f"unknown truncation mode {self.mode!r}")
        if not 1 <= self.cap <= MAX_TERMS:
            raise ValueError(f"cap must be in 1..{MAX_TERMS}")
        if self.mode == "fixed" and not 1 <= self.n <= self.cap:
            raise ValueError("fixed truncation needs 1 <= n <= cap")
        if self.mode == "adaptive" and not 0 < self.tau < 1:
            raise ValueError("tau must be in (0, 1)")

    def to_dict(self) -> dict:
        return {"mode": self.mode, "tau": self.tau, "cap": self.cap, "n": self.n}


DEFAULT_TRUNCATION = Truncation()


@dataclass(frozen=True)
class KernelValue:
    """A truncated spectral value: clamped to ``[0, inf)`` with the raw sum kept."""

    value: float
    raw: float
    terms: int

    def __float__(self) -> float:
        return self.value


# -- the free kernel -----------------------------------------------------------


def free_kernel(t: float, x, y) -> float:
    """``(4 pi t)^(-n/2) exp(-|x - y|^2 / 4t)`` with n the point dimension."""
    if not t > 0:
        raise ValueError("t must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape[-1] != y.shape[-1]:
        raise ValueError("x and y have different dimensions")
    n = x.shape[-1]
    r2 = np.sum((x - y) ** 2, axis=-1)
    val = (4.0 * math.pi * t) ** (-0.5 * n) * np.exp(-r2 / (4.0 * t))
    return float(val) if np.ndim(val) == 0 else val


# -- truncation ----------------------------------------------------------------


def _sup_sq(d: Domain, lam: float) -> float:
    """Bound for ``max |phi|^2`` over eigenpairs near ``lam``."""
    if isinstance(d, Interval):
        return 2.0 / d.L
    if isinstance(d, Rectangle):
        return 4.0 / d.measure
    # disk: C^2 ~ j / R^2 for m = 0 and ~ m^(4/3) / R^2 near the turning point
    kap = max(d.R * math.sqrt(lam), 1.0)
    return kap ** (4.0 / 3.0) / d.R**2


def _weyl_density(d: Domain, lam: float) -> float:
    """Asymptotic eigenvalue count per unit lambda."""
    if isinstance(d, Interval):
        return d.L / (2.0 * math.pi * math.sqrt(lam))
    return d.measure / (4.0 * math.pi)


def _count_below(d: Domain, lam: float) -> int:
    if isinstance(d, Interval):
        return int(d.L * math.sqrt(lam) / math.pi)
    return len(basis(d).below(lam))


def lambda_cutoff(d: Domain, t: float, tau: float) -> float:
    """Smallest cutoff whose tail estimate drops below ``tau`` (relative)."""
    first = basis(d).first(1)[0]
    lam1, b1 = first.eigenvalue, first.norm_const**2
    lam = lam1 + math.log(1.0 / tau) / t
    for _ in range(400):
        tail = math.exp(-(lam - lam1) * t) * _sup_sq(d, lam) / b1 * (1.0 + _weyl_density(d, lam) / t)
        if tail < tau:
            return lam
        lam *= 1.05
    raise TruncationError("tail estimate did not converge")


def _feasible(d: Domain, t: float, trunc: Truncation) -> bool:
    lam = lambda_cutoff(d, t, trunc.tau)
    if isinstance(d, Disk) and lam > basis(d).max_lambda:
        return False
    if isinstance(d, Interval):
        return _count_below(d, lam) <= trunc.cap
    # a Weyl estimate avoids enumerating far past the cap
    if d.measure * lam / (4.0 * math.pi) > 1.5 * trunc.cap:
        return False
    return _count_below(d, lam) <= trunc.cap


@lru_cache(maxsize=64)
def t_min(d: Domain, trunc: Truncation = DEFAULT_TRUNCATION) -> float:
    """Smallest t at which the adaptive sum meets ``tau`` within the cap."""
    if isinstance(d, Rectangle):
        return max(t_min(Interval(d.Lx), trunc), t_min(Interval(d.Ly), trunc))
    lo, hi = 1e-10, 10.0
    if _feasible(d, lo, trunc):
        return lo
    for _ in range(60):
        mid = math.sqrt(lo * hi)
        if _feasible(d, mid, trunc):
            hi = mid
        else:
            lo = mid
        if hi / lo < 1.0 + 1e-6:
            break
    return hi


@lru_cache(maxsize=256)
def kernel_terms(d: Domain, t: float, trunc: Truncation = DEFAULT_TRUNCATION) -> tuple[EigenPair, ...]:
    """The eigenpairs a spectral sum at time t keeps (interval and disk)."""
    if trunc.mode == "fixed":
        return tuple(basis(d).first(trunc.n))
    lam = lambda_cutoff(d, t, trunc.tau)
    if isinstance(d, Disk) and lam > basis(d).max_lambda:
        raise TruncationError(
            f"t={t:g} is below t_min={t_min(d, trunc):.4g} for {d}: the tail needs Bessel orders beyond the supported range"
        )
    if isinstance(d, Rectangle) and d.measure * lam / (4.0 * math.pi) > 1.5 * trunc.cap:
        raise TruncationError(f"t={t:g} needs more than {trunc.cap} terms")
    pairs = basis(d).below(lam)
    if len(pairs) > trunc.cap:
        raise TruncationError(f"t={t:g} needs {len(pairs)} terms, above the cap {trunc.cap}")
    return tuple(pairs)


def _check_time(d: Domain, t: float, trunc: Truncation) -> None:
    if not t > 0:
        raise ValueError("t must be positive")
    if trunc.mode == "adaptive" and t < t_min(d, trunc):
        warnings.warn(f"t={t:g} is below t_min={t_min(d, trunc):.4g}; the spectral tail cannot reach tau", stacklevel=3)


# -- kernels -------------------------------------------------------------------


def _kernel_rows(d: Domain, t: float, x, ys: np.ndarray, trunc: Truncation) -> tuple[np.ndarray, int]:
    """Raw p_t(x, y) for one x and many y, plus the number of terms."""
    if isinstance(d, Rectangle):
        kx, nx = _kernel_rows(Interval(d.Lx), t, x[0], ys[:, 0], trunc)
        ky, ny = _kernel_rows(Interval(d.Ly), t, x[1], ys[:, 1], trunc)
        return kx * ky, nx * ny
    pairs = kernel_terms(d, t, trunc)
    lam = np.array([p.eigenvalue for p in pairs])
    e = np.exp(-lam * t)
    px = value_matrix(list(pairs), np.asarray(x, dtype=float).reshape(1, -1) if d.dim > 1 else np.atleast_1d(x))[0]
    py = value_matrix(list(pairs), ys)
    # e * (phi(x) phi(y)) in a fixed order keeps p(x, y) == p(y, x) bit for bit
    return np.sum(e[None, :] * (px[None, :] * py), axis=1), len(pairs)


def heat_kernel(d: Domain, t: float, x, y, trunc: Truncation = DEFAULT_TRUNCATION) -> KernelValue:
    """Dirichlet heat kernel ``p_t(x, y)`` by truncated spectral sum.

    The rectangle kernel is the product of the two interval kernels, each
    truncated on its own.
    """
    _check_time(d, t, trunc)
    xs, _ = d._points(x)
    ys, _ = d._points(y)
    if not (d.in_closed(xs).all() and d.in_closed(ys).all()):
        raise ValueError("kernel arguments must lie in the closed domain")
    raw, terms = _kernel_rows(d, t, xs[0] if d.dim > 1 else xs[0, 0], ys if d.dim > 1 else ys[:, 0], trunc)
    raw = float(raw[0])
    return KernelValue(max(raw, 0.0), raw, terms)


def kernel_row(d: Domain, t: float, x, ys, trunc: Truncation = DEFAULT_TRUNCATION) -> np.ndarray:
    """Raw ``p_t(x, y_i)`` for one x and an array of points y_i."""
    _check_time(d, t, trunc)
    xs, _ = d._points(x)
    ys, _ = d._points(ys)
    if d.dim == 1:
        return _kernel_rows(d, t, xs[0, 0], ys[:, 0], trunc)[0]
    return _kernel_rows(d, t, xs[0], ys, trunc)[0]


def images_kernel_1d(L: float, t: float, x: float, y: float) -> float:
    """Interval kernel as the image sum ``sum_j G(x - y + 2jL) - G(x + y - 2jL)``.

    Each summand vanishes identically at ``x = 0``, so the result is exactly 0 there.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    c = 1.0 / math.sqrt(4.0 * math.pi * t)
    g = lambda z: c * math.exp(-z * z / (4.0 * t))  # noqa: E731
    terms = [g(x - y) - g(x + y)]
    j = 1
    while True:
        a = g(x - y + 2 * j * L) - g(x + y - 2 * j * L)
        b = g(x - y - 2 * j * L) - g(x + y + 2 * j * L)
        terms += [a, b]
        if max(abs(g(x - y + 2 * j * L)), abs(g(x - y - 2 * j * L)), abs(g(x + y - 2 * j * L)), abs(g(x + y + 2 * j * L))) < 1e-16 * c or j > 10000:
            break
        j += 1
    return math.fsum(terms)


def images_survival_1d(L: float, t: float, x: float) -> float:
    """``int_0^L p_t(x, y) dy`` from the image sum, in closed form via erf."""
    s = 2.0 * math.sqrt(t)
    total = []
    j = 0
    while True:
        for jj in ((j,) if j == 0 else (j, -j)):
            # direct image minus reflected image, each integrated over (0, L)
            a = 0.5 * (math.erf((x + 2 * jj * L) / s) - math.erf((x - L + 2 * jj * L) / s))
            b = 0.5 * (math.erf((x + L - 2 * jj * L) / s) - math.erf((x - 2 * jj * L) / s))
            total += [a, -b]
        if 2 * (j - 1) * L > 40.0 * s + 2 * L:
            break
        j += 1
    return math.fsum(total)


# -- survival ------------------------------------------------------------------


def _interval_integrals(L: float, ks: np.ndarray) -> np.ndarray:
    """``int_0^L sqrt(2/L) sin(k pi y / L) dy``."""
    return math.sqrt(2.0 / L) * L * (1.0 - (-1.0) ** ks) / (ks * math.pi)


def eigen_integrals(pairs) -> np.ndarray:
    """Closed-form ``int phi_k`` for each eigenpair."""
    out = np.zeros(len(pairs))
    for i, p in enumerate(pairs):
        d = p.domain
        if isinstance(d, Interval):
            out[i] = _interval_integrals(d.L, np.array([p.index[0]]))[0]
        elif isinstance(d, Rectangle):
            k, l = p.index
            ix = _interval_integrals(d.Lx, np.array([k]))[0] / math.sqrt(2.0 / d.Lx)
            iy = _interval_integrals(d.Ly, np.array([l]))[0] / math.sqrt(2.0 / d.Ly)
            out[i] = p.norm_const * ix * iy
        elif p.index[0] == 0:
            # int_0^R J_0(kappa r) r dr = R J_1(kappa R) / kappa
            from .bessel import bessel_block

            kap = p.sqrt_lambda
            out[i] = 2.0 * math.pi * p.norm_const * d.R * bessel_block(1, 1, kap * d.R)[0] / kap
    return out


def survival_value(d: Domain, t: float, x, trunc: Truncation = DEFAULT_TRUNCATION) -> KernelValue:
    """``int p_t(x, z) dz`` with raw and clamped values and the term count."""
    _check_time(d, t, trunc)
    pts, _ = d._points(x)
    if not d.in_closed(pts).all():
        raise ValueError("survival needs a point in the closed domain")
    if isinstance(d, Rectangle):
        sx = survival_value(Interval(d.Lx), t, pts[0, 0], trunc)
        sy = survival_value(Interval(d.Ly), t, pts[0, 1], trunc)
        raw = sx.raw * sy.raw
        return KernelValue(min(max(raw, 0.0), 1.0), raw, sx.terms * sy.terms)
    pairs = list(kernel_terms(d, t, trunc))
    if isinstance(d, Disk):
        # int phi = 0 by angular symmetry unless m = 0
        pairs = [p for p in pairs if p.index[0] == 0]
    lam = np.array([p.eigenvalue for p in pairs])
    vals = value_matrix(pairs, pts if d.dim > 1 else pts[:, 0])[0]
    raw = float(np.sum(np.exp(-lam * t) * (vals * eigen_integrals(pairs))))
    return KernelValue(min(max(raw, 0.0), 1.0), raw, len(pairs))


def survival(d: Domain, t: float, x, trunc: Truncation = DEFAULT_TRUNCATION) -> float:
    """Probability that Brownian motion from x has not hit the boundary by time t."""
    return survival_value(d, t, x, trunc).value


# -- spectral fields and the semigroup -----------------------------------------


@dataclass(frozen=True)
class SpectralField:
    """Coefficients ``c_k = <f, phi_k>`` in the order of ``pairs``."""

    domain: Domain
    pairs: tuple[EigenPair, ...]
    coeffs: np.ndarray
    reconstruction_error: float = 0.0
    label: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.pairs) != len(self.coeffs):
            raise ValueError("coefficient count does not match the eigenpairs")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("non-finite coefficients")

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([p.eigenvalue for p in self.pairs])

    def at_time(self, t: float) -> np.ndarray:
        """Coefficients of ``e^{t Laplace} f``."""
        return np.exp(-self.eigenvalues * t) * self.coeffs


def eigen_field(p: EigenPair, count: int | None = None) -> SpectralField:
    """The exact field of a single eigenfunction, embedded in the first ``count`` pairs."""
    pairs = list(basis(p.domain).first(count)) if count else [p]
    if p not in pairs:
        pairs.append(p)
    coeffs = np.array([1.0 if q == p else 0.0 for q in pairs])
    return SpectralField(p.domain, tuple(pairs), coeffs, 0.0, f"phi_{p.label()}")


def _test_grid(d: Domain) -> np.ndarray:
    if isinstance(d, Interval):
        return d.interior_grid(201)
    if isinstance(d, Rectangle):
        return d.interior_grid(41)
    return d.interior_grid(21, 40)


def _call(d: Domain, f: Callable, pts: np.ndarray) -> np.ndarray:
    arg = pts[:, 0] if d.dim == 1 else pts
    return np.broadcast_to(np.asarray(f(arg), dtype=float), (len(pts),)).copy()


def project(
    d: Domain,
    f: Callable,
    trunc: Truncation = Truncation(mode="fixed", n=64),
    q: Quadrature | None = None,
    label: str = "",
) -> SpectralField:
    """Project f onto the first eigenpairs by quadrature.

    ``f`` takes an array of points (shape ``(n,)`` on the interval, ``(n, 2)``
    otherwise). The sup-norm reconstruction error on a test grid is stored with
    the field.
    """
    n = trunc.n if trunc.mode == "fixed" else min(trunc.cap, 256)
    pairs = basis(d).first(n)
    if q is None:
        q = d.quadrature(max(64, 2 * int(math.sqrt(pairs[-1].eigenvalue) * d.diameter) + 16))
    fq = _call(d, f, q.nodes)
    M = value_matrix(pairs, q.nodes if d.dim > 1 else q.nodes[:, 0])
    coeffs = M.T @ (q.weights * fq)
    grid = _test_grid(d)
    G = value_matrix(pairs, grid if d.dim > 1 else grid[:, 0])
    err = float(np.max(np.abs(G @ coeffs - _call(d, f, grid))))
    return SpectralField(d, tuple(pairs), coeffs, err, label)


def semigroup_eval(F: SpectralField, t: float, x):
    """``e^{t Laplace} f`` at x (scalar or batch)."""
    return semigroup_deriv(F, t, x, None, 0)


def semigroup_deriv(F: SpectralField, t: float, x, nu, k: int):
    """k-th derivative of ``e^{t Laplace} f`` along ``nu`` (term-wise analytic, any k)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    d = F.domain
    pts, single = d._points(x)
    if not d.in_closed(pts).all():
        raise ValueError("point outside the closed domain")
    M = directional_matrix(list(F.pairs), pts if d.dim > 1 else pts[:, 0], nu, k)
    val = M @ F.at_time(t)
    return float(val[0]) if single else val


def crank_nicolson_1d(L: float, f_grid, t: float, steps: int) -> np.ndarray:
    """Theta = 1/2 finite differences for ``u_t = u_xx`` on a uniform mesh of [0, L].

    ``f_grid`` includes both endpoints, which are held at zero.
    """
    u = np.asarray(f_grid, dtype=float).copy()
    m = len(u)
    if m < 3:
        raise ValueError("mesh needs at least 3 points")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    h = L / (m - 1)
    dt = t / steps
    r = dt / (h * h)
    u[0] = u[-1] = 0.0
    n = m - 2
    ab = np.zeros((3, n))
    ab[0, 1:] = -0.5 * r
    ab[1, :] = 1.0 + r
    ab[2, :-1] = -0.5 * r
    inner = u[1:-1]
    for _ in range(steps):
        rhs = (1.0 - r) * inner
        rhs[1:] += 0.5 * r * inner[:-1]
        rhs[:-1] += 0.5 * r * inner[1:]
        inner = solve_banded((1, 1), ab, rhs)
    u[1:-1] = inner
    return u


def kernel_table_csv(rows) -> str:
    """CSV of kernel or survival evaluations.

    ``rows`` holds ``(t, x, y, KernelValue)``; ``y`` is None for survival rows.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "x", "y", "value", "truncation_terms", "raw_value"])
    fmt = lambda v: " ".join(f"{c:.17g}" for c in np.atleast_1d(v)) if v is not None else ""  # noqa: E731
    for t, x, y, kv in rows:
        w.writerow([f"{t:.17g}", fmt(x), fmt(y), f"{kv.value:.17g}", kv.terms, f"{kv.raw:.17g}"])
    return buf.getvalue()
