"""Exact Dirichlet eigenpairs of the model domains.

Interval and rectangle eigenfunctions are products of sines. On the disk,
``phi = C * J_m(kappa r) * {cos, sin}(m theta)`` is the real or imaginary part
of ``C * u_m`` with ``u_q = J_q(kappa r) e^{i q theta}``; the ladder identities

    (d/dx + i d/dy) u_q = -kappa u_{q+1},    (d/dx - i d/dy) u_q = kappa u_{q-1}

give every Cartesian derivative as a short combination of ``u_{m+j}``, which is
regular at the centre (``J_q(0) = 0`` for ``q != 0``).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .bessel import MAX_ORDER, bessel_block, bessel_zeros, bessel_zeros_below
from .domain import Disk, Domain, Interval, Rectangle

# every disk mode with kappa * R below this has order m <= 60 (j_{61,1} ~ 68.56)
DISK_KAPPA_CAP = 68.0


@dataclass(frozen=True)
class EigenPair:
    """One Dirichlet eigenpair ``-Laplace phi = lam * phi`` with ``||phi||_2 = 1``.

    ``index`` is ``(k,)`` on the interval, ``(k, l)`` on the rectangle and
    ``(m, n, parity)`` on the disk with parity ``"cos"`` or ``"sin"``.
    """

    domain: Domain
    index: tuple
    eigenvalue: float
    norm_const: float

    @property
    def sqrt_lambda(self) -> float:
        return math.sqrt(self.eigenvalue)

    @property
    def sup_bound(self) -> float:
        """Upper bound for ``max |phi|``."""
        return self.norm_const

    def _check(self, x):
        pts, single = self.domain._points(x)
        if not np.all(self.domain.in_closed(pts)):
            raise ValueError("eigenfunction evaluated outside the closed domain")
        return pts, single

    def value(self, x):
        pts, single = self._check(x)
        return _squeeze(_values(self, pts), single)

    def grad(self, x):
        pts, single = self._check(x)
        return _squeeze(_grads(self, pts), single)

    def hess(self, x):
        pts, single = self._check(x)
        return _squeeze(_hessians(self, pts), single)

    def directional(self, x, nu, k: int):
        """k-th derivative along the unit vector ``nu`` (any k >= 0)."""
        pts, single = self._check(x)
        return _squeeze(_directional(self, pts, _unit(self.domain, nu), k), single)

    def label(self) -> str:
        return "-".join(str(i) for i in self.index)


def _squeeze(arr, single):
    return arr[0] if single else arr


def _unit(d: Domain, nu) -> np.ndarray:
    nu = np.asarray(nu, dtype=float).reshape(d.dim)
    norm = float(np.linalg.norm(nu))
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"direction must be a unit vector (|nu| = {norm})")
    return nu


# -- per-domain evaluation kernels ---------------------------------------------


def _sine_derivative(a: float, x: np.ndarray, j: int) -> np.ndarray:
    """j-th derivative of sin(a x)."""
    return a**j * np.sin(a * x + 0.5 * j * np.pi)


def _disk_u(p: EigenPair, pts: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """``u_q`` for q = m+lo .. m+hi at the points, shape (hi-lo+1, npts)."""
    m = p.index[0]
    r = np.hypot(pts[:, 0], pts[:, 1])
    theta = np.where(r > 0, np.arctan2(pts[:, 1], pts[:, 0]), 0.0)
    r_u, inv = np.unique(r, return_inverse=True)
    J = bessel_block(m + lo, m + hi, p.sqrt_lambda * r_u)[:, inv]
    q = np.arange(m + lo, m + hi + 1)[:, None]
    return J * np.exp(1j * q * theta[None, :])


def _disk_part(p: EigenPair, z: np.ndarray) -> np.ndarray:
    return p.norm_const * (z.real if p.index[2] == "cos" else z.imag)


def _values(p: EigenPair, pts: np.ndarray) -> np.ndarray:
    d = p.domain
    if isinstance(d, Interval):
        a = p.index[0] * np.pi / d.L
        return p.norm_const * np.sin(a * pts[:, 0])
    if isinstance(d, Rectangle):
        a = p.index[0] * np.pi / d.Lx
        b = p.index[1] * np.pi / d.Ly
        return p.norm_const * np.sin(a * pts[:, 0]) * np.sin(b * pts[:, 1])
    return _disk_part(p, _disk_u(p, pts, 0, 0)[0])


def _grads(p: EigenPair, pts: np.ndarray) -> np.ndarray:
    d = p.domain
    C = p.norm_const
    if isinstance(d, Interval):
        a = p.index[0] * np.pi / d.L
        return (C * a * np.cos(a * pts[:, 0]))[:, None]
    if isinstance(d, Rectangle):
        a = p.index[0] * np.pi / d.Lx
        b = p.index[1] * np.pi / d.Ly
        sx, cx = np.sin(a * pts[:, 0]), np.cos(a * pts[:, 0])
        sy, cy = np.sin(b * pts[:, 1]), np.cos(b * pts[:, 1])
        return C * np.column_stack([a * cx * sy, b * sx * cy])
    kap = p.sqrt_lambda
    u = _disk_u(p, pts, -1, 1)
    gx = 0.5 * kap * (u[0] - u[2])
    gy = 0.5j * kap * (u[0] + u[2])
    return np.column_stack([_disk_part(p, gx), _disk_part(p, gy)])


def _hessians(p: EigenPair, pts: np.ndarray) -> np.ndarray:
    d = p.domain
    C = p.norm_const
    n = len(pts)
    if isinstance(d, Interval):
        a = p.index[0] * np.pi / d.L
        return (-C * a * a * np.sin(a * pts[:, 0])).reshape(n, 1, 1)
    H = np.empty((n, 2, 2))
    if isinstance(d, Rectangle):
        a = p.index[0] * np.pi / d.Lx
        b = p.index[1] * np.pi / d.Ly
        sx, cx = np.sin(a * pts[:, 0]), np.cos(a * pts[:, 0])
        sy, cy = np.sin(b * pts[:, 1]), np.cos(b * pts[:, 1])
        H[:, 0, 0] = -C * a * a * sx * sy
        H[:, 1, 1] = -C * b * b * sx * sy
        H[:, 0, 1] = H[:, 1, 0] = C * a * b * cx * cy
        return H
    k2 = 0.25 * p.eigenvalue
    u = _disk_u(p, pts, -2, 2)
    H[:, 0, 0] = _disk_part(p, k2 * (u[0] - 2 * u[2] + u[4]))
    H[:, 1, 1] = _disk_part(p, -k2 * (u[0] + 2 * u[2] + u[4]))
    H[:, 0, 1] = H[:, 1, 0] = _disk_part(p, 1j * k2 * (u[0] - u[4]))
    return H


def _directional(p: EigenPair, pts: np.ndarray, nu: np.ndarray, k: int) -> np.ndarray:
    if k < 0:
        raise ValueError("derivative order must be >= 0")
    d = p.domain
    C = p.norm_const
    if isinstance(d, Interval):
        a = p.index[0] * np.pi / d.L
        return C * nu[0] ** k * _sine_derivative(a, pts[:, 0], k)
    if isinstance(d, Rectangle):
        a = p.index[0] * np.pi / d.Lx
        b = p.index[1] * np.pi / d.Ly
        out = np.zeros(len(pts))
        for j in range(k + 1):
            w = comb(k, j) * nu[0] ** j * nu[1] ** (k - j)
            if w == 0.0:
                continue
            out += w * _sine_derivative(a, pts[:, 0], j) * _sine_derivative(b, pts[:, 1], k - j)
        return C * out
    alpha = math.atan2(nu[1], nu[0])
    u = _disk_u(p, pts, -k, k)
    z = np.zeros(len(pts), dtype=complex)
    for j in range(k + 1):
        # term u_{m + 2j - k} sits at row 2j of the block
        z += comb(k, j) * (-1) ** j * np.exp(1j * alpha * (k - 2 * j)) * u[2 * j]
    return _disk_part(p, (0.5 * p.sqrt_lambda) ** k * z)


# -- module-level operations ---------------------------------------------------


def eigen_eval(p: EigenPair, x):
    return p.value(x)


def eigen_grad(p: EigenPair, x):
    return p.grad(x)


def eigen_hess(p: EigenPair, x):
    return p.hess(x)


def _sort_key(lam: float, key: tuple) -> tuple:
    # eigenvalues equal to 12 significant digits count as ties
    return (float(f"{lam:.12e}"), key)


def _interval_pairs(d: Interval, count: int) -> list[EigenPair]:
    C = math.sqrt(2.0 / d.L)
    return [EigenPair(d, (k,), (k * math.pi / d.L) ** 2, C) for k in range(1, count + 1)]


def _rectangle_pairs_below(d: Rectangle, lam_max: float) -> list[EigenPair]:
    C = 2.0 / math.sqrt(d.Lx * d.Ly)
    kmax = int(d.Lx * math.sqrt(lam_max) / math.pi) + 1
    out = []
    for k in range(1, kmax + 1):
        ax = (k * math.pi / d.Lx) ** 2
        lmax = int(d.Ly * math.sqrt(max(lam_max - ax, 0.0)) / math.pi) + 1
        for l in range(1, lmax + 1):
            lam = ax + (l * math.pi / d.Ly) ** 2
            if lam <= lam_max:
                out.append((_sort_key(lam, (k, l)), EigenPair(d, (k, l), lam, C)))
    out.sort(key=lambda t: t[0])
    return [p for _, p in out]


def _disk_pairs_below(d: Disk, lam_max: float) -> list[EigenPair]:
    kap_max = d.R * math.sqrt(lam_max)
    if kap_max > DISK_KAPPA_CAP:
        raise ValueError(
            f"disk eigenvalues above {(DISK_KAPPA_CAP / d.R) ** 2:.6g} need Bessel orders beyond {MAX_ORDER}"
        )
    out = []
    m = 0
    while m <= MAX_ORDER and m < kap_max:
        zeros = bessel_zeros_below(m, kap_max)
        if not zeros:
            m += 1
            continue
        eps = 1.0 if m == 0 else 2.0
        # J_{m+1}(j_{m,n}) sets the closed-form L2 normalization
        jp = bessel_block(m + 1, m + 1, np.array(zeros))[0]
        for n, (j, jm1) in enumerate(zip(zeros, jp), start=1):
            lam = (j / d.R) ** 2
            C = math.sqrt(eps / math.pi) / (d.R * abs(jm1))
            parities = ("cos",) if m == 0 else ("cos", "sin")
            for par in parities:
                key = (m, n, 0 if par == "cos" else 1)
                out.append((_sort_key(lam, key), EigenPair(d, (m, n, par), lam, C)))
        m += 1
    out.sort(key=lambda t: t[0])
    return [p for _, p in out]


def disk_branch(d: Disk, m: int, count: int, parity: str = "cos") -> list[EigenPair]:
    """The first ``count`` eigenpairs with angular order ``m`` (a radial branch for m = 0)."""
    zeros = bessel_zeros(m, count)
    jp = bessel_block(m + 1, m + 1, np.array(zeros))[0]
    eps = 1.0 if m == 0 else 2.0
    return [
        EigenPair(d, (m, n, parity), (j / d.R) ** 2, math.sqrt(eps / math.pi) / (d.R * abs(jm1)))
        for n, (j, jm1) in enumerate(zip(zeros, jp), start=1)
    ]


class SpectralBasis:
    """Growable, ascending list of eigenpairs for one domain."""

    def __init__(self, d: Domain):
        self.domain = d
        self._pairs: list[EigenPair] = []
        self._complete_below = 0.0  # every eigenvalue <= this is in _pairs

    @property
    def max_lambda(self) -> float:
        """Largest eigenvalue this basis can reach."""
        if isinstance(self.domain, Disk):
            return (DISK_KAPPA_CAP / self.domain.R) ** 2
        return math.inf

    def _fill_below(self, lam_max: float) -> None:
        if lam_max <= self._complete_below:
            return
        d = self.domain
        if isinstance(d, Interval):
            count = int(d.L * math.sqrt(lam_max) / math.pi)
            self._pairs = _interval_pairs(d, max(count, len(self._pairs)))
        elif isinstance(d, Rectangle):
            self._pairs = _rectangle_pairs_below(d, lam_max)
        else:
            self._pairs = _disk_pairs_below(d, lam_max)
        self._complete_below = lam_max

    def below(self, lam_max: float) -> list[EigenPair]:
        """Every eigenpair with eigenvalue <= lam_max."""
        self._fill_below(lam_max)
        return [p for p in self._pairs if p.eigenvalue <= lam_max]

    def first(self, count: int) -> list[EigenPair]:
        d = self.domain
        if count < 1:
            raise ValueError("count must be >= 1")
        if isinstance(d, Interval):
            if len(self._pairs) < count:
                self._pairs = _interval_pairs(d, count)
                self._complete_below = self._pairs[-1].eigenvalue
            return self._pairs[:count]
        # Weyl's law sizes the first search; widen until enough modes are in
        lam = 4.0 * math.pi * count / d.measure * 1.5 + 50.0 / d.measure
        while True:
            if isinstance(d, Disk):
                lam = min(lam, self.max_lambda)
            self._fill_below(lam)
            if len(self._pairs) >= count:
                return self._pairs[:count]
            if lam >= self.max_lambda:
                raise ValueError(f"only {len(self._pairs)} disk eigenpairs are reachable")
            lam *= 2.0


@lru_cache(maxsize=32)
def basis(d: Domain) -> SpectralBasis:
    return SpectralBasis(d)


def enumerate_eigenpairs(d: Domain, count: int) -> list[EigenPair]:
    """The ``count`` smallest eigenpairs, ascending, ties broken by index."""
    return list(basis(d).first(count))


# -- matrices over point sets --------------------------------------------------


def _group(pairs):
    """Group consecutive disk pairs that share (m, n) so u_m is computed once."""
    groups: dict[tuple, list[int]] = {}
    for i, p in enumerate(pairs):
        groups.setdefault(p.index[:2], []).append(i)
    return groups


def value_matrix(pairs: list[EigenPair], pts: np.ndarray) -> np.ndarray:
    """``M[i, j] = phi_j(pts[i])``."""
    return directional_matrix(pairs, pts, None, 0)


def directional_matrix(pairs: list[EigenPair], pts: np.ndarray, nu, k: int) -> np.ndarray:
    """``M[i, j]`` = k-th derivative of ``phi_j`` along ``nu`` at ``pts[i]``."""
    if not pairs:
        return np.zeros((len(pts), 0))
    d = pairs[0].domain
    pts, _ = d._points(pts)
    nu_v = np.ones(d.dim) / math.sqrt(d.dim) if nu is None else _unit(d, nu)
    out = np.empty((len(pts), len(pairs)))
    if isinstance(d, Disk):
        for key, idx in _group(pairs).items():
            p0 = pairs[idx[0]]
            z = _disk_complex_directional(p0, pts, nu_v, k)
            for i in idx:
                out[:, i] = _disk_part(pairs[i], z)
        return out
    if isinstance(d, Interval):
        a = np.array([p.index[0] for p in pairs]) * np.pi / d.L
        C = pairs[0].norm_const
        arg = np.outer(pts[:, 0], a) + 0.5 * k * np.pi
        return C * nu_v[0] ** k * a[None, :] ** k * np.sin(arg)
    for j, p in enumerate(pairs):
        out[:, j] = _directional(p, pts, nu_v, k)
    return out


def _disk_complex_directional(p: EigenPair, pts, nu, k):
    alpha = math.atan2(nu[1], nu[0])
    u = _disk_u(p, pts, -k, k)
    z = np.zeros(len(pts), dtype=complex)
    for j in range(k + 1):
        z += comb(k, j) * (-1) ** j * np.exp(1j * alpha * (k - 2 * j)) * u[2 * j]
    return (0.5 * p.sqrt_lambda) ** k * z


def eigen_table_csv(pairs: list[EigenPair]) -> str:
    """CSV with columns kind, index, lambda, norm_const."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kind", "index", "lambda", "norm_const"])
    for p in pairs:
        w.writerow([p.domain.kind, p.label(), f"{p.eigenvalue:.17g}", f"{p.norm_const:.17g}"])
    return buf.getvalue()
