"""Model domains: the interval and two planar shapes (rectangle, disk).

Points are numpy arrays. A single point is a float (interval) or a vector of
length 2; batches are arrays of shape ``(n,)`` for the interval and ``(n, 2)``
for the planar domains. Every geometric query accepts either form and returns
a scalar for a single point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# points closer than this (relative to the diameter) to the boundary count as on it
BOUNDARY_TOL = 1e-12


class BoundaryPoint(NamedTuple):
    point: np.ndarray
    inward_normal: np.ndarray
    mean_curvature: float


@dataclass(frozen=True)
class Quadrature:
    """Nodes of shape ``(n, dim)`` with positive weights summing to the measure."""

    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))

    def __len__(self) -> int:
        return len(self.weights)


def gauss_legendre(order: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to ``[a, b]``."""
    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


class Domain:
    """Common interface; concrete shapes are the frozen dataclasses below."""

    kind: str
    dim: int

    # -- helpers -------------------------------------------------------------
    def _points(self, x) -> tuple[np.ndarray, bool]:
        arr = np.asarray(x, dtype=float)
        if self.dim == 1:
            if arr.ndim == 0:
                return arr.reshape(1, 1), True
            if arr.ndim == 1:
                return arr.reshape(-1, 1), False
            if arr.ndim == 2 and arr.shape[1] == 1:
                return arr, False
        else:
            if arr.ndim == 1 and arr.shape[0] == self.dim:
                return arr.reshape(1, self.dim), True
            if arr.ndim == 2 and arr.shape[1] == self.dim:
                return arr, False
        raise ValueError(f"point of shape {arr.shape} does not match a {self.dim}-d domain")

    @staticmethod
    def _out(values: np.ndarray, single: bool):
        return values[0].item() if single else values

    # -- geometry ------------------------------------------------------------
    def signed_distance(self, x):
        """Distance to the boundary, negative outside the domain."""
        pts, single = self._points(x)
        return self._out(self._signed(pts), single)

    def distance_to_boundary(self, x, with_flag: bool = False):
        """Euclidean distance to the boundary; 0 for exterior points.

        With ``with_flag`` a pair ``(distance, exterior)`` is returned.
        """
        pts, single = self._points(x)
        sd = self._signed(pts)
        dist = self._out(np.maximum(sd, 0.0), single)
        if with_flag:
            return dist, self._out(sd < 0, single)
        return dist

    def contains(self, x):
        """Strict interior membership."""
        pts, single = self._points(x)
        return self._out(self._signed(pts) > self._boundary_tol(), single)

    def in_closed(self, x):
        """Membership in the closed domain (interior or on the boundary)."""
        pts, single = self._points(x)
        return self._out(self._signed(pts) >= -self._boundary_tol(), single)

    def _boundary_tol(self) -> float:
        return BOUNDARY_TOL * self.diameter

    def stencil_fits(self, x, nu, eps: float, k: int) -> bool:
        """True when the central-difference nodes ``x + j*eps*nu`` fit in the domain.

        ``x`` itself may sit on the boundary; every other node must be strictly
        interior, since a node on the boundary is a killed start point.
        """
        if eps <= 0:
            raise ValueError("eps must be positive")
        if not 1 <= k <= 4:
            raise ValueError("derivative order must be in 1..4")
        pts, single = self._points(x)
        if not single:
            raise ValueError("stencil_fits takes a single point")
        nu = np.asarray(nu, dtype=float).reshape(self.dim)
        reach = math.ceil(k / 2)
        js = np.array([j for j in range(-reach, reach + 1) if j != 0])
        offsets = js[:, None] * eps * nu[None, :]
        return bool(self.in_closed(pts)[0] and np.all(self.contains(pts + offsets)))

    def boundary_sample(self, n: int) -> list[BoundaryPoint]:
        pts, normals, curv = self.boundary_arrays(n)
        return [BoundaryPoint(p.copy(), nrm.copy(), float(c)) for p, nrm, c in zip(pts, normals, curv)]

    def to_dict(self) -> dict:
        raise NotImplementedError

    # subclasses implement: _signed, boundary_arrays, quadrature, nearest_boundary,
    # boundary_parameter, bridge_kill_prob, measure, diameter


@dataclass(frozen=True)
class Interval(Domain):
    L: float
    kind = "interval"
    dim = 1

    def __post_init__(self):
        if not (self.L > 0 and math.isfinite(self.L)):
            raise ValueError("interval length must be positive")

    @property
    def measure(self) -> float:
        return self.L

    @property
    def diameter(self) -> float:
        return self.L

    def _signed(self, pts):
        x = pts[:, 0]
        return np.minimum(x, self.L - x)

    def boundary_arrays(self, n: int = 2):
        if n < 2:
            raise ValueError("need at least 2 boundary samples")
        pts = np.array([[0.0], [self.L]])
        normals = np.array([[1.0], [-1.0]])
        return pts, normals, np.zeros(2)

    def quadrature(self, order: int) -> Quadrature:
        if order < 2:
            raise ValueError("quadrature order must be >= 2")
        x, w = gauss_legendre(order, 0.0, self.L)
        return Quadrature(x.reshape(-1, 1), w)

    def nearest_boundary(self, pts):
        pts, _ = self._points(pts)
        x = pts[:, 0]
        return np.where(x < 0.5 * self.L, 0.0, self.L).reshape(-1, 1)

    def boundary_parameter(self, pts):
        """0 for the left endpoint, 1 for the right one."""
        pts, _ = self._points(pts)
        return np.where(pts[:, 0] < 0.5 * self.L, 0.0, 1.0)

    def bridge_kill_prob(self, a, b, dt: float):
        """Probability that a variance-2 bridge between interior points a, b leaves the interval."""
        a, _ = self._points(a)
        b, _ = self._points(b)
        return _two_wall_crossing(a[:, 0], b[:, 0], self.L, dt)

    def interior_grid(self, n: int) -> np.ndarray:
        return np.linspace(0.0, self.L, n).reshape(-1, 1)

    def to_dict(self) -> dict:
        return {"kind": "interval", "L": self.L}


@dataclass(frozen=True)
class Rectangle(Domain):
    Lx: float
    Ly: float
    kind = "rectangle"
    dim = 2

    def __post_init__(self):
        if not (self.Lx > 0 and self.Ly > 0 and math.isfinite(self.Lx) and math.isfinite(self.Ly)):
            raise ValueError("rectangle sides must be positive")

    @property
    def measure(self) -> float:
        return self.Lx * self.Ly

    @property
    def diameter(self) -> float:
        return math.hypot(self.Lx, self.Ly)

    @property
    def perimeter(self) -> float:
        return 2.0 * (self.Lx + self.Ly)

    def _signed(self, pts):
        x, y = pts[:, 0], pts[:, 1]
        inside = np.minimum(np.minimum(x, self.Lx - x), np.minimum(y, self.Ly - y))
        dx = np.maximum(np.maximum(-x, x - self.Lx), 0.0)
        dy = np.maximum(np.maximum(-y, y - self.Ly), 0.0)
        outside = np.hypot(dx, dy)
        return np.where(inside >= 0, inside, -outside)

    def _side_counts(self, n: int) -> list[int]:
        sides = [self.Lx, self.Ly, self.Lx, self.Ly]
        raw = [n * s / self.perimeter for s in sides]
        counts = [max(1, int(math.floor(r))) for r in raw]
        # hand out the remainder by largest fractional part
        order = sorted(range(4), key=lambda i: (raw[i] - math.floor(raw[i])), reverse=True)
        i = 0
        while sum(counts) < n:
            counts[order[i % 4]] += 1
            i += 1
        while sum(counts) > n:
            j = max(range(4), key=lambda i: counts[i])
            counts[j] -= 1
        return counts

    def boundary_arrays(self, n: int):
        """Cell-centred samples on each side; corners (undefined normal) are excluded."""
        if n < 4:
            raise ValueError("a rectangle needs at least 4 boundary samples (one per side)")
        c = self._side_counts(n)
        pts, normals = [], []
        # counterclockwise from the origin: bottom, right, top, left
        s = (np.arange(c[0]) + 0.5) / c[0]
        pts.append(np.column_stack([s * self.Lx, np.zeros(c[0])]))
        normals.append(np.tile([0.0, 1.0], (c[0], 1)))
        s = (np.arange(c[1]) + 0.5) / c[1]
        pts.append(np.column_stack([np.full(c[1], self.Lx), s * self.Ly]))
        normals.append(np.tile([-1.0, 0.0], (c[1], 1)))
        s = (np.arange(c[2]) + 0.5) / c[2]
        pts.append(np.column_stack([(1.0 - s) * self.Lx, np.full(c[2], self.Ly)]))
        normals.append(np.tile([0.0, -1.0], (c[2], 1)))
        s = (np.arange(c[3]) + 0.5) / c[3]
        pts.append(np.column_stack([np.zeros(c[3]), (1.0 - s) * self.Ly]))
        normals.append(np.tile([1.0, 0.0], (c[3], 1)))
        return np.vstack(pts), np.vstack(normals), np.zeros(n)

    def quadrature(self, order: int, order_y: int | None = None) -> Quadrature:
        if order < 2:
            raise ValueError("quadrature order must be >= 2")
        x, wx = gauss_legendre(order, 0.0, self.Lx)
        y, wy = gauss_legendre(order_y or order, 0.0, self.Ly)
        X, Y = np.meshgrid(x, y, indexing="ij")
        W = np.outer(wx, wy)
        return Quadrature(np.column_stack([X.ravel(), Y.ravel()]), W.ravel())

    def nearest_boundary(self, pts):
        pts, _ = self._points(pts)
        x = np.clip(pts[:, 0], 0.0, self.Lx)
        y = np.clip(pts[:, 1], 0.0, self.Ly)
        d = np.column_stack([x, self.Lx - x, y, self.Ly - y])
        side = np.argmin(d, axis=1)
        x = np.where(side == 0, 0.0, np.where(side == 1, self.Lx, x))
        y = np.where(side == 2, 0.0, np.where(side == 3, self.Ly, y))
        return np.column_stack([x, y])

    def boundary_parameter(self, pts):
        """Counterclockwise arclength from the origin, as a fraction of the perimeter."""
        b = self.nearest_boundary(pts)
        x, y = b[:, 0], b[:, 1]
        Lx, Ly = self.Lx, self.Ly
        tol = self._boundary_tol()
        s = np.where(
            y <= tol,
            x,
            np.where(
                x >= Lx - tol,
                Lx + y,
                np.where(y >= Ly - tol, Lx + Ly + (Lx - x), 2 * Lx + Ly + (Ly - y)),
            ),
        )
        return np.mod(s / self.perimeter, 1.0)

    def bridge_kill_prob(self, a, b, dt: float):
        # coordinates move independently, so the two slabs combine multiplicatively
        a, _ = self._points(a)
        b, _ = self._points(b)
        px = _two_wall_crossing(a[:, 0], b[:, 0], self.Lx, dt)
        py = _two_wall_crossing(a[:, 1], b[:, 1], self.Ly, dt)
        return 1.0 - (1.0 - px) * (1.0 - py)

    def interior_grid(self, n: int, n_y: int | None = None) -> np.ndarray:
        x = np.linspace(0.0, self.Lx, n)
        y = np.linspace(0.0, self.Ly, n_y or n)
        X, Y = np.meshgrid(x, y, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])

    def to_dict(self) -> dict:
        return {"kind": "rectangle", "Lx": self.Lx, "Ly": self.Ly}


@dataclass(frozen=True)
class Disk(Domain):
    R: float
    kind = "disk"
    dim = 2

    def __post_init__(self):
        if not (self.R > 0 and math.isfinite(self.R)):
            raise ValueError("disk radius must be positive")

    @property
    def measure(self) -> float:
        return math.pi * self.R**2

    @property
    def diameter(self) -> float:
        return 2.0 * self.R

    @property
    def perimeter(self) -> float:
        return 2.0 * math.pi * self.R

    def _signed(self, pts):
        return self.R - np.hypot(pts[:, 0], pts[:, 1])

    def boundary_arrays(self, n: int):
        if n < 2:
            raise ValueError("need at least 2 boundary samples")
        theta = 2.0 * np.pi * np.arange(n) / n
        c, s = np.cos(theta), np.sin(theta)
        pts = self.R * np.column_stack([c, s])
        return pts, -np.column_stack([c, s]), np.full(n, 1.0 / self.R)

    def quadrature(self, order: int, angular: int | None = None) -> Quadrature:
        """Gauss-Legendre in radius (Jacobian folded in) times a periodic rule in angle."""
        if order < 2:
            raise ValueError("quadrature order must be >= 2")
        n_theta = angular or 2 * order
        r, wr = gauss_legendre(order, 0.0, self.R)
        theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
        wt = np.full(n_theta, 2.0 * np.pi / n_theta)
        Rg, Tg = np.meshgrid(r, theta, indexing="ij")
        W = np.outer(wr * r, wt)
        nodes = np.column_stack([(Rg * np.cos(Tg)).ravel(), (Rg * np.sin(Tg)).ravel()])
        return Quadrature(nodes, W.ravel())

    def nearest_boundary(self, pts):
        pts, _ = self._points(pts)
        r = np.hypot(pts[:, 0], pts[:, 1])
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        theta = np.where(r > 0, theta, 0.0)
        return self.R * np.column_stack([np.cos(theta), np.sin(theta)])

    def boundary_parameter(self, pts):
        pts, _ = self._points(pts)
        return np.mod(np.arctan2(pts[:, 1], pts[:, 0]) / (2.0 * np.pi), 1.0)

    def bridge_kill_prob(self, a, b, dt: float):
        # boundary flattened to its tangent line: half-space formula
        a, _ = self._points(a)
        b, _ = self._points(b)
        d1 = np.maximum(self._signed(a), 0.0)
        d2 = np.maximum(self._signed(b), 0.0)
        return np.exp(-d1 * d2 / dt)

    def interior_grid(self, n_r: int, n_theta: int | None = None) -> np.ndarray:
        """Polar grid including the centre and the boundary circle."""
        n_theta = n_theta or 2 * n_r
        r = np.linspace(0.0, self.R, n_r)[1:]
        theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
        Rg, Tg = np.meshgrid(r, theta, indexing="ij")
        pts = np.column_stack([(Rg * np.cos(Tg)).ravel(), (Rg * np.sin(Tg)).ravel()])
        return np.vstack([[0.0, 0.0], pts])

    def to_dict(self) -> dict:
        return {"kind": "disk", "R": self.R}


def _two_wall_crossing(a, b, L, dt):
    """Crossing probability of a variance-2 bridge from a to b for the walls 0 and L."""
    da1, db1 = np.maximum(a, 0.0), np.maximum(b, 0.0)
    da2, db2 = np.maximum(L - a, 0.0), np.maximum(L - b, 0.0)
    p_left = np.exp(-da1 * db1 / dt)
    p_right = np.exp(-da2 * db2 / dt)
    return 1.0 - (1.0 - p_left) * (1.0 - p_right)


_KINDS = {
    "interval": (Interval, ("L",)),
    "rectangle": (Rectangle, ("Lx", "Ly")),
    "disk": (Disk, ("R",)),
}


def domain_from_dict(spec: dict) -> Domain:
    """Build a domain from ``{"kind": "interval", "L": 3.14...}`` and friends."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError("domain spec needs a 'kind'")
    kind = spec["kind"]
    if kind not in _KINDS:
        raise ValueError(f"unknown domain kind {kind!r}")
    cls, fields = _KINDS[kind]
    extra = set(spec) - set(fields) - {"kind"}
    if extra:
        raise ValueError(f"unknown keys for {kind}: {sorted(extra)}")
    missing = [f for f in fields if f not in spec]
    if missing:
        raise ValueError(f"missing keys for {kind}: {missing}")
    return cls(*(float(spec[f]) for f in fields))
