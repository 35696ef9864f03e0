"""Central-difference directional derivatives of orders 1 to 4 and a line FTC check."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .domain import Domain, gauss_legendre

MACHINE_EPS = float(np.finfo(float).eps)

# weights on the nodes x + j*eps*nu, j = -2..2
_WEIGHTS = {
    1: (0.0, -0.5, 0.0, 0.5, 0.0),
    2: (0.0, 1.0, -2.0, 1.0, 0.0),
    3: (-0.5, 1.0, 0.0, -1.0, 0.5),
    4: (1.0, -4.0, 6.0, -4.0, 1.0),
}
_DEFAULT_STEP = {1: 1e-6, 2: 1e-4, 3: 1e-3, 4: 3e-3}


class StencilError(ValueError):
    """The stencil leaves the domain or its step is below the roundoff floor."""


def breakeven_step(k: int, scale: float = 1.0) -> float:
    """Step where O(eps^2) truncation meets O(u / eps^k) roundoff."""
    return MACHINE_EPS ** (1.0 / (k + 2)) * scale


def default_step(k: int, scale: float = 1.0) -> float:
    return _DEFAULT_STEP[k] * scale


@dataclass(frozen=True)
class Stencil:
    order: int
    eps: float

    def __post_init__(self):
        if self.order not in _WEIGHTS:
            raise ValueError("stencil order must be 1, 2, 3 or 4")
        if not self.eps > 0:
            raise ValueError("stencil step must be positive")

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(-2, 3)

    @property
    def weights(self) -> np.ndarray:
        """Weights already divided by ``eps**order``."""
        return np.array(_WEIGHTS[self.order]) / self.eps**self.order

    def check_roundoff(self, scale: float = 1.0) -> None:
        floor = breakeven_step(self.order, scale) / 10.0
        if self.eps < floor:
            raise StencilError(f"step {self.eps:g} is below the roundoff floor {floor:.3g} for order {self.order}")


def _apply(F: Callable, x: np.ndarray, nu: np.ndarray, s: Stencil) -> float:
    w = np.array(_WEIGHTS[s.order])
    used = np.nonzero(w)[0]
    nodes = x[None, :] + (s.offsets[used] * s.eps)[:, None] * nu[None, :]
    arg = nodes[:, 0] if len(x) == 1 else nodes
    vals = np.asarray(F(arg), dtype=float).reshape(len(used))
    return math.fsum(w[used] * vals) / s.eps**s.order


def central_diff(
    F: Callable,
    x,
    nu,
    s: Stencil,
    domain: Domain | None = None,
    richardson: bool = False,
) -> float:
    """k-th directional derivative of F at x by central differences.

    F takes an array of points (shape ``(n,)`` in 1D, ``(n, 2)`` in 2D). With a
    domain the stencil must fit; with ``richardson`` the steps eps and eps/2
    are combined to cancel the O(eps^2) term.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    if abs(np.linalg.norm(nu) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    scale = domain.diameter if domain is not None else 1.0
    s.check_roundoff(scale)
    if domain is not None and not domain.stencil_fits(x if len(x) > 1 else x[0], nu, s.eps, s.order):
        raise StencilError("stencil does not fit in the domain")
    coarse = _apply(F, x, nu, s)
    if not richardson:
        return coarse
    fine = _apply(F, x, nu, Stencil(s.order, 0.5 * s.eps))
    return (4.0 * fine - coarse) / 3.0


def ftc_check(
    G: Callable,
    H: Callable,
    a,
    b,
    order: int = 20,
    domain: Domain | None = None,
) -> float:
    """``|G(b) - G(a) - int_a^b H|`` along the segment from a to b.

    G is the directional first derivative along ``(b - a)/|b - a|`` and H the
    matching second derivative; the line integral uses Gauss-Legendre nodes.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    length = float(np.linalg.norm(b - a))
    if length == 0.0:
        return 0.0
    nu = (b - a) / length
    s, w = gauss_legendre(order, 0.0, length)
    nodes = a[None, :] + s[:, None] * nu[None, :]
    if domain is not None:
        ends = np.vstack([a, b])
        if not (np.all(domain.contains(nodes if len(a) > 1 else nodes[:, 0])) and np.all(domain.in_closed(ends if len(a) > 1 else ends[:, 0]))):
            raise ValueError("segment leaves the domain")
    arg = lambda p: p[:, 0] if len(a) == 1 else p  # noqa: E731
    integral = float(np.dot(w, np.asarray(H(arg(nodes)), dtype=float)))
    ga, gb = np.asarray(G(arg(np.vstack([a, b]))), dtype=float)
    return abs(gb - ga - integral)
