"""Bessel functions of the first kind and their positive zeros.

Only integer orders are supported. Values come from the ascending power
series where it is free of cancellation and from Miller's backward
recurrence (normalized with ``J_0 + 2 * sum J_2k = 1``) elsewhere.
"""

from __future__ import annotations

import math
import numpy as np

MAX_ORDER = 60
MAX_ARG = 500.0
# zeros up to n = 200 at m = 60 sit near 730
_INTERNAL_MAX_ARG = 800.0

# internal callers need a few orders beyond MAX_ORDER for derivative recurrences
_INTERNAL_MAX_ORDER = MAX_ORDER + 8

_RESCALE_AT = 1e200


class BesselError(ArithmeticError):
    """Raised when a Bessel evaluation or zero search cannot be completed."""


def _series_block(lo: int, hi: int, x: np.ndarray) -> np.ndarray:
    orders = np.arange(lo, hi + 1)[:, None]
    half = 0.5 * x[None, :]
    q = half * half
    fact = np.array([math.factorial(m) for m in range(lo, hi + 1)], dtype=float)[:, None]
    term = np.power(half, orders) / fact
    total = term.copy()
    for k in range(1, 200):
        term = -term * q / (k * (k + orders))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return total


def _miller_block(lo: int, hi: int, x: np.ndarray) -> np.ndarray:
    """Backward recurrence for orders lo..hi at strictly positive x."""
    top = max(hi, float(x.max()))
    start = int(top + 15.0 * top ** (1.0 / 3.0) + 20)
    start += start % 2
    out = np.zeros((hi - lo + 1, x.size))
    two_over_x = 2.0 / x
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    for k in range(start, 0, -1):
        # j_cur holds J_k (unnormalized); produce J_{k-1}
        j_prev = k * two_over_x * j_cur - j_next
        if lo <= k <= hi:
            out[k - lo] = j_cur
        if k % 2 == 0:
            norm += 2.0 * j_cur
        j_next, j_cur = j_cur, j_prev
        if k % 4:
            continue
        # growth per step is bounded by 2k/x, so checking every 4th step is safe
        big = np.abs(j_cur) > _RESCALE_AT
        if big.any():
            scale = np.where(big, 1.0 / _RESCALE_AT, 1.0)
            j_cur *= scale
            j_next *= scale
            norm *= scale
            out *= scale
    # j_cur is now J_0
    if lo == 0:
        out[0] = j_cur
    norm += j_cur
    return out / norm


def bessel_block(lo: int, hi: int, x) -> np.ndarray:
    """Return ``J_m(x)`` for every integer order ``lo <= m <= hi``.

    Negative orders are obtained from ``J_{-n} = (-1)^n J_n``. The result has
    shape ``(hi - lo + 1,) + np.shape(x)``.
    """
    x = np.asarray(x, dtype=float)
    shape = x.shape
    flat = x.ravel()
    if hi < lo:
        raise ValueError("empty order range")
    if max(abs(lo), abs(hi)) > _INTERNAL_MAX_ORDER:
        raise BesselError(f"order outside supported range: {lo}..{hi}")
    if np.any(flat < 0) or np.any(flat > _INTERNAL_MAX_ARG) or not np.all(np.isfinite(flat)):
        raise BesselError(f"argument outside [0, {_INTERNAL_MAX_ARG}]")
    a_lo = 0 if lo <= 0 <= hi else min(abs(lo), abs(hi))
    a_hi = max(abs(lo), abs(hi))
    base = np.empty((a_hi - a_lo + 1, flat.size))
    small = flat * flat <= 4.0 * (a_lo + 1)
    if small.any():
        base[:, small] = _series_block(a_lo, a_hi, flat[small])
    if (~small).any():
        base[:, ~small] = _miller_block(a_lo, a_hi, flat[~small])
    rows = []
    for m in range(lo, hi + 1):
        row = base[abs(m) - a_lo]
        rows.append(-row if (m < 0 and m % 2) else row)
    return np.stack(rows).reshape((hi - lo + 1,) + shape)


def bessel_j(m: int, x):
    """Bessel function ``J_m(x)`` for integer ``0 <= m <= 60`` and ``0 <= x <= 500``.

    Accepts scalars or arrays; scalars in give a float out.
    """
    if int(m) != m or m < 0 or m > MAX_ORDER:
        raise BesselError(f"order m={m} outside 0..{MAX_ORDER}")
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(arr > MAX_ARG):
        raise BesselError("argument outside [0, 500]")
    val = bessel_block(int(m), int(m), arr)[0]
    return float(val) if np.ndim(x) == 0 else val


def bessel_j_prime(m: int, x):
    """Derivative ``J_m'(x) = (J_{m-1}(x) - J_{m+1}(x)) / 2``."""
    block = bessel_block(m - 1, m + 1, np.asarray(x, dtype=float))
    val = 0.5 * (block[0] - block[2])
    return float(val) if np.ndim(x) == 0 else val


def mcmahon_guess(m: int, n: int) -> float:
    """McMahon's large-zero expansion for the n-th positive zero of ``J_m``."""
    beta = (n + 0.5 * m - 0.25) * math.pi
    mu = 4.0 * m * m
    e = 8.0 * beta
    return (
        beta
        - (mu - 1) / e
        - 4 * (mu - 1) * (7 * mu - 31) / (3 * e**3)
        - 32 * (mu - 1) * (83 * mu**2 - 982 * mu + 3779) / (15 * e**5)
    )


def _refine_zeros(m: int, a: np.ndarray, b: np.ndarray, guess: np.ndarray) -> np.ndarray:
    """Safeguarded Newton on many brackets ``[a, b]`` at once."""
    a = a.copy()
    b = b.copy()
    fa = bessel_block(m, m, a)[0]
    x = np.where((a < guess) & (guess < b), guess, 0.5 * (a + b))
    done = np.zeros(a.shape, dtype=bool)
    for _ in range(100):
        blk = bessel_block(m - 1, m + 1, x)
        f = blk[1]
        df = 0.5 * (blk[0] - blk[2])
        # shrink the bracket so Newton can never jump to a neighbouring zero
        same = (f > 0) == (fa > 0)
        a = np.where(same, x, a)
        fa = np.where(same, f, fa)
        b = np.where(same, b, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = f / df
        x_new = x - step
        converged = (f == 0.0) | (np.abs(step) <= 1e-15 * x) | (b - a <= 4e-16 * x)
        x_new = np.where((a <= x_new) & (x_new <= b), x_new, 0.5 * (a + b))
        x = np.where(done | (f == 0.0), x, x_new)
        done |= converged
        if done.all():
            return x
    raise BesselError(f"Newton iteration for zeros of J_{m} did not converge")


_ZERO_CACHE: dict[int, list[float]] = {}
_SCAN_END: dict[int, float] = {}


def _extend_zeros(m: int, count: int | None = None, below: float | None = None) -> list[float]:
    zeros = _ZERO_CACHE.setdefault(m, [])
    lo = _SCAN_END.get(m, max(float(m), 0.5))
    # consecutive zeros are more than 3 apart, so a 0.5 scan brackets each one
    step = 0.5

    def satisfied() -> bool:
        if count is not None:
            return len(zeros) >= count
        return lo >= below

    while not satisfied():
        if lo >= _INTERNAL_MAX_ARG:
            raise BesselError(f"zeros of J_{m} requested beyond the supported range")
        hi = min(lo + step * 128, _INTERNAL_MAX_ARG)
        grid = np.linspace(lo, hi, 129)
        vals = bessel_block(m, m, grid)[0]
        sign = np.sign(vals)
        idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
        if idx.size:
            ns = len(zeros) + 1 + np.arange(idx.size)
            guess = np.array([mcmahon_guess(m, int(n)) for n in ns])
            zeros.extend(_refine_zeros(m, grid[idx], grid[idx + 1], guess).tolist())
        lo = hi
        _SCAN_END[m] = lo
    return zeros


def bessel_zeros(m: int, count: int) -> tuple[float, ...]:
    """First ``count`` positive zeros of ``J_m``, ascending."""
    if int(m) != m or m < 0 or m > MAX_ORDER:
        raise BesselError(f"order m={m} outside 0..{MAX_ORDER}")
    if count < 1:
        raise ValueError("count must be >= 1")
    return tuple(_extend_zeros(int(m), count=count)[:count])


def bessel_zeros_below(m: int, limit: float) -> tuple[float, ...]:
    """All positive zeros of ``J_m`` smaller than ``limit``."""
    if int(m) != m or m < 0 or m > MAX_ORDER:
        raise BesselError(f"order m={m} outside 0..{MAX_ORDER}")
    zeros = _extend_zeros(int(m), below=limit)
    return tuple(z for z in zeros if z < limit)


def bessel_zero(m: int, n: int) -> float:
    """The n-th positive zero ``j_{m,n}`` of ``J_m`` (``m <= 60``, ``n <= 200``)."""
    if n < 1 or n > 200:
        raise BesselError(f"zero index n={n} outside 1..200")
    return bessel_zeros(int(m), int(n))[-1]
