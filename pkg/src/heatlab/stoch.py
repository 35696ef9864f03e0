"""Killed Brownian motion by Monte Carlo.

Motion has generator Laplace: every coordinate gets Gaussian increments of
variance ``2 dt``. Paths are generated in fixed-size blocks; block ``b`` draws
from Philox streams keyed by ``(master_seed, b)``, path-major, so path ``i``
is the same no matter how many paths are run or how many threads run them.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .domain import Domain

BLOCK_SIZE = 512
PARTICLES = ("plus", "center", "minus")


@dataclass(frozen=True)
class PathConfig:
    """Horizon ``t``, step ``dt`` (the last step may be shorter) and bridge killing."""

    t: float
    dt: float
    bridge: bool = True

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("horizon t must be positive")
        if not 0 < self.dt <= self.t:
            raise ValueError(f"step dt={self.dt} must satisfy 0 < dt <= t={self.t}")

    @classmethod
    def default(cls, t: float, bridge: bool = True) -> "PathConfig":
        return cls(t, min(1e-4, t / 100.0), bridge)

    @property
    def steps(self) -> int:
        n = math.ceil(self.t / self.dt - 1e-9)
        return max(n, 1)

    def step_sizes(self) -> np.ndarray:
        n = self.steps
        h = np.full(n, self.dt)
        h[-1] = self.t - (n - 1) * self.dt
        return h

    def step_ends(self) -> np.ndarray:
        ends = np.cumsum(self.step_sizes())
        ends[-1] = self.t
        return ends


@dataclass(frozen=True)
class SeedPolicy:
    """Counter-based streams: ``(master_seed, block, stream)`` picks the substream."""

    master_seed: int
    block_size: int = BLOCK_SIZE

    def generator(self, block: int, stream: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.master_seed & (2**64 - 1), spawn_key=(block, stream))
        return np.random.Generator(np.random.Philox(ss))

    def blocks(self, n: int) -> list[tuple[int, int]]:
        """``(block, rows)`` covering paths ``0 .. n-1``."""
        out = []
        for b in range(0, math.ceil(n / self.block_size)):
            out.append((b, min(self.block_size, n - b * self.block_size)))
        return out


def _policy(seed) -> SeedPolicy:
    return seed if isinstance(seed, SeedPolicy) else SeedPolicy(int(seed))


def worker_count() -> int:
    env = os.environ.get("HEATLAB_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def _run_blocks(fn: Callable, blocks: list) -> list:
    """Run ``fn(block, rows)`` for every block and return results in block order."""
    workers = min(worker_count(), len(blocks)) or 1
    if workers == 1:
        return [fn(b, r) for b, r in blocks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda br: fn(*br), blocks))


# -- path engine ---------------------------------------------------------------

# bridge kill probabilities below exp(-40) are skipped: a double uniform cannot resolve them
_BRIDGE_CUTOFF = 40.0


def _increments(d: Domain, cfg: PathConfig, pol: SeedPolicy, block: int, rows: int) -> np.ndarray:
    z = pol.generator(block, 0).standard_normal((rows, cfg.steps, d.dim))
    return z * np.sqrt(2.0 * cfg.step_sizes())[None, :, None]


def _kill_steps(d: Domain, starts: list, inc: np.ndarray, cfg: PathConfig, uniforms: np.random.Generator):
    """First killing step for each start point driven by the same increments.

    Returns per start ``(first, sd, final_position)``; ``first`` is -1 for
    survivors and ``sd`` holds signed distances after every step. Bridge
    uniforms are shared by all starts and drawn only for (path, step) cells
    where some start is near the boundary, in row-major order.
    """
    rows, steps, dim = inc.shape
    walk = np.cumsum(inc, axis=1)
    h = cfg.step_sizes()
    tol = d._boundary_tol()
    out = []
    for s in starts:
        pos = walk + s
        flat = pos.reshape(-1, dim)
        sd = d._signed(flat).reshape(rows, steps)
        sd0 = float(d._signed(np.asarray(s).reshape(1, dim))[0])
        sd_prev = np.empty_like(sd)
        sd_prev[:, 0] = sd0
        sd_prev[:, 1:] = sd[:, :-1]
        kill = sd <= tol
        near = ~kill & (sd_prev > tol) & (sd_prev * sd < _BRIDGE_CUTOFF * h[None, :]) if cfg.bridge else None
        out.append([s, pos, sd, kill, near, sd0 <= tol])
    if cfg.bridge:
        union = np.zeros((rows, steps), dtype=bool)
        for item in out:
            union |= item[4]
        cells = np.nonzero(union.ravel())[0]
        u = np.full(rows * steps, 2.0)
        u[cells] = uniforms.random(len(cells))
        u = u.reshape(rows, steps)
        for s, pos, sd, kill, near, _ in out:
            r, c = np.nonzero(near)
            prev = np.where((c > 0)[:, None], pos[r, np.maximum(c - 1, 0)], np.asarray(s, dtype=float)[None, :])
            cur = pos[r, c]
            p = d.bridge_kill_prob(prev[:, 0] if dim == 1 else prev, cur[:, 0] if dim == 1 else cur, h[c])
            kill[r, c] |= u[r, c] < p
    result = []
    for s, pos, sd, kill, near, dead in out:
        if dead:
            first = np.zeros(rows, dtype=int)
        else:
            first = np.where(kill.any(axis=1), np.argmax(kill, axis=1), -1)
        result.append((first, sd, pos))
    return result


@dataclass(frozen=True)
class KilledPathResult:
    survived: bool
    exit_time: float | None
    exit_point: np.ndarray | None
    endpoint: np.ndarray | None


@dataclass
class _Block:
    survived: np.ndarray  # bool (rows,)
    exit_time: np.ndarray  # (rows,), nan if survived
    exit_point: np.ndarray  # (rows, dim), nan if survived
    endpoint: np.ndarray  # (rows, dim), nan if killed


def _killed_block(d: Domain, x0: np.ndarray, cfg: PathConfig, pol: SeedPolicy, block: int, rows: int) -> _Block:
    inc = _increments(d, cfg, pol, block, rows)
    [(first, sd, pos)] = _kill_steps(d, [x0], inc, cfg, pol.generator(block, 1))
    dim = d.dim
    survived = first < 0
    exit_time = np.full(rows, np.nan)
    exit_point = np.full((rows, dim), np.nan)
    endpoint = np.full((rows, dim), np.nan)
    endpoint[survived] = pos[survived, -1]
    k = np.nonzero(~survived)[0]
    if not d.contains(x0 if dim > 1 else x0[0]):
        exit_time[k] = 0.0
        exit_point[k] = d.nearest_boundary(x0 if dim > 1 else x0[0])[0]
        return _Block(survived, exit_time, exit_point, endpoint)
    s = first[k]
    exit_time[k] = cfg.step_ends()[s]
    # the exit is placed at the boundary point nearest to the closer step endpoint
    before = np.where((s > 0)[:, None], pos[k, np.maximum(s - 1, 0)], x0[None, :])
    after = pos[k, s]
    sd_before = d._signed(before)
    closer = np.where((sd[k, s] < sd_before)[:, None], after, before)
    exit_point[k] = d.nearest_boundary(closer if dim > 1 else closer[:, 0])
    return _Block(survived, exit_time, exit_point, endpoint)


def _start(d: Domain, x0) -> np.ndarray:
    pts, single = d._points(x0)
    if not single:
        raise ValueError("x0 must be a single point")
    if not d.in_closed(pts).all():
        raise ValueError("x0 lies outside the domain")
    return pts[0]


def simulate_killed_path(d: Domain, x0, cfg: PathConfig, seed, index: int) -> KilledPathResult:
    """Path number ``index`` of the stream defined by ``seed``."""
    pol = _policy(seed)
    block, pos = divmod(int(index), pol.block_size)
    res = _killed_block(d, _start(d, x0), cfg, pol, block, pos + 1)
    if res.survived[pos]:
        return KilledPathResult(True, None, None, res.endpoint[pos])
    return KilledPathResult(False, float(res.exit_time[pos]), res.exit_point[pos], None)


# -- estimators ----------------------------------------------------------------


@dataclass(frozen=True)
class Estimate:
    estimate: float
    stderr: float
    n: int

    def __iter__(self):
        return iter((self.estimate, self.stderr))


def _mean_stderr(sums: list[float], sq_sums: list[float], n: int) -> Estimate:
    total = math.fsum(sums)
    mean = total / n
    if n < 2:
        return Estimate(mean, 0.0, n)
    var = (math.fsum(sq_sums) - total * mean) / (n - 1)
    return Estimate(mean, math.sqrt(max(var, 0.0) / n), n)


def _field_values(d: Domain, F: Callable, pts: np.ndarray) -> np.ndarray:
    if len(pts) == 0:
        return np.zeros(0)
    arg = pts[:, 0] if d.dim == 1 else pts
    return np.broadcast_to(np.asarray(F(arg), dtype=float), (len(pts),)).astype(float)


def feynman_kac(d: Domain, F: Callable | None, x0, t: float, n: int, cfg: PathConfig | None = None, seed=0) -> Estimate:
    """``E[f(X_t); no exit before t]``, the killed semigroup ``e^{t Laplace} f (x0)``.

    ``F=None`` means ``f = 1`` (the survival probability).
    """
    if n < 1:
        raise ValueError("need at least one path")
    cfg = cfg or PathConfig.default(t)
    if abs(cfg.t - t) > 1e-15 * max(1.0, t):
        raise ValueError("PathConfig horizon differs from t")
    pol = _policy(seed)
    x = _start(d, x0)

    def work(block, rows):
        res = _killed_block(d, x, cfg, pol, block, rows)
        v = np.zeros(rows)
        if F is None:
            v[res.survived] = 1.0
        else:
            v[res.survived] = _field_values(d, F, res.endpoint[res.survived])
        return math.fsum(v), math.fsum(v * v)

    out = _run_blocks(work, pol.blocks(n))
    return _mean_stderr([a for a, _ in out], [b for _, b in out], n)


def estimate_survival(d: Domain, x0, t: float, n: int, cfg: PathConfig | None = None, seed=0) -> Estimate:
    """Fraction of paths that survive to time t, with its standard error."""
    if n < 100:
        raise ValueError("estimate_survival needs N >= 100")
    return feynman_kac(d, None, x0, t, n, cfg, seed)


def survival_indicators(d: Domain, x0, t: float, n: int, cfg: PathConfig | None = None, seed=0) -> np.ndarray:
    """Per-path survival indicators in path order."""
    cfg = cfg or PathConfig.default(t)
    pol = _policy(seed)
    x = _start(d, x0)
    parts = _run_blocks(lambda b, r: _killed_block(d, x, cfg, pol, b, r).survived, pol.blocks(n))
    return np.concatenate(parts)


@dataclass(frozen=True)
class ExitHistogram:
    bin_masses: tuple[float, ...]
    total_exit_mass: float
    survival: float
    n: int


def exit_histogram(d: Domain, x0, t: float, n: int, cfg: PathConfig | None = None, seed=0, bins: int = 2) -> ExitHistogram:
    """Exit-point histogram over equal boundary bins (arclength fraction on planar domains)."""
    if bins < 2:
        raise ValueError("need at least 2 bins")
    cfg = cfg or PathConfig.default(t)
    pol = _policy(seed)
    x = _start(d, x0)

    def work(block, rows):
        res = _killed_block(d, x, cfg, pol, block, rows)
        pts = res.exit_point[~res.survived]
        counts = np.zeros(bins, dtype=np.int64)
        if len(pts):
            par = d.boundary_parameter(pts if d.dim > 1 else pts[:, 0])
            idx = np.minimum((par * bins).astype(int), bins - 1)
            counts += np.bincount(idx, minlength=bins)
        return int(res.survived.sum()), counts

    out = _run_blocks(work, pol.blocks(n))
    alive = sum(a for a, _ in out)
    counts = np.sum([c for _, c in out], axis=0)
    surv = alive / n
    return ExitHistogram(tuple(float(c) / n for c in counts), 1.0 - surv, surv, n)


# -- the coupled triple --------------------------------------------------------


@dataclass(frozen=True)
class TripleResult:
    """Outcome of one coupled path: all three survive, or the first hitter and its time."""

    all_survived: bool
    first_hitter: str | None
    hit_time: float | None
    quotient_term: float | None


@dataclass(frozen=True)
class TripleSummary:
    a_eps_fraction: float
    quotient_mean: float
    quotient_stderr: float
    class_histogram: dict
    n: int
    eps: float

    def to_dict(self) -> dict:
        return {
            "a_eps_fraction": self.a_eps_fraction,
            "quotient_mean": self.quotient_mean,
            "quotient_stderr": self.quotient_stderr,
            "class_histogram": dict(self.class_histogram),
            "N": self.n,
            "eps": self.eps,
        }


def _triple_block(d: Domain, F: Callable, x0, nu, eps, cfg, pol, block, rows):
    """Per-path class (-1 = all survived, else particle index) with hit step and quotient term."""
    inc = _increments(d, cfg, pol, block, rows)
    starts = [x0 + eps * nu, x0, x0 - eps * nu]
    # one increment stream and one bridge uniform per step drive all three particles
    runs = _kill_steps(d, starts, inc, cfg, pol.generator(block, 1))
    big = np.iinfo(np.int64).max
    step = np.stack([np.where(f < 0, big, f) for f, _, _ in runs])
    s0 = step.min(axis=0)
    alive = s0 == big
    cls = np.full(rows, -1)
    idx = np.nonzero(~alive)[0]
    if len(idx):
        # within the killing step the particle nearest the boundary hits first;
        # exact ties go to the lowest index
        score = np.full((3, len(idx)), np.inf)
        s_hit = s0[idx]
        for i, (_, sd, _) in enumerate(runs):
            sd_start = float(d._signed(starts[i].reshape(1, -1))[0])
            before = np.where(s_hit > 0, sd[idx, np.maximum(s_hit - 1, 0)], sd_start)
            score[i] = np.where(step[i, idx] == s_hit, before + sd[idx, s_hit], np.inf)
        cls[idx] = np.argmin(score, axis=0)
    q = np.full(rows, np.nan)
    if alive.any():
        fp, fc, fm = (_field_values(d, F, pos[alive, -1]) for _, _, pos in runs)
        q[alive] = (fp - 2.0 * fc + fm) / (eps * eps)
    return cls, s0, q


def _triple_inputs(d: Domain, x0, nu, eps):
    x = _start(d, x0)
    nu = np.atleast_1d(np.asarray(nu, dtype=float)).reshape(d.dim)
    if abs(np.linalg.norm(nu) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    if not d.stencil_fits(x if d.dim > 1 else x[0], nu, eps, 2):
        raise ValueError("the three start points x0, x0 +- eps nu do not fit in the domain")
    return x, nu


def simulate_triple(d: Domain, F: Callable, x0, nu, eps: float, cfg: PathConfig, seed, index: int) -> TripleResult:
    pol = _policy(seed)
    x, nu = _triple_inputs(d, x0, nu, eps)
    block, pos = divmod(int(index), pol.block_size)
    cls, s0, q = _triple_block(d, F, x, nu, eps, cfg, pol, block, pos + 1)
    if cls[pos] < 0:
        return TripleResult(True, None, None, float(q[pos]))
    return TripleResult(False, PARTICLES[cls[pos]], float(cfg.step_ends()[s0[pos]]), None)


def coupled_triple(
    d: Domain,
    F: Callable,
    x0,
    nu,
    eps: float,
    t: float,
    n: int,
    cfg: PathConfig | None = None,
    seed=0,
) -> TripleSummary:
    """Second difference quotient of ``f`` restricted to paths where all three particles survive.

    ``quotient_mean`` is ``(1/N) sum_{A_eps} (f(X+eps nu) - 2 f(X) + f(X-eps nu)) / eps^2``,
    which tends to ``int p_t(x0, y) d^2 f/d nu^2 (y) dy`` as eps and dt shrink.
    """
    cfg = cfg or PathConfig.default(t)
    pol = _policy(seed)
    x, nu = _triple_inputs(d, x0, nu, eps)

    def work(block, rows):
        cls, _, q = _triple_block(d, F, x, nu, eps, cfg, pol, block, rows)
        v = np.where(cls < 0, q, 0.0)
        counts = [int(np.sum(cls == i)) for i in range(3)]
        return math.fsum(v), math.fsum(v * v), int(np.sum(cls < 0)), counts

    out = _run_blocks(work, pol.blocks(n))
    est = _mean_stderr([o[0] for o in out], [o[1] for o in out], n)
    alive = sum(o[2] for o in out)
    hist = {name: sum(o[3][i] for o in out) for i, name in enumerate(PARTICLES)}
    return TripleSummary(alive / n, est.estimate, est.stderr, hist, n, eps)


def richardson_quotient(d, F, x0, nu, eps, t, n, cfg=None, seed=0) -> tuple[float, TripleSummary, TripleSummary]:
    """Combine eps and eps/2 runs on the same paths to cancel the O(eps^2) bias."""
    coarse = coupled_triple(d, F, x0, nu, eps, t, n, cfg, seed)
    fine = coupled_triple(d, F, x0, nu, 0.5 * eps, t, n, cfg, seed)
    return (4.0 * fine.quotient_mean - coarse.quotient_mean) / 3.0, coarse, fine


# -- reflection principle ------------------------------------------------------


@dataclass(frozen=True)
class ReflectionEstimate:
    """``P(max_{s<=t} B_s >= d)`` and ``P(|B_t| >= d)`` from the same paths."""

    estimate: float
    stderr: float
    endpoint_estimate: float
    endpoint_stderr: float
    n: int

    def __iter__(self):
        return iter((self.estimate, self.stderr))


def reflection_max_estimate(level: float, t: float, n: int, seed=0, steps: int = 100) -> ReflectionEstimate:
    """Monte Carlo for the running maximum of 1D motion with variance 2t.

    Each step adds the exact Brownian-bridge crossing probability for a flat
    barrier, so the estimate has no time-discretization bias.
    """
    if level < 0:
        raise ValueError("level must be >= 0")
    pol = _policy(seed)
    h = t / steps

    def work(block, rows):
        if level == 0.0:
            return float(rows), float(rows), 0.0, 0.0
        z = pol.generator(block, 0).standard_normal((rows, steps))
        u = pol.generator(block, 1).random((rows, steps))
        pos = np.cumsum(z * math.sqrt(2.0 * h), axis=1)
        prev = np.hstack([np.zeros((rows, 1)), pos[:, :-1]])
        gap_a = np.maximum(level - prev, 0.0)
        gap_b = np.maximum(level - pos, 0.0)
        crossed = (pos >= level) | (u < np.exp(-gap_a * gap_b / h))
        hit = crossed.any(axis=1).astype(float)
        far = (np.abs(pos[:, -1]) >= level).astype(float)
        return math.fsum(hit), math.fsum(hit), math.fsum(far), math.fsum(far)

    out = _run_blocks(work, pol.blocks(n))
    m = _mean_stderr([o[0] for o in out], [o[1] for o in out], n)
    e = _mean_stderr([o[2] for o in out], [o[3] for o in out], n)
    if level == 0.0:
        e = Estimate(1.0, 0.0, n)
    return ReflectionEstimate(m.estimate, m.stderr, e.estimate, e.stderr, n)


# -- reporting -----------------------------------------------------------------


def summary_json(estimate: float, stderr: float, n: int, cfg: PathConfig, seed, class_histogram: dict | None = None) -> str:
    """Simulation summary with sorted keys."""
    pol = _policy(seed)
    doc = {
        "estimate": estimate,
        "stderr": stderr,
        "N": n,
        "dt": cfg.dt,
        "t": cfg.t,
        "seed": pol.master_seed,
        "block_size": pol.block_size,
        "bridge": cfg.bridge,
        "class_histogram": class_histogram or {},
    }
    return json.dumps(doc, sort_keys=True)
