"""Rate functions for path events and Monte Carlo checks of the upper bound.

The scaled process is ``X^s_t = X_{s t}`` for the diffusion ``sigma B`` on an
:class:`~heatlab.mms.AnalyticSpace1D`; its paths are sampled from exact
Gaussian increments and then folded onto the domain (reflection of a free
Brownian path is reflecting Brownian motion, wrapping gives the circle).

Random numbers come from a counter-based Philox stream keyed by the seed.
Path ``i`` always consumes the same block of counters, so a batch of paths is
bit-identical however the run is split across batches or threads.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import lsq_linear
from scipy.special import ndtri
from scipy.stats import norm

from .curves import Partition, SampledCurve, h_delta
from .mms import AnalyticSpace1D, IntervalSet

_BATCH = 1 << 16
_MAX_COMBOS = 200_000


# ---------------------------------------------------------------------------
# events
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CylinderEvent:
    """``{gamma : gamma(t_i) in A_i for every i}`` with closed interval-union sets."""

    times: np.ndarray
    sets: tuple

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        if t.ndim != 1 or t.size < 1:
            raise ValueError("a cylinder needs at least one time")
        if np.any(np.diff(t) <= 0) or t[0] < 0 or t[-1] > 1:
            raise ValueError("cylinder times must increase strictly within [0, 1]")
        sets = tuple(IntervalSet.coerce(A) for A in self.sets)
        if len(sets) != t.size:
            raise ValueError(f"{t.size} times but {len(sets)} sets")
        if not all(sets):
            raise ValueError("cylinder sets must be nonempty")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "sets", sets)

    @classmethod
    def on(cls, partition: Partition, sets):
        return cls(partition.times, sets)


@dataclass(frozen=True)
class PathEvent:
    """One of three closed event families with computable rate infima.

    ``endpoint_at_least``: ``gamma(1) >= a``.
    ``tube_complement``: ``sup_t |gamma(t) - (x0 + v t)| >= r``.
    ``cylinder``: a :class:`CylinderEvent`.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        need = {"endpoint_at_least": {"a"}, "tube_complement": {"x0", "v", "r"}, "cylinder": {"cylinder"}}
        if self.kind not in need:
            raise ValueError(f"unknown event kind {self.kind!r}")
        if set(self.params) != need[self.kind]:
            raise ValueError(f"{self.kind} takes parameters {sorted(need[self.kind])}")
        if self.kind == "tube_complement" and not self.params["r"] >= 0:
            raise ValueError("tube radius must be nonnegative")
        if self.kind == "cylinder" and not isinstance(self.params["cylinder"], CylinderEvent):
            raise TypeError("cylinder parameter must be a CylinderEvent")

    @classmethod
    def endpoint_at_least(cls, a: float):
        return cls("endpoint_at_least", {"a": float(a)})

    @classmethod
    def whole_space(cls):
        return cls.endpoint_at_least(-math.inf)

    @classmethod
    def tube_complement(cls, x0: float, v: float, r: float):
        return cls("tube_complement", {"x0": float(x0), "v": float(v), "r": float(r)})

    @classmethod
    def cylinder(cls, event: CylinderEvent):
        return cls("cylinder", {"cylinder": event})

    def rate(self, space: AnalyticSpace1D, x0: float = 0.0) -> float:
        """Infimum of the path energy over the event, for paths started at ``x0``."""
        sig2 = space.sigma**2
        if self.kind == "endpoint_at_least":
            a = self.params["a"]
            if space.kind == "circle":
                raise ValueError("endpoint thresholds are not defined on the circle")
            if space.bounded and a > 1:
                return math.inf
            return max(a - x0, 0.0) ** 2 / (2 * sig2)
        if self.kind == "tube_complement":
            if space.kind != "free_line":
                raise ValueError("tube rates are implemented for the free line only")
            if self.params["x0"] != x0:
                raise ValueError("the reference line must start at the path start")
            v, r = abs(self.params["v"]), self.params["r"]
            # cheapest exit hits the tube wall at time min(1, r / |v|)
            return max(r - v, 0.0) ** 2 / (2 * sig2)
        return cylinder_rate(self.params["cylinder"], space)

    def indicator(self, paths: np.ndarray, grid: np.ndarray) -> np.ndarray:
        """Membership of sampled paths (rows) observed on ``grid``."""
        if self.kind == "endpoint_at_least":
            return paths[:, -1] >= self.params["a"]
        if self.kind == "tube_complement":
            ref = self.params["x0"] + self.params["v"] * grid
            return np.max(np.abs(paths - ref), axis=1) >= self.params["r"]
        cyl = self.params["cylinder"]
        idx = np.searchsorted(grid, cyl.times)
        if np.any(idx >= grid.size) or np.any(np.abs(grid[np.minimum(idx, grid.size - 1)] - cyl.times) > 1e-12):
            raise ValueError("cylinder times must lie on the sampling grid")
        hit = np.ones(paths.shape[0], dtype=bool)
        for k, A in zip(idx, cyl.sets):
            hit &= A.contains(paths[:, k])
        return hit


# ---------------------------------------------------------------------------
# rates
# ---------------------------------------------------------------------------


def _is_refinement(coarse: Partition, fine: Partition) -> bool:
    j = np.searchsorted(fine.times, coarse.times)
    j = np.minimum(j, fine.times.size - 1)
    near = np.minimum(np.abs(fine.times[j] - coarse.times), np.abs(fine.times[np.maximum(j - 1, 0)] - coarse.times))
    return bool(np.all(near <= 1e-12))


def projective_rate(curve: SampledCurve, partitions) -> float:
    """``sup_j H_{Delta_j}(curve)`` over a refinement-ordered family of partitions."""
    parts = [p if isinstance(p, Partition) else Partition(p) for p in partitions]
    if not parts:
        raise ValueError("need at least one partition")
    for a, b in zip(parts, parts[1:]):
        if not _is_refinement(a, b):
            raise ValueError("partition family is not ordered by refinement")
    return max(h_delta(curve, p) for p in parts)


def _components(space: AnalyticSpace1D, A: IntervalSet):
    return [(a, b) for a, b in A.intervals]


def cylinder_rate(event: CylinderEvent, space: AnalyticSpace1D) -> float:
    """``inf`` of ``H_Delta`` over paths threading the cylinder.

    Minimises ``1/2 sum (x_{i+1} - x_i)^2 / (sigma^2 dt_i)`` over ``x_i in A_i``.
    Each choice of interval components (and, on the circle, of winding
    offsets) is a bounded least-squares problem solved exactly by BVLS;
    point sets are eliminated as fixed variables.
    """
    if not isinstance(space, AnalyticSpace1D):
        raise TypeError("cylinder rates need an analytic 1-D space")
    t = event.times
    n = t.size
    if n == 1:
        return 0.0
    sets = [space.as_set(A) for A in event.sets]
    comps = [_components(space, A) for A in sets]
    shifts = [(-1.0, 0.0, 1.0) if space.kind == "circle" else (0.0,)] * (n - 1)
    n_combos = math.prod(len(c) for c in comps) * math.prod(len(s) for s in shifts)
    if n_combos > _MAX_COMBOS:
        raise ValueError(f"cylinder too complex: {n_combos} component combinations")

    scale = 1.0 / (space.sigma * np.sqrt(np.diff(t)))
    D = np.zeros((n - 1, n))
    D[np.arange(n - 1), np.arange(n - 1)] = -scale
    D[np.arange(n - 1), np.arange(1, n)] = scale

    best = math.inf
    for choice in itertools.product(*comps):
        lb = np.array([c[0] for c in choice])
        ub = np.array([c[1] for c in choice])
        fixed = lb == ub
        free = ~fixed
        for k in itertools.product(*shifts):
            offset = np.asarray(k) * scale
            b = -(D[:, fixed] @ lb[fixed]) - offset
            if free.any():
                res = lsq_linear(D[:, free], b, bounds=(lb[free], ub[free]), method="bvls")
                r = D[:, free] @ res.x - b
            else:
                r = -b
            best = min(best, 0.5 * float(r @ r))
            if best == 0.0:
                return 0.0
    return best


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def _normals(seed: int, first: int, count: int, steps: int) -> np.ndarray:
    """Standard normals for paths ``first .. first + count - 1``; one counter block per 4 words."""
    blocks = -(-steps // 4)
    bg = np.random.Philox(key=seed, counter=[first * blocks, 0, 0, 0])
    raw = bg.random_raw(count * blocks * 4).reshape(count, blocks * 4)[:, :steps]
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(u)


def sample_scaled_paths(
    space: AnalyticSpace1D,
    s: float,
    n: int,
    steps: int = 64,
    seed: int = 0,
    x0: float = 0.0,
    first: int = 0,
) -> np.ndarray:
    """``n`` paths of ``X^s`` on the uniform grid of ``steps`` intervals, shape ``(n, steps + 1)``.

    ``first`` selects the path index range, so batches can be drawn separately
    and concatenated into exactly the batch a single call would return.
    """
    if not s > 0:
        raise ValueError("s must be positive")
    if steps < 64:
        raise ValueError("steps must be at least 64")
    if n < 0 or first < 0:
        raise ValueError("path counts must be nonnegative")
    dt = 1.0 / steps
    z = _normals(seed, first, n, steps) * (space.sigma * math.sqrt(s * dt))
    free = np.empty((n, steps + 1))
    free[:, 0] = x0
    np.cumsum(z, axis=1, out=free[:, 1:])
    free[:, 1:] += x0
    return space.fold(free)


@dataclass(frozen=True)
class McEstimate:
    s: float
    n_samples: int
    p_hat: float
    std_err: float
    s_log_p: float
    seed: int

    @classmethod
    def from_count(cls, s: float, hits: int, n: int, seed: int):
        p = hits / n
        se = math.sqrt(p * (1 - p) / n)
        slp = s * math.log(p) if p > 0 else -math.inf
        return cls(s, n, p, se, slp, seed)


UNRESOLVABLE = "consistent (unresolvable at n)"


@dataclass(frozen=True)
class McPoint:
    estimate: McEstimate
    rate: float
    slack: float
    verdict: str

    def row(self) -> dict:
        e = self.estimate
        return {
            "s": e.s,
            "p_hat": e.p_hat,
            "std_err": e.std_err,
            "s_log_p": e.s_log_p,
            "rate": self.rate,
            "slack": self.slack,
            "verdict": self.verdict,
        }


@dataclass(frozen=True)
class McReport:
    points: list

    @property
    def verdict(self) -> str:
        vs = [p.verdict for p in self.points]
        if "FAIL" in vs:
            return "FAIL"
        return "PASS" if all(v == "PASS" for v in vs) else "CONSISTENT"


def count_hits(
    event: PathEvent,
    space: AnalyticSpace1D,
    s: float,
    n: int,
    seed: int,
    steps: int = 64,
    x0: float = 0.0,
    threads: int | None = None,
) -> int:
    """Number of the ``n`` seeded paths that fall in ``event``; batch counts are summed."""
    grid = np.linspace(0.0, 1.0, steps + 1)

    def batch(first):
        m = min(_BATCH, n - first)
        paths = sample_scaled_paths(space, s, m, steps, seed, x0, first)
        return int(np.count_nonzero(event.indicator(paths, grid)))

    starts = range(0, n, _BATCH)
    workers = threads or int(os.environ.get("HEATLAB_THREADS", "1") or 1)
    if workers <= 1:
        return sum(map(batch, starts))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return sum(pool.map(batch, starts))


def slack(s: float, c1: float = 5.0) -> float:
    return c1 * s * math.log(1.0 / s)


def mc_upper_bound_check(
    event: PathEvent,
    rate: float,
    s_grid,
    n: int,
    seed: int,
    space: AnalyticSpace1D | None = None,
    c1: float = 5.0,
    steps: int = 64,
    x0: float = 0.0,
    threads: int | None = None,
) -> McReport:
    """One-sided check ``s log(p_hat + 3 se) <= -rate + c1 s log(1/s)`` along ``s_grid``."""
    space = space or AnalyticSpace1D("free_line", 1.0)
    s_grid = [float(s) for s in s_grid]
    if any(not 0 < s < 1 for s in s_grid):
        raise ValueError("scales must lie in (0, 1)")
    if any(b >= a for a, b in zip(s_grid, s_grid[1:])):
        raise ValueError("s_grid must be strictly decreasing")
    if n <= 0:
        raise ValueError("n must be positive")
    points = []
    for s in s_grid:
        est = McEstimate.from_count(s, count_hits(event, space, s, n, seed, steps, x0, threads), n, seed)
        eps = slack(s, c1)
        if est.p_hat == 0:
            verdict = UNRESOLVABLE
        else:
            ok = s * math.log(est.p_hat + 3 * est.std_err) <= -rate + eps
            verdict = "PASS" if ok else "FAIL"
        points.append(McPoint(est, rate, eps, verdict))
    return McReport(points)


def exact_endpoint_probability(a: float, s: float, sigma: float = 1.0, x0: float = 0.0) -> float:
    """``P(x0 + sigma sqrt(s) Z >= a)`` on the free line."""
    return float(norm.sf((a - x0) / (sigma * math.sqrt(s))))


def exact_endpoint_s_log_p(a: float, s: float, sigma: float = 1.0, x0: float = 0.0) -> float:
    return s * float(norm.logsf((a - x0) / (sigma * math.sqrt(s))))


def matches_exact(est: McEstimate, p_exact: float, k: float = 3.0) -> bool:
    """``|p_hat - p| <= k se`` with the binomial standard error under the exact ``p``."""
    se = math.sqrt(p_exact * (1 - p_exact) / est.n_samples)
    return abs(est.p_hat - p_exact) <= k * se
