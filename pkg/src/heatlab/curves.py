"""Energies of continuous curves in a metric space.

The discretised energy ``H_Delta`` of a partition only increases under
refinement, and dyadic partitions are cofinal among all partitions, so
the supremum over partitions is estimated as the limit along dyadic levels.
This is exact for every curve whose discretised energy along *some* cofinal
sequence attains the supremum; a curve whose oscillations hide between dyadic
points could fool it, and none of the catalogue curves do.

The second route is the metric-derivative energy ``1/2 int |gamma'|^2``, computed
from Richardson-extrapolated difference quotients and composite Gauss-Legendre
quadrature.  For absolutely continuous curves the two agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, NamedTuple

import numpy as np

from .errors import MetricDerivativeError

DEFAULT_H_GRID = tuple(np.geomspace(1e-2, 1e-4, 7))


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MetricOracle:
    """A distance function plus an optional sampler used to validate it.

    With ``vectorized=True`` the distance accepts arrays of points (leading
    axis) and returns an array of distances.
    """

    distance: Callable[[Any, Any], Any]
    sampler: Callable[[np.random.Generator, int], list] | None = None
    name: str = "metric"
    vectorized: bool = False
    validation_tol: float = 1e-9

    def __post_init__(self):
        if self.sampler is not None:
            self.validate(np.random.default_rng(20240601))

    def __call__(self, p, q) -> float:
        return float(self.distance(p, q))

    def validate(self, rng, n_triples: int = 64):
        pts = self.sampler(rng, 3 * n_triples)
        tol = self.validation_tol
        for k in range(n_triples):
            x, y, z = pts[3 * k : 3 * k + 3]
            dxy, dyx = self(x, y), self(y, x)
            if abs(dxy - dyx) > tol:
                raise ValueError(f"{self.name}: asymmetric distance {dxy} vs {dyx}")
            if dxy < -tol:
                raise ValueError(f"{self.name}: negative distance {dxy}")
            if self(x, z) > dxy + self(y, z) + tol:
                raise ValueError(f"{self.name}: triangle inequality fails")

    def consecutive(self, points) -> np.ndarray:
        """Distances between successive entries of ``points``."""
        if self.vectorized:
            pts = np.asarray(points)
            return np.asarray(self.distance(pts[:-1], pts[1:]), dtype=float)
        return np.array([self(points[i], points[i + 1]) for i in range(len(points) - 1)])


def absolute_metric(sigma: float = 1.0) -> MetricOracle:
    """``|x - y| / sigma`` on the real line (the intrinsic metric of ``sigma B``)."""
    return MetricOracle(
        lambda x, y: np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)) / sigma,
        sampler=lambda rng, n: list(rng.uniform(-2, 2, n)),
        name=f"abs(sigma={sigma:g})",
        vectorized=True,
    )


def intrinsic_metric(space, tol: float = 1e-6) -> MetricOracle:
    """Intrinsic point distance on a finite space; points are state indices."""
    from .intrinsic import intrinsic_distance_sets

    n = space.n
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            D[i, j] = D[j, i] = intrinsic_distance_sets(space, [i], [j], tol).value
    D.setflags(write=False)
    return MetricOracle(
        lambda x, y: D[np.asarray(x, dtype=int), np.asarray(y, dtype=int)],
        sampler=lambda rng, k: list(rng.integers(0, n, k)),
        name=f"intrinsic({space.name})",
        vectorized=True,
        validation_tol=3 * tol,
    )


# ---------------------------------------------------------------------------
# partitions and curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Partition:
    times: np.ndarray

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("a partition needs at least the two endpoints")
        if t[0] != 0.0 or t[-1] != 1.0:
            raise ValueError("a partition must start at 0 and end at 1 exactly")
        if np.any(np.diff(t) <= 0):
            raise ValueError("partition times must be strictly increasing")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    def __len__(self):
        return self.times.size - 1

    @classmethod
    def uniform(cls, n: int):
        t = np.linspace(0.0, 1.0, n + 1)
        return cls(t)

    @classmethod
    def dyadic(cls, level: int):
        return cls.uniform(2**level)

    def refine(self, r: float) -> "Partition":
        if not 0 < r < 1:
            raise ValueError("refinement point must lie in (0, 1)")
        if np.any(self.times == r):
            raise ValueError(f"{r} is already a partition point")
        return Partition(np.sort(np.append(self.times, r)))


class SampledCurve:
    """A curve ``[0, 1] -> X`` together with the metric it is measured in.

    Either a callable ``func(t)`` or dense samples ``(times, points)`` with
    linear interpolation between samples (numeric points only).
    """

    def __init__(self, func, metric: MetricOracle, *, vectorized: bool = False, name: str = "curve"):
        self.func = func
        self.metric = metric
        self.vectorized = vectorized
        self.name = name

    @classmethod
    def from_samples(cls, times, points, metric: MetricOracle, name="sampled"):
        times = np.asarray(times, dtype=float)
        points = np.asarray(points, dtype=float)
        if times[0] != 0.0 or times[-1] != 1.0 or np.any(np.diff(times) <= 0):
            raise ValueError("sample times must increase strictly from 0 to 1")
        return cls(lambda t: np.interp(t, times, points), metric, vectorized=True, name=name)

    def __call__(self, t):
        return self.func(t)

    def at(self, ts):
        ts = np.asarray(ts, dtype=float)
        if self.vectorized:
            return self.func(ts)
        return [self.func(float(t)) for t in ts]

    def chords(self, times) -> np.ndarray:
        return self.metric.consecutive(self.at(times))

    def continuity_gap(self, level: int = 12) -> float:
        """Largest distance between neighbouring points of the ``2**level`` grid."""
        return float(np.max(self.chords(Partition.dyadic(level).times)))


def _as_times(delta) -> np.ndarray:
    return delta.times if isinstance(delta, Partition) else Partition(delta).times


def h_delta(curve: SampledCurve, delta) -> float:
    """``1/2 sum d(gamma(t_i), gamma(t_{i+1}))^2 / (t_{i+1} - t_i)``."""
    t = _as_times(delta)
    d = curve.chords(t)
    return 0.5 * float(np.sum(d * d / np.diff(t)))


def refine_check(curve: SampledCurve, delta, r: float) -> tuple[float, float]:
    """Discretised energy before and after inserting ``r`` into the partition."""
    delta = delta if isinstance(delta, Partition) else Partition(delta)
    return h_delta(curve, delta), h_delta(curve, delta.refine(r))


# ---------------------------------------------------------------------------
# supremum energy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnergyTrace:
    levels: list
    limit_estimate: float
    converged: bool
    method: str

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.levels])


def _richardson_limit(values) -> tuple[float, str]:
    """Add the geometric tail if increments shrink by roughly four per level."""
    v = np.asarray(values, dtype=float)
    if v.size >= 3:
        d1, d2 = v[-2] - v[-3], v[-1] - v[-2]
        if d1 > 0 and d2 >= 0 and 0.15 <= d2 / d1 <= 0.35:
            return float(v[-1] + d2 / 3.0), "richardson(4^-l)"
    return float(v[-1]), "last level"


def trace_from_values(sizes, values, blowup: float = 1e6, flat_rtol: float = 1e-4) -> EnergyTrace:
    """Turn a monotone sequence of discretised energies into a limit estimate.

    Flat: the last two relative increments are below ``flat_rtol``.  Blow-up:
    the last value exceeds ``blowup``, or the sequence is still growing
    geometrically (ratio >= 1.5 over the last three levels).  Blow-up gives
    ``inf``; this separates rough paths from AC2 ones at finite resolution, it
    does not decide membership.
    """
    levels = [(int(n), float(v)) for n, v in zip(sizes, values)]
    v = np.array([x for _, x in levels])
    scale = max(abs(v[-1]), np.finfo(float).tiny)
    incs = np.diff(v)
    flat = v[-1] == 0 or (incs.size >= 2 and np.all(np.abs(incs[-2:]) < flat_rtol * scale))
    if flat:
        lim, how = _richardson_limit(v)
        return EnergyTrace(levels, lim, True, how)
    ratios = v[-3:] / np.maximum(v[-4:-1], np.finfo(float).tiny) if v.size >= 4 else np.array([])
    if v[-1] > blowup or (ratios.size == 3 and np.all(ratios >= 1.5)):
        return EnergyTrace(levels, math.inf, False, "blow-up sentinel")
    lim, how = _richardson_limit(v)
    return EnergyTrace(levels, lim, False, how + " (not flat)")


def sup_energy(curve: SampledCurve, max_level: int, blowup: float = 1e6, flat_rtol: float = 1e-4) -> EnergyTrace:
    """Discretised energies on dyadic partitions ``2**l``, ``l = 0..max_level``."""
    if not 0 <= max_level <= 20:
        raise ValueError("max_level must be in [0, 20]")
    fine = Partition.dyadic(max_level).times
    pts = curve.at(fine)
    sizes, values = [], []
    for lev in range(max_level + 1):
        stride = 2 ** (max_level - lev)
        d = curve.metric.consecutive(pts[::stride])
        values.append(0.5 * float(np.sum(d * d)) * 2**lev)
        sizes.append(2**lev)
    return trace_from_values(sizes, values, blowup, flat_rtol)


# ---------------------------------------------------------------------------
# metric derivative and AC2 energy
# ---------------------------------------------------------------------------


class DerivativeEstimate(NamedTuple):
    value: float
    residual: float
    quotients: tuple


def metric_derivative(curve: SampledCurve, t: float, h_grid=DEFAULT_H_GRID, rtol: float = 1e-4) -> DerivativeEstimate:
    """Richardson-extrapolated difference quotients of ``d(gamma(t), gamma(t+h)) / |h|``.

    Symmetric quotients (error ``O(h^2)``) in the interior, one-sided ones
    (``O(h)``) where a step would leave ``[0, 1]``.
    """
    if not 0 <= t <= 1:
        raise ValueError("t must lie in [0, 1]")
    hs = np.asarray(h_grid, dtype=float)
    if hs.size < 2 or np.any(np.diff(hs) >= 0) or np.any(hs <= 0):
        raise ValueError("h_grid must be positive and strictly decreasing, length >= 2")
    d = curve.metric
    g0 = curve(t)
    qs, orders = [], []
    for h in hs:
        if t - h >= 0 and t + h <= 1:
            qs.append(d(curve(t - h), curve(t + h)) / (2 * h))
            orders.append(2)
        elif t + h <= 1:
            qs.append(d(g0, curve(t + h)) / h)
            orders.append(1)
        elif t - h >= 0:
            qs.append(d(curve(t - h), g0) / h)
            orders.append(1)
        else:
            raise ValueError(f"step {h} leaves [0, 1] on both sides of {t}")
    ext = []
    for k in range(1, len(qs)):
        p = orders[k] if orders[k] == orders[k - 1] else 1
        ratio = (hs[k - 1] / hs[k]) ** p
        ext.append(qs[k] + (qs[k] - qs[k - 1]) / (ratio - 1))
    value = ext[-1]
    residual = abs(ext[-1] - ext[-2]) if len(ext) >= 2 else abs(qs[-1] - qs[-2])
    if not math.isfinite(value) or residual > rtol * max(1.0, abs(value)):
        raise MetricDerivativeError(f"difference quotients at t={t} did not settle", tuple(qs))
    return DerivativeEstimate(max(value, 0.0), residual, tuple(qs))


class EnergyEstimate(NamedTuple):
    value: float
    quad_error: float
    diagnostics: dict


def _composite_gl(n_panels: int, n_nodes: int):
    x0, w0 = np.polynomial.legendre.leggauss(n_nodes)
    edges = np.linspace(0.0, 1.0, n_panels + 1)
    half = 0.5 * np.diff(edges)
    xs = (edges[:-1, None] + half[:, None] * (x0[None, :] + 1)).ravel()
    ws = (half[:, None] * w0[None, :]).ravel()
    return xs, ws


def ac2_energy(curve: SampledCurve, quad_points: int = 64, h_grid=DEFAULT_H_GRID) -> EnergyEstimate:
    """``1/2 int_0^1 |gamma'|^2`` by composite 16-point Gauss-Legendre.

    The quadrature error is estimated against the 8-point rule on the same
    panels.  Unsettled quotients mean the curve is not resolved as AC2: the
    value is ``inf`` and the diagnostics carry the failing node.
    """
    if quad_points < 16:
        raise ValueError("quad_points must be >= 16")
    panels = quad_points // 16
    scale = max(h_grid[0], 1e-300)

    def integrate(n_nodes):
        xs, ws = _composite_gl(panels, n_nodes)
        total = 0.0
        for x, w in zip(xs, ws):
            grid = np.asarray(h_grid) * min(1.0, max(x, 1 - x) / scale)
            total += w * metric_derivative(curve, float(x), grid).value ** 2
        return 0.5 * total

    try:
        hi = integrate(16)
        lo = integrate(8)
    except MetricDerivativeError as exc:
        return EnergyEstimate(math.inf, math.nan, {"error": str(exc), "quotients": exc.quotients})
    return EnergyEstimate(float(hi), float(abs(hi - lo)), {"panels": panels})


# ---------------------------------------------------------------------------
# the chord-measure construction behind H = H~
# ---------------------------------------------------------------------------


class NuOracle(NamedTuple):
    relative_energy: float
    dominates: bool
    max_violation: float


def proof_oracle_nu(curve: SampledCurve, N: int, slack: float = 1e-12) -> NuOracle:
    """Chord measure ``nu_N`` on the ``1/N`` grid against uniform ``mu_N``.

    ``relative_energy = int |d nu_N / d mu_N|^2 d mu_N = N sum chord_i^2``, and
    ``dominates`` checks ``d(gamma(s), gamma(t)) <= nu_N([s, t])`` for all grid pairs.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    grid = np.linspace(0.0, 1.0, N + 1)
    pts = curve.at(grid)
    chords = curve.metric.consecutive(pts)
    rel = N * float(np.sum(chords * chords))
    cum = np.concatenate([[0.0], np.cumsum(chords)])
    worst = -math.inf
    d = curve.metric
    for i in range(N):
        if d.vectorized:
            arr = np.asarray(pts)
            dist = np.asarray(d.distance(np.repeat(arr[i : i + 1], N - i, axis=0), arr[i + 1 :]), dtype=float)
        else:
            dist = np.array([d(pts[i], pts[j]) for j in range(i + 1, N + 1)])
        worst = max(worst, float(np.max(dist - (cum[i + 1 :] - cum[i]))))
    return NuOracle(rel, worst <= slack * max(1.0, cum[-1]), worst)


# ---------------------------------------------------------------------------
# catalogue
# ---------------------------------------------------------------------------


def linear_curve(v: float = 1.0, x0: float = 0.0, metric: MetricOracle | None = None) -> SampledCurve:
    return SampledCurve(lambda t: x0 + v * np.asarray(t, dtype=float), metric or absolute_metric(), vectorized=True, name=f"linear(v={v:g})")


def sine_curve(metric: MetricOracle | None = None) -> SampledCurve:
    """``sin(2 pi t) / (2 pi)``; speed ``|cos(2 pi t)|``, energy 1/4."""
    return SampledCurve(lambda t: np.sin(2 * np.pi * np.asarray(t, dtype=float)) / (2 * np.pi), metric or absolute_metric(), vectorized=True, name="sine")


def zigzag_curve(peak: float = 1 / 3, height: float = 1.0, metric: MetricOracle | None = None) -> SampledCurve:
    """Straight up to ``height`` at time ``peak``, straight back to 0 at time 1."""

    def f(t):
        t = np.asarray(t, dtype=float)
        return np.where(t <= peak, height * t / peak, height * (1 - t) / (1 - peak))

    return SampledCurve(f, metric or absolute_metric(), vectorized=True, name=f"zigzag(peak={peak:g})")


def constant_curve(c: float = 0.0, metric: MetricOracle | None = None) -> SampledCurve:
    return SampledCurve(lambda t: np.full(np.shape(t), c, dtype=float), metric or absolute_metric(), vectorized=True, name="constant")


def brownian_curve(seed: int, n_points: int = 2**14, sigma: float = 1.0, metric: MetricOracle | None = None) -> SampledCurve:
    """Piecewise-linear interpolation of a seeded Brownian path on ``n_points`` steps."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    inc = rng.standard_normal(n_points)
    path = np.concatenate([[0.0], np.cumsum(sigma * inc / math.sqrt(n_points))])
    return SampledCurve.from_samples(np.linspace(0, 1, n_points + 1), path, metric or absolute_metric(), name=f"brownian(seed={seed})")


def reparametrize(curve: SampledCurve, phi: Callable, name: str | None = None) -> SampledCurve:
    """``gamma o phi`` for a nondecreasing ``phi`` of ``[0, 1]`` onto itself."""
    return SampledCurve(lambda t: curve(phi(t)), curve.metric, vectorized=curve.vectorized, name=name or f"{curve.name}(phi)")


CURVES = {
    "linear": linear_curve,
    "sine": sine_curve,
    "zigzag": zigzag_curve,
    "constant": constant_curve,
    "brownian": brownian_curve,
}
