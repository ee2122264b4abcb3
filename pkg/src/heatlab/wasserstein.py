"""Finite-support measures on [0, 1], their quantile functions and W2 geometry.

A probability measure on ``[0, 1]`` is represented by its generalized inverse
distribution function ``g(s) = inf{a : mu([0, a]) > s}`` (``inf`` of the empty
set is 1).  For finitely supported measures ``g`` is a right-continuous step
function, ``W2(mu, nu) = ||g_mu - g_nu||_{L^2(0, 1)}``, and every integral below
closes exactly over the merged step grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .curves import EnergyTrace, MetricOracle, SampledCurve, sup_energy


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Atoms strictly increasing in ``[0, 1]`` with positive weights summing to 1."""

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        a = np.array(self.atoms, dtype=float)
        w = np.array(self.weights, dtype=float)
        if a.ndim != 1 or a.shape != w.shape or a.size == 0:
            raise ValueError("atoms and weights must be equal-length non-empty vectors")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(w))):
            raise ValueError("atoms and weights must be finite")
        if a[0] < 0 or a[-1] > 1:
            raise ValueError("atoms must lie in [0, 1]")
        if np.any(np.diff(a) <= 0):
            raise ValueError("atoms must be strictly increasing (use DiscreteMeasure.build)")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
        a.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "atoms", a)
        object.__setattr__(self, "weights", w)

    @classmethod
    def build(cls, atoms, weights=None):
        """Sort atoms, merge duplicates and default to uniform weights."""
        atoms = np.asarray(atoms, dtype=float)
        if weights is None:
            weights = np.full(atoms.size, 1.0 / atoms.size)
        weights = np.asarray(weights, dtype=float)
        order = np.argsort(atoms, kind="stable")
        atoms, weights = atoms[order], weights[order]
        uniq, inv = np.unique(atoms, return_inverse=True)
        merged = np.zeros(uniq.size)
        np.add.at(merged, inv, weights)
        return cls(uniq, merged)

    @classmethod
    def dirac(cls, c: float):
        return cls([c], [1.0])

    def __eq__(self, other):
        return (
            isinstance(other, DiscreteMeasure)
            and np.array_equal(self.atoms, other.atoms)
            and np.array_equal(self.weights, other.weights)
        )

    def __len__(self):
        return self.atoms.size


@dataclass(frozen=True, eq=False)
class QuantileFn:
    """Non-decreasing step map ``[0, 1] -> [0, 1]``.

    ``values[k]`` is taken on a piece of length ``widths[k]``; pieces are laid out
    left to right and the function is right-continuous.
    """

    values: np.ndarray
    widths: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        w = np.array(self.widths, dtype=float)
        if v.shape != w.shape or v.ndim != 1 or v.size == 0:
            raise ValueError("values and widths must be equal-length non-empty vectors")
        if np.any(np.diff(v) < 0):
            raise ValueError("quantile values must be non-decreasing")
        if v[0] < 0 or v[-1] > 1:
            raise ValueError("quantile values must lie in [0, 1]")
        if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("piece widths must be positive and sum to 1")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "widths", w)

    @property
    def breakpoints(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.widths)])

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        idx = np.searchsorted(self.breakpoints[1:], s, side="right")
        out = self.values[np.minimum(idx, self.values.size - 1)]
        # inf of the empty set
        out = np.where(s >= 1.0, 1.0, out)
        return out if out.ndim else float(out)

    def to_measure(self) -> DiscreteMeasure:
        v, w = self.values, self.widths
        keep = np.concatenate([[True], np.diff(v) > 0])
        if keep.all():
            return DiscreteMeasure(v.copy(), w.copy())
        groups = np.cumsum(keep) - 1
        merged = np.zeros(int(groups[-1]) + 1)
        np.add.at(merged, groups, w)
        return DiscreteMeasure(v[keep], merged)


def quantile_of(mu: DiscreteMeasure) -> QuantileFn:
    """Generalized inverse distribution function of ``mu``."""
    return QuantileFn(mu.atoms.copy(), mu.weights.copy())


def _common_pieces(*qs: QuantileFn):
    """Merge breakpoint grids; return piece lengths and each quantile's value per piece."""
    inner = np.concatenate([q.breakpoints[1:-1] for q in qs])
    inner = inner[(inner > 0) & (inner < 1)]
    # the last cumulative sum may round to 1 +- ulp; the ends are pinned exactly
    grid = np.unique(np.concatenate([[0.0, 1.0], inner]))
    lengths = np.diff(grid)
    keep = lengths > 0
    mids = 0.5 * (grid[:-1] + grid[1:])[keep]
    return lengths[keep], [q(mids) for q in qs]


def w2(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """``||g_mu - g_nu||_{L^2}`` integrated exactly over the merged step grid."""
    lengths, (g, h) = _common_pieces(quantile_of(mu), quantile_of(nu))
    return math.sqrt(float(np.sum(lengths * (g - h) ** 2)))


def w2_lp_oracle(mu: DiscreteMeasure, nu: DiscreteMeasure, max_support: int = 12) -> float:
    """Quadratic transport cost of the north-west-corner coupling of sorted supports.

    For convex costs on the line the monotone coupling is optimal, so this is
    the exact optimum of the small transport program.  It walks masses
    directly and never forms a quantile function.
    """
    if len(mu) > max_support or len(nu) > max_support:
        raise ValueError(f"support size exceeds {max_support}")
    ox, oy = np.argsort(mu.atoms), np.argsort(nu.atoms)
    x, p = mu.atoms[ox], list(mu.weights[ox])
    y, q = nu.atoms[oy], list(nu.weights[oy])
    i = j = 0
    cost = 0.0
    while i < len(p) and j < len(q):
        move = min(p[i], q[j])
        cost += move * (x[i] - y[j]) ** 2
        p[i] -= move
        q[j] -= move
        if p[i] <= q[j]:
            i += 1
        else:
            j += 1
    return math.sqrt(cost)


def coupling_matrix(mu: DiscreteMeasure, nu: DiscreteMeasure) -> np.ndarray:
    """The north-west-corner coupling as a dense matrix (rows: atoms of ``mu``)."""
    P = np.zeros((len(mu), len(nu)))
    p, q = list(mu.weights), list(nu.weights)
    i = j = 0
    while i < len(p) and j < len(q):
        move = min(p[i], q[j])
        P[i, j] += move
        p[i] -= move
        q[j] -= move
        if p[i] <= q[j]:
            i += 1
        else:
            j += 1
    return P


def displacement_path(mu0: DiscreteMeasure, mu1: DiscreteMeasure, t: float) -> DiscreteMeasure:
    """Measure with quantile ``(1 - t) g0 + t g1``: the constant-speed W2 geodesic."""
    if not 0 <= t <= 1:
        raise ValueError("t must lie in [0, 1]")
    if t == 0:
        return mu0
    if t == 1:
        return mu1
    lengths, (g0, g1) = _common_pieces(quantile_of(mu0), quantile_of(mu1))
    vals = np.clip((1 - t) * g0 + t * g1, 0.0, 1.0)
    vals = np.maximum.accumulate(vals)
    return QuantileFn(vals, lengths / lengths.sum()).to_measure()


def wasserstein_metric() -> MetricOracle:
    def sample(rng, n):
        out = []
        for _ in range(n):
            k = int(rng.integers(1, 7))
            out.append(DiscreteMeasure.build(rng.uniform(0, 1, k), rng.dirichlet(np.ones(k))))
        return out

    return MetricOracle(w2, sampler=sample, name="W2", vectorized=False)


def measure_curve(path: Callable[[float], DiscreteMeasure], name: str = "measure path") -> SampledCurve:
    return SampledCurve(path, wasserstein_metric(), name=name)


@dataclass(frozen=True)
class PathEnergy:
    trace: EnergyTrace
    double_integral: float | None

    @property
    def sup_form(self) -> float:
        return self.trace.limit_estimate


def quantile_double_integral(path: Callable[[float], DiscreteMeasure], panels: int = 4, h: float = 1e-3) -> float:
    """``1/2 int_0^1 int_0^1 |d/dt g_t(s)|^2 ds dt`` for quantile-smooth paths.

    ``d/dt`` is a fourth-order central difference of the quantile values on
    the common step grid; the ``s`` integral is exact over that grid and the
    ``t`` integral is composite 16-point Gauss-Legendre.
    """
    x0, w0 = np.polynomial.legendre.leggauss(16)
    edges = np.linspace(0, 1, panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        for x, w in zip(lo + half * (x0 + 1), half * w0):
            hh = min(h, x / 2, (1 - x) / 2)
            qs = [quantile_of(path(float(x + k * hh))) for k in (-2, -1, 1, 2)]
            lengths, (gm2, gm1, gp1, gp2) = _common_pieces(*qs)
            dg = (gm2 - 8 * gm1 + 8 * gp1 - gp2) / (12 * hh)
            total += w * float(np.sum(lengths * dg * dg))
    return float(0.5 * total)


def measure_path_energy(
    path: Callable[[float], DiscreteMeasure],
    max_level: int,
    quantile_smooth: bool = False,
) -> PathEnergy:
    """Dyadic sup-energy of a measure path in W2, optionally with the quantile double integral."""
    trace = sup_energy(measure_curve(path), max_level)
    di = quantile_double_integral(path) if quantile_smooth else None
    return PathEnergy(trace, di)


def smooth_staircase_path(n_atoms: int = 20) -> Callable[[float], DiscreteMeasure]:
    """Equal-weight atoms at ``g_t(s_k)`` with ``g_t(s) = s (1 + t (1 - s))``, ``s_k`` cell midpoints."""
    s = (np.arange(n_atoms) + 0.5) / n_atoms

    def path(t):
        return DiscreteMeasure.build(s * (1 + t * (1 - s)))

    return path


def staircase_exact_energy(n_atoms: int = 20) -> float:
    """Closed form of the staircase energy: ``1/2 mean_k (s_k (1 - s_k))^2``."""
    s = (np.arange(n_atoms) + 0.5) / n_atoms
    return 0.5 * float(np.mean((s * (1 - s)) ** 2))
