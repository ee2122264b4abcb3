"""Gaussian upper bounds for multi-time probabilities and the short-time limit.

On :class:`~heatlab.mms.AnalyticSpace1D` the form is local, so the two-set and
chained bounds are theorems and :func:`two_set_bound` / :func:`fdd_bound` are
expected to hold.  On a :class:`~heatlab.mms.FiniteWeightedSpace` the form is a
pure jump form: the same quantities are computed and reported, but a violation
there is information, not a bug.  :func:`locality_negative_control` pins the
two-point counterexample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotInD0Error
from .intrinsic import intrinsic_distance_sets
from .mms import (
    AnalyticSpace1D,
    FiniteWeightedSpace,
    as_field,
    energy,
    i_functional,
    in_D0,
    kernel_pt,
    log_pt_mass,
    mass_into,
    pt_mass,
    semigroup_apply,
)

NUMERIC_SLACK = 1e-10
_GL_NODES = 24


@dataclass(frozen=True)
class BoundCheck:
    lhs: float
    rhs: float
    context: dict = field(default_factory=dict)
    numeric_slack: float = NUMERIC_SLACK

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.margin >= -self.numeric_slack


@dataclass(frozen=True)
class VaradhanFit:
    samples: list
    extrapolated_limit: float
    target: float
    method: str
    coefficients: tuple

    @property
    def relative_error(self) -> float:
        if self.target == 0:
            return abs(self.extrapolated_limit)
        return abs(self.extrapolated_limit - self.target) / abs(self.target)


def set_distance(space, A, B, tol: float = 1e-6) -> float:
    if isinstance(space, FiniteWeightedSpace):
        return intrinsic_distance_sets(space, A, B, tol).value
    return space.distance(A, B)


def _gaussian_factor(d2_over_t: float) -> float:
    return 0.0 if math.isinf(d2_over_t) else math.exp(-0.5 * d2_over_t)


def two_set_bound(space, A, B, s: float, tol: float = 1e-6) -> BoundCheck:
    """``P_s(A, B) <= sqrt(m(A) m(B)) exp(-d(A, B)^2 / (2 s))``."""
    if not s > 0:
        raise ValueError("s must be positive")
    d = set_distance(space, A, B, tol)
    lhs = pt_mass(space, A, B, s)
    rhs = math.sqrt(space.mass(A) * space.mass(B)) * _gaussian_factor(d * d / s)
    return BoundCheck(lhs, rhs, {"space": space.name, "A": A, "B": B, "s": s, "d": d})


def _check_chain(times, sets):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise ValueError("need at least two times")
    if len(sets) != times.size:
        raise ValueError(f"{times.size} times but {len(sets)} sets")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    if times[0] < 0 or times[-1] > 1:
        raise ValueError("times must lie in [0, 1]")
    return times


def _gl_nodes(space: AnalyticSpace1D, A, dt: float):
    """Composite Gauss-Legendre nodes on ``A`` with panels at most half a kernel width."""
    A = space.as_set(A)
    x0, w0 = np.polynomial.legendre.leggauss(_GL_NODES)
    width = 0.5 * space.sigma * math.sqrt(dt)
    xs, ws = [], []
    for a, b in A.intervals:
        if b == a:
            continue
        k = max(1, math.ceil((b - a) / width))
        edges = np.linspace(a, b, k + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            half = 0.5 * (hi - lo)
            xs.append(lo + half * (x0 + 1))
            ws.append(half * w0)
    if not xs:
        return np.empty(0), np.empty(0)
    return np.concatenate(xs), np.concatenate(ws)


def fdd_mass(space, times, sets, scale: float = 1.0) -> float:
    """Probability that the stationary process visits ``A_i`` at ``scale * t_i`` for all i.

    The finite backend alternates indicator masks with exact semigroup steps.
    The analytic backend integrates the last step in closed form and the rest
    by composite Gauss-Legendre quadrature on each set.
    """
    times = _check_chain(times, sets)
    if not scale > 0:
        raise ValueError("scale must be positive")
    steps = scale * np.diff(times)
    if isinstance(space, FiniteWeightedSpace):
        masks = [space.indicator(A) for A in sets]
        if not all(mk.any() for mk in masks):
            return 0.0
        v = masks[-1]
        for i in range(len(steps) - 1, -1, -1):
            v = masks[i] * semigroup_apply(space, float(steps[i]), v)
        return float(np.sum(v * space.m))

    sets = [space.as_set(A) for A in sets]
    if not all(sets):
        return 0.0
    if len(steps) == 1:
        return pt_mass(space, sets[0], sets[1], float(steps[0]))
    n = len(steps)
    # nodes on A_i are resolved at the finer of the two adjacent time steps
    grids = []
    for i in range(n):
        dt = steps[i] if i == 0 else min(steps[i - 1], steps[i])
        grids.append(_gl_nodes(space, sets[i], float(dt)))
    x, _ = grids[n - 1]
    g = mass_into(space, x, sets[n], float(steps[n - 1]))
    for i in range(n - 2, -1, -1):
        x, _ = grids[i]
        y, wy = grids[i + 1]
        K = kernel_pt(space, x[:, None], y[None, :], float(steps[i]))
        g = K @ (wy * g)
    _, w = grids[0]
    return float(np.sum(w * g))


def chain_exponent(space, times, sets, scale: float = 1.0, tol: float = 1e-6) -> float:
    """``1/2 sum d(A_i, A_{i+1})^2 / (scale * (t_{i+1} - t_i))``."""
    times = _check_chain(times, sets)
    total = 0.0
    for i in range(len(sets) - 1):
        d = set_distance(space, sets[i], sets[i + 1], tol)
        if math.isinf(d):
            return math.inf
        total += d * d / (scale * (times[i + 1] - times[i]))
    return 0.5 * total


def fdd_bound(space, times, sets, scale: float = 1.0, tol: float = 1e-6) -> BoundCheck:
    """Chained bound; intermediate set masses do not enter the prefactor."""
    expo = chain_exponent(space, times, sets, scale, tol)
    lhs = fdd_mass(space, times, sets, scale)
    pref = math.sqrt(space.mass(sets[0]) * space.mass(sets[-1]))
    rhs = 0.0 if math.isinf(expo) else pref * math.exp(-expo)
    ctx = {"space": space.name, "times": list(map(float, times)), "sets": sets, "scale": scale, "exponent": expo}
    return BoundCheck(lhs, rhs, ctx)


def davies_lemma_check(space: FiniteWeightedSpace, omega, f, t: float, alpha: float) -> BoundCheck:
    """Weighted L2 growth ``||e^{a w} T_t f|| <= e^{a^2 t / 2} ||e^{a w} f||``.

    Recorded, never asserted: on a jump form the estimate can fail once
    ``|alpha|`` times the largest edge increment of ``omega`` is of order one.
    """
    omega = as_field(space, omega)
    f = as_field(space, f)
    if not in_D0(space, omega, 1e-9):
        raise NotInD0Error("omega must have energy density at most 1")
    if np.any(f < 0):
        raise ValueError("f must be nonnegative")
    if t < 0:
        raise ValueError("t must be nonnegative")
    weight = np.exp(alpha * omega)
    lhs = space.norm(weight * semigroup_apply(space, t, f))
    rhs = math.exp(0.5 * alpha * alpha * t) * space.norm(weight * f)
    increments = np.abs(omega[:, None] - omega[None, :])[space.w > 0]
    ctx = {"space": space.name, "t": t, "alpha": alpha, "alpha_jump": abs(alpha) * float(increments.max())}
    return BoundCheck(lhs, rhs, ctx)


def argh_lemma_residual(space: FiniteWeightedSpace, omega, u, alpha: float) -> float:
    """``alpha^2 I_omega(u^2 e^{2 alpha omega}) + 2 E(e^{2 alpha omega} u, u)``; >= 0 for local forms."""
    omega = as_field(space, omega)
    u = as_field(space, u)
    e2 = np.exp(2 * alpha * omega)
    return alpha * alpha * i_functional(space, omega, omega, u * u * e2) + 2 * energy(space, e2 * u, u)


def varadhan_estimate(space: AnalyticSpace1D, A, B, t_grid) -> VaradhanFit:
    """Samples of ``t log P_t(A, B)`` and their extrapolation to ``t -> 0``.

    The three smallest times are fitted exactly by ``c0 + c1 t + c2 t log t``,
    the form of the expansion for Gaussian kernels; ``c0`` is the estimate.
    """
    if isinstance(space, FiniteWeightedSpace):
        raise TypeError("the short-time limit is trivial for jump forms; use an analytic space")
    ts = np.asarray(t_grid, dtype=float)
    if np.any(ts <= 0):
        raise ValueError("all times must be positive")
    if ts.size < 3:
        raise ValueError("need at least three times")
    if np.any(np.diff(ts) >= 0):
        raise ValueError("t_grid must be strictly decreasing")
    samples = [(float(t), float(t * log_pt_mass(space, A, B, float(t)))) for t in ts]
    tail = np.array(samples[-3:])
    t3 = tail[:, 0]
    M = np.column_stack([np.ones(3), t3, t3 * np.log(t3)])
    coef = np.linalg.solve(M, tail[:, 1])
    d = space.distance(A, B)
    return VaradhanFit(samples, float(coef[0]), -0.5 * d * d, "exact 3-point fit c0 + c1 t + c2 t log t", tuple(map(float, coef)))


def locality_negative_control(s: float = 0.05) -> BoundCheck:
    """Two-set bound on the two-point space; expected to FAIL at small ``s``.

    ``P_s({a}, {b}) = (1 - e^{-4s}) / 4`` decays linearly in ``s`` while the
    Gaussian bound with ``d = 1/sqrt(2)`` decays like ``e^{-1/(4s)}``.
    """
    check = two_set_bound(FiniteWeightedSpace.two_state(), [0], [1], s)
    return BoundCheck(check.lhs, check.rhs, {**check.context, "expected_violation": True})
