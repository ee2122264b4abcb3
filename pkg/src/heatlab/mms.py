"""Model spaces, the Dirichlet-form calculus on them, and exact semigroup evaluation.

Two backends live here:

* :class:`FiniteWeightedSpace` -- a finite state set with a probability measure ``m``
  and symmetric conductances ``w``.  The form is the graph form
  ``E(f, g) = 1/2 sum_{x,y} w(x,y) (f(x)-f(y)) (g(x)-g(y))``.  It is a genuine
  conservative Dirichlet form but it is *non-local* (pure jump), which the
  davies module exploits as a negative control.
* :class:`AnalyticSpace1D` -- Brownian motion with constant diffusion coefficient
  ``sigma`` on the free line, the circle ``R/Z`` or the reflecting interval
  ``[0, 1]``.  Transition densities are Gaussian image series, so every
  quantity is available in closed form.  This backend is local.

Carre du champ on the graph form
--------------------------------
Expanding ``I(f, f; h) = 2 E(fh, f) - E(f^2, h)`` edge by edge, the integrand of
each ordered pair ``(x, y)`` is ``w/2 * (h(x) + h(y)) * (f(x) - f(y))^2``, so by
symmetry of ``w``::

    I(f, f; h) = sum_x h(x) sum_y w(x,y) (f(x) - f(y))^2 = sum_x h(x) Gamma(f)(x) m(x)

with ``Gamma(f)(x) = (1/m(x)) sum_y w(x,y) (f(x) - f(y))^2``.  Because
``||h||_L1 = sum |h| m`` the unit-ball condition on ``f`` reduces to
``max_x Gamma(f)(x) <= 1``.

Path-graph calibration
----------------------
:meth:`FiniteWeightedSpace.path_graph` places ``n`` cell-centred vertices on
``[0, 1]`` with spacing ``h = 1/n``, uniform mass ``1/n`` and nearest-neighbour
conductance ``w = sigma^2 / (2h)``.  For smooth ``f`` this gives
``Gamma(f)(x) -> sigma^2 f'(x)^2`` at interior vertices and
``E(f, f) -> 1/2 int sigma^2 f'^2 dx``, i.e. the form of the analytic
reflecting interval with the same ``sigma``.  The intrinsic distance between the
end vertices is then ``(n-1)/(n sigma)`` up to boundary effects.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import erfcx, logsumexp, ndtr

from .errors import DimensionMismatch, KernelTruncationError

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)
_KINDS = ("reflecting_interval", "circle", "free_line")


class EmptySetWarning(UserWarning):
    """pt_mass was called with an empty set; the result is 0 by convention."""


# ---------------------------------------------------------------------------
# finite backend
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FiniteWeightedSpace:
    """Finite state space with probability weights ``m`` and conductances ``w``.

    The spectral decomposition of the m-symmetrised generator is computed
    eagerly, so instances are immutable and safe to share between threads.
    """

    m: np.ndarray
    w: np.ndarray
    name: str = "finite"
    _evals: np.ndarray = field(init=False, repr=False)
    _evecs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        w = np.array(self.w, dtype=float)
        if m.ndim != 1 or m.size < 1:
            raise ValueError("m must be a non-empty vector")
        if w.shape != (m.size, m.size):
            raise ValueError(f"w must be {m.size}x{m.size}, got {w.shape}")
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(w))):
            raise ValueError("m and w must be finite")
        if np.any(m <= 0):
            raise ValueError("every state needs positive mass")
        if abs(m.sum() - 1.0) > 1e-12:
            raise ValueError(f"masses must sum to 1, got {m.sum()!r}")
        if np.any(w < 0):
            raise ValueError("conductances must be nonnegative")
        if not np.array_equal(w, w.T):
            raise ValueError("conductance table must be exactly symmetric")
        if np.any(np.diag(w) != 0):
            raise ValueError("conductance table must have zero diagonal")
        if not _connected(w):
            raise ValueError("conductance graph is not connected")
        m.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "w", w)

        # S = M^{-1/2} (W - D) M^{-1/2} is symmetric and similar to L = M^{-1}(W - D)
        r = 1.0 / np.sqrt(m)
        lap = w - np.diag(w.sum(axis=1))
        evals, evecs = np.linalg.eigh(r[:, None] * lap * r[None, :])
        evals = np.minimum(evals, 0.0)
        evals.setflags(write=False)
        evecs.setflags(write=False)
        object.__setattr__(self, "_evals", evals)
        object.__setattr__(self, "_evecs", evecs)

    @property
    def n(self) -> int:
        return self.m.size

    @property
    def spectrum(self) -> np.ndarray:
        """Eigenvalues of the generator, ascending (all <= 0)."""
        return self._evals

    @classmethod
    def from_edges(cls, m: Sequence[float], edges: Iterable[Sequence[float]], name="finite"):
        m = np.asarray(m, dtype=float)
        w = np.zeros((m.size, m.size))
        for x, y, c in edges:
            x, y = int(x), int(y)
            if x == y:
                raise ValueError(f"self-loop at state {x}")
            w[x, y] += c
            w[y, x] += c
        return cls(m, w, name=name)

    @classmethod
    def two_state(cls, conductance=1.0):
        """The two-point space with ``m = (1/2, 1/2)`` and a single edge."""
        return cls.from_edges([0.5, 0.5], [(0, 1, conductance)], name="two_state")

    @classmethod
    def path_graph(cls, n: int, sigma: float = 1.0):
        """Cell-centred path graph calibrated to the reflecting interval with ``sigma``."""
        if n < 2:
            raise ValueError("path graph needs at least two vertices")
        c = sigma**2 * n / 2.0
        edges = [(i, i + 1, c) for i in range(n - 1)]
        return cls.from_edges(np.full(n, 1.0 / n), edges, name=f"path{n}")

    def mass(self, A) -> float:
        idx = self.as_index(A)
        return float(self.m[idx].sum())

    def as_index(self, A) -> np.ndarray:
        idx = np.unique(np.asarray(list(A), dtype=int))
        if idx.size and (idx[0] < 0 or idx[-1] >= self.n):
            raise IndexError(f"state index out of range for a {self.n}-state space")
        return idx

    def indicator(self, A) -> np.ndarray:
        out = np.zeros(self.n)
        out[self.as_index(A)] = 1.0
        return out

    def inner(self, f, g) -> float:
        """L^2(m) inner product."""
        f, g = as_field(self, f), as_field(self, g)
        return float(np.sum(f * g * self.m))

    def norm(self, f) -> float:
        f = as_field(self, f)
        return math.sqrt(float(np.sum(f * f * self.m)))

    def generator(self) -> np.ndarray:
        """Dense matrix of ``Lf(x) = (1/m(x)) sum_y w(x,y)(f(y) - f(x))``."""
        lap = self.w - np.diag(self.w.sum(axis=1))
        return lap / self.m[:, None]


def _connected(w: np.ndarray) -> bool:
    n = w.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    stack = [0]
    while stack:
        x = stack.pop()
        for y in np.nonzero(w[x] > 0)[0]:
            if not seen[y]:
                seen[y] = True
                stack.append(y)
    return bool(seen.all())


def as_field(space: FiniteWeightedSpace, f) -> np.ndarray:
    """Validate ``f`` as a real field on ``space`` and return it as an array."""
    arr = np.asarray(f, dtype=float)
    if arr.shape != (space.n,):
        raise DimensionMismatch(f"field of shape {arr.shape} on a {space.n}-state space")
    if not np.all(np.isfinite(arr)):
        raise ValueError("field values must be finite")
    return arr


def energy(space: FiniteWeightedSpace, f, g) -> float:
    """Graph Dirichlet form ``1/2 sum w(x,y) (f(x)-f(y)) (g(x)-g(y))``."""
    f, g = as_field(space, f), as_field(space, g)
    df = f[:, None] - f[None, :]
    dg = g[:, None] - g[None, :]
    return 0.5 * float(np.sum(space.w * df * dg))


def i_functional(space: FiniteWeightedSpace, f, g, h) -> float:
    """``I(f, g; h) = E(gh, f) + E(fh, g) - E(fg, h)``, literally."""
    f, g, h = as_field(space, f), as_field(space, g), as_field(space, h)
    return energy(space, g * h, f) + energy(space, f * h, g) - energy(space, f * g, h)


def gamma_density(space: FiniteWeightedSpace, f) -> np.ndarray:
    """Energy density with ``I(f, f; h) = sum_x h(x) Gamma(f)(x) m(x)``."""
    f = as_field(space, f)
    df = f[:, None] - f[None, :]
    return np.sum(space.w * df * df, axis=1) / space.m


def in_D0(space: FiniteWeightedSpace, f, tol: float = 0.0) -> bool:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return bool(np.max(gamma_density(space, f)) <= 1.0 + tol)


def semigroup_apply(space: FiniteWeightedSpace, t: float, f) -> np.ndarray:
    """``T_t f = exp(tL) f`` through the cached spectral decomposition."""
    if t < 0:
        raise ValueError(f"negative time {t}")
    f = as_field(space, f)
    if t == 0:
        return f.copy()
    sq = np.sqrt(space.m)
    U = space._evecs
    coeff = U.T @ (sq * f)
    return (U @ (np.exp(t * space._evals) * coeff)) / sq


# ---------------------------------------------------------------------------
# analytic backend
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelSeriesParams:
    max_images: int = 64
    tail_tol: float = 1e-14

    def __post_init__(self):
        if self.max_images < 1:
            raise ValueError("max_images must be >= 1")
        if not self.tail_tol > 0:
            raise ValueError("tail_tol must be positive")


DEFAULT_SERIES = KernelSeriesParams()


@dataclass(frozen=True)
class IntervalSet:
    """Finite union of closed intervals, stored merged and sorted."""

    intervals: tuple

    def __init__(self, intervals):
        items = []
        for a, b in intervals:
            a, b = float(a), float(b)
            if not (math.isfinite(a) and math.isfinite(b)):
                raise ValueError("interval endpoints must be finite")
            if b < a:
                raise ValueError(f"interval [{a}, {b}] is reversed")
            items.append((a, b))
        items.sort()
        merged = []
        for a, b in items:
            if merged and a <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], b))
            else:
                merged.append((a, b))
        object.__setattr__(self, "intervals", tuple(merged))

    @classmethod
    def coerce(cls, A):
        if isinstance(A, IntervalSet):
            return A
        A = list(A)
        if len(A) == 2 and all(np.isscalar(v) for v in A):
            return cls([tuple(A)])
        return cls(A)

    def __bool__(self):
        return bool(self.intervals)

    @property
    def length(self) -> float:
        return float(sum(b - a for a, b in self.intervals))

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=bool)
        for a, b in self.intervals:
            out |= (x >= a) & (x <= b)
        return out


@dataclass(frozen=True)
class AnalyticSpace1D:
    """Brownian motion ``x + sigma B_t`` on the line, the unit circle or ``[0, 1]``."""

    kind: str = "reflecting_interval"
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError("sigma must be positive and finite")

    @property
    def name(self) -> str:
        return f"{self.kind}(sigma={self.sigma:g})"

    @property
    def bounded(self) -> bool:
        return self.kind != "free_line"

    def as_set(self, A) -> IntervalSet:
        A = IntervalSet.coerce(A)
        if self.bounded:
            for a, b in A.intervals:
                if a < 0 or b > 1:
                    raise ValueError(f"interval [{a}, {b}] leaves the domain [0, 1]")
        return A

    def mass(self, A) -> float:
        return self.as_set(A).length

    def gap(self, A, B) -> float:
        """Euclidean (or circular) gap between two interval unions."""
        A, B = self.as_set(A), self.as_set(B)
        if not A or not B:
            return math.inf
        best = math.inf
        for a, b in A.intervals:
            for c, d in B.intervals:
                if a <= d and c <= b:
                    return 0.0
                for x in (a, b):
                    for y in (c, d):
                        r = abs(x - y)
                        if self.kind == "circle":
                            r = min(r, 1.0 - r)
                        best = min(best, r)
        return best

    def distance(self, A, B) -> float:
        """Intrinsic distance between sets: the gap divided by ``sigma``."""
        return self.gap(A, B) / self.sigma

    def fold(self, x):
        """Map free-line positions onto the domain (reflection or wrapping)."""
        x = np.asarray(x, dtype=float)
        if self.kind == "circle":
            return np.mod(x, 1.0)
        if self.kind == "reflecting_interval":
            y = np.mod(x, 2.0)
            return np.where(y > 1.0, 2.0 - y, y)
        return x


def _images(space: AnalyticSpace1D, variance: float, params: KernelSeriesParams):
    """Return ``[(sx, shift), ...]`` with ``p(x, y) = sum phi(y - sx*x - shift)``.

    The truncation ``|k| <= K`` is the smallest K whose discarded-image tail bound
    is below ``params.tail_tol``.
    """
    if space.kind == "free_line":
        return [(1.0, 0.0)]
    L, fam = (2.0, 2) if space.kind == "reflecting_interval" else (1.0, 1)
    # for |k| >= K+1 each image sits at distance >= L*(|k|-1) >= L*K; successive
    # terms shrink at least geometrically with ratio r
    bound = math.inf
    for K in range(1, params.max_images + 1):
        a = L * K
        r = math.exp(-L * (2 * a + L) / (2 * variance))
        bound = 2 * fam * math.exp(-a * a / (2 * variance)) / math.sqrt(2 * math.pi * variance) / (1 - r)
        if bound <= params.tail_tol:
            break
    else:
        raise KernelTruncationError(
            f"image tail bound {bound:.3e} exceeds tail_tol={params.tail_tol:g} "
            f"with max_images={params.max_images}",
            tail_bound=bound,
        )
    out = []
    for k in range(-K, K + 1):
        out.append((1.0, -L * k))
        if space.kind == "reflecting_interval":
            out.append((-1.0, -L * k))
    return out


def kernel_pt(space: AnalyticSpace1D, x, y, t: float, params: KernelSeriesParams = DEFAULT_SERIES):
    """Transition density ``p_t(x, y)``; broadcasts over ``x`` and ``y``."""
    if not t > 0:
        raise ValueError(f"time must be positive, got {t}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    v = space.sigma**2 * t
    out = np.zeros(np.broadcast(x, y).shape)
    for sx, h in _images(space, v, params):
        u = y - sx * x - h
        out += np.exp(-u * u / (2 * v))
    out /= math.sqrt(2 * math.pi * v)
    return out if out.ndim else float(out)


def _iterated_tail(z):
    """``phi(z) - z * (1 - Phi(z))`` for z >= 0, without cancellation for large z."""
    z = np.asarray(z, dtype=float)
    bracket = 1.0 / _SQRT_2PI - 0.5 * z * erfcx(z / _SQRT2)
    return np.exp(-0.5 * z * z) * bracket


def _log_iterated_tail(z):
    z = np.asarray(z, dtype=float)
    big = z > 50.0
    zs = np.where(big, 1.0, z)
    with np.errstate(divide="ignore"):
        small_val = np.log(1.0 / _SQRT_2PI - 0.5 * zs * erfcx(zs / _SQRT2))
    zb = np.where(big, z, 100.0)
    iz2 = 1.0 / (zb * zb)
    series = 1 - 3 * iz2 + 15 * iz2**2 - 105 * iz2**3 + 945 * iz2**4
    big_val = -math.log(_SQRT_2PI) + np.log(iz2) + np.log(series)
    return -0.5 * z * z + np.where(big, big_val, small_val)


def _overlap(a, b, c, d, h) -> float:
    """Lebesgue measure of ``{x in [a, b] : x + h in [c, d]}``."""
    return max(0.0, min(b, d - h) - max(a, c - h))


def _mass_terms(space, A: IntervalSet, B: IntervalSet, t, params):
    """Exact decomposition of ``P_t(A, B)`` into an overlap part and corner terms.

    Each image contributes ``int_I int_J phi(y - x - h)``, whose second
    antiderivative is ``u+ + s*g(|u|/s)`` with ``g`` the iterated Gaussian tail.
    The piecewise-linear ``u+`` parts sum to an interval overlap, so they are
    evaluated separately and exactly.
    """
    v = space.sigma**2 * t
    s = math.sqrt(v)
    overlap = 0.0
    us, signs = [], []
    for sx, h in _images(space, v, params):
        for a, b in A.intervals:
            lo, hi = (a, b) if sx > 0 else (-b, -a)
            for c, d in B.intervals:
                overlap += _overlap(lo, hi, c, d, h)
                us.extend((d - h - lo, d - h - hi, c - h - lo, c - h - hi))
                signs.extend((1.0, -1.0, -1.0, 1.0))
    return overlap, s, np.abs(np.array(us)) / s, np.array(signs)


def _finite_sets(space, A, B):
    return space.indicator(A), space.indicator(B)


def pt_mass(space, A, B, t: float, params: KernelSeriesParams = DEFAULT_SERIES) -> float:
    """``P_t(A, B) = int_A T_t 1_B dm`` on either backend.

    An empty ``A`` or ``B`` gives 0 and emits :class:`EmptySetWarning`.
    """
    if not t > 0:
        raise ValueError(f"time must be positive, got {t}")
    if isinstance(space, FiniteWeightedSpace):
        ia, ib = _finite_sets(space, A, B)
        if not ia.any() or not ib.any():
            warnings.warn("empty set in pt_mass", EmptySetWarning, stacklevel=2)
            return 0.0
        return space.inner(ia, semigroup_apply(space, t, ib))
    A, B = space.as_set(A), space.as_set(B)
    if not A or not B:
        warnings.warn("empty set in pt_mass", EmptySetWarning, stacklevel=2)
        return 0.0
    overlap, s, z, signs = _mass_terms(space, A, B, t, params)
    corners = s * float(np.sum(signs * _iterated_tail(z)))
    return max(overlap + corners, 0.0)


def log_pt_mass(space: AnalyticSpace1D, A, B, t: float, params: KernelSeriesParams = DEFAULT_SERIES) -> float:
    """``log P_t(A, B)`` evaluated entirely in the log domain (no underflow)."""
    if not t > 0:
        raise ValueError(f"time must be positive, got {t}")
    A, B = space.as_set(A), space.as_set(B)
    if not A or not B:
        return -math.inf
    overlap, s, z, signs = _mass_terms(space, A, B, t, params)
    logs = math.log(s) + _log_iterated_tail(z)
    if overlap > 0:
        logs = np.append(logs, math.log(overlap))
        signs = np.append(signs, 1.0)
    val, sign = logsumexp(logs, b=signs, return_sign=True)
    return float(val) if sign > 0 else -math.inf


def mass_into(space: AnalyticSpace1D, x, B, t: float, params: KernelSeriesParams = DEFAULT_SERIES):
    """``(T_t 1_B)(x) = int_B p_t(x, y) dy`` in closed form, vectorised over ``x``."""
    x = np.asarray(x, dtype=float)
    B = space.as_set(B)
    v = space.sigma**2 * t
    s = math.sqrt(v)
    out = np.zeros(x.shape)
    for sx, h in _images(space, v, params):
        mu = sx * x + h
        for c, d in B.intervals:
            lo, hi = (c - mu) / s, (d - mu) / s
            # difference of upper tails is stable when both limits are far right
            right = lo > 0
            out += np.where(right, ndtr(-lo) - ndtr(-hi), ndtr(hi) - ndtr(lo))
    return out
