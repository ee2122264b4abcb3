"""Intrinsic distance between state sets of a finite weighted space.

``d(A, B)`` is the largest gap ``min_B f - max_A f`` over fields whose energy
density is at most one everywhere.  Shifting ``f`` by a constant changes
neither the gap nor the density, so the program is solved as::

    maximise tau  s.t.  f <= 0 on A,  f >= tau on B,
                        sum_y w(x,y) (f(x) - f(y))^2 <= m(x)   for every x

Each density constraint is a second-order cone constraint, so the problem is a
small SOCP.  The solver's answer is polished by rescaling the witness onto the
feasible set; the reported value is the gap of that strictly feasible witness,
hence always a valid lower bound.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import cvxpy as cp
import numpy as np
import scipy.sparse as sps

from .errors import SolverError
from .mms import FiniteWeightedSpace, gamma_density

DEFAULT_TOL = 1e-6


@dataclass(frozen=True)
class DistanceResult:
    value: float
    witness: np.ndarray | None
    kkt_residual: float

    def __float__(self):
        return self.value


def _cone_rows(space: FiniteWeightedSpace):
    """Per-vertex sparse operators ``f -> (sqrt(w(x,y)) (f(x) - f(y)))_y``."""
    rows = []
    for x in range(space.n):
        nbrs = np.nonzero(space.w[x])[0]
        k = nbrs.size
        data = np.concatenate([np.sqrt(space.w[x, nbrs]), -np.sqrt(space.w[x, nbrs])])
        r = np.concatenate([np.arange(k), np.arange(k)])
        c = np.concatenate([np.full(k, x), nbrs])
        rows.append(sps.csr_matrix((data, (r, c)), shape=(k, space.n)))
    return rows


def polish(space: FiniteWeightedSpace, f, A) -> np.ndarray:
    """Rescale ``f`` into the unit density ball and shift it to vanish on ``A``."""
    f = np.asarray(f, dtype=float)
    g = float(np.max(gamma_density(space, f)))
    if g > 1.0:
        f = f / math.sqrt(g)
        # one ulp of slack so the check <= 1 is robust to rounding
        g2 = float(np.max(gamma_density(space, f)))
        if g2 > 1.0:
            f = f * (1.0 - 4e-16) / math.sqrt(g2)
    return f - np.max(f[space.as_index(A)])


def gap_value(space: FiniteWeightedSpace, f, A, B) -> float:
    f = np.asarray(f, dtype=float)
    return float(np.min(f[space.as_index(B)]) - np.max(f[space.as_index(A)]))


def intrinsic_distance_sets(space: FiniteWeightedSpace, A, B, tol: float = DEFAULT_TOL) -> DistanceResult:
    """Intrinsic distance ``d(A, B)`` with a feasible maximiser.

    Empty sets give ``inf`` (``sup`` of the empty set convention); overlapping
    sets give 0 with the zero field as witness.  Raises :class:`SolverError`
    when the certified value and the solver optimum disagree by more than ``tol``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    ia, ib = space.as_index(A), space.as_index(B)
    if ia.size == 0 or ib.size == 0:
        return DistanceResult(math.inf, None, 0.0)
    if np.intersect1d(ia, ib).size:
        return DistanceResult(0.0, np.zeros(space.n), 0.0)

    f = cp.Variable(space.n)
    tau = cp.Variable()
    cons = [f[ia] <= 0, f[ib] >= tau]
    for x, R in enumerate(_cone_rows(space)):
        cons.append(cp.norm(R @ f, 2) <= math.sqrt(space.m[x]))
    prob = cp.Problem(cp.Maximize(tau), cons)
    try:
        # OPTIMAL_INACCURATE is acceptable: the polish step certifies the value
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-11, tol_gap_rel=1e-11, tol_feas=1e-11)
    except cp.SolverError as exc:
        raise SolverError(f"conic solver failed: {exc}", lower_bound=0.0) from exc

    if f.value is None or prob.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        raise SolverError(f"solver status {prob.status}", lower_bound=0.0)
    witness = polish(space, f.value, ia)
    value = gap_value(space, witness, ia, ib)
    residual = abs(float(prob.value) - value)
    if value < 0 or residual > tol:
        raise SolverError(
            f"certified value {value:.3e} differs from solver optimum {prob.value:.3e}",
            lower_bound=max(value, 0.0),
            witness=witness,
        )
    return DistanceResult(value, witness, residual)


def distance_function_dA(space: FiniteWeightedSpace, A, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Per-vertex distances ``x -> d(A, {x})``; zero on ``A``."""
    ia = space.as_index(A)
    if ia.size == 0:
        raise ValueError("A must be nonempty")
    out = np.zeros(space.n)
    for x in range(space.n):
        if x not in ia:
            out[x] = intrinsic_distance_sets(space, ia, [x], tol).value
    return out


@dataclass(frozen=True)
class DAConsistency:
    d_AB: float
    min_dA_on_B: float
    gap: float
    tol: float

    @property
    def ok(self) -> bool:
        """Only the one-sided inequality is guaranteed for non-local forms."""
        return self.gap >= -self.tol


def dA_consistency_report(space: FiniteWeightedSpace, A, B, tol: float = DEFAULT_TOL) -> DAConsistency:
    """Compare ``min_B d_A`` against ``d(A, B)``.

    Any witness for ``(A, B)`` is one for ``(A, {x})`` with ``x`` in ``B``, so the
    gap is nonnegative up to solver tolerance.  Its size measures how far the
    form is from the local case, where the two agree.
    """
    ib = space.as_index(B)
    d = intrinsic_distance_sets(space, A, B, tol).value
    dA = distance_function_dA(space, A, tol)
    lo = float(np.min(dA[ib]))
    return DAConsistency(d, lo, lo - d, tol)
