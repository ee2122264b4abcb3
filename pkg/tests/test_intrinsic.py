import itertools
import math

import numpy as np
import pytest

from heatlab.errors import SolverError
from heatlab.intrinsic import (
    dA_consistency_report,
    distance_function_dA,
    intrinsic_distance_sets,
    polish,
)
from heatlab.mms import FiniteWeightedSpace, gamma_density

from conftest import random_space


def brute_force_distance(space, A, B, step=1e-3, top=2.0):
    """Grid search over f with f = 0 on the single state of A and the other values in [0, top]."""
    (a,) = A
    others = [x for x in range(space.n) if x != a]
    g = np.arange(0.0, top + step / 2, step)
    F = np.zeros((space.n, g.size, g.size))
    F[others[0]] = g[:, None]
    F[others[1]] = g[None, :]
    dens = np.zeros((space.n,) + F.shape[1:])
    for x in range(space.n):
        for y in range(space.n):
            if space.w[x, y]:
                dens[x] += space.w[x, y] * (F[x] - F[y]) ** 2
    ok = np.all(dens <= space.m[:, None, None], axis=0)
    gap = np.min(F[list(B)], axis=0) - F[a]
    return float(np.max(np.where(ok, gap, -np.inf)))


def test_two_state_distance(two_state):
    res = intrinsic_distance_sets(two_state, [0], [1])
    assert abs(res.value - 1 / math.sqrt(2)) <= 1e-6
    assert np.max(gamma_density(two_state, res.witness)) <= 1 + 1e-6


def test_same_set_and_empty_sets(two_state):
    assert intrinsic_distance_sets(two_state, [0], [0]).value == 0.0
    assert intrinsic_distance_sets(two_state, [0, 1], [1]).value == 0.0
    assert intrinsic_distance_sets(two_state, [], [1]).value == math.inf
    assert intrinsic_distance_sets(two_state, [0], []).value == math.inf


def test_solver_error_carries_lower_bound(two_state):
    with pytest.raises(SolverError) as exc:
        intrinsic_distance_sets(two_state, [0], [1], tol=1e-18)
    assert 0 < exc.value.lower_bound <= 1 / math.sqrt(2) + 1e-12
    assert exc.value.witness is not None


def test_path_graph_calibration():
    errs = []
    for n in (20, 40, 80):
        sp = FiniteWeightedSpace.path_graph(n)
        d = intrinsic_distance_sets(sp, [0], [n - 1]).value
        errs.append(abs(d - 1.0))
    assert errs[0] <= 0.1
    assert errs[0] > errs[1] > errs[2]


def test_path_graph_sigma_scaling():
    d1 = intrinsic_distance_sets(FiniteWeightedSpace.path_graph(20, 1.0), [0], [19]).value
    d2 = intrinsic_distance_sets(FiniteWeightedSpace.path_graph(20, 2.0), [0], [19]).value
    assert d2 == pytest.approx(d1 / 2, abs=1e-6)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_three_state_brute_force(seed):
    rng = np.random.default_rng(100 + seed)
    m = rng.dirichlet(np.ones(3)) * 0.7 + 0.1
    m /= m.sum()
    w01, w12, w02 = rng.uniform(0.3, 1.5, 3)
    sp = FiniteWeightedSpace.from_edges(m, [(0, 1, w01), (1, 2, w12), (0, 2, w02 * (seed != 0))])
    for B in ([2], [1, 2]):
        d = intrinsic_distance_sets(sp, [0], B).value
        assert d < 2.0
        assert abs(brute_force_distance(sp, [0], B) - d) <= 2e-3


def test_witness_feasible_and_lower_bound_soundness():
    rng = np.random.default_rng(21)
    for _ in range(100):
        sp = random_space(rng, int(rng.integers(3, 8)))
        A, B = [0], [sp.n - 1]
        res = intrinsic_distance_sets(sp, A, B)
        assert np.max(gamma_density(sp, res.witness)) <= 1 + 1e-6
        # any independently scaled field is feasible, hence no better than d
        f = rng.normal(size=sp.n)
        f = f / math.sqrt(np.max(gamma_density(sp, f)))
        assert f[B].min() - f[A].max() <= res.value + 1e-6


def test_point_metric_axioms():
    rng = np.random.default_rng(22)
    tol = 1e-6
    for _ in range(4):
        sp = random_space(rng, int(rng.integers(4, 9)))
        D = np.zeros((sp.n, sp.n))
        for x, y in itertools.permutations(range(sp.n), 2):
            D[x, y] = intrinsic_distance_sets(sp, [x], [y], tol).value
        assert np.allclose(D, D.T, atol=tol)
        for x, y, z in itertools.permutations(range(sp.n), 3):
            assert D[x, z] <= D[x, y] + D[y, z] + 3 * tol


def test_monotone_in_sets():
    rng = np.random.default_rng(23)
    for _ in range(30):
        sp = random_space(rng, 7)
        B = [6]
        A = [0]
        A2 = [0, int(rng.integers(1, 6))]
        assert intrinsic_distance_sets(sp, A2, B).value <= intrinsic_distance_sets(sp, A, B).value + 1e-6


def test_distance_function_examples(two_state):
    assert np.allclose(distance_function_dA(two_state, [0]), [0, 1 / math.sqrt(2)], atol=1e-6)
    sp = FiniteWeightedSpace.path_graph(10)
    dA = distance_function_dA(sp, [0])
    assert dA[0] == 0.0
    assert np.all(np.diff(dA) >= -1e-6)
    with pytest.raises(ValueError):
        distance_function_dA(sp, [])


def test_dA_consistency(two_state):
    rep = dA_consistency_report(two_state, [0], [1])
    assert abs(rep.gap) <= 1e-6 and rep.ok
    rep = dA_consistency_report(two_state, [1], [1])
    assert rep.gap == 0.0
    rng = np.random.default_rng(24)
    for _ in range(20):
        sp = random_space(rng, 6)
        rep = dA_consistency_report(sp, [0, 1], [4, 5])
        assert rep.gap >= -1e-6


def test_polish_projects_into_unit_ball(two_state):
    f = polish(two_state, [0.0, 3.0], [0])
    assert f[0] == 0.0
    assert np.max(gamma_density(two_state, f)) <= 1.0
