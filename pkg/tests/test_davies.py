import math
import warnings

import numpy as np
import pytest

from heatlab.davies import (
    BoundCheck,
    argh_lemma_residual,
    chain_exponent,
    davies_lemma_check,
    fdd_bound,
    fdd_mass,
    locality_negative_control,
    two_set_bound,
    varadhan_estimate,
)
from heatlab.errors import NotInD0Error
from heatlab.mms import AnalyticSpace1D, FiniteWeightedSpace, IntervalSet, energy, pt_mass

from conftest import random_space

CHAIN = [[0, 0.1], [0.45, 0.55], [0.9, 1]]


def test_boundcheck_holds_uses_slack():
    assert BoundCheck(1.0, 1.0 - 5e-11).holds
    assert not BoundCheck(1.0, 1.0 - 2e-10).holds
    assert BoundCheck(0.2, 0.5).margin == pytest.approx(0.3)


def test_two_set_full_space(interval, two_state):
    for sp, full in ((interval, [0, 1]), (two_state, [0, 1])):
        chk = two_set_bound(sp, full, full, 0.3)
        assert chk.lhs == pytest.approx(1.0, abs=1e-12)
        assert chk.rhs == pytest.approx(1.0, abs=1e-12)
        assert chk.holds


def test_two_set_interval_example(interval):
    chk = two_set_bound(interval, [0, 0.2], [0.8, 1], 0.1)
    assert chk.rhs == pytest.approx(0.2 * math.exp(-1.8), rel=1e-12)
    assert chk.rhs == pytest.approx(0.03306, abs=1e-5)
    assert chk.context["d"] == pytest.approx(0.6)
    assert chk.holds


def test_negative_control_closed_forms():
    chk = locality_negative_control(0.05)
    assert abs(chk.lhs - 0.25 * (1 - math.exp(-0.2))) <= 1e-12
    assert abs(chk.rhs - 0.5 * math.exp(-5)) <= 1e-12
    assert not chk.holds
    assert chk.context["expected_violation"] is True


def test_bound_soundness_on_analytic_backend():
    rng = np.random.default_rng(31)
    for kind in ("reflecting_interval", "circle", "free_line"):
        for sigma in (0.5, 1.0, 2.0):
            sp = AnalyticSpace1D(kind, sigma)
            for _ in range(40):
                a, b, c, d = np.sort(rng.uniform(0, 1, 4))
                A, B = ([(a, b)], [(c, d)]) if rng.random() < 0.5 else ([(c, d)], [(a, b)])
                s = float(10 ** rng.uniform(-3, 0))
                assert two_set_bound(sp, A, B, s).holds


def test_rhs_monotone_in_s(interval):
    s_grid = np.geomspace(1e-3, 1, 30)
    rhs = [two_set_bound(interval, [0, 0.2], [0.7, 0.9], s).rhs for s in s_grid]
    assert np.all(np.diff(rhs) >= 0)


def test_infinite_distance_branch(interval):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        chk = two_set_bound(interval, IntervalSet([]), [0, 1], 0.1)
    assert chk.rhs == 0.0 and chk.lhs == 0.0 and chk.holds


def test_fdd_mass_examples(interval, two_state):
    assert fdd_mass(interval, [0, 0.3, 1], [[0, 1]] * 3) == pytest.approx(1.0, abs=1e-10)
    assert fdd_mass(two_state, [0, 0.3, 1], [[0, 1]] * 3) == pytest.approx(1.0, abs=1e-12)
    for t in (0.01, 0.1, 0.5):
        assert abs(fdd_mass(interval, [0, t], [[0, 0.2], [0.8, 1]]) - pt_mass(interval, [0, 0.2], [0.8, 1], t)) <= 1e-12
    ref = 0.5 * (0.5 * (1 - math.exp(-2))) ** 2
    assert fdd_mass(two_state, [0, 0.5, 1], [[0], [1], [0]]) == pytest.approx(ref, abs=1e-14)


def test_fdd_mass_matches_dense_quadrature(interval):
    # independent evaluation: plain Gauss-Legendre on each set with the kernel matrix
    from heatlab.mms import kernel_pt, mass_into

    x, w = np.polynomial.legendre.leggauss(400)
    xa, wa = 0.05 * (x + 1), 0.05 * w
    xb, wb = 0.45 + 0.05 * (x + 1), 0.05 * w
    K = kernel_pt(interval, xa[:, None], xb[None, :], 0.5)
    ref = float(wa @ K @ (wb * mass_into(interval, xb, [0.9, 1], 0.5)))
    assert fdd_mass(interval, [0, 0.5, 1], CHAIN) == pytest.approx(ref, rel=1e-8)


def test_fdd_chaining_consistency():
    rng = np.random.default_rng(32)
    sp = AnalyticSpace1D("reflecting_interval", 1.0)
    for _ in range(25):
        times = np.sort(rng.uniform(0, 1, 3))
        sets = []
        for _ in range(3):
            a = rng.uniform(0, 0.8)
            sets.append([a, a + rng.uniform(0.05, 0.2)])
        full = fdd_mass(sp, times, sets)
        assert full <= pt_mass(sp, sets[0], sets[-1], times[-1] - times[0]) + 1e-10
        assert fdd_bound(sp, times, sets).holds


def test_fdd_bound_examples(interval):
    for s in (0.01, 0.1):
        one = fdd_bound(interval, [0, s], [[0, 0.2], [0.8, 1]])
        two = two_set_bound(interval, [0, 0.2], [0.8, 1], s)
        assert abs(one.lhs - two.lhs) <= 1e-12 and abs(one.rhs - two.rhs) <= 1e-12
    for scale in (1, 0.5, 0.2, 0.1):
        assert fdd_bound(interval, [0, 0.5, 1], CHAIN, scale).holds
    # repeated set contributes nothing to the exponent
    e1 = chain_exponent(interval, [0, 0.5, 1], [[0, 0.1], [0, 0.1], [0.9, 1]])
    assert e1 == pytest.approx(0.5 * 0.8**2 / 0.5)


def test_fdd_bound_prefactor_ignores_intermediate_sets(interval):
    chk = fdd_bound(interval, [0, 0.5, 1], CHAIN)
    assert chk.rhs == pytest.approx(0.1 * math.exp(-chk.context["exponent"]), rel=1e-14)


def test_fdd_errors(interval):
    with pytest.raises(ValueError):
        fdd_mass(interval, [0, 0.5, 0.4], CHAIN)
    with pytest.raises(ValueError):
        fdd_mass(interval, [0, 0.5], CHAIN)


def test_davies_lemma_examples(two_state):
    omega = np.array([0.0, 1 / math.sqrt(2)])
    f = np.array([1.0, 0.0])
    assert davies_lemma_check(two_state, omega, f, 0.7, 0.0).holds
    assert davies_lemma_check(two_state, omega, f, 0.0, 3.0).margin == pytest.approx(0.0, abs=1e-15)
    chk = davies_lemma_check(two_state, omega, f, 0.5, 1.0)
    e = math.exp(-2)
    lhs = math.sqrt(0.5 * ((0.5 * (1 + e)) ** 2 + (math.exp(omega[1]) * 0.5 * (1 - e)) ** 2))
    rhs = math.exp(0.25) * math.sqrt(0.5)
    assert chk.lhs == pytest.approx(lhs, rel=1e-13)
    assert chk.rhs == pytest.approx(rhs, rel=1e-13)
    assert chk.context["alpha_jump"] == pytest.approx(omega[1])
    with pytest.raises(NotInD0Error):
        davies_lemma_check(two_state, [0.0, 1.0], f, 0.5, 1.0)
    with pytest.raises(ValueError):
        davies_lemma_check(two_state, omega, [-1.0, 0.0], 0.5, 1.0)


def test_davies_lemma_can_fail_for_large_jumps(two_state):
    # recorded, not asserted: large alpha * jump breaks the local estimate
    omega = np.array([0.0, 1 / math.sqrt(2)])
    chk = davies_lemma_check(two_state, omega, [1.0, 0.0], 0.05, 12.0)
    assert chk.context["alpha_jump"] > 1
    assert isinstance(chk.holds, bool)


def test_argh_residual_examples(two_state):
    rng = np.random.default_rng(33)
    for _ in range(100):
        sp = random_space(rng, 5)
        u = rng.normal(size=5)
        omega = rng.normal(size=5)
        assert argh_lemma_residual(sp, omega, u, 0.0) == pytest.approx(2 * energy(sp, u, u), abs=1e-12)
        c, a = rng.normal(), rng.normal()
        ref = 2 * math.exp(2 * a * c) * energy(sp, u, u)
        assert argh_lemma_residual(sp, np.full(5, c), u, a) == pytest.approx(ref, rel=1e-12, abs=1e-12)
    assert argh_lemma_residual(two_state, [0.0, 1.0], [1.0, 0.0], 0.3) == pytest.approx(0.09 + 2.0, abs=1e-14)


def test_varadhan_examples(interval):
    fit = varadhan_estimate(interval, [0, 0.2], [0.8, 1], [0.1, 0.05, 0.02, 0.01, 0.005])
    assert fit.target == pytest.approx(-0.18)
    assert fit.relative_error <= 0.05
    assert [t for t, _ in fit.samples] == [0.1, 0.05, 0.02, 0.01, 0.005]
    assert "t log t" in fit.method
    overlap = varadhan_estimate(interval, [0, 0.5], [0.4, 1], [0.1, 0.01, 0.001])
    assert overlap.target == 0
    assert abs(overlap.samples[-1][1]) < abs(overlap.samples[0][1])
    wide = varadhan_estimate(AnalyticSpace1D("reflecting_interval", 2.0), [0, 0.2], [0.8, 1], [0.05, 0.02, 0.01, 0.005, 0.002])
    assert wide.target == pytest.approx(-0.045)
    assert wide.relative_error <= 0.05


def test_varadhan_deep_grid(interval):
    fit = varadhan_estimate(interval, [0, 0.2], [0.8, 1], [0.01, 0.005, 0.002, 0.001])
    assert fit.relative_error <= 0.01


def test_varadhan_refusals(interval, two_state):
    with pytest.raises(TypeError):
        varadhan_estimate(two_state, [0], [1], [0.1, 0.05, 0.01])
    with pytest.raises(ValueError):
        varadhan_estimate(interval, [0, 0.2], [0.8, 1], [0.01, 0.05, 0.1])
    with pytest.raises(ValueError):
        varadhan_estimate(interval, [0, 0.2], [0.8, 1], [0.1, 0.05])


def test_bit_stable(interval):
    a = fdd_bound(interval, [0, 0.5, 1], CHAIN, 0.2)
    b = fdd_bound(interval, [0, 0.5, 1], CHAIN, 0.2)
    assert (a.lhs, a.rhs) == (b.lhs, b.rhs)
