import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chdlab.gronwall import (
    GronwallInstance,
    PiecewiseConstant,
    exponent_a,
    gron1_bound,
    q_value,
    random_instance,
    sequence_params,
    verify_ensemble,
    verify_instance,
)


class TestQValue:
    def test_zero_bounds(self):
        assert q_value(1.0, 0.0, 0.0) == 0.0

    def test_closed_form_at_2ln2(self):
        # exp(gamma/2) = 2 and exp(gamma) = 4 collapse the formula to
        # 16 A1^2 + (32/3) A2
        gamma = 2.0 * math.log(2.0)
        for a1, a2 in [(1.0, 1.0), (0.3, 2.0), (0.0, 5.0)]:
            expected = 16.0 * a1**2 + (32.0 / 3.0) * a2
            assert q_value(gamma, a1, a2) == pytest.approx(expected, rel=1e-12)

    def test_gamma_dependence_scan(self):
        # Q blows up as gamma -> 0 and decays toward the minimum of the
        # kernel constants; e^g/(1-e^-g) itself turns around at g = ln 2, so
        # Q is decreasing only up to a gamma* in [ln 2, 2 ln 2] and grows
        # exponentially afterwards.
        gammas = np.linspace(0.05, math.log(2.0), 40)
        vals = [q_value(g, 0.7, 1.3) for g in gammas]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        tail = [q_value(g, 0.7, 1.3) for g in np.linspace(2 * math.log(2.0), 8.0, 40)]
        assert all(a < b for a, b in zip(tail, tail[1:]))

    @given(st.floats(0.05, 20.0), st.floats(0, 10), st.floats(0, 10))
    @settings(max_examples=60)
    def test_nonnegative(self, gamma, a1, a2):
        assert q_value(gamma, a1, a2) >= 0.0

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            q_value(0.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            q_value(1.0, -1.0, 0.0)


class TestSequenceParams:
    @pytest.mark.parametrize(
        "n,expected",
        [
            (0, (Fraction(0), Fraction(1), Fraction(1))),
            (1, (Fraction(3, 2), Fraction(3, 2), Fraction(3, 4))),
            (2, (Fraction(10, 3), Fraction(2), Fraction(1, 2))),
        ],
    )
    def test_closed_forms(self, n, expected):
        assert sequence_params(n) == expected

    def test_recurrences_exact_to_20(self):
        # alpha_{n+1} = (1+alpha_n)/a_{n+1}, beta_{n+1} = beta_n/a_{n+1},
        # theta_{n+1} = theta_n/(2 a_{n+1}), all in exact rational arithmetic
        a, b, t = sequence_params(0)
        for n in range(20):
            an1 = exponent_a(n + 1)
            a, b, t = (1 + a) / an1, b / an1, t / (2 * an1)
            assert (a, b, t) == sequence_params(n + 1)

    def test_exponents_increase_to_one(self):
        vals = [exponent_a(n) for n in range(30)]
        assert all(x < y for x, y in zip(vals, vals[1:]))
        assert vals[0] == Fraction(1, 2)
        assert vals[-1] < 1

    def test_legacy_base_case_breaks_recurrence(self):
        # the alternative theta_0 = 1/2 is inconsistent with the closed form
        # via the recurrence theta_1 = theta_0 / (2 a_1)
        _, _, theta0_legacy = sequence_params(0, legacy_theta0=True)
        assert theta0_legacy == Fraction(1, 2)
        theta1_from_legacy = theta0_legacy / (2 * exponent_a(1))
        assert theta1_from_legacy != sequence_params(1)[2]
        _, _, theta0 = sequence_params(0)
        assert theta0 / (2 * exponent_a(1)) == sequence_params(1)[2]

    def test_young_reduction_for_small_exponents(self):
        # y^w <= 2w y^(1/2) + (1 - 2w) for w in (0, 1/2), y >= 0
        for w in np.linspace(0.01, 0.49, 25):
            for y in np.concatenate([np.linspace(0, 2, 40), np.geomspace(2, 1e6, 40)]):
                assert y**w <= 2 * w * np.sqrt(y) + (1 - 2 * w) + 1e-12


def constant_instance(n, gamma, y0, f_level, g_level, horizon=10.0, ppu=4):
    npc = int(horizon * ppu)
    f = PiecewiseConstant(0.0, ppu, tuple([f_level] * npc))
    g = PiecewiseConstant(0.0, ppu, tuple([g_level] * npc))
    return GronwallInstance(gamma=gamma, n=n, y0=y0, f=f, g=g)


class TestPiecewiseConstant:
    def test_window_sup_exact(self):
        pc = PiecewiseConstant(0.0, 2, (1.0, 0.0, 0.0, 3.0, 3.0, 0.0))
        # unit windows at half-integer offsets: max of (0.5, 1.5, 3.0, 1.5)
        assert pc.window_sup() == pytest.approx(3.0)

    def test_kernel_convolution_constant(self):
        pc = PiecewiseConstant(0.0, 4, tuple([2.0] * 20))
        gamma = 1.3
        t = 3.75
        exact = 2.0 * (1 - math.exp(-gamma * t)) / gamma
        assert pc.kernel_convolution(gamma, t) == pytest.approx(exact, rel=1e-12)


class TestBound:
    def test_dominates_initial_value(self):
        inst = constant_instance(0, 1.0, 5.0, 0.3, 1.2)
        assert gron1_bound(inst, 0.0) >= 4.0 * (2.0 * 5.0 + q_value(0.5, inst.a1, inst.a2))
        assert gron1_bound(inst, 0.0) >= inst.y0

    def test_homogeneous_case_reduces_to_scaled_exponential(self):
        inst = constant_instance(0, 2.0, 3.0, 0.0, 0.0)
        for t in (0.0, 0.7, 4.0):
            assert gron1_bound(inst, t) == pytest.approx(
                8.0 * 3.0 * math.exp(-2.0 * t), rel=1e-12
            )

    def test_rejects_early_times(self):
        inst = constant_instance(0, 1.0, 1.0, 0.1, 0.1)
        with pytest.raises(ValueError):
            gron1_bound(inst, -1.0)


class TestVerifyInstance:
    def test_pure_decay(self):
        # f = g = 0 exempts the generator floor: build by hand
        inst = constant_instance(0, 1.0, 4.0, 0.0, 0.0)
        rep = verify_instance(inst, samples=60)
        assert rep.passed
        # slack factor 8 for the homogeneous case
        assert rep.max_ratio <= 1.0 / 8.0 + 1e-9

    @pytest.mark.parametrize("n", [0, 1, 2, 3])
    @pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
    def test_constant_coefficients(self, n, gamma):
        inst = constant_instance(n, gamma, 2.0, 0.5, gamma + 0.5)
        rep = verify_instance(inst, samples=40)
        assert rep.passed, f"violation at t={rep.witness_time}, ratio={rep.max_ratio}"
        assert rep.kernel_passed
        assert rep.min_y >= 1.0 - 1e-9

    def test_seeded_ensemble_clean(self):
        reports = verify_ensemble(30, seed=777, n_max=5, samples=80)
        assert all(r.passed and r.kernel_passed for r in reports)
        assert {r.n for r in reports} >= {0, 1, 2}
        assert min(r.min_y for r in reports) >= 1.0 - 1e-9

    def test_instance_requires_normalized_start(self):
        f = PiecewiseConstant(0.0, 4, tuple([0.1] * 8))
        with pytest.raises(ValueError):
            GronwallInstance(gamma=1.0, n=0, y0=0.5, f=f, g=f)

    def test_random_instance_reproducible(self):
        a = random_instance(4321)
        b = random_instance(4321)
        assert a.gamma == b.gamma and a.n == b.n and a.y0 == b.y0
        assert a.f.values == b.f.values and a.g.values == b.g.values
