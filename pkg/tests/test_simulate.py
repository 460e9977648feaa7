import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from postsel import (
    acceptance,
    outcome_distribution,
    postselected_error,
    random_density,
    sample_measurement,
    simulate,
    validate_measurement,
)
from conftest import example1, qubit
from strategies import seeds

ZERO3 = np.zeros((3, 3))


def optimal(c_scale=1.0):
    return validate_measurement(np.diag([c_scale, 0.0, 0.0]), ZERO3)


class TestOutcomeDistribution:
    @pytest.mark.parametrize("c", [0.1, 0.5, 1.0])
    def test_example1_sigma(self, c):
        mu = 0.5
        got = outcome_distribution(example1(mu).sigma, optimal(c))
        assert got == pytest.approx((c * mu / 4, 0.0, 1 - c * mu / 4), abs=1e-15)

    def test_accept_everything(self, ex1):
        m = validate_measurement(np.eye(3), ZERO3)
        assert outcome_distribution(ex1.rho, m) == (1.0, 0.0, 0.0)

    def test_reject_everything(self, ex1):
        m = validate_measurement(ZERO3, ZERO3)
        assert outcome_distribution(ex1.rho, m) == (0.0, 0.0, 1.0)

    def test_accepts_raw_matrix(self, ex1):
        m = optimal()
        assert outcome_distribution(ex1.rho.matrix, m) == outcome_distribution(ex1.rho, m)

    @given(seeds)
    def test_sums_to_one(self, seed):
        m = sample_measurement(3, seed)
        probs = outcome_distribution(random_density(3, 3, seed), m)
        assert sum(probs) == pytest.approx(1.0, abs=1e-9)
        assert all(0.0 <= p <= 1.0 for p in probs)


class TestSimulate:
    def test_golden_seed(self, ex1):
        rep = simulate(ex1, optimal(), 10**6, 42)
        lo, hi = rep.intervals["e_hat"]
        assert lo <= 1 / 3 <= hi
        lo, hi = rep.intervals["a_sigma_hat"]
        assert lo <= 0.125 <= hi
        assert abs(rep.e_hat - 1 / 3) <= 3 * rep.ci95["e_hat"]

    def test_counts_shape(self, ex1):
        rep = simulate(ex1, optimal(), 5000, 1)
        assert rep.counts.shape == (2, 3)
        assert rep.counts.sum() == 5000
        # Lambda_sigma = 0: no sigma verdicts at all
        assert rep.counts[:, 1].sum() == 0

    def test_deterministic(self, ex1):
        a = simulate(ex1, optimal(), 20000, 7)
        b = simulate(ex1, optimal(), 20000, 7)
        assert np.array_equal(a.counts, b.counts)
        assert a.to_dict() == b.to_dict()

    def test_accept_all_as_rho(self, ex1):
        n = 50000
        rep = simulate(ex1, validate_measurement(np.eye(3), ZERO3), n, 3)
        assert rep.e_hat == rep.counts[1].sum() / n
        lo, hi = rep.intervals["e_hat"]
        assert lo <= ex1.p_sigma <= hi

    def test_single_trial(self, ex1):
        rep = simulate(ex1, optimal(), 1, 0)
        assert rep.counts.sum() == 1
        for key in ("a_rho_hat", "a_sigma_hat"):
            if rep.intervals[key] is not None:
                lo, hi = rep.intervals[key]
                assert 0.0 <= lo <= hi <= 1.0

    def test_no_accepts(self, ex1):
        rep = simulate(ex1, validate_measurement(ZERO3, ZERO3), 100, 0)
        assert rep.no_accepts and rep.e_hat is None

    def test_rejects_bad_n(self, ex1):
        with pytest.raises(ValueError):
            simulate(ex1, optimal(), 0, 0)

    @pytest.mark.parametrize("seed", [11, 12, 13])
    def test_empirical_triple(self, seed):
        inst = qubit(0.4)
        m = validate_measurement(np.array([[0.5, 0.1], [0.1, 0.2]]), np.array([[0.1, 0.0], [0.0, 0.4]]))
        n = 40000
        rep = simulate(inst, m, n, seed)
        for row, state in zip(rep.counts, (inst.rho, inst.sigma)):
            want = np.array(outcome_distribution(state, m))
            assert np.all(np.abs(row / row.sum() - want) <= 4 / math.sqrt(row.sum()))

    @settings(max_examples=8)
    @given(st.sampled_from([21, 22, 23, 24]))
    def test_estimates_track_analytic(self, seed):
        inst = qubit(0.6)
        m = validate_measurement(np.array([[0.6, 0.2], [0.2, 0.3]]), np.array([[0.1, -0.05], [-0.05, 0.5]]))
        rep = simulate(inst, m, 100000, seed)
        a_r, a_s = acceptance(inst, m)
        e = postselected_error(inst, m)
        for key, want in (("e_hat", e), ("a_rho_hat", a_r), ("a_sigma_hat", a_s)):
            assert abs(getattr(rep, key) - want) <= 2 * rep.ci95[key]
