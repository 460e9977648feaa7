import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from postsel import (
    CaseLabel,
    EqualC1,
    EqualC3,
    Method,
    Unequal1,
    acceptance,
    acceptance_from_params,
    classify,
    construct,
    extremal_subspaces,
    is_error_minimizing_equal,
    is_error_minimizing_unequal,
    make_instance,
    max_acceptance,
    max_acceptance_equal,
    max_acceptance_unequal,
    r_min,
    upsilon,
)
from postsel.errors import CaseMismatch, EqualSupports, ProjectorsNotOrthogonal, UnequalSupports
from postsel.linalg import pseudo_power, support_projector
from conftest import SQ7, example1, qubit
from instances import RELATIONS, degenerate_extremes, equal_support, unequal_support
from strategies import seeds
from test_construction import P_MAX_Q, P_MIN_Q, random_equal_params, random_unequal_params

cp = pytest.importorskip("cvxpy")

R_HI, R_LO = (4 + SQ7) / 3, (4 - SQ7) / 3
T_HI = 0.25 * (14 + 4 * SQ7) / (12 + 4 * SQ7)
T_LO = 0.25 * (14 - 4 * SQ7) / (12 - 4 * SQ7)


def sdp_upsilon(pi1, pi2, sigma, r):
    n = sigma.shape[0]
    x1 = cp.Variable((n, n), hermitian=True)
    x2 = cp.Variable((n, n), hermitian=True)
    c = cp.Variable()
    q1, q2 = np.eye(n) - pi1, np.eye(n) - pi2
    cons = [
        x1 >> 0, x2 >> 0,
        q1 @ x1 == 0, q2 @ x2 == 0,
        cp.real(cp.trace(x1)) == c, cp.real(cp.trace(x2)) == c,
        sigma - r * x1 - (1 - r) * x2 >> 0,
    ]
    cp.Problem(cp.Maximize(c), cons).solve(solver=cp.CLARABEL)
    return float(c.value)


def sdp_max_acceptance(inst):
    """Independent SDP over all error-minimizing measurements of a C3 instance."""
    sub = extremal_subspaces(inst.rho, inst.sigma)
    n = inst.dim
    neg = pseudo_power(inst.sigma, -0.5).matrix
    y1 = cp.Variable((n, n), hermitian=True)
    y2 = cp.Variable((n, n), hermitian=True)
    lr, ls = neg @ y1 @ neg, neg @ y2 @ neg
    cons = [
        y1 >> 0, y2 >> 0,
        (np.eye(n) - sub.t_max.matrix) @ y1 == 0,
        (np.eye(n) - sub.t_min.matrix) @ y2 == 0,
        np.eye(n) - lr - ls >> 0,
    ]
    out = []
    for state in (inst.rho.matrix, inst.sigma.matrix):
        obj = cp.real(cp.trace((lr + ls) @ state))
        cp.Problem(cp.Maximize(obj), cons).solve(solver=cp.CLARABEL)
        out.append(float(obj.value))
    return out


class TestFromParams:
    def test_example1(self, ex1):
        c_prime = 0.1
        assert acceptance_from_params(ex1, EqualC1(np.diag([1.0, 0, 0]), c_prime)) == pytest.approx((2 * c_prime, c_prime))

    def test_c3_qubit(self, q_half):
        a = acceptance_from_params(q_half, EqualC3(P_MAX_Q, P_MIN_Q, 0.5, 0.2))
        assert a == pytest.approx((0.2 * 4 / 3, 0.2), abs=1e-12)
        m = construct(q_half, EqualC3(P_MAX_Q, P_MIN_Q, 0.5, 0.2))
        assert acceptance(q_half, m) == pytest.approx(a, abs=1e-12)

    def test_e1_sigma_zero(self):
        inst = make_instance(np.eye(2) / 2, np.diag([1.0, 0]), 0.5)
        assert acceptance_from_params(inst, Unequal1(np.diag([0, 1.0]), 0.3)) == (0.3, 0.0)

    def test_needs_c_and_case(self, ex1):
        with pytest.raises(CaseMismatch):
            acceptance_from_params(ex1, EqualC1(np.diag([1.0, 0, 0])))
        with pytest.raises(CaseMismatch):
            acceptance_from_params(ex1, EqualC3(np.eye(3) / 3, np.eye(3) / 3, 0.5, 0.1))

    @given(seeds, st.sampled_from([0.3, 0.7, "star"]), st.floats(0, 1))
    def test_matches_direct_evaluation(self, seed, p, c_r):
        inst = equal_support(seed, p=p)
        params = random_equal_params(inst, seed, c_r)
        m = construct(inst, params)
        from dataclasses import replace

        exact = replace(params, c=float(np.trace(m.accept @ inst.sigma.matrix).real))
        assert acceptance_from_params(inst, exact) == pytest.approx(acceptance(inst, m), abs=1e-9)

    @given(seeds, st.floats(0, 1))
    def test_unequal_matches_direct(self, seed, c_r):
        inst = unequal_support(seed, "Incomparable")
        params = random_unequal_params(inst, seed, 3, c_r)
        m = construct(inst, params)
        from dataclasses import replace

        c = max(1e-300, float(np.trace(m.lambda_rho.matrix @ inst.rho.matrix).real + np.trace(m.lambda_sigma.matrix @ inst.sigma.matrix).real))
        want = acceptance_from_params(inst, replace(params, c=c))
        assert want == pytest.approx(acceptance(inst, m), abs=1e-9)


class TestUpsilon:
    def test_block_example(self):
        res = upsilon(np.diag([1.0, 0]), np.diag([0, 1.0]), np.diag([0.6, 0.4]), 0.5)
        assert res.value == pytest.approx(0.8) and res.detail == "block"

    def test_rank1_matches_r_min(self, q_half):
        sub = extremal_subspaces(q_half.rho, q_half.sigma)
        t1, t2 = sub.t_max.matrix, sub.t_min.matrix
        half = pseudo_power(q_half.sigma, 0.5).matrix
        sigma_prime = half @ support_projector(sub.p_max.matrix + sub.p_min.matrix).matrix @ half
        for r in (0.1, 0.5, 0.9):
            res = upsilon(t1, t2, sigma_prime, r)
            assert res.detail == "rank1"
            assert res.value == pytest.approx(r_min(sigma_prime, r * t1 + (1 - r) * t2), abs=1e-10)
            assert res.value == pytest.approx(sdp_upsilon(t1, t2, sigma_prime, r), abs=1e-6)

    def test_not_orthogonal(self):
        with pytest.raises(ProjectorsNotOrthogonal):
            upsilon(np.eye(2), np.diag([1.0, 0]), np.eye(2) / 2, 0.5)

    @settings(max_examples=12)
    @given(seeds, st.floats(0.05, 0.95))
    def test_scaling(self, seed, r):
        inst = degenerate_extremes(seed)
        sub = extremal_subspaces(inst.rho, inst.sigma)
        s = inst.sigma.matrix
        a = upsilon(sub.t_max, sub.t_min, s, r).value
        b = upsilon(sub.t_max, sub.t_min, 3 * s, r).value
        assert b == pytest.approx(3 * a, rel=1e-8)

    @given(seeds)
    def test_endpoints(self, seed):
        inst = degenerate_extremes(seed)
        sub = extremal_subspaces(inst.rho, inst.sigma)
        s = inst.sigma.matrix
        neg = pseudo_power(s, -0.5).matrix
        for r, proj in ((0.0, sub.t_min.matrix), (1.0, sub.t_max.matrix)):
            want = np.trace(pseudo_power(neg @ proj @ neg, -1).matrix).real
            assert upsilon(sub.t_max, sub.t_min, s, r).value == pytest.approx(want, abs=1e-9)

    @settings(max_examples=12)
    @given(seeds, st.floats(0.05, 0.95))
    def test_numeric_against_sdp(self, seed, r):
        inst = degenerate_extremes(seed)
        sub = extremal_subspaces(inst.rho, inst.sigma)
        s = inst.sigma.matrix
        res = upsilon(sub.t_max, sub.t_min, s, r)
        assert res.method is Method.NUMERIC
        exact = sdp_upsilon(sub.t_max.matrix, sub.t_min.matrix, s, r)
        # one-sided: certified feasible point, within solver accuracy of the optimum
        assert res.value <= exact + 1e-6
        assert res.value >= exact - 1e-5
        assert res.value <= res.upper_bound + 1e-12
        feasible = s - res.value * (r * res.psi1 + (1 - r) * res.psi2)
        assert np.linalg.eigvalsh(feasible).min() >= -1e-10

    def test_single_min(self):
        """min over admissible psi of ||psi / Tr(psi sigma)|| is 1 / Tr(P sigma), attained at P / Tr P."""
        from postsel.oracle import check_lemma

        rep = check_lemma("SingleMin", 3, 5, 50)
        assert rep.passed and rep.worst_violation <= 1e-8


class TestMaxEqual:
    @pytest.mark.parametrize("mu", [0.2, 0.5, 0.8])
    def test_example1(self, mu):
        res = max_acceptance_equal(example1(mu))
        assert res.a_rho_max == pytest.approx(mu / 2, abs=1e-12)
        assert res.a_sigma_max == pytest.approx(mu / 4, abs=1e-12)
        assert np.allclose(res.for_rho.achieving_measurement.lambda_rho.matrix, np.diag([1, 0, 0]), atol=1e-12)

    def test_q2_regimes(self):
        hi = max_acceptance_equal(qubit(0.7))
        assert hi.case is CaseLabel.C1
        assert hi.a_sigma_max == pytest.approx(T_HI, abs=1e-12)
        assert hi.a_rho_max == pytest.approx(R_HI * T_HI, abs=1e-12)
        lo = max_acceptance_equal(qubit(0.3))
        assert lo.a_sigma_max == pytest.approx(T_LO, abs=1e-12)
        assert lo.a_rho_max == pytest.approx(R_LO * T_LO, abs=1e-12)

    def test_q_c3_against_sdp(self, q_half):
        res = max_acceptance_equal(q_half)
        want = sdp_max_acceptance(q_half)
        assert res.a_rho_max == pytest.approx(want[0], abs=1e-6)
        assert res.a_sigma_max == pytest.approx(want[1], abs=1e-6)

    def test_unequal_rejected(self):
        with pytest.raises(UnequalSupports):
            max_acceptance_equal(make_instance(np.diag([1.0, 0]), np.eye(2) / 2, 0.5))

    @settings(max_examples=6)
    @given(seeds)
    def test_general_rank_c3_against_sdp(self, seed):
        inst = degenerate_extremes(seed)
        assert classify(inst) is CaseLabel.C3
        res = max_acceptance_equal(inst)
        want = sdp_max_acceptance(inst)
        assert res.a_rho_max <= want[0] + 1e-6 and res.a_rho_max >= want[0] - 1e-4
        assert res.a_sigma_max <= want[1] + 1e-6 and res.a_sigma_max >= want[1] - 1e-4

    @given(seeds, st.sampled_from([0.3, 0.7, "star"]))
    def test_achievers_and_dominance(self, seed, p):
        inst = equal_support(seed, p=p)
        res = max_acceptance_equal(inst)
        for rep, want in ((res.for_rho, (res.a_rho_max, 0)), (res.for_sigma, (res.a_sigma_max, 1))):
            m = rep.achieving_measurement
            assert is_error_minimizing_equal(inst, m)
            assert acceptance(inst, m)[want[1]] == pytest.approx(want[0], abs=1e-7)
        for k in range(10):
            m = construct(inst, random_equal_params(inst, seed * 31 + k, k / 9))
            a_r, a_s = acceptance(inst, m)
            assert a_r <= res.a_rho_max + 1e-6 and a_s <= res.a_sigma_max + 1e-6


class TestMaxUnequal:
    def test_examples(self):
        a = max_acceptance_unequal(make_instance(np.eye(2) / 2, np.diag([1.0, 0]), 0.5))
        assert (a.a_rho_max, a.a_sigma_max) == pytest.approx((0.5, 0.0))
        b = max_acceptance_unequal(make_instance(np.diag([1.0, 0]), np.eye(2) / 2, 0.5))
        assert (b.a_rho_max, b.a_sigma_max) == pytest.approx((0.0, 0.5))
        c = max_acceptance_unequal(make_instance(np.diag([0.6, 0.4, 0]), np.diag([0, 0.4, 0.6]), 0.5))
        assert (c.a_rho_max, c.a_sigma_max) == pytest.approx((0.6, 0.6))

    def test_equal_rejected(self, ex1):
        with pytest.raises(EqualSupports):
            max_acceptance_unequal(ex1)

    @given(seeds, st.sampled_from(RELATIONS))
    def test_table_and_achievers(self, seed, relation):
        inst = unequal_support(seed, relation)
        res = max_acceptance(inst)
        rho, sigma = inst.rho.matrix, inst.sigma.matrix
        want_r = 1 - np.trace(support_projector(sigma).matrix @ rho).real
        want_s = 1 - np.trace(support_projector(rho).matrix @ sigma).real
        if relation == "RhoInsideSigma":
            want_r = 0.0
        if relation == "SigmaInsideRho":
            want_s = 0.0
        assert res.a_rho_max == pytest.approx(want_r, abs=1e-12)
        assert res.a_sigma_max == pytest.approx(want_s, abs=1e-12)
        for rep, idx, target in ((res.for_rho, 0, want_r), (res.for_sigma, 1, want_s)):
            if target > 0:
                m = rep.achieving_measurement
                assert is_error_minimizing_unequal(inst, m)
                assert acceptance(inst, m)[idx] == pytest.approx(target, abs=1e-7)
