import json

import numpy as np
import pytest

from infoacq import core
from helpers import make_instance, quadratic_rule_binary
from infoacq.core import (
    BeliefSupport,
    ContractProblem,
    InformationStructure,
    Instance,
    InvalidInputError,
    JointObservationModel,
    ScoringRule,
    StateSpace,
    UtilityModel,
)


class TestTypes:
    def test_belief_support_rejects_duplicates(self):
        with pytest.raises(InvalidInputError):
            BeliefSupport(np.array([[0.5, 0.5], [0.5, 0.5]]))

    def test_belief_support_rejects_non_distribution(self):
        with pytest.raises(InvalidInputError):
            BeliefSupport(np.array([[0.6, 0.6]]))

    def test_d1_min_pairwise_distance(self):
        sup = BeliefSupport(np.array([[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]]))
        assert sup.d1() == pytest.approx(0.5)

    def test_d2_ordered_pairs(self):
        sup = BeliefSupport(np.array([[0.0, 1.0], [1.0, 0.0]]))
        info = InformationStructure(
            costs=np.zeros(2), support=sup, dists=np.array([[0.7, 0.3], [0.2, 0.8]])
        )
        assert info.d2() == pytest.approx(0.5)

    def test_scoring_rule_rejects_negative_payments(self):
        sup = BeliefSupport(np.array([[0.5, 0.5]]))
        with pytest.raises(InvalidInputError):
            ScoringRule(support=sup, table=np.array([[-0.1, 0.2]]))

    def test_instance_checks_support_bound(self):
        sup = BeliefSupport(np.array([[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]]))
        info = InformationStructure(
            costs=np.zeros(1), support=sup, dists=np.array([[0.2, 0.3, 0.5]])
        )
        with pytest.raises(InvalidInputError):
            Instance(
                states=StateSpace(2),
                info=info,
                utility=UtilityModel(np.zeros((1, 2))),
                b_s=1.0,
                b_u=1.0,
                n_observations=2,  # M = 3 > K * C_O = 2
            )


class TestDeriveInformationStructure:
    def test_single_observation_posterior_is_prior(self):
        joint = JointObservationModel(np.array([[[0.5], [0.5]]]))
        info = core.derive_information_structure(joint, [0.0])
        assert info.support.m == 1
        np.testing.assert_allclose(info.support.beliefs, [[0.5, 0.5]])
        np.testing.assert_allclose(info.dists, [[1.0]])

    def test_fully_revealing_signal(self):
        joint = JointObservationModel(np.array([[[0.5, 0.0], [0.0, 0.5]]]))
        info = core.derive_information_structure(joint, [0.0])
        np.testing.assert_allclose(info.support.beliefs, [[1.0, 0.0], [0.0, 1.0]])
        np.testing.assert_allclose(info.dists, [[0.5, 0.5]])

    def test_two_action_bayes_arithmetic(self):
        # hand Bayes: action 0 posteriors (0.75, 0.25) w.p. 0.4 and (1/3, 2/3)
        # w.p. 0.6; action 1 collapses to (0.5, 0.5) with both observations
        p1 = np.array([[0.3, 0.2], [0.1, 0.4]])
        p2 = np.array([[0.25, 0.25], [0.25, 0.25]])
        joint = JointObservationModel(np.array([p1, p2]))
        info = core.derive_information_structure(joint, [0.1, 0.2])
        np.testing.assert_allclose(
            info.support.beliefs,
            [[0.75, 0.25], [1 / 3, 2 / 3], [0.5, 0.5]],
            atol=1e-12,
        )
        np.testing.assert_allclose(info.dists[0], [0.4, 0.6, 0.0], atol=1e-12)
        np.testing.assert_allclose(info.dists[1], [0.0, 0.0, 1.0], atol=1e-12)

    def test_zero_mass_tensor_rejected(self):
        tensors = np.zeros((1, 2, 2))
        with pytest.raises(InvalidInputError):
            JointObservationModel(tensors)

    def test_bayes_plausibility(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            raw = rng.random((2, 3, 4))
            raw /= raw.sum(axis=(1, 2), keepdims=True)
            joint = JointObservationModel(raw)
            info = core.derive_information_structure(joint, [0.0, 0.1])
            for k in range(2):
                prior = raw[k].sum(axis=1)
                mean_belief = info.dists[k] @ info.support.beliefs
                np.testing.assert_allclose(mean_belief, prior, atol=1e-8)


class TestScores:
    def test_zero_rule(self):
        sup = BeliefSupport(np.array([[0.3, 0.7], [0.6, 0.4]]))
        rule = ScoringRule(support=sup, table=np.zeros((2, 2)))
        assert core.expected_score(rule, 0, [0.5, 0.5]) == 0.0

    def test_constant_row(self):
        sup = BeliefSupport(np.array([[0.3, 0.7]]))
        rule = ScoringRule(support=sup, table=np.array([[0.4, 0.4]]))
        assert core.expected_score(rule, 0, [0.9, 0.1]) == pytest.approx(0.4)

    def test_index_out_of_range(self):
        sup = BeliefSupport(np.array([[0.3, 0.7]]))
        rule = ScoringRule(support=sup, table=np.array([[0.4, 0.4]]))
        with pytest.raises(InvalidInputError):
            core.expected_score(rule, 3, [0.5, 0.5])

    def test_hard_instance_middle_coordinate(self):
        from infoacq.harness import gen_hard_instance, hard_instance_score_vector
        from infoacq.offline import solve_lp_k

        inst = gen_hard_instance(-0.5)
        sol = solve_lp_k(inst, 1)
        value = core.expected_score(sol.s_star, 1, [0.5, 0.5])
        assert value == pytest.approx(hard_instance_score_vector(-0.5)[1], abs=1e-7)


class TestIsProper:
    def test_zero_rule_proper(self):
        sup = BeliefSupport(np.array([[0.3, 0.7], [0.6, 0.4]]))
        assert core.is_proper(ScoringRule(support=sup, table=np.zeros((2, 2))))

    def test_quadratic_rule_proper(self):
        assert core.is_proper(quadratic_rule_binary([0.2, 0.7]))

    def test_swapped_rows_improper(self):
        rule = quadratic_rule_binary([0.2, 0.7])
        swapped = ScoringRule(support=rule.support, table=rule.table[::-1])
        assert not core.is_proper(swapped)


class TestProperize:
    def test_strictly_proper_input_unchanged(self):
        rule = quadratic_rule_binary([0.2, 0.7])
        out = core.properize(rule)
        np.testing.assert_allclose(out.table, rule.table)

    def test_constant_input_unchanged(self):
        sup = BeliefSupport(np.array([[0.3, 0.7], [0.6, 0.4]]))
        rule = ScoringRule(support=sup, table=np.full((2, 2), 0.3))
        np.testing.assert_allclose(core.properize(rule).table, rule.table)

    def test_dominant_row_copied_everywhere(self):
        sup = BeliefSupport(np.array([[1.0, 0.0], [0.0, 1.0]]))
        raw = ScoringRule(support=sup, table=np.array([[0.1, 0.2], [0.9, 0.8]]))
        out = core.properize(raw)
        np.testing.assert_allclose(out.table, [[0.9, 0.8], [0.9, 0.8]])
        assert core.is_proper(out)

    def test_random_tables_property(self):
        rng = np.random.default_rng(11)
        for _ in range(60):
            m = rng.integers(1, 5)
            n = rng.integers(1, 4)
            beliefs = rng.dirichlet(np.ones(n), size=m)
            try:
                sup = BeliefSupport(beliefs)
            except InvalidInputError:
                continue
            raw = ScoringRule(support=sup, table=rng.random((m, n)))
            out = core.properize(raw)
            assert core.is_proper(out)
            cross = sup.beliefs @ raw.table.T
            np.testing.assert_allclose(
                np.einsum("ij,ij->i", sup.beliefs, out.table),
                cross.max(axis=1),
                atol=1e-12,
            )


class TestProfits:
    def setup_method(self):
        self.inst = make_instance(
            costs=[0.0, 0.1],
            support_rows=[[0.2, 0.8], [0.7, 0.3]],
            dists=[[0.6, 0.4], [0.1, 0.9]],
            u_table=[[1.0, -0.5], [-0.2, 0.8]],
        )

    def test_zero_rule_zero_cost(self):
        rule = ScoringRule(support=self.inst.support, table=np.zeros((2, 2)))
        assert core.agent_profit(self.inst, rule, 0) == pytest.approx(0.0)

    def test_constant_rule_profit(self):
        rule = ScoringRule(support=self.inst.support, table=np.full((2, 2), 1.0))
        assert core.agent_profit(self.inst, rule, 1) == pytest.approx(1.0 - 0.1)

    def test_zero_rule_principal_gets_utility(self):
        rule = ScoringRule(support=self.inst.support, table=np.zeros((2, 2)))
        expected = float(self.inst.info.dists[0] @ self.inst.u_sigma())
        assert core.principal_profit(self.inst, rule, 0) == pytest.approx(expected)

    def test_constant_payment_zero_utility(self):
        inst = make_instance(
            costs=[0.0],
            support_rows=[[0.2, 0.8], [0.7, 0.3]],
            dists=[[0.6, 0.4]],
            u_table=[[0.0, 0.0]],
        )
        rule = ScoringRule(support=inst.support, table=np.full((2, 2), 0.25))
        assert core.principal_profit(inst, rule, 0) == pytest.approx(-0.25)

    def test_hard_instance_indifference(self):
        from infoacq.harness import gen_hard_instance
        from infoacq.offline import solve_lp_k

        inst = gen_hard_instance(-0.5)
        s_star = solve_lp_k(inst, 1).s_star
        g = [core.agent_profit(inst, s_star, k) for k in range(3)]
        assert g[1] == pytest.approx(g[0], abs=1e-7)
        assert g[1] == pytest.approx(g[2], abs=1e-7)

    def test_hard_instance_principal_margin(self):
        from infoacq.harness import gen_hard_instance
        from infoacq.offline import solve_lp_k

        inst = gen_hard_instance(-0.5)
        s_star = solve_lp_k(inst, 1).s_star
        h2 = core.principal_profit(inst, s_star, 1)
        for k in (0, 2):
            assert h2 - core.principal_profit(inst, s_star, k) >= 1.0 - 1e-7


class TestMix:
    def test_endpoints_and_midpoint(self):
        sup = BeliefSupport(np.array([[0.3, 0.7]]))
        s0 = ScoringRule(support=sup, table=np.zeros((1, 2)))
        s1 = ScoringRule(support=sup, table=np.full((1, 2), 1.0))
        np.testing.assert_allclose(core.mix(s0, s1, 0.0).table, s0.table)
        np.testing.assert_allclose(core.mix(s0, s1, 1.0).table, s1.table)
        np.testing.assert_allclose(core.mix(s0, s1, 0.5).table, np.full((1, 2), 0.5))

    def test_lambda_out_of_range(self):
        sup = BeliefSupport(np.array([[0.3, 0.7]]))
        s0 = ScoringRule(support=sup, table=np.zeros((1, 2)))
        with pytest.raises(InvalidInputError):
            core.mix(s0, s0, 1.5)

    def test_mix_preserves_properness(self):
        rng = np.random.default_rng(3)
        rule = quadratic_rule_binary([0.1, 0.5, 0.9])
        for _ in range(20):
            raw = ScoringRule(support=rule.support, table=rng.random((3, 2)))
            other = core.properize(raw)
            lam = rng.random()
            assert core.is_proper(core.mix(rule, other, lam))


class TestContractReduction:
    def test_uniform_two_outcomes(self):
        problem = ContractProblem(
            outcome_dists=np.array([[0.5, 0.5]]),
            costs=np.zeros(1),
            payoffs=np.array([1.0, 2.0]),
            b_s=1.0,
            b_u=2.0,
        )
        inst = core.contract_to_instance(problem)
        np.testing.assert_allclose(inst.support.beliefs, np.eye(2))
        np.testing.assert_allclose(inst.info.dists, [[0.5, 0.5]])

    def test_deterministic_outcomes_point_masses(self):
        problem = ContractProblem(
            outcome_dists=np.array([[1.0, 0.0], [0.0, 1.0]]),
            costs=np.array([0.0, 0.1]),
            payoffs=np.array([0.0, 1.0]),
            b_s=1.0,
            b_u=1.0,
        )
        inst = core.contract_to_instance(problem)
        np.testing.assert_allclose(inst.info.dists, np.eye(2))

    def test_contract_rule_is_diagonal(self):
        problem = ContractProblem(
            outcome_dists=np.array([[0.5, 0.5]]),
            costs=np.zeros(1),
            payoffs=np.array([1.0, 2.0]),
            b_s=1.0,
            b_u=2.0,
        )
        rule = core.contract_scoring_rule(problem, [0.3, 0.8])
        np.testing.assert_allclose(rule.table, np.diag([0.3, 0.8]))


class TestSerialization:
    def test_round_trip_exact(self):
        inst = make_instance(
            costs=[0.0, 1 / 3],
            support_rows=[[0.2, 0.8], [0.7, 0.3]],
            dists=[[0.6, 0.4], [1 / 7, 6 / 7]],
            u_table=[[1.0, -0.5]],
        )
        text = core.instance_to_json(inst)
        back = core.instance_from_json(text)
        np.testing.assert_array_equal(back.info.costs, inst.info.costs)
        np.testing.assert_array_equal(back.info.dists, inst.info.dists)
        np.testing.assert_array_equal(back.support.beliefs, inst.support.beliefs)
        np.testing.assert_array_equal(back.utility.u_table, inst.utility.u_table)
        assert back.b_s == inst.b_s and back.b_u == inst.b_u

    def test_schema_fields(self):
        inst = make_instance(
            costs=[0.0],
            support_rows=[[0.5, 0.5]],
            dists=[[1.0]],
            u_table=[[0.1, 0.2]],
        )
        doc = json.loads(core.instance_to_json(inst))
        assert set(doc) >= {"states", "actions", "support", "utility", "b_s", "b_u"}
        assert doc["actions"][0].keys() == {"cost", "q"}
