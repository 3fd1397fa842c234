import json

import numpy as np
import pytest

from infoacq import cli, core
from infoacq.agent import best_response
from infoacq.core import InformationStructure, InvalidInputError, ScoringRule
from infoacq.harness import (
    Environment,
    ExperimentConfig,
    compute_regret,
    fit_loglog_slope,
    gen_hard_instance,
    gen_random_instance,
    ground_truth_oracle,
    hard_instance_score_vector,
    instance_hash,
    max_margin_rule,
    oracle_from_json,
    oracle_to_json,
    play_episode,
    read_trace,
    run_experiment,
    write_trace,
)
from infoacq.learner import ScoringRuleLearner
from infoacq.offline import solve_stackelberg


def oracle_seed(k=2, m=2, n=2, start=0):
    for seed in range(start, start + 200):
        inst = gen_random_instance(k=k, m=m, n_states=n, b_s=1.0, b_u=1.0, seed=seed)
        try:
            ground_truth_oracle(inst)
            return seed, inst
        except InvalidInputError:
            continue
    raise RuntimeError("no oracle-compatible seed found")


class TestGenerators:
    def test_random_instance_deterministic(self):
        a = gen_random_instance(k=3, m=4, n_states=2, b_s=1.0, b_u=2.0, seed=9)
        b = gen_random_instance(k=3, m=4, n_states=2, b_s=1.0, b_u=2.0, seed=9)
        assert core.instance_to_json(a) == core.instance_to_json(b)

    def test_degenerate_dimensions(self):
        inst = gen_random_instance(k=1, m=1, n_states=1, b_s=1.0, b_u=1.0, seed=0)
        assert inst.support.m == 1

    def test_costs_sorted_within_bound(self):
        inst = gen_random_instance(k=4, m=3, n_states=3, b_s=2.0, b_u=1.0, seed=3)
        assert np.all(np.diff(inst.info.costs) >= 0)
        assert inst.info.costs.max() <= 1.0

    def test_solveable_midsize_instance(self):
        inst = gen_random_instance(k=3, m=4, n_states=2, b_s=1.0, b_u=1.0, seed=1)
        k, sol = solve_stackelberg(inst)
        assert sol.feasible and 0 <= k < 3

    def test_infeasible_separation_raises(self):
        with pytest.raises(InvalidInputError):
            gen_random_instance(k=1, m=400, n_states=2, b_s=1.0, b_u=1.0, seed=0)


class TestHardInstance:
    def test_e1_range_checked(self):
        with pytest.raises(InvalidInputError):
            gen_hard_instance(-0.75)
        with pytest.raises(InvalidInputError):
            gen_hard_instance(0.25)

    def test_q_difference_structure(self):
        inst = gen_hard_instance(-0.25)
        q = inst.info.dists
        np.testing.assert_allclose(q[1] - q[0], np.array([0, -1, 1]) / 16)
        np.testing.assert_allclose(q[1] - q[2], np.array([1, 1, -2]) / 16)

    def test_margin_conditions_exact(self):
        for e1 in (-0.25, -0.5):
            inst = gen_hard_instance(e1)
            u_sigma = inst.u_sigma()
            s_star = hard_instance_score_vector(e1)
            q = inst.info.dists
            for j in (0, 2):
                margin = (q[1] - q[j]) @ (u_sigma - s_star)
                assert margin == pytest.approx(2.0, abs=1e-9)

    def test_utility_targets_realized_exactly(self):
        inst = gen_hard_instance(-0.5)
        np.testing.assert_allclose(inst.u_sigma(), [97.0, 0.5, 32.0], atol=1e-12)

    def test_costs_encode_e1(self):
        e1 = -0.3
        inst = gen_hard_instance(e1)
        c = inst.info.costs
        beta = 1 / 16
        assert (c[1] - c[0]) / beta == pytest.approx(e1)
        assert (c[1] - c[2]) / beta == pytest.approx(1 - e1)
        assert np.all(c >= 0)

    def test_widened_region_admits_oracle(self):
        inst = gen_hard_instance(-0.5, v2_width=0.25)
        oracle = ground_truth_oracle(inst)
        for k, rule in enumerate(oracle.rules):
            assert best_response(inst, rule) == k
        with pytest.raises(InvalidInputError):
            ground_truth_oracle(gen_hard_instance(-0.5))


class TestRegretAccounting:
    def test_empty_trace(self):
        assert compute_regret(np.zeros(0), 1.0).shape == (0,)

    def test_linear_when_constant_shortfall(self):
        reg = compute_regret(np.full(100, 2.0), h_star=3.0)
        np.testing.assert_allclose(reg, np.arange(1, 101, dtype=float))

    def test_zero_when_profit_matches_optimum(self):
        reg = compute_regret(np.full(50, 3.0), h_star=3.0)
        np.testing.assert_allclose(reg, 0.0, atol=1e-12)

    def test_increments_consistent(self):
        rng = np.random.default_rng(0)
        profits = rng.normal(size=200)
        reg = compute_regret(profits, h_star=0.5)
        diffs = np.diff(reg)
        np.testing.assert_allclose(diffs, 0.5 - profits[1:], atol=1e-12)


class TestSlopeFit:
    def test_exact_power_laws(self):
        t = np.arange(1, 2001, dtype=float)
        assert fit_loglog_slope(t, t, t_min=10) == pytest.approx(1.0, abs=1e-6)
        assert fit_loglog_slope(t, t ** (2 / 3), t_min=10) == pytest.approx(2 / 3, abs=1e-6)

    def test_needs_enough_points(self):
        t = np.arange(1, 15, dtype=float)
        with pytest.raises(InvalidInputError):
            fit_loglog_slope(t, t, t_min=1)


class TestEpisodesAndTraces:
    def test_trace_replay_is_byte_identical(self, tmp_path):
        seed, inst = oracle_seed()
        oracle = ground_truth_oracle(inst)
        path = tmp_path / "oracle.json"
        path.write_text(oracle_to_json(oracle))
        config = ExperimentConfig(
            t=120, seeds=(seed,), oracle_mode="given-file", oracle_file=str(path),
            known_support=True, out_dir=str(tmp_path / "a"),
        )
        run_experiment(config, inst)
        config2 = ExperimentConfig.from_dict(config.to_dict())
        config2.out_dir = str(tmp_path / "b")
        run_experiment(config2, inst)
        a = (tmp_path / "a" / f"trace_seed{seed}.csv").read_bytes()
        b = (tmp_path / "b" / f"trace_seed{seed}.csv").read_bytes()
        # headers embed the config (incl. out_dir); rows must match exactly
        assert a.split(b"\n", 1)[1] == b.split(b"\n", 1)[1]

    def test_trace_schema_and_regret_consistency(self, tmp_path):
        seed, inst = oracle_seed(start=20)
        oracle = ground_truth_oracle(inst)
        path = tmp_path / "oracle.json"
        path.write_text(oracle_to_json(oracle))
        config = ExperimentConfig(
            t=150, seeds=(seed,), oracle_mode="given-file", oracle_file=str(path),
            known_support=True, out_dir=str(tmp_path),
        )
        run_experiment(config, inst)
        meta, data = read_trace(tmp_path / f"trace_seed{seed}.csv")
        assert meta["schema"] == 1
        assert meta["instance"] == instance_hash(inst)
        profits = data[:, 4]
        reg = compute_regret(profits, meta["h_star"])
        np.testing.assert_allclose(reg, data[:, 5], atol=1e-6)

    def test_acquisition_rounds_count_toward_horizon(self):
        seed, inst = oracle_seed(start=40)
        _, best = solve_stackelberg(inst)
        config = ExperimentConfig(
            t=400, seeds=(seed,), oracle_mode="random-sampling", beta=0.05,
            d2_floor=0.05, acquisition_budget=300, discovery_window=10,
        )
        env, learner = play_episode(inst, config, seed, best.h_star)
        assert env.t == 400
        assert env.acquisition_rounds > 0

    def test_baseline_policy_needs_no_oracle(self):
        inst = gen_hard_instance(-0.5)
        _, best = solve_stackelberg(inst)
        config = ExperimentConfig(t=200, seeds=(1,), policy="random-proper", oracle_mode="none")
        env, learner = play_episode(inst, config, 1, best.h_star)
        assert learner is None
        assert env.t == 200

    def test_learner_never_touches_private_structure(self):
        seed, inst = oracle_seed(start=60)
        _, best = solve_stackelberg(inst)
        oracle = ground_truth_oracle(inst)
        config = ExperimentConfig(t=100, seeds=(seed,), known_support=True)
        env = Environment(inst, seed, best.h_star)
        from infoacq.harness import _learner_config

        learner = ScoringRuleLearner(_learner_config(inst, config), oracle)
        while env.t < 100:
            plan = learner.plan_round()
            outcome = env.deploy(plan.s_deployed, k_star=plan.k_star, alpha=plan.alpha)
            learner.observe(plan, outcome)
        seen = set()

        def scan(obj, depth=0):
            if id(obj) in seen or depth > 6:
                return
            seen.add(id(obj))
            assert not isinstance(obj, InformationStructure)
            assert not isinstance(obj, type(inst))
            if hasattr(obj, "__dict__"):
                for v in vars(obj).values():
                    scan(v, depth + 1)
            elif isinstance(obj, (list, tuple)):
                for v in obj:
                    scan(v, depth + 1)

        scan(learner)

    def test_parallel_seed_pool_matches_serial(self, tmp_path):
        seed, inst = oracle_seed(start=80)
        oracle = ground_truth_oracle(inst)
        path = tmp_path / "oracle.json"
        path.write_text(oracle_to_json(oracle))
        base = dict(
            t=80, oracle_mode="given-file", oracle_file=str(path), known_support=True
        )
        serial = run_experiment(
            ExperimentConfig(seeds=(seed, seed + 1), n_jobs=1, **base), inst
        )
        parallel = run_experiment(
            ExperimentConfig(seeds=(seed, seed + 1), n_jobs=2, **base), inst
        )
        for a, b in zip(serial, parallel):
            assert a.final_regret == b.final_regret


class TestOracleSerialization:
    def test_round_trip(self):
        _, inst = oracle_seed(start=100)
        oracle = ground_truth_oracle(inst)
        back = oracle_from_json(oracle_to_json(oracle))
        assert back.epsilon == oracle.epsilon
        for a, b in zip(oracle.rules, back.rules):
            np.testing.assert_array_equal(a.table, b.table)


class TestMarginPrograms:
    def test_max_margin_rule_is_interior(self):
        seed, inst = oracle_seed(start=120)
        for k in range(inst.n_actions):
            margin, rule = max_margin_rule(inst, k)
            if margin > 0:
                g = [core.agent_profit(inst, rule, j) for j in range(inst.n_actions)]
                other = max(v for j, v in enumerate(g) if j != k)
                assert g[k] - other == pytest.approx(margin, abs=1e-7)

    def test_ground_truth_oracle_verified(self):
        seed, inst = oracle_seed(start=140)
        oracle = ground_truth_oracle(inst)
        for k, rule in enumerate(oracle.rules):
            assert best_response(inst, rule) == k
            g = [core.agent_profit(inst, rule, j) for j in range(inst.n_actions)]
            other = max(v for j, v in enumerate(g) if j != k)
            assert g[k] - other > oracle.epsilon


class TestCli:
    def test_gen_solve_round_trip(self, tmp_path, capsys):
        out = tmp_path / "inst.json"
        assert cli.main(["gen", "hard", "--e1", "-0.5", "--out", str(out)]) == 0
        assert cli.main(["solve", str(out)]) == 0
        printed = capsys.readouterr().out
        assert "optimal action: 1" in printed

    def test_run_subcommand(self, tmp_path):
        seed, inst = oracle_seed(start=160)
        inst_path = tmp_path / "inst.json"
        inst_path.write_text(core.instance_to_json(inst))
        oracle_path = tmp_path / "oracle.json"
        oracle_path.write_text(oracle_to_json(ground_truth_oracle(inst)))
        config = ExperimentConfig(
            t=60, seeds=(seed,), oracle_mode="given-file",
            oracle_file=str(oracle_path), known_support=True,
            out_dir=str(tmp_path / "runs"),
        )
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(json.dumps(config.to_dict()))
        code = cli.main(["run", "--instance", str(inst_path), "--config", str(cfg_path)])
        assert code == 0
        assert (tmp_path / "runs" / "summary.csv").exists()

    def test_oracle_subcommand_partial_exit_code(self, tmp_path):
        inst = gen_random_instance(k=2, m=2, n_states=2, b_s=1.0, b_u=1.0, seed=0)
        inst_path = tmp_path / "inst.json"
        inst_path.write_text(core.instance_to_json(inst))
        config = ExperimentConfig(
            t=100, seeds=(3,), oracle_mode="random-sampling",
            acquisition_budget=30, discovery_window=50,
        )
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(json.dumps(config.to_dict()))
        code = cli.main(["oracle", "--instance", str(inst_path), "--config", str(cfg_path)])
        assert code == 2

    def test_error_exit_code(self, tmp_path):
        assert cli.main(["solve", str(tmp_path / "missing.json")]) == 1
