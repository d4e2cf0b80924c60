from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest
from helpers import FIXTURES, hcount_cases, tiny_problem

from stalm.bench import layout
from stalm.bench.problems import bundled_problem
from stalm.llm import LLMError, LLMRequest, ReplayBackend
from stalm.motion import Env, compute_literals
from stalm.planner import (
    HcountValue,
    PlannerConfig,
    StalmPlanner,
    concretize,
    hcount,
    hcount_value,
    stalm,
    uct_baseline,
    warm_started_uct,
)
from stalm.planner.concretize import INFEASIBLE, PARTIAL, PRECONDITION
from stalm.planner.hcount import occluder_closure
from stalm.planner.toy import TwoStepMDP
from stalm.prompt import PromptBundle
from stalm.world import Direction, DiscreteAction

P1_PLAN = FIXTURES / "replay" / "p1_analog.0.0.txt"


def scripted(tmp_path, name, texts):
    for i, t in enumerate(texts):
        (tmp_path / f"{name}.0.{i}.txt").write_text(t, encoding="utf-8")
    return ReplayBackend(tmp_path, name)


CASES = hcount_cases()


class TestHcount:
    @pytest.mark.parametrize("case", CASES, ids=[c[0] for c in CASES])
    def test_hand_states(self, case):
        _, env, s, target, L, h, v = case
        assert hcount(env, s, target, L) == h
        assert hcount_value(env, s, target, L) == v

    def test_closure_excludes_world(self):
        _, env, *_ = CASES[3]
        L = CASES[3][4]
        assert occluder_closure(L, env.problem.goal, env.problem.kind) == {"kitchen_door"}

    def test_reward_scale_multiplies(self):
        _, env, s, target, L, _, v = CASES[0]
        assert hcount_value(Env(env.problem, env.roadmap, reward_scale=2.0), s, target, L) == 2 * v

    def test_value_function_never_rolls_out(self, p4_env):
        d = uct_baseline(p4_env, p4_env.problem.s0, 0, PlannerConfig(baseline_budget=10), "hcount", np.random.default_rng(0))
        assert d.search.stats.rollouts == 0 and d.search.stats.value_calls > 0

    def test_value_uses_real_literals(self, p4_env):
        s = p4_env.problem.s0
        v = HcountValue(p4_env)
        assert v(s, 0, None, None) == hcount_value(p4_env, s, None, compute_literals(p4_env, s))


class TestConcretize:
    def test_single_action_plan(self):
        prob = tiny_problem([layout.movable("can", layout.CAN, [1.2, 5.0, 0.0])], [["can", "on", "table1"]])
        env = Env.build(prob)
        held = replace(prob.s0, poses=(), holding="can", held_yaw=0.0)
        res = concretize(env, [[DiscreteAction.place("can", Direction.ON, "table1")]], held, 0, PlannerConfig(), np.random.default_rng(0))
        assert res.success and len(res.solution) == 1

    def test_occluded_first_pick(self, p4_env):
        res = concretize(p4_env, [[DiscreteAction.pick("salter")]], p4_env.problem.s0, 0, PlannerConfig(), np.random.default_rng(0))
        assert not res.success
        (plan,) = res.plans
        assert len(plan) == 1 and plan.end_state.failed and res.failure_tags == (PRECONDITION,)

    def test_goal_reached_early_truncates(self, p1_env):
        text = P1_PLAN.read_text()
        from stalm.prompt import parse_response

        actions = list(parse_response(text, p1_env.problem).plan.actions)
        extra = actions + [DiscreteAction.pick("bottle1"), DiscreteAction.place("bottle1", Direction.ON, "table2")]
        res = concretize(p1_env, [extra], p1_env.problem.s0, 0, PlannerConfig(), np.random.default_rng(0))
        assert res.success and len(res.solution) == len(actions)

    def test_horizon_cuts_plan(self, p1_env):
        acts = [DiscreteAction.open("kitchen_door"), DiscreteAction.pick("bottle1")]
        res = concretize(p1_env, [acts], p1_env.problem.s0, 19, PlannerConfig(), np.random.default_rng(0))
        assert len(res.plans[0]) == 1 and res.failure_tags == (PARTIAL,)

    def test_failed_sample_tag(self):
        class Unlucky(TwoStepMDP):
            def step(self, s, a, k):
                return s + (a,), -6.0, a != "r"

            def symbolic_ok(self, s, a):
                return True

        res = concretize(Unlucky(), [["l", "r", "l"]], (), 0, PlannerConfig(), np.random.default_rng(0))
        assert res.failure_tags == (INFEASIBLE,) and len(res.plans[0]) == 2


class TestStalm:
    def test_feasible_plan_short_circuits(self, p1_env, tmp_path):
        backend = scripted(tmp_path, "p1_analog", [P1_PLAN.read_text()])
        d = stalm(p1_env, p1_env.problem.s0, 0, PlannerConfig(), backend)
        assert d.plan is not None and d.plan.achieved_goal and d.simulations == 0

    def test_flawed_plan_falls_back_to_search(self, tmp_path):
        prob = bundled_problem("p2_analog")
        env = Env.build(prob)
        backend = scripted(tmp_path, prob.name, [(FIXTURES / "responses" / "p2_analog.txt").read_text()])
        d = stalm(env, prob.s0, 0, PlannerConfig(n_budget=8), backend)
        assert d.plan is None and d.search is not None and d.simulations == 8
        assert d.concretized.plans and not d.concretized.success

    def test_garbage_equals_plain_uct(self, p4_env, tmp_path):
        backend = scripted(tmp_path, "p4_analog", ["no plan here", "plan = [('fly', 'plate')]"])
        cfg = PlannerConfig(n_budget=6)
        planner = StalmPlanner(p4_env, cfg, backend)
        d = planner.decide(p4_env.problem.s0, 0, np.random.default_rng(5))
        ref = warm_started_uct(p4_env, [], p4_env.problem.s0, 0, cfg, rng=np.random.default_rng(5))
        assert d.search.tree.signature() == ref.tree.signature()
        assert planner.n_parse_failures == 2

    def test_carried_plans_on_llm_error(self, p1_env, tmp_path):
        backend = scripted(tmp_path, "p1_analog", [P1_PLAN.read_text()])
        planner = StalmPlanner(p1_env, PlannerConfig(), backend)
        first = planner.task_plans(p1_env.problem.s0)
        planner.advance(first[0][0])
        again = planner.task_plans(p1_env.problem.s0)  # replay exhausted
        assert again == [first[0][1:]]
        with pytest.raises(LLMError):
            backend.query(LLMRequest(PromptBundle("", "")))

    def test_advance_keeps_detours(self, p1_env):
        planner = StalmPlanner(p1_env, PlannerConfig(), None)
        a, b, c = DiscreteAction.open("kitchen_door"), DiscreteAction.pick("bottle1"), DiscreteAction.pick("bottle2")
        planner.carried = [(a, b), (c,), (a,)]
        planner.advance(a)
        assert planner.carried == [(b,), (c,)]

    def test_single_query(self, p1_env, tmp_path):
        backend = scripted(tmp_path, "p1_analog", [P1_PLAN.read_text()])
        planner = StalmPlanner(p1_env, PlannerConfig(single_query=True), backend)
        planner.task_plans(p1_env.problem.s0)
        planner.task_plans(p1_env.problem.s0)
        assert planner.n_llm_calls == 1 and backend.call == 1


class TestBaselines:
    def trivial(self):
        prob = tiny_problem([layout.movable("can", layout.CAN, [1.2, 5.0, 0.0])], [["can", "on", "table2"]])
        held = replace(prob.s0, poses=(), holding="can", held_yaw=0.0, base=prob.region_map["table1"].base_pose)
        return Env.build(replace(prob, s0=held)), held

    def test_trivial_problem_solved(self):
        env, s = self.trivial()
        d = uct_baseline(env, s, 0, PlannerConfig(), "uct", np.random.default_rng(0))
        assert d.action == DiscreteAction.place("can", Direction.ON, "table2")
        assert d.search.stats.simulations == 35

    def test_same_seed_same_action(self, p4_env):
        s = p4_env.problem.s0
        a = uct_baseline(p4_env, s, 0, PlannerConfig(baseline_budget=15), "uct", np.random.default_rng(9))
        b = uct_baseline(p4_env, s, 0, PlannerConfig(baseline_budget=15), "uct", np.random.default_rng(9))
        assert (a.action, a.params) == (b.action, b.params)

    def test_unknown_variant(self, p4_env):
        with pytest.raises(ValueError):
            uct_baseline(p4_env, p4_env.problem.s0, 0, PlannerConfig(), "random")

    @pytest.mark.parametrize("seed", range(2))
    def test_empty_warm_up_equivalence(self, p4_env, seed):
        cfg = PlannerConfig(n_budget=12, baseline_budget=12)
        s = p4_env.problem.s0
        a = warm_started_uct(p4_env, [], s, 0, cfg, rng=np.random.default_rng(seed))
        b = uct_baseline(p4_env, s, 0, cfg, "uct", np.random.default_rng(seed))
        assert a.tree.signature() == b.search.tree.signature()

    @pytest.mark.parametrize("seed", range(3))
    def test_argmax_stable_under_reward_scaling(self, p4, seed):
        # c_uct is measured in reward units, so it scales with the rewards
        one = Env.build(p4)
        two = Env(p4, one.roadmap, reward_scale=2.0)
        cfg = PlannerConfig(baseline_budget=20)
        a = uct_baseline(one, p4.s0, 0, cfg, "uct", np.random.default_rng(seed))
        b = uct_baseline(two, p4.s0, 0, replace(cfg, c_uct=2 * cfg.c_uct), "uct", np.random.default_rng(seed))
        assert (a.action, a.params) == (b.action, b.params)
