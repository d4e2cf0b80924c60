from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stalm.oracle import check_backups
from stalm.planner import ConcretePlan, PlannerConfig, Search, Step, best_root_entry, warm_started_uct
from stalm.planner.toy import TwoStepMDP

CFG = PlannerConfig(horizon=2, trace=True)


class OneShot:
    """Single legal action worth +3 that reaches the goal; ``bad`` fails with -6."""

    def __init__(self, actions=("a",)):
        self.actions = list(actions)

    def legal_actions(self, s):
        return [] if s != "start" else self.actions

    def sample(self, s, a, rng):
        return None if a == "bad" else 0.5

    def step(self, s, a, k):
        if a == "bad":
            return "failed", -6.0, False
        return "goal", 3.0, True

    def is_goal(self, s):
        return s == "goal"

    def is_failed(self, s):
        return s == "failed"


def plan_of(model, s0, actions, kappas):
    steps, s = [], s0
    for a, k in zip(actions, kappas):
        s2, r, ok = model.step(s, a, k)
        steps.append(Step(a, k, r, s2, ok))
        s = s2
        if not ok:
            break
    return ConcretePlan(s0, tuple(steps), model.is_goal(s))


class TestSimulate:
    def test_single_path_value(self):
        search = warm_started_uct(OneShot(), [], "start", 0, PlannerConfig(horizon=5), budget=1)
        assert search.tree.root.edge_q["a"] == 3.0

    def test_pw_bound_at_hundred_visits(self):
        s = Search(TwoStepMDP(continuous=True), CFG)
        assert s.pw_bound(100) == pytest.approx(1.5 * 100**0.15)
        assert 2.98 < s.pw_bound(100) < 3.0
        # draws happen while |U| <= 2.99, so at most three entries
        assert math.floor(s.pw_bound(100)) + 1 == 3

    def test_infeasible_branch(self):
        search = warm_started_uct(OneShot(("bad",)), [], "start", 0, PlannerConfig(horizon=5), budget=3)
        root = search.tree.root
        (entry,) = root.children["bad"].entries
        assert entry.reward == -6.0 and not entry.feasible
        assert entry.child.children == {} and root.edge_q["bad"] == -6.0

    def test_pw_never_violated(self):
        cfg = PlannerConfig(horizon=2, trace=True)
        search = warm_started_uct(TwoStepMDP(continuous=True), [], (), 0, cfg, budget=3000, rng=np.random.default_rng(0))
        assert search.stats.pw_draws
        for u, n in search.stats.pw_draws:
            assert u <= cfg.k_alpha * n**cfg.c_alpha
        for node in search.tree.walk():
            if hasattr(node, "entries"):
                assert len(node.entries) <= cfg.k_alpha * node.n**cfg.c_alpha + 1

    def test_backups_match_log(self):
        search = warm_started_uct(TwoStepMDP(), [], (), 0, PlannerConfig(horizon=2, n_budget=500), rng=np.random.default_rng(0))
        check = check_backups(search.tree)
        assert check.max_error <= 1e-9 and check.records > 0

    def test_finds_best_two_step_plan(self):
        search = warm_started_uct(TwoStepMDP(), [], (), 0, PlannerConfig(horizon=2, n_budget=500), rng=np.random.default_rng(0))
        a, _ = best_root_entry(search.tree.root)
        assert a == "l"  # l then r is worth 1 + 0.99 * 3

    @given(st.integers(1, 8), st.integers(0, 2**16))
    def test_horizon_safety(self, horizon, seed):
        cfg = PlannerConfig(horizon=horizon)
        mdp = TwoStepMDP(depth=horizon + 3)
        search = warm_started_uct(mdp, [], (), 0, cfg, budget=40, rng=np.random.default_rng(seed))
        assert search.stats.max_depth <= horizon
        assert all(node.depth <= horizon for node in search.tree.walk() if hasattr(node, "depth"))


class TestRollout:
    def test_goal_and_failure_are_zero(self):
        s = Search(OneShot(), PlannerConfig())
        assert s.rollout("goal", 0) == 0.0
        assert s.rollout("failed", 0) == 0.0

    def test_seeded(self):
        a = Search(TwoStepMDP(depth=6, continuous=True), PlannerConfig(horizon=6), rng=np.random.default_rng(4)).rollout((), 0)
        b = Search(TwoStepMDP(depth=6, continuous=True), PlannerConfig(horizon=6), rng=np.random.default_rng(4)).rollout((), 0)
        assert a == b

    def test_capped_by_horizon(self):
        mdp = TwoStepMDP(depth=50)
        s = Search(mdp, PlannerConfig(horizon=20, rollout_depth=5))
        s.rollout((), 18)
        assert mdp.step_calls == 2


class TestWarmUp:
    def test_one_step_plan(self):
        m = OneShot()
        search = warm_started_uct(m, [plan_of(m, "start", ["a"], [0.5])], "start", 0, PlannerConfig(), budget=0)
        root = search.tree.root
        assert root.n == 1 and list(root.children) == ["a"]
        (entry,) = root.children["a"].entries
        assert entry.child.state == "goal" and entry.child.children == {}
        assert root.edge_q["a"] == 3.0

    def test_shared_first_action(self):
        m = TwoStepMDP(continuous=True)
        plans = [plan_of(m, (), ["l", "r"], [0.1, 0.2]), plan_of(m, (), ["l", "l"], [0.3, 0.4])]
        search = warm_started_uct(m, plans, (), 0, CFG, budget=0)
        cont = search.tree.root.children["l"]
        assert [e.kappa for e in cont.entries] == [0.1, 0.3] and cont.n == 2

    def test_failure_leaf_is_terminal(self):
        m = OneShot(("bad",))
        plan = plan_of(m, "start", ["bad"], [None])
        search = warm_started_uct(m, [plan], "start", 0, PlannerConfig(), budget=0)
        (entry,) = search.tree.root.children["bad"].entries
        assert entry.q == -6.0 and search.stats.rollouts == 0

    def test_budget_zero_is_warm_up_only(self):
        m = TwoStepMDP()
        plans = [plan_of(m, (), ["r", "l"], [None, None])]
        a = warm_started_uct(m, plans, (), 0, CFG, budget=0)
        b = Search(m, CFG)
        b.warm_up(b.root_for((), 0), plans)
        assert a.tree.signature() == b.tree.signature() and a.stats.simulations == 0

    def test_dominance_at_zero_budget(self):
        m = TwoStepMDP()
        plans = [plan_of(m, (), ["r", "l"], [None, None])]
        search = warm_started_uct(m, plans, (), 0, CFG, budget=0)
        assert search.tree.root.edge_n["r"] >= 1
        assert best_root_entry(search.tree.root)[0] == "r"

    def test_partial_plan_bootstraps_from_value(self):
        m = TwoStepMDP()
        calls = []

        def value(s, depth, a, parent):
            calls.append((s, depth))
            return 10.0

        plans = [plan_of(m, (), ["l"], [None])]
        search = warm_started_uct(m, plans, (), 0, CFG, budget=0, value_fn=value)
        assert calls == [(("l",), 1)]
        assert search.tree.root.edge_q["l"] == pytest.approx(1.0 + 0.99 * 10.0)


class TestRootChoice:
    def test_legal_filter(self):
        m = TwoStepMDP()
        search = warm_started_uct(m, [plan_of(m, (), ["l", "r"], [None, None])], (), 0, CFG, budget=0)
        assert best_root_entry(search.tree.root, ["r"]) is None
        assert best_root_entry(search.tree.root, ["l", "r"])[0] == "l"

    def test_empty_tree(self):
        search = warm_started_uct(TwoStepMDP(), [], (), 0, CFG, budget=0)
        assert best_root_entry(search.tree.root) is None

    def test_ties_keep_earliest(self):
        m = TwoStepMDP(rewards={("l",): 1.0, ("r",): 1.0, ("l", "l"): 0.0, ("l", "r"): 0.0, ("r", "l"): 0.0, ("r", "r"): 0.0})
        plans = [plan_of(m, (), ["r", "l"], [None, None]), plan_of(m, (), ["l", "l"], [None, None])]
        search = warm_started_uct(m, plans, (), 0, CFG, budget=0)
        assert best_root_entry(search.tree.root)[0] == "r"


class TestConfig:
    @pytest.mark.parametrize("kw", [{"gamma": 0.0}, {"gamma": 1.5}, {"c_alpha": 1.0}, {"k_alpha": 0.0}, {"horizon": 0}, {"n_budget": -1}])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            PlannerConfig(**kw)

    def test_defaults(self):
        c = PlannerConfig()
        assert (c.n_batch, c.n_budget, c.baseline_budget, c.horizon) == (5, 30, 35, 20)
        assert (c.gamma, c.c_uct, c.k_alpha, c.c_alpha) == (0.99, 50.0, 1.5, 0.15)
