"""The ten acceptance criteria, each at its stated tolerance and time limit."""

from __future__ import annotations

import time
from dataclasses import replace

import numpy as np
from helpers import FIXTURES, hcount_cases, random_episode, verdict
from hypothesis import given, settings
from hypothesis import strategies as st
from test_prompt import EXPECTED, VOCAB, actions

from stalm.bench.problems import bundled_names, bundled_problem
from stalm.bench.runner import run_suite, run_trial
from stalm.bench.scenes import random_scene
from stalm.llm import ReplayBackend
from stalm.motion import Env, LiteralCache, compute_literals
from stalm.motion.env import MotionConfig
from stalm.motion.prm import build_roadmap, nav_obstacles
from stalm.oracle import OcclusionOracle, OracleReport, check_backups
from stalm.planner import (
    PlannerConfig,
    best_root_entry,
    hcount,
    hcount_value,
    uct_baseline,
    warm_started_uct,
)
from stalm.planner.search import PWViolation
from stalm.planner.toy import TwoStepMDP
from stalm.prompt import (
    CLOSING_LINE,
    create_prompt,
    format_plan,
    parse_response,
    state_hash,
)
from stalm.world import CONJUNCT_REWARD, INFEASIBLE_REWARD, satisfied_conjuncts

REPLAY = FIXTURES / "replay"


class Scenes:
    """Random scenes sharing roadmaps: most scenes differ only in movables."""

    def __init__(self) -> None:
        self.mc = MotionConfig()
        self.roadmaps: dict = {}

    def env(self, seed: int) -> Env:
        prob = random_scene(seed)
        key = (nav_obstacles(prob), prob.robot_footprint)
        if key not in self.roadmaps:
            self.roadmaps[key] = build_roadmap(prob, self.mc.prm_samples, self.mc.prm_k, self.mc.prm_seed)
        return Env(prob, self.roadmaps[key], self.mc)


def test_01_occlusion_oracle():
    t0 = time.perf_counter()
    scenes, report = Scenes(), OracleReport()
    n_movables, n_doors = set(), set()
    for seed in range(200):
        env = scenes.env(seed)
        n_movables.add(len(env.problem.movables))
        n_doors.add(len(env.problem.doors))
        OcclusionOracle(env).compare(env.problem.s0, report)
    dt = time.perf_counter() - t0
    ok = not report.mismatches and not report.conservatism and dt < 60.0
    verdict(
        1,
        ok,
        f"{report.checks} groundings over 200 scenes, {len(report.mismatches)} mismatches,"
        f" {len(report.conservatism)} conservatism exceptions, {report.sampling_gaps} sub-resolution contacts, {dt:.1f}s",
    )
    assert n_movables <= {3, 4, 5, 6} and n_doors == {1}
    assert report.mismatches == [] and report.conservatism == []
    assert dt < 60.0


def test_02_cache_transparency():
    t0 = time.perf_counter()
    scenes = Scenes()
    bundled = [Env.build(bundled_problem(n)) for n in bundled_names()]
    episodes, checked, diffs = 0, 0, 0
    for seed in range(100):
        # alternate the bundled problems with random scenes
        env = scenes.env(seed) if seed % 2 else bundled[seed // 2 % len(bundled)]
        rng = np.random.default_rng(seed)
        cache = LiteralCache(env)
        s = env.problem.s0
        compute_literals(env, s, cache)
        for prev, _, _, s2, _, ok in random_episode(env, s, rng, 10, symbolic=True):
            if not ok:
                break
            checked += 1
            diffs += compute_literals(env, s2, cache, prev) != compute_literals(env, s2)
        episodes += 1
    dt = time.perf_counter() - t0
    verdict(2, diffs == 0 and dt < 120.0, f"{episodes} episodes, {checked} states, {diffs} differences, {dt:.1f}s")
    assert diffs == 0 and checked > 100
    assert dt < 120.0


def test_03_backups_and_pw_bound():
    search = warm_started_uct(TwoStepMDP(), [], (), 0, PlannerConfig(horizon=2, n_budget=500), rng=np.random.default_rng(0))
    chk = check_backups(search.tree)
    cfg = PlannerConfig(horizon=3, trace=True)
    steps, violations, seed = 0, 0, 0
    assert (cfg.k_alpha, cfg.c_alpha) == (1.5, 0.15)
    while steps < 10_000:
        mdp = TwoStepMDP(depth=3, continuous=True)
        try:
            fuzz = warm_started_uct(mdp, [], (), 0, cfg, budget=500, rng=np.random.default_rng(seed))
        except PWViolation:
            violations += 1
            break
        steps += fuzz.stats.pw_checks
        violations += sum(u > cfg.k_alpha * n**cfg.c_alpha for u, n in fuzz.stats.pw_draws)
        violations += sum(
            len(node.entries) > cfg.k_alpha * node.n**cfg.c_alpha + 1 for node in fuzz.tree.walk() if hasattr(node, "entries")
        )
        seed += 1
    ok = chk.max_error <= 1e-9 and chk.records > 0 and violations == 0
    verdict(3, ok, f"max |Q - mean| = {chk.max_error:.1e} over {chk.keys} keys; {steps} fuzzed steps, {violations} PW violations")
    assert chk.max_error <= 1e-9 and chk.records > 0
    assert violations == 0 and steps >= 10_000


def test_04_parser_fixtures():
    lengths, exact = [], True
    for i in range(1, 7):
        name = f"p{i}_analog"
        plan = parse_response((FIXTURES / "responses" / f"{name}.txt").read_text(encoding="utf-8"), VOCAB).plan
        lengths.append(len(plan))
        exact &= [a.as_tuple() for a in plan] == EXPECTED[name]
    failures = []

    @settings(max_examples=1000, database=None)
    @given(st.lists(actions(), min_size=1, max_size=15))
    def round_trip(plan):
        if list(parse_response(format_plan(plan), VOCAB).plan.actions) != plan:
            failures.append(plan)
        assert not failures

    rt_ok = True
    try:
        round_trip()
    except AssertionError:
        rt_ok = False
    ok = lengths == [13, 7, 4, 6, 7, 7] and exact and rt_ok
    verdict(4, ok, f"lengths {lengths}, exact tuples {exact}, 1000-case round trip {'ok' if rt_ok else 'failed'}")
    assert lengths == [13, 7, 4, 6, 7, 7] and exact
    assert rt_ok


def test_05_prompt_golden():
    prob = bundled_problem("p5_analog")
    env = Env.build(prob)
    renders = [create_prompt(prob.s0, prob.goal, prob, compute_literals(env, prob.s0)).user_text for _ in range(10)]
    golden = (FIXTURES / "prompts" / f"{prob.name}.{state_hash(prob.s0)}.prompt.txt").read_text(encoding="utf-8")
    text = renders[0]
    marks = ["### Domain ###", "(:objects", "(:init", "(:goal"]
    skeleton = all(m in text for m in marks) and [text.index(m) for m in marks] == sorted(text.index(m) for m in marks)
    closing = text.rstrip("\n").splitlines()[-1] == CLOSING_LINE == "Generate a plan to achieve the goals from init."
    stable = len({r.encode() for r in renders}) == 1 and text == golden
    verdict(5, skeleton and closing and stable, f"skeleton {skeleton}, closing line {closing}, 10 renders byte-identical to golden {stable}")
    assert skeleton and closing and stable


def test_06_concretize_short_circuit(p1):
    env = Env.build(p1)
    times, wins, sims = [], 0, 0
    for seed in range(20):
        t0 = time.perf_counter()
        res = run_trial(p1, "stalm", seed, PlannerConfig(), ReplayBackend(REPLAY, p1.name), env=env)
        times.append(time.perf_counter() - t0)
        wins += res.success
        sims += res.n_simulations
    ok = wins == 20 and sims == 0 and max(times) < 10.0
    verdict(6, ok, f"{wins}/20 successes, {sims} simulations, slowest trial {max(times):.2f}s")
    assert wins == 20 and sims == 0
    assert max(times) < 10.0


def test_07_warm_start_benefit(p4):
    cfg = PlannerConfig()
    assert (cfg.n_batch, cfg.n_budget, cfg.baseline_budget) == (5, 30, 35)
    t0 = time.perf_counter()
    results, rows = run_suite([p4], ["stalm", "uct"], 20, cfg, replay_dir=REPLAY, time_limit=120.0)
    rate = {r.method: r.rate for r in rows}
    slowest = max(r.wall_time for r in results)
    gap = rate["stalm"] - rate["uct"]
    ok = gap >= 0.30 and slowest <= 120.0
    verdict(
        7,
        ok,
        f"stalm {rate['stalm']:.2f} vs uct {rate['uct']:.2f} (gap {gap:+.2f}) over 20 seeds,"
        f" slowest trial {slowest:.1f}s, total {time.perf_counter() - t0:.0f}s",
    )
    assert gap >= 0.30
    assert slowest <= 120.0


def test_08_hcount_formula():
    cases = hcount_cases()
    got = [(hcount(env, s, t, L), hcount_value(env, s, t, L)) for _, env, s, t, L, _, _ in cases]
    want = [(h, v) for *_, h, v in cases]
    formula = all(v == CONJUNCT_REWARD * len(env.problem.goal.objects) - CONJUNCT_REWARD * h for _, env, *_, h, v in cases)
    verdict(8, got == want and formula, f"{sum(g == w for g, w in zip(got, want))}/5 hand states exact: {got}")
    assert got == want and formula


def test_09_reward_invariants():
    envs = [Env.build(bundled_problem(n)) for n in bundled_names()]
    applications, violations, seed = 0, 0, 0
    while applications < 10_000:
        env = envs[seed % len(envs)]
        prob = env.problem
        rng = np.random.default_rng(seed)
        s0 = prob.s0
        total, last = 0.0, s0
        for s, a, k, s2, r, ok in random_episode(env, s0, rng, 20):
            applications += 1
            if not ok:
                violations += s2 != replace(s, failed=True) or r != INFEASIBLE_REWARD
                violations += bool(env.legal_actions(s2)) or not env.is_failed(s2)
                break
            total += r
            last = s2
        gained = sum(satisfied_conjuncts(last, prob.goal, prob)) - sum(satisfied_conjuncts(s0, prob.goal, prob))
        violations += total != CONJUNCT_REWARD * gained
        seed += 1
    verdict(9, violations == 0, f"{applications} applications over {seed} episodes, {violations} violations")
    assert violations == 0


def test_10_empty_warm_up_equivalence(p4_env):
    s = p4_env.problem.s0
    cfg = PlannerConfig()
    same = 0
    for seed in range(10):
        plain = warm_started_uct(p4_env, [], s, 0, cfg, budget=cfg.baseline_budget, rng=np.random.default_rng(seed))
        a, entry = best_root_entry(plain.tree.root, p4_env.legal_actions(s))
        base = uct_baseline(p4_env, s, 0, cfg, "uct", np.random.default_rng(seed))
        same += plain.tree.signature() == base.search.tree.signature() and (a, entry.kappa) == (base.action, base.params)
    verdict(10, same == 10, f"{same}/10 seeded runs with identical tree and chosen action")
    assert same == 10
