"""Command-line entry point: ``stalm {plan,bench,prompt,oracle}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from stalm.bench.problems import ProblemError, bundled_names, bundled_problem, load_problem
from stalm.bench.runner import METHODS, render_table, run_suite, run_trial, write_records
from stalm.llm import DEFAULT_MODEL, HttpBackend, ReplayBackend
from stalm.motion.env import Env
from stalm.motion.literals import compute_literals
from stalm.planner.config import PlannerConfig
from stalm.prompt.render import create_prompt
from stalm.world import ProblemInstance, RewardMode

LLM_METHODS = ("stalm", "concretize-only")


def _problem(spec: str) -> ProblemInstance:
    """A bundled problem name (``p4_analog``) or a path to a problem file."""
    if spec in bundled_names():
        return bundled_problem(spec)
    return load_problem(spec)


def _config(args: argparse.Namespace) -> PlannerConfig:
    cfg = PlannerConfig(reward_mode=RewardMode(args.reward_mode), single_query=args.single_query, model=args.model)
    if args.budget is not None:
        cfg = replace(cfg, n_budget=args.budget, baseline_budget=args.budget)
    return cfg


def _backend_factory(args: argparse.Namespace):
    if args.llm == "http":
        if not args.endpoint:
            raise SystemExit("--llm http needs --endpoint")
        return lambda prob: HttpBackend(args.endpoint)
    if not args.replay_dir:
        raise SystemExit("--llm replay needs --replay-dir")
    return lambda prob: ReplayBackend(Path(args.replay_dir), prob.name)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--budget", type=int, help="simulation budget (overrides both N_budget and the baseline budget)")
    p.add_argument("--time-limit", type=float, help="seconds per trial (default: the problem's own budget)")
    p.add_argument("--llm", choices=("http", "replay"), default="replay")
    p.add_argument("--endpoint", help="chat-completions URL for --llm http; key from LLM_API_KEY")
    p.add_argument("--model", default=DEFAULT_MODEL)
    p.add_argument("--replay-dir", help="directory of <problem>.<call>.<i>.txt responses")
    p.add_argument("--out", help="write line-delimited JSON records here")
    p.add_argument("--single-query", action="store_true", help="query the LLM once per trial")
    p.add_argument("--reward-mode", choices=[m.value for m in RewardMode], default=RewardMode.DELTA.value)


def cmd_plan(args: argparse.Namespace) -> int:
    prob = _problem(args.problem)
    cfg = _config(args)
    backend = _backend_factory(args)(prob) if args.method in LLM_METHODS else None
    res = run_trial(prob, args.method, args.seed, cfg, backend, time_limit=args.time_limit)
    print(f"{prob.name} {args.method} seed={args.seed}: {'success' if res.success else 'failure'} ({res.reason})")
    for i, st in enumerate(res.executed_plan.steps):
        print(f"  {i:2d} {str(st.action):40s} r={st.reward:+.1f}{'' if st.feasible else '  infeasible'}")
    print(
        f"  time {res.wall_time:.2f}s (llm {res.llm_time:.2f}s)  simulations {res.n_simulations}"
        f"  llm calls {res.n_llm_calls}  motion plans {res.n_motion_plans}"
    )
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(json.dumps({"kind": "trial", **res.record()}, sort_keys=True) + "\n")
    return 0 if res.success else 1


def cmd_bench(args: argparse.Namespace) -> int:
    problems = [_problem(p) for p in (args.problem or bundled_names())]
    methods = args.method or list(METHODS)
    cfg = _config(args)
    needs_llm = any(m in LLM_METHODS for m in methods)
    if needs_llm and args.llm == "replay" and not args.replay_dir:
        raise SystemExit("LLM methods need --replay-dir (or --llm http --endpoint URL)")
    factory = _backend_factory(args) if needs_llm and args.llm == "http" else None
    t0 = time.perf_counter()
    results, rows = run_suite(
        problems,
        methods,
        args.seeds,
        cfg,
        replay_dir=args.replay_dir if factory is None else None,
        backend_factory=factory,
        time_limit=args.time_limit,
        workers=args.workers,
    )
    print(render_table(rows))
    print(f"{len(results)} trials in {time.perf_counter() - t0:.1f}s")
    if args.out:
        write_records(args.out, results, rows)
    return 0


def cmd_prompt(args: argparse.Namespace) -> int:
    prob = _problem(args.problem)
    env = Env.build(prob)
    bundle = create_prompt(prob.s0, prob.goal, prob, compute_literals(env, prob.s0))
    if args.system:
        print(bundle.system_text)
    sys.stdout.write(bundle.user_text)
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    from stalm.bench.scenes import random_scene
    from stalm.motion.env import MotionConfig
    from stalm.motion.prm import build_roadmap, nav_obstacles
    from stalm.oracle import OcclusionOracle, OracleReport, check_backups
    from stalm.planner.search import warm_started_uct
    from stalm.planner.toy import TwoStepMDP

    t0 = time.perf_counter()
    report, roadmaps, mc = OracleReport(), {}, MotionConfig()
    for seed in range(args.first_scene, args.first_scene + args.scenes):
        prob = random_scene(seed)
        key = (nav_obstacles(prob), prob.robot_footprint)
        if key not in roadmaps:
            roadmaps[key] = build_roadmap(prob, mc.prm_samples, mc.prm_k, mc.prm_seed)
        OcclusionOracle(Env(prob, roadmaps[key], mc)).compare(prob.s0, report)
    print(
        f"occlusion: {args.scenes} scenes, {report.checks} groundings, {len(report.mismatches)} mismatches,"
        f" {len(report.conservatism)} conservatism exceptions, {report.sampling_gaps} sub-resolution contacts"
        f" ({time.perf_counter() - t0:.1f}s)"
    )
    for m in report.mismatches[:10] + report.conservatism[:10]:
        print("  ", m)
    cfg = PlannerConfig(horizon=2, n_budget=args.simulations, trace=True)
    search = warm_started_uct(TwoStepMDP(), [], (), 0, cfg, rng=np.random.default_rng(args.seed))
    chk = check_backups(search.tree)
    print(f"backups: {chk.records} records over {chk.keys} keys, max |Q - mean| = {chk.max_error:.2e}")
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stalm", description="LLM-warm-started hybrid MCTS for 2D task and motion planning.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="run one trial and print the executed plan")
    p.add_argument("--problem", required=True, help="bundled name or problem file")
    p.add_argument("--method", choices=METHODS, default="stalm")
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_plan)

    b = sub.add_parser("bench", help="run a seeded suite and print the results table")
    b.add_argument("--problem", action="append", help="repeatable; default: every bundled problem")
    b.add_argument("--method", action="append", choices=METHODS, help="repeatable; default: all methods")
    b.add_argument("--seeds", type=int, default=5)
    b.add_argument("--workers", type=int, default=1)
    _add_common(b)
    b.set_defaults(func=cmd_bench)

    r = sub.add_parser("prompt", help="render the prompt for a problem's initial state")
    r.add_argument("--problem", required=True)
    r.add_argument("--system", action="store_true", help="also print the system text")
    r.set_defaults(func=cmd_prompt)

    o = sub.add_parser("oracle", help="run the brute-force occlusion and backup oracles")
    o.add_argument("--scenes", type=int, default=200)
    o.add_argument("--first-scene", type=int, default=0)
    o.add_argument("--simulations", type=int, default=500)
    o.add_argument("--seed", type=int, default=0)
    o.set_defaults(func=cmd_oracle)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except ProblemError as exc:
        print(f"problem error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
