"""Seeded receding-horizon trials and suite tables."""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from stalm.llm import Backend
from stalm.motion.env import Env, MotionConfig
from stalm.planner.config import PlannerConfig
from stalm.planner.search import ConcretePlan, Step
from stalm.planner.stalm import StalmPlanner, uct_baseline
from stalm.world import ProblemInstance, WorldState

METHODS = ("stalm", "concretize-only", "uct", "uct-hcount")

BackendFactory = Callable[[ProblemInstance], Backend]


@dataclass
class TrialResult:
    problem: str
    method: str
    seed: int
    success: bool
    wall_time: float  # planning time, LLM latency excluded
    llm_time: float
    n_simulations: int
    n_llm_calls: int
    n_motion_plans: int
    executed_plan: ConcretePlan
    n_parse_failures: int = 0
    failure_tags: tuple[str, ...] = ()
    reason: str = ""

    def record(self) -> dict:
        return {
            "problem": self.problem,
            "method": self.method,
            "seed": self.seed,
            "success": self.success,
            "wall_time": round(self.wall_time, 6),
            "llm_time": round(self.llm_time, 6),
            "n_simulations": self.n_simulations,
            "n_llm_calls": self.n_llm_calls,
            "n_motion_plans": self.n_motion_plans,
            "n_parse_failures": self.n_parse_failures,
            "plan": [str(st.action) for st in self.executed_plan.steps],
            "failure_tags": list(self.failure_tags),
            "reason": self.reason,
        }


def replay_plan(env: Env, plan: ConcretePlan) -> tuple[WorldState, bool]:
    """Re-execute a plan through the transition model; returns the end state and goal flag."""
    s = plan.start
    for st in plan.steps:
        s, _, ok = env.step(s, st.action, st.params)
        if not ok:
            return s, False
    return s, env.is_goal(s)


def run_trial(
    prob: ProblemInstance,
    method: str,
    seed: int,
    cfg: PlannerConfig,
    backend: Backend | None = None,
    env: Env | None = None,
    time_limit: float | None = None,
    motion: MotionConfig | None = None,
) -> TrialResult:
    """Plan, execute the chosen action (or whole plan), replan, until goal/horizon/time."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    if method in ("stalm", "concretize-only") and backend is None:
        raise ValueError(f"method {method} needs an LLM backend")
    if env is None:
        env = Env.build(prob, motion, reward_mode=cfg.reward_mode)
    budget = prob.time_budget if time_limit is None else time_limit
    cfg = replace(cfg, seed=seed)
    rng = np.random.default_rng(seed)
    planner = None
    if method in ("stalm", "concretize-only"):
        planner = StalmPlanner(env, cfg, backend, search_enabled=(method == "stalm"))
    plans_before = env.roadmap.n_plans
    t0 = time.perf_counter()
    s, h = prob.s0, 0
    steps: list[Step] = []
    n_sims = 0
    reason = "horizon"
    while h < cfg.horizon:
        if env.is_goal(s):
            break
        llm_time = planner.llm_time if planner else 0.0
        if time.perf_counter() - t0 - llm_time >= budget:
            reason = "time"
            break
        if planner is not None:
            decision = planner.decide(s, h, rng)
        else:
            decision = uct_baseline(env, s, h, cfg, "hcount" if method == "uct-hcount" else "uct", rng)
        n_sims += decision.simulations
        if decision.plan is not None:
            steps.extend(decision.plan.steps)
            s = decision.plan.end_state
            h += len(decision.plan.steps)
            break
        if decision.action is None:
            reason = "no_action"
            break
        s2, r, ok = env.step(s, decision.action, decision.params)
        steps.append(Step(decision.action, decision.params, r, s2, ok))
        if planner is not None:
            planner.advance(decision.action)
        s, h = s2, h + 1
        if not ok:
            reason = "infeasible"
            break
    elapsed = time.perf_counter() - t0
    llm_time = planner.llm_time if planner else 0.0
    success = env.is_goal(s)
    return TrialResult(
        prob.name,
        method,
        seed,
        success,
        max(0.0, elapsed - llm_time),
        llm_time,
        n_sims,
        planner.n_llm_calls if planner else 0,
        env.roadmap.n_plans - plans_before,
        ConcretePlan(prob.s0, tuple(steps), success),
        planner.n_parse_failures if planner else 0,
        tuple(planner.failure_tags) if planner else (),
        "goal" if success else reason,
    )


@dataclass(frozen=True)
class SuiteRow:
    problem: str
    method: str
    n: int
    successes: int
    mean_time: float | None

    @property
    def rate(self) -> float:
        return self.successes / self.n if self.n else 0.0

    def record(self) -> dict:
        return {
            "problem": self.problem,
            "method": self.method,
            "trials": self.n,
            "success_rate": self.rate,
            "mean_time": None if self.mean_time is None else round(self.mean_time, 6),
        }

    def time_cell(self) -> str:
        return "t/o" if self.mean_time is None else f"{self.mean_time:.2f}"


def summarize(results: Sequence[TrialResult], problems: Sequence[str], methods: Sequence[str]) -> list[SuiteRow]:
    rows = []
    for p in problems:
        for m in methods:
            rs = [r for r in results if r.problem == p and r.method == m]
            ok = [r.wall_time for r in rs if r.success]
            rows.append(SuiteRow(p, m, len(rs), len(ok), (sum(ok) / len(ok)) if ok else None))
    return rows


def render_table(rows: Sequence[SuiteRow]) -> str:
    methods = list(dict.fromkeys(r.method for r in rows))
    problems = list(dict.fromkeys(r.problem for r in rows))
    cell = {(r.problem, r.method): r for r in rows}
    header = ["method", "metric"] + problems
    lines = [header]
    for m in methods:
        lines.append([m, "success"] + [f"{cell[(p, m)].rate:.2f}" for p in problems])
        lines.append(["", "time (s)"] + [cell[(p, m)].time_cell() for p in problems])
    widths = [max(len(row[i]) for row in lines) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in lines)


@dataclass(frozen=True)
class _Job:
    prob_path: str | None
    prob: ProblemInstance | None
    method: str
    seed: int
    cfg: PlannerConfig
    replay_dir: str | None
    time_limit: float | None


def _run_job(job: _Job) -> TrialResult:
    from stalm.bench.problems import load_problem
    from stalm.llm import ReplayBackend

    prob = job.prob if job.prob is not None else load_problem(job.prob_path)
    backend = ReplayBackend(Path(job.replay_dir), prob.name) if job.replay_dir else None
    if job.method in ("uct", "uct-hcount"):
        backend = None
    return run_trial(prob, job.method, job.seed, job.cfg, backend, time_limit=job.time_limit)


def run_suite(
    problems: Sequence[ProblemInstance],
    methods: Sequence[str],
    n_seeds: int,
    cfg: PlannerConfig,
    replay_dir: str | Path | None = None,
    backend_factory: BackendFactory | None = None,
    time_limit: float | None = None,
    workers: int = 1,
    first_seed: int = 0,
) -> tuple[list[TrialResult], list[SuiteRow]]:
    """All (problem, method, seed) trials; each gets its own RNG and a fresh backend."""
    jobs = [
        _Job(None, p, m, first_seed + i, cfg, str(replay_dir) if replay_dir else None, time_limit)
        for p in problems
        for m in methods
        for i in range(n_seeds)
    ]
    if backend_factory is not None:
        results = []
        for j in jobs:
            backend = backend_factory(j.prob) if j.method in ("stalm", "concretize-only") else None
            results.append(run_trial(j.prob, j.method, j.seed, j.cfg, backend, time_limit=time_limit))
    elif workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(j) for j in jobs]
    results.sort(key=lambda r: (r.problem, r.method, r.seed))
    rows = summarize(results, [p.name for p in problems], list(methods))
    return results, rows


def write_records(path: str | Path, results: Sequence[TrialResult], rows: Sequence[SuiteRow]) -> None:
    with open(path, "w") as fh:
        for r in results:
            fh.write(json.dumps({"kind": "trial", **r.record()}, sort_keys=True) + "\n")
        for row in rows:
            fh.write(json.dumps({"kind": "summary", **row.record()}, sort_keys=True) + "\n")


def deterministic_records(results: Sequence[TrialResult], rows: Sequence[SuiteRow]) -> str:
    """Machine-readable output without timing fields, for byte-level reproducibility checks."""
    out = []
    for r in results:
        rec = r.record()
        rec.pop("wall_time"), rec.pop("llm_time")
        out.append(json.dumps({"kind": "trial", **rec}, sort_keys=True))
    for row in rows:
        rec = row.record()
        rec.pop("mean_time")
        out.append(json.dumps({"kind": "summary", **rec}, sort_keys=True))
    return "\n".join(out) + "\n"


__all__ = [
    "METHODS",
    "SuiteRow",
    "TrialResult",
    "deterministic_records",
    "render_table",
    "replay_plan",
    "run_suite",
    "run_trial",
    "summarize",
    "write_records",
]
