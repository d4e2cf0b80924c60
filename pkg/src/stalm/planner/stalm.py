"""STaLM: LLM task plans, concretized by sampling, with a warm-started search fallback."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from stalm.llm import Backend, LLMError, LLMRequest
from stalm.motion.env import Env
from stalm.motion.literals import LiteralCache, compute_literals
from stalm.planner.concretize import ConcretizeResult, concretize
from stalm.planner.config import PlannerConfig
from stalm.planner.hcount import HcountValue
from stalm.planner.search import ConcretePlan, Search, best_root_entry, warm_started_uct
from stalm.prompt.parse import ParseError, parse_response
from stalm.prompt.render import create_prompt
from stalm.world import DiscreteAction, WorldState

log = logging.getLogger(__name__)


@dataclass
class Decision:
    """Result of one planning call: a full plan, a first action, or nothing."""

    plan: ConcretePlan | None = None
    action: DiscreteAction | None = None
    params: Any = None
    search: Search | None = None
    concretized: ConcretizeResult | None = None

    @property
    def simulations(self) -> int:
        return self.search.stats.simulations if self.search is not None else 0


@dataclass(eq=False)
class StalmPlanner:
    """Holds what persists across receding-horizon steps: backend, literal cache, plans."""

    env: Env
    cfg: PlannerConfig
    backend: Backend | None
    search_enabled: bool = True
    cache: LiteralCache | None = None
    carried: list[tuple[DiscreteAction, ...]] = field(default_factory=list)
    n_llm_calls: int = 0
    n_parse_failures: int = 0
    llm_time: float = 0.0
    failure_tags: list[str] = field(default_factory=list)
    last_prompt: Any = None

    def __post_init__(self) -> None:
        if self.cache is None:
            self.cache = LiteralCache(self.env)

    def task_plans(self, s: WorldState) -> list[tuple[DiscreteAction, ...]]:
        if self.backend is None or (self.cfg.single_query and self.n_llm_calls > 0):
            return list(self.carried)
        prob = self.env.problem
        prompt = create_prompt(s, prob.goal, prob, compute_literals(self.env, s, self.cache))
        self.last_prompt = prompt
        req = LLMRequest(prompt, self.cfg.n_batch, self.cfg.temperature, self.cfg.model)
        t0 = time.perf_counter()
        try:
            batch = self.backend.query(req)
        except LLMError as exc:
            log.info("LLM query failed (%s); reusing %d carried plans", exc.kind, len(self.carried))
            return list(self.carried)
        finally:
            self.llm_time += time.perf_counter() - t0
        self.n_llm_calls += 1
        plans = []
        for text in batch.responses:
            try:
                plans.append(parse_response(text, prob).plan.actions)
            except ParseError as exc:
                self.n_parse_failures += 1
                log.info("dropped unparseable response: %s", exc)
        if not plans:
            log.info("no parseable responses; search starts cold")
        self.carried = plans
        return plans

    def decide(self, s: WorldState, h: int, rng: np.random.Generator) -> Decision:
        plans = self.task_plans(s)
        result = concretize(self.env, plans, s, h, self.cfg, rng)
        self.failure_tags.extend(t for t in result.failure_tags if t is not None)
        if result.success:
            return Decision(plan=result.solution, concretized=result)
        if not self.search_enabled:
            return Decision(concretized=result)
        search = warm_started_uct(self.env, result.plans, s, h, self.cfg, rng=rng)
        best = best_root_entry(search.tree.root, self.env.legal_actions(s))
        if best is None:
            return Decision(search=search, concretized=result)
        a, entry = best
        return Decision(action=a, params=entry.kappa, search=search, concretized=result)

    def advance(self, a: DiscreteAction) -> None:
        """Pop ``a`` from carried plans that start with it; others treat it as a detour."""
        nxt = [p[1:] if p[0] == a else p for p in self.carried]
        self.carried = [p for p in nxt if p]


def stalm(
    env: Env, s0: WorldState, h: int, cfg: PlannerConfig, backend: Backend | None, rng: np.random.Generator | None = None
) -> Decision:
    """Single planning call from ``s0``; see :class:`StalmPlanner` for the receding-horizon form."""
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    return StalmPlanner(env, cfg, backend).decide(s0, h, rng)


def uct_baseline(
    env: Env,
    s0: WorldState,
    h: int,
    cfg: PlannerConfig,
    variant: str = "uct",
    rng: np.random.Generator | None = None,
    value_fn: HcountValue | None = None,
) -> Decision:
    """Cold-start UCT with the baseline budget; ``variant='hcount'`` swaps rollouts for Hcount."""
    if variant not in ("uct", "hcount"):
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "hcount" and value_fn is None:
        value_fn = HcountValue(env)
    search = warm_started_uct(env, [], s0, h, cfg, cfg.baseline_budget, value_fn if variant == "hcount" else None, rng)
    best = best_root_entry(search.tree.root, env.legal_actions(s0))
    if best is None:
        return Decision(search=search)
    a, entry = best
    return Decision(action=a, params=entry.kappa, search=search)
