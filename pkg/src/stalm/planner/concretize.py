"""Concretize task plans by drawing one continuous parameter per action."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Hashable, Sequence

import numpy as np

from stalm.planner.config import PlannerConfig
from stalm.planner.search import ConcretePlan, PlanningModel, Step

log = logging.getLogger(__name__)

PRECONDITION = "precondition_violation"
INFEASIBLE = "infeasible_continuous"
PARTIAL = "partial_goal"


@dataclass(frozen=True)
class ConcretizeResult:
    success: bool
    plans: tuple[ConcretePlan, ...]
    failure_tags: tuple[str | None, ...]

    @property
    def solution(self) -> ConcretePlan | None:
        return self.plans[-1] if self.success else None


def _failure_tag(model: PlanningModel, s: Any, a: Hashable) -> str:
    symbolic = getattr(model, "symbolic_ok", None)
    if symbolic is not None and not symbolic(s, a):
        return PRECONDITION
    return INFEASIBLE


def concretize(
    model: PlanningModel,
    task_plans: Sequence[Sequence[Hashable]],
    s0: Any,
    h0: int,
    cfg: PlannerConfig,
    rng: np.random.Generator,
) -> ConcretizeResult:
    """Try each task plan from ``s0``; stop at the first one that reaches the goal.

    A plan is cut at its first infeasible action or when the horizon is used up.
    Every attempted prefix is returned so the search can be warmed with it.
    """
    plans: list[ConcretePlan] = []
    tags: list[str | None] = []
    for actions in task_plans:
        s, h = s0, h0
        steps: list[Step] = []
        tag: str | None = None
        for a in actions:
            if h >= cfg.horizon:
                break
            k = model.sample(s, a, rng)
            s2, r, ok = model.step(s, a, k)
            steps.append(Step(a, k, r, s2, ok))
            h += 1
            if not ok:
                tag = _failure_tag(model, s, a)
                break
            s = s2
            if model.is_goal(s):
                plans.append(ConcretePlan(s0, tuple(steps), True))
                tags.append(None)
                return ConcretizeResult(True, tuple(plans), tuple(tags))
        plans.append(ConcretePlan(s0, tuple(steps), False))
        tags.append(tag or PARTIAL)
        log.debug("plan abandoned after %d steps: %s", len(steps), tags[-1])
    return ConcretizeResult(False, tuple(plans), tuple(tags))
