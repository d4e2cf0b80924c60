"""Tiny hand-built MDPs for checking the search machinery in isolation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable

import numpy as np

# two-step chain: reward for each (history, action); depth 2 is the goal
TWO_STEP_REWARDS: dict[tuple[str, ...], float] = {
    ("l",): 1.0,
    ("r",): 0.0,
    ("l", "l"): 0.0,
    ("l", "r"): 3.0,
    ("r", "l"): 2.0,
    ("r", "r"): -1.0,
}


@dataclass
class TwoStepMDP:
    """Discrete-only by default: every action has the single parameter ``None``.

    With ``continuous=True`` each draw is a fresh float in [0, 1) and the
    reward gains ``kappa``, which exercises progressive widening.
    """

    depth: int = 2
    continuous: bool = False
    rewards: dict[tuple[str, ...], float] = field(default_factory=lambda: dict(TWO_STEP_REWARDS))
    step_calls: int = 0

    def legal_actions(self, s: tuple[str, ...]) -> list[str]:
        return [] if len(s) >= self.depth else ["l", "r"]

    def sample(self, s: tuple[str, ...], a: Hashable, rng: np.random.Generator):
        return round(float(rng.random()), 6) if self.continuous else None

    def step(self, s: tuple[str, ...], a: str, k) -> tuple[tuple[str, ...], float, bool]:
        self.step_calls += 1
        s2 = s + (a,)
        return s2, self.rewards.get(s2, 0.0) + (k if self.continuous else 0.0), True

    def is_goal(self, s: tuple[str, ...]) -> bool:
        return len(s) >= self.depth

    def is_failed(self, s: tuple[str, ...]) -> bool:
        return False


__all__ = ["TWO_STEP_REWARDS", "TwoStepMDP"]
