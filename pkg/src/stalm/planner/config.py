"""Planner hyperparameters."""

from __future__ import annotations

from dataclasses import dataclass

from stalm.llm import DEFAULT_MODEL
from stalm.world import RewardMode


@dataclass(frozen=True)
class PlannerConfig:
    n_batch: int = 5
    n_budget: int = 30
    baseline_budget: int = 35
    horizon: int = 20
    gamma: float = 0.99
    c_uct: float = 50.0
    k_alpha: float = 1.5
    c_alpha: float = 0.15
    rollout_depth: int = 5
    seed: int = 0
    reward_mode: RewardMode = RewardMode.DELTA
    single_query: bool = False
    trace: bool = False
    model: str = DEFAULT_MODEL
    temperature: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")
        if not 0.0 < self.c_alpha < 1.0:
            raise ValueError("c_alpha must lie in (0, 1)")
        if self.k_alpha <= 0.0:
            raise ValueError("k_alpha must be > 0")
        if self.horizon < 1 or self.n_batch < 1:
            raise ValueError("horizon and n_batch must be >= 1")
        if self.n_budget < 0 or self.baseline_budget < 0 or self.rollout_depth < 0:
            raise ValueError("budgets and rollout depth must be >= 0")
        object.__setattr__(self, "reward_mode", RewardMode(self.reward_mode))
