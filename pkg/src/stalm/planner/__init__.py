"""Concretize, warm-started UCT, the STaLM loop and the UCT baselines."""

from stalm.planner.concretize import ConcretizeResult, concretize
from stalm.planner.config import PlannerConfig
from stalm.planner.hcount import HcountValue, hcount, hcount_value
from stalm.planner.search import ConcretePlan, Search, Step, best_root_entry, warm_started_uct
from stalm.planner.stalm import Decision, StalmPlanner, stalm, uct_baseline
from stalm.planner.tree import ContinuousNode, DiscreteNode, KappaEntry, SearchTree

__all__ = [
    "ConcretePlan",
    "ConcretizeResult",
    "ContinuousNode",
    "Decision",
    "DiscreteNode",
    "HcountValue",
    "KappaEntry",
    "PlannerConfig",
    "Search",
    "SearchTree",
    "StalmPlanner",
    "Step",
    "best_root_entry",
    "concretize",
    "hcount",
    "hcount_value",
    "stalm",
    "uct_baseline",
    "warm_started_uct",
]
