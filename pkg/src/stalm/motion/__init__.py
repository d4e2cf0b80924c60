"""Base motion, occlusion predicates, samplers and the literal cache."""

from stalm.motion.env import WORLD, Env, MotionConfig
from stalm.motion.literals import GroundedLiteral, LiteralCache, LiteralSet, Predicate, compute_literals
from stalm.motion.prm import Roadmap, RoadmapError, build_roadmap, plan_path

__all__ = [
    "WORLD",
    "Env",
    "GroundedLiteral",
    "LiteralCache",
    "LiteralSet",
    "MotionConfig",
    "Predicate",
    "Roadmap",
    "RoadmapError",
    "build_roadmap",
    "compute_literals",
    "plan_path",
]
