"""Occlusion-counting heuristic and the value function built from it."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from stalm.motion.env import WORLD, Env
from stalm.motion.literals import LiteralCache, LiteralSet, compute_literals
from stalm.world import CONJUNCT_REWARD, DiscreteAction, Goal, Kind, WorldState, at_position


def occluder_closure(literals: LiteralSet, goal: Goal, kind_of) -> set[str]:
    """Entities blocking the goal objects, closed under what blocks picking them.

    Movables and doors count; the ``world`` sentinel does not, since nothing can
    be done about it.
    """
    frontier: set[str] = set()
    for o in goal.objects:
        frontier |= literals.pick_occluders(o)
    for c in goal.conjuncts:
        frontier |= literals.place_occluders(c.subject, c.dir, c.ref)
    frontier.discard(WORLD)
    closure: set[str] = set()
    while frontier:
        x = frontier.pop()
        if x in closure:
            continue
        closure.add(x)
        if kind_of(x) is Kind.MOVABLE:
            frontier |= literals.pick_occluders(x) - closure - {WORLD}
    return closure


def objects_in_goal(s: WorldState, goal: Goal, prob) -> set[str]:
    done = set()
    for o in goal.objects:
        if all(at_position(s, c.subject, c.dir, c.ref, prob) for c in goal.conjuncts if c.subject == o):
            done.add(o)
    return done


def hcount_from(M: set[str], in_goal: set[str], goal_objects: set[str], o_target: str | None) -> int:
    value = len(M) - len(in_goal)
    if o_target in in_goal:
        value += 1
    elif o_target in goal_objects:
        value -= 1
    return value


def hcount(env: Env, s: WorldState, o_target: str | None, literals: LiteralSet) -> int:
    prob = env.problem
    goal = prob.goal
    M = occluder_closure(literals, goal, prob.kind)
    return hcount_from(M, objects_in_goal(s, goal, prob), set(goal.objects), o_target)


def hcount_value(env: Env, s: WorldState, o_target: str | None, literals: LiteralSet) -> float:
    n_goal = len(env.problem.goal.objects)
    return (CONJUNCT_REWARD * n_goal - CONJUNCT_REWARD * hcount(env, s, o_target, literals)) * env.reward_scale


@dataclass(eq=False)
class HcountValue:
    """Value function for the search: computes literals (cached) and evaluates Hcount."""

    env: Env
    cache: LiteralCache | None = None
    calls: int = 0

    def __post_init__(self) -> None:
        if self.cache is None:
            self.cache = LiteralCache(self.env)

    def __call__(self, s: WorldState, depth: int, a: DiscreteAction | None, parent: Any) -> float:
        self.calls += 1
        lits = compute_literals(self.env, s, self.cache, parent)
        target = a.target if a is not None and self.env.problem.kind(a.target) is Kind.MOVABLE else None
        return hcount_value(self.env, s, target, lits)

