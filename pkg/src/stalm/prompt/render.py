"""Deterministic PDDL-style prompt rendering from a literal set."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from stalm.motion.env import WORLD
from stalm.motion.literals import LiteralSet
from stalm.world import KIND_ORDER, Goal, Kind, ProblemInstance, WorldState

SYSTEM_TEXT = """\
You are an expert in PDDL and in planning robot actions for a problem.
First list what makes the unachieved goals hard in the current state, then give the plan.
Your response should follow this template:
## Possible Challenges for unachieved goals based on current state ##
<numbered list of challenges>
## Plan for unachieved goals ##
plan = [('action_type', 'arg_1', 'arg_2', ...), ...]
"""

DOMAIN_TEXT = """\
(define (domain shop)
  (:requirements :typing :derived-predicates)
  (:types movable_object region openable obstacle - object)
  (:constants on left_of right_of front_of behind_of - direction)
  (:predicates
    (RobotHolding ?movable_object) ; robot is holding movable_object
    (HandAvailable) ; robot hand is empty
    (AtPosition ?subject ?direction ?reference) ; subject is at direction of reference
    (IsClosed ?door) ; door is closed
    (PickOccludedBy ?subject ?occluder) ; (pick, subject) is blocked by occluder
    (PlaceOccludedBy ?subject ?direction ?reference ?occluder) ; (place, subject, direction, reference) is blocked by occluder
  )
  (:derived (UnsafePick ?subject)
    (exists (?occluder) (PickOccludedBy ?subject ?occluder)))
  (:derived (UnsafePlace ?subject ?direction ?reference)
    (exists (?occluder) (PlaceOccludedBy ?subject ?direction ?reference ?occluder)))
  (:action pick ; example ('pick', 'bottle')
    :parameters (?subject)
    :precondition (and (HandAvailable) (not (UnsafePick ?subject)))
    :effect (and (not (HandAvailable)) (RobotHolding ?subject) (not (AtPosition ?subject ?direction ?reference))))
  (:action place ; example ('place', 'bottle', 'behind_of', 'can')
    :parameters (?subject ?direction ?reference)
    :precondition (and (RobotHolding ?subject) (not (UnsafePlace ?subject ?direction ?reference)))
    :effect (and (not (RobotHolding ?subject)) (HandAvailable) (AtPosition ?subject ?direction ?reference)))
  (:action open ; example ('open', 'door')
    :parameters (?subject)
    :precondition (and (IsClosed ?subject) (HandAvailable))
    :effect (not (IsClosed ?subject)))
)"""

CLOSING_LINE = "Generate a plan to achieve the goals from init."

PDDL_TYPES = {Kind.MOVABLE: "movable_object", Kind.REGION: "region", Kind.DOOR: "openable"}


@dataclass(frozen=True)
class PromptBundle:
    system_text: str
    user_text: str

    def messages(self) -> list[dict[str, str]]:
        return [{"role": "system", "content": self.system_text}, {"role": "user", "content": self.user_text}]

    def digest(self) -> str:
        return hashlib.sha256((self.system_text + "\0" + self.user_text).encode()).hexdigest()


def state_hash(s: WorldState) -> str:
    """Short stable digest of a state, used in golden-file names."""
    key = repr((s.poses, s.door_open, s.base, s.holding, s.held_yaw, s.failed))
    return hashlib.sha256(key.encode()).hexdigest()[:12]


def sorted_objects(prob: ProblemInstance) -> list[tuple[str, Kind]]:
    return sorted(((e.name, e.kind) for e in prob.entities.values()), key=lambda t: (KIND_ORDER[t[1]], t[0]))


def render_goal(g: Goal) -> str:
    lines = [f"    (AtPosition {c.subject} {c.dir.value} {c.ref})" for c in g.conjuncts]
    return "(:goal (and\n" + "\n".join(lines) + "\n))"


def create_prompt(s: WorldState, g: Goal, prob: ProblemInstance, literals: LiteralSet) -> PromptBundle:
    objects = [f"    {name} - {PDDL_TYPES[kind]}" for name, kind in sorted_objects(prob)]
    if any(WORLD in lit.args for lit in literals.literals):
        objects.append(f"    {WORLD} - obstacle")
    init = [f"    {lit.pddl()}" for lit in sorted(literals.literals)]
    user = "\n".join(
        [
            "### Domain ###",
            DOMAIN_TEXT,
            "",
            "### Problem ###",
            f"(define (problem {prob.name}) (:domain shop)",
            "(:objects",
            *objects,
            ")",
            "(:init",
            *init,
            ")",
            render_goal(g),
            ")",
            "",
            CLOSING_LINE,
            "",
        ]
    )
    return PromptBundle(SYSTEM_TEXT, user)
