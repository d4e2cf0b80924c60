"""Shared builders for tests."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from stalm.bench import layout
from stalm.bench.problems import parse_problem

FIXTURES = Path(__file__).parent / "fixtures"


def tiny_problem(
    movables: list[dict],
    goal: list[list[str]],
    regions: list[dict] | None = None,
    doors_open: bool = True,
    base: list[float] | None = None,
    name: str = "tiny",
):
    """Small problem on the shared floor plan; defaults to the living-room surfaces."""
    regions = regions if regions is not None else [layout.TABLE1, layout.TABLE2, layout.COUNTER1, layout.COUNTER2]
    doc = layout.problem(name, "test problem", regions, movables, goal, doors_open, 60.0)
    if base is not None:
        doc["init"]["base"] = base
    return parse_problem(doc)


def random_episode(env, s, rng: np.random.Generator, steps: int, symbolic: bool = False):
    """Random legal actions with sampled parameters; yields (s, a, k, s2, r, ok) until failure.

    With ``symbolic`` the choice is restricted to actions whose preconditions hold.
    """
    for _ in range(steps):
        acts = env.legal_actions(s)
        if symbolic:
            acts = [a for a in acts if env.symbolic_ok(s, a)]
        if not acts:
            return
        a = acts[int(rng.integers(len(acts)))]
        k = env.sample(s, a, rng)
        s2, r, ok = env.step(s, a, k)
        yield s, a, k, s2, r, ok
        if not ok:
            return
        s = s2


def occlusion_literals(*items):
    """HandAvailable plus occlusion literals: 2-tuples are pick, 4-tuples are place."""
    from stalm.motion.literals import GroundedLiteral, LiteralSet, Predicate

    out = [GroundedLiteral(Predicate.HAND_AVAILABLE)]
    for it in items:
        pred = Predicate.PICK_OCCLUDED_BY if len(it) == 2 else Predicate.PLACE_OCCLUDED_BY
        out.append(GroundedLiteral(pred, tuple(it)))
    return LiteralSet(frozenset(out))


def hcount_cases():
    """Hand-built (label, env, state, target, literals, Hcount, value) cases.

    Values follow |M| - |in goal| -/+ 1 by hand, then 3 * n_goal - 3 * Hcount.
    """
    from stalm.bench.problems import bundled_problem
    from stalm.motion import Env

    def env_for(movables, goal):
        return Env.build(tiny_problem([layout.movable(n, layout.CAN, list(xy) + [0.0]) for n, xy in movables], goal))

    cases = []
    env = env_for([("g1", (0.9, 5.0)), ("g2", (1.5, 5.0))], [["g1", "on", "table1"], ["g2", "on", "table1"]])
    # nothing blocks, both done, target done: 0 - 2 + 1
    cases.append(("all in goal", env, env.problem.s0, "g1", occlusion_literals(), -1, 9.0))
    env = env_for([("g", (0.9, 5.0)), ("a", (1.5, 5.0)), ("b", (1.2, 5.2))], [["g", "on", "table2"]])
    # M = {a, b} through the chain, target a is not a goal object
    cases.append(("occluder chain", env, env.problem.s0, "a", occlusion_literals(("g", "a"), ("a", "b")), 2, -3.0))
    env = env_for([("g", (0.9, 5.0))], [["g", "on", "table2"]])
    # target is an unplaced goal object: 0 - 0 - 1
    cases.append(("unplaced target", env, env.problem.s0, "g", occlusion_literals(), -1, 6.0))
    env = Env.build(bundled_problem("p1_analog"))
    lits = occlusion_literals(("bottle2", "on", "counter2", "kitchen_door"), ("bottle2", "world"), ("bottle1", "world"))
    # M = {kitchen_door}; world is not counted; four goal objects, none placed
    cases.append(("door counts, world does not", env, env.problem.s0, None, lits, 1, 9.0))
    env = env_for([("g1", (0.9, 5.0)), ("g2", (1.5, 5.0)), ("a", (1.2, 5.2))], [["g1", "on", "table1"], ["g2", "on", "table2"]])
    # M = {a}, g1 done and targeted: 1 - 1 + 1
    cases.append(("one done, one blocked", env, env.problem.s0, "g1", occlusion_literals(("g2", "a")), 1, 3.0))
    return cases


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE: dict[int, str] = {}


def verdict(n: int, ok: bool, detail: str) -> bool:
    ACCEPTANCE[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    return ok
