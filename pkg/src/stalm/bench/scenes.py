"""Seeded random scenes on the shared floor plan, for property tests and oracles."""

from __future__ import annotations

import math

import numpy as np

from stalm.bench.layout import (
    BOTTLE,
    CAN,
    COUNTER1,
    COUNTER2,
    COUNTER3,
    PLATE,
    SHELF,
    START,
    TABLE1,
    TABLE2,
    box,
    movable,
    problem,
    walled,
)
from stalm.bench.problems import ProblemError, parse_problem, shape_polygon
from stalm.geom import ConvexPolygon, Pose2, intersects, transform
from stalm.world import ProblemInstance

REGIONS = [TABLE1, TABLE2, COUNTER1, COUNTER2, COUNTER3, SHELF]
SHAPES = [BOTTLE, CAN, PLATE]


def _random_shape(rng: np.random.Generator) -> dict:
    if rng.random() < 0.7:
        return SHAPES[int(rng.integers(len(SHAPES)))]
    return box(round(float(rng.uniform(0.05, 0.2)), 3), round(float(rng.uniform(0.05, 0.12)), 3))


def _extent(region: dict) -> ConvexPolygon:
    return ConvexPolygon(tuple(tuple(v) for v in region["extent"]["vertices"]))


def _walls(region: dict) -> list[ConvexPolygon]:
    return [ConvexPolygon(tuple(tuple(v) for v in w["vertices"])) for w in region.get("walls", ())]


def random_scene(seed: int, n_movables: tuple[int, int] = (3, 6), max_tries: int = 200) -> ProblemInstance:
    """3 to 6 movables scattered (and often clustered) on surfaces, one door.

    About half the objects are dropped next to an earlier one so corridors get
    crowded. The base starts at the room centre or in front of a surface.
    """
    rng = np.random.default_rng(seed)
    regions = list(REGIONS)
    if rng.random() < 0.3:
        regions.append(walled("pocket", 5.6, 5.1))
    n = int(rng.integers(n_movables[0], n_movables[1] + 1))
    placed: list[tuple[str, dict, list[float], ConvexPolygon, dict]] = []
    for i in range(n):
        shape = _random_shape(rng)
        local = shape_polygon(shape)
        for _ in range(max_tries):
            if placed and rng.random() < 0.5:
                _, _, anchor, _, reg = placed[int(rng.integers(len(placed)))]
                x = anchor[0] + float(rng.uniform(-0.2, 0.2))
                y = anchor[1] + float(rng.uniform(-0.2, 0.2))
            else:
                reg = regions[int(rng.integers(len(regions)))]
                (xmin, ymin), _, (xmax, ymax), _ = reg["extent"]["vertices"]
                x, y = float(rng.uniform(xmin, xmax)), float(rng.uniform(ymin, ymax))
            pose = [round(x, 4), round(y, 4), round(float(rng.uniform(-math.pi, math.pi)), 4)]
            fp = transform(local, Pose2(*pose))
            if not _extent(reg).contains_polygon(fp):
                continue
            if any(intersects(fp, w) for w in _walls(reg)):
                continue
            if any(intersects(fp, other) for *_, other, _ in placed):
                continue
            placed.append((f"obj{i}", shape, pose, fp, reg))
            break
    if len(placed) < n_movables[0]:
        raise ProblemError(f"scene {seed}: could not place {n_movables[0]} movables")
    bases = [START] + [r["base_pose"] for r in regions]
    base = bases[int(rng.integers(len(bases)))]
    movables = [movable(name, shape, pose) for name, shape, pose, _, _ in placed]
    goal_obj = placed[0][0]
    goal_region = regions[int(rng.integers(len(regions)))]["name"]
    doc = problem(
        f"scene{seed}",
        "random scene",
        regions,
        movables,
        [[goal_obj, "on", goal_region]],
        bool(rng.random() < 0.5),
        60.0,
    )
    doc["init"]["base"] = list(base)
    return parse_problem(doc)


__all__ = ["random_scene"]
