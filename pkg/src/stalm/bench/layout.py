"""Shared floor plan for the bundled problems and random scenes.

An 8 m x 6 m floor split by a wall at x = 4 with a 1 m door gap. The living
room is on the left, the kitchen on the right.
"""

from __future__ import annotations

import math

BOUNDS = [0.0, 0.0, 8.0, 6.0]
WALLS = [
    {"vertices": [[3.9, 0.0], [4.1, 0.0], [4.1, 2.5], [3.9, 2.5]]},
    {"vertices": [[3.9, 3.5], [4.1, 3.5], [4.1, 6.0], [3.9, 6.0]]},
]
DOOR = {
    "name": "kitchen_door",
    "closed_polygon": {"vertices": [[3.92, 2.5], [4.08, 2.5], [4.08, 3.5], [3.92, 3.5]]},
    "base_pose": [3.4, 3.0, 0.0],
    "handle_point": [3.9, 3.0],
}
ROBOT = {"footprint": {"regular": 8, "radius": 0.25}}
START = [2.0, 3.0, 0.0]
BASE_GAP = 0.35  # extent edge to base pose


def rect(xmin, ymin, xmax, ymax):
    return {"vertices": [[xmin, ymin], [xmax, ymin], [xmax, ymax], [xmin, ymax]]}


def region(name, cx, cy, w, h, side, walls=()):
    """Rectangular surface whose robot base pose sits on ``side`` (south or north)."""
    if side == "south":
        base, theta = [cx, cy - h / 2 - BASE_GAP, math.pi / 2], 0.0
    else:
        base, theta = [cx, cy + h / 2 + BASE_GAP, -math.pi / 2], math.pi
    out = {
        "name": name,
        "extent": rect(cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2),
        "base_pose": base,
        "local_frame": [cx, cy, theta],
    }
    if walls:
        out["walls"] = list(walls)
    return out


# living room
TABLE1 = region("table1", 1.2, 5.0, 1.2, 0.6, "south")
TABLE2 = region("table2", 1.2, 1.0, 1.2, 0.6, "north")
COUNTER1 = region("counter1", 2.9, 5.0, 0.8, 0.6, "south")
# kitchen
COUNTER2 = region("counter2", 7.2, 5.0, 1.0, 0.6, "south")
COUNTER3 = region("counter3", 7.2, 1.0, 1.0, 0.6, "north")
SHELF = region("shelf", 5.2, 1.0, 1.0, 0.6, "north")
COUNTER5 = region("counter5", 5.2, 1.0, 1.0, 0.6, "north")


def walled(name, cx, cy):
    """1.2 x 0.9 counter whose back half is a 0.6 m wide pocket fenced on three sides."""
    w, h = 1.2, 0.9
    y1 = cy + h / 2
    walls = [
        rect(cx - 0.35, cy + 0.05, cx - 0.3, y1),
        rect(cx + 0.3, cy + 0.05, cx + 0.35, y1),
        rect(cx - 0.35, y1 - 0.05, cx + 0.35, y1),
    ]
    return region(name, cx, cy, w, h, "south", walls)


def box(w, h):
    return {"box": [w, h]}


def movable(name, shape, pose):
    return {"name": name, "footprint": shape, "pose": pose}


BOTTLE = box(0.08, 0.08)
SALTER = box(0.07, 0.07)
CAN = box(0.07, 0.07)
PLATE = {"regular": 8, "radius": 0.1}
GRILL = box(0.7, 0.25)


def problem(name, description, regions, movables, goal, doors_open, time_budget):
    return {
        "name": name,
        "description": description,
        "bounds": BOUNDS,
        "horizon": 20,
        "time_budget": time_budget,
        "robot": ROBOT,
        "static_walls": WALLS,
        "regions": regions,
        "doors": [DOOR],
        "movables": movables,
        "init": {"base": START, "doors_open": {"kitchen_door": doors_open}},
        "goal": goal,
    }
