"""Problem files: JSON schema, loader and semantic validation."""

from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from stalm.geom import ConvexPolygon, Pose2, intersects
from stalm.world import (
    Conjunct,
    DiscreteAction,
    Door,
    Goal,
    Kind,
    Movable,
    ProblemInstance,
    Region,
    WorldState,
    check_action,
)

_POINT = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_POSE = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 3}
_POLY = {"type": "array", "items": _POINT, "minItems": 3}
_SHAPE = {
    "oneOf": [
        {"type": "object", "properties": {"vertices": _POLY}, "required": ["vertices"], "additionalProperties": False},
        {
            "type": "object",
            "properties": {"box": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 2, "maxItems": 2}},
            "required": ["box"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {"regular": {"type": "integer", "minimum": 3}, "radius": {"type": "number", "exclusiveMinimum": 0}},
            "required": ["regular", "radius"],
            "additionalProperties": False,
        },
    ]
}
_NAME = {"type": "string", "pattern": "^[a-z0-9_]+$"}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["name", "bounds", "robot", "regions", "movables", "init", "goal"],
    "additionalProperties": False,
    "properties": {
        "name": _NAME,
        "description": {"type": "string"},
        "bounds": {"type": "array", "items": {"type": "number"}, "minItems": 4, "maxItems": 4},
        "horizon": {"type": "integer", "minimum": 1},
        "time_budget": {"type": "number", "minimum": 0},
        "robot": {"type": "object", "required": ["footprint"], "properties": {"footprint": _SHAPE}, "additionalProperties": False},
        "static_walls": {"type": "array", "items": _SHAPE},
        "regions": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name", "extent", "base_pose"],
                "additionalProperties": False,
                "properties": {
                    "name": _NAME,
                    "extent": _SHAPE,
                    "base_pose": _POSE,
                    "local_frame": _POSE,
                    "walls": {"type": "array", "items": _SHAPE},
                },
            },
        },
        "doors": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "closed_polygon", "base_pose", "handle_point"],
                "additionalProperties": False,
                "properties": {"name": _NAME, "closed_polygon": _SHAPE, "base_pose": _POSE, "handle_point": _POINT},
            },
        },
        "movables": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name", "footprint", "pose"],
                "additionalProperties": False,
                "properties": {"name": _NAME, "footprint": _SHAPE, "grasp_point": _POINT, "pose": _POSE},
            },
        },
        "init": {
            "type": "object",
            "required": ["base"],
            "additionalProperties": False,
            "properties": {"base": _POSE, "doors_open": {"type": "object", "additionalProperties": {"type": "boolean"}}},
        },
        "goal": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "array", "items": {"type": "string"}, "minItems": 3, "maxItems": 3},
        },
    },
}


class ProblemError(ValueError):
    """Schema or semantic violation in a problem file; ``path`` locates the field."""

    def __init__(self, message: str, path: str = "$") -> None:
        super().__init__(f"{path}: {message}")
        self.path = path


def shape_polygon(spec: dict, at: Pose2 | None = None) -> ConvexPolygon:
    if "vertices" in spec:
        poly = ConvexPolygon(tuple(tuple(v) for v in spec["vertices"]))
    elif "box" in spec:
        w, h = spec["box"]
        poly = ConvexPolygon.rectangle(-w / 2, -h / 2, w / 2, h / 2)
    else:
        poly = ConvexPolygon.regular(spec["regular"], spec["radius"], math.pi / spec["regular"])
    if at is not None:
        from stalm.geom import transform

        poly = transform(poly, at)
    return poly


def _pose(v: list[float]) -> Pose2:
    return Pose2(v[0], v[1], v[2] if len(v) > 2 else 0.0)


def _json_path(err: jsonschema.ValidationError) -> str:
    return "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)


def parse_problem(data: dict) -> ProblemInstance:
    """Validate a decoded problem document and build the instance."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ProblemError(err.message, _json_path(err))

    def at(path: str, fn, *args):
        try:
            return fn(*args)
        except (ValueError, TypeError) as exc:
            raise ProblemError(str(exc), path) from None

    regions = []
    for i, r in enumerate(data["regions"]):
        extent = at(f"$.regions[{i}].extent", shape_polygon, r["extent"])
        frame = _pose(r["local_frame"]) if "local_frame" in r else Pose2(*extent.centroid, 0.0)
        walls = tuple(at(f"$.regions[{i}].walls[{j}]", shape_polygon, w) for j, w in enumerate(r.get("walls", [])))
        regions.append(at(f"$.regions[{i}]", Region, r["name"], extent, _pose(r["base_pose"]), frame, walls))
    doors = [
        at(f"$.doors[{i}]", Door, d["name"], shape_polygon(d["closed_polygon"]), _pose(d["base_pose"]), tuple(d["handle_point"]))
        for i, d in enumerate(data.get("doors", []))
    ]
    movables, poses = [], {}
    for i, m in enumerate(data["movables"]):
        fp = at(f"$.movables[{i}].footprint", shape_polygon, m["footprint"])
        movables.append(at(f"$.movables[{i}]", Movable, m["name"], fp, tuple(m.get("grasp_point", (0.0, 0.0)))))
        poses[m["name"]] = _pose(m["pose"])
    walls = tuple(at(f"$.static_walls[{i}]", shape_polygon, w) for i, w in enumerate(data.get("static_walls", [])))
    door_names = {d.name for d in doors}
    opened = data["init"].get("doors_open", {})
    for d in opened:
        if d not in door_names:
            raise ProblemError(f"unknown door {d!r}", f"$.init.doors_open.{d}")
    s0 = WorldState.make(poses, {d: bool(opened.get(d, False)) for d in sorted(door_names)}, _pose(data["init"]["base"]))
    conjuncts = []
    for i, (subj, dir, ref) in enumerate(data["goal"]):
        c = at(f"$.goal[{i}]", Conjunct, subj, dir, ref)
        conjuncts.append(c)
    prob = at(
        "$",
        ProblemInstance,
        data["name"],
        tuple(movables),
        tuple(regions),
        tuple(doors),
        walls,
        shape_polygon(data["robot"]["footprint"]),
        s0,
        Goal(tuple(conjuncts)),
        data.get("horizon", 20),
        tuple(data["bounds"]),
        float(data.get("time_budget", 300.0)),
    )
    validate_problem(prob)
    return prob


def validate_problem(prob: ProblemInstance) -> None:
    """Semantic checks beyond the schema: typing, containment and a collision-free start."""
    for i, c in enumerate(prob.goal.conjuncts):
        try:
            check_action(DiscreteAction.place(c.subject, c.dir, c.ref), prob)
        except Exception as exc:
            raise ProblemError(str(exc), f"$.goal[{i}]") from None
    placed = []
    for name, pose in prob.s0.poses:
        fp = prob.footprint(name, pose)
        if prob.region_at(name, pose) is None:
            raise ProblemError(f"movable {name} does not rest inside any region", f"$.movables.{name}")
        for other, ofp in placed:
            if intersects(fp, ofp):
                raise ProblemError(f"initial footprints of {other} and {name} overlap", f"$.movables.{name}")
        for w in prob.static_walls + tuple(w for r in prob.regions for w in r.walls):
            if intersects(fp, w):
                raise ProblemError(f"movable {name} intersects a wall", f"$.movables.{name}")
        placed.append((name, fp))
    xmin, ymin, xmax, ymax = prob.bounds
    if not (xmin < xmax and ymin < ymax):
        raise ProblemError("empty bounds", "$.bounds")
    for r in prob.regions:
        bx, by = r.base_pose.xy
        if not (xmin <= bx <= xmax and ymin <= by <= ymax):
            raise ProblemError(f"base pose of {r.name} outside bounds", f"$.regions.{r.name}")
    if prob.kind(prob.goal.conjuncts[0].subject) is not Kind.MOVABLE:
        raise ProblemError("goal subject must be a movable", "$.goal[0]")


def load_problem(path: str | Path) -> ProblemInstance:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ProblemError(f"invalid JSON: {exc}") from None
    return parse_problem(data)


def bundled_problem_dir() -> Path:
    return Path(str(resources.files("stalm.bench") / "problems"))


def bundled_problem(name: str) -> ProblemInstance:
    """Load one of the bundled fixtures by stem (e.g. ``p1_analog``)."""
    return load_problem(bundled_problem_dir() / f"{name}.json")


def bundled_names() -> list[str]:
    return sorted(p.stem for p in bundled_problem_dir().glob("*.json"))
