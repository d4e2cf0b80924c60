"""Deterministic G-TAMP world: entities, state, hybrid actions, transition and reward.

Geometric feasibility of an action is delegated to an environment object
(see :class:`stalm.motion.env.Env`); this module owns the symbolic effects,
the goal test and the reward scheme.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Protocol

from stalm.geom import ConvexPolygon, Point, Pose2, transform

CONJUNCT_REWARD = 3.0
INFEASIBLE_REWARD = -6.0
D_MIN = 0.02  # minimum center offset for a relative direction to hold

_NAME_RE = re.compile(r"^[a-z0-9_]+$")


class ContractViolation(RuntimeError):
    """Raised when a caller breaks a documented precondition."""


class Kind(str, Enum):
    MOVABLE = "movable"
    REGION = "region"
    DOOR = "door"


KIND_ORDER = {Kind.MOVABLE: 0, Kind.REGION: 1, Kind.DOOR: 2}


class Direction(str, Enum):
    ON = "on"
    LEFT_OF = "left_of"
    RIGHT_OF = "right_of"
    FRONT_OF = "front_of"
    BEHIND_OF = "behind_of"

    def __str__(self) -> str:
        return self.value


RELATIVE_DIRECTIONS = (Direction.LEFT_OF, Direction.RIGHT_OF, Direction.FRONT_OF, Direction.BEHIND_OF)

# unit axis of each relative direction in a region's local frame
DIRECTION_AXES: dict[Direction, Point] = {
    Direction.LEFT_OF: (-1.0, 0.0),
    Direction.RIGHT_OF: (1.0, 0.0),
    Direction.FRONT_OF: (0.0, -1.0),
    Direction.BEHIND_OF: (0.0, 1.0),
}


class Operator(str, Enum):
    PICK = "pick"
    PLACE = "place"
    OPEN = "open"

    def __str__(self) -> str:
        return self.value


class RewardMode(str, Enum):
    DELTA = "delta"
    POSITIVE_ONLY = "positive_only"


def check_name(name: str) -> str:
    if not name or not _NAME_RE.match(name):
        raise ValueError(f"invalid entity name {name!r}: use lowercase letters, digits and underscores")
    return name


@dataclass(frozen=True)
class EntityId:
    name: str
    kind: Kind

    def __post_init__(self) -> None:
        check_name(self.name)
        object.__setattr__(self, "kind", Kind(self.kind))


@dataclass(frozen=True)
class Region:
    name: str
    extent: ConvexPolygon
    base_pose: Pose2
    local_frame: Pose2
    walls: tuple[ConvexPolygon, ...] = ()

    def __post_init__(self) -> None:
        check_name(self.name)
        if self.extent.contains_point(self.base_pose.xy):
            raise ValueError(f"region {self.name}: base pose lies inside the extent")


@dataclass(frozen=True)
class Door:
    name: str
    closed_polygon: ConvexPolygon
    base_pose: Pose2
    handle_point: Point

    def __post_init__(self) -> None:
        check_name(self.name)


@dataclass(frozen=True)
class Movable:
    name: str
    footprint: ConvexPolygon
    grasp_point: Point = (0.0, 0.0)

    def __post_init__(self) -> None:
        check_name(self.name)
        if not self.footprint.contains_point(self.grasp_point, eps=1e-12):
            raise ValueError(f"movable {self.name}: grasp point outside footprint")


@dataclass(frozen=True)
class DiscreteAction:
    """Operator with its discrete arguments; ``dir``/``ref`` only for Place."""

    operator: Operator
    target: str
    dir: Direction | None = None
    ref: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "operator", Operator(self.operator))
        if self.operator is Operator.PLACE:
            if self.dir is None or self.ref is None:
                raise ContractViolation("place needs a direction and a reference")
            object.__setattr__(self, "dir", Direction(self.dir))
        elif self.dir is not None or self.ref is not None:
            raise ContractViolation(f"{self.operator.value} takes a single argument")

    @classmethod
    def pick(cls, target: str) -> DiscreteAction:
        return cls(Operator.PICK, target)

    @classmethod
    def open(cls, target: str) -> DiscreteAction:
        return cls(Operator.OPEN, target)

    @classmethod
    def place(cls, target: str, dir: Direction | str, ref: str) -> DiscreteAction:
        return cls(Operator.PLACE, target, Direction(dir), ref)

    def as_tuple(self) -> tuple[str, ...]:
        if self.operator is Operator.PLACE:
            return (self.operator.value, self.target, self.dir.value, self.ref)
        return (self.operator.value, self.target)

    def __str__(self) -> str:
        return "(" + " ".join(self.as_tuple()) + ")"


@dataclass(frozen=True)
class ContinuousParams:
    nav_path: tuple[Pose2, ...]
    approach_yaw: float | None = None
    placement_point: Point | None = None

    def __post_init__(self) -> None:
        if not self.nav_path:
            raise ContractViolation("nav_path must be nonempty")
        object.__setattr__(self, "nav_path", tuple(self.nav_path))
        if self.approach_yaw is not None and abs(self.approach_yaw) > math.radians(60.0) + 1e-12:
            raise ContractViolation("approach yaw outside [-60, 60] degrees")


@dataclass(frozen=True)
class WorldState:
    """Immutable snapshot. ``poses`` and ``door_open`` are name-sorted tuples."""

    poses: tuple[tuple[str, Pose2], ...]
    door_open: tuple[tuple[str, bool], ...]
    base: Pose2
    holding: str | None = None
    held_yaw: float | None = None  # held object's yaw relative to its source region frame
    failed: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "poses", tuple(sorted(self.poses)))
        object.__setattr__(self, "door_open", tuple(sorted(self.door_open)))
        if (self.holding is None) != (self.held_yaw is None):
            raise ContractViolation("holding and held_yaw must be set together")

    @classmethod
    def make(
        cls,
        poses: dict[str, Pose2],
        door_open: dict[str, bool],
        base: Pose2,
        holding: str | None = None,
        held_yaw: float | None = None,
    ) -> WorldState:
        return cls(tuple(poses.items()), tuple(door_open.items()), base, holding, held_yaw)

    @cached_property
    def pose_map(self) -> dict[str, Pose2]:
        return dict(self.poses)

    @cached_property
    def door_map(self) -> dict[str, bool]:
        return dict(self.door_open)

    def pose(self, name: str) -> Pose2 | None:
        return self.pose_map.get(name)

    def is_open(self, door: str) -> bool:
        return self.door_map[door]

    @property
    def hand_available(self) -> bool:
        return self.holding is None

    def closed_doors(self) -> tuple[str, ...]:
        return tuple(d for d, is_open in self.door_open if not is_open)


@dataclass(frozen=True)
class Conjunct:
    subject: str
    dir: Direction
    ref: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "dir", Direction(self.dir))


@dataclass(frozen=True)
class Goal:
    conjuncts: tuple[Conjunct, ...]

    def __post_init__(self) -> None:
        if not self.conjuncts:
            raise ValueError("goal needs at least one conjunct")

    @property
    def objects(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for c in self.conjuncts:
            seen.setdefault(c.subject, None)
        return tuple(seen)


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    name: str
    movables: tuple[Movable, ...]
    regions: tuple[Region, ...]
    doors: tuple[Door, ...]
    static_walls: tuple[ConvexPolygon, ...]
    robot_footprint: ConvexPolygon
    s0: WorldState
    goal: Goal
    horizon: int = 20
    bounds: tuple[float, float, float, float] = (0.0, 0.0, 1.0, 1.0)
    time_budget: float = 300.0
    _footprints: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        names = [e.name for e in self.movables + self.regions + self.doors]
        if len(set(names)) != len(names):
            raise ValueError("entity names must be unique")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")

    @cached_property
    def entities(self) -> dict[str, EntityId]:
        out = {m.name: EntityId(m.name, Kind.MOVABLE) for m in self.movables}
        out.update({r.name: EntityId(r.name, Kind.REGION) for r in self.regions})
        out.update({d.name: EntityId(d.name, Kind.DOOR) for d in self.doors})
        return out

    @cached_property
    def movable_map(self) -> dict[str, Movable]:
        return {m.name: m for m in self.movables}

    @cached_property
    def region_map(self) -> dict[str, Region]:
        return {r.name: r for r in self.regions}

    @cached_property
    def door_map(self) -> dict[str, Door]:
        return {d.name: d for d in self.doors}

    def kind(self, name: str) -> Kind:
        try:
            return self.entities[name].kind
        except KeyError:
            raise KeyError(f"unknown entity {name!r}") from None

    def footprint(self, name: str, pose: Pose2) -> ConvexPolygon:
        """World-frame footprint of a movable at ``pose`` (memoized)."""
        key = (name, pose)
        poly = self._footprints.get(key)
        if poly is None:
            if len(self._footprints) > 200_000:
                self._footprints.clear()
            poly = transform(self.movable_map[name].footprint, pose)
            self._footprints[key] = poly
        return poly

    def grasp_world(self, name: str, pose: Pose2) -> Point:
        return pose.apply(self.movable_map[name].grasp_point)

    def region_of(self, s: WorldState, name: str) -> str | None:
        """Region whose extent fully contains the movable's footprint."""
        pose = s.pose(name)
        if pose is None:
            return None
        return self.region_at(name, pose)

    def region_at(self, name: str, pose: Pose2) -> str | None:
        fp = self.footprint(name, pose)
        for r in self.regions:
            if r.extent.contains_polygon(fp):
                return r.name
        return None


def check_action(a: DiscreteAction, prob: ProblemInstance) -> None:
    """Raise ContractViolation unless ``a`` is well-typed over ``prob``."""
    try:
        target_kind = prob.kind(a.target)
        ref_kind = prob.kind(a.ref) if a.ref is not None else None
    except KeyError as exc:
        raise ContractViolation(str(exc)) from None
    if a.operator is Operator.OPEN:
        ok = target_kind is Kind.DOOR
    elif a.operator is Operator.PICK:
        ok = target_kind is Kind.MOVABLE
    elif a.dir is Direction.ON:
        ok = target_kind is Kind.MOVABLE and ref_kind is Kind.REGION
    else:
        ok = target_kind is Kind.MOVABLE and ref_kind is Kind.MOVABLE and a.ref != a.target
    if not ok:
        raise ContractViolation(f"ill-typed action {a}")


def at_position(s: WorldState, subject: str, dir: Direction, ref: str, prob: ProblemInstance) -> bool:
    dir = Direction(dir)
    if prob.kind(subject) is not Kind.MOVABLE:
        raise KeyError(f"{subject!r} is not a movable")
    ref_kind = prob.kind(ref)
    pose = s.pose(subject)
    if pose is None:
        return False
    if dir is Direction.ON:
        if ref_kind is not Kind.REGION:
            return False
        return prob.region_map[ref].extent.contains_polygon(prob.footprint(subject, pose))
    if ref_kind is not Kind.MOVABLE or ref == subject:
        return False
    ref_pose = s.pose(ref)
    if ref_pose is None:
        return False
    region = prob.region_at(subject, pose)
    if region is None or region != prob.region_at(ref, ref_pose):
        return False
    return relative_direction_holds(prob.region_map[region].local_frame, pose.xy, ref_pose.xy, dir)


def relative_direction_holds(frame: Pose2, subject_xy: Point, ref_xy: Point, dir: Direction) -> bool:
    a = frame.inverse_apply(subject_xy)
    b = frame.inverse_apply(ref_xy)
    dx, dy = a[0] - b[0], a[1] - b[1]
    if math.hypot(dx, dy) < D_MIN:
        return False
    if abs(dx) > abs(dy):
        return dir is (Direction.LEFT_OF if dx < 0 else Direction.RIGHT_OF)
    if abs(dy) > abs(dx):
        return dir is (Direction.BEHIND_OF if dy > 0 else Direction.FRONT_OF)
    return False


def satisfied_conjuncts(s: WorldState, g: Goal, prob: ProblemInstance) -> tuple[bool, ...]:
    return tuple(at_position(s, c.subject, c.dir, c.ref, prob) for c in g.conjuncts)


def goal_satisfied(s: WorldState, g: Goal, prob: ProblemInstance) -> bool:
    if s.failed or s.holding is not None:
        return False
    return all(satisfied_conjuncts(s, g, prob))


class FeasibilityChecker(Protocol):
    problem: ProblemInstance
    reward_mode: RewardMode
    reward_scale: float

    def feasible(self, s: WorldState, a: DiscreteAction, k: ContinuousParams) -> bool: ...


def apply_effects(s: WorldState, a: DiscreteAction, k: ContinuousParams, prob: ProblemInstance) -> WorldState:
    """Symbolic and pose effects of an action already known to be feasible."""
    base = k.nav_path[-1]
    if a.operator is Operator.OPEN:
        doors = dict(s.door_open)
        doors[a.target] = True
        return replace(s, door_open=tuple(doors.items()), base=base)
    if a.operator is Operator.PICK:
        pose = s.pose(a.target)
        region = prob.region_at(a.target, pose)
        frame_theta = prob.region_map[region].local_frame.theta if region else 0.0
        poses = tuple((n, p) for n, p in s.poses if n != a.target)
        return replace(s, poses=poses, base=base, holding=a.target, held_yaw=pose.theta - frame_theta)
    region = destination_region(s, a, prob)
    theta = prob.region_map[region].local_frame.theta + s.held_yaw
    px, py = k.placement_point
    poses = s.poses + ((a.target, Pose2(px, py, theta)),)
    return replace(s, poses=poses, base=base, holding=None, held_yaw=None)


def destination_region(s: WorldState, a: DiscreteAction, prob: ProblemInstance) -> str | None:
    if a.dir is Direction.ON:
        return a.ref
    return prob.region_of(s, a.ref)


def goal_reward(s: WorldState, s_next: WorldState, g: Goal, prob: ProblemInstance, mode: RewardMode) -> float:
    before = satisfied_conjuncts(s, g, prob)
    after = satisfied_conjuncts(s_next, g, prob)
    gained = sum(1 for b, a in zip(before, after) if a and not b)
    lost = sum(1 for b, a in zip(before, after) if b and not a)
    if RewardMode(mode) is RewardMode.POSITIVE_ONLY:
        lost = 0
    return CONJUNCT_REWARD * (gained - lost)


def transition(
    s: WorldState, a: DiscreteAction, k: ContinuousParams | None, env: FeasibilityChecker
) -> tuple[WorldState, float, bool]:
    """Apply ``a`` with parameters ``k``; ``k=None`` stands for a failed sample.

    Infeasible actions return the input state with ``failed`` set and the
    infeasibility penalty.
    """
    if s.failed:
        raise ContractViolation("transition from an absorbed failure state")
    prob = env.problem
    check_action(a, prob)
    if k is None or not env.feasible(s, a, k):
        return replace(s, failed=True), INFEASIBLE_REWARD * env.reward_scale, False
    s_next = apply_effects(s, a, k, prob)
    return s_next, goal_reward(s, s_next, prob.goal, prob, env.reward_mode) * env.reward_scale, True
