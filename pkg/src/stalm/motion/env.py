"""Geometric environment: occlusion predicates, feasibility, and parameter samplers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from stalm.geom import ConvexPolygon, Corridor, Point, Pose2, bbox_overlap, corridor_polygon, intersects
from stalm.motion.prm import Roadmap, build_roadmap, path_polygons, plan_path
from stalm.world import (
    DIRECTION_AXES,
    ContinuousParams,
    Direction,
    DiscreteAction,
    Kind,
    Operator,
    ProblemInstance,
    RewardMode,
    WorldState,
    at_position,
    destination_region,
    goal_satisfied,
    transition,
)

WORLD = "world"  # sentinel occluder: unreachable target or structural blockage
MAX_YAW = math.radians(60.0)


@dataclass(frozen=True)
class MotionConfig:
    prm_samples: int = 300
    prm_k: int = 8
    prm_seed: int = 0
    gripper_width: float = 0.10
    approach_length: float = 0.12
    max_tries: int = 20
    place_offset: float = 0.15


def _first_hit(poly: ConvexPolygon, obstacles: Iterable[ConvexPolygon]) -> bool:
    bb = poly.bbox
    return any(bbox_overlap(bb, o.bbox) and intersects(poly, o) for o in obstacles)


def _hits_any(polys: list[ConvexPolygon], target: ConvexPolygon) -> bool:
    tb = target.bbox
    return any(bbox_overlap(p.bbox, tb) and intersects(p, target) for p in polys)


@dataclass(eq=False)
class Env:
    """Problem plus roadmap; answers every geometric question the planners ask."""

    problem: ProblemInstance
    roadmap: Roadmap
    config: MotionConfig = field(default_factory=MotionConfig)
    reward_mode: RewardMode = RewardMode.DELTA
    reward_scale: float = 1.0
    n_samples_drawn: int = 0
    _nominal: dict = field(default_factory=dict, repr=False)
    _corridors: dict = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, prob: ProblemInstance, config: MotionConfig | None = None, **kw) -> Env:
        config = config or MotionConfig()
        rm = build_roadmap(prob, config.prm_samples, config.prm_k, config.prm_seed)
        return cls(prob, rm, config, **kw)

    # ------------------------------------------------------------------ geometry helpers

    @property
    def static_obstacles(self) -> tuple[ConvexPolygon, ...]:
        return self.roadmap.obstacles

    def placed_movables(self, s: WorldState, exclude: Iterable[str] = ()) -> list[tuple[str, ConvexPolygon]]:
        skip = set(exclude)
        return [(n, self.problem.footprint(n, p)) for n, p in s.poses if n not in skip]

    def closed_door_polys(self, s: WorldState) -> list[tuple[str, ConvexPolygon]]:
        dm = self.problem.door_map
        return [(d, dm[d].closed_polygon) for d in s.closed_doors()]

    def reach_polygon(self, start: Point, end: Point) -> ConvexPolygon | None:
        key = (start, end)
        poly = self._corridors.get(key, False)
        if poly is False:
            try:
                poly = corridor_polygon(Corridor(start, end, self.config.gripper_width))
            except ValueError:
                poly = None
            if len(self._corridors) > 100_000:
                self._corridors.clear()
            self._corridors[key] = poly
        return poly

    def nominal_sweep(self, start: Pose2, goal: Pose2) -> list[ConvexPolygon] | None:
        """Swept robot volume of the path ignoring movables and doors (memoized)."""
        key = (start, goal)
        if key not in self._nominal:
            path = plan_path(self.roadmap, start, goal, ())
            self._nominal[key] = None if path is None else path_polygons(self.roadmap, path)
        return self._nominal[key]

    def structural_walls(self, region: str | None = None) -> tuple[ConvexPolygon, ...]:
        walls = tuple(self.problem.static_walls)
        if region is not None:
            walls += self.problem.region_map[region].walls
        return walls

    # ------------------------------------------------------------------ occlusion

    def nav_occluders(self, s: WorldState, goal: Pose2, exclude: Iterable[str] = ()) -> set[str]:
        polys = self.nominal_sweep(s.base, goal)
        if polys is None:
            return {WORLD}
        hits = {n for n, fp in self.placed_movables(s, exclude) if _hits_any(polys, fp)}
        hits |= {d for d, dp in self.closed_door_polys(s) if _hits_any(polys, dp)}
        return hits

    def reach_occluders(self, s: WorldState, corridor: ConvexPolygon | None, region: str | None, exclude: Iterable[str]) -> set[str]:
        if corridor is None:
            return {WORLD}
        hits = {n for n, fp in self.placed_movables(s, exclude) if bbox_overlap(corridor.bbox, fp.bbox) and intersects(corridor, fp)}
        if _first_hit(corridor, self.structural_walls(region)):
            hits.add(WORLD)
        return hits

    def pick_corridor(self, s: WorldState, o: str) -> tuple[str | None, ConvexPolygon | None]:
        region = self.problem.region_of(s, o)
        if region is None:
            return None, None
        base = self.problem.region_map[region].base_pose
        return region, self.reach_polygon(base.xy, self.problem.grasp_world(o, s.pose(o)))

    def canonical_place_point(self, s: WorldState, dir: Direction, ref: str) -> tuple[str | None, Point | None]:
        prob = self.problem
        if Direction(dir) is Direction.ON:
            return ref, prob.region_map[ref].extent.centroid
        ref_pose = s.pose(ref)
        if ref_pose is None:
            return None, None
        region = prob.region_of(s, ref)
        if region is None:
            return None, None
        frame = prob.region_map[region].local_frame
        ax, ay = DIRECTION_AXES[Direction(dir)]
        d = self.config.place_offset
        c, sn = math.cos(frame.theta), math.sin(frame.theta)
        return region, (ref_pose.x + d * (c * ax - sn * ay), ref_pose.y + d * (sn * ax + c * ay))

    def place_corridor(self, s: WorldState, dir: Direction, ref: str) -> tuple[str | None, ConvexPolygon | None]:
        region, point = self.canonical_place_point(s, dir, ref)
        if region is None:
            return None, None
        base = self.problem.region_map[region].base_pose
        return region, self.reach_polygon(base.xy, point)

    def pick_occluders(self, s: WorldState, o: str) -> set[str]:
        if s.pose(o) is None:
            raise ValueError(f"{o} has no pose (held?)")
        region, corridor = self.pick_corridor(s, o)
        if region is None:
            return {WORLD}
        base = self.problem.region_map[region].base_pose
        return self.nav_occluders(s, base, (o,)) | self.reach_occluders(s, corridor, region, (o,))

    def place_occluders(self, s: WorldState, o: str, dir: Direction, ref: str) -> set[str]:
        region, corridor = self.place_corridor(s, dir, ref)
        if region is None:
            return {WORLD}
        base = self.problem.region_map[region].base_pose
        return self.nav_occluders(s, base, (o,)) | self.reach_occluders(s, corridor, region, (o,))

    # ------------------------------------------------------------------ feasibility

    def target_base(self, s: WorldState, a: DiscreteAction) -> Pose2 | None:
        prob = self.problem
        if a.operator is Operator.OPEN:
            return prob.door_map[a.target].base_pose
        if a.operator is Operator.PICK:
            region = prob.region_of(s, a.target)
        else:
            region = destination_region(s, a, prob)
        return None if region is None else prob.region_map[region].base_pose

    def nav_extras(self, s: WorldState) -> tuple[ConvexPolygon, ...]:
        """Dynamic obstacles for base motion: closed doors, plus movables not resting on a surface."""
        extras = [p for _, p in self.closed_door_polys(s)]
        regions = self.problem.regions
        for n, fp in self.placed_movables(s):
            if not any(r.extent.contains_polygon(fp) for r in regions):
                extras.append(fp)
        return tuple(extras)

    def path_valid(self, s: WorldState, path: tuple[Pose2, ...], goal: Pose2) -> bool:
        if path[0] != s.base or path[-1] != goal:
            return False
        polys = path_polygons(self.roadmap, path)
        obstacles = self.static_obstacles + self.nav_extras(s)
        return not any(_first_hit(p, obstacles) for p in polys)

    def symbolic_ok(self, s: WorldState, a: DiscreteAction) -> bool:
        """Preconditions of the action schemas (including UnsafePick/UnsafePlace)."""
        if a.operator is Operator.OPEN:
            return s.hand_available and not s.is_open(a.target)
        if a.operator is Operator.PICK:
            return s.hand_available and s.pose(a.target) is not None and not self.pick_occluders(s, a.target)
        if s.holding != a.target:
            return False
        if a.dir is not Direction.ON and s.pose(a.ref) is None:
            return False
        return not self.place_occluders(s, a.target, a.dir, a.ref)

    def jaw_polygon(self, base: Pose2, grasp: Point, yaw: float) -> ConvexPolygon | None:
        heading = math.atan2(grasp[1] - base.y, grasp[0] - base.x) + yaw
        L = self.config.approach_length
        start = (grasp[0] - L * math.cos(heading), grasp[1] - L * math.sin(heading))
        return self.reach_polygon(start, grasp)

    def pick_arm_ok(self, s: WorldState, o: str, yaw: float) -> bool:
        region = self.problem.region_of(s, o)
        base = self.problem.region_map[region].base_pose
        jaw = self.jaw_polygon(base, self.problem.grasp_world(o, s.pose(o)), yaw)
        if jaw is None:
            return False
        return not self.reach_occluders(s, jaw, region, (o,))

    def open_arm_ok(self, s: WorldState, d: str) -> bool:
        door = self.problem.door_map[d]
        corridor = self.reach_polygon(door.base_pose.xy, door.handle_point)
        if corridor is None:
            return False
        return not any(intersects(corridor, fp) for _, fp in self.placed_movables(s) if bbox_overlap(corridor.bbox, fp.bbox))

    def placement_pose(self, s: WorldState, a: DiscreteAction, point: Point) -> Pose2:
        region = destination_region(s, a, self.problem)
        return Pose2(point[0], point[1], self.problem.region_map[region].local_frame.theta + s.held_yaw)

    def place_ok(self, s: WorldState, a: DiscreteAction, point: Point) -> bool:
        prob = self.problem
        region = destination_region(s, a, prob)
        if region is None:
            return False
        pose = self.placement_pose(s, a, point)
        fp = prob.footprint(a.target, pose)
        reg = prob.region_map[region]
        if not reg.extent.contains_polygon(fp):
            return False
        if _first_hit(fp, self.structural_walls(region)):
            return False
        if any(bbox_overlap(fp.bbox, other.bbox) and intersects(fp, other) for _, other in self.placed_movables(s)):
            return False
        if a.dir is not Direction.ON:
            ref_pose = s.pose(a.ref)
            if not _relative_ok(reg.local_frame, pose.xy, ref_pose.xy, a.dir):
                return False
        corridor = self.reach_polygon(reg.base_pose.xy, prob.grasp_world(a.target, pose))
        return not self.reach_occluders(s, corridor, region, (a.target,))

    def feasible(self, s: WorldState, a: DiscreteAction, k: ContinuousParams) -> bool:
        if not self.symbolic_ok(s, a):
            return False
        goal = self.target_base(s, a)
        if goal is None or not self.path_valid(s, k.nav_path, goal):
            return False
        if a.operator is Operator.OPEN:
            return self.open_arm_ok(s, a.target)
        if a.operator is Operator.PICK:
            return k.approach_yaw is not None and self.pick_arm_ok(s, a.target, k.approach_yaw)
        return k.placement_point is not None and self.place_ok(s, a, k.placement_point)

    # ------------------------------------------------------------------ sampler

    def sample(self, s: WorldState, a: DiscreteAction, rng: np.random.Generator) -> ContinuousParams | None:
        """Draw continuous parameters; ``None`` when no feasible sample is found."""
        self.n_samples_drawn += 1
        if s.failed or not self.symbolic_ok(s, a):
            return None
        goal = self.target_base(s, a)
        if goal is None:
            return None
        path = plan_path(self.roadmap, s.base, goal, self.nav_extras(s))
        if path is None:
            return None
        path = tuple(path)
        tries = self.config.max_tries
        if a.operator is Operator.OPEN:
            return ContinuousParams(path) if self.open_arm_ok(s, a.target) else None
        if a.operator is Operator.PICK:
            for _ in range(tries):
                yaw = float(rng.uniform(-MAX_YAW, MAX_YAW))
                if self.pick_arm_ok(s, a.target, yaw):
                    return ContinuousParams(path, approach_yaw=yaw)
            return None
        region = destination_region(s, a, self.problem)
        extent = self.problem.region_map[region].extent
        for _ in range(tries):
            point = _uniform_in(extent, rng)
            if self.place_ok(s, a, point):
                return ContinuousParams(path, placement_point=point)
        return None

    # ------------------------------------------------------------------ planner-facing model

    def legal_actions(self, s: WorldState) -> list[DiscreteAction]:
        """Well-typed actions whose hand/door preconditions hold; occlusion is left to search."""
        prob = self.problem
        if s.failed:
            return []
        if s.holding is None:
            acts = [DiscreteAction.pick(n) for n, _ in s.poses]
            acts += [DiscreteAction.open(d) for d in s.closed_doors()]
            return acts
        o = s.holding
        acts = [DiscreteAction.place(o, Direction.ON, r.name) for r in sorted(prob.regions, key=lambda r: r.name)]
        for ref, _ in s.poses:
            if ref != o:
                acts += [DiscreteAction.place(o, d, ref) for d in (Direction.LEFT_OF, Direction.RIGHT_OF, Direction.FRONT_OF, Direction.BEHIND_OF)]
        return acts

    def step(self, s: WorldState, a: DiscreteAction, k: ContinuousParams | None) -> tuple[WorldState, float, bool]:
        return transition(s, a, k, self)

    def is_goal(self, s: WorldState) -> bool:
        return goal_satisfied(s, self.problem.goal, self.problem)

    def is_failed(self, s: WorldState) -> bool:
        return s.failed

    def action_subject(self, a: DiscreteAction) -> str | None:
        return a.target if self.problem.kind(a.target) is Kind.MOVABLE else None


def _relative_ok(frame: Pose2, xy: Point, ref_xy: Point, dir: Direction) -> bool:
    from stalm.world import relative_direction_holds

    return relative_direction_holds(frame, xy, ref_xy, dir)


def _uniform_in(poly: ConvexPolygon, rng: np.random.Generator) -> Point:
    xmin, ymin, xmax, ymax = poly.bbox
    while True:
        p = (float(rng.uniform(xmin, xmax)), float(rng.uniform(ymin, ymax)))
        if poly.contains_point(p):
            return p


def at_position_after(env: Env, s: WorldState, a: DiscreteAction, k: ContinuousParams) -> bool:
    s2, _, ok = env.step(s, a, k)
    return ok and at_position(s2, a.target, a.dir, a.ref, env.problem)
