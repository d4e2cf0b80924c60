"""Probabilistic roadmap over the robot base (translation-only footprint)."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from stalm.geom import ConvexPolygon, Pose2, bbox_overlap, intersects, sweep, transform
from stalm.world import ProblemInstance


class RoadmapError(RuntimeError):
    pass


def nav_obstacles(prob: ProblemInstance) -> tuple[ConvexPolygon, ...]:
    """Static obstacles for the base: walls plus region surfaces (tables, counters)."""
    return tuple(prob.static_walls) + tuple(r.extent for r in prob.regions)


def _hits(poly: ConvexPolygon, obstacles: Sequence[ConvexPolygon]) -> bool:
    bb = poly.bbox
    for o in obstacles:
        if bbox_overlap(bb, o.bbox) and intersects(poly, o):
            return True
    return False


@dataclass
class Roadmap:
    nodes: tuple[Pose2, ...]
    edges: dict[int, list[tuple[int, float]]]
    seed: int
    footprint: ConvexPolygon
    obstacles: tuple[ConvexPolygon, ...]
    k_neighbors: int
    edge_sweeps: dict[tuple[int, int], ConvexPolygon] = field(repr=False, default_factory=dict)
    n_queries: int = 0
    n_plans: int = 0
    _tree: cKDTree | None = field(default=None, repr=False)
    _memo: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self._tree = cKDTree(np.array([(p.x, p.y) for p in self.nodes]))

    def segment_sweep(self, a: Pose2, b: Pose2) -> ConvexPolygon:
        return sweep(self.footprint, [a.translation_only(), b.translation_only()])[0]

    def edge_poly(self, i: int, j: int) -> ConvexPolygon:
        key = (i, j) if i < j else (j, i)
        poly = self.edge_sweeps.get(key)
        if poly is None:
            poly = self.segment_sweep(self.nodes[key[0]], self.nodes[key[1]])
            self.edge_sweeps[key] = poly
        return poly

    def nearest(self, p: Pose2, k: int) -> list[int]:
        k = min(k, len(self.nodes))
        _, idx = self._tree.query((p.x, p.y), k=k)
        return [int(i) for i in np.atleast_1d(idx)]

    def components(self) -> list[set[int]]:
        seen: set[int] = set()
        comps = []
        for start in range(len(self.nodes)):
            if start in seen:
                continue
            comp = {start}
            stack = [start]
            while stack:
                u = stack.pop()
                for v, _ in self.edges[u]:
                    if v not in comp:
                        comp.add(v)
                        stack.append(v)
            seen |= comp
            comps.append(comp)
        return comps


def robot_nav_footprint(prob: ProblemInstance) -> ConvexPolygon:
    return prob.robot_footprint


def build_roadmap(prob: ProblemInstance, n_samples: int = 300, k_neighbors: int = 8, seed: int = 0) -> Roadmap:
    if n_samples < 1 or k_neighbors < 1:
        raise ValueError("n_samples and k_neighbors must be >= 1")
    footprint = robot_nav_footprint(prob)
    obstacles = nav_obstacles(prob)
    rng = np.random.default_rng(seed)
    xmin, ymin, xmax, ymax = prob.bounds
    samples: list[Pose2] = []
    attempts = 0
    max_attempts = 50 * n_samples
    while len(samples) < n_samples and attempts < max_attempts:
        attempts += 1
        x, y = rng.uniform(xmin, xmax), rng.uniform(ymin, ymax)
        pose = Pose2(x, y, 0.0)
        if not _hits(transform(footprint, pose), obstacles):
            samples.append(pose)
    if not samples:
        raise RoadmapError("workspace fully blocked: no collision-free base sample found")
    bases = [r.base_pose for r in sorted(prob.regions, key=lambda r: r.name)]
    bases += [d.base_pose for d in sorted(prob.doors, key=lambda d: d.name)]
    nodes = tuple(samples) + tuple(bases)
    rm = Roadmap(nodes, {i: [] for i in range(len(nodes))}, seed, footprint, obstacles, k_neighbors)
    linked: set[tuple[int, int]] = set()
    for i, p in enumerate(nodes):
        for j in rm.nearest(p, k_neighbors + 1):
            if j == i:
                continue
            key = (i, j) if i < j else (j, i)
            if key in linked:
                continue
            linked.add(key)
            poly = rm.edge_poly(i, j)
            if _hits(poly, obstacles):
                rm.edge_sweeps.pop(key, None)
                continue
            d = math.hypot(p.x - nodes[j].x, p.y - nodes[j].y)
            rm.edges[i].append((j, d))
            rm.edges[j].append((i, d))
    return rm


def _dedupe(path: list[Pose2]) -> list[Pose2]:
    start, goal = path[0], path[-1]
    out = [start]
    for p in path[1:-1]:
        if (p.x, p.y) != (out[-1].x, out[-1].y) and (p.x, p.y) != (goal.x, goal.y):
            out.append(p)
    out.append(goal)
    return out


def plan_path(
    rm: Roadmap, start: Pose2, goal: Pose2, extra_obstacles: Sequence[ConvexPolygon] = ()
) -> list[Pose2] | None:
    """Shortest roadmap path from ``start`` to ``goal`` avoiding statics and extras."""
    rm.n_queries += 1
    if start == goal:
        return [start]
    extras = tuple(extra_obstacles)
    key = (start, goal, extras)
    if key in rm._memo:
        cached = rm._memo[key]
        return None if cached is None else list(cached)
    rm.n_plans += 1
    path = _search(rm, start, goal, extras)
    if len(rm._memo) > 50_000:
        rm._memo.clear()
    rm._memo[key] = None if path is None else tuple(path)
    return path


def _search(rm: Roadmap, start: Pose2, goal: Pose2, extras: tuple[ConvexPolygon, ...]) -> list[Pose2] | None:
    n = len(rm.nodes)
    s_idx, g_idx = n, n + 1
    blocked: dict[tuple[int, int], bool] = {}

    def edge_free(i: int, j: int) -> bool:
        key = (i, j) if i < j else (j, i)
        v = blocked.get(key)
        if v is None:
            v = _hits(rm.edge_poly(i, j), extras) if extras else False
            blocked[key] = v
        return not v

    def attach(p: Pose2) -> list[tuple[int, float]]:
        out = []
        for j in rm.nearest(p, rm.k_neighbors):
            poly = rm.segment_sweep(p, rm.nodes[j])
            if _hits(poly, rm.obstacles) or _hits(poly, extras):
                continue
            out.append((j, math.hypot(p.x - rm.nodes[j].x, p.y - rm.nodes[j].y)))
        return out

    start_links = attach(start)
    goal_links = {j: d for j, d in attach(goal)}
    direct = rm.segment_sweep(start, goal)
    direct_free = not _hits(direct, rm.obstacles) and not _hits(direct, extras)
    if not direct_free and (not start_links or not goal_links):
        return None

    dist = {s_idx: 0.0}
    prev: dict[int, int] = {}
    heap: list[tuple[float, int]] = [(0.0, s_idx)]
    done: set[int] = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == g_idx:
            break
        if u == s_idx:
            nbrs = list(start_links)
            if direct_free:
                nbrs.append((g_idx, start.distance(goal)))
        else:
            nbrs = [(v, w) for v, w in rm.edges[u] if edge_free(u, v)]
            if u in goal_links:
                nbrs.append((g_idx, goal_links[u]))
        for v, w in nbrs:
            nd = d + w
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, v))
    if g_idx not in done:
        return None
    chain = [g_idx]
    while chain[-1] != s_idx:
        chain.append(prev[chain[-1]])
    chain.reverse()
    poses = [start] + [rm.nodes[i] for i in chain[1:-1]] + [goal]
    return _dedupe(poses)


def path_polygons(rm: Roadmap, path: Sequence[Pose2]) -> list[ConvexPolygon]:
    """Swept robot footprint along ``path`` (translation only)."""
    return sweep(rm.footprint, [p.translation_only() for p in path])


def path_length(path: Sequence[Pose2]) -> float:
    return sum(a.distance(b) for a, b in zip(path, path[1:]))
