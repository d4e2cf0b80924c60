"""Brute-force reference checks, kept independent of the SAT and sweep code.

Occlusion is recomputed by re-sampling the robot along the nominal path at
1 cm and the gripper cross-section along the reach corridor at 1 cm, with
contact decided by plain segment intersection and point-in-polygon tests.
Between samples the sweep boundary is traced by the polygon vertices, so
those vertex trajectories are tested as segments too.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from stalm.motion.env import WORLD, Env
from stalm.motion.prm import plan_path
from stalm.planner.tree import BackupRecord, SearchTree
from stalm.world import DIRECTION_AXES, Direction, WorldState

Pt = tuple[float, float]
EPS = 1e-12
STEP = 0.01


def _orient(a: Pt, b: Pt, c: Pt) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _on_segment(a: Pt, b: Pt, p: Pt) -> bool:
    return min(a[0], b[0]) - EPS <= p[0] <= max(a[0], b[0]) + EPS and min(a[1], b[1]) - EPS <= p[1] <= max(a[1], b[1]) + EPS


def segments_meet(p1: Pt, p2: Pt, q1: Pt, q2: Pt) -> bool:
    """Closed-segment intersection, touching included."""
    d1, d2 = _orient(q1, q2, p1), _orient(q1, q2, p2)
    d3, d4 = _orient(p1, p2, q1), _orient(p1, p2, q2)
    if ((d1 > EPS and d2 < -EPS) or (d1 < -EPS and d2 > EPS)) and ((d3 > EPS and d4 < -EPS) or (d3 < -EPS and d4 > EPS)):
        return True
    if abs(d1) <= EPS and _on_segment(q1, q2, p1):
        return True
    if abs(d2) <= EPS and _on_segment(q1, q2, p2):
        return True
    if abs(d3) <= EPS and _on_segment(p1, p2, q1):
        return True
    return abs(d4) <= EPS and _on_segment(p1, p2, q2)


def point_in_polygon(p: Pt, poly: Sequence[Pt]) -> bool:
    """Even-odd test, with boundary points counted as inside."""
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        if abs(_orient(a, b, p)) <= EPS and _on_segment(a, b, p):
            return True
    inside = False
    for i in range(n):
        (x1, y1), (x2, y2) = poly[i], poly[(i + 1) % n]
        if (y1 > p[1]) != (y2 > p[1]):
            x = x1 + (p[1] - y1) * (x2 - x1) / (y2 - y1)
            if x > p[0]:
                inside = not inside
    return inside


def _edges(poly: Sequence[Pt]) -> list[tuple[Pt, Pt]]:
    return [(poly[i], poly[(i + 1) % len(poly)]) for i in range(len(poly))]


def _bbox(pts: Iterable[Pt]) -> tuple[float, float, float, float]:
    xs, ys = zip(*pts)
    return min(xs), min(ys), max(xs), max(ys)


def _boxes_meet(a, b) -> bool:
    return a[0] <= b[2] + 1e-9 and b[0] <= a[2] + 1e-9 and a[1] <= b[3] + 1e-9 and b[1] <= a[3] + 1e-9


def polygons_meet(a: Sequence[Pt], b: Sequence[Pt]) -> bool:
    """Two simple polygons share a point (boundary contact counts)."""
    if not _boxes_meet(_bbox(a), _bbox(b)):
        return False
    if any(segments_meet(p, q, r, s) for p, q in _edges(a) for r, s in _edges(b)):
        return True
    return point_in_polygon(a[0], b) or point_in_polygon(b[0], a)


def segment_meets_polygon(p: Pt, q: Pt, poly: Sequence[Pt]) -> bool:
    return point_in_polygon(p, poly) or any(segments_meet(p, q, r, s) for r, s in _edges(poly))


def place_vertices(local: Sequence[Pt], x: float, y: float, theta: float) -> list[Pt]:
    c, s = math.cos(theta), math.sin(theta)
    return [(x + c * u - s * v, y + s * u + c * v) for u, v in local]


def resample(points: Sequence[Pt], step: float = STEP) -> list[Pt]:
    """Polyline re-sampled so consecutive points are at most ``step`` apart."""
    out = [points[0]]
    for a, b in zip(points, points[1:]):
        d = math.dist(a, b)
        k = max(1, math.ceil(d / step))
        out.extend((a[0] + (b[0] - a[0]) * i / k, a[1] + (b[1] - a[1]) * i / k) for i in range(1, k + 1))
    return out


def _orient_v(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])


def _on_segment_v(a: np.ndarray, b: np.ndarray, p: np.ndarray) -> np.ndarray:
    lo, hi = np.minimum(a, b) - EPS, np.maximum(a, b) + EPS
    return (p[..., 0] >= lo[..., 0]) & (p[..., 0] <= hi[..., 0]) & (p[..., 1] >= lo[..., 1]) & (p[..., 1] <= hi[..., 1])


def _segments_meet_v(p: np.ndarray, q: np.ndarray, r: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Vectorised :func:`segments_meet`; arguments broadcast against each other."""
    d1, d2 = _orient_v(r, s, p), _orient_v(r, s, q)
    d3, d4 = _orient_v(p, q, r), _orient_v(p, q, s)
    proper = (((d1 > EPS) & (d2 < -EPS)) | ((d1 < -EPS) & (d2 > EPS))) & (((d3 > EPS) & (d4 < -EPS)) | ((d3 < -EPS) & (d4 > EPS)))
    touch = (np.abs(d1) <= EPS) & _on_segment_v(r, s, p)
    touch |= (np.abs(d2) <= EPS) & _on_segment_v(r, s, q)
    touch |= (np.abs(d3) <= EPS) & _on_segment_v(p, q, r)
    touch |= (np.abs(d4) <= EPS) & _on_segment_v(p, q, s)
    return proper | touch


def _points_in_polygons(pts: np.ndarray, polys: np.ndarray) -> np.ndarray:
    """Even-odd test of ``pts[i]`` against ``polys[i]`` (shape (n, m, 2)); boundary counts."""
    a, b = polys, np.roll(polys, -1, axis=1)
    p = pts[:, None, :]
    boundary = ((np.abs(_orient_v(a, b, p)) <= EPS) & _on_segment_v(a, b, p)).any(axis=1)
    y1, y2 = a[..., 1], b[..., 1]
    crosses = (y1 > p[..., 1]) != (y2 > p[..., 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        x = a[..., 0] + (p[..., 1] - y1) * (b[..., 0] - a[..., 0]) / (y2 - y1)
    odd = (crosses & (x > p[..., 0])).sum(axis=1) % 2 == 1
    return boundary | odd


@dataclass
class MovingShape:
    """A rigid shape translated along a polyline, tested by dense sampling."""

    local: list[Pt]
    track: list[Pt]
    dense_only: bool = False  # skip vertex trajectories (pure sampling)

    def __post_init__(self) -> None:
        self._track = np.asarray(self.track, dtype=float)
        self._local = np.asarray(self.local, dtype=float)
        self._lo = self._local.min(axis=0)
        self._hi = self._local.max(axis=0)

    def _near(self, box, lo, hi) -> np.ndarray:
        """Indices of track points whose shape bbox (grown by ``lo``/``hi``) meets ``box``."""
        t = self._track
        m = (t[:, 0] + hi[0] >= box[0] - 1e-9) & (t[:, 0] + lo[0] <= box[2] + 1e-9)
        m &= (t[:, 1] + hi[1] >= box[1] - 1e-9) & (t[:, 1] + lo[1] <= box[3] + 1e-9)
        return np.flatnonzero(m)

    def hits(self, obstacle: Sequence[Pt]) -> bool:
        box = _bbox(obstacle)
        obs = np.asarray(obstacle, dtype=float)
        r, s = obs, np.roll(obs, -1, axis=0)
        idx = self._near(box, self._lo, self._hi)
        if len(idx):
            verts = self._track[idx, None, :] + self._local[None, :, :]  # (n, m, 2)
            p, q = verts, np.roll(verts, -1, axis=1)
            if _segments_meet_v(p[:, :, None, :], q[:, :, None, :], r[None, None], s[None, None]).any():
                return True
            if _points_in_polygons(verts[:, 0, :], np.broadcast_to(obs, (len(idx),) + obs.shape)).any():
                return True
            if _points_in_polygons(np.broadcast_to(obs[0], (len(idx), 2)), verts).any():
                return True
        if self.dense_only or len(self._track) < 2:
            return False
        # the segment between samples i and i+1 lies in the grown bbox of sample i
        idx = self._near(box, self._lo - STEP, self._hi + STEP)
        idx = idx[idx + 1 < len(self._track)]
        if not len(idx):
            return False
        p = self._track[idx, None, :] + self._local[None, :, :]
        q = self._track[idx + 1, None, :] + self._local[None, :, :]
        return bool(_segments_meet_v(p[:, :, None, :], q[:, :, None, :], r[None, None], s[None, None]).any())


def _verts(poly) -> list[Pt]:
    return [tuple(map(float, v)) for v in poly.vertices]


@dataclass
class OracleReport:
    checks: int = 0
    mismatches: list[tuple] = field(default_factory=list)
    conservatism: list[tuple] = field(default_factory=list)  # library hit, exact oracle clear
    sampling_gaps: int = 0  # exact hit that 1 cm sampling alone would miss

    @property
    def ok(self) -> bool:
        return not self.mismatches and not self.conservatism


@dataclass
class OcclusionOracle:
    """Occluder sets for one environment; hit sets are cached per state and path."""

    env: Env
    step: float = STEP
    _cache: dict = field(default_factory=dict, repr=False)

    # ---------------------------------------------------------------- pieces

    def _obstacles(self, s: WorldState, exclude: Iterable[str]) -> list[tuple[str, list[Pt]]]:
        prob = self.env.problem
        skip = set(exclude)
        out = []
        for name, pose in s.poses:
            if name in skip:
                continue
            local = [tuple(map(float, v)) for v in prob.movable_map[name].footprint.vertices]
            out.append((name, place_vertices(local, pose.x, pose.y, pose.theta)))
        for d in s.closed_doors():
            out.append((d, _verts(prob.door_map[d].closed_polygon)))
        return out

    def _nav(self, s: WorldState, goal, exclude, dense_only=False) -> set[str]:
        key = ("nav", s, goal, dense_only)
        if key not in self._cache:
            path = plan_path(self.env.roadmap, s.base, goal, ())
            if path is None:
                self._cache[key] = None
            else:
                track = resample([(p.x, p.y) for p in path], self.step)
                robot = MovingShape(_verts(self.env.roadmap.footprint), track, dense_only)
                self._cache[key] = {n for n, poly in self._obstacles(s, ()) if robot.hits(poly)}
        hits = self._cache[key]
        return {WORLD} if hits is None else hits - set(exclude)

    def _reach(self, s: WorldState, start: Pt, end: Pt, region: str, exclude, dense_only=False) -> set[str]:
        length = math.dist(start, end)
        if length <= 1e-12:
            return {WORLD}
        key = ("reach", s, start, end, region, dense_only)
        if key not in self._cache:
            w = self.env.config.gripper_width / 2.0
            ux, uy = (end[0] - start[0]) / length, (end[1] - start[1]) / length
            # cross-section of the gripper, perpendicular to the approach direction
            local = [(-uy * w, ux * w), (uy * w, -ux * w)]
            jaw = MovingShape(local, resample([start, end], self.step), dense_only)
            doors = self._door_names()
            hits = {n for n, poly in self._obstacles(s, ()) if n not in doors and jaw.hits(poly)}
            prob = self.env.problem
            walls = list(prob.static_walls) + list(prob.region_map[region].walls)
            if any(jaw.hits(_verts(wl)) for wl in walls):
                hits.add(WORLD)
            self._cache[key] = hits
        return self._cache[key] - set(exclude)

    def _door_names(self) -> set[str]:
        return set(self.env.problem.door_map)

    def _grasp(self, name: str, pose) -> Pt:
        g = self.env.problem.movable_map[name].grasp_point
        return place_vertices([tuple(map(float, g))], pose.x, pose.y, pose.theta)[0]

    def _place_point(self, s: WorldState, d: Direction, ref: str) -> tuple[str | None, Pt | None]:
        prob = self.env.problem
        if d is Direction.ON:
            ext = _verts(prob.region_map[ref].extent)
            return ref, _centroid(ext)
        pose = s.pose(ref)
        if pose is None:
            return None, None
        region = prob.region_of(s, ref)
        if region is None:
            return None, None
        frame = prob.region_map[region].local_frame
        ax, ay = DIRECTION_AXES[d]
        off = self.env.config.place_offset
        return region, place_vertices([(off * ax, off * ay)], pose.x, pose.y, frame.theta)[0]

    # ---------------------------------------------------------------- queries

    def pick_occluders(self, s: WorldState, o: str, dense_only: bool = False) -> set[str]:
        prob = self.env.problem
        region = prob.region_of(s, o)
        if region is None:
            return {WORLD}
        base = prob.region_map[region].base_pose
        nav = self._nav(s, base, (o,), dense_only)
        return nav | self._reach(s, (base.x, base.y), self._grasp(o, s.pose(o)), region, (o,), dense_only)

    def place_occluders(self, s: WorldState, o: str, d: Direction, ref: str, dense_only: bool = False) -> set[str]:
        region, point = self._place_point(s, Direction(d), ref)
        if region is None:
            return {WORLD}
        base = self.env.problem.region_map[region].base_pose
        nav = self._nav(s, base, (o,), dense_only)
        return nav | self._reach(s, (base.x, base.y), point, region, (o,), dense_only)

    def compare(self, s: WorldState, report: OracleReport | None = None) -> OracleReport:
        """Check every pick/place grounding of ``s`` against the library."""
        from stalm.motion.literals import groundings

        report = report or OracleReport()
        env = self.env
        for g in groundings(env, s):
            if g[0] == "pick":
                o = g[1]
                lib = env.pick_occluders(s, o)
                exact = self.pick_occluders(s, o)
                dense = self.pick_occluders(s, o, dense_only=True)
            else:
                _, o, d, ref = g
                lib = env.place_occluders(s, o, d, ref)
                exact = self.place_occluders(s, o, d, ref)
                dense = self.place_occluders(s, o, d, ref, dense_only=True)
            report.checks += 1
            if lib - exact:
                report.conservatism.append((g, sorted(lib - exact)))
            if exact - lib:
                report.mismatches.append((g, sorted(lib), sorted(exact)))
            report.sampling_gaps += len(exact - dense)
        return report


def _centroid(poly: Sequence[Pt]) -> Pt:
    a = cx = cy = 0.0
    for (x0, y0), (x1, y1) in _edges(poly):
        cross = x0 * y1 - x1 * y0
        a += cross
        cx += (x0 + x1) * cross
        cy += (y0 + y1) * cross
    a *= 0.5
    return cx / (6 * a), cy / (6 * a)


# -------------------------------------------------------------------- backups


@dataclass(frozen=True)
class BackupCheck:
    keys: int
    records: int
    max_error: float


def check_backups(tree: SearchTree, tol: float = 1e-9) -> BackupCheck:
    """Every logged Q equals the running mean of the totals logged before it,
    and the final Q stored in the tree equals the mean of all its totals."""
    totals: dict[tuple[int, str, str], list[float]] = defaultdict(list)
    worst = 0.0
    for rec in tree.log:
        key = (rec.node, rec.level, rec.key)
        totals[key].append(rec.total)
        seq = totals[key]
        mean = math.fsum(seq) / len(seq)
        worst = max(worst, abs(mean - rec.q))
        if rec.n != len(seq):
            raise AssertionError(f"visit count {rec.n} != {len(seq)} backups for {key}")
    final: dict[tuple[int, str, str], float] = {}
    for node in tree.walk():
        if hasattr(node, "edge_q"):
            for a, q in node.edge_q.items():
                final[(node.id, "discrete", str(a))] = q
        else:
            for e in node.entries:
                if e.n:
                    final[(node.id, "continuous", str(e.index))] = e.q
    for key, q in final.items():
        seq = totals.get(key)
        if not seq:
            raise AssertionError(f"{key} has a Q but no logged backups")
        worst = max(worst, abs(math.fsum(seq) / len(seq) - q))
    if worst > tol:
        raise AssertionError(f"backup mean error {worst:.3e} exceeds {tol:.1e}")
    return BackupCheck(len(totals), len(tree.log), worst)


__all__ = [
    "BackupCheck",
    "BackupRecord",
    "MovingShape",
    "OcclusionOracle",
    "OracleReport",
    "check_backups",
    "point_in_polygon",
    "polygons_meet",
    "resample",
    "segments_meet",
]
