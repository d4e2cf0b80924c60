"""Planar convex-polygon geometry: poses, transforms, separating-axis tests, sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

Point = tuple[float, float]

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Map an angle into [-pi, pi)."""
    wrapped = (theta + math.pi) % TWO_PI - math.pi
    # float modulo can land exactly on +pi for inputs just below -pi
    if wrapped >= math.pi:
        wrapped -= TWO_PI
    return wrapped


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Pose2:
    """SE(2) pose. ``theta`` is normalized into [-pi, pi) at construction."""

    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.theta)):
            raise GeometryError(f"non-finite pose {self.x, self.y, self.theta}")
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))

    @property
    def xy(self) -> Point:
        return (self.x, self.y)

    def apply(self, p: Point) -> Point:
        """Map a point from this pose's frame into the parent frame."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return (c * p[0] - s * p[1] + self.x, s * p[0] + c * p[1] + self.y)

    def inverse_apply(self, p: Point) -> Point:
        """Express a parent-frame point in this pose's frame."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        dx, dy = p[0] - self.x, p[1] - self.y
        return (c * dx + s * dy, -s * dx + c * dy)

    def compose(self, other: Pose2) -> Pose2:
        """Return ``self ∘ other``: first ``other``, then ``self``."""
        x, y = self.apply(other.xy)
        return Pose2(x, y, self.theta + other.theta)

    def translation_only(self) -> Pose2:
        return Pose2(self.x, self.y, 0.0)

    def distance(self, other: Pose2) -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


IDENTITY = Pose2(0.0, 0.0, 0.0)


def _cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class ConvexPolygon:
    """Strictly convex polygon with counter-clockwise vertices."""

    vertices: tuple[Point, ...]

    def __post_init__(self) -> None:
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        n = len(verts)
        if n < 3:
            raise GeometryError(f"polygon needs >= 3 vertices, got {n}")
        if len(set(verts)) != n:
            raise GeometryError("polygon has repeated vertices")
        for i in range(n):
            if _cross(verts[i], verts[(i + 1) % n], verts[(i + 2) % n]) <= 0.0:
                raise GeometryError("polygon is not strictly convex and counter-clockwise")

    @classmethod
    def hull(cls, points: Iterable[Point]) -> ConvexPolygon:
        """Convex hull (monotone chain), collinear points dropped."""
        return cls(convex_hull(points))

    @classmethod
    def rectangle(cls, xmin: float, ymin: float, xmax: float, ymax: float) -> ConvexPolygon:
        return cls(((xmin, ymin), (xmax, ymin), (xmax, ymax), (xmin, ymax)))

    @classmethod
    def regular(cls, n: int, circumradius: float, phase: float = 0.0) -> ConvexPolygon:
        return cls(
            tuple(
                (circumradius * math.cos(phase + TWO_PI * i / n), circumradius * math.sin(phase + TWO_PI * i / n))
                for i in range(n)
            )
        )

    @cached_property
    def bbox(self) -> tuple[float, float, float, float]:
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return (min(xs), min(ys), max(xs), max(ys))

    @cached_property
    def axes(self) -> tuple[Point, ...]:
        """Outward edge normals (unnormalized)."""
        v = self.vertices
        n = len(v)
        return tuple((v[(i + 1) % n][1] - v[i][1], v[i][0] - v[(i + 1) % n][0]) for i in range(n))

    @cached_property
    def area(self) -> float:
        return polygon_area(self.vertices)

    @cached_property
    def centroid(self) -> Point:
        v = self.vertices
        n = len(v)
        a = cx = cy = 0.0
        for i in range(n):
            x0, y0 = v[i]
            x1, y1 = v[(i + 1) % n]
            w = x0 * y1 - x1 * y0
            a += w
            cx += (x0 + x1) * w
            cy += (y0 + y1) * w
        a *= 0.5
        return (cx / (6.0 * a), cy / (6.0 * a))

    def contains_point(self, p: Point, eps: float = 0.0) -> bool:
        """Closed containment; ``eps`` > 0 widens the boundary slightly."""
        v = self.vertices
        n = len(v)
        for i in range(n):
            a, b = v[i], v[(i + 1) % n]
            edge_len = math.hypot(b[0] - a[0], b[1] - a[1])
            if _cross(a, b, p) < -eps * edge_len:
                return False
        return True

    def contains_polygon(self, other: ConvexPolygon, eps: float = 1e-12) -> bool:
        return all(self.contains_point(p, eps) for p in other.vertices)


def polygon_area(vertices: Sequence[Point]) -> float:
    n = len(vertices)
    s = 0.0
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def convex_hull(points: Iterable[Point]) -> tuple[Point, ...]:
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) < 3:
        raise GeometryError("hull of fewer than 3 distinct points")
    lower: list[Point] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0.0:
            lower.pop()
        lower.append(p)
    upper: list[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0.0:
            upper.pop()
        upper.append(p)
    hull = tuple(lower[:-1] + upper[:-1])
    if len(hull) < 3:
        raise GeometryError("degenerate (collinear) hull")
    return hull


def transform(poly: ConvexPolygon, pose: Pose2) -> ConvexPolygon:
    if pose.theta == 0.0:
        return ConvexPolygon(tuple((x + pose.x, y + pose.y) for x, y in poly.vertices))
    return ConvexPolygon(tuple(pose.apply(v) for v in poly.vertices))


def bbox_overlap(a: tuple[float, float, float, float], b: tuple[float, float, float, float]) -> bool:
    return not (a[2] < b[0] or b[2] < a[0] or a[3] < b[1] or b[3] < a[1])


def _project(vertices: tuple[Point, ...], axis: Point) -> tuple[float, float]:
    ax, ay = axis
    lo = hi = vertices[0][0] * ax + vertices[0][1] * ay
    for x, y in vertices[1:]:
        d = x * ax + y * ay
        if d < lo:
            lo = d
        elif d > hi:
            hi = d
    return lo, hi


def intersects(a: ConvexPolygon, b: ConvexPolygon) -> bool:
    """Closed-set intersection test; shared boundary counts as contact."""
    if not bbox_overlap(a.bbox, b.bbox):
        return False
    va, vb = a.vertices, b.vertices
    for axis in a.axes + b.axes:
        lo_a, hi_a = _project(va, axis)
        lo_b, hi_b = _project(vb, axis)
        if hi_a < lo_b or hi_b < lo_a:
            return False
    return True


def intersects_any(poly: ConvexPolygon, others: Iterable[ConvexPolygon]) -> bool:
    return any(intersects(poly, o) for o in others)


def sweep(footprint: ConvexPolygon, path: Sequence[Pose2]) -> list[ConvexPolygon]:
    """Per-segment convex hulls of the footprint placed at both segment ends.

    Exact for pure translations; an over-approximation otherwise only when the
    rotation stays small. A single-pose path yields the placed footprint.
    """
    if not path:
        raise GeometryError("sweep needs at least one pose")
    placed = [transform(footprint, p) for p in path]
    if len(placed) == 1:
        return placed
    out = []
    for p0, p1 in zip(placed, placed[1:]):
        if p0.vertices == p1.vertices:
            out.append(p0)
        else:
            out.append(ConvexPolygon.hull(p0.vertices + p1.vertices))
    return out


@dataclass(frozen=True)
class Corridor:
    """Straight strip of fixed width between two points."""

    start: Point
    end: Point
    width: float

    def __post_init__(self) -> None:
        if not self.width > 0.0:
            raise GeometryError(f"corridor width must be > 0, got {self.width}")
        if math.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1]) < 1e-9:
            raise GeometryError("degenerate corridor (start == end)")

    @property
    def length(self) -> float:
        return math.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1])


def corridor_polygon(c: Corridor) -> ConvexPolygon:
    (x0, y0), (x1, y1) = c.start, c.end
    length = c.length
    ux, uy = (x1 - x0) / length, (y1 - y0) / length
    hx, hy = -uy * c.width / 2.0, ux * c.width / 2.0
    return ConvexPolygon(((x0 - hx, y0 - hy), (x1 - hx, y1 - hy), (x1 + hx, y1 + hy), (x0 + hx, y0 + hy)))
