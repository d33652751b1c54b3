"""Cartesian primitives and draw operations shared by the GCL evaluator and
the interpretation layer."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

TOL_BRANCH = 1e-6  # decisions: degeneracy, branch discrimination
TOL_CHECK = 1e-9  # assertions


class GeometryError(Exception):
    pass


class DegenerateInput(GeometryError):
    pass


class NoIntersection(GeometryError):
    pass


class ConcentricCoincident(GeometryError):
    pass


@dataclass(frozen=True)
class GeoPoint:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise GeometryError(f"non-finite point ({self.x}, {self.y})")

    def __add__(self, o: "GeoPoint") -> "GeoPoint":
        return GeoPoint(self.x + o.x, self.y + o.y)

    def __sub__(self, o: "GeoPoint") -> "GeoPoint":
        return GeoPoint(self.x - o.x, self.y - o.y)

    def scale(self, k: float) -> "GeoPoint":
        return GeoPoint(self.x * k, self.y * k)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


def dist(p: GeoPoint, q: GeoPoint) -> float:
    return math.hypot(p.x - q.x, p.y - q.y)


def dot(u: GeoPoint, v: GeoPoint) -> float:
    return u.x * v.x + u.y * v.y


def cross(u: GeoPoint, v: GeoPoint) -> float:
    return u.x * v.y - u.y * v.x


def area2(a: GeoPoint, b: GeoPoint, c: GeoPoint) -> float:
    """Twice the signed area of triangle abc."""
    return cross(b - a, c - a)


def midpoint(p: GeoPoint, q: GeoPoint) -> GeoPoint:
    return GeoPoint((p.x + q.x) / 2, (p.y + q.y) / 2)


def towards(p: GeoPoint, q: GeoPoint, t: float) -> GeoPoint:
    return GeoPoint(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y))


def extend(a: GeoPoint, b: GeoPoint, d: float, tol: float = TOL_BRANCH) -> GeoPoint:
    """Point beyond b on ray a->b at distance d from b."""
    n = dist(a, b)
    if n <= tol:
        raise DegenerateInput("extend: coincident points")
    if d <= 0:
        raise DegenerateInput("extend: non-positive distance")
    return GeoPoint(b.x + d * (b.x - a.x) / n, b.y + d * (b.y - a.y) / n)


def circle_circle(c1: GeoPoint, t1: GeoPoint, c2: GeoPoint, t2: GeoPoint,
                  which: str = "first", tol: float = TOL_BRANCH) -> GeoPoint:
    """Intersection of the circle about c1 through t1 with the one about c2
    through t2.  ``first`` lies left of c1->c2 (positive cross product)."""
    if which not in ("first", "second"):
        raise ValueError(which)
    r1, r2 = dist(c1, t1), dist(c2, t2)
    d = dist(c1, c2)
    if d <= tol:
        if abs(r1 - r2) <= tol:
            raise ConcentricCoincident("circles coincide")
        raise NoIntersection("concentric circles")
    if d > r1 + r2 + tol or d < abs(r1 - r2) - tol:
        raise NoIntersection(f"circles do not meet (d={d:g}, r1={r1:g}, r2={r2:g})")
    a = (r1 * r1 - r2 * r2 + d * d) / (2 * d)
    h2 = r1 * r1 - a * a
    h = math.sqrt(h2) if h2 > 0 else 0.0
    ux, uy = (c2.x - c1.x) / d, (c2.y - c1.y) / d
    bx, by = c1.x + a * ux, c1.y + a * uy
    # (-uy, ux) is the left normal of c1->c2
    sign = 1.0 if which == "first" else -1.0
    return GeoPoint(bx - sign * h * uy, by + sign * h * ux)


def line_circle(p: GeoPoint, q: GeoPoint, c: GeoPoint, t: GeoPoint,
                which: str = "first", tol: float = TOL_BRANCH) -> GeoPoint:
    """Intersection of line pq with the circle about c through t; ``first`` is
    the one further along the direction p->q."""
    n = dist(p, q)
    if n <= tol:
        raise DegenerateInput("line through coincident points")
    ux, uy = (q.x - p.x) / n, (q.y - p.y) / n
    r = dist(c, t)
    # foot of the perpendicular from c
    s = (c.x - p.x) * ux + (c.y - p.y) * uy
    fx, fy = p.x + s * ux, p.y + s * uy
    h2 = r * r - ((c.x - fx) ** 2 + (c.y - fy) ** 2)
    if h2 < -tol * max(1.0, r):
        raise NoIntersection("line misses circle")
    h = math.sqrt(h2) if h2 > 0 else 0.0
    sign = 1.0 if which == "first" else -1.0
    return GeoPoint(fx + sign * h * ux, fy + sign * h * uy)


def line_line(p1: GeoPoint, q1: GeoPoint, p2: GeoPoint, q2: GeoPoint,
              tol: float = TOL_BRANCH) -> GeoPoint:
    d1, d2 = q1 - p1, q2 - p2
    den = cross(d1, d2)
    if abs(den) <= tol * d1.norm() * d2.norm():
        raise NoIntersection("parallel lines")
    t = cross(p2 - p1, d2) / den
    return GeoPoint(p1.x + t * d1.x, p1.y + t * d1.y)


# --- draw operations ------------------------------------------------------------

@dataclass(frozen=True)
class MarkPoint:
    point: GeoPoint
    label: str
    style: str  # "circled" | "plain-label"
    position: str = "r"  # label placement: r | t | b | none
    layer: int = 0
    role: str = "construction"


@dataclass(frozen=True)
class Segment:
    p: GeoPoint
    q: GeoPoint
    layer: int = 0
    role: str = "construction"
    infinite: bool = False  # drawn as a full line across the picture


@dataclass(frozen=True)
class Circle:
    center: GeoPoint
    through: GeoPoint
    layer: int = 0
    role: str = "construction"


@dataclass(frozen=True)
class RightAngleMark:
    vertex: GeoPoint
    toward_a: GeoPoint
    toward_b: GeoPoint
    layer: int = 0
    role: str = "construction"


@dataclass(frozen=True)
class Ticks:
    """``count`` arrow ticks at the middle of segment pq (parallel marks)."""
    p: GeoPoint
    q: GeoPoint
    count: int
    layer: int = 0
    role: str = "construction"


DrawOp = Union[MarkPoint, Segment, Circle, RightAngleMark, Ticks]


def op_points(op) -> list[GeoPoint]:
    """Points whose coordinates the op's extent depends on."""
    if isinstance(op, MarkPoint):
        return [op.point]
    if isinstance(op, Segment):
        return [] if op.infinite else [op.p, op.q]
    if isinstance(op, Circle):
        r = dist(op.center, op.through)
        c = op.center
        return [GeoPoint(c.x - r, c.y - r), GeoPoint(c.x + r, c.y + r)]
    if isinstance(op, RightAngleMark):
        return [op.vertex]
    if isinstance(op, Ticks):
        return [op.p, op.q]
    raise TypeError(op)
