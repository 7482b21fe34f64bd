"""Planar geometry primitives: points, segments, obstacle curves, regions.

Conventions used throughout the package:
  * coordinates are desk scale, roughly O(1..10); tolerances are absolute
  * an obstacle environment is a set of open polylines (curves) that do not
    intersect each other or themselves
  * sight between p and q is blocked when the open segment pq (endpoints
    excluded) touches any obstacle segment; a point lying on an obstacle is
    therefore visible from elsewhere
  * robot paths live in the closure of the safe set: they may touch or run
    along obstacle segments but never cross them transversally
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import shapely
from shapely.geometry import (
    GeometryCollection,
    LineString,
    MultiLineString,
    MultiPoint,
    MultiPolygon,
    Point,
    Polygon,
    box,
)
from shapely.geometry.polygon import orient
from shapely.ops import linemerge, unary_union

EPS = 1e-9  # absolute geometric tolerance
EPS_AREA = 1e-9  # region areas below this count as empty
SNAP_GRID = 1e-12  # snap-rounding grid for boolean results


class GeometryError(ValueError):
    """Raised for inputs that violate the geometric contracts."""


class Point2(NamedTuple):
    x: float
    y: float


class Segment(NamedTuple):
    a: Point2
    b: Point2

    @property
    def length(self) -> float:
        return dist(self.a, self.b)


class BBox(NamedTuple):
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    @property
    def diagonal(self) -> float:
        return math.hypot(self.xmax - self.xmin, self.ymax - self.ymin)

    def contains(self, p: Point2, slack: float = EPS) -> bool:
        return (self.xmin - slack <= p[0] <= self.xmax + slack
                and self.ymin - slack <= p[1] <= self.ymax + slack)

    def as_polygon(self) -> Polygon:
        return box(self.xmin, self.ymin, self.xmax, self.ymax)

    def corners(self) -> tuple[Point2, ...]:
        return (Point2(self.xmin, self.ymin), Point2(self.xmax, self.ymin),
                Point2(self.xmax, self.ymax), Point2(self.xmin, self.ymax))


def dist(p: Sequence[float], q: Sequence[float]) -> float:
    return math.hypot(q[0] - p[0], q[1] - p[1])


def sub(p: Sequence[float], q: Sequence[float]) -> Point2:
    return Point2(p[0] - q[0], p[1] - q[1])


def cross(o: Sequence[float], a: Sequence[float], b: Sequence[float]) -> float:
    """Signed twice-area of triangle (o, a, b)."""
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def collinear(a: Sequence[float], b: Sequence[float], c: Sequence[float],
              eps: float = EPS) -> bool:
    """True when c lies within eps of the infinite line through a, b."""
    d = dist(a, b)
    if d < eps:
        return dist(a, c) < eps or dist(b, c) < eps
    return abs(cross(a, b, c)) / d <= eps


def points_equal(p: Sequence[float], q: Sequence[float], eps: float = EPS) -> bool:
    return dist(p, q) <= eps


def angle_of(p: Sequence[float], origin: Sequence[float]) -> float:
    return math.atan2(p[1] - origin[1], p[0] - origin[0])


def angle_between(u: Sequence[float], v: Sequence[float]) -> float:
    """Unsigned angle between direction vectors u and v, in radians."""
    nu = math.hypot(u[0], u[1])
    nv = math.hypot(v[0], v[1])
    if nu < EPS or nv < EPS:
        return 0.0
    c = (u[0] * v[0] + u[1] * v[1]) / (nu * nv)
    c = max(-1.0, min(1.0, c))
    return math.acos(c)


# ---------------------------------------------------------------------------
# segment intersection


def segment_intersection(s1: Segment, s2: Segment, eps: float = EPS):
    """Classify the intersection of two closed segments.

    Returns one of:
      ("none", None)
      ("point", Point2)
      ("overlap", Segment)   collinear overlap of positive length
    """
    (p, q), (c, d) = s1, s2
    r = sub(q, p)
    s = sub(d, c)
    denom = r[0] * s[1] - r[1] * s[0]
    lr = math.hypot(*r)
    ls = math.hypot(*s)
    if lr < eps or ls < eps:
        raise GeometryError("degenerate segment")
    if abs(denom) <= eps * lr * ls:
        # parallel: either disjoint or collinear
        if abs(cross(p, q, c)) / lr > eps:
            return ("none", None)
        t0 = ((c[0] - p[0]) * r[0] + (c[1] - p[1]) * r[1]) / (lr * lr)
        t1 = ((d[0] - p[0]) * r[0] + (d[1] - p[1]) * r[1]) / (lr * lr)
        lo, hi = min(t0, t1), max(t0, t1)
        lo = max(lo, 0.0)
        hi = min(hi, 1.0)
        if hi - lo < -eps / lr:
            return ("none", None)
        a = Point2(p[0] + lo * r[0], p[1] + lo * r[1])
        b = Point2(p[0] + hi * r[0], p[1] + hi * r[1])
        if dist(a, b) <= eps:
            return ("point", a)
        return ("overlap", Segment(a, b))
    t = ((c[0] - p[0]) * s[1] - (c[1] - p[1]) * s[0]) / denom
    u = ((c[0] - p[0]) * r[1] - (c[1] - p[1]) * r[0]) / denom
    et = eps / lr
    eu = eps / ls
    if -et <= t <= 1.0 + et and -eu <= u <= 1.0 + eu:
        return ("point", Point2(p[0] + t * r[0], p[1] + t * r[1]))
    return ("none", None)


def _seg_hit_params(px, py, dx, dy, ax, ay, bx, by, eps=EPS):
    """Ray/segment hit distances along unit direction (dx, dy) from (px, py).

    Collinear overlaps contribute both endpoint parameters. Returns a list of
    t >= -eps values.
    """
    ex, ey = bx - ax, by - ay
    denom = dx * ey - dy * ex
    ls = math.hypot(ex, ey)
    out = []
    if abs(denom) <= 1e-14 * ls:
        # parallel
        if abs((ax - px) * dy - (ay - py) * dx) > eps:
            return out
        for qx, qy in ((ax, ay), (bx, by)):
            out.append((qx - px) * dx + (qy - py) * dy)
        return out
    t = ((ax - px) * ey - (ay - py) * ex) / denom
    u = ((ax - px) * dy - (ay - py) * dx) / denom
    if -eps / ls <= u <= 1.0 + eps / ls:
        out.append(t)
    return out


# ---------------------------------------------------------------------------
# obstacle environments


class Environment:
    """A set of non-intersecting open polyline obstacle curves."""

    __slots__ = ("curves", "_segments")

    def __init__(self, curves: Iterable[Sequence[Sequence[float]]]):
        cleaned = []
        for curve in curves:
            pts = tuple(Point2(float(p[0]), float(p[1])) for p in curve)
            if len(pts) < 2:
                raise GeometryError("obstacle curve needs at least 2 vertices")
            for a, b in zip(pts, pts[1:]):
                if dist(a, b) <= EPS:
                    raise GeometryError("zero-length obstacle segment")
            cleaned.append(pts)
        self.curves: tuple[tuple[Point2, ...], ...] = tuple(cleaned)
        self._segments: list[Segment] | None = None

    def __len__(self) -> int:
        return len(self.curves)

    def __eq__(self, other) -> bool:
        return isinstance(other, Environment) and self.curves == other.curves

    def __hash__(self) -> int:
        return hash(self.curves)

    def segments(self) -> list[Segment]:
        if self._segments is None:
            self._segments = [Segment(a, b)
                              for curve in self.curves
                              for a, b in zip(curve, curve[1:])]
        return self._segments

    def vertices(self) -> list[Point2]:
        out: list[Point2] = []
        for curve in self.curves:
            out.extend(curve)
        return out

    def endpoints(self) -> list[Point2]:
        """First and last vertex of each curve."""
        out = []
        for curve in self.curves:
            out.append(curve[0])
            out.append(curve[-1])
        return out

    def is_empty(self) -> bool:
        return not self.curves

    def total_length(self) -> float:
        return sum(s.length for s in self.segments())

    def assumption_violations(self) -> list[str]:
        """Check that curves do not intersect themselves or each other."""
        problems = []
        segs = []
        for ci, curve in enumerate(self.curves):
            for si, (a, b) in enumerate(zip(curve, curve[1:])):
                segs.append((ci, si, Segment(a, b)))
        for i in range(len(segs)):
            ci, si, s1 = segs[i]
            for j in range(i + 1, len(segs)):
                cj, sj, s2 = segs[j]
                kind, val = segment_intersection(s1, s2)
                if kind == "none":
                    continue
                if ci == cj and abs(si - sj) == 1:
                    # consecutive segments of one curve share one vertex
                    if kind == "point" and points_equal(val, s1.b):
                        continue
                    problems.append(f"curve {ci} bends onto itself near segment {si}")
                else:
                    problems.append(
                        f"curves {ci}/{cj} intersect at segments {si}/{sj}")
        return problems

    def clipped(self, region: "PolyRegion") -> "Environment":
        """The portion of the curves lying inside a region (known-part extraction)."""
        if region.is_empty():
            return Environment([])
        area = region.geom.buffer(EPS)
        pieces = []
        for curve in self.curves:
            inter = LineString(curve).intersection(area)
            pieces.extend(_as_polylines(inter))
        return Environment([p for p in pieces if len(p) >= 2])


def _as_polylines(geom) -> list[list[Point2]]:
    if geom.is_empty:
        return []
    if isinstance(geom, LineString):
        return [[Point2(x, y) for x, y in geom.coords]]
    if isinstance(geom, (MultiLineString, GeometryCollection)):
        merged = linemerge([g for g in geom.geoms if isinstance(g, LineString)])
        if isinstance(merged, LineString):
            return [[Point2(x, y) for x, y in merged.coords]]
        return [[Point2(x, y) for x, y in g.coords] for g in merged.geoms]
    return []


# ---------------------------------------------------------------------------
# regions


class PolyRegion:
    """A closed polygonal region (possibly several disjoint parts).

    Thin wrapper over a shapely polygonal geometry with the normalizations
    the rest of the package relies on: polygon-only content, counterclockwise
    shells, clockwise holes.
    """

    __slots__ = ("geom",)

    def __init__(self, geom):
        self.geom = _normalize_region(geom)

    @staticmethod
    def empty() -> "PolyRegion":
        return PolyRegion(Polygon())

    @staticmethod
    def from_bbox(bbox: BBox) -> "PolyRegion":
        return PolyRegion(bbox.as_polygon())

    @staticmethod
    def from_points(pts: Sequence[Sequence[float]]) -> "PolyRegion":
        return PolyRegion(Polygon([(p[0], p[1]) for p in pts]))

    @property
    def area(self) -> float:
        return self.geom.area

    def is_empty(self) -> bool:
        return self.geom.is_empty or self.geom.area <= EPS_AREA

    def contains_point(self, p: Sequence[float], slack: float = EPS) -> bool:
        return self.geom.distance(Point(p[0], p[1])) <= slack

    def interior_contains(self, p: Sequence[float]) -> bool:
        return self.geom.contains(Point(p[0], p[1]))

    def boundary_distance(self, p: Sequence[float]) -> float:
        return self.geom.boundary.distance(Point(p[0], p[1]))

    def on_boundary(self, p: Sequence[float], slack: float = EPS) -> bool:
        return self.boundary_distance(p) <= slack

    def centroid(self) -> Point2:
        c = self.geom.centroid
        return Point2(c.x, c.y)

    def representative_point(self) -> Point2:
        p = self.geom.representative_point()
        return Point2(p.x, p.y)

    def parts(self) -> list["PolyRegion"]:
        if isinstance(self.geom, Polygon):
            return [self] if not self.geom.is_empty else []
        return [PolyRegion(g) for g in self.geom.geoms if g.area > EPS_AREA]

    def boundary_loops(self) -> list[list[Point2]]:
        loops = []
        polys = [self.geom] if isinstance(self.geom, Polygon) else list(self.geom.geoms)
        for poly in polys:
            if poly.is_empty:
                continue
            loops.append([Point2(x, y) for x, y in poly.exterior.coords])
            for ring in poly.interiors:
                loops.append([Point2(x, y) for x, y in ring.coords])
        return loops

    def boundary_segments(self) -> list[Segment]:
        segs = []
        for loop in self.boundary_loops():
            for a, b in zip(loop, loop[1:]):
                if dist(a, b) > EPS:
                    segs.append(Segment(a, b))
        return segs

    def boundary_vertices(self) -> list[Point2]:
        out = []
        for loop in self.boundary_loops():
            out.extend(loop[:-1])
        return out

    def sample_point(self, rng) -> Point2:
        """Uniform rejection sample from the region interior."""
        xmin, ymin, xmax, ymax = self.geom.bounds
        for _ in range(10000):
            p = Point2(rng.uniform(xmin, xmax), rng.uniform(ymin, ymax))
            if self.geom.contains(Point(p)):
                return p
        return self.representative_point()


def _normalize_region(geom) -> Polygon | MultiPolygon:
    if geom is None or geom.is_empty:
        return Polygon()
    polys = []
    if isinstance(geom, Polygon):
        polys = [geom]
    elif isinstance(geom, MultiPolygon):
        polys = list(geom.geoms)
    elif isinstance(geom, GeometryCollection):
        polys = [g for g in geom.geoms if isinstance(g, (Polygon, MultiPolygon))]
        flat = []
        for g in polys:
            flat.extend(g.geoms if isinstance(g, MultiPolygon) else [g])
        polys = flat
    else:
        return Polygon()
    polys = [orient(p, sign=1.0) for p in polys if not p.is_empty and p.area > 0.0]
    if not polys:
        return Polygon()
    if len(polys) == 1:
        return polys[0]
    return MultiPolygon(polys)


def region_boolean(a: PolyRegion, b: PolyRegion, op: str) -> PolyRegion:
    """Boolean combination of regions with snap-rounded output."""
    if op == "union":
        out = a.geom.union(b.geom)
    elif op == "intersection":
        out = a.geom.intersection(b.geom)
    elif op == "difference":
        out = a.geom.difference(b.geom)
    else:
        raise ValueError(f"unknown region op: {op}")
    out = shapely.set_precision(out, SNAP_GRID)
    return PolyRegion(out)


# ---------------------------------------------------------------------------
# visibility


def is_visible(p: Sequence[float], q: Sequence[float], env: Environment) -> bool:
    """Sight predicate: the open segment pq misses every obstacle segment.

    q may lie on an obstacle; p is assumed not to lie strictly inside an
    obstacle segment.
    """
    px, py = p[0], p[1]
    qx, qy = q[0], q[1]
    length = math.hypot(qx - px, qy - py)
    if length <= EPS:
        return True
    dx, dy = (qx - px) / length, (qy - py) / length
    for (a, b) in env.segments():
        for t in _seg_hit_params(px, py, dx, dy, a[0], a[1], b[0], b[1]):
            if EPS < t < length - EPS:
                return False
    return True


def visible_region(p: Sequence[float], env: Environment, bbox: BBox) -> PolyRegion:
    """The star-shaped set of bbox points visible from p.

    Built exactly as the bbox minus the union of per-segment shadow wedges.
    Segments seen edge-on or incident at p occlude only a zero-area ray and
    contribute no shadow.
    """
    shadows = []
    reach = 3.0 * bbox.diagonal + 1.0
    for seg in env.segments():
        quad = _shadow_quad(seg, p, reach)
        if quad is not None:
            shadows.append(quad)
    base = bbox.as_polygon()
    if not shadows:
        return PolyRegion(base)
    blocked = unary_union(shadows)
    return PolyRegion(shapely.set_precision(base.difference(blocked), SNAP_GRID))


def _shadow_quad(seg: Segment, p: Sequence[float], reach: float):
    a, b = seg
    da = dist(p, a)
    db = dist(p, b)
    if da <= EPS or db <= EPS:
        return None  # segment incident at the viewpoint
    if abs(cross(p, a, b)) / max(dist(a, b), EPS) <= EPS:
        return None  # edge-on: shadow has zero area
    ax = a[0] + (a[0] - p[0]) / da * reach
    ay = a[1] + (a[1] - p[1]) / da * reach
    bx = b[0] + (b[0] - p[0]) / db * reach
    by = b[1] + (b[1] - p[1]) / db * reach
    quad = Polygon([(a[0], a[1]), (b[0], b[1]), (bx, by), (ax, ay)])
    if not quad.is_valid:
        quad = quad.buffer(0)
    return quad


def shadow_region(blocker, p: Sequence[float], bbox: BBox) -> PolyRegion:
    """Points of the bbox whose open sightline to p meets the blocker.

    The blocker may be an Environment (curves) or a PolyRegion (filled).
    """
    segs = _blocker_segments(blocker)
    reach = 3.0 * bbox.diagonal + 1.0
    quads = []
    for seg in segs:
        quad = _shadow_quad(seg, p, reach)
        if quad is not None:
            quads.append(quad)
    if not quads:
        return PolyRegion.empty()
    shadow = unary_union(quads).intersection(bbox.as_polygon())
    return PolyRegion(shapely.set_precision(shadow, SNAP_GRID))


def _blocker_segments(blocker) -> list[Segment]:
    if isinstance(blocker, Environment):
        return blocker.segments()
    if isinstance(blocker, PolyRegion):
        return blocker.boundary_segments()
    raise TypeError("blocker must be Environment or PolyRegion")


def _blocker_interior_overlap(X: PolyRegion, blocker) -> bool:
    """Does the blocker have material strictly inside X?"""
    if isinstance(blocker, PolyRegion):
        return X.geom.intersection(blocker.geom).area > EPS_AREA
    for seg in blocker.segments():
        line = LineString([seg.a, seg.b])
        inside = line.intersection(X.geom)
        if inside.is_empty:
            continue
        on_boundary = line.intersection(X.geom.boundary)
        if inside.length - on_boundary.length > 1e-7:
            return True
    return False


def fully_occluded(X: PolyRegion, blocker, p: Sequence[float], bbox: BBox) -> bool:
    """Every point of X is hidden from p by the blocker, which is disjoint from X.

    Disjointness and coverage are both taken up to sliver tolerance, so cells
    that merely share a boundary with the blocker still qualify.
    """
    if X.is_empty():
        return False
    if _blocker_interior_overlap(X, blocker):
        return False
    shadow = shadow_region(blocker, p, bbox)
    visible_left = X.geom.difference(shadow.geom).area
    return visible_left <= max(EPS_AREA, 1e-9 * X.area) * 10.0


def partially_occluded(X: PolyRegion, blocker, p: Sequence[float], bbox: BBox) -> bool:
    """Some positive-area part of X is hidden from p by the blocker."""
    if X.is_empty():
        return False
    shadow = shadow_region(blocker, p, bbox)
    if shadow.is_empty():
        return False
    return X.geom.intersection(shadow.geom).area > max(EPS_AREA, 1e-9 * X.area) * 10.0


# ---------------------------------------------------------------------------
# path-edge admissibility (closure semantics)


def path_edge_clear(u: Sequence[float], v: Sequence[float], env: Environment) -> bool:
    """True when segment uv may appear in a robot path.

    Grazing contact (touching an obstacle at the edge's own endpoints, or
    running collinearly along an obstacle segment) is allowed; transversal
    crossings, and interior contact with an obstacle vertex, are not.
    """
    ux, uy = u[0], u[1]
    vx, vy = v[0], v[1]
    length = math.hypot(vx - ux, vy - uy)
    if length <= EPS:
        return True
    dx, dy = (vx - ux) / length, (vy - uy) / length
    for (a, b) in env.segments():
        # collinear overlap is running along the obstacle: allowed
        d1 = abs((a[0] - ux) * dy - (a[1] - uy) * dx)
        d2 = abs((b[0] - ux) * dy - (b[1] - uy) * dx)
        if d1 <= EPS and d2 <= EPS:
            continue
        for t in _seg_hit_params(ux, uy, dx, dy, a[0], a[1], b[0], b[1]):
            if EPS < t < length - EPS:
                return False
    return True


def perturb_collinear(points: list[Point2], eps_check: float = EPS,
                      magnitude: float = 1e-7, rng=None) -> tuple[list[Point2], int]:
    """Nudge points so that no three are collinear.

    Returns the adjusted list and the number of points moved. Displacements
    are at most `magnitude`.
    """
    import numpy as np

    if rng is None:
        rng = np.random.default_rng(0)
    pts = list(points)
    moved = 0
    for _ in range(50):
        bad = None
        n = len(pts)
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    if (dist(pts[i], pts[j]) > eps_check
                            and collinear(pts[i], pts[j], pts[k], eps_check)
                            and dist(pts[i], pts[k]) > eps_check
                            and dist(pts[j], pts[k]) > eps_check):
                        bad = k
                        break
                if bad is not None:
                    break
            if bad is not None:
                break
        if bad is None:
            return pts, moved
        ang = rng.uniform(0.0, 2.0 * math.pi)
        pts[bad] = Point2(pts[bad].x + magnitude * math.cos(ang),
                          pts[bad].y + magnitude * math.sin(ang))
        moved += 1
    return pts, moved
