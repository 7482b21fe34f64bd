"""Polar cell decompositions around survey points.

From a vantage point, cast a ray through every vertex of the route
linework S (demonstration plus candidate). Along each ray, a blocking
wall is drawn through its vertex, spanning from the nearest linework
hit on the near side (or the vantage point) to the nearest hit on the
far side (or the box edge). Faces of the arrangement of S, the walls,
and the box boundary are the cells: crossing structure along sight
lines from the vantage point is uniform inside each cell.

Cells from several vantage points are overlaid by pairwise
intersection; connected components of the overlaps become the cells of
the combined decomposition.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Optional, Sequence

from shapely.geometry import LineString, MultiLineString
from shapely.ops import polygonize, unary_union

from .geometry import (
    EPS,
    EPS_AREA,
    BBox,
    Environment,
    GeometryError,
    Point2,
    PolyRegion,
    _seg_hit_params,
    dist,
    region_boolean,
)


class DegenerateSweep(GeometryError):
    """Vertex placement defeats the radial sweep (outside box, etc.)."""


class RayWall(NamedTuple):
    vertex: Point2
    angle: float
    near: Point2
    far: Point2


class Cell(NamedTuple):
    index: int
    region: PolyRegion
    rep: Point2


class CellDecomposition:
    def __init__(self, alpha: Point2, cells: Sequence[Cell],
                 walls: Sequence[RayWall], bbox: BBox):
        self.alpha = alpha
        self.cells = tuple(cells)
        self.walls = tuple(walls)
        self.bbox = bbox

    def cell_at(self, point) -> Optional[Cell]:
        best = None
        for c in self.cells:
            if c.region.interior_contains(point):
                return c
            if best is None and c.region.contains_point(point):
                best = c
        return best


def _ray_box_exit(px, py, dx, dy, bbox: BBox) -> float:
    best = math.inf
    if dx > 0:
        best = min(best, (bbox.xmax - px) / dx)
    elif dx < 0:
        best = min(best, (bbox.xmin - px) / dx)
    if dy > 0:
        best = min(best, (bbox.ymax - py) / dy)
    elif dy < 0:
        best = min(best, (bbox.ymin - py) / dy)
    return best


def _dedup_points(points) -> list[Point2]:
    out: list[Point2] = []
    for p in points:
        if not any(dist(p, q) <= EPS for q in out):
            out.append(Point2(float(p[0]), float(p[1])))
    return out


def _snap_to_box(p: Point2, bbox: BBox) -> Point2:
    x = bbox.xmin if abs(p.x - bbox.xmin) <= 1e-9 else (
        bbox.xmax if abs(p.x - bbox.xmax) <= 1e-9 else p.x)
    y = bbox.ymin if abs(p.y - bbox.ymin) <= 1e-9 else (
        bbox.ymax if abs(p.y - bbox.ymax) <= 1e-9 else p.y)
    return Point2(x, y)


def _box_ring_with_splits(bbox: BBox, splits) -> list[Point2]:
    corners = list(bbox.corners())
    edges = [
        (corners[0], corners[1], lambda p: p.x),
        (corners[1], corners[2], lambda p: p.y),
        (corners[2], corners[3], lambda p: -p.x),
        (corners[3], corners[0], lambda p: -p.y),
    ]
    ring: list[Point2] = []
    for a, b, key in edges:
        ring.append(a)
        on_edge = [p for p in splits
                   if dist(p, a) > EPS and dist(p, b) > EPS
                   and abs((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x))
                   <= 1e-9 * max(bbox.xmax - bbox.xmin, bbox.ymax - bbox.ymin)
                   and min(a.x, b.x) - 1e-9 <= p.x <= max(a.x, b.x) + 1e-9
                   and min(a.y, b.y) - 1e-9 <= p.y <= max(a.y, b.y) + 1e-9]
        for p in sorted(on_edge, key=key):
            if dist(ring[-1], p) > 0:
                ring.append(p)
    return ring


def polar_cell_decomposition(alpha, s_env: Environment, bbox: BBox) -> CellDecomposition:
    ax, ay = float(alpha[0]), float(alpha[1])
    a_pt = Point2(ax, ay)
    segs = s_env.segments()
    verts = _dedup_points(v for v in s_env.vertices() if dist(v, a_pt) > EPS)

    # exact-coordinate arrangement: every wall endpoint that lands on a
    # linework segment or the box ring is inserted there verbatim, so the
    # union nodes by shared coordinates instead of float-fragile proximity
    seg_splits: dict[int, list[Point2]] = {j: [] for j in range(len(segs))}
    box_splits: list[Point2] = []
    walls: list[RayWall] = []
    for v in verts:
        dx, dy = v.x - ax, v.y - ay
        d = math.hypot(dx, dy)
        ux, uy = dx / d, dy / d
        exit_param = _ray_box_exit(ax, ay, ux, uy, bbox)
        if exit_param < d - EPS:
            raise DegenerateSweep(f"linework vertex {v} outside the box")
        hits: list[tuple[float, int]] = []
        for j, s in enumerate(segs):
            for t in _seg_hit_params(ax, ay, ux, uy, s.a.x, s.a.y,
                                     s.b.x, s.b.y, EPS):
                if t > EPS:
                    hits.append((t, j))
        near_t, near_j = 0.0, None
        for t, j in hits:
            if t < d - 1e-9 and t > near_t:
                near_t, near_j = t, j
        far_t, far_j = exit_param, None
        for t, j in hits:
            if d + 1e-9 < t < far_t:
                far_t, far_j = t, j
        def snap_vertex(p: Point2) -> Point2:
            for q in verts:
                if dist(p, q) <= EPS:
                    return q
            return p

        near = a_pt if near_j is None else snap_vertex(
            Point2(ax + near_t * ux, ay + near_t * uy))
        far = snap_vertex(Point2(ax + far_t * ux, ay + far_t * uy))
        if far_j is None:
            far = _snap_to_box(far, bbox)
            box_splits.append(far)
        else:
            seg_splits[far_j].append(far)
        if near_j is not None:
            seg_splits[near_j].append(near)
        walls.append(RayWall(v, math.atan2(uy, ux), near, far))

    ring = _box_ring_with_splits(bbox, box_splits)
    lines = [LineString([tuple(p) for p in ring + [ring[0]]])]
    for j, s in enumerate(segs):
        ex, ey = s.b.x - s.a.x, s.b.y - s.a.y
        inner = sorted(seg_splits[j],
                       key=lambda p: (p.x - s.a.x) * ex + (p.y - s.a.y) * ey)
        pts = [s.a]
        for p in inner + [s.b]:
            if dist(pts[-1], p) > 0:
                pts.append(p)
        lines.append(LineString([tuple(p) for p in pts]))
    for w in walls:
        pts = [w.near]
        for p in (w.vertex, w.far):
            if dist(pts[-1], p) > 0:
                pts.append(p)
        if len(pts) > 1:
            lines.append(LineString([tuple(p) for p in pts]))
    merged = unary_union(MultiLineString([list(l.coords) for l in lines]))
    faces = [f for f in polygonize(merged) if f.area > EPS_AREA]

    def sort_key(poly):
        cx, cy = poly.centroid.x, poly.centroid.y
        ang = math.atan2(cy - ay, cx - ax) % (2 * math.pi)
        return (round(ang, 12), round(math.hypot(cx - ax, cy - ay), 12),
                round(cx, 12), round(cy, 12))

    faces.sort(key=sort_key)
    cells = []
    for i, f in enumerate(faces):
        reg = PolyRegion(f)
        cells.append(Cell(i, reg, reg.representative_point()))
    return CellDecomposition(a_pt, cells, walls, bbox)


class FullCell(NamedTuple):
    index: int
    region: PolyRegion
    parents: tuple[int, ...]
    rep: Point2


class FullDecomposition:
    def __init__(self, survey_points, pcds, cells, bbox):
        self.survey_points = tuple(survey_points)
        self.pcds = tuple(pcds)
        self.cells = tuple(cells)
        self.bbox = bbox

    def cell_at(self, point) -> Optional[FullCell]:
        best = None
        for c in self.cells:
            if c.region.interior_contains(point):
                return c
            if best is None and c.region.contains_point(point):
                best = c
        return best


def full_cell_decomposition(survey_points, s_env: Environment,
                            bbox: BBox) -> FullDecomposition:
    pts = [Point2(float(p[0]), float(p[1])) for p in survey_points]
    if not pts:
        raise DegenerateSweep("no survey points")
    pcds = [polar_cell_decomposition(p, s_env, bbox) for p in pts]
    pieces: list[tuple[PolyRegion, tuple[int, ...]]] = [
        (c.region, (c.index,)) for c in pcds[0].cells]
    for pcd in pcds[1:]:
        refined = []
        for reg, parents in pieces:
            for c in pcd.cells:
                inter = region_boolean(reg, c.region, "intersection")
                for part in inter.parts():
                    if part.area > EPS_AREA:
                        refined.append((part, parents + (c.index,)))
        pieces = refined
    pieces.sort(key=lambda rp: (rp[1], round(rp[0].centroid().x, 12),
                                round(rp[0].centroid().y, 12)))
    cells = [FullCell(i, reg, parents, reg.representative_point())
             for i, (reg, parents) in enumerate(pieces)]
    return FullDecomposition(pts, pcds, cells, bbox)


def filled_region(cells) -> PolyRegion:
    """Union of cell areas, treated as solid matter for route bounds."""
    out = PolyRegion.empty()
    for c in cells:
        out = region_boolean(out, c.region, "union")
    return out
