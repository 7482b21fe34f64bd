"""Shortest paths and homology-aware path families over segment worlds.

Paths live in the closure of the free space: an edge may run along an
obstacle segment or end on an obstacle vertex, but may not cross a
segment transversally or pass over a vertex mid-edge.

Homology classes are tracked as net signed crossing counts of one
reference ray per tracked curve. Each ray points straight down from an
anchor just off the curve's middle segment; two paths with equal
endpoints are in the same class iff their count vectors agree.
"""

from __future__ import annotations

import heapq
import itertools
import math
from typing import Iterable, NamedTuple, Optional, Sequence

from shapely.geometry import LineString

from .geometry import (
    EPS,
    BBox,
    Environment,
    Point2,
    PolyRegion,
    angle_between,
    dist,
    path_edge_clear,
    region_boolean,
    visible_region,
)

COST_TIE = 1e-12
OVERLAP_ANGLE_TOL = 1e-7
OVERLAP_MIN_PREFIX = 1e-6
ANCHOR_OFFSET = 1e-9


class PlanResult(NamedTuple):
    cost: float
    path: tuple[Point2, ...]


class StepCheck(NamedTuple):
    """Replanning-point audit: inferred route vs detour classes."""

    index: int
    inferred: Optional[PlanResult]
    alternatives: dict[tuple[int, ...], PlanResult]
    worst_margin: float
    ok: bool


def path_length(path: Sequence) -> float:
    total = 0.0
    for a, b in zip(path, path[1:]):
        total += math.hypot(b[0] - a[0], b[1] - a[1])
    return total


def curve_anchor(curve: Sequence[Point2]) -> Point2:
    """Reference point for crossing counts, nudged off the curve.

    The nudge keeps ray-crossing parity well defined for routes that run
    along the host segment itself; it is far below every geometric
    tolerance used elsewhere, so no route can slip between anchor and
    curve.
    """
    mid_idx = (len(curve) - 2) // 2
    a, b = curve[mid_idx], curve[mid_idx + 1]
    mx, my = (a.x + b.x) / 2.0, (a.y + b.y) / 2.0
    dx, dy = b.x - a.x, b.y - a.y
    norm = math.hypot(dx, dy)
    return Point2(mx - ANCHOR_OFFSET * dy / norm, my + ANCHOR_OFFSET * dx / norm)


def environment_anchors(env: Environment) -> tuple[Point2, ...]:
    return tuple(curve_anchor(c) for c in env.curves)


def region_anchors(region: PolyRegion) -> tuple[Point2, ...]:
    return tuple(part.representative_point() for part in region.parts())


def crossing_delta(u, v, anchor) -> int:
    """Signed crossing of edge u->v with the downward ray from anchor.

    Points with x equal to the anchor's count as the left side, and a
    crossing registers only strictly below the anchor; together these
    make counts stable when a route vertex sits on the ray.
    """
    su = u[0] > anchor[0]
    sv = v[0] > anchor[0]
    if su == sv:
        return 0
    t = (anchor[0] - u[0]) / (v[0] - u[0])
    y = u[1] + t * (v[1] - u[1])
    if y >= anchor[1]:
        return 0
    return 1 if sv else -1


def path_signature(path: Sequence, anchors: Sequence) -> tuple[int, ...]:
    sig = [0] * len(anchors)
    for a, b in zip(path, path[1:]):
        for k, anchor in enumerate(anchors):
            sig[k] += crossing_delta(a, b, anchor)
    return tuple(sig)


def _lift(theta: float) -> float:
    # branch cut along the downward reference ray
    return theta + 2 * math.pi if theta < -math.pi / 2 else theta


def allowed_final_counts(start, goal, anchor) -> tuple[int, ...]:
    """Crossing counts reachable without a full turn around the anchor."""
    ts = _lift(math.atan2(start[1] - anchor[1], start[0] - anchor[0]))
    tg = _lift(math.atan2(goal[1] - anchor[1], goal[0] - anchor[0]))
    dp = tg - ts
    if abs(dp) <= 1e-12:
        return (0,)
    return (-1, 0) if dp > 0 else (0, 1)


def first_edge_matches(path: Sequence, direction, angle_tol: float = OVERLAP_ANGLE_TOL,
                       min_prefix: float = OVERLAP_MIN_PREFIX) -> bool:
    """Does the route leave its start along `direction`?"""
    if len(path) < 2:
        return False
    a, b = path[0], path[1]
    ex, ey = b[0] - a[0], b[1] - a[1]
    if math.hypot(ex, ey) < min_prefix:
        return False
    return angle_between((ex, ey), direction) <= angle_tol


def _dedup_nodes(points: Iterable) -> list[Point2]:
    out: list[Point2] = []
    for p in points:
        q = Point2(float(p[0]), float(p[1]))
        if not any(abs(q.x - r.x) <= EPS and abs(q.y - r.y) <= EPS for r in out):
            out.append(q)
    return out


def _env_nodes(start, goal, env: Environment, extra=()):
    return _dedup_nodes([start, goal, *env.vertices(), *extra])


def _clear_matrix(nodes, edge_clear):
    n = len(nodes)
    clear = [[False] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            ok = edge_clear(nodes[i], nodes[j])
            clear[i][j] = ok
            clear[j][i] = ok
    return clear


def _better(cost, path, current) -> bool:
    if current is None:
        return True
    bc, bp = current
    if cost < bc - COST_TIE:
        return True
    return cost <= bc + COST_TIE and path < bp


def _dijkstra(nodes, clear, s_idx: int, g_idx: int) -> Optional[PlanResult]:
    n = len(nodes)
    best = {s_idx: (0.0, (nodes[s_idx],))}
    heap = [(0.0, (nodes[s_idx],), s_idx)]
    while heap:
        c, path, u = heapq.heappop(heap)
        if best.get(u) != (c, path):
            continue
        for v in range(n):
            if v == u or not clear[u][v]:
                continue
            nc = c + dist(nodes[u], nodes[v])
            npath = path + (nodes[v],)
            if _better(nc, npath, best.get(v)):
                best[v] = (nc, npath)
                heapq.heappush(heap, (nc, npath, v))
    hit = best.get(g_idx)
    return None if hit is None else PlanResult(hit[0], hit[1])


def _lifted_dijkstra(nodes, clear, anchors, s_idx, g_idx, windows, slack):
    n = len(nodes)
    k = len(anchors)
    if k == 0:
        single = _dijkstra(nodes, clear, s_idx, g_idx)
        return {(): single} if single is not None else {}
    lo = [min(w) - slack for w in windows]
    hi = [max(w) + slack for w in windows]
    deltas: dict[tuple[int, int], tuple[int, ...]] = {}

    def delta(u: int, v: int) -> tuple[int, ...]:
        key = (u, v)
        got = deltas.get(key)
        if got is None:
            got = tuple(crossing_delta(nodes[u], nodes[v], a) for a in anchors)
            deltas[key] = got
            deltas[(v, u)] = tuple(-d for d in got)
        return got

    zero = (0,) * k
    best = {(s_idx, zero): (0.0, (nodes[s_idx],))}
    heap = [(0.0, (nodes[s_idx],), s_idx, zero)]
    while heap:
        c, path, u, nv = heapq.heappop(heap)
        if best.get((u, nv)) != (c, path):
            continue
        for v in range(n):
            if v == u or not clear[u][v]:
                continue
            dv = delta(u, v)
            nnv = tuple(a + b for a, b in zip(nv, dv))
            if any(x < lo[i] or x > hi[i] for i, x in enumerate(nnv)):
                continue
            nc = c + dist(nodes[u], nodes[v])
            npath = path + (nodes[v],)
            if _better(nc, npath, best.get((v, nnv))):
                best[(v, nnv)] = (nc, npath)
                heapq.heappush(heap, (nc, npath, v, nnv))
    out: dict[tuple[int, ...], PlanResult] = {}
    for combo in itertools.product(*windows):
        hit = best.get((g_idx, combo))
        if hit is not None:
            out[combo] = PlanResult(hit[0], hit[1])
    return out


def _auto_slack(k: int) -> int:
    # wide intermediate-count bounds are exact but cost 7^k states
    return 3 if k <= 2 else 1


def shortest_path(start, goal, env: Environment, extra_nodes=()) -> Optional[PlanResult]:
    nodes = _env_nodes(start, goal, env, extra_nodes)
    clear = _clear_matrix(nodes, lambda u, v: path_edge_clear(u, v, env))
    return _dijkstra(nodes, clear, 0, _goal_index(nodes, goal))


def class_shortest_paths(start, goal, env: Environment, anchors=None,
                         extra_nodes=(), slack=None):
    """Cheapest route per non-winding crossing-count class."""
    if anchors is None:
        anchors = environment_anchors(env)
    nodes = _env_nodes(start, goal, env, extra_nodes)
    clear = _clear_matrix(nodes, lambda u, v: path_edge_clear(u, v, env))
    windows = [allowed_final_counts(start, goal, a) for a in anchors]
    if slack is None:
        slack = _auto_slack(len(anchors))
    return _lifted_dijkstra(nodes, clear, anchors, 0, _goal_index(nodes, goal),
                            windows, slack)


def _goal_index(nodes, goal) -> int:
    for i, p in enumerate(nodes):
        if abs(p.x - goal[0]) <= EPS and abs(p.y - goal[1]) <= EPS:
            return i
    raise ValueError("goal node lost during dedup")


def _region_edge_clear_factory(region: PolyRegion):
    if region.is_empty():
        return lambda u, v: True
    shrunk = region.geom.buffer(-1e-9)

    def clear(u, v):
        if dist(u, v) <= EPS:
            return True
        return LineString([tuple(u), tuple(v)]).intersection(shrunk).length <= 1e-6

    return clear


def _region_nodes(start, goal, region: PolyRegion):
    return _dedup_nodes([start, goal, *region.boundary_vertices()])


def region_shortest_path(start, goal, region: PolyRegion) -> Optional[PlanResult]:
    """Shortest route treating a filled region as solid."""
    nodes = _region_nodes(start, goal, region)
    clear = _clear_matrix(nodes, _region_edge_clear_factory(region))
    return _dijkstra(nodes, clear, 0, _goal_index(nodes, goal))


def region_class_paths(start, goal, region: PolyRegion, anchors=None, slack=None):
    if anchors is None:
        anchors = region_anchors(region)
    nodes = _region_nodes(start, goal, region)
    clear = _clear_matrix(nodes, _region_edge_clear_factory(region))
    windows = [allowed_final_counts(start, goal, a) for a in anchors]
    if slack is None:
        slack = _auto_slack(len(anchors))
    return _lifted_dijkstra(nodes, clear, anchors, 0, _goal_index(nodes, goal),
                            windows, slack)


def split_by_overlap(classes: dict, direction):
    """Partition per-class routes into (inferred, alternatives).

    The inferred route is the cheapest one leaving along `direction`;
    every class that does not is an alternative. With no overlapping
    class there is no inferred route and every class is an alternative.
    """
    matching = {k: r for k, r in classes.items()
                if first_edge_matches(r.path, direction)}
    if not matching:
        return None, dict(classes)
    inferred = min(matching.values(), key=lambda r: (r.cost, r.path))
    alternatives = {k: r for k, r in classes.items() if k not in matching}
    return inferred, alternatives


def consistency_margins(env: Environment, demo: Sequence, bbox: BBox,
                        tol: float = 1e-9) -> list[StepCheck]:
    """Audit every replanning point of a route against a hypothesis world.

    At each route vertex the hypothesis is clipped to what has been seen
    from the vertices visited so far; the route's next leg must not be
    costlier than any non-overlapping detour class.
    """
    pts = [Point2(float(p[0]), float(p[1])) for p in demo]
    goal = pts[-1]
    checks: list[StepCheck] = []
    seen: Optional[PolyRegion] = None
    for i in range(len(pts) - 1):
        vis = visible_region(pts[i], env, bbox)
        seen = vis if seen is None else region_boolean(seen, vis, "union")
        known = env.clipped(seen)
        direction = (pts[i + 1].x - pts[i].x, pts[i + 1].y - pts[i].y)
        classes = class_shortest_paths(pts[i], goal, known)
        inferred, alts = split_by_overlap(classes, direction)
        if inferred is None:
            checks.append(StepCheck(i, None, alts, -math.inf, False))
            continue
        worst = math.inf
        for r in alts.values():
            worst = min(worst, r.cost - inferred.cost)
        checks.append(StepCheck(i, inferred, alts, worst, worst >= -tol))
    return checks


def is_consistent(env: Environment, demo: Sequence, bbox: BBox,
                  tol: float = 1e-9) -> bool:
    return all(c.ok for c in consistency_margins(env, demo, bbox, tol))
