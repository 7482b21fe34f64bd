"""Independent reference computations used to pin expected values in tests.

Each oracle is written with a different approach than the library code it
checks (dense sampling, exhaustive enumeration, finite differences), so a bug
in one is unlikely to be mirrored by the other.
"""

from __future__ import annotations

import itertools
import math

EPS = 1e-12


def _cross(ox: float, oy: float, ax: float, ay: float, bx: float, by: float) -> float:
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def ray_first_hit(px: float, py: float, angle: float, segments, bbox) -> float:
    """Distance from (px, py) along `angle` to the first segment hit or bbox exit.

    The bounding box always terminates the ray, so a finite value is returned.
    """
    dx, dy = math.cos(angle), math.sin(angle)
    best = _ray_bbox_exit(px, py, dx, dy, bbox)
    for (ax, ay), (bx, by) in segments:
        t = _ray_segment_param(px, py, dx, dy, ax, ay, bx, by)
        if t is not None and 1e-12 < t < best:
            best = t
    return best


def _ray_bbox_exit(px, py, dx, dy, bbox) -> float:
    xmin, ymin, xmax, ymax = bbox
    best = math.inf
    if dx > EPS:
        best = min(best, (xmax - px) / dx)
    elif dx < -EPS:
        best = min(best, (xmin - px) / dx)
    if dy > EPS:
        best = min(best, (ymax - py) / dy)
    elif dy < -EPS:
        best = min(best, (ymin - py) / dy)
    return best


def _ray_segment_param(px, py, dx, dy, ax, ay, bx, by):
    """Smallest t >= 0 with (px,py) + t*(dx,dy) on segment ab, else None."""
    ex, ey = bx - ax, by - ay
    denom = dx * ey - dy * ex
    if abs(denom) < 1e-15:
        # Parallel: collinear overlap contributes its closer endpoint.
        if abs(_cross(px, py, px + dx, py + dy, ax, ay)) > 1e-12:
            return None
        ts = []
        for qx, qy in ((ax, ay), (bx, by)):
            t = (qx - px) * dx + (qy - py) * dy
            if t >= 0.0:
                ts.append(t)
        return min(ts) if ts else None
    t = ((ax - px) * ey - (ay - py) * ex) / denom
    u = ((ax - px) * dy - (ay - py) * dx) / denom
    if t >= 0.0 and -1e-12 <= u <= 1.0 + 1e-12:
        return t
    return None


def open_segment_hits(px, py, qx, qy, segments) -> bool:
    """True when the open segment pq touches any obstacle segment.

    Endpoint contact at p or q does not count; contact anywhere strictly
    between them (including at an obstacle endpoint) does.
    """
    length = math.hypot(qx - px, qy - py)
    if length < 1e-15:
        return False
    dx, dy = (qx - px) / length, (qy - py) / length
    for (ax, ay), (bx, by) in segments:
        t = _ray_segment_param(px, py, dx, dy, ax, ay, bx, by)
        if t is not None and 1e-9 < t < length - 1e-9:
            return True
    return False


def edge_crosses(ux, uy, vx, vy, segments) -> bool:
    """Transversal-crossing test for a path edge: grazing contact is allowed.

    An edge is blocked when it meets an obstacle segment strictly inside the
    edge, away from collinear overlap. Interior contact at an obstacle
    endpoint also blocks (the path should place a vertex there instead).
    """
    for (ax, ay), (bx, by) in segments:
        o1 = _cross(ux, uy, vx, vy, ax, ay)
        o2 = _cross(ux, uy, vx, vy, bx, by)
        scale = math.hypot(vx - ux, vy - uy)
        if scale < 1e-15:
            continue
        d1, d2 = o1 / scale, o2 / scale
        if abs(d1) <= 1e-9 and abs(d2) <= 1e-9:
            continue  # collinear overlap: the edge runs along the obstacle
        ex, ey = bx - ax, by - ay
        denom = (vx - ux) * ey - (vy - uy) * ex
        if abs(denom) < 1e-15:
            continue
        t = ((ax - ux) * ey - (ay - uy) * ex) / denom
        u = ((ax - ux) * (vy - uy) - (ay - uy) * (vx - ux)) / denom
        if 1e-9 < t < 1.0 - 1e-9 and -1e-9 <= u <= 1.0 + 1e-9:
            return True
    return False


def brute_force_shortest(start, goal, curves, max_inner=4):
    """Shortest path cost by enumerating ordered obstacle-vertex subsequences.

    Returns (cost, vertices) or (inf, None). Exact for paths needing at most
    `max_inner` intermediate vertices.
    """
    segments = polyline_segments(curves)
    verts = []
    for curve in curves:
        for p in curve:
            if p not in verts:
                verts.append(p)
    best_cost, best_path = math.inf, None
    for k in range(0, max_inner + 1):
        for combo in itertools.permutations(verts, k):
            path = [start, *combo, goal]
            ok = True
            cost = 0.0
            for (x1, y1), (x2, y2) in zip(path, path[1:]):
                if edge_crosses(x1, y1, x2, y2, segments):
                    ok = False
                    break
                cost += math.hypot(x2 - x1, y2 - y1)
            if ok and cost < best_cost - 1e-12:
                best_cost, best_path = cost, path
    return best_cost, best_path


def polyline_segments(curves):
    segs = []
    for curve in curves:
        for a, b in zip(curve, curve[1:]):
            segs.append((a, b))
    return segs


def swept_angle(path, anchor) -> float:
    """Total signed angle swept around `anchor` along the path."""
    ax, ay = anchor
    total = 0.0
    prev = math.atan2(path[0][1] - ay, path[0][0] - ax)
    for x, y in path[1:]:
        cur = math.atan2(y - ay, x - ax)
        d = cur - prev
        while d > math.pi:
            d -= 2 * math.pi
        while d < -math.pi:
            d += 2 * math.pi
        total += d
        prev = cur
    return total


def brute_force_class_paths(start, goal, curves, anchors, max_inner=4):
    """Per-homology-class shortest paths via exhaustive enumeration.

    Classes are keyed by the tuple of swept-angle multiples around each
    anchor; classes that wind a full turn around any anchor are dropped.
    Returns {key: (cost, path)}.
    """
    segments = polyline_segments(curves)
    verts = []
    for curve in curves:
        for p in curve:
            if p not in verts:
                verts.append(p)
    classes = {}
    for k in range(0, max_inner + 1):
        for combo in itertools.permutations(verts, k):
            path = [start, *combo, goal]
            ok = True
            cost = 0.0
            for (x1, y1), (x2, y2) in zip(path, path[1:]):
                if edge_crosses(x1, y1, x2, y2, segments):
                    ok = False
                    break
                cost += math.hypot(x2 - x1, y2 - y1)
            if not ok:
                continue
            key = []
            winds = False
            for anchor in anchors:
                sw = swept_angle(path, anchor)
                if abs(sw) >= 2 * math.pi - 1e-9:
                    winds = True
                    break
                base = swept_angle([start, goal], anchor)
                key.append(round((sw - base) / (2 * math.pi)))
            if winds:
                continue
            key = tuple(key)
            if key not in classes or cost < classes[key][0] - 1e-12:
                classes[key] = (cost, path)
    return classes


def grid_occlusion(region_pts, y_segments, p) -> tuple[int, int]:
    """(blocked, total) over sample points of a region versus blockers Y.

    `region_pts` are precomputed sample points inside the region X. A point q
    is blocked when the open segment pq meets Y.
    """
    px, py = p
    blocked = 0
    for qx, qy in region_pts:
        if open_segment_hits(px, py, qx, qy, y_segments):
            blocked += 1
    return blocked, len(region_pts)


def central_difference(f, x, delta):
    """Central finite-difference gradient of scalar f at vector x."""
    grad = []
    for j in range(len(x)):
        hi = list(x)
        lo = list(x)
        hi[j] += delta
        lo[j] -= delta
        grad.append((f(hi) - f(lo)) / (2 * delta))
    return grad


def exhaustive_mcr(n_cells, edge_violations, src, dst, n_samples):
    """Minimum-violation grid traversal by subset enumeration.

    edge_violations maps (cell, cell) -> frozenset of violated sample ids for
    the straight move between cell centers (symmetric keys present both ways).
    Returns (min_violations, min_length_at_that_count).
    """
    import heapq

    adj = {}
    for (a, b), viol in edge_violations.items():
        adj.setdefault(a, []).append((b, viol))

    def shortest_allowed(allowed):
        dist = {src: 0.0}
        heap = [(0.0, src)]
        while heap:
            d, c = heapq.heappop(heap)
            if c == dst:
                return d
            if d > dist.get(c, math.inf):
                continue
            for nb, viol in adj.get(c, []):
                if not viol <= allowed:
                    continue
                step = math.hypot(nb[0] - c[0], nb[1] - c[1])
                nd = d + step
                if nd < dist.get(nb, math.inf) - 1e-12:
                    dist[nb] = nd
                    heapq.heappush(heap, (nd, nb))
        return None

    for k in range(n_samples + 1):
        best = None
        for subset in itertools.combinations(range(n_samples), k):
            length = shortest_allowed(frozenset(subset))
            if length is not None and (best is None or length < best - 1e-12):
                best = length
        if best is not None:
            return k, best
    return None, None
