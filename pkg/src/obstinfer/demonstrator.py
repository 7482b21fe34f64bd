"""Demonstration routes driven by progressively revealed obstacles.

The traveler starts knowing nothing, sees whatever is unobstructed from
its current position, replans a shortest route against the obstacles
seen so far at every route vertex, and walks the first leg of each
plan. Route bends therefore land on obstacle vertices (or on the
frontier tip of a partially seen segment, which world sampling rejects).
"""

from __future__ import annotations

import math
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .geometry import (
    EPS,
    BBox,
    Environment,
    Point2,
    PolyRegion,
    dist,
    path_edge_clear,
    region_boolean,
    visible_region,
)
from .planner import shortest_path


class SimulationError(RuntimeError):
    pass


class Demonstration(NamedTuple):
    vertices: tuple[Point2, ...]

    @property
    def start(self) -> Point2:
        return self.vertices[0]

    @property
    def goal(self) -> Point2:
        return self.vertices[-1]

    @property
    def bends(self) -> tuple[Point2, ...]:
        return self.vertices[1:-1]

    def length(self) -> float:
        return sum(dist(a, b) for a, b in zip(self.vertices, self.vertices[1:]))


def survey_schedule(demo: Demonstration) -> tuple[Point2, ...]:
    """Vantage points available to the identification stage.

    Looking around is pointless once no bend remains to explain, so the
    final two route vertices are dropped.
    """
    return demo.vertices[:-2]


def simulate_demonstration(env: Environment, start, goal, bbox: BBox,
                           max_steps: int = 200) -> Demonstration:
    pos = Point2(float(start[0]), float(start[1]))
    target = Point2(float(goal[0]), float(goal[1]))
    seen: Optional[PolyRegion] = None
    verts = [pos]
    for _ in range(max_steps):
        if dist(pos, target) <= EPS:
            break
        vis = visible_region(pos, env, bbox)
        seen = vis if seen is None else region_boolean(seen, vis, "union")
        known = env.clipped(seen)
        plan = shortest_path(pos, target, known)
        if plan is None or len(plan.path) < 2:
            raise SimulationError("no route to the goal")
        nxt = plan.path[1]
        if not path_edge_clear(pos, nxt, env):
            raise SimulationError("planned leg crosses an unseen obstacle")
        pos = nxt
        verts.append(pos)
    else:
        raise SimulationError("step budget exhausted before reaching the goal")
    return Demonstration(tuple(verts))


def _wall_candidates(rng: np.random.Generator, bbox: BBox, n: int,
                     inset: float = 1.2):
    walls = []
    for _ in range(n):
        cx = rng.uniform(bbox.xmin + 2 * inset, bbox.xmax - 2 * inset)
        cy = rng.uniform(bbox.ymin + inset, bbox.ymax - inset)
        half = rng.uniform(0.6, 1.8)
        ang = rng.uniform(0.0, math.pi)
        dx, dy = half * math.cos(ang), half * math.sin(ang)
        walls.append(((cx - dx, cy - dy), (cx + dx, cy + dy)))
    return walls


def _seg_dist(a, b, c, d) -> float:
    from shapely.geometry import LineString

    return LineString([a, b]).distance(LineString([c, d]))


def _point_wall_dist(p, wall) -> float:
    from shapely.geometry import LineString, Point

    return LineString(list(wall)).distance(Point(p))


def random_world(rng: np.random.Generator, bbox: BBox, start, goal,
                 n_walls: int, max_tries: int = 50) -> Environment:
    """Mutually separated walls keeping clear of the endpoints."""
    for _ in range(max_tries):
        walls = _wall_candidates(rng, bbox, n_walls)
        ok = True
        for i in range(len(walls)):
            if _point_wall_dist(start, walls[i]) < 0.6:
                ok = False
            if _point_wall_dist(goal, walls[i]) < 0.6:
                ok = False
            for j in range(i + 1, len(walls)):
                if _seg_dist(*walls[i], *walls[j]) < 0.35:
                    ok = False
        if not ok:
            continue
        env = Environment([list(w) for w in walls])
        if env.assumption_violations():
            continue
        return env
    raise SimulationError("could not place walls")


def _touched_curves(env: Environment, demo: Demonstration):
    inner = demo.vertices[1:-1]
    kept = []
    for curve in env.curves:
        ends = (curve[0], curve[-1])
        if any(dist(e, v) <= EPS for e in ends for v in inner):
            kept.append([tuple(p) for p in curve])
    return kept


def _bends_on_true_vertices(env: Environment, demo: Demonstration) -> bool:
    verts = env.vertices()
    return all(any(dist(b, v) <= EPS for v in verts) for b in demo.bends)


def sample_world_with_demo(rng: np.random.Generator, bbox: BBox, start, goal,
                           n_walls=(1, 3), require_bend: bool = True,
                           max_tries: int = 300):
    """Draw (world, demonstration) pairs fit for identification.

    Every surviving curve contributes an endpoint to some interior route
    vertex, and every bend sits on a true obstacle vertex.
    """
    lo, hi = n_walls
    for _ in range(max_tries):
        try:
            env = random_world(rng, bbox, start, goal, int(rng.integers(lo, hi + 1)))
            demo = simulate_demonstration(env, start, goal, bbox)
        except SimulationError:
            continue
        stable = False
        for _ in range(4):
            kept = _touched_curves(env, demo)
            if len(kept) == len(env.curves):
                stable = True
                break
            if not kept:
                break
            try:
                env = Environment(kept)
                demo = simulate_demonstration(env, start, goal, bbox)
            except SimulationError:
                break
        if not stable or env.is_empty():
            continue
        if require_bend and len(demo.bends) == 0:
            continue
        if not _bends_on_true_vertices(env, demo):
            continue
        if env.assumption_violations():
            continue
        return env, demo
    raise SimulationError("no admissible world found")
