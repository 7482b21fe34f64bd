"""Identification of hidden-matter cell sets that explain route bends.

A bend is explained by filled cells whose removal would have made the
bent route suboptimal: the cheapest detour that avoids the fill and
does not leave along the observed leg must cost at least the bent
continuation. Only cells in the pocket enclosed between demonstration
and candidate are considered, and a candidate fill must be connected
without crossing the route linework, so every surviving fill describes
matter that spares the candidate. No surviving fill for some bend
means every explanation of that bend strikes the candidate.
"""

from __future__ import annotations

import math
from collections import deque
from typing import NamedTuple, Optional, Sequence

from shapely.geometry import MultiLineString, LineString
from shapely.ops import polygonize, unary_union

from .geometry import (
    BBox,
    Environment,
    Point2,
    PolyRegion,
    dist,
    region_boolean,
)
from .cells import FullDecomposition, filled_region, full_cell_decomposition
from .cellgraph import SurveyCellGraph
from .planner import region_class_paths, split_by_overlap

POCKET_EDGE_MIN = 1e-7
INTEREST_AREA_MIN = 1e-9
BOUND_TOL = 1e-9


class Bend(NamedTuple):
    index: int           # vertex index within the route
    vertex: Point2
    prev: Point2
    direction: tuple[float, float]
    lower_bound: float   # cost of the bent continuation to the goal


class BendIdentification(NamedTuple):
    bend: Bend
    start_cells: tuple[int, ...]
    admissible: tuple[frozenset[int], ...]
    exhaustive: bool


class IdentifyResult(NamedTuple):
    status: str          # "empty" | "found" | "budget"
    bends: tuple[BendIdentification, ...]
    interest: frozenset[int]

    def tuple_count(self) -> float:
        n = 1
        for b in self.bends:
            n *= len(b.admissible)
        return n


class IdentificationContext:
    """Shared geometry for one candidate: linework, cells, graph, pocket."""

    def __init__(self, demo: Sequence, candidate: Sequence, bbox: BBox):
        self.demo = tuple(Point2(float(p[0]), float(p[1])) for p in demo)
        self.candidate = tuple(Point2(float(p[0]), float(p[1])) for p in candidate)
        self.bbox = bbox
        self.goal = self.demo[-1]
        self.schedule = self.demo[:-2]
        self.bends = []
        for k in range(1, len(self.demo) - 1):
            prev, v = self.demo[k - 1], self.demo[k]
            self.bends.append(Bend(
                k, v, prev, (v.x - prev.x, v.y - prev.y),
                dist(prev, v) + dist(v, self.goal)))
        self.s_env = Environment([list(self.demo), list(self.candidate)])
        if self.schedule:
            self.full: Optional[FullDecomposition] = full_cell_decomposition(
                self.schedule, self.s_env, bbox)
            self.graph: Optional[SurveyCellGraph] = SurveyCellGraph(
                self.full, self.s_env)
        else:
            self.full = None
            self.graph = None
        self.pocket = enclosed_pocket(self.demo, self.candidate)
        if self.full is not None:
            self.interest = frozenset(
                c.index for c in self.full.cells
                if region_boolean(c.region, self.pocket, "intersection").area
                > INTEREST_AREA_MIN)
        else:
            self.interest = frozenset()
        self._bound_cache: dict[tuple[int, frozenset[int]], float] = {}

    def detour_bound(self, bend_pos: int, cells: frozenset[int]) -> float:
        """Cheapest non-overlapping route to the goal past the filled cells."""
        key = (bend_pos, cells)
        got = self._bound_cache.get(key)
        if got is not None:
            return got
        bend = self.bends[bend_pos]
        fill = filled_region([self.full.cells[i] for i in sorted(cells)])
        classes = region_class_paths(bend.prev, self.goal, fill)
        _, alts = split_by_overlap(classes, bend.direction)
        got = min((r.cost for r in alts.values()), default=math.inf)
        self._bound_cache[key] = got
        return got


def enclosed_pocket(demo: Sequence, candidate: Sequence) -> PolyRegion:
    """Faces of the route arrangement bordered by both routes."""
    demo_line = LineString([tuple(p) for p in demo])
    cand_line = LineString([tuple(p) for p in candidate])
    merged = unary_union(MultiLineString(
        [list(demo_line.coords), list(cand_line.coords)]))
    pocket = PolyRegion.empty()
    for face in polygonize(merged):
        if face.area <= INTEREST_AREA_MIN:
            continue
        b = face.boundary
        if (b.intersection(demo_line).length > POCKET_EDGE_MIN
                and b.intersection(cand_line).length > POCKET_EDGE_MIN):
            pocket = region_boolean(pocket, PolyRegion(face), "union")
    return pocket


def _connected_fills(ctx: IdentificationContext, starts, budget):
    """All connected cell sets through a start cell, smallest first.

    Returns (sets, exhausted) where exhausted means the enumeration hit
    neither the size cap nor the subset budget.
    """
    graph = ctx.graph
    interest = sorted(ctx.interest)
    max_len, max_subsets = budget
    queue = deque()
    seen: set[frozenset[int]] = set()
    for s in sorted(starts):
        f = frozenset((s,))
        queue.append(f)
        seen.add(f)
    exhausted = True
    while queue:
        cur = queue.popleft()
        if len(cur) >= max_len:
            if len(cur) < len(interest):
                exhausted = False
            continue
        for c in interest:
            if c in cur:
                continue
            if not any(graph.cells_adjacent(c, m) and c != m for m in cur):
                continue
            nxt = cur | {c}
            if nxt in seen:
                continue
            if len(seen) >= max_subsets:
                exhausted = False
                continue
            seen.add(nxt)
            queue.append(nxt)
    ordered = sorted(seen, key=lambda f: (len(f), sorted(f)))
    return ordered, exhausted


def cells_connected(graph, cells: frozenset[int]) -> bool:
    if not cells:
        return False
    ordered = sorted(cells)
    seen = {ordered[0]}
    frontier = [ordered[0]]
    while frontier:
        cur = frontier.pop()
        for c in ordered:
            if c not in seen and graph.cells_adjacent(cur, c):
                seen.add(c)
                frontier.append(c)
    return len(seen) == len(cells)


class OmegaId:
    """Queryable view of the identified fill families, one per bend.

    Materialized construction wraps an exhaustive enumeration; the lazy
    form answers membership on demand and decides existence at maximal
    connected fills, using the fact that growing a fill never shortens
    the detour around it.
    """

    def __init__(self, ctx: IdentificationContext,
                 materialized: Optional[IdentifyResult] = None,
                 tol: float = BOUND_TOL):
        self.ctx = ctx
        self.materialized = materialized
        self.tol = tol
        self._starts: dict[int, frozenset[int]] = {}
        self._universe: dict[int, frozenset[int]] = {}
        self._components: Optional[tuple[frozenset[int], ...]] = None

    def starts(self, k: int) -> frozenset[int]:
        got = self._starts.get(k)
        if got is None:
            if self.materialized is not None:
                got = frozenset(self.materialized.bends[k].start_cells)
            else:
                bend = self.ctx.bends[k]
                got = frozenset(
                    i for i in self.ctx.interest
                    if self.ctx.full.cells[i].region.contains_point(bend.vertex))
            self._starts[k] = got
        return got

    def _interest_components(self) -> tuple[frozenset[int], ...]:
        if self._components is None:
            remaining = set(self.ctx.interest)
            comps = []
            while remaining:
                seed = min(remaining)
                comp = {seed}
                frontier = [seed]
                while frontier:
                    cur = frontier.pop()
                    for c in sorted(remaining - comp):
                        if self.ctx.graph.cells_adjacent(cur, c):
                            comp.add(c)
                            frontier.append(c)
                comps.append(frozenset(comp))
                remaining -= comp
            self._components = tuple(comps)
        return self._components

    def universe(self, k: int) -> frozenset[int]:
        """Cells that may appear in an admissible fill for bend k."""
        got = self._universe.get(k)
        if got is not None:
            return got
        if self.materialized is not None:
            fills = self.materialized.bends[k].admissible
            got = frozenset().union(*fills) if fills else frozenset()
        else:
            bend_lb = self.ctx.bends[k].lower_bound
            keep: set[int] = set()
            for comp in self._interest_components():
                if not (comp & self.starts(k)):
                    continue
                if self.ctx.detour_bound(k, comp) >= bend_lb - self.tol:
                    keep |= comp
            got = frozenset(keep)
        self._universe[k] = got
        return got

    def admissible(self, k: int, cells: frozenset[int]) -> bool:
        if self.materialized is not None:
            return cells in set(self.materialized.bends[k].admissible)
        if not cells or not cells <= self.ctx.interest:
            return False
        if not cells & self.starts(k):
            return False
        if not cells_connected(self.ctx.graph, cells):
            return False
        bend = self.ctx.bends[k]
        return self.ctx.detour_bound(k, cells) >= bend.lower_bound - self.tol

    def may_extend(self, k: int, cells: frozenset[int]) -> bool:
        """Could this partial fill still grow into an admissible one?"""
        if self.materialized is not None:
            return any(cells <= f for f in self.materialized.bends[k].admissible)
        return cells <= self.universe(k)

    def has_admissible(self, k: int) -> bool:
        if self.materialized is not None:
            return bool(self.materialized.bends[k].admissible)
        return bool(self.universe(k))

    def empty(self) -> bool:
        """True only when some bend provably has no fill at all."""
        if self.materialized is not None:
            return any(b.exhaustive and not b.admissible
                       for b in self.materialized.bends)
        return any(not self.has_admissible(k)
                   for k in range(len(self.ctx.bends)))


def identify_cell_sequences(ctx: IdentificationContext, max_len: int = 12,
                            max_subsets: int = 20000) -> IdentifyResult:
    if not ctx.bends:
        return IdentifyResult("found", (), ctx.interest)
    bends_out = []
    any_budget_gap = False
    any_empty = False
    for pos, bend in enumerate(ctx.bends):
        starts = tuple(sorted(
            i for i in ctx.interest
            if ctx.full.cells[i].region.contains_point(bend.vertex)))
        if not starts:
            bends_out.append(BendIdentification(bend, (), (), True))
            any_empty = True
            continue
        fills, exhausted = _connected_fills(ctx, starts, (max_len, max_subsets))
        admissible = tuple(
            f for f in fills
            if ctx.detour_bound(pos, f) >= bend.lower_bound - BOUND_TOL)
        bends_out.append(BendIdentification(bend, starts, admissible, exhausted))
        if not admissible:
            if exhausted:
                any_empty = True
            else:
                any_budget_gap = True
    if any_empty:
        status = "empty"
    elif any_budget_gap:
        status = "budget"
    else:
        status = "found"
    return IdentifyResult(status, tuple(bends_out), ctx.interest)
