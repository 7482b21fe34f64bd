"""Graph of (survey point, cell) pairs over a combined decomposition.

Two pairs are linked when their cells trade reachable boundary: the
same cell under two vantage points is always linked, and distinct cells
are linked when they share boundary of positive length that does not
lie on the route linework (a shared wall, not a potential obstacle).

A run of pairs forms a pseudolayer when its first cell, filled, hides
at least part of its last cell from the last pair's vantage point and
one single ray from that point meets every cell in the run: the run
then behaves like one radial stack of matter.
"""

from __future__ import annotations

import math
from enum import IntEnum
from typing import NamedTuple, Optional, Sequence

from shapely.ops import unary_union
from shapely.geometry import LineString

from .geometry import (
    EPS,
    Environment,
    Point2,
    PolyRegion,
    dist,
    fully_occluded,
    partially_occluded,
)
from .cells import FullDecomposition

EDGE_MIN_LENGTH = 1e-7


class Occlusion(IntEnum):
    NONE = 0
    PARTIAL = 1
    FULL = 2


class Node(NamedTuple):
    survey: int
    cell: int


class ChainResult(NamedTuple):
    chained: bool
    merged: Optional[tuple]


class SurveyCellGraph:
    def __init__(self, full: FullDecomposition, s_env: Environment):
        self.full = full
        self.s_env = s_env
        segs = s_env.segments()
        if segs:
            self._s_buf = unary_union(
                [LineString([tuple(s.a), tuple(s.b)]) for s in segs]).buffer(1e-9)
        else:
            self._s_buf = None
        self._adj: dict[tuple[int, int], bool] = {}
        self._occ: dict[tuple[int, int, int], Occlusion] = {}

    @property
    def survey_points(self):
        return self.full.survey_points

    @property
    def cells(self):
        return self.full.cells

    def nodes(self):
        for s in range(len(self.survey_points)):
            for c in range(len(self.cells)):
                yield Node(s, c)

    def cells_adjacent(self, i: int, j: int) -> bool:
        if i == j:
            return True
        key = (min(i, j), max(i, j))
        got = self._adj.get(key)
        if got is None:
            shared = self.cells[i].region.geom.boundary.intersection(
                self.cells[j].region.geom.boundary)
            if self._s_buf is not None:
                shared = shared.difference(self._s_buf)
            got = shared.length > EDGE_MIN_LENGTH
            self._adj[key] = got
        return got

    def has_edge(self, a: Node, b: Node) -> bool:
        if a == b:
            return False
        if a.cell == b.cell:
            return a.survey != b.survey
        return self.cells_adjacent(a.cell, b.cell)

    def neighbors(self, a: Node):
        for b in self.nodes():
            if self.has_edge(a, b):
                yield b

    def node_occludes(self, blocker: Node, target: Node) -> Occlusion:
        """How much of the target cell the filled blocker cell hides,
        viewed from the target's survey point."""
        if blocker.cell == target.cell:
            return Occlusion.NONE
        key = (blocker.cell, target.survey, target.cell)
        got = self._occ.get(key)
        if got is None:
            alpha = self.survey_points[target.survey]
            X = self.cells[target.cell].region
            fill = self.cells[blocker.cell].region
            if fully_occluded(X, fill, alpha, self.full.bbox):
                got = Occlusion.FULL
            elif partially_occluded(X, fill, alpha, self.full.bbox):
                got = Occlusion.PARTIAL
            else:
                got = Occlusion.NONE
            self._occ[key] = got
        return got

    def _cell_arcs(self, cell_idx: int, alpha) -> Optional[list[tuple[float, float]]]:
        arcs = []
        for seg in self.cells[cell_idx].region.boundary_segments():
            if dist(seg.a, alpha) <= EPS or dist(seg.b, alpha) <= EPS:
                return None  # vantage on the cell: every direction meets it
            a1 = math.atan2(seg.a.y - alpha[1], seg.a.x - alpha[0])
            a2 = math.atan2(seg.b.y - alpha[1], seg.b.x - alpha[0])
            d = a2 - a1
            while d > math.pi:
                d -= 2 * math.pi
            while d <= -math.pi:
                d += 2 * math.pi
            if d >= 0:
                arcs.append((a1, a1 + d))
            else:
                arcs.append((a2, a2 - d))
        return arcs

    def is_pseudolayer(self, run: Sequence[Node]) -> bool:
        if len(run) <= 1:
            return True
        if self.node_occludes(run[0], run[-1]) == Occlusion.NONE:
            return False
        alpha = self.survey_points[run[-1].survey]
        per_cell = []
        for c in sorted({nd.cell for nd in run}):
            arcs = self._cell_arcs(c, alpha)
            if arcs is not None:
                per_cell.append(arcs)
        if not per_cell:
            return True
        candidates = []
        for arcs in per_cell:
            for lo, hi in arcs:
                candidates.extend((lo, hi, (lo + hi) / 2))

        def hit(arcs, theta):
            for lo, hi in arcs:
                if ((theta - lo) % (2 * math.pi)) <= (hi - lo) + 1e-12:
                    return True
            return False

        return any(all(hit(arcs, th) for arcs in per_cell) for th in candidates)


def _contains_run(hay: tuple, needle: tuple) -> bool:
    n = len(needle)
    if n > len(hay):
        return False
    return any(hay[i:i + n] == needle for i in range(len(hay) - n + 1))


def chain_paths(a: Sequence, b: Sequence) -> ChainResult:
    """Merge two runs into the unique run containing both, if it exists.

    Either run may be traversed in reverse. Merges that would repeat a
    node are discarded since no valid run revisits one. Zero or several
    distinct merges (up to reversal) mean the runs do not chain.
    """
    A, B = tuple(a), tuple(b)
    if not A or not B:
        return ChainResult(False, None)

    def canon(g: tuple) -> tuple:
        r = g[::-1]
        return g if list(g) <= list(r) else r

    cands = set()

    def consider(g: tuple):
        if len(set(g)) == len(g):
            cands.add(canon(g))

    for Bo in {B, B[::-1]}:
        if _contains_run(A, Bo):
            consider(A)
        if _contains_run(Bo, A):
            consider(Bo)
        for k in range(1, min(len(A), len(Bo))):
            if A[len(A) - k:] == Bo[:k]:
                consider(A + Bo[k:])
            if Bo[len(Bo) - k:] == A[:k]:
                consider(Bo + A[k:])
    if len(cands) == 1:
        return ChainResult(True, next(iter(cands)))
    return ChainResult(False, None)
