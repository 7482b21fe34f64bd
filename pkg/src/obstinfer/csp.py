"""Assignment search: one survey-cell path per route bend.

Each bend must be explained by hidden matter whose cells trace a path
on the survey-cell graph. Two modes share the anchoring and fill
constraints but differ in how they prevent impossible mutual
occlusion:

* complete mode keeps every assignment that could correspond to real
  matter, bounding path length per sweep from outside;
* heuristic mode trades completeness for termination by forbidding
  partial occlusion (outside a pseudolayer), forcing overlapping paths
  to chain, banning future survey points, repeated cells, and cells
  seen from two survey points.

The search is budgeted in expansion steps, never wall-clock time, so
identical inputs always enumerate identical streams.
"""

from __future__ import annotations

from typing import Iterator, NamedTuple, Optional, Sequence

from .geometry import dist, fully_occluded
from .cellgraph import Node, Occlusion, SurveyCellGraph, chain_paths
from .cells import FullDecomposition, filled_region
from .sequences import IdentificationContext, IdentifyResult, OmegaId

DEFAULT_MAX_STEPS = 200_000

COMPLETE_CONSTRAINTS = (
    "anchored_start",
    "identified_fills",
    "mutual_visibility",
    "overlap_coexistence",
)
HEURISTIC_CONSTRAINTS = (
    "anchored_start",
    "identified_fills",
    "occlusion_exemption",
    "overlap_chaining",
    "no_future_survey",
    "no_repeated_cell",
    "one_survey_per_cell",
)


class Assignment(NamedTuple):
    paths: tuple[tuple[Node, ...], ...]
    mode: str


class BudgetExceeded(RuntimeError):
    pass


class Infeasible(RuntimeError):
    pass


def start_cells(vertex, full: FullDecomposition) -> tuple[int, ...]:
    """Cells whose closure contains the vertex; route vertices always
    lie on cell boundaries, so this is boundary membership."""
    return tuple(c.index for c in full.cells
                 if c.region.contains_point(vertex))


class CSP:
    def __init__(self, ctx: IdentificationContext, omega):
        if ctx.full is None or ctx.graph is None:
            raise ValueError("route has no survey points")
        if isinstance(omega, IdentifyResult):
            omega = OmegaId(ctx, materialized=omega)
        self.ctx = ctx
        self.omega: OmegaId = omega
        self.graph: SurveyCellGraph = ctx.graph
        self.full: FullDecomposition = ctx.full
        self.n = len(ctx.bends)
        self.start_sets = [
            frozenset(start_cells(b.vertex, self.full)) for b in ctx.bends]
        n_alpha = len(ctx.schedule)
        self.allowed_surveys = [
            tuple(j for j in range(n_alpha) if j <= b.index)
            for b in ctx.bends]
        self.all_surveys = tuple(range(n_alpha))
        self._pair_cache: dict = {}
        self._shadow_cache: dict = {}

    # ---------------- constraint primitives ----------------

    def _fill_occludes_node(self, cells: frozenset[int], node: Node) -> bool:
        """Would matter filling every listed cell hide the node's cell
        from its survey point? Skipped when the node's own cell is part
        of the fill, where occluder and target could never be disjoint."""
        if node.cell in cells:
            return False
        key = (cells, node)
        got = self._shadow_cache.get(key)
        if got is None:
            fill = filled_region([self.full.cells[i] for i in sorted(cells)])
            target = self.full.cells[node.cell].region
            alpha = self.full.survey_points[node.survey]
            got = fully_occluded(target, fill, alpha, self.full.bbox)
            self._shadow_cache[key] = got
        return got

    def _occ(self, blocker: Node, target: Node) -> bool:
        return self.graph.node_occludes(blocker, target) != Occlusion.NONE

    def _pseudolayer_exempt(self, path: Sequence[Node], p1: int, p2: int) -> bool:
        """Span of the path from blocker position p1 to target position p2."""
        if p1 <= p2:
            run = tuple(path[p1:p2 + 1])
        else:
            run = tuple(path[p2:p1 + 1])[::-1]
        return self.graph.is_pseudolayer(run)

    def _path_occlusion_ok(self, path: Sequence[Node]) -> bool:
        for p1, a in enumerate(path):
            for p2, b in enumerate(path):
                if a.cell == b.cell:
                    continue
                if self._occ(a, b) and not self._pseudolayer_exempt(path, p1, p2):
                    return False
        return True

    def _cross_occlusion_ok(self, pa: Sequence[Node], pb: Sequence[Node]) -> bool:
        for a in pa:
            for b in pb:
                if a.cell == b.cell:
                    continue
                if self._occ(a, b) or self._occ(b, a):
                    return False
        return True

    @staticmethod
    def _coexist(pa: Sequence[Node], pb: Sequence[Node]) -> bool:
        """Shared endpoints leave room for two separate curves: exactly
        one common node, terminal in both paths."""
        shared = set(pa) & set(pb)
        if len(shared) != 1:
            return False
        node = next(iter(shared))
        return (node in (pa[0], pa[-1])) and (node in (pb[0], pb[-1]))

    @staticmethod
    def _chainable(pa: tuple[Node, ...], pb: tuple[Node, ...]) -> bool:
        return chain_paths(pa, pb).chained

    def _pair_ok(self, mode: str, pa: tuple[Node, ...],
                 pb: tuple[Node, ...]) -> bool:
        key = (mode, pa, pb)
        got = self._pair_cache.get(key)
        if got is not None:
            return got
        shared = bool(set(pa) & set(pb))
        if mode == "heuristic":
            ok = self._cross_occlusion_ok(pa, pb)
            if ok and shared:
                ok = self._chainable(pa, pb)
            if ok:
                cell_owner = {n.cell: n.survey for n in pa}
                for n in pb:
                    if cell_owner.get(n.cell, n.survey) != n.survey:
                        ok = False
                        break
        else:
            ok = True
            ca, cb = frozenset(n.cell for n in pa), frozenset(n.cell for n in pb)
            for n in pb:
                if self._fill_occludes_node(ca, n):
                    ok = False
                    break
            if ok:
                for n in pa:
                    if self._fill_occludes_node(cb, n):
                        ok = False
                        break
            if ok and shared and not self._coexist(pa, pb):
                ok = self._chainable(pa, pb)
        self._pair_cache[key] = ok
        self._pair_cache[(mode, pb, pa)] = ok
        return ok

    # ---------------- per-bend path enumeration ----------------

    def _node_order_key(self, k: int):
        vx = self.ctx.bends[k].vertex

        def key(node: Node):
            rep = self.full.cells[node.cell].rep
            return (round(dist(rep, vx), 12), node.survey, node.cell)
        return key

    def _bend_paths(self, k: int, mode: str, max_len: Optional[int],
                    counter: dict) -> list[tuple[Node, ...]]:
        universe = self.omega.universe(k)
        if not universe:
            return []
        universe_cells = sorted(universe)
        surveys = (self.allowed_surveys[k] if mode == "heuristic"
                   else self.all_surveys)
        order = self._node_order_key(k)
        all_nodes = sorted(
            (Node(j, c) for j in surveys for c in universe_cells), key=order)
        start_nodes = [n for n in all_nodes
                       if n.cell in self.start_sets[k]
                       and n.cell in self.omega.starts(k)]
        out: list[tuple[Node, ...]] = []

        def grow(path: tuple[Node, ...], cellset: frozenset[int]):
            counter["steps"] += 1
            if counter["steps"] > counter["max"]:
                raise BudgetExceeded(
                    f"search budget of {counter['max']} steps exhausted")
            if self.omega.admissible(k, cellset):
                if mode != "heuristic" or self._path_occlusion_ok(path):
                    out.append(path)
            if max_len is not None and len(path) >= max_len:
                return
            last = path[-1]
            for nxt in all_nodes:
                if nxt == last:
                    continue
                if mode == "heuristic" and nxt.cell in cellset:
                    continue
                if not self.graph.has_edge(last, nxt):
                    continue
                grown = cellset | {nxt.cell}
                if not self.omega.may_extend(k, grown):
                    continue
                grow(path + (nxt,), grown)

        for s in start_nodes:
            grow((s,), frozenset((s.cell,)))
        out.sort(key=lambda p: (len(p), tuple(p)))
        return out

    # ---------------- assignment search ----------------

    def solve(self, mode: str, max_path_len: Optional[int] = None,
              max_steps: int = DEFAULT_MAX_STEPS) -> Iterator[Assignment]:
        """Stream assignments satisfying the mode's constraint set.

        Exhaustion without a yield means no assignment exists within
        the given path-length bound; a blown step budget raises."""
        if mode not in ("complete", "heuristic"):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == "complete" and max_path_len is None:
            raise ValueError("complete mode needs a path-length bound")
        if self.n == 0:
            yield Assignment((), mode)
            return
        counter = {"steps": 0, "max": max_steps}

        def backtrack(domains, idx: int, chosen: list, need_len):
            if idx == self.n:
                if need_len is None or any(
                        len(p) == need_len for p in chosen):
                    yield Assignment(tuple(chosen), mode)
                return
            for path in domains[idx]:
                counter["steps"] += 1
                if counter["steps"] > counter["max"]:
                    raise BudgetExceeded(
                        f"search budget of {counter['max']} steps exhausted")
                if all(self._pair_ok(mode, prev, path) for prev in chosen):
                    chosen.append(path)
                    yield from backtrack(domains, idx + 1, chosen, need_len)
                    chosen.pop()

        if mode == "complete":
            domains = [self._bend_paths(k, mode, max_path_len, counter)
                       for k in range(self.n)]
            yield from backtrack(domains, 0, [], None)
            return

        # Deepening sweeps keep early assignments cheap: a sweep at
        # length L re-yields nothing from before because at least one
        # path must use exactly L nodes.
        longest = max((len(self.omega.universe(k)) for k in range(self.n)),
                      default=0)
        cap = max_path_len if max_path_len is not None else longest
        for sweep in range(1, max(cap, 1) + 1):
            domains = [self._bend_paths(k, mode, sweep, counter)
                       for k in range(self.n)]
            yield from backtrack(domains, 0, [], sweep)

    def first_assignment(self, mode: str, max_path_len: Optional[int] = None,
                         max_steps: int = DEFAULT_MAX_STEPS) -> Assignment:
        for a in self.solve(mode, max_path_len, max_steps):
            return a
        raise Infeasible("no assignment satisfies the constraints")

    # ---------------- independent checker ----------------

    def check_assignment(self, a: Assignment,
                         mode: Optional[str] = None) -> dict[str, bool]:
        """Literal re-evaluation of every constraint of the mode."""
        mode = mode or a.mode
        report: dict[str, bool] = {}
        paths = a.paths
        cells_of = [frozenset(n.cell for n in p) for p in paths]

        report["anchored_start"] = all(
            p and p[0].cell in self.start_sets[k]
            for k, p in enumerate(paths))
        report["identified_fills"] = all(
            self.omega.admissible(k, cells_of[k]) for k in range(len(paths)))

        if mode == "complete":
            ok = True
            for i, pi in enumerate(paths):
                for pj in paths:
                    for n in pj:
                        if self._fill_occludes_node(cells_of[i], n):
                            ok = False
            report["mutual_visibility"] = ok
            ok = True
            for i in range(len(paths)):
                for j in range(i + 1, len(paths)):
                    if set(paths[i]) & set(paths[j]):
                        if not (self._coexist(paths[i], paths[j])
                                or self._chainable(paths[i], paths[j])):
                            ok = False
            report["overlap_coexistence"] = ok
            return report

        ok = True
        for i, pi in enumerate(paths):
            for j, pj in enumerate(paths):
                for p1, n1 in enumerate(pi):
                    for p2, n2 in enumerate(pj):
                        if n1.cell == n2.cell or not self._occ(n1, n2):
                            continue
                        if i != j or not self._pseudolayer_exempt(pi, p1, p2):
                            ok = False
        report["occlusion_exemption"] = ok
        report["overlap_chaining"] = all(
            not (set(paths[i]) & set(paths[j]))
            or self._chainable(paths[i], paths[j])
            for i in range(len(paths)) for j in range(i + 1, len(paths)))
        report["no_future_survey"] = all(
            n.survey in self.allowed_surveys[k]
            for k, p in enumerate(paths) for n in p)
        report["no_repeated_cell"] = all(
            len(cells_of[k]) == len(p) for k, p in enumerate(paths))
        owner: dict[int, set[int]] = {}
        for p in paths:
            for n in p:
                owner.setdefault(n.cell, set()).add(n.survey)
        report["one_survey_per_cell"] = all(
            len(s) == 1 for s in owner.values())
        return report
