"""Cell decompositions: partition checks and sight-line invariants.

The defining property checked here: inside one cell, the ordered list
of linework segments crossed by the open sight line from the vantage
point is constant. Crossing lists are computed by direct determinant
math, independent of the implementation.
"""

import math

import numpy as np
import pytest

from obstinfer.geometry import BBox, Environment, Point2, region_boolean
from obstinfer.cells import (
    full_cell_decomposition,
    filled_region,
    polar_cell_decomposition,
)

BB = BBox(-5.0, -5.0, 5.0, 5.0)
BB10 = BBox(-2.0, -6.0, 10.0, 6.0)


def _crossing_list(alpha, x, segments):
    ax, ay = alpha
    rx, ry = x[0] - ax, x[1] - ay
    out = []
    for idx, (a, b) in enumerate(segments):
        sx, sy = b[0] - a[0], b[1] - a[1]
        denom = rx * sy - ry * sx
        if abs(denom) < 1e-12:
            continue
        qx, qy = a[0] - ax, a[1] - ay
        t = (qx * sy - qy * sx) / denom
        u = (qx * ry - qy * rx) / denom
        if 1e-9 < t < 1 - 1e-9 and 1e-9 < u < 1 - 1e-9:
            out.append((t, idx))
    return tuple(i for _, i in sorted(out))


def _seg_list(env):
    return [((s.a.x, s.a.y), (s.b.x, s.b.y)) for s in env.segments()]


def _check_partition(cells, bbox, tol=1e-6):
    total = sum(c.region.area for c in cells)
    assert total == pytest.approx((bbox.xmax - bbox.xmin) * (bbox.ymax - bbox.ymin),
                                  abs=tol)
    for i in range(len(cells)):
        for j in range(i + 1, len(cells)):
            inter = region_boolean(cells[i].region, cells[j].region, "intersection")
            assert inter.area <= 1e-9


def _check_sightline_invariant(dec, env, rng, samples=8):
    segs = _seg_list(env)
    for cell in dec.cells:
        lists = set()
        for _ in range(samples):
            p = cell.region.sample_point(rng)
            lists.add(_crossing_list(tuple(dec.alpha), tuple(p), segs))
        assert len(lists) == 1, f"cell {cell.index} mixes sight structures"


def test_single_segment_three_cells():
    env = Environment([[(2.0, -1.0), (2.0, 1.0)]])
    dec = polar_cell_decomposition((0.0, 0.0), env, BB)
    assert len(dec.cells) == 3
    _check_partition(dec.cells, BB)
    rng = np.random.default_rng(5)
    _check_sightline_invariant(dec, env, rng)


def test_radial_segment_from_vantage_single_cell():
    env = Environment([[(0.0, 0.0), (3.0, 1.0)]])
    dec = polar_cell_decomposition((0.0, 0.0), env, BB)
    assert len(dec.cells) == 1
    _check_partition(dec.cells, BB)


def test_wall_truncation_frozen():
    env = Environment([[(2.0, -2.0), (2.0, 2.0)], [(4.0, -1.0), (4.0, 1.0)]])
    dec = polar_cell_decomposition((0.0, 0.0), env, BB)
    by_vertex = {tuple(w.vertex): w for w in dec.walls}
    w_far_top = by_vertex[(4.0, 1.0)]
    assert w_far_top.near.x == pytest.approx(2.0, abs=1e-9)
    assert w_far_top.near.y == pytest.approx(0.5, abs=1e-9)
    w_near_top = by_vertex[(2.0, 2.0)]
    assert w_near_top.near == Point2(0.0, 0.0)
    _check_partition(dec.cells, BB)
    rng = np.random.default_rng(6)
    _check_sightline_invariant(dec, env, rng)


DEMO = [(0.0, 0.0), (4.0, -3.0), (8.0, 0.0)]
CAND = [(0.0, 0.0), (2.0, 2.5), (6.0, 2.5), (8.0, 0.0)]


def test_route_pair_linework_invariant():
    env = Environment([DEMO, CAND])
    rng = np.random.default_rng(7)
    for alpha in [(0.0, 0.0), (4.0, -3.0)]:
        dec = polar_cell_decomposition(alpha, env, BB10)
        _check_partition(dec.cells, BB10)
        _check_sightline_invariant(dec, env, rng)


def test_full_decomposition_matches_pair_clip_oracle():
    env = Environment([DEMO, CAND])
    full = full_cell_decomposition([(0.0, 0.0), (4.0, -3.0)], env, BB10)
    _check_partition(full.cells, BB10)
    pcd0, pcd1 = full.pcds
    expected = 0
    for c0 in pcd0.cells:
        for c1 in pcd1.cells:
            inter = region_boolean(c0.region, c1.region, "intersection")
            expected += sum(1 for part in inter.parts() if part.area > 1e-9)
    assert len(full.cells) == expected
    for fc in full.cells:
        assert len(fc.region.parts()) == 1
        p0 = pcd0.cells[fc.parents[0]].region
        p1 = pcd1.cells[fc.parents[1]].region
        assert region_boolean(fc.region, p0, "difference").area <= 1e-7
        assert region_boolean(fc.region, p1, "difference").area <= 1e-7


def test_cell_lookup_and_fill():
    env = Environment([[(2.0, -1.0), (2.0, 1.0)]])
    dec = polar_cell_decomposition((0.0, 0.0), env, BB)
    near = dec.cell_at((1.0, 0.0))
    behind = dec.cell_at((3.5, 0.0))
    assert near is not None and behind is not None and near.index != behind.index
    merged = filled_region([near, behind])
    assert merged.area == pytest.approx(near.region.area + behind.region.area,
                                        abs=1e-9)


def test_random_lineworks_hold_invariant():
    rng = np.random.default_rng(99)
    for _ in range(10):
        a = (rng.uniform(-4, 4), rng.uniform(-4, 4))
        pts = rng.uniform(-4.0, 4.0, size=(3, 2))
        curve = [tuple(p) for p in pts]
        env = Environment([curve])
        if env.assumption_violations():
            continue
        if min(math.dist(a, tuple(p)) for p in pts) < 0.3:
            continue
        dec = polar_cell_decomposition(a, env, BB)
        _check_partition(dec.cells, BB)
        _check_sightline_invariant(dec, env, rng, samples=6)
