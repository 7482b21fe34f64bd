"""Bend identification on a hand-checked two-route fixture.

Demonstration dips below the axis; one candidate arcs well above it
(survivable), one hugs the axis (every explanation of the bend must
cross it). Cell labels are resolved by point lookup, never by index.
"""

import math

import pytest

from obstinfer.geometry import BBox
from obstinfer.sequences import (
    IdentificationContext,
    _connected_fills,
    enclosed_pocket,
    identify_cell_sequences,
)

DEMO = [(0.0, 0.0), (4.0, -3.0), (8.0, 0.0)]
CAND_HIGH = [(0.0, 0.0), (2.0, 2.5), (6.0, 2.5), (8.0, 0.0)]
CAND_LOW = [(0.0, 0.0), (2.0, 1.0), (6.0, 1.0), (8.0, 0.0)]
BB = BBox(-2.0, -6.0, 10.0, 6.0)

DIP = math.hypot(4.0, 3.0) * 2          # bent continuation, 10 exactly
ARC_HALF = math.hypot(2.0, 2.5)


@pytest.fixture(scope="module")
def ctx_high() -> IdentificationContext:
    return IdentificationContext(DEMO, CAND_HIGH, BB)


def _interest_labels(ctx):
    """Map the three pocket cells by interior probes."""
    low = ctx.full.cell_at((4.0, -1.0)).index
    mid = ctx.full.cell_at((5.0, 0.5)).index
    top = ctx.full.cell_at((3.0, 2.0)).index
    return low, mid, top


def test_pocket_area(ctx_high):
    assert ctx_high.pocket.area == pytest.approx(27.0, abs=1e-9)


def test_pocket_empty_for_identical_routes():
    assert enclosed_pocket(DEMO, DEMO).area == 0.0


def test_interest_cells(ctx_high):
    low, mid, top = _interest_labels(ctx_high)
    assert ctx_high.interest == frozenset((low, mid, top))


def test_connected_fills_structure(ctx_high):
    low, mid, top = _interest_labels(ctx_high)
    fills, exhausted = _connected_fills(ctx_high, (low,), (12, 20000))
    assert exhausted
    # the top cell only connects through the middle one
    assert set(fills) == {
        frozenset((low,)),
        frozenset((low, mid)),
        frozenset((low, mid, top)),
    }


def test_detour_bounds(ctx_high):
    low, mid, top = _interest_labels(ctx_high)
    assert ctx_high.detour_bound(0, frozenset((low,))) == pytest.approx(8.0)
    assert ctx_high.detour_bound(0, frozenset((low, mid))) == pytest.approx(
        6.5 + ARC_HALF, abs=1e-9)
    assert ctx_high.detour_bound(0, frozenset((low, mid, top))) == pytest.approx(
        4.0 + 2.0 * ARC_HALF, abs=1e-9)


def test_identify_single_admissible_fill(ctx_high):
    low, mid, top = _interest_labels(ctx_high)
    result = identify_cell_sequences(ctx_high)
    assert result.status == "found"
    assert len(result.bends) == 1
    b = result.bends[0]
    assert b.bend.lower_bound == pytest.approx(DIP)
    assert b.start_cells == (low,)
    assert b.exhaustive
    assert b.admissible == (frozenset((low, mid, top)),)
    assert result.tuple_count() == 1


def test_identify_low_candidate_empty():
    ctx = IdentificationContext(DEMO, CAND_LOW, BB)
    result = identify_cell_sequences(ctx)
    assert result.status == "empty"
    b = result.bends[0]
    assert b.admissible == ()
    assert b.exhaustive
    # widest possible fill still undercuts the bent continuation
    full_fill = frozenset(ctx.interest)
    assert ctx.detour_bound(0, full_fill) == pytest.approx(
        4.0 + 2.0 * math.hypot(2.0, 1.0), abs=1e-9)
    assert ctx.detour_bound(0, full_fill) < DIP


def test_budget_never_reports_empty(ctx_high):
    capped = identify_cell_sequences(ctx_high, max_len=2)
    assert capped.status == "budget"
    assert not capped.bends[0].exhaustive

    starved = identify_cell_sequences(ctx_high, max_subsets=1)
    assert starved.status == "budget"


def test_straight_route_trivially_found():
    ctx = IdentificationContext([(0.0, 0.0), (8.0, 0.0)], CAND_HIGH, BB)
    result = identify_cell_sequences(ctx)
    assert result.status == "found"
    assert result.bends == ()
    assert result.tuple_count() == 1
