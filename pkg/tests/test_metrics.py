"""Front-quality indicators on hand-computed cases and random oracles."""

import math

import numpy as np
import pytest

from drillopt.metrics import (
    MetricsError,
    hypervolume,
    igd,
    pareto_filter,
    reference_point,
    reference_set,
    set_coverage,
    spacing,
)

# ---------------------------------------------------------------------------
# Pareto filtering
# ---------------------------------------------------------------------------


def test_pareto_filter_basic():
    pts = np.array([[0.0, 2.0], [1.0, 1.0], [2.0, 0.0], [2.0, 2.0]])
    assert pareto_filter(pts).tolist() == [True, True, True, False]


def test_pareto_filter_keeps_nondominated_duplicates():
    pts = np.array([[1.0, 1.0], [1.0, 1.0], [0.0, 3.0]])
    assert pareto_filter(pts).tolist() == [True, True, True]


def test_pareto_filter_single_point():
    assert pareto_filter(np.array([[5.0, 5.0]])).tolist() == [True]


# ---------------------------------------------------------------------------
# Hypervolume
# ---------------------------------------------------------------------------


def test_hypervolume_single_point():
    assert hypervolume(np.array([[2.0, 2.0]]), (4.0, 4.0)) == pytest.approx(
        4.0
    )


def test_hypervolume_staircase():
    pts = np.array([[1.0, 3.0], [2.0, 2.0], [3.0, 1.0]])
    assert hypervolume(pts, (4.0, 4.0)) == pytest.approx(6.0)


def test_hypervolume_dominated_points_add_nothing():
    pts = np.array([[1.0, 3.0], [2.0, 2.0], [3.0, 1.0]])
    extra = np.vstack([pts, [[2.5, 2.5], [3.0, 3.0]]])
    assert hypervolume(extra, (4.0, 4.0)) == pytest.approx(6.0)


def test_hypervolume_empty_front_is_zero():
    assert hypervolume(np.empty((0, 2)), (4.0, 4.0)) == 0.0


def test_hypervolume_point_beyond_reference_warns_contributes_zero():
    pts = np.array([[1.0, 3.0], [5.0, 0.5]])
    with pytest.warns(UserWarning, match="beyond the reference"):
        hv = hypervolume(pts, (4.0, 4.0))
    assert hv == pytest.approx(3.0)
    with pytest.warns(UserWarning):
        assert hypervolume(np.array([[5.0, 5.0]]), (4.0, 4.0)) == 0.0


def test_hypervolume_order_invariant():
    rng = np.random.default_rng(0)
    pts = rng.random((20, 2))
    base = hypervolume(pts, (2.0, 2.0))
    for _ in range(5):
        shuffled = pts[rng.permutation(20)]
        assert hypervolume(shuffled, (2.0, 2.0)) == pytest.approx(base)


def test_hypervolume_monotone_in_points():
    rng = np.random.default_rng(2)
    pts = rng.random((10, 2))
    hv = hypervolume(pts, (2.0, 2.0))
    more = np.vstack([pts, rng.random((5, 2))])
    assert hypervolume(more, (2.0, 2.0)) >= hv - 1e-12


def _mc_area(points, ref, n=200_000, seed=0):
    rng = np.random.default_rng(seed)
    lo = points.min(axis=0)
    u = lo + rng.random((n, 2)) * (np.array(ref) - lo)
    covered = (
        (points[None, :, :] <= u[:, None, :]).all(axis=2).any(axis=1)
    )
    box = np.prod(np.array(ref) - lo)
    return float(covered.mean() * box)


def test_hypervolume_matches_monte_carlo():
    rng = np.random.default_rng(5)
    for seed in range(5):
        pts = rng.random((rng.integers(2, 12), 2))
        ref = (1.5, 1.5)
        exact = hypervolume(pts, ref)
        approx = _mc_area(pts, ref, seed=seed)
        assert exact == pytest.approx(approx, rel=0.01)


def test_hypervolume_validates_input():
    with pytest.raises(MetricsError):
        hypervolume(np.array([[1.0, 2.0, 3.0]]), (4.0, 4.0, 4.0))
    with pytest.raises(MetricsError):
        hypervolume(np.array([[np.nan, 1.0]]), (4.0, 4.0))


# ---------------------------------------------------------------------------
# IGD
# ---------------------------------------------------------------------------


def test_igd_hand_value():
    reference = np.array([[0.0, 1.0], [1.0, 0.0]])
    front = np.array([[0.5, 0.5]])
    assert igd(front, reference) == pytest.approx(math.sqrt(2.0) / 2.0)


def test_igd_zero_when_front_covers_reference():
    reference = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert igd(reference.copy(), reference) == 0.0


def test_igd_uses_nearest_front_point():
    reference = np.array([[0.0, 0.0]])
    front = np.array([[3.0, 4.0], [6.0, 8.0]])
    assert igd(front, reference) == pytest.approx(5.0)


def test_igd_empty_inputs_raise():
    pts = np.array([[1.0, 1.0]])
    with pytest.raises(MetricsError):
        igd(np.empty((0, 2)), pts)
    with pytest.raises(MetricsError):
        igd(pts, np.empty((0, 2)))


# ---------------------------------------------------------------------------
# Spacing
# ---------------------------------------------------------------------------


def test_spacing_hand_value():
    front = np.array([[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]])
    assert spacing(front) == pytest.approx(math.sqrt(1.0 / 3.0))


def test_spacing_uniform_front_is_zero():
    front = np.array([[0.0, 3.0], [1.0, 2.0], [2.0, 1.0], [3.0, 0.0]])
    assert spacing(front) == pytest.approx(0.0, abs=1e-12)


def test_spacing_requires_two_points():
    with pytest.raises(MetricsError):
        spacing(np.array([[1.0, 1.0]]))
    assert spacing(np.array([[0.0, 0.0], [1.0, 1.0]])) == pytest.approx(0.0)


# ---------------------------------------------------------------------------
# Set coverage
# ---------------------------------------------------------------------------


def test_set_coverage_hand_value():
    a = np.array([[0.0, 2.0], [2.0, 0.0]])
    b = np.array([[1.0, 1.0], [3.0, 3.0]])
    assert set_coverage(a, b) == pytest.approx(0.5)
    assert set_coverage(b, a) == 0.0


def test_set_coverage_self_is_zero_for_nondominated():
    a = np.array([[0.0, 2.0], [1.0, 1.0], [2.0, 0.0]])
    assert set_coverage(a, a.copy()) == 0.0


def test_set_coverage_total_domination():
    a = np.array([[0.0, 0.0]])
    b = np.array([[1.0, 1.0], [2.0, 2.0]])
    assert set_coverage(a, b) == 1.0


def test_set_coverage_empty_sets():
    pts = np.array([[1.0, 1.0]])
    assert set_coverage(pts, np.empty((0, 2))) is None
    assert set_coverage(np.empty((0, 2)), pts) == 0.0


# ---------------------------------------------------------------------------
# Shared references
# ---------------------------------------------------------------------------


def test_reference_point_inflates_union_worst():
    fronts = [
        np.array([[0.0, 1.0], [1.0, 0.0]]),
        np.array([[2.0, 0.5]]),
    ]
    ref = reference_point(fronts)
    # union worst (2, 1), ranges (2, 1), default inflation 0.1
    assert ref[0] == pytest.approx(2.2)
    assert ref[1] == pytest.approx(1.1)
    wide = reference_point(fronts, inflate=0.5)
    assert wide[0] == pytest.approx(3.0)
    assert wide[1] == pytest.approx(1.5)


def test_reference_point_degenerate_union():
    ref = reference_point([np.array([[1.0, 1.0]])])
    assert ref[0] >= 1.0 and ref[1] >= 1.0


def test_reference_set_is_nondominated_union():
    a = np.array([[0.0, 2.0], [1.0, 1.0]])
    b = np.array([[1.0, 1.0], [0.5, 0.5], [3.0, 3.0]])
    ref = reference_set([a, b])
    rows = {tuple(r) for r in ref}
    assert rows == {(0.0, 2.0), (0.5, 0.5)}
    # every kept point is nondominated within the union and deduplicated
    assert len(ref) == len(rows)


def test_all_points_dominated_by_reference_set():
    rng = np.random.default_rng(3)
    fronts = [rng.random((8, 2)) for _ in range(3)]
    ref = reference_set(fronts)
    union = np.vstack(fronts)
    for p in union:
        assert any(
            (q <= p).all() for q in ref
        )  # weak domination by some reference member
