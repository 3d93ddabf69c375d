"""Directional crossover, budgeted mutation and the shared repair."""

import numpy as np
import pytest

from conftest import appraisal, trap, wells_only_targets
from drillopt.model import PlanTargets, ProspectSet
from drillopt.operators import (
    DirectionContext,
    OperatorError,
    OperatorParams,
    dc_crossover,
    direction_scores,
    flip_gain,
    greedy_well_repair,
    make_direction_context,
    minmax_normalize,
    mutation_budget,
    region_bias,
    sam_mutation,
)

# ---------------------------------------------------------------------------
# Parameters and normalization
# ---------------------------------------------------------------------------


def test_params_validation():
    OperatorParams()  # defaults are valid
    OperatorParams(gamma=0.0)  # risk term may be disabled entirely
    with pytest.raises(OperatorError):
        OperatorParams(alpha=0.0)
    with pytest.raises(OperatorError):
        OperatorParams(gamma=-0.1)
    with pytest.raises(OperatorError):
        OperatorParams(k_bias=-1.0)
    with pytest.raises(OperatorError):
        OperatorParams(budget_ratio=0.0)
    with pytest.raises(OperatorError):
        OperatorParams(budget_ratio=1.0)
    with pytest.raises(OperatorError):
        OperatorParams(l_min=0)


def test_minmax_normalize_examples():
    out = minmax_normalize(np.array([1.0, 2.0, 3.0]))
    assert out == pytest.approx([0.0, 0.5, 1.0], abs=1e-8)
    assert np.all(minmax_normalize(np.array([4.0, 4.0, 4.0])) == 0.0)
    assert np.all(minmax_normalize(np.array([7.0])) == 0.0)
    assert minmax_normalize(np.array([])).size == 0


def test_minmax_normalize_range():
    rng = np.random.default_rng(0)
    for _ in range(20):
        u = rng.normal(size=rng.integers(1, 30)) * 100
        out = minmax_normalize(u)
        assert np.all(out >= 0.0) and np.all(out < 1.0)


# ---------------------------------------------------------------------------
# Regional bias
# ---------------------------------------------------------------------------


def test_region_bias_unmet_quota():
    ps = ProspectSet([trap("t1"), trap("t2"), trap("t3", region="B")])
    targets = PlanTargets(tot_wells=3, quota_trap={"A": 2})
    bias = region_bias(0, np.zeros(3, dtype=int), ps, targets, k_bias=0.3)
    assert bias == pytest.approx(0.6)
    # one region-A trap already in: shortfall drops to 1
    bias = region_bias(0, np.array([0, 1, 0]), ps, targets, k_bias=0.3)
    assert bias == pytest.approx(0.3)
    # quota met: no pull
    bias = region_bias(0, np.array([1, 1, 0]), ps, targets, k_bias=0.3)
    assert bias == 0.0
    # no quota for B traps at all
    assert region_bias(2, np.zeros(3, dtype=int), ps, targets, 0.3) == 0.0


def test_region_bias_zero_gain():
    ps = ProspectSet([trap("t1")])
    targets = PlanTargets(tot_wells=1, quota_trap={"A": 2})
    assert region_bias(0, np.zeros(1, dtype=int), ps, targets, 0.0) == 0.0


# ---------------------------------------------------------------------------
# Direction scores on a hand-built context
# ---------------------------------------------------------------------------


def _hand_context(rho=0.5, gamma=1.3, k_bias=0.0):
    return DirectionContext(
        rho=rho,
        gamma=gamma,
        k_bias=k_bias,
        g_hat=np.array([0.8, 0.0]),
        d_hat_plus=np.array([0.2, 0.0]),
        d_hat_minus=np.array([0.0, 0.5]),
        d_plus=np.zeros(2),
        d_minus=np.zeros(2),
        group_codes=np.array([0, 0]),
        quotas=np.array([0.0]),
        counts=np.array([0.0]),
    )


def test_direction_scores_hand_values():
    ctx = _hand_context()
    d1, d0 = direction_scores(0, ctx)
    # 0.5*0.8 - 0.5*1.3*0.2
    assert d1 == pytest.approx(0.27, abs=1e-12)
    assert d0 == pytest.approx(-0.4, abs=1e-12)
    d1, d0 = direction_scores(1, ctx)
    assert d1 == pytest.approx(0.0, abs=1e-12)
    # -0.5*0 - 0.5*1.3*0.5
    assert d0 == pytest.approx(-0.325, abs=1e-12)


def test_flip_gain_orientation():
    ctx = _hand_context()
    # unselected locus: gain of switching on is Direction(1)
    assert flip_gain(0, np.array([0, 1]), ctx) == pytest.approx(0.27)
    # selected locus: gain of switching off is -Direction(0)
    assert flip_gain(1, np.array([0, 1]), ctx) == pytest.approx(0.325)


def test_bias_enters_only_the_selected_direction():
    ctx = _hand_context(k_bias=0.3)
    ctx.quotas = np.array([2.0])
    d1, d0 = direction_scores(0, ctx)
    assert d1 == pytest.approx(0.27 + 0.6, abs=1e-12)
    assert d0 == pytest.approx(-0.4, abs=1e-12)


def test_make_direction_context_scope_masks_outside_loci(small_set):
    bits = np.array([1, 0, 1, 0, 0, 0])
    scope = np.array([1, 3])
    ctx = make_direction_context(
        bits, small_set, wells_only_targets(3), OperatorParams(), 0.5, scope
    )
    outside = np.array([0, 2, 4, 5])
    assert np.all(ctx.g_hat[outside] == 0.0)
    assert np.all(ctx.d_hat_plus[outside] == 0.0)
    # within the scope the larger return normalizes to the top of the range
    returns = small_set.returns
    assert ctx.g_hat[1] > ctx.g_hat[3] if returns[1] > returns[3] else True
    # counts reflect the current plan per (kind, region) group
    assert ctx.counts.sum() == bits.sum()


# ---------------------------------------------------------------------------
# Greedy well-count repair
# ---------------------------------------------------------------------------


def _repair_fixture():
    ps = ProspectSet(
        [
            trap("h", npv=900.0, pos=1.0, cost=0.0),
            trap("m", npv=500.0, pos=1.0, cost=0.0),
            trap("l", npv=100.0, pos=1.0, cost=0.0),
        ]
    )
    # rho = 1 makes the repair benefit the normalized return itself
    ctx = make_direction_context(
        np.zeros(3, dtype=int),
        ps,
        wells_only_targets(2),
        OperatorParams(),
        rho=1.0,
    )
    return ps, ctx


def test_repair_adds_best_benefit_first():
    ps, ctx = _repair_fixture()
    bits, ok = greedy_well_repair(
        np.zeros(3, dtype=int), np.arange(3), ctx, ps, target=2
    )
    assert ok
    assert bits.tolist() == [1, 1, 0]


def test_repair_releases_worst_benefit_first():
    ps, ctx = _repair_fixture()
    bits, ok = greedy_well_repair(
        np.ones(3, dtype=int), np.arange(3), ctx, ps, target=1
    )
    assert ok
    assert bits.tolist() == [1, 0, 0]


def test_repair_respects_candidate_set():
    ps, ctx = _repair_fixture()
    bits, ok = greedy_well_repair(
        np.zeros(3, dtype=int), np.array([2]), ctx, ps, target=2
    )
    assert not ok  # only one single-well candidate available
    assert bits.tolist() == [0, 0, 1]


def test_repair_never_releases_mandatory():
    ps = ProspectSet(
        [trap("keep", npv=10.0, mandatory=True), trap("drop", npv=900.0)]
    )
    ctx = make_direction_context(
        np.ones(2, dtype=int), ps, wells_only_targets(1), OperatorParams(), 0.5
    )
    bits, ok = greedy_well_repair(
        np.ones(2, dtype=int), np.arange(2), ctx, ps, target=1
    )
    assert ok
    assert bits.tolist() == [1, 0]


def test_repair_ignores_zero_well_loci():
    ps = ProspectSet([trap("t", wells=2), appraisal("a", wells=0)])
    ctx = make_direction_context(
        np.zeros(2, dtype=int), ps, wells_only_targets(2), OperatorParams(), 0.5
    )
    bits, ok = greedy_well_repair(
        np.zeros(2, dtype=int), np.arange(2), ctx, ps, target=2
    )
    assert ok
    assert bits.tolist() == [1, 0]


def test_repair_no_op_when_on_target():
    ps, ctx = _repair_fixture()
    start = np.array([0, 1, 1])
    bits, ok = greedy_well_repair(start, np.arange(3), ctx, ps, target=2)
    assert ok
    assert bits.tolist() == start.tolist()


# ---------------------------------------------------------------------------
# Directional crossover
# ---------------------------------------------------------------------------


def test_dc_identical_parents_pass_through(small_set):
    parent = np.array([1, 1, 0, 0, 0, 0])
    c1, c2 = dc_crossover(
        parent,
        parent.copy(),
        small_set,
        wells_only_targets(2),
        OperatorParams(),
        np.random.default_rng(0),
    )
    assert np.array_equal(c1, parent)
    assert np.array_equal(c2, parent)


def test_dc_children_agree_with_parents_on_common_loci(small_set):
    rng = np.random.default_rng(1)
    targets = wells_only_targets(3)
    params = OperatorParams()
    for _ in range(50):
        a = (rng.random(6) < 0.5).astype(int)
        b = (rng.random(6) < 0.5).astype(int)
        c1, c2 = dc_crossover(a, b, small_set, targets, params, rng)
        common = a == b
        assert np.array_equal(c1[common], a[common])
        assert np.array_equal(c2[common], a[common])


def test_dc_zero_gamma_zero_bias_selects_all_differing_loci():
    # With the risk term and regional bias disabled, the selected direction
    # dominates at every locus, so each differing locus flips on.
    ps = ProspectSet(
        [
            trap("t", npv=1000.0, wells=2),
            appraisal("a1", npv=800.0, wells=0),
            appraisal("a2", npv=500.0, wells=0),
            appraisal("a3", npv=200.0, wells=0),
        ]
    )
    targets = wells_only_targets(2)
    params = OperatorParams(gamma=0.0, k_bias=0.0)
    a = np.array([1, 1, 0, 0])
    b = np.array([1, 0, 1, 1])
    for seed in range(10):
        c1, c2 = dc_crossover(
            a, b, ps, targets, params, np.random.default_rng(seed)
        )
        assert c1.tolist() == [1, 1, 1, 1]
        assert c2.tolist() == [1, 1, 1, 1]


def test_dc_enforces_mandatory_and_well_target():
    ps = ProspectSet(
        [
            trap("must", npv=50.0, mandatory=True),
            trap("t1", npv=900.0),
            trap("t2", npv=600.0),
            trap("t3", npv=300.0),
        ]
    )
    targets = wells_only_targets(3)
    rng = np.random.default_rng(3)
    for _ in range(30):
        # both parents carry the mandatory pick and sit on the well target,
        # so the differing pool always has enough slack for the repair
        a = np.zeros(4, dtype=int)
        b = np.zeros(4, dtype=int)
        a[[0, *rng.choice([1, 2, 3], size=2, replace=False)]] = 1
        b[[0, *rng.choice([1, 2, 3], size=2, replace=False)]] = 1
        for child in dc_crossover(a, b, ps, targets, OperatorParams(), rng):
            assert child[0] == 1
            assert ps.wells @ child == 3


def test_dc_deterministic_given_rng_seed(small_set):
    a = np.array([1, 0, 1, 0, 1, 0])
    b = np.array([0, 1, 0, 1, 0, 1])
    targets = wells_only_targets(3)
    out1 = dc_crossover(
        a, b, small_set, targets, OperatorParams(), np.random.default_rng(7)
    )
    out2 = dc_crossover(
        a, b, small_set, targets, OperatorParams(), np.random.default_rng(7)
    )
    assert np.array_equal(out1[0], out2[0])
    assert np.array_equal(out1[1], out2[1])


def test_dc_bulk_children_always_valid(small_set):
    rng = np.random.default_rng(42)
    targets = wells_only_targets(3)
    params = OperatorParams()
    for _ in range(1000):
        a = (rng.random(6) < 0.5).astype(int)
        b = (rng.random(6) < 0.5).astype(int)
        for child in dc_crossover(a, b, small_set, targets, params, rng):
            small_set.check_bits(child)
            assert set(np.unique(child)) <= {0, 1}


# ---------------------------------------------------------------------------
# Structure-aware mutation
# ---------------------------------------------------------------------------


def test_mutation_budget_examples():
    params = OperatorParams()  # budget_ratio 0.05, l_min 1
    assert mutation_budget(30, params) == 2
    assert mutation_budget(10, params) == 1
    assert mutation_budget(3, OperatorParams(l_min=2)) == 2


def test_sam_tie_break_prefers_lower_index():
    # equal returns, empty plan: every locus scores identically, so the
    # stable descending order flips the lowest index within the budget
    ps = ProspectSet([trap(f"t{i}", npv=500.0, pos=0.5) for i in range(4)])
    out = sam_mutation(
        np.zeros(4, dtype=int),
        ps,
        wells_only_targets(1),
        OperatorParams(),
        np.random.default_rng(0),
    )
    assert out.tolist() == [1, 0, 0, 0]


def test_sam_respects_mandatory():
    ps = ProspectSet(
        [trap("must", npv=1.0, mandatory=True), trap("t1"), trap("t2")]
    )
    rng = np.random.default_rng(5)
    targets = wells_only_targets(2)
    for _ in range(50):
        bits = (rng.random(3) < 0.5).astype(int)
        bits[0] = 1
        out = sam_mutation(bits, ps, targets, OperatorParams(), rng)
        assert out[0] == 1


def test_sam_preserves_well_target():
    ps = ProspectSet([trap(f"t{i}", npv=100.0 * (i + 1)) for i in range(8)])
    rng = np.random.default_rng(11)
    targets = wells_only_targets(4)
    start = np.array([1, 1, 1, 1, 0, 0, 0, 0])
    for _ in range(200):
        out = sam_mutation(start, ps, targets, OperatorParams(), rng)
        assert ps.wells @ out == 4


def test_sam_deterministic_given_rng_seed(small_set):
    bits = np.array([1, 0, 1, 0, 0, 1])
    targets = wells_only_targets(3)
    a = sam_mutation(
        bits, small_set, targets, OperatorParams(), np.random.default_rng(3)
    )
    b = sam_mutation(
        bits, small_set, targets, OperatorParams(), np.random.default_rng(3)
    )
    assert np.array_equal(a, b)


def test_sam_does_not_mutate_input(small_set):
    bits = np.array([1, 0, 1, 0, 0, 1])
    frozen = bits.copy()
    sam_mutation(
        bits,
        small_set,
        wells_only_targets(3),
        OperatorParams(),
        np.random.default_rng(0),
    )
    assert np.array_equal(bits, frozen)


def test_sam_bulk_outputs_always_valid(small_set):
    rng = np.random.default_rng(13)
    targets = wells_only_targets(3)
    params = OperatorParams()
    for _ in range(1000):
        bits = (rng.random(6) < 0.5).astype(int)
        out = sam_mutation(bits, small_set, targets, params, rng)
        small_set.check_bits(out)
