"""Derive program-level targets from the candidate set itself.

Published inputs fix only the well-count target; the remaining floors,
budgets and quotas are calibrated against what uniformly random well-exact
portfolios achieve, so they bite without emptying the feasible region.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import TRAP, PlanTargets, ProspectSet, evaluate_constraints


def random_portfolio(
    prospects: ProspectSet, tot_wells: int, rng: np.random.Generator
) -> np.ndarray | None:
    """Draw one random plan hitting the well target exactly.

    Starts from the mandatory set, then walks the remaining projects in
    random order, including each with probability 1/2 unless it would
    overshoot the target.  Zero-well projects never overshoot, so they are
    simple coin flips.  Returns None when the walk ends short of the target
    (the caller just redraws).
    """
    bits = prospects.mandatory.astype(np.int8).copy()
    total = int(prospects.wells[bits.astype(bool)].sum())
    if total > tot_wells:
        return None
    order = rng.permutation(np.flatnonzero(bits == 0))
    for i in order:
        w = int(prospects.wells[i])
        if total + w > tot_wells:
            continue
        if rng.random() < 0.5:
            bits[i] = 1
            total += w
    return bits if total == tot_wells else None


@dataclass(frozen=True)
class Calibration:
    """Derived targets plus the evidence they leave room to plan in.

    ``witness`` is one plan satisfying every derived constraint at once;
    ``feasible_rate`` is the (often tiny) fraction of the raw calibration
    samples doing so; ``floor_percentile`` is the (possibly relaxed)
    percentile the floors ended up at.
    """

    targets: PlanTargets
    witness: np.ndarray
    feasible_rate: float
    floor_percentile: float
    n_samples: int
    seed: int


def derive_plan_targets(
    prospects: ProspectSet,
    tot_wells: int,
    *,
    percentile: float = 60.0,
    thre_well: float = 0.35,
    n_samples: int = 2000,
    seed: int = 20240,
) -> Calibration:
    """Calibrate floors, caps and quotas from random well-exact portfolios.

    Every bound sits at the given percentile of the sampled achievement
    distribution: reserve floors and the mean-success floor demand what the
    top 40% of random plans deliver (rounded down to one decimal), the cost
    and low-success caps allow what 60% of random plans stay within (rounded
    up).  Regional quotas take the per-group 25th-percentile selection
    counts so every commonly covered region keeps a presence.

    Individually mild bounds can still intersect to a region random
    sampling essentially never hits, so nonemptiness is certified by a
    greedy witness search (hill-climbing on total violation from the best
    sample, using well-count-preserving swaps); only if that also fails are
    the floors relaxed in 5-point percentile steps until a witness exists.
    """
    rng = np.random.default_rng(seed)
    samples = []
    while len(samples) < n_samples:
        bits = random_portfolio(prospects, tot_wells, rng)
        if bits is not None:
            samples.append(bits)
    pop = np.array(samples)  # (n_samples, n)
    sel = pop.astype(bool)
    trap_sel = sel & prospects.is_trap
    app_sel = sel & ~prospects.is_trap

    pred_oil = trap_sel @ prospects.pre_or
    pred_gas = trap_sel @ prospects.pre_gr
    cont_oil = app_sel @ prospects.cor
    cont_gas = app_sel @ prospects.cgr
    prov_oil = app_sel @ prospects.pro_or
    prov_gas = app_sel @ prospects.pro_gr
    wells_sel = sel @ prospects.wells
    mean_pos = (sel @ (prospects.pos * prospects.wells)) / np.maximum(
        wells_sel, 1
    )
    low_counts = (sel & (prospects.pos < thre_well)).sum(axis=1)
    cost_trap = trap_sel @ prospects.cost
    cost_app = app_sel @ prospects.cost

    pct = lambda values, q: float(np.percentile(values, q))
    down = lambda v: float(np.floor(v * 10) / 10)
    up = lambda v: float(np.ceil(v * 10) / 10)

    quota_trap: dict[str, int] = {}
    quota_appraisal: dict[str, int] = {}
    for g, (kind, region) in enumerate(prospects.group_keys):
        group_counts = sel[:, prospects.group_codes == g].sum(axis=1)
        q = int(np.floor(np.percentile(group_counts, 25)))
        if q > 0:
            (quota_trap if kind == TRAP else quota_appraisal)[region] = q

    def build(floor_pct: float) -> PlanTargets:
        return PlanTargets(
            tot_wells=tot_wells,
            pred_lb_oil=down(pct(pred_oil, floor_pct)),
            pred_lb_gas=down(pct(pred_gas, floor_pct)),
            cont_lb_oil=down(pct(cont_oil, floor_pct)),
            cont_lb_gas=down(pct(cont_gas, floor_pct)),
            prov_lb_oil=down(pct(prov_oil, floor_pct)),
            prov_lb_gas=down(pct(prov_gas, floor_pct)),
            drill_lb=float(np.floor(pct(mean_pos, floor_pct) * 1000) / 1000),
            thre_well=thre_well,
            l_ub=float(np.ceil(pct(low_counts, percentile))),
            cost_ub_trap=up(pct(cost_trap, percentile)),
            cost_ub_appraisal=up(pct(cost_app, percentile)),
            quota_trap=quota_trap,
            quota_appraisal=quota_appraisal,
        )

    floor_pct = percentile
    while True:
        targets = build(floor_pct)
        violations = np.array(
            [
                evaluate_constraints(bits, prospects, targets).total_violation
                for bits in pop
            ]
        )
        witness = _greedy_witness(
            pop[int(np.argmin(violations))], prospects, targets
        )
        if witness is not None or floor_pct <= 5.0:
            break
        floor_pct -= 5.0
    return Calibration(
        targets,
        witness if witness is not None else pop[int(np.argmin(violations))],
        float((violations == 0.0).mean()),
        floor_pct,
        n_samples,
        seed,
    )


def _greedy_witness(
    start: np.ndarray, prospects: ProspectSet, targets: PlanTargets
) -> np.ndarray | None:
    """Hill-climb to a fully feasible plan, or None if stuck in a local
    minimum.  Moves preserve the exact well count: toggling a zero-well
    project, or swapping a selected project for an unselected one of equal
    well count.  Mandatory selections are never dropped."""
    bits = start.copy()
    score = evaluate_constraints(bits, prospects, targets).total_violation
    while score > 0.0:
        best_move: tuple[int, ...] | None = None
        best_score = score
        moves: list[tuple[int, ...]] = []
        for i in np.flatnonzero(prospects.wells == 0):
            if not (prospects.mandatory[i] and bits[i] == 1):
                moves.append((i,))
        out_mask = bits == 0
        for w in np.unique(prospects.wells[prospects.wells > 0]):
            ins = np.flatnonzero(
                (bits == 1) & (prospects.wells == w) & ~prospects.mandatory
            )
            outs = np.flatnonzero(out_mask & (prospects.wells == w))
            moves.extend((i, j) for i in ins for j in outs)
        for move in moves:
            for i in move:
                bits[i] = 1 - bits[i]
            trial = evaluate_constraints(
                bits, prospects, targets
            ).total_violation
            if trial < best_score:
                best_score, best_move = trial, move
            for i in move:
                bits[i] = 1 - bits[i]
        if best_move is None:
            return None
        for i in best_move:
            bits[i] = 1 - bits[i]
        score = best_score
    return bits
