"""Variation operators that sense the portfolio structure.

Both operators score each locus with a directional signal blending the
project's normalized expected return against the O(1) change its flip would
cause in the plan's risk statistic, plus a bias toward under-covered regions.
The crossover recombines only the loci where the parents disagree; the
mutation flips a small budgeted set of the highest-gain loci.  Every product
of either operator is pushed back toward validity by mandatory-bit
enforcement and a shared greedy well-count repair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import PlanTargets, ProspectSet

__all__ = [
    "OperatorError",
    "OperatorParams",
    "DirectionContext",
    "minmax_normalize",
    "region_bias",
    "make_direction_context",
    "direction_scores",
    "flip_gain",
    "greedy_well_repair",
    "dc_crossover",
    "sam_mutation",
]


class OperatorError(ValueError):
    """Invalid operator input."""


@dataclass(frozen=True)
class OperatorParams:
    """Tuning knobs of the directional machinery.

    ``alpha`` shapes the Beta draw of the return/risk blend, ``gamma``
    scales the risk term, ``k_bias`` scales the regional-coverage bias,
    ``budget_ratio`` and ``l_min`` size the mutation budget.
    """

    alpha: float = 0.7
    gamma: float = 1.3
    k_bias: float = 0.3
    budget_ratio: float = 0.05
    l_min: int = 1
    eps: float = 1e-9

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise OperatorError("alpha must be positive")
        if self.gamma < 0:
            raise OperatorError("gamma must be non-negative")
        if self.k_bias < 0:
            raise OperatorError("k_bias must be non-negative")
        if not 0.0 < self.budget_ratio < 1.0:
            raise OperatorError("budget_ratio must lie in (0, 1)")
        if self.l_min < 1:
            raise OperatorError("l_min must be at least 1")
        if self.eps <= 0:
            raise OperatorError("eps must be positive")


def minmax_normalize(u: np.ndarray, eps: float = 1e-9) -> np.ndarray:
    """Scale a vector into [0, 1) as (u - min) / (max - min + eps).

    An all-equal vector (including a singleton) maps to all zeros.
    """
    u = np.asarray(u, dtype=float)
    if u.size == 0:
        return u.copy()
    lo = float(u.min())
    hi = float(u.max())
    return (u - lo) / (hi - lo + eps)


def region_bias(
    i: int,
    bits: np.ndarray,
    prospects: ProspectSet,
    targets: PlanTargets,
    k_bias: float,
) -> float:
    """Pull toward locus i's region while its coverage quota is unmet.

    k * max(0, quota - current selected count in the locus's (kind, region)
    group); zero once the quota is satisfied.
    """
    bits = prospects.check_bits(bits)
    code = prospects.group_codes[i]
    quota = prospects.group_quotas(targets)[code]
    count = int(bits[prospects.group_codes == code].sum())
    return k_bias * max(0.0, quota - count)


# ---------------------------------------------------------------------------
# Direction scoring
# ---------------------------------------------------------------------------


@dataclass
class DirectionContext:
    """Per-locus scoring ingredients for one operator invocation.

    ``g_hat``/``d_hat_plus``/``d_hat_minus`` are normalized over the
    invocation's scope (the differing loci for the crossover, every locus for
    the mutation); ``d_plus``/``d_minus`` keep the raw risk deltas so the
    repair step can re-normalize within its own candidate pools.  ``counts``
    tracks the current selected count per (kind, region) group and is the
    only mutable piece.
    """

    rho: float
    gamma: float
    k_bias: float
    g_hat: np.ndarray
    d_hat_plus: np.ndarray
    d_hat_minus: np.ndarray
    d_plus: np.ndarray
    d_minus: np.ndarray
    group_codes: np.ndarray
    quotas: np.ndarray
    counts: np.ndarray
    eps: float = 1e-9


def _selection_stats(bits: np.ndarray, returns: np.ndarray) -> tuple[int, float, float]:
    v = returns[bits.astype(bool)]
    if v.size == 0:
        return 0, 0.0, 0.0
    mu = float(v.mean())
    m = float(((v - mu) ** 2).sum())
    return int(v.size), mu, max(m, 0.0)


def _delta_vectors(
    count: int, mu: float, m: float, g: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized M-deltas for hypothetical add (>= 0) / remove (<= 0)."""
    dev2 = (g - mu) ** 2
    d_plus = dev2 * (count / (count + 1)) if count >= 1 else np.zeros_like(g)
    if count >= 2:
        d_minus = -dev2 * (count / (count - 1))
    elif count == 1:
        d_minus = np.full_like(g, -m)
    else:
        d_minus = np.zeros_like(g)
    return d_plus, d_minus


def make_direction_context(
    bits: np.ndarray,
    prospects: ProspectSet,
    targets: PlanTargets,
    params: OperatorParams,
    rho: float,
    scope: np.ndarray | None = None,
) -> DirectionContext:
    """Build the scoring context for the current plan.

    ``scope`` limits which loci the normalizations run over (entries outside
    it are left at zero); by default every locus is in scope.
    """
    bits = prospects.check_bits(bits)
    count, mu, m = _selection_stats(bits, prospects.returns)
    d_plus_raw, d_minus_raw = _delta_vectors(count, mu, m, prospects.returns)

    n = prospects.n
    g_hat = np.zeros(n)
    d_hat_plus = np.zeros(n)
    d_hat_minus = np.zeros(n)
    d_plus = np.zeros(n)
    d_minus = np.zeros(n)
    idx = np.arange(n) if scope is None else np.asarray(scope, dtype=int)
    if idx.size:
        g_hat[idx] = minmax_normalize(prospects.returns[idx], params.eps)
        d_hat_plus[idx] = minmax_normalize(d_plus_raw[idx], params.eps)
        d_hat_minus[idx] = minmax_normalize(d_minus_raw[idx], params.eps)
        d_plus[idx] = d_plus_raw[idx]
        d_minus[idx] = d_minus_raw[idx]

    counts = np.bincount(
        prospects.group_codes[bits.astype(bool)],
        minlength=len(prospects.group_keys),
    ).astype(float)
    return DirectionContext(
        rho=rho,
        gamma=params.gamma,
        k_bias=params.k_bias,
        g_hat=g_hat,
        d_hat_plus=d_hat_plus,
        d_hat_minus=d_hat_minus,
        d_plus=d_plus,
        d_minus=d_minus,
        group_codes=prospects.group_codes,
        quotas=prospects.group_quotas(targets),
        counts=counts,
        eps=params.eps,
    )


def _bias_at(ctx: DirectionContext, i: int) -> float:
    code = ctx.group_codes[i]
    return ctx.k_bias * max(0.0, float(ctx.quotas[code] - ctx.counts[code]))


def direction_scores(i: int, ctx: DirectionContext) -> tuple[float, float]:
    """Desirability of locus i being selected vs. unselected.

    Direction(1) = rho*g_hat - (1-rho)*gamma*d_hat_plus + bias;
    Direction(0) = -rho*g_hat - (1-rho)*gamma*d_hat_minus.
    """
    risk_w = (1.0 - ctx.rho) * ctx.gamma
    d1 = ctx.rho * ctx.g_hat[i] - risk_w * ctx.d_hat_plus[i] + _bias_at(ctx, i)
    d0 = -ctx.rho * ctx.g_hat[i] - risk_w * ctx.d_hat_minus[i]
    return d1, d0


def flip_gain(i: int, bits: np.ndarray, ctx: DirectionContext) -> float:
    """Unified gain of flipping locus i: Direction(1) when currently 0,
    -Direction(0) when currently 1."""
    d1, d0 = direction_scores(i, ctx)
    return d1 if bits[i] == 0 else -d0


# ---------------------------------------------------------------------------
# Greedy well-count repair
# ---------------------------------------------------------------------------


def greedy_well_repair(
    bits: np.ndarray,
    candidates: np.ndarray,
    ctx: DirectionContext,
    prospects: ProspectSet,
    target: int,
    *,
    include_bias: bool = True,
) -> tuple[np.ndarray, bool]:
    """Drive the plan's well count to ``target`` with greedy benefit flips.

    With a deficit, unselected candidates holding at least one well are
    switched on in descending unit-well benefit order; a remaining surplus
    (possible when a multi-well switch overshoots) is then released in
    ascending order.  The benefit blends the context's normalized returns
    with the raw risk deltas re-normalized within each phase's candidate
    pool, plus (for the crossover path) the regional bias.  Mandatory loci
    are never switched off.  Returns the repaired plan and whether the
    target was met exactly.
    """
    bits = prospects.check_bits(bits).copy()
    cand_mask = np.zeros(prospects.n, dtype=bool)
    cand_mask[np.asarray(candidates, dtype=int)] = True
    cand_mask &= prospects.wells >= 1
    risk_w = (1.0 - ctx.rho) * ctx.gamma

    def phase(adding: bool) -> None:
        nonlocal delta
        if adding:
            pool = np.flatnonzero(cand_mask & (bits == 0))
            d_raw = ctx.d_plus
        else:
            pool = np.flatnonzero(
                cand_mask & (bits == 1) & ~prospects.mandatory
            )
            d_raw = ctx.d_minus
        if pool.size == 0:
            return
        benefit = ctx.rho * ctx.g_hat[pool] - risk_w * minmax_normalize(
            d_raw[pool], ctx.eps
        )
        if include_bias:
            benefit = benefit + np.array([_bias_at(ctx, i) for i in pool])
        key = benefit / np.maximum(1, prospects.wells[pool])
        order = pool[np.argsort(-key if adding else key, kind="stable")]
        for i in order:
            if (delta <= 0) if adding else (delta >= 0):
                break
            if adding:
                bits[i] = 1
                delta -= int(prospects.wells[i])
                ctx.counts[ctx.group_codes[i]] += 1
            else:
                bits[i] = 0
                delta += int(prospects.wells[i])
                ctx.counts[ctx.group_codes[i]] -= 1

    delta = target - int(prospects.wells @ bits)
    if delta > 0:
        phase(adding=True)
    if delta < 0:
        phase(adding=False)
    return bits, delta == 0


def _enforce_mandatory(bits: np.ndarray, ctx: DirectionContext, prospects: ProspectSet) -> None:
    missing = np.flatnonzero(prospects.mandatory & (bits == 0))
    for i in missing:
        bits[i] = 1
        ctx.counts[ctx.group_codes[i]] += 1


# ---------------------------------------------------------------------------
# Directional crossover
# ---------------------------------------------------------------------------


def _directional_child(
    base: np.ndarray,
    other: np.ndarray,
    rho: float,
    prospects: ProspectSet,
    targets: PlanTargets,
    params: OperatorParams,
) -> np.ndarray:
    differing = np.flatnonzero(base != other)
    child = base.copy()
    ctx = make_direction_context(
        child, prospects, targets, params, rho, scope=differing
    )
    # Decide each differing locus in index order; the regional counts track
    # decisions already made, the risk deltas stay as computed up front.
    for i in differing:
        d1, d0 = direction_scores(i, ctx)
        new = 1 if d1 >= d0 else 0
        if new != child[i]:
            ctx.counts[ctx.group_codes[i]] += new - child[i]
            child[i] = new
    _enforce_mandatory(child, ctx, prospects)
    child, _ = greedy_well_repair(
        child, differing, ctx, prospects, targets.tot_wells, include_bias=True
    )
    return child


def dc_crossover(
    parent_a: np.ndarray,
    parent_b: np.ndarray,
    prospects: ProspectSet,
    targets: PlanTargets,
    params: OperatorParams,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Directional recombination of two plans.

    Only loci where the parents disagree are re-decided, each by comparing
    the selected/unselected direction scores under a shared Beta(alpha,
    alpha) return/risk blend rho.  The first child starts from parent A with
    rho, the second from parent B with 1 - rho.  Identical parents pass
    through unchanged (up to enforcement and repair).
    """
    a = prospects.check_bits(parent_a)
    b = prospects.check_bits(parent_b)
    rho = float(rng.beta(params.alpha, params.alpha))
    child1 = _directional_child(a, b, rho, prospects, targets, params)
    child2 = _directional_child(b, a, 1.0 - rho, prospects, targets, params)
    return child1, child2


# ---------------------------------------------------------------------------
# Structure-aware mutation
# ---------------------------------------------------------------------------


def mutation_budget(n: int, params: OperatorParams) -> int:
    """Flip budget L = max(l_min, ceil(budget_ratio * n))."""
    return max(params.l_min, math.ceil(params.budget_ratio * n))


def sam_mutation(
    bits: np.ndarray,
    prospects: ProspectSet,
    targets: PlanTargets,
    params: OperatorParams,
    rng: np.random.Generator,
) -> np.ndarray:
    """Budgeted directional mutation.

    Scores every locus with the unified flip gain and flips exactly the
    top-L (ties to the lower index).  Mandatory loci that are already
    selected are not flip candidates -- unpicking them would be undone by
    the enforcement step.  Enforcement and well repair (over the natural
    add/remove pools, without the regional bias) follow.
    """
    x = prospects.check_bits(bits).copy()
    rho = float(rng.beta(params.alpha, params.alpha))
    ctx = make_direction_context(x, prospects, targets, params, rho)

    risk_w = (1.0 - rho) * ctx.gamma
    bias_vec = ctx.k_bias * np.maximum(
        0.0, ctx.quotas[ctx.group_codes] - ctx.counts[ctx.group_codes]
    )
    d1 = rho * ctx.g_hat - risk_w * ctx.d_hat_plus + bias_vec
    d0 = -rho * ctx.g_hat - risk_w * ctx.d_hat_minus
    phi = np.where(x == 0, d1, -d0)

    flippable = ~(prospects.mandatory & (x == 1))
    order = np.argsort(-phi, kind="stable")
    order = order[flippable[order]]
    budget = mutation_budget(prospects.n, params)
    chosen = order[:budget]
    x[chosen] = 1 - x[chosen]
    np.add.at(ctx.counts, ctx.group_codes[chosen], 2.0 * x[chosen] - 1.0)

    _enforce_mandatory(x, ctx, prospects)
    x, _ = greedy_well_repair(
        x,
        np.arange(prospects.n),
        ctx,
        prospects,
        targets.tot_wells,
        include_bias=False,
    )
    return x
