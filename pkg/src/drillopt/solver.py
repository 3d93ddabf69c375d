"""Elitist constrained genetic search over drilling plans.

Two-objective (maximize EMV, minimize deviation risk) binary search with
feasibility-first domination: a feasible plan beats any infeasible one,
infeasible plans compare by total constraint violation, feasible plans by
Pareto order.  The ``oe`` variant recombines with the directional crossover
and mutates with the structure-aware operator; the ``baseline`` variant uses
uniform crossover and independent bit flips, with identical initialization,
mandatory-bit enforcement and well-count repair, so a comparison between the
two isolates the operator design.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import metrics
from .model import Chromosome, PlanTargets, ProspectSet
from .operators import (
    OperatorParams,
    dc_crossover,
    greedy_well_repair,
    make_direction_context,
    sam_mutation,
)

VARIANTS = ("oe", "baseline")


class ConfigurationError(ValueError):
    """The run configuration cannot produce a valid search."""


@dataclass(frozen=True)
class SolverConfig:
    pop_size: int = 100
    generations: int = 500
    seed: int = 0
    variant: str = "oe"
    params: OperatorParams = field(default_factory=OperatorParams)
    crossover_prob: float = 0.9
    mutation_prob: float = 0.05

    def __post_init__(self) -> None:
        if self.pop_size < 4 or self.pop_size % 2:
            raise ConfigurationError("pop_size must be an even number >= 4")
        if self.generations < 1:
            raise ConfigurationError("generations must be >= 1")
        if self.variant not in VARIANTS:
            raise ConfigurationError(
                f"variant must be one of {VARIANTS}, got {self.variant!r}"
            )
        if not 0.0 <= self.crossover_prob <= 1.0:
            raise ConfigurationError("crossover_prob must lie in [0, 1]")
        if not 0.0 <= self.mutation_prob <= 1.0:
            raise ConfigurationError("mutation_prob must lie in [0, 1]")


# ---------------------------------------------------------------------------
# Constrained domination and ranking
# ---------------------------------------------------------------------------


def dominates(
    a: np.ndarray,
    b: np.ndarray,
    violation_a: float = 0.0,
    violation_b: float = 0.0,
) -> bool:
    """Feasibility-first domination on canonical min-min objective pairs."""
    feas_a = violation_a == 0.0
    feas_b = violation_b == 0.0
    if feas_a != feas_b:
        return feas_a
    if not feas_a:
        return violation_a < violation_b
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return bool((a <= b).all() and (a < b).any())


def _domination_matrix(
    objectives: np.ndarray, violations: np.ndarray
) -> np.ndarray:
    """dom[i, j] is True when individual i dominates individual j."""
    f = np.asarray(objectives, dtype=float)
    v = np.asarray(violations, dtype=float)
    le = (f[:, None, :] <= f[None, :, :]).all(axis=2)
    lt = (f[:, None, :] < f[None, :, :]).any(axis=2)
    pareto = le & lt
    feas = v == 0.0
    both_feas = feas[:, None] & feas[None, :]
    both_inf = ~feas[:, None] & ~feas[None, :]
    dom = np.where(both_feas, pareto, False)
    dom |= both_inf & (v[:, None] < v[None, :])
    dom |= feas[:, None] & ~feas[None, :]
    return dom


def fast_nondominated_sort(
    objectives: np.ndarray, violations: np.ndarray | None = None
) -> list[np.ndarray]:
    """Peel the population into ranked fronts.

    Returns index arrays; every individual lands in exactly one front and
    nothing in a later front dominates anything in an earlier one.
    """
    f = np.asarray(objectives, dtype=float)
    n = f.shape[0]
    if n == 0:
        return []
    v = (
        np.zeros(n)
        if violations is None
        else np.asarray(violations, dtype=float)
    )
    dom = _domination_matrix(f, v)
    n_dominators = dom.sum(axis=0)
    fronts: list[np.ndarray] = []
    assigned = np.zeros(n, dtype=bool)
    while not assigned.all():
        current = np.flatnonzero((n_dominators == 0) & ~assigned)
        if current.size == 0:  # numeric safety; cannot happen with a DAG
            current = np.flatnonzero(~assigned)
        fronts.append(current)
        assigned[current] = True
        n_dominators = n_dominators - dom[current, :].sum(axis=0)
    return fronts


def crowding_distance(objectives: np.ndarray) -> np.ndarray:
    """Within-front crowding: boundary points get +inf, interior points the
    normalized gap between their neighbors summed over objectives."""
    f = np.asarray(objectives, dtype=float)
    n = f.shape[0]
    dist = np.zeros(n)
    if n <= 2:
        return np.full(n, np.inf)
    for k in range(f.shape[1]):
        order = np.argsort(f[:, k], kind="stable")
        col = f[order, k]
        span = col[-1] - col[0]
        dist[order[0]] = dist[order[-1]] = np.inf
        if span > 0:
            gaps = (col[2:] - col[:-2]) / span
            dist[order[1:-1]] += gaps
    return dist


def _rank_and_crowd(
    objectives: np.ndarray, violations: np.ndarray
) -> tuple[np.ndarray, np.ndarray, list[np.ndarray]]:
    fronts = fast_nondominated_sort(objectives, violations)
    ranks = np.empty(objectives.shape[0], dtype=int)
    crowd = np.empty(objectives.shape[0])
    for r, front in enumerate(fronts):
        ranks[front] = r
        crowd[front] = crowding_distance(objectives[front])
    return ranks, crowd, fronts


# ---------------------------------------------------------------------------
# Vectorized evaluation
# ---------------------------------------------------------------------------


class _Evaluator:
    """Precomputed matrices for whole-population objective/violation scoring.

    Violation terms mirror the per-family normalization of
    ``ConstraintReport.total_violation`` exactly.
    """

    def __init__(self, prospects: ProspectSet, targets: PlanTargets):
        self.prospects = prospects
        self.targets = targets
        self.v = prospects.returns
        self.v2 = self.v**2
        self.pos_wells = prospects.pos * prospects.wells
        self.low_pos = (prospects.pos < targets.thre_well).astype(float)
        self.cost_trap = prospects.cost * prospects.is_trap
        self.cost_app = prospects.cost * ~prospects.is_trap
        n_groups = len(prospects.group_keys)
        self.onehot = np.zeros((prospects.n, n_groups))
        self.onehot[np.arange(prospects.n), prospects.group_codes] = 1.0
        self.quotas = prospects.group_quotas(targets)
        self.floors = [
            (prospects.pre_or, targets.pred_lb_oil),
            (prospects.pre_gr, targets.pred_lb_gas),
            (prospects.cor, targets.cont_lb_oil),
            (prospects.cgr, targets.cont_lb_gas),
            (prospects.pro_or, targets.prov_lb_oil),
            (prospects.pro_gr, targets.prov_lb_gas),
        ]

    def __call__(
        self, pop: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Returns (canonical objectives, violations, emv, risk)."""
        b = pop.astype(float)
        t = self.targets
        p = self.prospects

        emv = b @ p.emv_contrib
        count = b.sum(axis=1)
        s1 = b @ self.v
        s2 = b @ self.v2
        with np.errstate(invalid="ignore", divide="ignore"):
            m = s2 - np.where(count > 0, s1**2 / np.maximum(count, 1), 0.0)
        risk = np.sqrt(np.maximum(m, 0.0))
        risk[count <= 1] = 0.0

        wells = b @ p.wells
        cv = np.abs(wells - t.tot_wells) / max(1.0, t.tot_wells)
        for values, bound in self.floors:
            if bound > 0.0:
                cv += np.maximum(0.0, bound - b @ values) / max(
                    1.0, abs(bound)
                )
        if t.drill_lb > 0.0:
            mean_pos = np.where(
                wells > 0, (b @ self.pos_wells) / np.maximum(wells, 1), 0.0
            )
            cv += np.maximum(0.0, t.drill_lb - mean_pos)
        if math.isfinite(t.l_ub):
            cv += np.maximum(0.0, b @ self.low_pos - t.l_ub) / max(1.0, t.l_ub)
        if math.isfinite(t.cost_ub_trap):
            cv += np.maximum(0.0, b @ self.cost_trap - t.cost_ub_trap) / max(
                1.0, t.cost_ub_trap
            )
        if math.isfinite(t.cost_ub_appraisal):
            cv += np.maximum(
                0.0, b @ self.cost_app - t.cost_ub_appraisal
            ) / max(1.0, t.cost_ub_appraisal)
        if self.quotas.sum() > 0:
            counts = b @ self.onehot
            shortfall = np.maximum(0.0, self.quotas[None, :] - counts).sum(
                axis=1
            )
            cv += shortfall / max(1.0, self.quotas.sum())

        objectives = np.column_stack([-emv, risk])
        return objectives, cv, emv, risk


# ---------------------------------------------------------------------------
# Variation pipelines
# ---------------------------------------------------------------------------


def _repair_individual(
    bits: np.ndarray,
    prospects: ProspectSet,
    targets: PlanTargets,
    params: OperatorParams,
    rng: np.random.Generator,
) -> np.ndarray:
    """Mandatory enforcement plus greedy repair over all loci (shared by
    initialization and the baseline variant)."""
    x = bits.copy()
    x[prospects.mandatory] = 1
    rho = float(rng.beta(params.alpha, params.alpha))
    ctx = make_direction_context(x, prospects, targets, params, rho)
    x, _ = greedy_well_repair(
        x, np.arange(prospects.n), ctx, prospects, targets.tot_wells
    )
    return x


def _initial_population(
    prospects: ProspectSet,
    targets: PlanTargets,
    config: SolverConfig,
) -> np.ndarray:
    root = np.random.SeedSequence([config.seed, 0])
    pop = np.empty((config.pop_size, prospects.n), dtype=np.int8)
    for i, child_seed in enumerate(root.spawn(config.pop_size)):
        rng = np.random.default_rng(child_seed)
        bits = (rng.random(prospects.n) < 0.5).astype(np.int8)
        pop[i] = _repair_individual(bits, prospects, targets, config.params, rng)
    return pop


def _uniform_crossover(
    a: np.ndarray, b: np.ndarray, prob: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    c1, c2 = a.copy(), b.copy()
    if rng.random() < prob:
        swap = rng.random(a.size) < 0.5
        c1[swap], c2[swap] = b[swap], a[swap]
    return c1, c2


def _bitflip(
    bits: np.ndarray, pm: float, rng: np.random.Generator
) -> np.ndarray:
    flips = rng.random(bits.size) < pm
    out = bits.copy()
    out[flips] = 1 - out[flips]
    return out


def _make_offspring(
    parents: np.ndarray,
    prospects: ProspectSet,
    targets: PlanTargets,
    config: SolverConfig,
    generation: int,
) -> np.ndarray:
    """One generation's offspring from the mated parent rows.

    Every operator invocation draws from its own sub-stream keyed by
    (seed, generation, invocation), so runs are reproducible regardless of
    evaluation batching.
    """
    n_pairs = parents.shape[0] // 2
    streams = np.random.SeedSequence([config.seed, generation]).spawn(
        n_pairs + parents.shape[0]
    )
    out = np.empty_like(parents)
    for pair in range(n_pairs):
        a, b = parents[2 * pair], parents[2 * pair + 1]
        pair_rng = np.random.default_rng(streams[pair])
        if config.variant == "oe":
            c1, c2 = dc_crossover(
                a, b, prospects, targets, config.params, pair_rng
            )
            for slot, child in ((2 * pair, c1), (2 * pair + 1, c2)):
                child_rng = np.random.default_rng(streams[n_pairs + slot])
                out[slot] = sam_mutation(
                    child, prospects, targets, config.params, child_rng
                )
        else:
            c1, c2 = _uniform_crossover(a, b, config.crossover_prob, pair_rng)
            for slot, child in ((2 * pair, c1), (2 * pair + 1, c2)):
                child_rng = np.random.default_rng(streams[n_pairs + slot])
                mutated = _bitflip(child, config.mutation_prob, child_rng)
                out[slot] = _repair_individual(
                    mutated, prospects, targets, config.params, child_rng
                )
    return out


def _tournament(
    ranks: np.ndarray,
    crowd: np.ndarray,
    count: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Binary tournaments on (rank, crowding); exact ties settled by coin."""
    c1 = rng.integers(0, ranks.size, size=count)
    c2 = rng.integers(0, ranks.size, size=count)
    first_wins = (ranks[c1] < ranks[c2]) | (
        (ranks[c1] == ranks[c2]) & (crowd[c1] > crowd[c2])
    )
    tie = (ranks[c1] == ranks[c2]) & (crowd[c1] == crowd[c2])
    coin = rng.random(count) < 0.5
    return np.where(first_wins | (tie & coin), c1, c2)


# ---------------------------------------------------------------------------
# Run loop
# ---------------------------------------------------------------------------


@dataclass
class RunResult:
    """Everything a run produced.

    ``front`` is the final population's rank-0 set, deduplicated by plan and
    deterministically ordered (descending EMV, ascending risk).  ``hv_trace``
    is the per-generation hypervolume of the best-so-far feasible archive
    under one fixed reference point, so it is non-decreasing.
    """

    front: list[Chromosome]
    population: np.ndarray
    emv: np.ndarray
    risk: np.ndarray
    violations: np.ndarray
    hv_trace: np.ndarray
    archive_points: np.ndarray
    config: SolverConfig
    wall_time: float
    evaluations: int


def _validate_problem(
    prospects: ProspectSet, targets: PlanTargets
) -> None:
    mandatory_wells = int(prospects.wells[prospects.mandatory].sum())
    if mandatory_wells > targets.tot_wells:
        raise ConfigurationError(
            f"mandatory projects already hold {mandatory_wells} wells, more "
            f"than the {targets.tot_wells}-well target"
        )
    if int(prospects.wells.sum()) < targets.tot_wells:
        raise ConfigurationError(
            f"only {int(prospects.wells.sum())} wells available across all "
            f"projects, cannot hit the {targets.tot_wells}-well target"
        )


def run(
    prospects: ProspectSet, targets: PlanTargets, config: SolverConfig
) -> RunResult:
    """Run the configured variant and return the final front plus history."""
    _validate_problem(prospects, targets)
    evaluate = _Evaluator(prospects, targets)
    started = time.perf_counter()

    pop = _initial_population(prospects, targets, config)
    objs, cv, emv, risk = evaluate(pop)
    evaluations = config.pop_size

    archive_bits: dict[bytes, np.ndarray] = {}
    archive_objs: dict[bytes, np.ndarray] = {}
    snapshots: list[np.ndarray] = []

    def update_archive() -> None:
        feasible = np.flatnonzero(cv == 0.0)
        if feasible.size:
            keep = feasible[
                metrics.pareto_filter(objs[feasible])
            ]
            for i in keep:
                archive_bits[pop[i].tobytes()] = pop[i].copy()
                archive_objs[pop[i].tobytes()] = objs[i].copy()
            if archive_objs:
                stacked = np.vstack(list(archive_objs.values()))
                mask = metrics.pareto_filter(stacked)
                for key, m in zip(list(archive_objs), mask):
                    if not m:
                        del archive_objs[key]
                        del archive_bits[key]
        snapshots.append(
            np.vstack(list(archive_objs.values()))
            if archive_objs
            else np.empty((0, 2))
        )

    update_archive()

    for generation in range(1, config.generations + 1):
        ranks, crowd, _ = _rank_and_crowd(objs, cv)
        sel_rng = np.random.default_rng(
            np.random.SeedSequence([config.seed, generation, 1])
        )
        parents = pop[_tournament(ranks, crowd, config.pop_size, sel_rng)]
        children = _make_offspring(
            parents, prospects, targets, config, generation
        )
        child_objs, child_cv, child_emv, child_risk = evaluate(children)
        evaluations += config.pop_size

        pop = np.vstack([pop, children])
        objs = np.vstack([objs, child_objs])
        cv = np.concatenate([cv, child_cv])
        emv = np.concatenate([emv, child_emv])
        risk = np.concatenate([risk, child_risk])

        keep = _truncate(objs, cv, config.pop_size)
        pop, objs, cv, emv, risk = (
            pop[keep],
            objs[keep],
            cv[keep],
            emv[keep],
            risk[keep],
        )
        update_archive()

    fronts = fast_nondominated_sort(objs, cv)
    front_members = _dedupe_front(pop[fronts[0]])
    front = [
        Chromosome(bits).evaluate(prospects, targets)
        for bits in front_members
    ]
    front.sort(key=lambda ch: (-ch.emv, ch.risk, ch.bitstring()))

    hv_trace = _trace_hypervolume(snapshots)
    archive_points = snapshots[-1]
    return RunResult(
        front=front,
        population=pop,
        emv=emv,
        risk=risk,
        violations=cv,
        hv_trace=hv_trace,
        archive_points=archive_points,
        config=config,
        wall_time=time.perf_counter() - started,
        evaluations=evaluations,
    )


def _truncate(
    objs: np.ndarray, cv: np.ndarray, pop_size: int
) -> np.ndarray:
    """Elitist (mu+lambda) survivor selection: whole fronts while they fit,
    then the most spread-out members of the splitting front."""
    ranks, crowd, fronts = _rank_and_crowd(objs, cv)
    keep: list[np.ndarray] = []
    space = pop_size
    for front in fronts:
        if front.size <= space:
            keep.append(front)
            space -= front.size
            if space == 0:
                break
        else:
            order = front[np.argsort(-crowd[front], kind="stable")]
            keep.append(order[:space])
            break
    return np.concatenate(keep)


def _dedupe_front(bits_rows: np.ndarray) -> list[np.ndarray]:
    seen: dict[bytes, np.ndarray] = {}
    for row in bits_rows:
        seen.setdefault(row.tobytes(), row)
    return list(seen.values())


def _trace_hypervolume(snapshots: list[np.ndarray]) -> np.ndarray:
    """HV per generation under one reference fixed from the whole history."""
    non_empty = [s for s in snapshots if s.size]
    if not non_empty:
        return np.zeros(len(snapshots))
    ref = metrics.reference_point(non_empty)
    return np.array(
        [metrics.hypervolume(s, ref) if s.size else 0.0 for s in snapshots]
    )
