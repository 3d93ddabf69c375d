"""Portfolio model for exploration drilling programs.

A drilling plan is a binary vector over a fixed list of candidate projects
(trap targets first, then appraisal targets).  The model scores a plan on two
objectives -- expected monetary value, to maximize, and the standard deviation
of the selected projects' expected returns, to minimize -- and checks it
against the plan's resource, budget and coverage constraints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

TRAP = "trap"
APPRAISAL = "appraisal"

#: Canonical constraint-family names, in report order.
CONSTRAINT_FAMILIES = (
    "wells",
    "pred_oil",
    "pred_gas",
    "cont_oil",
    "cont_gas",
    "prov_oil",
    "prov_gas",
    "mean_pos",
    "low_pos_count",
    "cost_trap",
    "cost_appraisal",
    "region_quota",
)


class ModelError(ValueError):
    """Invalid model input (bad project fields, malformed plan vector)."""


@dataclass(frozen=True)
class Project:
    """One candidate drilling project.

    Reserve fields are zero when they do not apply to the project kind:
    traps carry predicted oil/gas reserves (``pre_or``/``pre_gr``), appraisals
    carry controlled and proven reserves (``cor``/``cgr``/``pro_or``/
    ``pro_gr``).  ``pos`` is the probability of success used in both
    objectives: geological for traps, economic for appraisals.
    """

    id: str
    region: str
    kind: str
    cost: float
    npv: float
    pos: float
    well_count: int
    mandatory: bool = False
    pre_or: float = 0.0
    pre_gr: float = 0.0
    cor: float = 0.0
    cgr: float = 0.0
    pro_or: float = 0.0
    pro_gr: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in (TRAP, APPRAISAL):
            raise ModelError(f"project {self.id}: unknown kind {self.kind!r}")
        if not 0.0 <= self.pos <= 1.0:
            raise ModelError(
                f"project {self.id}: pos {self.pos} outside [0, 1]"
            )
        if self.cost < 0:
            raise ModelError(f"project {self.id}: negative cost {self.cost}")
        if self.well_count < 0 or self.well_count != int(self.well_count):
            raise ModelError(
                f"project {self.id}: well_count {self.well_count} must be a"
                " non-negative integer"
            )
        for name in ("pre_or", "pre_gr", "cor", "cgr", "pro_or", "pro_gr"):
            if getattr(self, name) < 0:
                raise ModelError(f"project {self.id}: negative {name}")

    @property
    def expected_return(self) -> float:
        """Risk-model return contribution v = npv * pos."""
        return self.npv * self.pos

    @property
    def emv(self) -> float:
        """Standalone expected monetary value of drilling this project."""
        if self.kind == TRAP:
            return self.npv * self.pos - self.cost
        return self.npv * self.pos - self.npv * (1.0 - self.pos)


class ProspectSet:
    """Immutable, array-backed view of the candidate projects.

    Projects are stored traps-first (stable within kind), which fixes the
    locus order of every plan vector.  All per-project quantities used by the
    objectives and constraints are exposed as aligned numpy arrays.
    """

    def __init__(self, projects: Iterable[Project]):
        items = list(projects)
        if not items:
            raise ModelError("empty project list")
        traps = [p for p in items if p.kind == TRAP]
        apps = [p for p in items if p.kind == APPRAISAL]
        self.projects: tuple[Project, ...] = tuple(traps + apps)
        ids = [p.id for p in self.projects]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ModelError(f"duplicate project ids: {', '.join(dupes)}")

        self.n = len(self.projects)
        self.n_traps = len(traps)
        self.ids = tuple(ids)
        self.index = {pid: i for i, pid in enumerate(ids)}

        as_arr = lambda attr: np.array(
            [getattr(p, attr) for p in self.projects], dtype=float
        )
        self.npv = as_arr("npv")
        self.pos = as_arr("pos")
        self.cost = as_arr("cost")
        self.pre_or = as_arr("pre_or")
        self.pre_gr = as_arr("pre_gr")
        self.cor = as_arr("cor")
        self.cgr = as_arr("cgr")
        self.pro_or = as_arr("pro_or")
        self.pro_gr = as_arr("pro_gr")
        self.wells = np.array([p.well_count for p in self.projects], dtype=int)
        self.mandatory = np.array(
            [p.mandatory for p in self.projects], dtype=bool
        )
        self.is_trap = np.array(
            [p.kind == TRAP for p in self.projects], dtype=bool
        )
        #: Expected return per project, the risk model's summand.
        self.returns = self.npv * self.pos
        #: EMV contribution per project when selected.
        self.emv_contrib = np.where(
            self.is_trap,
            self.npv * self.pos - self.cost,
            self.npv * (2.0 * self.pos - 1.0),
        )
        self.regions = tuple(p.region for p in self.projects)

        # (kind, region) groups for the regional coverage quotas.
        group_keys: list[tuple[str, str]] = []
        codes = np.empty(self.n, dtype=int)
        for i, p in enumerate(self.projects):
            key = (p.kind, p.region)
            if key not in group_keys:
                group_keys.append(key)
            codes[i] = group_keys.index(key)
        self.group_keys: tuple[tuple[str, str], ...] = tuple(group_keys)
        self.group_codes = codes

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, key: int | str) -> Project:
        if isinstance(key, str):
            return self.projects[self.index[key]]
        return self.projects[key]

    def check_bits(self, bits: np.ndarray) -> np.ndarray:
        bits = np.asarray(bits)
        if bits.shape != (self.n,):
            raise ModelError(
                f"plan vector has shape {bits.shape}, expected ({self.n},)"
            )
        if not np.isin(bits, (0, 1)).all():
            raise ModelError("plan vector must be 0/1 valued")
        return bits.astype(np.int8)

    def group_quotas(self, targets: "PlanTargets") -> np.ndarray:
        """Quota aligned to ``group_keys`` (0 where no quota is set)."""
        out = np.zeros(len(self.group_keys))
        for g, (kind, region) in enumerate(self.group_keys):
            quotas = targets.quota_trap if kind == TRAP else targets.quota_appraisal
            out[g] = quotas.get(region, 0)
        return out


@dataclass(frozen=True)
class PlanTargets:
    """Program-level requirements a plan must meet.

    Defaults are fully permissive except for the exact well-count target,
    which is always enforced.  Quotas are lower bounds on the number of
    selected projects per region, kept separately for traps and appraisals.
    """

    tot_wells: int
    pred_lb_oil: float = 0.0
    pred_lb_gas: float = 0.0
    cont_lb_oil: float = 0.0
    cont_lb_gas: float = 0.0
    prov_lb_oil: float = 0.0
    prov_lb_gas: float = 0.0
    drill_lb: float = 0.0
    thre_well: float = 0.0
    l_ub: float = math.inf
    cost_ub_trap: float = math.inf
    cost_ub_appraisal: float = math.inf
    quota_trap: Mapping[str, int] = field(default_factory=dict)
    quota_appraisal: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.tot_wells < 0:
            raise ModelError(f"tot_wells must be >= 0, got {self.tot_wells}")
        if not 0.0 <= self.drill_lb <= 1.0:
            raise ModelError("drill_lb must lie in [0, 1]")
        if not 0.0 <= self.thre_well <= 1.0:
            raise ModelError("thre_well must lie in [0, 1]")


# ---------------------------------------------------------------------------
# Running statistics (incremental mean / sum of squared deviations)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunningStats:
    """Count, mean and sum of squared deviations of the selected returns."""

    n: int = 0
    mu: float = 0.0
    m: float = 0.0

    @classmethod
    def from_values(cls, values: Iterable[float]) -> "RunningStats":
        stats = cls()
        for g in values:
            stats = welford_add(stats, g)
        return stats

    @property
    def stddev(self) -> float:
        """Population-style deviation sqrt(M) used by the risk objective."""
        return math.sqrt(max(self.m, 0.0))


def welford_add(stats: RunningStats, g: float) -> RunningStats:
    """Fold one value into the running statistics (single pass, O(1))."""
    n1 = stats.n + 1
    mu1 = stats.mu + (g - stats.mu) / n1
    m1 = stats.m + (g - stats.mu) * (g - mu1)
    return RunningStats(n1, mu1, m1)


def welford_remove(stats: RunningStats, g: float) -> RunningStats:
    """Remove one previously folded value in O(1).

    The downdate mirrors :func:`welford_add`; M is clamped at zero to guard
    against last-bit cancellation.  Removing the only element returns the
    empty statistics exactly.
    """
    if stats.n < 1:
        raise ModelError("cannot remove from empty running statistics")
    n1 = stats.n - 1
    if n1 == 0:
        return RunningStats(0, 0.0, 0.0)
    mu1 = (stats.n * stats.mu - g) / n1
    m1 = stats.m - (g - mu1) * (g - stats.mu)
    return RunningStats(n1, mu1, max(m1, 0.0))


def delta_m(stats: RunningStats, g: float, direction: int) -> float:
    """Change of M if ``g`` were added (direction=1) or removed (direction=0).

    Addition never decreases M and removal never increases it, which the
    variation operators rely on when normalizing the deltas.
    """
    if direction == 1:
        added = welford_add(stats, g)
        return added.m - stats.m
    if direction == 0:
        removed = welford_remove(stats, g)
        return removed.m - stats.m
    raise ModelError(f"direction must be 0 or 1, got {direction}")


# ---------------------------------------------------------------------------
# Objectives
# ---------------------------------------------------------------------------


def objective_emv(bits: np.ndarray, prospects: ProspectSet) -> float:
    """Expected monetary value of the plan (to maximize).

    Selected traps contribute npv*pos - cost; selected appraisals contribute
    the success/failure balance npv*pos - npv*(1 - pos).
    """
    bits = prospects.check_bits(bits)
    return float(bits @ prospects.emv_contrib)


def objective_risk(bits: np.ndarray, prospects: ProspectSet) -> float:
    """Deviation risk of the plan (to minimize).

    sqrt of the sum of squared deviations of the selected projects'
    expected returns around their mean.  Empty and singleton selections
    carry zero risk.
    """
    bits = prospects.check_bits(bits)
    sel = bits.astype(bool)
    k = int(sel.sum())
    if k <= 1:
        return 0.0
    v = prospects.returns[sel]
    mu = v.mean()
    return float(math.sqrt(max(((v - mu) ** 2).sum(), 0.0)))


# ---------------------------------------------------------------------------
# Constraints
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstraintCheck:
    """Outcome of one constraint family.

    ``slack`` is signed: for inequality families a non-negative slack means
    satisfied, with the magnitude of a negative slack measuring the breach;
    the well-count family is an equality, satisfied only at slack == 0.
    ``scale`` is the family's normalization denominator for violation totals.
    """

    name: str
    satisfied: bool
    slack: float
    scale: float = 1.0

    @property
    def violation(self) -> float:
        if self.name == "wells":
            return abs(self.slack)
        return max(0.0, -self.slack)


@dataclass(frozen=True)
class ConstraintReport:
    checks: tuple[ConstraintCheck, ...]

    @property
    def feasible(self) -> bool:
        return all(c.satisfied for c in self.checks)

    @property
    def total_violation(self) -> float:
        """Scale-normalized sum of breaches (0 iff feasible)."""
        return sum(c.violation / c.scale for c in self.checks)

    def __getitem__(self, name: str) -> ConstraintCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def evaluate_constraints(
    bits: np.ndarray, prospects: ProspectSet, targets: PlanTargets
) -> ConstraintReport:
    """Check a plan against every constraint family.

    Returns one entry per family in :data:`CONSTRAINT_FAMILIES` order with a
    signed slack (all-zero plan with a 19-well target reports wells slack
    -19, reserve floors breached by their full bounds, and so on).
    """
    bits = prospects.check_bits(bits)
    sel = bits.astype(bool)
    trap_sel = sel & prospects.is_trap
    app_sel = sel & ~prospects.is_trap

    checks: list[ConstraintCheck] = []

    wells_total = int(prospects.wells[sel].sum())
    diff = wells_total - targets.tot_wells
    checks.append(
        ConstraintCheck(
            "wells", diff == 0, float(diff), max(1.0, targets.tot_wells)
        )
    )

    def floor(name: str, value: float, bound: float) -> None:
        slack = value - bound
        checks.append(
            ConstraintCheck(name, slack >= 0.0, slack, max(1.0, abs(bound)))
        )

    floor("pred_oil", float(prospects.pre_or[trap_sel].sum()), targets.pred_lb_oil)
    floor("pred_gas", float(prospects.pre_gr[trap_sel].sum()), targets.pred_lb_gas)
    floor("cont_oil", float(prospects.cor[app_sel].sum()), targets.cont_lb_oil)
    floor("cont_gas", float(prospects.cgr[app_sel].sum()), targets.cont_lb_gas)
    floor("prov_oil", float(prospects.pro_or[app_sel].sum()), targets.prov_lb_oil)
    floor("prov_gas", float(prospects.pro_gr[app_sel].sum()), targets.prov_lb_gas)

    # Well-count-weighted mean probability of success across the plan.
    if wells_total > 0:
        mean_pos = float(
            (prospects.pos[sel] * prospects.wells[sel]).sum() / wells_total
        )
    else:
        mean_pos = 0.0
    floor("mean_pos", mean_pos, targets.drill_lb)

    low_count = int((prospects.pos[sel] < targets.thre_well).sum())
    if math.isinf(targets.l_ub):
        checks.append(ConstraintCheck("low_pos_count", True, math.inf))
    else:
        slack = targets.l_ub - low_count
        checks.append(
            ConstraintCheck(
                "low_pos_count", slack >= 0, slack, max(1.0, targets.l_ub)
            )
        )

    for name, mask, cap in (
        ("cost_trap", trap_sel, targets.cost_ub_trap),
        ("cost_appraisal", app_sel, targets.cost_ub_appraisal),
    ):
        spend = float(prospects.cost[mask].sum())
        if math.isinf(cap):
            checks.append(ConstraintCheck(name, True, math.inf))
        else:
            checks.append(
                ConstraintCheck(name, cap - spend >= 0, cap - spend, max(1.0, cap))
            )

    quotas = prospects.group_quotas(targets)
    counts = np.bincount(
        prospects.group_codes[sel], minlength=len(prospects.group_keys)
    ).astype(float)
    shortfall = float(np.maximum(0.0, quotas - counts).sum())
    checks.append(
        ConstraintCheck(
            "region_quota",
            shortfall == 0.0,
            -shortfall,
            max(1.0, float(quotas.sum())),
        )
    )

    return ConstraintReport(tuple(checks))


def is_feasible(
    bits: np.ndarray, prospects: ProspectSet, targets: PlanTargets
) -> bool:
    return evaluate_constraints(bits, prospects, targets).feasible


# ---------------------------------------------------------------------------
# Plan vector wrapper
# ---------------------------------------------------------------------------


@dataclass
class Chromosome:
    """A plan vector with lazily cached evaluation results."""

    bits: np.ndarray
    emv: float | None = None
    risk: float | None = None
    report: ConstraintReport | None = None

    def __post_init__(self) -> None:
        self.bits = np.asarray(self.bits, dtype=np.int8)

    def evaluate(
        self, prospects: ProspectSet, targets: PlanTargets
    ) -> "Chromosome":
        self.emv = objective_emv(self.bits, prospects)
        self.risk = objective_risk(self.bits, prospects)
        self.report = evaluate_constraints(self.bits, prospects, targets)
        return self

    @property
    def feasible(self) -> bool:
        if self.report is None:
            raise ModelError("chromosome not evaluated yet")
        return self.report.feasible

    def bitstring(self) -> str:
        return "".join(str(int(b)) for b in self.bits)

    @classmethod
    def from_bitstring(cls, s: str) -> "Chromosome":
        if not s or set(s) - {"0", "1"}:
            raise ModelError(f"malformed bit string {s!r}")
        return cls(np.array([int(ch) for ch in s], dtype=np.int8))
