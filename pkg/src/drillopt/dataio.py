"""File formats: prospect tables, elicitations, fronts, configs, manifests.

All numeric CSV output uses fixed 6-decimal formatting so that reruns with
the same seed are byte-identical and golden files stay stable.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import yaml

from .model import (
    APPRAISAL,
    CONSTRAINT_FAMILIES,
    TRAP,
    Chromosome,
    PlanTargets,
    Project,
    ProspectSet,
)
from .operators import OperatorParams
from .solver import SolverConfig
from .uncertainty import (
    FACTORS,
    FactorElicitation,
    ProspectElicitation,
    ProspectSimulation,
    ReserveElicitation,
    SimulationConfig,
    ThreePointEstimate,
)

PRECISION = 6

TRAP_COLUMNS = (
    "region", "id", "pre_or", "pre_gr", "cost", "npv", "gpos",
    "well_count", "mandatory",
)
APPRAISAL_COLUMNS = (
    "region", "id", "cor", "cgr", "pro_or", "pro_gr", "cost", "npv",
    "epos", "well_count", "mandatory",
)
ELICITATION_COLUMNS = ("project_id", "factor", "a", "b", "c", "k", "s", "f")
RESERVE_COLUMNS = (
    "project_id", "fluid", "phi_a", "phi_b", "phi_c", "sat_a", "sat_b",
    "sat_c", "surface_density", "volume_factor",
)


class DataError(ValueError):
    """Malformed input file."""


def _fmt(x: float) -> str:
    return f"{x:.{PRECISION}f}"


# ---------------------------------------------------------------------------
# Prospect tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RowIssue:
    """Why one data row was rejected."""

    path: str
    row: int
    column: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}:{self.row} [{self.column}]: {self.message}"


@dataclass(frozen=True)
class LoadResult:
    prospects: ProspectSet
    rejected: tuple[RowIssue, ...]


def _read_rows(path: Path, columns: Sequence[str]) -> list[dict[str, str]]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty file")
        missing = [c for c in columns if c not in reader.fieldnames]
        if missing:
            raise DataError(
                f"{path}: missing column(s) {', '.join(missing)}"
            )
        rows = list(reader)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return rows


def _num(row: Mapping[str, str], column: str, path: Path, line: int) -> float:
    raw = (row.get(column) or "").strip()
    try:
        return float(raw)
    except ValueError:
        raise DataError(
            f"{path}:{line} [{column}]: not a number: {raw!r}"
        ) from None


def _load_kind(
    path: Path, kind: str, issues: list[RowIssue]
) -> list[Project]:
    columns = TRAP_COLUMNS if kind == TRAP else APPRAISAL_COLUMNS
    pos_col = "gpos" if kind == TRAP else "epos"
    projects: list[Project] = []
    for line, row in enumerate(_read_rows(Path(path), columns), start=2):
        pos = _num(row, pos_col, path, line)
        if not 0.0 <= pos <= 1.0:
            issues.append(
                RowIssue(
                    str(path), line, pos_col,
                    f"probability {pos} outside [0, 1]; row skipped",
                )
            )
            continue
        common = dict(
            id=row["id"].strip(),
            region=row["region"].strip(),
            kind=kind,
            cost=_num(row, "cost", path, line),
            npv=_num(row, "npv", path, line),
            pos=pos,
            well_count=int(_num(row, "well_count", path, line)),
            # Truthy coercion: the sample data marks one mandatory project
            # with a multiplicity rather than a flag.
            mandatory=int(_num(row, "mandatory", path, line)) != 0,
        )
        if kind == TRAP:
            projects.append(
                Project(
                    **common,
                    pre_or=_num(row, "pre_or", path, line),
                    pre_gr=_num(row, "pre_gr", path, line),
                )
            )
        else:
            projects.append(
                Project(
                    **common,
                    cor=_num(row, "cor", path, line),
                    cgr=_num(row, "cgr", path, line),
                    pro_or=_num(row, "pro_or", path, line),
                    pro_gr=_num(row, "pro_gr", path, line),
                )
            )
    return projects


def load_prospects(trap_path: Path, appraisal_path: Path) -> LoadResult:
    """Read the two prospect tables into one ordered candidate set.

    Rows whose success probability falls outside [0, 1] are skipped and
    reported in ``rejected`` with file/row/column diagnostics; any other
    malformed value raises :class:`DataError`.
    """
    issues: list[RowIssue] = []
    traps = _load_kind(Path(trap_path), TRAP, issues)
    apps = _load_kind(Path(appraisal_path), APPRAISAL, issues)
    return LoadResult(ProspectSet(traps + apps), tuple(issues))


# ---------------------------------------------------------------------------
# Elicitations, history, reserves
# ---------------------------------------------------------------------------


def load_elicitations(path: Path) -> list[ProspectElicitation]:
    """Read per-project, per-factor three-point assessments with history
    counts.  Every project must elicit all five factors exactly once."""
    grouped: dict[str, dict[str, FactorElicitation]] = {}
    for line, row in enumerate(
        _read_rows(Path(path), ELICITATION_COLUMNS), start=2
    ):
        pid = row["project_id"].strip()
        factor = row["factor"].strip()
        if factor not in FACTORS:
            raise DataError(
                f"{path}:{line} [factor]: unknown factor {factor!r}"
            )
        if factor in grouped.get(pid, {}):
            raise DataError(
                f"{path}:{line} [factor]: duplicate {factor!r} for {pid}"
            )
        est = ThreePointEstimate(
            _num(row, "a", path, line),
            _num(row, "b", path, line),
            _num(row, "c", path, line),
        )
        grouped.setdefault(pid, {})[factor] = FactorElicitation(
            estimate=est,
            k=_num(row, "k", path, line),
            successes=int(_num(row, "s", path, line)),
            failures=int(_num(row, "f", path, line)),
        )
    return [
        ProspectElicitation(pid, factors) for pid, factors in grouped.items()
    ]


def load_history(path: Path) -> np.ndarray:
    """Read historical per-well factor outcomes (one column per factor)."""
    rows = _read_rows(Path(path), FACTORS)
    out = np.empty((len(rows), len(FACTORS)))
    for i, row in enumerate(rows):
        for j, factor in enumerate(FACTORS):
            out[i, j] = _num(row, factor, Path(path), i + 2)
    return out


def load_reserves(path: Path) -> dict[str, dict[str, ReserveElicitation]]:
    """Read per-project, per-fluid reserve-density inputs."""
    out: dict[str, dict[str, ReserveElicitation]] = {}
    for line, row in enumerate(_read_rows(Path(path), RESERVE_COLUMNS), start=2):
        fluid = row["fluid"].strip()
        if fluid not in ("oil", "gas"):
            raise DataError(
                f"{path}:{line} [fluid]: expected oil or gas, got {fluid!r}"
            )
        pid = row["project_id"].strip()
        if fluid in out.get(pid, {}):
            raise DataError(
                f"{path}:{line} [fluid]: duplicate {fluid} block for {pid}"
            )
        out.setdefault(pid, {})[fluid] = ReserveElicitation(
            porosity=ThreePointEstimate(
                _num(row, "phi_a", path, line),
                _num(row, "phi_b", path, line),
                _num(row, "phi_c", path, line),
            ),
            saturation=ThreePointEstimate(
                _num(row, "sat_a", path, line),
                _num(row, "sat_b", path, line),
                _num(row, "sat_c", path, line),
            ),
            surface_density=_num(row, "surface_density", path, line),
            volume_factor=_num(row, "volume_factor", path, line),
        )
    return out


# ---------------------------------------------------------------------------
# Front / trace / summary output
# ---------------------------------------------------------------------------

FRONT_HEADER = (
    "bits",
    "emv",
    "risk",
    "feasible",
    "violation",
    *(f"slack_{name}" for name in CONSTRAINT_FAMILIES),
)


@dataclass(frozen=True)
class FrontRow:
    bits: str
    emv: float
    risk: float
    feasible: bool
    violation: float
    slacks: tuple[float, ...]


def write_front_csv(path: Path, front: Iterable[Chromosome]) -> None:
    """Write evaluated rank-0 plans, one row per plan.

    Rows carry the plan bits, both objectives, the feasibility verdict with
    the total normalized violation, and the signed slack of every
    constraint family.
    """
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FRONT_HEADER)
        for ch in front:
            if ch.report is None or ch.emv is None:
                raise DataError("front rows must be evaluated before writing")
            writer.writerow(
                [
                    ch.bitstring(),
                    _fmt(ch.emv),
                    _fmt(ch.risk),
                    int(ch.report.feasible),
                    _fmt(ch.report.total_violation),
                    *(_fmt(c.slack) for c in ch.report.checks),
                ]
            )


def read_front_csv(path: Path) -> list[FrontRow]:
    rows: list[FrontRow] = []
    for line, row in enumerate(_read_rows(Path(path), FRONT_HEADER), start=2):
        rows.append(
            FrontRow(
                bits=row["bits"].strip(),
                emv=_num(row, "emv", Path(path), line),
                risk=_num(row, "risk", Path(path), line),
                feasible=bool(int(_num(row, "feasible", Path(path), line))),
                violation=_num(row, "violation", Path(path), line),
                slacks=tuple(
                    _num(row, f"slack_{name}", Path(path), line)
                    for name in CONSTRAINT_FAMILIES
                ),
            )
        )
    return rows


def front_objectives(rows: Sequence[FrontRow]) -> np.ndarray:
    """Natural (EMV, risk) matrix of a front file."""
    return np.array([[r.emv, r.risk] for r in rows], dtype=float)


def write_trace_csv(path: Path, hv_trace: np.ndarray) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["generation", "hypervolume"])
        for gen, hv in enumerate(hv_trace):
            writer.writerow([gen, _fmt(float(hv))])


def read_trace_csv(path: Path) -> np.ndarray:
    rows = _read_rows(Path(path), ("generation", "hypervolume"))
    return np.array(
        [
            _num(row, "hypervolume", Path(path), line)
            for line, row in enumerate(rows, start=2)
        ]
    )


SUMMARY_HEADER = (
    "project_id", "gpos_mean", "gpos_std", "epos",
    "oil_p90", "oil_p50", "oil_p10", "oil_pmean",
    "gas_p90", "gas_p50", "gas_p10", "gas_pmean",
    "npv", "emv",
)


def write_summary_csv(
    path: Path, simulations: Mapping[str, ProspectSimulation]
) -> None:
    """Per-project simulation summaries; blank cells where an input block
    (reserves, economics) was not provided."""

    def opt(value: float | None) -> str:
        return "" if value is None else _fmt(value)

    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        for pid, sim in simulations.items():
            quartets = []
            for block in (sim.oil, sim.gas):
                if block is None:
                    quartets += ["", "", "", ""]
                else:
                    quartets += [
                        _fmt(block.p90), _fmt(block.p50),
                        _fmt(block.p10), _fmt(block.pmean),
                    ]
            writer.writerow(
                [
                    pid,
                    _fmt(sim.gpos.mean),
                    _fmt(sim.gpos.stddev),
                    _fmt(sim.epos),
                    *quartets,
                    opt(sim.npv),
                    opt(sim.emv),
                ]
            )


def write_metrics_csv(path: Path, rows: Sequence[Mapping[str, object]]) -> None:
    """Comparison table: one row per front, SC columns against the first.

    Self-coverage cells are left blank (the metric is absent for a front
    against itself).
    """
    header = ("front", "hypervolume", "igd", "spacing", "sc_base_over_this",
              "sc_this_over_base")
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [
                    row["front"],
                    *(
                        "" if row[k] is None else _fmt(float(row[k]))
                        for k in header[1:]
                    ),
                ]
            )


def write_representatives_csv(
    path: Path, rows: Sequence[Mapping[str, object]]
) -> None:
    header = ("method", "index", "bits", "emv", "risk", "norm_emv",
              "norm_risk", "fallback")
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [
                    row["method"],
                    row["index"],
                    row["bits"],
                    _fmt(float(row["emv"])),
                    _fmt(float(row["risk"])),
                    _fmt(float(row["norm_emv"])),
                    _fmt(float(row["norm_risk"])),
                    int(bool(row["fallback"])),
                ]
            )


def write_tiers_csv(
    path: Path, rows: Sequence[FrontRow], tiers: np.ndarray
) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["tier", "bits", "emv", "risk"])
        for row, tier in zip(rows, tiers):
            writer.writerow([int(tier), row.bits, _fmt(row.emv), _fmt(row.risk)])


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs, as loaded from one YAML file.

    Dataset paths are resolved relative to the config file's directory.
    """

    traps: Path
    appraisals: Path
    targets: PlanTargets
    solver: SolverConfig
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    elicitations: Path | None = None
    history: Path | None = None
    reserves: Path | None = None
    p_mefs: Mapping[str, float] = field(default_factory=dict)
    metrics_inflate: float = 0.1
    selection_methods: tuple[str, ...] = ("ideal", "knee", "hv")
    selection_tiers: int = 3

    def load_prospects(self) -> LoadResult:
        return load_prospects(self.traps, self.appraisals)


def _targets_from_dict(d: Mapping[str, object]) -> PlanTargets:
    known = {
        "tot_wells", "pred_lb_oil", "pred_lb_gas", "cont_lb_oil",
        "cont_lb_gas", "prov_lb_oil", "prov_lb_gas", "drill_lb",
        "thre_well", "l_ub", "cost_ub_trap", "cost_ub_appraisal",
        "quota_trap", "quota_appraisal",
    }
    unknown = set(d) - known
    if unknown:
        raise DataError(f"unknown targets key(s): {', '.join(sorted(unknown))}")
    if "tot_wells" not in d:
        raise DataError("targets.tot_wells is required")
    kwargs = dict(d)
    for key in ("quota_trap", "quota_appraisal"):
        if key in kwargs:
            kwargs[key] = {
                str(region): int(q) for region, q in dict(kwargs[key]).items()
            }
    return PlanTargets(**kwargs)


def _solver_from_dict(d: Mapping[str, object]) -> SolverConfig:
    d = dict(d)
    operator = d.pop("operator", {})
    return SolverConfig(
        pop_size=int(d.pop("pop_size", 100)),
        generations=int(d.pop("generations", 500)),
        seed=int(d.pop("seed", 0)),
        variant=str(d.pop("variant", "oe")),
        params=OperatorParams(**operator),
        crossover_prob=float(d.pop("crossover_prob", 0.9)),
        mutation_prob=float(d.pop("mutation_prob", 0.05)),
    )


def load_run_config(path: Path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    with path.open() as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise DataError(f"{path}: config must be a mapping")
    base = path.parent

    datasets = raw.get("datasets", {})
    for key in ("traps", "appraisals"):
        if key not in datasets:
            raise DataError(f"{path}: datasets.{key} is required")

    def resolve(key: str) -> Path | None:
        value = datasets.get(key)
        return None if value is None else (base / str(value)).resolve()

    sim_block = dict(raw.get("simulation", {}))
    p_mefs = {
        str(k): float(v) for k, v in dict(sim_block.pop("p_mefs", {})).items()
    }
    selection = raw.get("selection", {})
    return RunConfig(
        traps=resolve("traps"),
        appraisals=resolve("appraisals"),
        elicitations=resolve("elicitations"),
        history=resolve("history"),
        reserves=resolve("reserves"),
        targets=_targets_from_dict(raw.get("targets", {})),
        solver=_solver_from_dict(raw.get("solver", {})),
        simulation=SimulationConfig(**sim_block),
        p_mefs=p_mefs,
        metrics_inflate=float(raw.get("metrics", {}).get("inflate", 0.1)),
        selection_methods=tuple(
            selection.get("methods", ("ideal", "knee", "hv"))
        ),
        selection_tiers=int(selection.get("tiers", 3)),
    )


def config_echo(cfg: RunConfig) -> dict:
    """JSON-ready dict from which the run can be rebuilt exactly."""
    targets = {
        "tot_wells": cfg.targets.tot_wells,
        "pred_lb_oil": cfg.targets.pred_lb_oil,
        "pred_lb_gas": cfg.targets.pred_lb_gas,
        "cont_lb_oil": cfg.targets.cont_lb_oil,
        "cont_lb_gas": cfg.targets.cont_lb_gas,
        "prov_lb_oil": cfg.targets.prov_lb_oil,
        "prov_lb_gas": cfg.targets.prov_lb_gas,
        "drill_lb": cfg.targets.drill_lb,
        "thre_well": cfg.targets.thre_well,
        "quota_trap": dict(cfg.targets.quota_trap),
        "quota_appraisal": dict(cfg.targets.quota_appraisal),
    }
    # Infinite caps are omitted and restored by default on the way back in.
    for key in ("l_ub", "cost_ub_trap", "cost_ub_appraisal"):
        value = getattr(cfg.targets, key)
        if math.isfinite(value):
            targets[key] = value
    params = cfg.solver.params
    return {
        "datasets": {
            "traps": str(cfg.traps),
            "appraisals": str(cfg.appraisals),
            "elicitations": None if cfg.elicitations is None else str(cfg.elicitations),
            "history": None if cfg.history is None else str(cfg.history),
            "reserves": None if cfg.reserves is None else str(cfg.reserves),
        },
        "targets": targets,
        "solver": {
            "pop_size": cfg.solver.pop_size,
            "generations": cfg.solver.generations,
            "seed": cfg.solver.seed,
            "variant": cfg.solver.variant,
            "operator": {
                "alpha": params.alpha,
                "gamma": params.gamma,
                "k_bias": params.k_bias,
                "budget_ratio": params.budget_ratio,
                "l_min": params.l_min,
                "eps": params.eps,
            },
            "crossover_prob": cfg.solver.crossover_prob,
            "mutation_prob": cfg.solver.mutation_prob,
        },
        "simulation": {
            "n_samples": cfg.simulation.n_samples,
            "eps": cfg.simulation.eps,
            "seed": cfg.simulation.seed,
            "p_mefs": dict(cfg.p_mefs),
        },
        "metrics": {"inflate": cfg.metrics_inflate},
        "selection": {
            "methods": list(cfg.selection_methods),
            "tiers": cfg.selection_tiers,
        },
    }


def config_from_echo(echo: Mapping[str, object]) -> RunConfig:
    datasets = echo["datasets"]
    sim = dict(echo.get("simulation", {}))
    p_mefs = {str(k): float(v) for k, v in dict(sim.pop("p_mefs", {})).items()}

    def path_or_none(key: str) -> Path | None:
        value = datasets.get(key)
        return None if value is None else Path(str(value))

    return RunConfig(
        traps=Path(str(datasets["traps"])),
        appraisals=Path(str(datasets["appraisals"])),
        elicitations=path_or_none("elicitations"),
        history=path_or_none("history"),
        reserves=path_or_none("reserves"),
        targets=_targets_from_dict(echo["targets"]),
        solver=_solver_from_dict(echo["solver"]),
        simulation=SimulationConfig(**sim),
        p_mefs=p_mefs,
        metrics_inflate=float(echo.get("metrics", {}).get("inflate", 0.1)),
        selection_methods=tuple(
            echo.get("selection", {}).get("methods", ("ideal", "knee", "hv"))
        ),
        selection_tiers=int(echo.get("selection", {}).get("tiers", 3)),
    )


def write_manifest(path: Path, echo: dict, **extra: object) -> None:
    """Persist the resolved configuration plus run facts (seed, wall time,
    produced files); rebuilding from the embedded echo reproduces the run."""
    payload = {"config": echo, **extra}
    with Path(path).open("w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(path: Path) -> dict:
    with Path(path).open() as fh:
        return json.load(fh)


def sample_config_path() -> Path:
    """Location of the bundled example configuration."""
    return Path(
        resources.files("drillopt").joinpath("data", "plan.yaml")
    )
