"""Command-line surface: simulate | optimize | metrics | select | report.

Output locations default to the current directory; set DRILLOPT_OUT to
redirect them without touching the command line.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import dataio, figures, metrics, selection
from .calibrate import derive_plan_targets
from .dataio import DataError, RunConfig
from .model import ModelError
from .solver import ConfigurationError, RunResult, run
from .uncertainty import UncertaintyError, simulate_prospects

_USER_ERRORS = (
    DataError,
    ModelError,
    UncertaintyError,
    ConfigurationError,
    selection.SelectionError,
    metrics.MetricsError,
    OSError,
)

_SELECTORS = {
    "ideal": selection.ideal_point_select,
    "knee": selection.knee_select,
    "hv": selection.hv_contribution_select,
}


def _out_dir(value: str | None) -> Path:
    out = Path(value if value is not None else os.environ.get("DRILLOPT_OUT", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _canonical(points: np.ndarray) -> np.ndarray:
    """Natural (EMV, risk) -> minimized (-EMV, risk)."""
    pts = np.asarray(points, dtype=float)
    return np.column_stack([-pts[:, 0], pts[:, 1]])


def _warn_rejects(loaded: dataio.LoadResult) -> None:
    for issue in loaded.rejected:
        print(f"warning: {issue}", file=sys.stderr)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = dataio.load_run_config(args.config)
    if cfg.elicitations is None:
        raise DataError("config has no datasets.elicitations entry")
    elicitations = dataio.load_elicitations(cfg.elicitations)
    history = (
        dataio.load_history(cfg.history) if cfg.history is not None else None
    )
    reserves = (
        dataio.load_reserves(cfg.reserves) if cfg.reserves is not None else None
    )
    loaded = cfg.load_prospects()
    _warn_rejects(loaded)
    economics = {
        p.id: (p.npv, p.cost) for p in loaded.prospects.projects
    }
    sims = simulate_prospects(
        elicitations,
        history,
        cfg.simulation,
        p_mefs=cfg.p_mefs,
        economics=economics,
        reserves=reserves,
    )
    out = _out_dir(args.out)
    dataio.write_summary_csv(out / "summary.csv", sims)
    print(f"simulated {len(sims)} projects -> {out / 'summary.csv'}")
    return 0


def _run_variant(cfg: RunConfig, variant: str, seed: int | None) -> RunResult:
    solver_cfg = replace(
        cfg.solver,
        variant=variant,
        seed=cfg.solver.seed if seed is None else seed,
    )
    loaded = cfg.load_prospects()
    _warn_rejects(loaded)
    return run(loaded.prospects, cfg.targets, solver_cfg)


def _cmd_optimize(args: argparse.Namespace) -> int:
    cfg = dataio.load_run_config(args.config)
    variant = args.variant or cfg.solver.variant
    result = _run_variant(cfg, variant, args.seed)
    out = _out_dir(args.out)
    dataio.write_front_csv(out / "front.csv", result.front)
    dataio.write_trace_csv(out / "trace.csv", result.hv_trace)
    echo = dataio.config_echo(
        replace(cfg, solver=result.config)
    )
    dataio.write_manifest(
        out / "manifest.json",
        echo,
        seed=result.config.seed,
        variant=result.config.variant,
        wall_time=result.wall_time,
        evaluations=result.evaluations,
        outputs=["front.csv", "trace.csv"],
    )
    n_feas = sum(ch.feasible for ch in result.front)
    print(
        f"{variant} seed {result.config.seed}: front size "
        f"{len(result.front)} ({n_feas} feasible), "
        f"{result.evaluations} evaluations in {result.wall_time:.1f}s "
        f"-> {out / 'front.csv'}"
    )
    return 0


def _metric_rows(
    labels: list[str], canonical: list[np.ndarray], inflate: float
) -> list[dict[str, object]]:
    ref = metrics.reference_point(canonical, inflate=inflate)
    ref_set = metrics.reference_set(canonical)
    base = canonical[0]
    rows: list[dict[str, object]] = []
    for i, (label, pts) in enumerate(zip(labels, canonical)):
        rows.append(
            {
                "front": label,
                "hypervolume": metrics.hypervolume(pts, ref),
                "igd": metrics.igd(pts, ref_set),
                "spacing": metrics.spacing(pts),
                "sc_base_over_this": (
                    None if i == 0 else metrics.set_coverage(base, pts)
                ),
                "sc_this_over_base": (
                    None if i == 0 else metrics.set_coverage(pts, base)
                ),
            }
        )
    return rows


def _cmd_metrics(args: argparse.Namespace) -> int:
    if len(args.fronts) < 2:
        raise DataError("need at least two front files to compare")
    labels = [Path(p).stem for p in args.fronts]
    canonical = []
    for path in args.fronts:
        rows = dataio.read_front_csv(path)
        canonical.append(_canonical(dataio.front_objectives(rows)))
    out = Path(
        args.out
        if args.out is not None
        else _out_dir(None) / "metrics.csv"
    )
    out.parent.mkdir(parents=True, exist_ok=True)
    dataio.write_metrics_csv(
        out, _metric_rows(labels, canonical, args.inflate)
    )
    print(f"compared {len(labels)} fronts -> {out}")
    return 0


def _representative_row(
    choice: selection.RepresentativeChoice, rows: list[dataio.FrontRow]
) -> dict[str, object]:
    return {
        "method": choice.method,
        "index": choice.index,
        "bits": rows[choice.index].bits,
        "emv": choice.emv,
        "risk": choice.risk,
        "norm_emv": choice.normalized[0],
        "norm_risk": choice.normalized[1],
        "fallback": choice.fallback,
    }


def _cmd_select(args: argparse.Namespace) -> int:
    rows = dataio.read_front_csv(args.front)
    pts = dataio.front_objectives(rows)
    choice = _SELECTORS[args.method](pts)
    tiers = selection.stratify_by_risk(pts, args.tiers)
    out = _out_dir(args.out)
    dataio.write_representatives_csv(
        out / "representatives.csv", [_representative_row(choice, rows)]
    )
    dataio.write_tiers_csv(out / "tiers.csv", rows, tiers)
    print(
        f"{args.method}: plan {rows[choice.index].bits} "
        f"(EMV {choice.emv:.2f}, risk {choice.risk:.2f})"
        + (" [fallback]" if choice.fallback else "")
    )
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    cfg = dataio.load_run_config(args.config)
    out = _out_dir(args.out)
    results: dict[str, RunResult] = {}
    for variant in ("oe", "baseline"):
        result = _run_variant(cfg, variant, None)
        results[variant] = result
        dataio.write_front_csv(out / f"front_{variant}.csv", result.front)
        dataio.write_trace_csv(out / f"trace_{variant}.csv", result.hv_trace)
        print(
            f"{variant}: front size {len(result.front)} "
            f"in {result.wall_time:.1f}s"
        )

    fronts_nat = {
        variant: np.array(
            [[ch.emv, ch.risk] for ch in result.front]
        )
        for variant, result in results.items()
    }
    labels = list(results)
    canonical = [_canonical(fronts_nat[v]) for v in labels]
    dataio.write_metrics_csv(
        out / "metrics.csv",
        _metric_rows(labels, canonical, cfg.metrics_inflate),
    )

    oe_rows = dataio.read_front_csv(out / "front_oe.csv")
    oe_pts = dataio.front_objectives(oe_rows)
    rep_rows = []
    stars: dict[str, tuple[float, float]] = {}
    for method in cfg.selection_methods:
        choice = _SELECTORS[method](oe_pts)
        rep_rows.append(_representative_row(choice, oe_rows))
        stars[method] = (choice.emv, choice.risk)
    dataio.write_representatives_csv(out / "representatives.csv", rep_rows)
    tiers = selection.stratify_by_risk(oe_pts, cfg.selection_tiers)
    dataio.write_tiers_csv(out / "tiers.csv", oe_rows, tiers)

    figures.plot_front(out / "front.png", fronts_nat, stars)
    figures.plot_trace(
        out / "trace.png",
        {v: results[v].hv_trace for v in labels},
    )
    figures.plot_tiers(out / "tiers.png", oe_pts, tiers)

    outputs = [
        "front_oe.csv", "trace_oe.csv", "front_baseline.csv",
        "trace_baseline.csv", "metrics.csv", "representatives.csv",
        "tiers.csv", "front.png", "trace.png", "tiers.png",
    ]
    if cfg.elicitations is not None:
        code = _cmd_simulate(
            argparse.Namespace(config=args.config, out=str(out))
        )
        if code:
            return code
        outputs.append("summary.csv")
    dataio.write_manifest(
        out / "manifest.json",
        dataio.config_echo(cfg),
        seed=cfg.solver.seed,
        wall_times={v: results[v].wall_time for v in labels},
        outputs=sorted(outputs),
    )
    print(f"report written to {out}")
    return 0


def _cmd_calibrate(args: argparse.Namespace) -> int:
    cfg = dataio.load_run_config(args.config)
    loaded = cfg.load_prospects()
    _warn_rejects(loaded)
    cal = derive_plan_targets(
        loaded.prospects,
        cfg.targets.tot_wells,
        percentile=args.percentile,
        thre_well=cfg.targets.thre_well or 0.35,
        n_samples=args.samples,
        seed=args.seed,
    )
    for field_name in (
        "pred_lb_oil", "pred_lb_gas", "cont_lb_oil", "cont_lb_gas",
        "prov_lb_oil", "prov_lb_gas", "drill_lb", "l_ub",
        "cost_ub_trap", "cost_ub_appraisal",
    ):
        print(f"{field_name}: {getattr(cal.targets, field_name)}")
    print(f"quota_trap: {dict(cal.targets.quota_trap)}")
    print(f"quota_appraisal: {dict(cal.targets.quota_appraisal)}")
    print(f"floor_percentile: {cal.floor_percentile}")
    print(f"random_feasible_rate: {cal.feasible_rate:.4f}")
    witness_bits = "".join(str(int(b)) for b in cal.witness)
    print(f"witness: {witness_bits}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drillopt",
        description=(
            "Uncertainty quantification and bi-objective plan search for "
            "exploration drilling portfolios."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="per-project success/reserve summaries")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("optimize", help="run one solver variant")
    p.add_argument("--config", required=True)
    p.add_argument("--variant", choices=("oe", "baseline"), default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("metrics", help="compare two or more front files")
    p.add_argument("--fronts", nargs="+", required=True)
    p.add_argument("--out", default=None, help="output CSV path")
    p.add_argument("--inflate", type=float, default=0.1)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("select", help="pick representative plans from a front")
    p.add_argument("--front", required=True)
    p.add_argument("--method", choices=tuple(_SELECTORS), default="ideal")
    p.add_argument("--tiers", type=int, default=3)
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("report", help="full run: both variants, metrics, figures")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser(
        "calibrate", help="derive plan targets from random portfolios"
    )
    p.add_argument("--config", required=True)
    p.add_argument("--percentile", type=float, default=60.0)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--seed", type=int, default=20240)
    p.set_defaults(func=_cmd_calibrate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
