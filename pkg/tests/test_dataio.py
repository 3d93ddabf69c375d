"""CSV/YAML ingestion, artifact writers and config round trips."""

import numpy as np
import pytest

from conftest import trap, wells_only_targets
from drillopt.dataio import (
    DataError,
    FrontRow,
    config_echo,
    config_from_echo,
    front_objectives,
    load_elicitations,
    load_history,
    load_prospects,
    load_reserves,
    load_run_config,
    read_front_csv,
    read_manifest,
    read_trace_csv,
    sample_config_path,
    write_front_csv,
    write_manifest,
    write_metrics_csv,
    write_representatives_csv,
    write_summary_csv,
    write_tiers_csv,
    write_trace_csv,
)
from drillopt.model import CONSTRAINT_FAMILIES, Chromosome, ProspectSet
from drillopt.uncertainty import SimulationConfig, simulate_prospects

DATA = sample_config_path().parent


# ---------------------------------------------------------------------------
# Prospect tables
# ---------------------------------------------------------------------------


def test_load_bundled_prospects(bundled_prospects):
    ps = bundled_prospects
    assert ps.n == 40
    assert ps.n_traps == 25
    assert all(p.kind == "trap" for p in ps.projects[:25])
    assert all(p.kind == "appraisal" for p in ps.projects[25:])
    ql3 = ps["QL3"]
    assert ql3.npv == pytest.approx(13515.0)
    assert ql3.pos == pytest.approx(0.53)
    assert ql3.cost == pytest.approx(3087.0)
    sb12x = ps["SB12X"]
    assert sb12x.kind == "appraisal"
    assert sb12x.npv == pytest.approx(83450.0)
    assert sb12x.pos == pytest.approx(0.6)


def test_quarantined_rows_are_rejected_not_fatal():
    result = load_prospects(
        DATA / "traps_quarantined.csv", DATA / "appraisals.csv"
    )
    assert len(result.rejected) == 5
    for issue in result.rejected:
        assert issue.column == "gpos"
        assert "outside [0, 1]" in issue.message
        assert str(issue.row) in str(issue)
    # the healthy appraisal rows still load
    assert result.prospects.n == 15


def test_load_prospects_missing_file(tmp_path):
    with pytest.raises(DataError, match="no such file"):
        load_prospects(tmp_path / "nope.csv", DATA / "appraisals.csv")


def test_load_prospects_missing_column(tmp_path):
    bad = tmp_path / "traps.csv"
    bad.write_text("region,id\nA,t1\n")
    with pytest.raises(DataError, match="missing column"):
        load_prospects(bad, DATA / "appraisals.csv")


def test_load_prospects_non_numeric_cell(tmp_path):
    bad = tmp_path / "traps.csv"
    header = "region,id,pre_or,pre_gr,cost,npv,gpos,well_count,mandatory"
    bad.write_text(f"{header}\nA,t1,0,0,10,oops,0.5,1,0\n")
    with pytest.raises(DataError, match="not a number"):
        load_prospects(bad, DATA / "appraisals.csv")


def test_load_prospects_empty_table(tmp_path):
    bad = tmp_path / "traps.csv"
    bad.write_text(
        "region,id,pre_or,pre_gr,cost,npv,gpos,well_count,mandatory\n"
    )
    with pytest.raises(DataError, match="no data rows"):
        load_prospects(bad, DATA / "appraisals.csv")


# ---------------------------------------------------------------------------
# Elicitations, history, reserves
# ---------------------------------------------------------------------------


def test_load_bundled_elicitations():
    elics = load_elicitations(DATA / "elicitations.csv")
    assert len(elics) == 25
    assert all(len(e.factors) == 5 for e in elics)
    assert {e.project_id for e in elics} >= {"QL3", "SB6"}


def test_load_elicitations_duplicate_factor(tmp_path):
    bad = tmp_path / "elic.csv"
    bad.write_text(
        "project_id,factor,a,b,c,k,s,f\n"
        "P1,source,0.2,0.4,0.6,8,1,1\n"
        "P1,source,0.2,0.4,0.6,8,1,1\n"
    )
    with pytest.raises(DataError, match="duplicate"):
        load_elicitations(bad)


def test_load_elicitations_unknown_factor(tmp_path):
    bad = tmp_path / "elic.csv"
    bad.write_text(
        "project_id,factor,a,b,c,k,s,f\nP1,luck,0.2,0.4,0.6,8,1,1\n"
    )
    with pytest.raises(DataError, match="unknown factor"):
        load_elicitations(bad)


def test_load_bundled_history():
    hist = load_history(DATA / "history.csv")
    assert hist.shape == (60, 5)
    assert np.isfinite(hist).all()
    assert ((hist >= 0.0) & (hist <= 1.0)).all()


def test_load_bundled_reserves():
    reserves = load_reserves(DATA / "reserves.csv")
    assert reserves
    for blocks in reserves.values():
        assert set(blocks) <= {"oil", "gas"}
        for block in blocks.values():
            assert block.volume_factor > 0


def test_load_reserves_duplicate_fluid(tmp_path):
    bad = tmp_path / "res.csv"
    header = (
        "project_id,fluid,phi_a,phi_b,phi_c,sat_a,sat_b,sat_c,"
        "surface_density,volume_factor"
    )
    row = "P1,oil,0.1,0.2,0.3,0.5,0.6,0.7,0.85,1.1"
    bad.write_text(f"{header}\n{row}\n{row}\n")
    with pytest.raises(DataError, match="duplicate"):
        load_reserves(bad)


def test_load_reserves_unknown_fluid(tmp_path):
    bad = tmp_path / "res.csv"
    header = (
        "project_id,fluid,phi_a,phi_b,phi_c,sat_a,sat_b,sat_c,"
        "surface_density,volume_factor"
    )
    bad.write_text(f"{header}\nP1,helium,0.1,0.2,0.3,0.5,0.6,0.7,0.85,1.1\n")
    with pytest.raises(DataError, match="oil or gas"):
        load_reserves(bad)


# ---------------------------------------------------------------------------
# Front / trace artifacts
# ---------------------------------------------------------------------------


def _evaluated_front(small_set):
    targets = wells_only_targets(2)
    plans = [
        np.array([1, 1, 0, 0, 0, 0]),
        np.array([1, 0, 0, 1, 1, 0]),
    ]
    return [Chromosome(bits).evaluate(small_set, targets) for bits in plans]


def test_front_csv_round_trip(tmp_path, small_set):
    front = _evaluated_front(small_set)
    path = tmp_path / "front.csv"
    write_front_csv(path, front)
    rows = read_front_csv(path)
    assert len(rows) == 2
    for row, ch in zip(rows, front):
        assert isinstance(row, FrontRow)
        assert row.bits == ch.bitstring()
        assert row.emv == pytest.approx(ch.emv, abs=1e-6)
        assert row.risk == pytest.approx(ch.risk, abs=1e-6)
        assert row.feasible == ch.feasible
        assert len(row.slacks) == len(CONSTRAINT_FAMILIES)
    objs = front_objectives(rows)
    assert objs.shape == (2, 2)
    assert objs[0, 0] == pytest.approx(front[0].emv, abs=1e-6)


def test_front_csv_requires_evaluated_rows(tmp_path):
    with pytest.raises(DataError, match="evaluated"):
        write_front_csv(
            tmp_path / "front.csv", [Chromosome(np.array([1, 0]))]
        )


def test_front_csv_is_byte_stable(tmp_path, small_set):
    front = _evaluated_front(small_set)
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    write_front_csv(a, front)
    write_front_csv(b, front)
    assert a.read_bytes() == b.read_bytes()


def test_trace_csv_round_trip(tmp_path):
    trace = np.array([0.0, 1.5, 2.25, 2.25])
    path = tmp_path / "trace.csv"
    write_trace_csv(path, trace)
    back = read_trace_csv(path)
    assert back == pytest.approx(trace, abs=1e-6)
    text = path.read_text().splitlines()
    assert text[0] == "generation,hypervolume"
    assert text[1].startswith("0,")


# ---------------------------------------------------------------------------
# Summary / metrics / selection artifacts
# ---------------------------------------------------------------------------


def test_summary_csv_blank_optional_cells(tmp_path):
    elics = load_elicitations(DATA / "elicitations.csv")[:2]
    sims = simulate_prospects(
        elics,
        config=SimulationConfig(n_samples=100, seed=0),
        economics={elics[0].project_id: (1000.0, 200.0)},
    )
    path = tmp_path / "summary.csv"
    write_summary_csv(path, sims)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("project_id,gpos_mean,gpos_std,epos")
    first = lines[1].split(",")
    second = lines[2].split(",")
    assert first[0] == elics[0].project_id
    assert first[-1] != ""  # EMV present where economics were given
    assert second[-1] == ""  # and blank where they were not
    assert second[4] == ""  # no reserves block -> blank oil quartet


def test_metrics_csv_blank_none_cells(tmp_path):
    path = tmp_path / "metrics.csv"
    write_metrics_csv(
        path,
        [
            {
                "front": "front_a.csv",
                "hypervolume": 6.0,
                "igd": 0.0,
                "spacing": 0.5,
                "sc_base_over_this": None,
                "sc_this_over_base": None,
            },
            {
                "front": "front_b.csv",
                "hypervolume": 4.0,
                "igd": 0.25,
                "spacing": 0.75,
                "sc_base_over_this": 0.5,
                "sc_this_over_base": 0.0,
            },
        ],
    )
    lines = path.read_text().splitlines()
    assert lines[1].endswith(",,")
    assert lines[2].endswith("0.500000,0.000000")


def test_representatives_and_tiers_csv(tmp_path):
    write_representatives_csv(
        tmp_path / "reps.csv",
        [
            {
                "method": "ideal",
                "index": 1,
                "bits": "1100",
                "emv": 10.0,
                "risk": 2.0,
                "norm_emv": 0.5,
                "norm_risk": 0.5,
                "fallback": False,
            }
        ],
    )
    lines = (tmp_path / "reps.csv").read_text().splitlines()
    assert lines[0].startswith("method,index,bits")
    assert lines[1] == "ideal,1,1100,10.000000,2.000000,0.500000,0.500000,0"

    rows = [
        FrontRow("10", 5.0, 1.0, True, 0.0, ()),
        FrontRow("01", 3.0, 0.2, True, 0.0, ()),
    ]
    write_tiers_csv(tmp_path / "tiers.csv", rows, np.array([1, 0]))
    lines = (tmp_path / "tiers.csv").read_text().splitlines()
    assert lines[0] == "tier,bits,emv,risk"
    assert lines[1].startswith("1,10,")
    assert lines[2].startswith("0,01,")


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------


def test_load_bundled_run_config(bundled_config):
    cfg = bundled_config
    assert cfg.traps.exists() and cfg.appraisals.exists()
    assert cfg.elicitations.exists()
    assert cfg.targets.tot_wells == 19
    assert cfg.targets.l_ub == 3
    assert cfg.targets.quota_trap["A"] == 8
    assert cfg.solver.pop_size == 100
    assert cfg.solver.generations == 500
    assert cfg.solver.seed == 1
    assert cfg.solver.variant == "oe"
    assert cfg.solver.params.alpha == pytest.approx(0.7)
    assert cfg.solver.params.gamma == pytest.approx(1.3)
    assert cfg.solver.params.k_bias == pytest.approx(0.3)
    assert cfg.solver.params.budget_ratio == pytest.approx(0.05)
    assert cfg.simulation.n_samples == 10_000
    assert cfg.p_mefs["QL3"] == pytest.approx(0.9)
    assert cfg.metrics_inflate == pytest.approx(0.1)
    assert cfg.selection_methods == ("ideal", "knee", "hv")
    assert cfg.selection_tiers == 3


def test_load_run_config_errors(tmp_path):
    with pytest.raises(DataError, match="no such file"):
        load_run_config(tmp_path / "missing.yaml")
    bad = tmp_path / "cfg.yaml"
    bad.write_text("- just\n- a list\n")
    with pytest.raises(DataError, match="mapping"):
        load_run_config(bad)
    bad.write_text("datasets:\n  appraisals: a.csv\n")
    with pytest.raises(DataError, match="datasets.traps"):
        load_run_config(bad)


def test_targets_validation_via_config(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text(
        "datasets:\n  traps: t.csv\n  appraisals: a.csv\n"
        "targets:\n  tot_wells: 5\n  budget: 100\n"
    )
    with pytest.raises(DataError, match="unknown targets key"):
        load_run_config(cfg)
    cfg.write_text(
        "datasets:\n  traps: t.csv\n  appraisals: a.csv\n"
        "targets:\n  drill_lb: 0.5\n"
    )
    with pytest.raises(DataError, match="tot_wells is required"):
        load_run_config(cfg)


def test_config_echo_round_trip(bundled_config):
    echo = config_echo(bundled_config)
    rebuilt = config_from_echo(echo)
    assert rebuilt.targets == bundled_config.targets
    assert rebuilt.solver == bundled_config.solver
    assert rebuilt.simulation == bundled_config.simulation
    assert rebuilt.traps == bundled_config.traps
    assert rebuilt.p_mefs == dict(bundled_config.p_mefs)
    assert rebuilt.selection_methods == bundled_config.selection_methods
    # infinite caps survive the omit-and-restore logic
    assert rebuilt.targets.cost_ub_trap == bundled_config.targets.cost_ub_trap


def test_manifest_round_trip(tmp_path, bundled_config):
    echo = config_echo(bundled_config)
    path = tmp_path / "manifest.json"
    write_manifest(path, echo, outputs=["front.csv"], wall_time=1.25)
    payload = read_manifest(path)
    assert payload["outputs"] == ["front.csv"]
    assert payload["wall_time"] == 1.25
    assert config_from_echo(payload["config"]).targets == bundled_config.targets
