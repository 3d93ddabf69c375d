"""Shared fixtures and tiny instance builders for the test suite."""

import numpy as np
import pytest
from hypothesis import settings

from drillopt.dataio import load_run_config, sample_config_path
from drillopt.model import APPRAISAL, TRAP, PlanTargets, Project, ProspectSet

settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")


def trap(pid, npv=1000.0, pos=0.5, cost=100.0, wells=1, region="A",
         mandatory=False, pre_or=0.0, pre_gr=0.0):
    return Project(
        id=pid, region=region, kind=TRAP, cost=cost, npv=npv, pos=pos,
        well_count=wells, mandatory=mandatory, pre_or=pre_or, pre_gr=pre_gr,
    )


def appraisal(pid, npv=1000.0, pos=0.6, cost=50.0, wells=0, region="A",
              mandatory=False, cor=0.0, cgr=0.0, pro_or=0.0, pro_gr=0.0):
    return Project(
        id=pid, region=region, kind=APPRAISAL, cost=cost, npv=npv, pos=pos,
        well_count=wells, mandatory=mandatory, cor=cor, cgr=cgr,
        pro_or=pro_or, pro_gr=pro_gr,
    )


def wells_only_targets(tot_wells):
    """Targets with every side constraint left permissive."""
    return PlanTargets(tot_wells=tot_wells)


@pytest.fixture(scope="session")
def bundled_config():
    return load_run_config(sample_config_path())


@pytest.fixture(scope="session")
def bundled_prospects(bundled_config):
    return bundled_config.load_prospects().prospects


@pytest.fixture
def small_set():
    """Six projects (4 traps + 2 appraisals), no mandatory, wells 0-2."""
    projects = [
        trap("t1", npv=2000, pos=0.8, cost=300, wells=1, region="A"),
        trap("t2", npv=1500, pos=0.4, cost=200, wells=1, region="A"),
        trap("t3", npv=900, pos=0.6, cost=150, wells=2, region="B"),
        trap("t4", npv=400, pos=0.2, cost=100, wells=1, region="B"),
        appraisal("a1", npv=1200, pos=0.7, cost=80, wells=1, region="A"),
        appraisal("a2", npv=600, pos=0.9, cost=40, wells=0, region="B"),
    ]
    return ProspectSet(projects)
