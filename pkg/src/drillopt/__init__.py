"""Drilling-portfolio toolkit: uncertainty, bi-objective search, reporting.

The pieces compose as a pipeline: elicited geological factors become
success-probability and reserve distributions (:mod:`drillopt.uncertainty`),
projects and program targets form a constrained two-objective portfolio
model (:mod:`drillopt.model`), an elitist genetic solver with
portfolio-aware variation operators searches it (:mod:`drillopt.solver`,
:mod:`drillopt.operators`), and fronts are scored, compared and distilled
into representative plans (:mod:`drillopt.metrics`,
:mod:`drillopt.selection`).
"""

from .calibrate import Calibration, derive_plan_targets, random_portfolio
from .dataio import (
    DataError,
    LoadResult,
    RunConfig,
    load_elicitations,
    load_history,
    load_prospects,
    load_reserves,
    load_run_config,
    read_front_csv,
    sample_config_path,
    write_front_csv,
)
from .metrics import (
    MetricsError,
    hypervolume,
    igd,
    pareto_filter,
    reference_point,
    reference_set,
    set_coverage,
    spacing,
)
from .model import (
    APPRAISAL,
    CONSTRAINT_FAMILIES,
    TRAP,
    Chromosome,
    ConstraintReport,
    ModelError,
    PlanTargets,
    Project,
    ProspectSet,
    RunningStats,
    evaluate_constraints,
    is_feasible,
    objective_emv,
    objective_risk,
    welford_add,
    welford_remove,
)
from .operators import (
    OperatorParams,
    dc_crossover,
    flip_gain,
    greedy_well_repair,
    make_direction_context,
    minmax_normalize,
    region_bias,
    sam_mutation,
)
from .selection import (
    RepresentativeChoice,
    SelectionError,
    hv_contribution_select,
    ideal_point_select,
    knee_select,
    normalize_front,
    stratify_by_risk,
)
from .solver import (
    ConfigurationError,
    RunResult,
    SolverConfig,
    crowding_distance,
    dominates,
    fast_nondominated_sort,
    run,
)
from .uncertainty import (
    BetaPosterior,
    FactorElicitation,
    ProspectElicitation,
    ProspectSimulation,
    ReserveElicitation,
    SimulationConfig,
    ThreePointEstimate,
    UncertaintyError,
    beta_posterior_update,
    beta_prior_from_pert,
    combine_gpos,
    emv,
    epos,
    estimate_spearman,
    gas_reserve_density,
    iman_conover,
    nearest_psd_correlation,
    npv,
    oil_reserve_density,
    pert_mean,
    simulate_prospects,
    triangular_inv_cdf,
)

__version__ = "0.1.0"
