"""Probability-of-success and reserve uncertainty pipeline.

Expert three-point assessments of five geological sub-factors (source,
reservoir, preservation, seal, migration) are fused with per-factor drilling
history into Beta posteriors, sampled with rank-correlation control, and
multiplied into a geological probability of success per prospect.  The same
toolbox carries triangular reserve-density simulation and the discounted
value / expected monetary value arithmetic used downstream.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.stats import norm, rankdata

#: Geological sub-factor names, in canonical column order.
FACTORS = ("source", "reservoir", "preservation", "seal", "migration")


class UncertaintyError(ValueError):
    """Invalid input to the uncertainty pipeline."""


# ---------------------------------------------------------------------------
# Elicitation primitives
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThreePointEstimate:
    """Expert minimum / most-likely / maximum assessment.

    A degenerate estimate (a == c) is allowed and treated as a known
    constant wherever it is sampled.
    """

    a: float
    b: float
    c: float

    def __post_init__(self) -> None:
        if not self.a <= self.b <= self.c:
            raise UncertaintyError(
                f"three-point estimate must satisfy a <= b <= c, got "
                f"({self.a}, {self.b}, {self.c})"
            )

    @property
    def is_degenerate(self) -> bool:
        return self.a == self.c


def triangular_inv_cdf(u, est: ThreePointEstimate):
    """Inverse CDF of the triangular distribution on (a, b, c).

    Accepts a scalar or array of probabilities in [0, 1].  The two square-root
    branches meet continuously at u = (b-a)/(c-a), where the quantile equals
    the mode b.  A degenerate estimate maps every u to the point mass.
    """
    u_arr = np.asarray(u, dtype=float)
    if np.any((u_arr < 0.0) | (u_arr > 1.0)):
        raise UncertaintyError("u must lie in [0, 1]")
    a, b, c = est.a, est.b, est.c
    if est.is_degenerate:
        out = np.full_like(u_arr, b)
        return float(out) if np.isscalar(u) else out
    split = (b - a) / (c - a)
    with np.errstate(invalid="ignore"):
        lower = a + np.sqrt(u_arr * (c - a) * (b - a))
        upper = c - np.sqrt((1.0 - u_arr) * (c - a) * (c - b))
    out = np.where(u_arr < split, lower, upper)
    return float(out) if np.isscalar(u) else out


def pert_mean(est: ThreePointEstimate) -> float:
    """PERT expectation (a + 4b + c) / 6, weighting the mode four-fold."""
    return (est.a + 4.0 * est.b + est.c) / 6.0


@dataclass(frozen=True)
class BetaPosterior:
    """Beta belief over a sub-factor probability."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if self.alpha <= 0.0 or self.beta <= 0.0:
            raise UncertaintyError(
                f"Beta parameters must be positive, got "
                f"({self.alpha}, {self.beta})"
            )

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)


def beta_prior_from_pert(mu: float, k: float) -> BetaPosterior:
    """Beta prior matching a PERT mean with confidence weight k.

    alpha = mu*(k-2) + 1 and beta = (1-mu)*(k-2) + 1, so the prior mode sits
    at mu for k > 2.  Weights in (0, 2] are accepted but flagged: the prior
    is no longer unimodal there, and some (mu, k) pairs leave the Beta family
    entirely (negative parameters), which raises.
    """
    if not 0.0 < mu < 1.0:
        raise UncertaintyError(f"PERT mean must lie in (0, 1), got {mu}")
    if k <= 0.0:
        raise UncertaintyError(f"confidence weight must be positive, got {k}")
    if k <= 2.0:
        warnings.warn(
            f"confidence weight k={k} <= 2 yields a non-unimodal prior",
            stacklevel=2,
        )
    return BetaPosterior(mu * (k - 2.0) + 1.0, (1.0 - mu) * (k - 2.0) + 1.0)


def beta_posterior_update(prior: BetaPosterior, s: int, f: int) -> BetaPosterior:
    """Conjugate update with s observed successes and f failures."""
    if s < 0 or f < 0 or s != int(s) or f != int(f):
        raise UncertaintyError(
            f"success/failure counts must be non-negative integers, got "
            f"({s}, {f})"
        )
    return BetaPosterior(prior.alpha + s, prior.beta + f)


# ---------------------------------------------------------------------------
# Rank correlation machinery
# ---------------------------------------------------------------------------


def estimate_spearman(history: np.ndarray) -> np.ndarray:
    """Spearman rank-correlation matrix of historical factor outcomes.

    Ties receive average ranks.  A constant column has no rank ordering, so
    every coefficient it participates in is defined as 0 (flagged with a
    warning); the diagonal stays 1.
    """
    x = np.asarray(history, dtype=float)
    if x.ndim != 2:
        raise UncertaintyError("history must be a 2-D array")
    n, d = x.shape
    if n < 3:
        raise UncertaintyError(f"need at least 3 observations, got {n}")
    ranks = np.column_stack(
        [rankdata(x[:, j], method="average") for j in range(d)]
    )
    constant = ranks.std(axis=0) == 0.0
    if constant.any():
        warnings.warn(
            "constant history column(s) "
            f"{np.flatnonzero(constant).tolist()}: coefficients set to 0",
            stacklevel=2,
        )
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.corrcoef(ranks, rowvar=False)
    r = np.atleast_2d(r)
    r[np.isnan(r)] = 0.0
    np.fill_diagonal(r, 1.0)
    return r


def nearest_psd_correlation(r: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Project a symmetric unit-diagonal matrix onto the PSD correlation set.

    Eigenvalues are floored at ``eps`` and the diagonal rescaled back to 1.
    A matrix that is already positive semidefinite (all eigenvalues >= eps)
    is returned unchanged up to floating-point symmetry cleanup, so the
    projection is idempotent on valid inputs.
    """
    r = np.asarray(r, dtype=float)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise UncertaintyError("correlation matrix must be square")
    if eps <= 0.0:
        raise UncertaintyError(f"eps must be positive, got {eps}")
    if not np.allclose(r, r.T, atol=1e-8):
        raise UncertaintyError("correlation matrix must be symmetric")
    if not np.allclose(np.diag(r), 1.0, atol=1e-8):
        raise UncertaintyError("correlation matrix must have unit diagonal")
    sym = (r + r.T) / 2.0
    vals, vecs = np.linalg.eigh(sym)
    if vals.min() >= eps:
        return sym
    clipped = np.maximum(vals, eps)
    b = (vecs * clipped) @ vecs.T
    scale = 1.0 / np.sqrt(np.diag(b))
    out = b * scale[:, None] * scale[None, :]
    out = (out + out.T) / 2.0
    np.fill_diagonal(out, 1.0)
    return out


def iman_conover(
    x: np.ndarray,
    target: np.ndarray,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Reorder sample columns to induce a target rank correlation.

    Van der Waerden scores of each column's ranks are decorrelated through
    the Cholesky factor of their empirical correlation and recorrelated with
    the Cholesky factor of the target; each original column is then reordered
    to match the resulting score ranks.  Column marginals are preserved
    exactly (every output column is a permutation of the input column).

    ``target`` is a rank (Spearman) correlation.  Inducing it directly as a
    linear correlation on the normal scores would undershoot: for bivariate
    normals the rank correlation of a pair with linear correlation r is
    (6/pi)*asin(r/2), up to ~0.018 below r.  The scores are therefore
    recorrelated with 2*sin(pi*target/6), whose rank correlation is the
    requested target.

    ``rng``, when given, randomly permutes the score rows first so that any
    accidental rank alignment between input columns cannot leak through.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise UncertaintyError("samples must form a 2-D array")
    n, d = x.shape
    if n < 2:
        raise UncertaintyError(f"need at least 2 sample rows, got {n}")
    target = np.asarray(target, dtype=float)
    if target.shape != (d, d):
        raise UncertaintyError(
            f"target correlation has shape {target.shape}, expected ({d}, {d})"
        )
    try:
        cholesky(target, lower=True)
    except np.linalg.LinAlgError as exc:
        raise UncertaintyError(
            "target correlation is not positive definite; project it with "
            "nearest_psd_correlation first"
        ) from exc
    linear = 2.0 * np.sin(np.pi * target / 6.0)
    np.fill_diagonal(linear, 1.0)
    try:
        target_chol = cholesky(linear, lower=True)
    except np.linalg.LinAlgError:
        # The elementwise map can nudge a barely-PD target indefinite;
        # project quietly since the caller's input itself was valid.
        target_chol = cholesky(
            nearest_psd_correlation(linear), lower=True
        )

    ranks = np.column_stack(
        [rankdata(x[:, j], method="average") for j in range(d)]
    )
    scores = norm.ppf(ranks / (n + 1))
    if rng is not None:
        scores = scores[rng.permutation(n), :]
    try:
        emp_chol = cholesky(np.corrcoef(scores, rowvar=False), lower=True)
    except np.linalg.LinAlgError as exc:
        raise UncertaintyError(
            "empirical score correlation is singular (too few rows or a "
            "constant column)"
        ) from exc
    decorrelated = solve_triangular(emp_chol, scores.T, lower=True).T
    correlated = decorrelated @ target_chol.T

    out = np.empty_like(x)
    for j in range(d):
        order = rankdata(correlated[:, j], method="ordinal").astype(int) - 1
        out[:, j] = np.sort(x[:, j])[order]
    return out


# ---------------------------------------------------------------------------
# Success probabilities, reserves, and value arithmetic
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimulationSummary:
    """Quantile summary of one simulated quantity.

    Quantiles follow the reserves-at-confidence convention: P90 is the value
    exceeded with 90% probability (the 10th percentile), so P90 <= P50 <= P10.
    """

    mean: float
    stddev: float
    p90: float
    p50: float
    p10: float
    pmean: float


def summarize(samples: np.ndarray) -> SimulationSummary:
    """Summarize a 1-D sample with N-1 spread and P90/P50/P10 quantiles."""
    s = np.asarray(samples, dtype=float)
    if s.ndim != 1 or s.size == 0:
        raise UncertaintyError("samples must form a non-empty 1-D array")
    std = float(s.std(ddof=1)) if s.size > 1 else 0.0
    return SimulationSummary(
        mean=float(s.mean()),
        stddev=std,
        p90=float(np.quantile(s, 0.10)),
        p50=float(np.quantile(s, 0.50)),
        p10=float(np.quantile(s, 0.90)),
        pmean=float(s.mean()),
    )


def combine_gpos(x_corr: np.ndarray) -> tuple[np.ndarray, SimulationSummary]:
    """Row-wise product of factor samples: the geological PoS per draw."""
    x = np.asarray(x_corr, dtype=float)
    if x.ndim != 2:
        raise UncertaintyError("factor samples must form a 2-D array")
    if np.any((x < 0.0) | (x > 1.0)):
        raise UncertaintyError("factor samples must lie in [0, 1]")
    p = x.prod(axis=1)
    return p, summarize(p)


def epos(gpos: float, p_mefs: float) -> float:
    """Economic PoS: geological PoS thinned by the commercial-viability term."""
    for name, v in (("gpos", gpos), ("p_mefs", p_mefs)):
        if not 0.0 <= v <= 1.0:
            raise UncertaintyError(f"{name} must lie in [0, 1], got {v}")
    return gpos * p_mefs


def oil_reserve_density(porosity, saturation, surface_density, volume_factor):
    """Oil reserve areal density, 1e4 t/km^2: 100 * phi * S * rho / beta."""
    if np.any(np.asarray(volume_factor) <= 0.0):
        raise UncertaintyError("volume factor must be positive")
    return 100.0 * porosity * saturation * surface_density / volume_factor


def gas_reserve_density(porosity, saturation, surface_density, volume_factor):
    """Gas reserve areal density, 1e8 m^3/km^2: 0.01 * phi * S * rho / beta."""
    if np.any(np.asarray(volume_factor) <= 0.0):
        raise UncertaintyError("volume factor must be positive")
    return 0.01 * porosity * saturation * surface_density / volume_factor


def npv(flows: Sequence[float], r: float) -> float:
    """Net present value of a cash-flow stream starting at t = 0."""
    if r <= -1.0:
        raise UncertaintyError(f"discount rate must exceed -1, got {r}")
    return float(
        sum(flow / (1.0 + r) ** t for t, flow in enumerate(flows))
    )


def emv(npv_value: float, pos: float, costs: float) -> float:
    """Expected monetary value: npv*pos - costs*(1 - pos)."""
    if not 0.0 <= pos <= 1.0:
        raise UncertaintyError(f"pos must lie in [0, 1], got {pos}")
    return npv_value * pos - costs * (1.0 - pos)


# ---------------------------------------------------------------------------
# Prospect-level Monte Carlo
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FactorElicitation:
    """Three-point assessment plus history for one sub-factor."""

    estimate: ThreePointEstimate
    k: float
    successes: int = 0
    failures: int = 0

    def __post_init__(self) -> None:
        if self.estimate.a < 0.0 or self.estimate.c > 1.0:
            raise UncertaintyError(
                "sub-factor probabilities must be elicited within [0, 1], got "
                f"({self.estimate.a}, {self.estimate.b}, {self.estimate.c})"
            )

    def posterior(self) -> BetaPosterior:
        prior = beta_prior_from_pert(pert_mean(self.estimate), self.k)
        return beta_posterior_update(prior, self.successes, self.failures)


@dataclass(frozen=True)
class ProspectElicitation:
    """All five sub-factor elicitations for one project."""

    project_id: str
    factors: Mapping[str, FactorElicitation]

    def __post_init__(self) -> None:
        missing = [f for f in FACTORS if f not in self.factors]
        if missing:
            raise UncertaintyError(
                f"project {self.project_id}: missing factor elicitations "
                f"{', '.join(missing)}"
            )
        unknown = [f for f in self.factors if f not in FACTORS]
        if unknown:
            raise UncertaintyError(
                f"project {self.project_id}: unknown factors "
                f"{', '.join(sorted(unknown))}"
            )


@dataclass(frozen=True)
class ReserveElicitation:
    """Triangular porosity/saturation inputs for one fluid's density."""

    porosity: ThreePointEstimate
    saturation: ThreePointEstimate
    surface_density: float
    volume_factor: float


@dataclass(frozen=True)
class SimulationConfig:
    n_samples: int = 10_000
    eps: float = 1e-6
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_samples < 2:
            raise UncertaintyError("n_samples must be at least 2")
        if self.eps <= 0.0:
            raise UncertaintyError("eps must be positive")


@dataclass(frozen=True)
class ProspectSimulation:
    """Per-project simulation output feeding the portfolio model."""

    project_id: str
    gpos: SimulationSummary
    epos: float
    oil: SimulationSummary | None = None
    gas: SimulationSummary | None = None
    npv: float | None = None
    emv: float | None = None


def _factor_samples(
    elic: FactorElicitation, n: int, rng: np.random.Generator
) -> np.ndarray:
    if elic.estimate.is_degenerate:
        return np.full(n, elic.estimate.b)
    post = elic.posterior()
    return rng.beta(post.alpha, post.beta, size=n)


def _reserve_summary(
    block: ReserveElicitation,
    density_fn,
    n: int,
    seed: np.random.SeedSequence,
) -> SimulationSummary:
    phi_rng, sat_rng = (np.random.default_rng(s) for s in seed.spawn(2))
    phi = triangular_inv_cdf(phi_rng.uniform(size=n), block.porosity)
    sat = triangular_inv_cdf(sat_rng.uniform(size=n), block.saturation)
    dens = density_fn(phi, sat, block.surface_density, block.volume_factor)
    return summarize(np.asarray(dens, dtype=float))


def simulate_prospects(
    elicitations: Sequence[ProspectElicitation],
    history: np.ndarray | None = None,
    config: SimulationConfig = SimulationConfig(),
    *,
    p_mefs: Mapping[str, float] | None = None,
    economics: Mapping[str, tuple[float, float]] | None = None,
    reserves: Mapping[str, Mapping[str, ReserveElicitation]] | None = None,
) -> dict[str, ProspectSimulation]:
    """Monte Carlo GPoS/EPoS (and optionally reserves, EMV) per project.

    Factor posteriors are sampled independently, then reordered to the
    history's Spearman structure (projected to a valid correlation first).
    Degenerate factors stay constant and are excluded from the reordering.
    ``economics`` maps project id to (npv, cost) for the EMV column;
    ``reserves`` maps project id to per-fluid ("oil"/"gas") density inputs.
    Deterministic for a given config seed: every project, factor, and fluid
    draws from its own spawned sub-stream.

    Returns a dict keyed by project id, in input order.
    """
    p_mefs = dict(p_mefs or {})
    economics = dict(economics or {})
    reserves = dict(reserves or {})

    target: np.ndarray | None = None
    if history is not None:
        target = nearest_psd_correlation(
            estimate_spearman(history), config.eps
        )
        if target.shape != (len(FACTORS), len(FACTORS)):
            raise UncertaintyError(
                f"history must have {len(FACTORS)} factor columns"
            )

    root = np.random.SeedSequence(config.seed)
    results: dict[str, ProspectSimulation] = {}
    for elic, proj_seed in zip(elicitations, root.spawn(len(elicitations))):
        # 5 factor streams, one reordering stream, one reserve stream.
        streams = proj_seed.spawn(len(FACTORS) + 2)
        n = config.n_samples
        x = np.column_stack(
            [
                _factor_samples(
                    elic.factors[f], n, np.random.default_rng(streams[i])
                )
                for i, f in enumerate(FACTORS)
            ]
        )
        live = [
            i
            for i, f in enumerate(FACTORS)
            if not elic.factors[f].estimate.is_degenerate
        ]
        if target is not None and len(live) >= 2:
            sub = target[np.ix_(live, live)]
            x[:, live] = iman_conover(
                x[:, live], sub, np.random.default_rng(streams[len(FACTORS)])
            )
        _, gpos_summary = combine_gpos(x)

        mefs = p_mefs.get(elic.project_id, 1.0)
        pos_e = epos(min(gpos_summary.mean, 1.0), mefs)

        oil = gas = None
        blocks = reserves.get(elic.project_id, {})
        if blocks:
            unknown = set(blocks) - {"oil", "gas"}
            if unknown:
                raise UncertaintyError(
                    f"project {elic.project_id}: unknown fluid(s) "
                    f"{', '.join(sorted(unknown))}"
                )
            fluid_seeds = streams[len(FACTORS) + 1].spawn(2)
            if "oil" in blocks:
                oil = _reserve_summary(
                    blocks["oil"], oil_reserve_density, n, fluid_seeds[0]
                )
            if "gas" in blocks:
                gas = _reserve_summary(
                    blocks["gas"], gas_reserve_density, n, fluid_seeds[1]
                )

        value = cost = None
        project_emv = None
        if elic.project_id in economics:
            value, cost = economics[elic.project_id]
            project_emv = emv(value, pos_e, cost)

        results[elic.project_id] = ProspectSimulation(
            project_id=elic.project_id,
            gpos=gpos_summary,
            epos=pos_e,
            oil=oil,
            gas=gas,
            npv=value,
            emv=project_emv,
        )
    return results
