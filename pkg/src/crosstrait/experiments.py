"""Declarative Monte-Carlo experiment runner.

A scenario is a grid of design points; every (point, replicate) pair is an
independent task that generates fresh cohorts, runs the marginal scan,
builds the scores, and records raw and bias-corrected correlation estimates
(or scan-quality metrics).  Tasks are pure functions of
``(config, point, replicate_index)`` through the splittable seed contract,
so running with one worker or many yields identical replicate rows.

Scenarios
---------
fig2_all_snp        all-SNP estimators across a grid of true correlations
figS5_summary_only  the summary-statistics-only estimator across the grid
figS2_sparsity      all-SNP phenotype-vs-score estimator across sparsities
fig3_screening      screened estimator across a p-value threshold ladder
fig4_overlap        overlapping-samples designs across the correlation grid
fig1_gwas_properties  scan quality (AUC, power, enrichment, MSE) and the
                      variance of a null-SNP marginal effect across sparsity
custom              alias of fig2_all_snp (fully driven by the config)
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from . import kernels
from .errors import DegenerateScoreError, ExperimentError, ParameterError
from .estimators import DesignMeta, correct, raw_cosine, screened_factor_ae
from .gwas import marginal_gwas, screen_metrics, threshold_select
from .prs import RULE_NONE, ScreenRule, score
from .rng import substream
from .synth import (
    CohortSizes,
    OverlapDesign,
    TraitArchitecture,
    gen_independent_cohorts,
    gen_overlapping_cohorts,
)

# the p-value threshold ladder used by the screening study
DEFAULT_THRESHOLDS = (
    1.0, 0.8, 0.5, 0.4, 0.3, 0.2, 0.1, 0.08, 0.05, 0.02, 0.01,
    1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8,
)

SCENARIOS = (
    "fig1_gwas_properties",
    "fig2_all_snp",
    "fig3_screening",
    "fig4_overlap",
    "figS2_sparsity",
    "figS5_summary_only",
    "custom",
)

WORKERS_ENV = "CROSSTRAIT_WORKERS"


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    p: int
    n1: int
    n2: int = 0
    n3: int = 0
    n_s: int = 0
    m: int = 0
    sigma2: float = 1.0
    h2: float = 1.0
    rho_eps: float = 0.0
    phi_grid: tuple = ()
    sparsity_grid: tuple = ()
    thresholds: tuple = DEFAULT_THRESHOLDS
    replicates: int = 200
    master_seed: int = 0
    sigma2_eps: float | None = None
    standardize_y: bool = True
    reuse_genotypes: bool = False
    overlap_cases: tuple = ("i", "ii")
    block_size: int = kernels.DEFAULT_BLOCK_SIZE

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ParameterError(f"unknown scenario {self.scenario!r}; choose from {SCENARIOS}")
        if self.replicates < 1:
            raise ParameterError("replicates must be >= 1")
        if set(self.overlap_cases) - {"i", "ii"}:
            raise ParameterError("overlap_cases entries must be 'i' or 'ii'")

    _GRID_KEYS = ("phi_grid", "sparsity_grid", "thresholds")
    _BOOL_KEYS = ("standardize_y", "reuse_genotypes")
    _FLOAT_KEYS = ("sigma2", "h2", "rho_eps", "sigma2_eps")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        """Build from the flat key=value config-file mapping."""
        known = {f.name for f in fields(cls)}
        alias = {"ns": "n_s", "seed": "master_seed"}
        kwargs = {}
        for key, value in raw.items():
            name = alias.get(key, key)
            if name not in known:
                raise ParameterError(f"unknown config key {key!r}")
            if name in cls._GRID_KEYS:
                kwargs[name] = tuple(float(v) for v in str(value).split(",") if str(v).strip())
            elif name == "overlap_cases":
                kwargs[name] = tuple(v.strip() for v in str(value).split(",") if v.strip())
            elif name in cls._BOOL_KEYS:
                kwargs[name] = str(value).strip().lower() in ("1", "true", "yes", "on")
            elif name in cls._FLOAT_KEYS:
                kwargs[name] = float(value)
            elif name == "scenario":
                kwargs[name] = str(value).strip()
            else:
                kwargs[name] = int(value)
        return cls(**kwargs)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(x if isinstance(x, str) else f"{x:g}" for x in v)
            out[f.name] = v
        return out


@dataclass
class ReplicateRow:
    scenario: str
    point_id: str
    estimator: str
    replicate: int
    raw: float
    corrected: float
    factor: float
    flag: str = "ok"


@dataclass
class AggregateRow:
    scenario: str
    point_id: str
    estimator: str
    mean: float
    sd: float
    n: int


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    replicate_rows: list
    aggregate_rows: list
    failures: list


def genetic_share(arch: TraitArchitecture, rho_eps: float, pair: str) -> float:
    """Genetic fraction of the phenotypic correlation on shared samples.

    h = m sigma_cross / (m sigma_cross + sigma_eps_cross).  When both the
    genetic and error cross-covariances vanish there is no correlation to
    apportion and the share is reported as 1.
    """
    if pair == "ae":
        gen = arch.m_alpha_eta * arch.sigma_alpha_eta
        cross = rho_eps * math.sqrt(arch.sigma2_eps("alpha") * arch.sigma2_eps("eta"))
    elif pair == "ab":
        gen = arch.m_alpha_beta * arch.sigma_alpha_beta
        cross = rho_eps * math.sqrt(arch.sigma2_eps("alpha") * arch.sigma2_eps("beta"))
    else:
        raise ParameterError("pair must be 'ae' or 'ab'")
    total = gen + cross
    if total == 0.0:
        return 1.0
    h = gen / total
    if not (0.0 < h <= 1.0):
        raise ParameterError(
            f"induced genetic share {h:.4g} outside (0, 1]; the closed-form "
            "corrections require non-negative error cross-covariance"
        )
    return h


def _h2_for_fixed_noise(m: int, sigma2: float, sigma2_eps: float) -> float:
    """Heritability whose calibrated error variance equals sigma2_eps."""
    return m * sigma2 / (m * sigma2 + sigma2_eps)


def _rep_seed(config: ExperimentConfig, point_id: str, rep: int, stream: str = "") -> int:
    label = f"{config.scenario}|{point_id}|{stream}"
    return int(substream(config.master_seed, label, rep).integers(2**63))


def _estimate_row(
    config, point_id, rep, name, u, v, meta, screen=None
) -> ReplicateRow:
    """Cosine + correction, with degenerate scores recorded, not raised."""
    try:
        raw = raw_cosine(u, v)
    except DegenerateScoreError:
        return ReplicateRow(config.scenario, point_id, name, rep, 0.0, float("nan"),
                            0.0, "degenerate_score")
    est = correct(raw, meta, screen)
    flag = est.regime_flag
    if est.out_of_range:
        flag += ";corrected_out_of_range"
    return ReplicateRow(config.scenario, point_id, name, rep, raw,
                        est.corrected, est.bias_factor, flag)


# ---------------------------------------------------------------------------
# scenario implementations
# ---------------------------------------------------------------------------

def _points_fig2(config):
    if not config.phi_grid:
        raise ParameterError("fig2_all_snp needs a phi_grid")
    if config.n1 < 2 or config.n3 < 2:
        raise ParameterError("fig2_all_snp needs discovery (n1) and target (n3) cohorts")
    return [{"point_id": f"phi={phi:g}", "phi": phi} for phi in config.phi_grid]


def _rep_fig2(config: ExperimentConfig, point: dict, rep: int) -> list:
    phi = point["phi"]
    pid = point["point_id"]
    traits = ("alpha", "beta", "eta") if config.n2 else ("alpha", "eta")
    arch = TraitArchitecture.shared_causal(
        config.p, config.m, phi=phi, sigma2=config.sigma2, h2=config.h2, traits=traits
    )
    seed = _rep_seed(config, pid, rep)
    geno_seed = _rep_seed(config, pid, 0, "geno") if config.reuse_genotypes else None
    bundle = gen_independent_cohorts(
        arch, CohortSizes(config.n1, config.n2, config.n3), seed, traits=traits,
        genotype_seed=geno_seed,
    )
    stats_a = marginal_gwas(bundle.disc_alpha, bundle.y_alpha.y, config.standardize_y,
                            trait_tag="alpha", block_size=config.block_size)
    prs_a = score(bundle.target, stats_a, RULE_NONE, block_size=config.block_size)
    rows = [
        _estimate_row(
            config, pid, rep, "G_ae", bundle.y_eta.y, prs_a.scores,
            DesignMeta(case_tag="indep_ae", p=config.p, n1=config.n1, n3=config.n3,
                       h2_alpha=config.h2, h2_eta=config.h2),
        )
    ]
    if config.n2:
        stats_b = marginal_gwas(bundle.disc_beta, bundle.y_beta.y, config.standardize_y,
                                trait_tag="beta", block_size=config.block_size)
        prs_b = score(bundle.target, stats_b, RULE_NONE, block_size=config.block_size)
        rows.append(
            _estimate_row(
                config, pid, rep, "G_ab", prs_b.scores, prs_a.scores,
                DesignMeta(case_tag="indep_ab", p=config.p, n1=config.n1, n2=config.n2,
                           n3=config.n3, h2_alpha=config.h2, h2_beta=config.h2),
            )
        )
        rows.append(
            _estimate_row(
                config, pid, rep, "phi_ab_summary", stats_a.effect, stats_b.effect,
                DesignMeta(case_tag="summary_ab", p=config.p, n1=config.n1, n2=config.n2,
                           h2_alpha=config.h2, h2_beta=config.h2),
            )
        )
    return rows


def _points_figs5(config):
    if not config.phi_grid:
        raise ParameterError("figS5_summary_only needs a phi_grid")
    if config.n1 < 2 or config.n2 < 2:
        raise ParameterError("figS5_summary_only needs both discovery cohorts (n1, n2)")
    return [{"point_id": f"phi={phi:g}", "phi": phi} for phi in config.phi_grid]


def _rep_figs5(config, point, rep):
    phi = point["phi"]
    pid = point["point_id"]
    arch = TraitArchitecture.shared_causal(
        config.p, config.m, phi=phi, sigma2=config.sigma2, h2=config.h2,
        traits=("alpha", "beta"),
    )
    seed = _rep_seed(config, pid, rep)
    bundle = gen_independent_cohorts(
        arch, CohortSizes(n1=config.n1, n2=config.n2), seed, traits=("alpha", "beta")
    )
    stats_a = marginal_gwas(bundle.disc_alpha, bundle.y_alpha.y, config.standardize_y)
    stats_b = marginal_gwas(bundle.disc_beta, bundle.y_beta.y, config.standardize_y)
    meta = DesignMeta(case_tag="summary_ab", p=config.p, n1=config.n1, n2=config.n2,
                      h2_alpha=config.h2, h2_beta=config.h2)
    return [_estimate_row(config, pid, rep, "phi_ab_summary",
                          stats_a.effect, stats_b.effect, meta)]


def _points_figs2(config):
    if not config.sparsity_grid or not config.phi_grid:
        raise ParameterError("figS2_sparsity needs sparsity_grid and a single-phi phi_grid")
    if config.n1 < 2 or config.n3 < 2:
        raise ParameterError("figS2_sparsity needs discovery (n1) and target (n3) cohorts")
    return [{"point_id": f"mp={s:g}", "sparsity": s} for s in config.sparsity_grid]


def _rep_figs2(config, point, rep):
    pid = point["point_id"]
    m = max(1, round(point["sparsity"] * config.p))
    arch = TraitArchitecture.shared_causal(
        config.p, m, phi=config.phi_grid[0], sigma2=config.sigma2, h2=config.h2,
        traits=("alpha", "eta"),
    )
    seed = _rep_seed(config, pid, rep)
    bundle = gen_independent_cohorts(
        arch, CohortSizes(n1=config.n1, n3=config.n3), seed, traits=("alpha", "eta")
    )
    stats = marginal_gwas(bundle.disc_alpha, bundle.y_alpha.y, config.standardize_y)
    prs = score(bundle.target, stats, RULE_NONE)
    meta = DesignMeta(case_tag="indep_ae", p=config.p, n1=config.n1, n3=config.n3,
                      h2_alpha=config.h2, h2_eta=config.h2)
    return [_estimate_row(config, pid, rep, "G_ae", bundle.y_eta.y, prs.scores, meta)]


def _points_fig3(config):
    if not config.sparsity_grid or not config.phi_grid:
        raise ParameterError("fig3_screening needs sparsity_grid and a single-phi phi_grid")
    if config.n1 < 2 or config.n3 < 2:
        raise ParameterError("fig3_screening needs discovery (n1) and target (n3) cohorts")
    return [{"point_id": f"mp={s:g}", "sparsity": s} for s in config.sparsity_grid]


def _rep_fig3(config, point, rep):
    pid = point["point_id"]
    m = max(1, round(point["sparsity"] * config.p))
    arch = TraitArchitecture.shared_causal(
        config.p, m, phi=config.phi_grid[0], sigma2=config.sigma2, h2=config.h2,
        traits=("alpha", "eta"),
    )
    seed = _rep_seed(config, pid, rep)
    bundle = gen_independent_cohorts(
        arch, CohortSizes(n1=config.n1, n3=config.n3), seed, traits=("alpha", "eta")
    )
    stats = marginal_gwas(bundle.disc_alpha, bundle.y_alpha.y, config.standardize_y)
    meta = DesignMeta(case_tag="screened_ae", p=config.p, n1=config.n1, n3=config.n3,
                      h2_alpha=config.h2, h2_eta=config.h2)
    rows = []
    for thr in config.thresholds:
        rule = ScreenRule("pvalue_cutoff", thr)
        sel = threshold_select(stats, rule, truth=bundle.effects["alpha"],
                               overlap_truth=bundle.effects["eta"])
        name = f"G_T@{thr:g}"
        flag_counts = f"q={sel.q};q1={sel.q1};qae={sel.q_overlap}"
        if sel.empty:
            rows.append(ReplicateRow(config.scenario, pid, name, rep, 0.0, float("nan"),
                                     0.0, "empty_selection;" + flag_counts))
            continue
        prs = score(bundle.target, stats, rule)
        try:
            raw = raw_cosine(bundle.y_eta.y, prs.scores)
        except DegenerateScoreError:
            rows.append(ReplicateRow(config.scenario, pid, name, rep, 0.0, float("nan"),
                                     0.0, "degenerate_score;" + flag_counts))
            continue
        factor = screened_factor_ae(meta, sel.q, sel.q1, sel.q_overlap,
                                    arch.m_alpha, arch.m_alpha_eta)
        corrected = raw / factor if factor > 0 else float("nan")
        rows.append(ReplicateRow(config.scenario, pid, name, rep, raw, corrected,
                                 factor, "ok;" + flag_counts))
    return rows


def _points_fig4(config):
    if not config.phi_grid:
        raise ParameterError("fig4_overlap needs a phi_grid")
    if config.n3 < 2:
        raise ParameterError("fig4_overlap needs target samples (n3)")
    if "i" in config.overlap_cases and config.n1 + config.n_s < 2:
        raise ParameterError("fig4_overlap case i needs discovery samples (n1 + n_s)")
    if "ii" in config.overlap_cases and min(config.n1 + config.n_s, config.n2 + config.n_s) < 2:
        raise ParameterError("fig4_overlap case ii needs both discovery cohorts")
    return [{"point_id": f"phi={phi:g}", "phi": phi} for phi in config.phi_grid]


def _rep_fig4(config, point, rep):
    phi = point["phi"]
    pid = point["point_id"]
    rows = []
    if "i" in config.overlap_cases:
        seed_i = _rep_seed(config, pid, rep, "case_i")
        arch_i = TraitArchitecture.shared_causal(
            config.p, config.m, phi=phi, sigma2=config.sigma2, h2=config.h2,
            traits=("alpha", "eta"),
        )
        design_i = OverlapDesign(n_s=config.n_s, pair="discovery_target", rho_eps=config.rho_eps)
        b = gen_overlapping_cohorts(design_i, arch_i, CohortSizes(n1=config.n1, n3=config.n3), seed_i)
        stats = marginal_gwas(b.disc_alpha, b.y_alpha.y, config.standardize_y,
                              block_size=config.block_size)
        prs = score(b.target, stats, RULE_NONE, block_size=config.block_size)
        meta_i = DesignMeta(case_tag="overlap_case_i", p=config.p, n1=config.n1, n3=config.n3,
                            n_s=config.n_s, h2_alpha=config.h2, h2_eta=config.h2,
                            h_alpha_eta=genetic_share(arch_i, config.rho_eps, "ae"))
        rows.append(_estimate_row(config, pid, rep, "G_S_ae", b.y_eta.y, prs.scores, meta_i))

    if "ii" in config.overlap_cases:
        seed_ii = _rep_seed(config, pid, rep, "case_ii")
        arch_ii = TraitArchitecture.shared_causal(
            config.p, config.m, phi=phi, sigma2=config.sigma2, h2=config.h2,
            traits=("alpha", "beta"),
        )
        design_ii = OverlapDesign(n_s=config.n_s, pair="discovery_discovery", rho_eps=config.rho_eps)
        b = gen_overlapping_cohorts(
            design_ii, arch_ii, CohortSizes(n1=config.n1, n2=config.n2, n3=config.n3), seed_ii
        )
        stats_a = marginal_gwas(b.disc_alpha, b.y_alpha.y, config.standardize_y,
                                block_size=config.block_size)
        stats_b = marginal_gwas(b.disc_beta, b.y_beta.y, config.standardize_y,
                                block_size=config.block_size)
        prs_a = score(b.target, stats_a, RULE_NONE, block_size=config.block_size)
        prs_b = score(b.target, stats_b, RULE_NONE, block_size=config.block_size)
        meta_ii = DesignMeta(case_tag="overlap_case_ii", p=config.p, n1=config.n1, n2=config.n2,
                             n3=config.n3, n_s=config.n_s, h2_alpha=config.h2, h2_beta=config.h2,
                             h_alpha_beta=genetic_share(arch_ii, config.rho_eps, "ab"))
        rows.append(_estimate_row(config, pid, rep, "G_S_ab", prs_b.scores, prs_a.scores, meta_ii))
    return rows


def _points_fig1(config):
    if not config.sparsity_grid:
        raise ParameterError("fig1_gwas_properties needs a sparsity_grid")
    return [{"point_id": f"mp={s:g}", "sparsity": s} for s in config.sparsity_grid]


def _rep_fig1(config, point, rep):
    pid = point["point_id"]
    m = max(1, round(point["sparsity"] * config.p))
    # keep one null SNP available as the variance-law probe
    p_total = config.p + 1 if m == config.p else config.p
    sigma2_eps = config.sigma2_eps if config.sigma2_eps is not None else 1.0
    h2 = _h2_for_fixed_noise(m, config.sigma2, sigma2_eps)
    arch = TraitArchitecture(p=p_total, m_alpha=m, sigma2_alpha=config.sigma2, h2_alpha=h2)
    seed = _rep_seed(config, pid, rep)
    geno_seed = _rep_seed(config, pid, 0, "geno") if config.reuse_genotypes else None
    bundle = gen_independent_cohorts(
        arch, CohortSizes(n1=config.n1), seed, traits=("alpha",), genotype_seed=geno_seed
    )
    stats = marginal_gwas(bundle.disc_alpha, bundle.y_alpha.y, config.standardize_y)
    rows = []
    if m < p_total:
        metrics = screen_metrics(stats, bundle.effects["alpha"])
        for name, value in (("auc", metrics.auc), ("power", metrics.power),
                            ("enrichment", metrics.enrichment), ("beta_mse", metrics.beta_mse)):
            rows.append(ReplicateRow(config.scenario, pid, name, rep, value,
                                     float("nan"), float("nan")))
        probe = int(np.setdiff1d(np.arange(p_total), arch.causal_sets["alpha"])[0])
        rows.append(ReplicateRow(config.scenario, pid, "bhat_null_probe", rep,
                                 float(stats.effect[probe]), float("nan"), float("nan")))
    return rows


_SCENARIO_IMPL = {
    "fig2_all_snp": (_points_fig2, _rep_fig2),
    "custom": (_points_fig2, _rep_fig2),
    "figS5_summary_only": (_points_figs5, _rep_figs5),
    "figS2_sparsity": (_points_figs2, _rep_figs2),
    "fig3_screening": (_points_fig3, _rep_fig3),
    "fig4_overlap": (_points_fig4, _rep_fig4),
    "fig1_gwas_properties": (_points_fig1, _rep_fig1),
}


def _run_task(args):
    config, point, rep = args
    _, rep_fn = _SCENARIO_IMPL[config.scenario]
    try:
        return ("ok", rep_fn(config, point, rep))
    except Exception as exc:  # recorded, counted, excluded from aggregates
        return ("fail", (point["point_id"], rep, f"{type(exc).__name__}: {exc}"))


def resolve_workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return 1


def aggregate(rows: list) -> list:
    """Mean/SD/count per (scenario, point, estimator), raw and corrected.

    Exactly stable under row permutation: within a group the values are put
    in replicate order before the (pairwise-summed) reduction, so the float
    result does not depend on arrival order.  Constant groups report SD 0.
    """
    groups: dict[tuple, dict[str, list]] = {}
    for r in rows:
        key = (r.scenario, r.point_id, r.estimator)
        g = groups.setdefault(key, {"raw": [], "corrected": []})
        g["raw"].append((r.replicate, r.raw))
        g["corrected"].append((r.replicate, r.corrected))
    out = []
    for key in sorted(groups):
        scenario, point_id, estimator = key
        for kind in ("raw", "corrected"):
            ordered = [v for _, v in sorted(groups[key][kind], key=lambda t: t[0])]
            vals = np.asarray(ordered, dtype=np.float64)
            vals = vals[np.isfinite(vals)]
            if vals.size == 0:
                continue
            if np.all(vals == vals[0]):
                mean, sd = float(vals[0]), 0.0
            else:
                mean = float(np.mean(vals))
                sd = float(np.std(vals, ddof=1)) if vals.size > 1 else float("nan")
            out.append(AggregateRow(scenario, point_id, f"{estimator}:{kind}",
                                    mean, sd, int(vals.size)))
    return out


def run(
    config: ExperimentConfig,
    workers: int | None = None,
    out_dir: str | None = None,
) -> ExperimentResult:
    """Execute a scenario; optionally persist replicate/aggregate TSVs.

    Replicate failures are recorded with their reason and excluded from the
    aggregates; the run aborts if more than 5% of tasks fail.
    """
    points_fn, _ = _SCENARIO_IMPL[config.scenario]
    points = points_fn(config)
    tasks = [(config, point, rep) for point in points for rep in range(config.replicates)]

    nworkers = resolve_workers(workers)
    if nworkers == 1:
        outcomes = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            outcomes = list(pool.map(_run_task, tasks, chunksize=1))

    rows, failures = [], []
    for status, payload in outcomes:
        if status == "ok":
            rows.extend(payload)
        else:
            failures.append(payload)
    if len(failures) > 0.05 * len(tasks):
        detail = "; ".join(f"{p}#{r}: {msg}" for p, r, msg in failures[:5])
        raise ExperimentError(
            f"{len(failures)}/{len(tasks)} replicates failed (first: {detail})"
        )

    aggs = aggregate(rows)
    result = ExperimentResult(config=config, replicate_rows=rows,
                              aggregate_rows=aggs, failures=failures)
    if out_dir is not None:
        from . import io_files

        io_files.persist_experiment(out_dir, result)
    return result
