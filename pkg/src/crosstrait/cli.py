"""Command-line interface.

Subcommands wrap the library one-to-one:

    simulate   run a declarative Monte-Carlo experiment from a config file
    gwas       marginal scan of a phenotype file against a genotype file
    score      build a (screened) risk score from genotypes + summary TSV
    estimate   raw + corrected genetic correlation for a design case
    correct    apply a closed-form bias correction to a number
    moments    Monte-Carlo check of a moment oracle

Exit codes: 0 success, 2 usage error, 3 data error, 4 refusal to correct in
the degenerate regime (only with --strict).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import experiments, io_files, moments
from .errors import (
    CorrectionUnavailableError,
    CrosstraitError,
    DataFormatError,
    DegenerateRegimeRefusal,
    DegenerateScoreError,
    ExperimentError,
    GenerationError,
    ParameterError,
)
from .estimators import (
    DEGENERATE,
    DesignMeta,
    correct,
    correct_partial_r2,
    raw_cosine,
)
from .gwas import marginal_gwas
from .prs import RULE_NONE, ScreenRule, score

CASE_MAP = {
    "ae": "indep_ae",
    "ab": "indep_ab",
    "summary-ab": "summary_ab",
    "overlap-i": "overlap_case_i",
    "overlap-ii": "overlap_case_ii",
    "iii": "case_iii",
    "iv": "case_iv",
    "v": "case_v",
}

# flags each case's correction formula needs; the degenerate-regime check
# additionally uses n2/n3 when supplied
CASE_REQUIRED = {
    "ae": ["n1", "p", "h2a", "h2e"],
    "ab": ["n1", "n2", "p", "h2a", "h2b"],
    "summary-ab": ["n1", "n2", "p", "h2a", "h2b"],
    "overlap-i": ["n1", "n3", "ns", "p", "h2a", "h2e", "hae"],
    "overlap-ii": ["n1", "n2", "ns", "p", "h2a", "h2b", "hab"],
    "iii": ["n1", "p", "h2a", "h2b", "hab"],
    "iv": ["n1", "p", "h2a", "h2b", "hab"],
    "v": ["n1", "n2", "p", "h2a", "h2b"],
}


def _meta_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n1", type=int)
    parser.add_argument("--n2", type=int)
    parser.add_argument("--n3", type=int)
    parser.add_argument("--ns", type=int, default=0)
    parser.add_argument("--p", type=int)
    parser.add_argument("--h2a", type=float)
    parser.add_argument("--h2b", type=float)
    parser.add_argument("--h2e", type=float)
    parser.add_argument("--hae", type=float)
    parser.add_argument("--hab", type=float)


def _meta_from_args(args, case: str, parser) -> DesignMeta:
    missing = [f for f in CASE_REQUIRED[case] if getattr(args, f) is None]
    if missing:
        parser.error(
            f"case {case!r} requires {' '.join('--' + f for f in missing)}"
        )
    return DesignMeta(
        case_tag=CASE_MAP[case],
        p=args.p,
        n1=args.n1,
        n2=args.n2,
        n3=args.n3,
        n_s=args.ns or 0,
        h2_alpha=args.h2a,
        h2_beta=args.h2b,
        h2_eta=args.h2e,
        h_alpha_eta=args.hae,
        h_alpha_beta=args.hab,
    )


def _screen_rule(args) -> ScreenRule:
    if args.rule == "none":
        return RULE_NONE
    if args.cutoff is None:
        raise ParameterError("--cutoff is required with --rule pvalue/effect")
    kind = "pvalue_cutoff" if args.rule == "pvalue" else "effect_cutoff"
    return ScreenRule(kind, args.cutoff)


def cmd_simulate(args, parser):
    raw = io_files.parse_config(args.config)
    config = experiments.ExperimentConfig.from_dict(raw)
    if args.seed is not None:
        config = experiments.ExperimentConfig.from_dict({**raw, "master_seed": args.seed})
    result = experiments.run(config, workers=args.workers, out_dir=args.out)
    print(f"scenario={config.scenario} replicates={len(result.replicate_rows)} "
          f"failures={len(result.failures)} out={args.out}")
    return 0


def cmd_gwas(args, parser):
    G = io_files.read_genotypes(args.genotypes)
    y, _ = io_files.read_phenotype_tsv(args.phenotype)
    stats = marginal_gwas(G, y, standardize_y=not args.no_standardize_y)
    io_files.write_summary_tsv(args.out, stats)
    print(f"wrote {stats.p} SNPs to {args.out}")
    return 0


def cmd_score(args, parser):
    G = io_files.read_genotypes(args.genotypes)
    stats = io_files.read_summary_tsv(args.summary)
    prs = score(G, stats, _screen_rule(args))
    io_files.write_scores_tsv(args.out, prs.scores)
    note = " (empty selection)" if prs.empty_selection else ""
    print(f"scored {G.n} samples from {prs.n_selected} SNPs{note} -> {args.out}")
    return 0


def _aligned_summary_cosine(stats_a, stats_b) -> float:
    common, ia, ib = np.intersect1d(stats_a.snp_id, stats_b.snp_id, return_indices=True)
    if common.shape[0] == 0:
        raise DataFormatError("summary files share no SNP ids")
    return raw_cosine(stats_a.effect[ia], stats_b.effect[ib])


def cmd_estimate(args, parser):
    case = args.case
    meta = _meta_from_args(args, case, parser)
    rule = _screen_rule(args)

    if case in ("ae", "overlap-i"):
        if not (args.target_geno and args.target_pheno and args.summary_a):
            parser.error(f"case {case!r} needs --target-geno --target-pheno --summary-a")
        W = io_files.read_genotypes(args.target_geno)
        y, _ = io_files.read_phenotype_tsv(args.target_pheno)
        stats_a = io_files.read_summary_tsv(args.summary_a)
        raw = raw_cosine(y, score(W, stats_a, rule).scores)
    elif case in ("ab", "overlap-ii", "iv", "v"):
        if not (args.target_geno and args.summary_a and args.summary_b):
            parser.error(f"case {case!r} needs --target-geno --summary-a --summary-b")
        W = io_files.read_genotypes(args.target_geno)
        stats_a = io_files.read_summary_tsv(args.summary_a)
        stats_b = io_files.read_summary_tsv(args.summary_b)
        raw = raw_cosine(score(W, stats_b, rule).scores, score(W, stats_a, rule).scores)
    else:  # summary-ab, iii
        if not (args.summary_a and args.summary_b):
            parser.error(f"case {case!r} needs --summary-a --summary-b")
        stats_a = io_files.read_summary_tsv(args.summary_a)
        stats_b = io_files.read_summary_tsv(args.summary_b)
        raw = _aligned_summary_cosine(stats_a, stats_b)

    est = correct(raw, meta)
    if args.strict and est.regime_flag == DEGENERATE:
        raise DegenerateRegimeRefusal(
            f"design is in the degenerate regime (case {case}); refusing under --strict"
        )
    line = (
        f"{case}\t{io_files.fmt(est.raw)}\t{io_files.fmt(est.bias_factor)}"
        f"\t{io_files.fmt(est.corrected)}\t{est.regime_flag}"
    )
    print("case\traw\tfactor\tcorrected\tregime_flag")
    print(line)
    if args.out:
        io_files.atomic_write_text(
            args.out, "case\traw\tfactor\tcorrected\tregime_flag\n" + line + "\n"
        )
    return 0


def cmd_correct(args, parser):
    case = args.case
    if args.raw is None and args.r2 is None:
        parser.error("one of --raw or --r2 is required")
    if args.r2 is not None:
        if case != "ae":
            parser.error("--r2 correction applies to case 'ae' (square of its factor)")
        for f in ("n1", "p", "h2a", "h2e"):
            if getattr(args, f) is None:
                parser.error(f"--r2 correction requires --n1 --p --h2a --h2e (missing --{f})")
        res = correct_partial_r2(args.r2, args.n1, args.p, args.h2a, args.h2e)
        flag = "out_of_range" if res.out_of_range else "ok"
        print("r2_raw\tfactor\tr2_corrected\tflag")
        print(f"{io_files.fmt(res.r2_raw)}\t{io_files.fmt(res.factor)}"
              f"\t{io_files.fmt(res.r2_corrected)}\t{flag}")
        return 0
    meta = _meta_from_args(args, case, parser)
    est = correct(args.raw, meta)
    if args.strict and est.regime_flag == DEGENERATE:
        raise DegenerateRegimeRefusal(
            f"design is in the degenerate regime (case {case}); refusing under --strict"
        )
    print("raw\tfactor\tcorrected\tregime_flag")
    print(f"{io_files.fmt(est.raw)}\t{io_files.fmt(est.bias_factor)}"
          f"\t{io_files.fmt(est.corrected)}\t{est.regime_flag}")
    return 0


def cmd_moments(args, parser):
    from .synth import TraitArchitecture

    arch = TraitArchitecture.shared_causal(
        args.p, args.m, phi=args.rho, sigma2=args.sigma2, h2=args.h2
    )
    meta = DesignMeta(
        case_tag="indep_ae", p=args.p, n1=args.n1, n2=args.n2, n3=args.n3, n_s=args.ns,
        h2_alpha=args.h2, h2_beta=args.h2, h2_eta=args.h2,
    )
    selection = None
    if args.q_a1 is not None:
        selection = (args.q_a1, args.q_a2 or 0, args.q_b1 or 0, args.q_b2 or 0)
    reports = moments.monte_carlo_check_many(
        args.tag, arch, meta, args.replicates, args.seed,
        rho_eps=args.rho_eps, selection=selection,
    )
    print("\t".join(io_files.MOMENT_HEADER))
    for r in reports:
        print(f"{r.quantity_tag}\t{io_files.fmt(r.predicted)}\t{io_files.fmt(r.empirical_mean)}"
              f"\t{io_files.fmt(r.empirical_se)}\t{io_files.fmt(r.z)}")
    if args.out:
        io_files.write_moment_report_tsv(args.out, reports)
    return 0 if all(r.passed for r in reports) else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crosstrait",
        description="Cross-trait polygenic score simulation and bias-corrected "
                    "genetic correlation estimation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run an experiment from a key=value config")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", required=True)
    p_sim.add_argument("--workers", type=int, default=None,
                       help=f"worker processes (default: ${experiments.WORKERS_ENV} or 1)")
    p_sim.add_argument("--seed", type=int, default=None, help="override master_seed")
    p_sim.set_defaults(func=cmd_simulate)

    p_gwas = sub.add_parser("gwas", help="marginal scan: genotypes + phenotype -> summary TSV")
    p_gwas.add_argument("--genotypes", required=True)
    p_gwas.add_argument("--phenotype", required=True)
    p_gwas.add_argument("--out", required=True)
    p_gwas.add_argument("--no-standardize-y", action="store_true")
    p_gwas.set_defaults(func=cmd_gwas)

    p_score = sub.add_parser("score", help="risk score: genotypes + summary TSV -> score TSV")
    p_score.add_argument("--genotypes", required=True)
    p_score.add_argument("--summary", required=True)
    p_score.add_argument("--out", required=True)
    p_score.add_argument("--rule", choices=["none", "pvalue", "effect"], default="none")
    p_score.add_argument("--cutoff", type=float, default=None)
    p_score.set_defaults(func=cmd_score)

    p_est = sub.add_parser("estimate", help="raw + corrected correlation for a design case")
    p_est.add_argument("--case", required=True, choices=sorted(CASE_MAP))
    p_est.add_argument("--target-geno")
    p_est.add_argument("--target-pheno")
    p_est.add_argument("--summary-a")
    p_est.add_argument("--summary-b")
    p_est.add_argument("--rule", choices=["none", "pvalue", "effect"], default="none")
    p_est.add_argument("--cutoff", type=float, default=None)
    p_est.add_argument("--out")
    p_est.add_argument("--strict", action="store_true",
                       help="exit 4 instead of correcting in the degenerate regime")
    _meta_flags(p_est)
    p_est.set_defaults(func=cmd_estimate)

    p_cor = sub.add_parser("correct", help="apply a closed-form bias correction")
    p_cor.add_argument("--raw", type=float, default=None)
    p_cor.add_argument("--r2", type=float, default=None,
                       help="partial R^2 to correct (case ae)")
    p_cor.add_argument("--case", required=True, choices=sorted(CASE_MAP))
    p_cor.add_argument("--strict", action="store_true")
    _meta_flags(p_cor)
    p_cor.set_defaults(func=cmd_correct)

    p_mom = sub.add_parser("moments", help="Monte-Carlo check of moment oracles")
    p_mom.add_argument("--tag", required=True, nargs="+", choices=list(moments.ALL_TAGS))
    p_mom.add_argument("--n1", type=int, required=True)
    p_mom.add_argument("--n2", type=int, default=0)
    p_mom.add_argument("--n3", type=int, default=0)
    p_mom.add_argument("--ns", type=int, default=0)
    p_mom.add_argument("--p", type=int, required=True)
    p_mom.add_argument("--m", type=int, required=True)
    p_mom.add_argument("--rho", type=float, default=0.5, help="shared-effect correlation")
    p_mom.add_argument("--sigma2", type=float, default=1.0)
    p_mom.add_argument("--h2", type=float, default=1.0)
    p_mom.add_argument("--rho-eps", type=float, default=0.0)
    p_mom.add_argument("--q-a1", type=int, default=None)
    p_mom.add_argument("--q-a2", type=int, default=None)
    p_mom.add_argument("--q-b1", type=int, default=None)
    p_mom.add_argument("--q-b2", type=int, default=None)
    p_mom.add_argument("--replicates", type=int, default=200)
    p_mom.add_argument("--seed", type=int, default=0)
    p_mom.add_argument("--out")
    p_mom.set_defaults(func=cmd_moments)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except DegenerateRegimeRefusal as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ParameterError, CorrectionUnavailableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DataFormatError, GenerationError, DegenerateScoreError, ExperimentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except CrosstraitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
