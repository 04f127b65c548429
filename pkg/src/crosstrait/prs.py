"""Polygenic risk scores on a target genotype matrix.

A score is the standardized-genotype weighted sum ``W_std @ a_hat`` where
``a_hat`` keeps each published effect that passes the screen and zeroes the
rest.  SNPs are aligned between the summary statistics and the target matrix
by identifier intersection (sorted id order) so imperfectly overlapping real
files behave deterministically; simulated data uses positional ids and
aligns trivially.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ParameterError
from .gwas import SummaryStats
from .synth import GenotypeMatrix

__all__ = ["ScreenRule", "RULE_NONE", "PrsVector", "score", "align_snps"]


@dataclass(frozen=True)
class ScreenRule:
    """Which SNPs enter the score: all, by p-value, or by |effect|."""

    kind: str = "none"
    cutoff: float = 1.0

    def __post_init__(self):
        if self.kind not in ("none", "pvalue_cutoff", "effect_cutoff"):
            raise ParameterError(f"unknown screen rule {self.kind!r}")
        if self.kind == "pvalue_cutoff" and not (0.0 < self.cutoff <= 1.0):
            raise ParameterError("p-value cutoff must lie in (0, 1]")
        if self.kind == "effect_cutoff" and self.cutoff < 0.0:
            raise ParameterError("effect cutoff must be >= 0")


RULE_NONE = ScreenRule()


@dataclass
class PrsVector:
    """Risk scores for the target samples.

    ``empty_selection`` flags an all-zero score produced by a screen that
    removed every SNP; correlation estimators must treat such a score as
    degenerate rather than dividing by its zero norm.
    """

    scores: np.ndarray
    n_selected: int
    source_trait: str = ""
    n_aligned: int | None = None
    empty_selection: bool = False


def align_snps(W: GenotypeMatrix, stats: SummaryStats) -> tuple[np.ndarray, np.ndarray, int]:
    """Match target columns to summary rows by SNP id.

    Returns (target column indices, summary row indices, number of ids that
    failed to match on either side).  When both sides carry the default
    positional ids of equal length this is the identity map.
    """
    if W.snp_ids is None and stats.p == W.p:
        idx = np.arange(W.p)
        return idx, idx, 0
    w_ids = W.ids()
    common, w_idx, s_idx = np.intersect1d(w_ids, stats.snp_id, return_indices=True)
    if common.shape[0] == 0:
        raise ParameterError("no SNP ids in common between genotypes and summary statistics")
    mismatches = (W.p - common.shape[0]) + (stats.p - common.shape[0])
    return w_idx, s_idx, int(mismatches)


def score(
    W: GenotypeMatrix,
    stats: SummaryStats,
    rule: ScreenRule = RULE_NONE,
    block_size: int = kernels.DEFAULT_BLOCK_SIZE,
) -> PrsVector:
    """Build the (optionally screened) risk score on the target samples."""
    w_idx, s_idx, _ = align_snps(W, stats)
    effect = stats.effect[s_idx]
    if rule.kind == "none":
        keep = np.ones(effect.shape[0], dtype=bool)
    elif rule.kind == "pvalue_cutoff":
        keep = stats.pvalue[s_idx] <= rule.cutoff
    else:
        keep = np.abs(effect) > rule.cutoff
    n_selected = int(keep.sum())
    if n_selected == 0:
        return PrsVector(
            scores=np.zeros(W.n),
            n_selected=0,
            source_trait=stats.trait_tag,
            n_aligned=int(w_idx.shape[0]),
            empty_selection=True,
        )
    cols = w_idx[keep]
    s = kernels.std_matvec(W.codes, W.col_mean, W.col_sd, effect[keep], indices=cols, block_size=block_size)
    return PrsVector(
        scores=s,
        n_selected=n_selected,
        source_trait=stats.trait_tag,
        n_aligned=int(w_idx.shape[0]),
    )
