"""Genetic-correlation estimators and their closed-form bias corrections.

Every raw estimator in the toolkit is an uncentered cosine of two vectors:

* target phenotype against a cross-trait risk score (one trait has
  individual-level target data);
* two risk scores built on the same target samples (neither trait does);
* two vectors of published marginal effects (summary statistics only).

All of them shrink towards zero by a multiplicative factor with a closed
form in the design sizes (n1, n2, n3, n_s, p) and the heritabilities; the
factor is independent of the unknown causal-SNP counts when the score uses
all SNPs.  ``correct`` divides the raw value by the factor of the governing
design and flags designs whose p is so large relative to the sample sizes
that the estimator is degenerate (converges to zero regardless of the true
correlation) - there division by the factor is no longer meaningful.

Design cases
------------
``indep_ae``        phenotype vs score, three independent cohorts
``indep_ab``        score vs score, three independent cohorts
``summary_ab``      effect vector vs effect vector, two independent cohorts
``screened_ae/ab``  as above but with SNP screening (factors take the
                    selected-count bookkeeping q, q1, q_overlap)
``overlap_case_i``  n_s samples shared between discovery and target
``overlap_case_ii`` n_s samples shared between the two discoveries
``case_iii``        both effect vectors from one GWAS (summary route)
``case_iv``         both scores built on the discovery data itself
``case_v``          scores for two independent GWAS both built on the
                    first study's genotypes
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    CorrectionUnavailableError,
    DegenerateScoreError,
    ParameterError,
)

CASE_TAGS = (
    "indep_ae",
    "indep_ab",
    "summary_ab",
    "screened_ae",
    "screened_ab",
    "overlap_case_i",
    "overlap_case_ii",
    "case_iii",
    "case_iv",
    "case_v",
)

CONSISTENT = "consistent_regime"
DEGENERATE = "degenerate_regime"


@dataclass(frozen=True)
class DesignMeta:
    """Sizes and variance shares of the estimation design.

    ``h_alpha_eta`` / ``h_alpha_beta`` are the genetic shares of the
    phenotypic correlation on shared samples; they are required by the
    overlapping-design corrections and must be supplied (never assumed 1).
    """

    case_tag: str
    p: int
    n1: int
    n2: int | None = None
    n3: int | None = None
    n_s: int = 0
    h2_alpha: float | None = None
    h2_beta: float | None = None
    h2_eta: float | None = None
    h_alpha_eta: float | None = None
    h_alpha_beta: float | None = None

    def __post_init__(self):
        if self.case_tag not in CASE_TAGS:
            raise ParameterError(f"unknown case tag {self.case_tag!r}")
        if self.p < 1:
            raise ParameterError("p must be >= 1")
        for name in ("n1", "n2", "n3", "n_s"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ParameterError(f"{name} must be >= 0")
        for name in ("h2_alpha", "h2_beta", "h2_eta", "h_alpha_eta", "h_alpha_beta"):
            v = getattr(self, name)
            if v is not None and not (0.0 < v <= 1.0):
                raise ParameterError(f"{name} must lie in (0, 1]")


@dataclass
class ScreenCounts:
    """Selected-SNP bookkeeping entering the screened-design factors."""

    m_alpha: int
    m_alpha_eta: int = 0
    m_alpha_beta: int = 0
    m_beta: int = 0
    q_alpha: int = 0
    q_alpha1: int = 0
    q_alpha_eta: int = 0
    q_alpha_beta: int = 0
    q_beta: int = 0
    q_beta1: int = 0


@dataclass
class CorrelationEstimate:
    raw: float
    bias_factor: float
    corrected: float
    regime_flag: str
    meta: DesignMeta
    out_of_range: bool = False


def raw_cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Uncentered cosine similarity; the single primitive behind every raw
    estimator in this module."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ParameterError("vectors must have equal length")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise DegenerateScoreError("cosine of a zero-norm vector (empty or constant score?)")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def _require(meta: DesignMeta, *names: str) -> None:
    missing = [n for n in names if getattr(meta, n) in (None,)]
    if missing:
        raise ParameterError(
            f"case {meta.case_tag!r} requires parameters {missing}; got meta={meta}"
        )


def bias_factor_ae(meta: DesignMeta) -> float:
    """Attenuation of the phenotype-vs-score estimator in independent GWAS.

    sqrt(n1 / (n1 + p / h2_alpha)) * sqrt(h2_eta); independent of the
    causal-SNP counts.
    """
    _require(meta, "n1", "h2_alpha", "h2_eta")
    return float(np.sqrt(meta.n1 / (meta.n1 + meta.p / meta.h2_alpha)) * np.sqrt(meta.h2_eta))


def bias_factor_ab(meta: DesignMeta) -> float:
    """Attenuation of the score-vs-score estimator in independent GWAS."""
    _require(meta, "n1", "n2", "h2_alpha", "h2_beta")
    return float(
        np.sqrt(
            meta.n1 / (meta.n1 + meta.p / meta.h2_alpha)
            * meta.n2 / (meta.n2 + meta.p / meta.h2_beta)
        )
    )


def bias_factor_summary_ab(meta: DesignMeta) -> float:
    """Attenuation of the summary-statistics-only estimator.

    The factor coincides with the score-vs-score one; the case is kept
    separate because its degenerate regime scales differently (p instead of
    p^2 against the sample-size product).
    """
    _require(meta, "n1", "n2", "h2_alpha", "h2_beta")
    return bias_factor_ab(replace(meta, case_tag="indep_ab"))


def screened_factor_ae(
    meta: DesignMeta,
    q_alpha: int,
    q_alpha1: int,
    q_alpha_eta: int,
    m_alpha: int,
    m_alpha_eta: int,
) -> float:
    """Attenuation of the screened phenotype-vs-score estimator.

    sqrt(n1 m_a / (n1 q_a1 + m_a q_a / h2_a)) * (q_ae / m_ae) * sqrt(h2_e).
    Returns 0 (the estimator carries no signal) when the screen kept no
    shared causal SNPs.
    """
    _require(meta, "n1", "h2_alpha", "h2_eta")
    if min(q_alpha, q_alpha1, q_alpha_eta) < 0 or m_alpha <= 0 or m_alpha_eta <= 0:
        raise ParameterError("screen counts must be >= 0 and causal counts positive")
    if q_alpha_eta == 0 or q_alpha == 0:
        return 0.0
    inner = meta.n1 * m_alpha / (meta.n1 * q_alpha1 + m_alpha * q_alpha / meta.h2_alpha)
    return float(np.sqrt(inner) * (q_alpha_eta / m_alpha_eta) * np.sqrt(meta.h2_eta))


def screened_factor_ae_optimistic(meta: DesignMeta, m_alpha: int) -> float:
    """Limiting factor for a perfect screen (all causal kept, nothing else)."""
    _require(meta, "n1", "h2_alpha", "h2_eta")
    return float(
        np.sqrt(meta.n1 / (meta.n1 + m_alpha / meta.h2_alpha)) * np.sqrt(meta.h2_eta)
    )


def screened_factor_ae_mixed_up(meta: DesignMeta, q_alpha: int) -> float:
    """Limiting factor when the scan cannot rank causal above null SNPs,
    so the selection is a effectively random subset of size q_alpha."""
    _require(meta, "n1", "h2_alpha", "h2_eta")
    return float(
        np.sqrt(meta.n1 * q_alpha / (meta.n1 * meta.p + meta.p**2 / meta.h2_alpha))
        * np.sqrt(meta.h2_eta)
    )


def screened_factor_ab(meta: DesignMeta, counts: ScreenCounts) -> float:
    """Attenuation of the screened score-vs-score estimator."""
    _require(meta, "n1", "n2", "h2_alpha", "h2_beta")
    c = counts
    if min(c.m_alpha, c.m_beta, c.m_alpha_beta) <= 0:
        raise ParameterError("causal counts must be positive")
    if c.q_alpha_beta == 0 or c.q_alpha == 0 or c.q_beta == 0:
        return 0.0
    t_a = meta.n1 * c.m_alpha / (meta.n1 * c.q_alpha1 + c.m_alpha * c.q_alpha / meta.h2_alpha)
    t_b = meta.n2 * c.m_beta / (meta.n2 * c.q_beta1 + c.m_beta * c.q_beta / meta.h2_beta)
    return float(np.sqrt(t_a * t_b) * (c.q_alpha_beta / c.m_alpha_beta))


def screened_factor_ab_optimistic(meta: DesignMeta, m_alpha: int, m_beta: int) -> float:
    _require(meta, "n1", "n2", "h2_alpha", "h2_beta")
    return float(
        np.sqrt(
            meta.n1 / (meta.n1 + m_alpha / meta.h2_alpha)
            * meta.n2 / (meta.n2 + m_beta / meta.h2_beta)
        )
    )


def screened_factor_ab_mixed_up(meta: DesignMeta, q_alpha: int, q_beta: int) -> float:
    _require(meta, "n1", "n2", "h2_alpha", "h2_beta")
    return float(
        np.sqrt(
            meta.n1 / (meta.n1 * meta.p + meta.p**2 / meta.h2_alpha)
            * meta.n2 / (meta.n2 * meta.p + meta.p**2 / meta.h2_beta)
            * q_alpha * q_beta
        )
    )


def overlap_factor_case_i(meta: DesignMeta) -> float:
    """Attenuation/inflation factor with n_s samples shared between the
    discovery GWAS and the target data.

    Requires ``h_alpha_eta``; without it the error cross-covariance on the
    shared block is unidentified and the correction refuses to guess.
    """
    _require(meta, "n1", "n3", "h2_alpha", "h2_eta")
    if meta.h_alpha_eta is None:
        raise CorrectionUnavailableError(
            "overlap_case_i needs h_alpha_eta (genetic share of the phenotypic "
            "correlation on shared samples)"
        )
    n1s = meta.n1 + meta.n_s
    n3s = meta.n3 + meta.n_s
    p = meta.p
    num = (1.0 + meta.n_s * p / (n1s * n3s * meta.h_alpha_eta)) * np.sqrt(meta.h2_eta)
    den = np.sqrt(
        1.0
        + p / (n1s * meta.h2_alpha)
        + 2.0 * meta.n_s * p / (n1s * n3s)
        + meta.n_s * p**2 / (n1s**2 * n3s * meta.h2_alpha)
    )
    return float(num / den)


def overlap_factor_case_ii(meta: DesignMeta) -> float:
    """Factor with n_s samples shared between the two discovery GWAS."""
    _require(meta, "n1", "n2", "h2_alpha", "h2_beta")
    if meta.h_alpha_beta is None:
        raise CorrectionUnavailableError("overlap_case_ii needs h_alpha_beta")
    n1s = meta.n1 + meta.n_s
    n2s = meta.n2 + meta.n_s
    p = meta.p
    g = np.sqrt(n1s * n2s)
    num = g + meta.n_s * p / (g * meta.h_alpha_beta)
    den = np.sqrt((n1s + p / meta.h2_alpha) * (n2s + p / meta.h2_beta))
    return float(num / den)


def overlap_factor_cases_iii_iv_v(meta: DesignMeta, case_tag: str | None = None) -> float:
    """Factors for the fully-overlapping and reused-discovery designs."""
    tag = case_tag or meta.case_tag
    p = meta.p
    if tag == "case_iii":
        _require(meta, "n1", "h2_alpha", "h2_beta")
        if meta.h_alpha_beta is None:
            raise CorrectionUnavailableError("case_iii needs h_alpha_beta")
        n1 = meta.n1
        return float(
            (n1 + p / meta.h_alpha_beta)
            / np.sqrt((n1 + p / meta.h2_alpha) * (n1 + p / meta.h2_beta))
        )
    if tag == "case_iv":
        _require(meta, "n1", "h2_alpha", "h2_beta")
        if meta.h_alpha_beta is None:
            raise CorrectionUnavailableError("case_iv needs h_alpha_beta")
        n1 = meta.n1
        base = n1**2 + 2.0 * n1 * p
        tail = p * (n1 + p)
        return float(
            (base + tail / meta.h_alpha_beta)
            / np.sqrt((base + tail / meta.h2_alpha) * (base + tail / meta.h2_beta))
        )
    if tag == "case_v":
        _require(meta, "n1", "n2", "h2_alpha", "h2_beta")
        n1, n2 = meta.n1, meta.n2
        num = (n1 + p) * np.sqrt(n2)
        den = np.sqrt((n1**2 + 2.0 * n1 * p + p * (n1 + p) / meta.h2_alpha) * (n2 + p / meta.h2_beta))
        return float(num / den)
    raise ParameterError(f"unknown overlap case {tag!r}")


# Finite-sample surrogates for the asymptotic degenerate-regime conditions.
# The true conditions involve limits (p = c * (sample-size product)^a with
# a >= 1) that a single design point cannot verify; these conservative
# thresholds flag designs where p reaches the relevant sample-size product.
REGIME_SURROGATES = {
    "indep_ae": ("n1 * n3", lambda m: m.p >= m.n1 * m.n3),
    "screened_ae": ("n1 * n3", lambda m: m.p >= m.n1 * m.n3),
    "indep_ab": ("p * n1 * n2 * n3", lambda m: m.p**2 >= m.n1 * m.n2 * m.n3),
    "screened_ab": ("p * n1 * n2 * n3", lambda m: m.p**2 >= m.n1 * m.n2 * m.n3),
    "summary_ab": ("n1 * n2", lambda m: m.p >= m.n1 * m.n2),
    "overlap_case_i": ("(n1+ns) * (n3+ns)", lambda m: m.p >= (m.n1 + m.n_s) * (m.n3 + m.n_s)),
    "overlap_case_ii": (
        "(n1+ns) * (n2+ns) * n3",
        lambda m: m.p >= (m.n1 + m.n_s) * (m.n2 + m.n_s) * m.n3,
    ),
    "case_iii": (None, lambda m: False),
    "case_iv": (None, lambda m: False),
    "case_v": ("n1 * n2", lambda m: m.p >= m.n1 * m.n2),
}

_REGIME_SIZES = {
    "indep_ae": ("n3",),
    "screened_ae": ("n3",),
    "indep_ab": ("n2", "n3"),
    "screened_ab": ("n2", "n3"),
    "summary_ab": ("n2",),
    "overlap_case_i": ("n3",),
    "overlap_case_ii": ("n2", "n3"),
    "case_iii": (),
    "case_iv": (),
    "case_v": ("n2",),
}


def regime_flag(meta: DesignMeta) -> str:
    """Heuristic consistent/degenerate classification of a design point.

    Sizes the surrogate needs but the caller did not supply leave the design
    unassessable; those points are reported as consistent rather than
    refused, since the corrections themselves do not need them.
    """
    if any(getattr(meta, name) is None for name in _REGIME_SIZES[meta.case_tag]):
        return CONSISTENT
    _, check = REGIME_SURROGATES[meta.case_tag]
    return DEGENERATE if check(meta) else CONSISTENT


def bias_factor(meta: DesignMeta, screen: ScreenCounts | None = None) -> float:
    """Dispatch to the factor of the governing design case."""
    tag = meta.case_tag
    if tag == "indep_ae":
        return bias_factor_ae(meta)
    if tag == "indep_ab":
        return bias_factor_ab(meta)
    if tag == "summary_ab":
        return bias_factor_summary_ab(meta)
    if tag == "screened_ae":
        if screen is None:
            raise ParameterError("screened_ae needs ScreenCounts")
        return screened_factor_ae(
            meta, screen.q_alpha, screen.q_alpha1, screen.q_alpha_eta,
            screen.m_alpha, screen.m_alpha_eta,
        )
    if tag == "screened_ab":
        if screen is None:
            raise ParameterError("screened_ab needs ScreenCounts")
        return screened_factor_ab(meta, screen)
    if tag == "overlap_case_i":
        return overlap_factor_case_i(meta)
    if tag == "overlap_case_ii":
        return overlap_factor_case_ii(meta)
    return overlap_factor_cases_iii_iv_v(meta)


def correct(raw: float, meta: DesignMeta, screen: ScreenCounts | None = None) -> CorrelationEstimate:
    """Divide a raw cosine by the design's bias factor.

    The corrected value is deliberately not clamped to [-1, 1]: corrections
    can overshoot at finite samples and clamping would hide the estimator's
    variance.  Out-of-range results are flagged instead.
    """
    factor = bias_factor(meta, screen)
    flag = regime_flag(meta)
    if factor == 0.0:
        raise ParameterError("bias factor is zero; screened selection kept no shared signal")
    corrected = raw / factor
    return CorrelationEstimate(
        raw=raw,
        bias_factor=factor,
        corrected=corrected,
        regime_flag=flag,
        meta=meta,
        out_of_range=abs(corrected) > 1.0,
    )


@dataclass
class R2Correction:
    r2_raw: float
    r2_corrected: float
    factor: float
    out_of_range: bool


def correct_partial_r2(
    r2_raw: float, n1: int, p: int, h2_alpha: float, h2_eta: float
) -> R2Correction:
    """Correct a published partial R^2 of a cross-trait score.

    Partial R^2 is the square of the estimated correlation, so the
    correction is the square of the phenotype-vs-score factor:
    ``r2 * (n1 + p / h2_alpha) / (n1 * h2_eta)``.  Values that correct past
    1 are returned with a warning flag rather than truncated.
    """
    if not (0.0 <= r2_raw <= 1.0):
        raise ParameterError("r2_raw must lie in [0, 1]")
    if n1 <= 0 or p <= 0:
        raise ParameterError("n1 and p must be positive")
    for name, v in (("h2_alpha", h2_alpha), ("h2_eta", h2_eta)):
        if not (0.0 < v <= 1.0):
            raise ParameterError(f"{name} must lie in (0, 1]")
    factor = (n1 + p / h2_alpha) / (n1 * h2_eta)
    r2 = r2_raw * factor
    return R2Correction(r2_raw=r2_raw, r2_corrected=r2, factor=factor, out_of_range=r2 > 1.0)
