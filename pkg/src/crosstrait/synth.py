"""Synthetic GWAS cohorts under a sparse polygenic model.

This module generates everything upstream of association testing:

* genotype matrices with Hardy-Weinberg codes {0, 1, 2} and per-SNP minor
  allele frequencies drawn from U[0.05, 0.45];
* correlated sparse effect vectors for up to three traits, where two trait
  pairs (alpha-eta and alpha-beta) may share causal SNPs with correlated
  per-SNP effects;
* continuous phenotypes ``y = X_std @ effects + eps`` with the error
  variance calibrated so that the asymptotic heritability equals a target;
* multi-cohort bundles in which two studies share a block of samples and,
  optionally, correlated non-genetic errors on the shared block.

All generators are pure functions of a master seed via :mod:`crosstrait.rng`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import GenerationError, ParameterError
from .rng import substream

MAF_LOW = 0.05
MAF_HIGH = 0.45
MAX_RESAMPLE_ATTEMPTS = 100

TRAITS = ("alpha", "beta", "eta")


@dataclass(frozen=True)
class DistributionSpec:
    """Family of the effect/error draws: mean zero, declared (co)variance.

    Only the gaussian family is implemented; the spec point exists so that a
    heavier-tailed family with finite fourth moments can be slotted in.
    """

    family: str = "gaussian"

    def __post_init__(self):
        if self.family != "gaussian":
            raise NotImplementedError(f"distribution family {self.family!r} not implemented")


GAUSSIAN = DistributionSpec()


@dataclass
class GenotypeMatrix:
    """SNP codes plus the statistics of their standardized view.

    ``codes`` is an (n, p) uint8 array of allele counts; ``col_mean`` /
    ``col_sd`` use the population-style 1/n divisor so that the standardized
    columns have exact unit sample variance (see kernels.column_stats).
    ``maf`` holds the generating minor allele frequencies (or the sample
    estimate when the matrix was read from a file that lacks them).
    """

    n: int
    p: int
    codes: np.ndarray
    maf: np.ndarray
    col_mean: np.ndarray
    col_sd: np.ndarray
    snp_ids: np.ndarray | None = None
    resample_count: int = 0

    @classmethod
    def from_codes(
        cls,
        codes: np.ndarray,
        maf: np.ndarray | None = None,
        snp_ids: np.ndarray | None = None,
        resample_count: int = 0,
    ) -> "GenotypeMatrix":
        codes = np.ascontiguousarray(codes, dtype=np.uint8)
        if codes.ndim != 2:
            raise ParameterError("codes must be a 2-d array")
        n, p = codes.shape
        if codes.max(initial=0) > 2:
            raise ParameterError("genotype codes must be in {0, 1, 2}")
        mean, sd = kernels.column_stats(codes)
        if np.any(sd == 0.0):
            raise ParameterError("monomorphic column in genotype codes")
        if maf is None:
            maf = np.minimum(mean / 2.0, 1.0 - mean / 2.0)
        return cls(
            n=n,
            p=p,
            codes=codes,
            maf=np.asarray(maf, dtype=np.float64),
            col_mean=mean,
            col_sd=sd,
            snp_ids=snp_ids,
            resample_count=resample_count,
        )

    def standardized(self) -> np.ndarray:
        """Dense standardized matrix; for small instances and tests only."""
        return (self.codes.astype(np.float64) - self.col_mean) / self.col_sd

    def ids(self) -> np.ndarray:
        if self.snp_ids is not None:
            return self.snp_ids
        return default_snp_ids(self.p)


def default_snp_ids(p: int) -> np.ndarray:
    return np.array([f"snp{j:07d}" for j in range(p)])


def _draw_codes(n: int, maf: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One block of Hardy-Weinberg codes via a single uniform per cell."""
    f = np.asarray(maf, dtype=np.float64)
    u = rng.random((n, f.shape[0]))
    c0 = (1.0 - f) ** 2  # P(code = 0)
    c1 = 1.0 - f**2      # P(code <= 1)
    return (u >= c0).view(np.uint8) + (u >= c1).view(np.uint8)


def _gen_codes(n: int, maf: np.ndarray, rng: np.random.Generator, block_size: int = 2048) -> tuple[np.ndarray, int]:
    """Codes for all p SNPs; monomorphic columns are redrawn, keeping p fixed."""
    p = maf.shape[0]
    codes = np.empty((n, p), dtype=np.uint8)
    resamples = 0
    for j0 in range(0, p, block_size):
        j1 = min(j0 + block_size, p)
        codes[:, j0:j1] = _draw_codes(n, maf[j0:j1], rng)
    bad = np.flatnonzero(codes.max(axis=0) == codes.min(axis=0))
    for j in bad:
        for attempt in range(MAX_RESAMPLE_ATTEMPTS):
            col = _draw_codes(n, maf[j : j + 1], rng)[:, 0]
            resamples += 1
            if col.max() != col.min():
                codes[:, j] = col
                break
        else:
            raise GenerationError(
                f"column {j} stayed monomorphic after {MAX_RESAMPLE_ATTEMPTS} redraws; "
                f"n={n} is too small for maf={maf[j]:.4f}"
            )
    return codes, resamples


def gen_genotypes(n: int, p: int, seed: int, maf: np.ndarray | None = None) -> GenotypeMatrix:
    """Generate an (n, p) genotype matrix.

    Each SNP's minor allele frequency f is drawn from U[0.05, 0.45] (unless
    ``maf`` is supplied, e.g. to share SNPs across cohorts) and its codes
    from {0, 1, 2} with Hardy-Weinberg probabilities
    {(1-f)^2, 2f(1-f), f^2}.  Columns that come out monomorphic are redrawn
    so the declared p is preserved; the redraw count is recorded.
    """
    if n < 2:
        raise ParameterError("need at least 2 individuals")
    if p < 1:
        raise ParameterError("need at least 1 SNP")
    rng = substream(seed, "genotypes")
    if maf is None:
        maf = rng.uniform(MAF_LOW, MAF_HIGH, size=p)
    else:
        maf = np.asarray(maf, dtype=np.float64)
        if maf.shape != (p,):
            raise ParameterError("maf vector length must equal p")
        if np.any((maf <= 0.0) | (maf >= 0.5)):
            raise ParameterError("maf must lie in (0, 0.5)")
    codes, resamples = _gen_codes(n, maf, rng)
    return GenotypeMatrix.from_codes(codes, maf=maf, resample_count=resamples)


def stack_genotypes(*blocks: GenotypeMatrix) -> GenotypeMatrix:
    """Row-stack cohort blocks into one matrix with fresh column statistics.

    The blocks must describe the same SNPs (equal maf vectors).  Used to
    assemble a cohort that contains a shared sample block: the codes of the
    shared block are reused bit-identically in every cohort that contains
    it, while each cohort standardizes its own stacked matrix.
    """
    blocks = tuple(b for b in blocks if b is not None)
    if not blocks:
        raise ParameterError("nothing to stack")
    p = blocks[0].p
    for b in blocks[1:]:
        if b.p != p or not np.array_equal(b.maf, blocks[0].maf):
            raise ParameterError("cohort blocks disagree on SNPs")
    if len(blocks) == 1:
        b = blocks[0]
        return GenotypeMatrix.from_codes(b.codes, maf=b.maf, resample_count=b.resample_count)
    codes = np.vstack([b.codes for b in blocks])
    return GenotypeMatrix.from_codes(codes, maf=blocks[0].maf)


@dataclass
class TraitArchitecture:
    """Causal-set sizes, overlaps, effect (co)variances and heritabilities.

    The causal sets are laid out deterministically: trait alpha occupies
    [0, m_alpha); eta shares the first m_alpha_eta of those indices and
    continues after alpha's block; beta shares the first m_alpha_beta and
    continues after eta's tail.  Overlapping indices therefore sit at the
    start of each causal set.  The beta-eta overlap this induces is
    min(m_alpha_beta, m_alpha_eta); beta and eta effects are conditionally
    independent given alpha there, which is the only three-way coupling
    consistent with the declared pairwise covariances.
    """

    p: int
    m_alpha: int
    m_beta: int = 0
    m_eta: int = 0
    m_alpha_eta: int = 0
    m_alpha_beta: int = 0
    sigma2_alpha: float = 1.0
    sigma2_beta: float = 1.0
    sigma2_eta: float = 1.0
    rho_alpha_eta: float = 0.0
    rho_alpha_beta: float = 0.0
    h2_alpha: float = 1.0
    h2_beta: float = 1.0
    h2_eta: float = 1.0
    causal_sets: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.p < 1:
            raise ParameterError("p must be >= 1")
        for name in ("m_alpha", "m_beta", "m_eta"):
            if getattr(self, name) < 0 or getattr(self, name) > self.p:
                raise ParameterError(f"{name} must lie in [0, p]")
        if self.m_alpha_eta > min(self.m_alpha, self.m_eta):
            raise ParameterError("m_alpha_eta exceeds min(m_alpha, m_eta)")
        if self.m_alpha_beta > min(self.m_alpha, self.m_beta):
            raise ParameterError("m_alpha_beta exceeds min(m_alpha, m_beta)")
        for name in ("sigma2_alpha", "sigma2_beta", "sigma2_eta"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be positive")
        for name in ("rho_alpha_eta", "rho_alpha_beta"):
            if abs(getattr(self, name)) > 1.0:
                raise ParameterError(f"{name} must lie in [-1, 1] (effect covariance not PSD)")
        for name in ("h2_alpha", "h2_beta", "h2_eta"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise ParameterError(f"{name} must lie in (0, 1]")
        for phi in (self.phi_alpha_eta, self.phi_alpha_beta):
            if abs(phi) > 1.0 + 1e-12:
                raise ParameterError("implied genetic correlation outside [-1, 1]")
        if not self.causal_sets:
            self.causal_sets = self._default_causal_sets()
        self._validate_causal_sets()

    def _default_causal_sets(self) -> dict:
        eta_tail = self.m_eta - self.m_alpha_eta
        beta_tail = self.m_beta - self.m_alpha_beta
        eta_start = self.m_alpha
        beta_start = self.m_alpha + eta_tail
        if beta_start + beta_tail > self.p:
            raise ParameterError("causal sets with the declared overlaps do not fit in p SNPs")
        alpha = np.arange(self.m_alpha)
        eta = np.concatenate([np.arange(self.m_alpha_eta), eta_start + np.arange(eta_tail)])
        beta = np.concatenate([np.arange(self.m_alpha_beta), beta_start + np.arange(beta_tail)])
        return {"alpha": alpha, "eta": eta.astype(np.intp), "beta": beta.astype(np.intp)}

    def _validate_causal_sets(self):
        for tag, m in (("alpha", self.m_alpha), ("beta", self.m_beta), ("eta", self.m_eta)):
            s = np.asarray(self.causal_sets.get(tag, np.empty(0, dtype=np.intp)), dtype=np.intp)
            self.causal_sets[tag] = s
            if s.shape[0] != m:
                raise ParameterError(f"causal set for {tag} must have {m} indices")
            if m and (s.min() < 0 or s.max() >= self.p):
                raise ParameterError(f"causal set for {tag} out of range")
        a = set(self.causal_sets["alpha"].tolist())
        if len(a) != self.m_alpha:
            raise ParameterError("duplicate indices in alpha causal set")
        for tag, m_ov in (("eta", self.m_alpha_eta), ("beta", self.m_alpha_beta)):
            ov = a.intersection(self.causal_sets[tag].tolist())
            if len(ov) != m_ov:
                raise ParameterError(f"alpha-{tag} causal overlap is {len(ov)}, declared {m_ov}")

    @property
    def sigma_alpha_eta(self) -> float:
        return self.rho_alpha_eta * np.sqrt(self.sigma2_alpha * self.sigma2_eta)

    @property
    def sigma_alpha_beta(self) -> float:
        return self.rho_alpha_beta * np.sqrt(self.sigma2_alpha * self.sigma2_beta)

    @property
    def phi_alpha_eta(self) -> float:
        """Asymptotic genetic correlation between traits alpha and eta."""
        if self.m_alpha == 0 or self.m_eta == 0:
            return 0.0
        return self.m_alpha_eta / np.sqrt(self.m_alpha * self.m_eta) * self.rho_alpha_eta

    @property
    def phi_alpha_beta(self) -> float:
        if self.m_alpha == 0 or self.m_beta == 0:
            return 0.0
        return self.m_alpha_beta / np.sqrt(self.m_alpha * self.m_beta) * self.rho_alpha_beta

    def sigma2_eps(self, trait: str) -> float:
        """Error variance that realizes the target asymptotic heritability."""
        m = {"alpha": self.m_alpha, "beta": self.m_beta, "eta": self.m_eta}[trait]
        s2 = {"alpha": self.sigma2_alpha, "beta": self.sigma2_beta, "eta": self.sigma2_eta}[trait]
        h2 = {"alpha": self.h2_alpha, "beta": self.h2_beta, "eta": self.h2_eta}[trait]
        return m * s2 * (1.0 - h2) / h2

    @classmethod
    def shared_causal(
        cls,
        p: int,
        m: int,
        phi: float = 0.0,
        sigma2: float = 1.0,
        h2: float = 1.0,
        traits: tuple = TRAITS,
    ) -> "TraitArchitecture":
        """Common special case: all traits share the same m causal SNPs.

        With full causal overlap the implied genetic correlation equals the
        effect correlation, so ``phi`` is passed straight through as rho.
        """
        has_beta = "beta" in traits
        has_eta = "eta" in traits
        return cls(
            p=p,
            m_alpha=m,
            m_beta=m if has_beta else 0,
            m_eta=m if has_eta else 0,
            m_alpha_eta=m if has_eta else 0,
            m_alpha_beta=m if has_beta else 0,
            sigma2_alpha=sigma2,
            sigma2_beta=sigma2,
            sigma2_eta=sigma2,
            rho_alpha_eta=phi if has_eta else 0.0,
            rho_alpha_beta=phi if has_beta else 0.0,
            h2_alpha=h2,
            h2_beta=h2,
            h2_eta=h2,
        )


@dataclass
class EffectVector:
    """Length-p effect vector, zero outside the trait's causal set."""

    values: np.ndarray
    trait_tag: str
    sigma2: float = 1.0

    @property
    def m(self) -> int:
        return int(np.count_nonzero(self.values))

    def causal_mask(self) -> np.ndarray:
        return self.values != 0.0


def gen_effects(
    arch: TraitArchitecture,
    traits: tuple = TRAITS,
    seed: int = 0,
    dist: DistributionSpec = GAUSSIAN,
) -> dict[str, EffectVector]:
    """Draw effect vectors for the requested traits.

    On the alpha-eta (alpha-beta) shared indices the pair is bivariate with
    covariance sigma_alpha_eta (sigma_alpha_beta); elsewhere the marginals
    are independent.  eta and beta are constructed as conditional
    regressions on alpha from their own substreams, so the draw for any one
    trait does not depend on which other traits were requested.
    """
    unknown = set(traits) - set(TRAITS)
    if unknown:
        raise ParameterError(f"unknown trait tags: {sorted(unknown)}")
    rngs = {t: substream(seed, f"effects/{t}") for t in TRAITS}

    sig_a = np.sqrt(arch.sigma2_alpha)
    alpha_vals = rngs["alpha"].standard_normal(arch.m_alpha) * sig_a

    out: dict[str, EffectVector] = {}

    def build(tag: str, m: int, m_shared: int, sigma2: float, rho: float) -> EffectVector:
        sig = np.sqrt(sigma2)
        z = rngs[tag].standard_normal(m)
        vals = sig * z
        if m_shared:
            # conditional regression on alpha over the shared prefix
            slope = rho * sig / sig_a
            resid = sig * np.sqrt(max(1.0 - rho * rho, 0.0))
            vals[:m_shared] = slope * alpha_vals[:m_shared] + resid * z[:m_shared]
        full = np.zeros(arch.p)
        full[arch.causal_sets[tag]] = vals
        return EffectVector(values=full, trait_tag=tag, sigma2=sigma2)

    if "alpha" in traits:
        full = np.zeros(arch.p)
        full[arch.causal_sets["alpha"]] = alpha_vals
        out["alpha"] = EffectVector(values=full, trait_tag="alpha", sigma2=arch.sigma2_alpha)
    if "eta" in traits:
        out["eta"] = build("eta", arch.m_eta, arch.m_alpha_eta, arch.sigma2_eta, arch.rho_alpha_eta)
    if "beta" in traits:
        out["beta"] = build("beta", arch.m_beta, arch.m_alpha_beta, arch.sigma2_beta, arch.rho_alpha_beta)
    return out


@dataclass
class Phenotype:
    """Continuous phenotype with its generating error draw retained."""

    y: np.ndarray
    sigma2_eps: float
    realized_h2: float
    epsilon: np.ndarray


def gen_phenotype(
    X: GenotypeMatrix,
    eff: EffectVector,
    h2: float,
    seed: int,
    sigma2_eff: float | None = None,
    dist: DistributionSpec = GAUSSIAN,
    epsilon: np.ndarray | None = None,
) -> Phenotype:
    """Generate ``y = X_std @ eff + eps`` with heritability-calibrated noise.

    The error variance is ``m * sigma2_eff * (1 - h2) / h2`` with m the
    causal count, so the *asymptotic* heritability equals ``h2``; the
    realized per-replicate variance ratio is recorded as a diagnostic.
    ``h2 == 1`` gives identically zero errors.  A pre-drawn ``epsilon``
    (e.g. one member of a correlated pair on overlapping samples) takes
    precedence over the seed.
    """
    if not (0.0 < h2 <= 1.0):
        raise ParameterError("h2 must lie in (0, 1]")
    if sigma2_eff is None:
        sigma2_eff = eff.sigma2
    m = eff.m
    sigma2_eps = m * sigma2_eff * (1.0 - h2) / h2

    idx = np.flatnonzero(eff.values)
    g = kernels.std_matvec(X.codes, X.col_mean, X.col_sd, eff.values[idx], indices=idx)

    if epsilon is not None:
        eps = np.asarray(epsilon, dtype=np.float64)
        if eps.shape != (X.n,):
            raise ParameterError("epsilon length must equal n")
    elif h2 == 1.0:
        eps = np.zeros(X.n)
    else:
        rng = substream(seed, f"phenotype/{eff.trait_tag}")
        eps = rng.standard_normal(X.n) * np.sqrt(sigma2_eps)

    y = g + eps
    var_g = float(np.var(g))
    var_y = float(np.var(y))
    realized = var_g / var_y if var_y > 0 else float("nan")
    return Phenotype(y=y, sigma2_eps=sigma2_eps, realized_h2=realized, epsilon=eps)


@dataclass(frozen=True)
class OverlapDesign:
    """How two cohorts share samples.

    pair:
        ``"discovery_target"``  - n_s samples shared between the alpha
        discovery GWAS and the eta target data;
        ``"discovery_discovery"`` - n_s samples shared between the alpha and
        beta discovery GWAS (an independent target may still exist);
        ``"full_overlap"`` - both traits measured on one cohort.
    rho_eps:
        Correlation of the non-genetic errors on shared samples; ignored
        when n_s == 0 or when either trait has zero error variance.
    """

    n_s: int = 0
    pair: str = "discovery_target"
    rho_eps: float = 0.0

    def __post_init__(self):
        if self.n_s < 0:
            raise ParameterError("n_s must be >= 0")
        if self.pair not in ("discovery_target", "discovery_discovery", "full_overlap"):
            raise ParameterError(f"unknown overlap pair {self.pair!r}")
        if abs(self.rho_eps) > 1.0:
            raise ParameterError("rho_eps must lie in [-1, 1]")


@dataclass(frozen=True)
class CohortSizes:
    n1: int = 0
    n2: int = 0
    n3: int = 0


@dataclass
class CohortBundle:
    """Generated cohorts for one overlapping design.

    The shared sample block always occupies the *last* n_s rows of every
    stacked matrix (and of the corresponding phenotype vectors).
    """

    design: OverlapDesign
    arch: TraitArchitecture
    disc_alpha: GenotypeMatrix | None = None
    disc_beta: GenotypeMatrix | None = None
    target: GenotypeMatrix | None = None
    y_alpha: Phenotype | None = None
    y_beta: Phenotype | None = None
    y_eta: Phenotype | None = None
    effects: dict = field(default_factory=dict)


def gen_independent_cohorts(
    arch: TraitArchitecture,
    sizes: CohortSizes,
    seed: int,
    traits: tuple = TRAITS,
    dist: DistributionSpec = GAUSSIAN,
    genotype_seed: int | None = None,
) -> CohortBundle:
    """Three independent cohorts over the same SNPs, one per trait.

    Cohort sizes of zero skip the corresponding matrix/phenotype.  This is
    the no-overlap special case used throughout the numerical studies:
    discovery data for alpha (n1) and beta (n2), target data with the eta
    phenotype (n3).  ``genotype_seed`` pins the maf/codes streams separately
    from the effect/error streams (genotype-reuse speed studies).
    """
    gseed = seed if genotype_seed is None else genotype_seed
    rng_maf = substream(gseed, "cohorts/maf")
    maf = rng_maf.uniform(MAF_LOW, MAF_HIGH, size=arch.p)
    effects = gen_effects(arch, seed=seed, dist=dist)
    bundle = CohortBundle(
        design=OverlapDesign(n_s=0, pair="discovery_discovery"), arch=arch, effects=effects
    )

    def cohort(label: str, n: int) -> GenotypeMatrix | None:
        if n == 0:
            return None
        rng = substream(gseed, f"cohorts/{label}")
        codes, resamples = _gen_codes(n, maf, rng)
        return GenotypeMatrix.from_codes(codes, maf=maf, resample_count=resamples)

    if "alpha" in traits and sizes.n1:
        bundle.disc_alpha = cohort("X", sizes.n1)
        bundle.y_alpha = gen_phenotype(bundle.disc_alpha, effects["alpha"], arch.h2_alpha, seed)
    if "beta" in traits and sizes.n2:
        bundle.disc_beta = cohort("Z", sizes.n2)
        bundle.y_beta = gen_phenotype(bundle.disc_beta, effects["beta"], arch.h2_beta, seed)
    if sizes.n3:
        bundle.target = cohort("W", sizes.n3)
        if "eta" in traits:
            bundle.y_eta = gen_phenotype(bundle.target, effects["eta"], arch.h2_eta, seed)
    return bundle


def _correlated_errors(
    rng: np.random.Generator, n: int, sd_a: float, sd_b: float, rho: float
) -> tuple[np.ndarray, np.ndarray]:
    z1 = rng.standard_normal(n)
    z2 = rng.standard_normal(n)
    e_a = sd_a * z1
    e_b = sd_b * (rho * z1 + np.sqrt(max(1.0 - rho * rho, 0.0)) * z2)
    return e_a, e_b


def gen_overlapping_cohorts(
    design: OverlapDesign,
    arch: TraitArchitecture,
    sizes: CohortSizes,
    seed: int,
    dist: DistributionSpec = GAUSSIAN,
    genotype_seed: int | None = None,
) -> CohortBundle:
    """Generate the cohort bundle for an overlapping-samples design.

    All cohorts describe the same p SNPs (one maf draw).  Each genotype
    block (X, Z, W, shared S) comes from its own substream, so a cohort's
    codes do not depend on which other cohorts exist; in particular n_s = 0
    yields cohorts that are bitwise independent of the shared-block stream.
    """
    n1, n2, n3, ns = sizes.n1, sizes.n2, sizes.n3, design.n_s
    if min(n1, n2, n3) < 0:
        raise ParameterError("cohort sizes must be >= 0")
    gseed = seed if genotype_seed is None else genotype_seed
    rng_maf = substream(gseed, "cohorts/maf")
    maf = rng_maf.uniform(MAF_LOW, MAF_HIGH, size=arch.p)

    def block(label: str, n: int) -> GenotypeMatrix | None:
        if n == 0:
            return None
        rng = substream(gseed, f"cohorts/{label}")
        codes, resamples = _gen_codes(n, maf, rng)
        return GenotypeMatrix.from_codes(codes, maf=maf, resample_count=resamples)

    effects = gen_effects(arch, seed=seed, dist=dist)
    sd_ea = np.sqrt(arch.sigma2_eps("alpha"))
    sd_eb = np.sqrt(arch.sigma2_eps("beta"))
    sd_ee = np.sqrt(arch.sigma2_eps("eta"))
    rng_eps = substream(seed, "cohorts/errors")

    bundle = CohortBundle(design=design, arch=arch, effects=effects)

    if design.pair == "full_overlap":
        if ns not in (0, n1):
            raise ParameterError("full_overlap requires n_s == n1 (or 0 meaning the whole cohort)")
        if n1 < 2:
            raise ParameterError("full_overlap needs n1 >= 2")
        X = block("X", n1)
        e_a, e_b = _correlated_errors(rng_eps, n1, sd_ea, sd_eb, design.rho_eps)
        bundle.disc_alpha = X
        bundle.disc_beta = X
        bundle.y_alpha = gen_phenotype(X, effects["alpha"], arch.h2_alpha, seed, epsilon=e_a)
        bundle.y_beta = gen_phenotype(X, effects["beta"], arch.h2_beta, seed, epsilon=e_b)
        bundle.target = block("W", n3)
        return bundle

    S = block("S", ns)

    if design.pair == "discovery_target":
        if n1 + ns < 2 or n3 + ns < 2:
            raise ParameterError("each cohort needs at least 2 samples")
        X = block("X", n1)
        W = block("W", n3)
        disc = stack_genotypes(*(b for b in (X, S) if b is not None))
        targ = stack_genotypes(*(b for b in (W, S) if b is not None))
        e_as, e_es = _correlated_errors(rng_eps, ns, sd_ea, sd_ee, design.rho_eps)
        e_ax = rng_eps.standard_normal(n1) * sd_ea
        e_ew = rng_eps.standard_normal(n3) * sd_ee
        bundle.disc_alpha = disc
        bundle.target = targ
        bundle.y_alpha = gen_phenotype(
            disc, effects["alpha"], arch.h2_alpha, seed, epsilon=np.concatenate([e_ax, e_as])
        )
        bundle.y_eta = gen_phenotype(
            targ, effects["eta"], arch.h2_eta, seed, epsilon=np.concatenate([e_ew, e_es])
        )
        return bundle

    # discovery_discovery
    if n1 + ns < 2 or n2 + ns < 2:
        raise ParameterError("each discovery cohort needs at least 2 samples")
    X = block("X", n1)
    Z = block("Z", n2)
    disc_a = stack_genotypes(*(b for b in (X, S) if b is not None))
    disc_b = stack_genotypes(*(b for b in (Z, S) if b is not None))
    e_as, e_bs = _correlated_errors(rng_eps, ns, sd_ea, sd_eb, design.rho_eps)
    e_ax = rng_eps.standard_normal(n1) * sd_ea
    e_bz = rng_eps.standard_normal(n2) * sd_eb
    bundle.disc_alpha = disc_a
    bundle.disc_beta = disc_b
    bundle.y_alpha = gen_phenotype(
        disc_a, effects["alpha"], arch.h2_alpha, seed, epsilon=np.concatenate([e_ax, e_as])
    )
    bundle.y_beta = gen_phenotype(
        disc_b, effects["beta"], arch.h2_beta, seed, epsilon=np.concatenate([e_bz, e_bs])
    )
    bundle.target = block("W", n3)
    return bundle
