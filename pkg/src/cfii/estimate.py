"""Finite-shot estimation and certification of the chain witness.

The plug-in Fisher information estimator averages squared model scores over a
sample, F_hat = (1/n) sum_i s(x_i)^2, and its variance comes from the sample
variance of the squared scores.  The chain witness estimate

    V_hat = 1/F_hat(end) - sum_j 1/F_hat(segment j)

gets a delta-method standard error SE^2 = sum_s Var(F_hat_s)/F_s^4, either
with empirical moments ("empirical" mode) or with the analytic fourth moment
mu4 = sum_x p_x s_x^4 ("analytic-moment" mode).  Z = -V_hat/SE measures how
many standard errors the witness sits below the classical boundary.

Also here: the smoothed two-class classifier score (a finite-difference
log-likelihood-ratio estimate), a closed-form MLE for the binary fringe, and
seeded Monte-Carlo experiments for RMSE achievability and the sampling
distribution of V_hat.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BranchWarning, DegenerateModelError, EstimationError
from .models import BinaryModel, NoisyFringeModel, NoisyFringeParams
from .rng import derive_rng
from .witness import v_chain

Z95 = 1.959964

# RNG path tags (see rng.py).
_TAG_SAMPLE = 1
_TAG_CLASSIFIER = 2
_TAG_RMSE = 3
_TAG_VK = 4


@dataclass(frozen=True)
class ContextSample:
    """Outcomes of n shots of one measurement context at angle theta."""

    theta: float
    outcomes: np.ndarray

    def __post_init__(self) -> None:
        out = np.asarray(self.outcomes, dtype=np.int8)
        if out.ndim != 1 or out.size < 1:
            raise ValueError("outcomes must be a nonempty 1-D sequence")
        if np.any((out != 0) & (out != 1)):
            raise ValueError("outcomes must be 0 or 1")
        object.__setattr__(self, "outcomes", out)

    @property
    def n(self) -> int:
        return self.outcomes.size


@dataclass(frozen=True)
class FiEstimate:
    """Plug-in FI estimate with an estimate of its own variance."""

    value: float
    variance: float
    n: int
    degenerate: bool = False

    def __post_init__(self) -> None:
        if self.variance < 0.0:
            raise ValueError("variance must be >= 0")


@dataclass(frozen=True)
class CertificationReport:
    """Witness estimate with delta-method error bar and significance."""

    v_hat: float
    se: float
    z: float
    ci95: tuple[float, float]
    estimates: tuple[FiEstimate, ...]
    mode: str


def sample_binary(model: BinaryModel, theta: float, n: int,
                  seed: int) -> ContextSample:
    """Draw n outcomes with P(x=0) = p0(theta) from a seeded stream."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    p0 = float(model.p0(theta))
    rng = derive_rng(seed, _TAG_SAMPLE)
    outcomes = (rng.random(n) >= p0).astype(np.int8)
    return ContextSample(theta=float(theta), outcomes=outcomes)


def plugin_fi(sample: ContextSample, model: BinaryModel) -> FiEstimate:
    """Average squared score over the sample, with the sample variance of
    the squared scores divided by n as the variance estimate.

    A single-shot sample cannot estimate a variance; it reports 0 with the
    degenerate flag set.
    """
    s0 = float(model.score(0, sample.theta))
    s1 = float(model.score(1, sample.theta))
    n1 = int(sample.outcomes.sum())
    n0 = sample.n - n1
    sq = np.array([s0 * s0, s1 * s1])
    counts = np.array([n0, n1], dtype=float)
    value = float(counts @ sq) / sample.n
    if sample.n == 1:
        return FiEstimate(value=value, variance=0.0, n=1, degenerate=True)
    ss = float(counts @ (sq - value) ** 2)
    variance = ss / (sample.n - 1) / sample.n
    return FiEstimate(value=value, variance=variance, n=sample.n)


def analytic_mu4(model: BinaryModel, theta: float) -> float:
    """Fourth moment of the score, sum_x p_x s_x^4."""
    zd = float(model.zdot(theta))
    if zd == 0.0:
        return 0.0
    p0 = float(model.p0(theta))
    p1 = float(model.p1(theta))
    if p0 <= 0.0 or p1 <= 0.0:
        raise DegenerateModelError("mu4 undefined at a degenerate point")
    s0 = float(model.score(0, theta))
    s1 = float(model.score(1, theta))
    return p0 * s0 ** 4 + p1 * s1 ** 4


def fi_estimate_variance(model: BinaryModel, theta: float, n: int) -> float:
    """Analytic variance (mu4 - F^2)/n of the n-shot plug-in FI estimator.

    mu4 >= F^2 always (Jensen), with equality at mid-fringe points where the
    squared score is outcome-independent; there the subtraction can round to
    a tiny negative number, so clamp at zero.
    """
    f = float(model.fi(theta))
    return max(0.0, (analytic_mu4(model, theta) - f * f) / n)


def certify_vk(endpoint: ContextSample, segments: Sequence[ContextSample],
               models: BinaryModel | Sequence[BinaryModel],
               se_mode: str = "empirical") -> CertificationReport:
    """Estimate the chain witness from sampled contexts and attach a
    delta-method standard error.

    `models` is either one model shared by all contexts or a list aligned
    with [endpoint, *segments].  se_mode selects how per-context estimator
    variances are computed: "empirical" from the samples, "analytic-moment"
    from the model's exact moments at each context angle.
    """
    if len(segments) == 0:
        raise EstimationError("need at least one segment context")
    if se_mode not in ("empirical", "analytic-moment"):
        raise ValueError(f"unknown se_mode {se_mode!r}")
    contexts = [endpoint, *segments]
    if isinstance(models, BinaryModel):
        models = [models] * len(contexts)
    if len(models) != len(contexts):
        raise ValueError(f"got {len(models)} models for {len(contexts)} contexts")

    estimates = tuple(plugin_fi(s, m) for s, m in zip(contexts, models))
    if any(e.value <= 0.0 for e in estimates):
        raise EstimationError("zero plug-in FI estimate; witness undefined")

    v_hat = v_chain(estimates[0].value, [e.value for e in estimates[1:]])
    if se_mode == "empirical":
        se2 = sum(e.variance / e.value ** 4 for e in estimates)
    else:
        se2 = 0.0
        for sample, model in zip(contexts, models):
            f = float(model.fi(sample.theta))
            se2 += fi_estimate_variance(model, sample.theta, sample.n) / f ** 4
    se = math.sqrt(se2)
    if se > 0.0:
        z = -v_hat / se
    else:
        z = 0.0 if v_hat == 0.0 else math.copysign(math.inf, -v_hat)
    return CertificationReport(
        v_hat=v_hat, se=se, z=z,
        ci95=(v_hat - Z95 * se, v_hat + Z95 * se),
        estimates=estimates, mode=se_mode)


def analytic_certification(model: BinaryModel, t_total: float, k: int,
                           n_per_context: int) -> CertificationReport:
    """Deterministic delta-method prediction for the equal-partition chain:
    the witness, SE, and Z that an n_per_context-shot experiment is expected
    to produce, computed entirely from analytic moments."""
    if k < 2:
        raise ValueError(f"chain needs k >= 2 segments, got {k}")
    if n_per_context < 2:
        raise ValueError("need n_per_context >= 2")
    thetas = [t_total] + [t_total / k] * k
    estimates = []
    se2 = 0.0
    for theta in thetas:
        f = float(model.fi(theta))
        var = fi_estimate_variance(model, theta, n_per_context)
        estimates.append(FiEstimate(value=f, variance=var, n=n_per_context))
        se2 += var / f ** 4
    v = v_chain(estimates[0].value, [e.value for e in estimates[1:]])
    se = math.sqrt(se2)
    if se > 0.0:
        z = -v / se
    else:
        z = 0.0 if v == 0.0 else math.copysign(math.inf, -v)
    return CertificationReport(
        v_hat=v, se=se, z=z,
        ci95=(v - Z95 * se, v + Z95 * se),
        estimates=tuple(estimates), mode="analytic-moment")


def classifier_score(counts_plus: tuple[int, int], counts_minus: tuple[int, int],
                     delta: float, alpha: float = 5.0) -> tuple[float, float]:
    """Smoothed log-ratio score from two-class training counts.

    With n_{+-,x} outcome counts collected at theta +- delta,

        s_hat(x) = (1/2 delta) ln[ ((n_{+,x}+alpha)/(N_+ + 2 alpha))
                                 / ((n_{-,x}+alpha)/(N_- + 2 alpha)) ].
    """
    if delta <= 0.0:
        raise EstimationError(f"delta must be > 0, got {delta}")
    if alpha < 0.0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    np_, nm = sum(counts_plus), sum(counts_minus)
    if np_ < 1 or nm < 1:
        raise ValueError("each class needs at least one training count")
    scores = []
    for x in (0, 1):
        num = (counts_plus[x] + alpha) / (np_ + 2.0 * alpha)
        den = (counts_minus[x] + alpha) / (nm + 2.0 * alpha)
        if num <= 0.0 or den <= 0.0:
            raise EstimationError(
                "empty training cell with alpha=0; score undefined")
        scores.append(math.log(num / den) / (2.0 * delta))
    return scores[0], scores[1]


def classifier_fi(model: BinaryModel, theta: float, delta: float = 0.10,
                  n_train: int = 10 ** 5, n_eval: int = 10 ** 5,
                  alpha: float = 5.0, seed: int = 0) -> FiEstimate:
    """Model-free FI estimate: train the classifier score on samples drawn
    at theta +- delta, then average its square over fresh samples at theta."""
    if n_train < 1 or n_eval < 1:
        raise ValueError("n_train and n_eval must be >= 1")
    rng_p = derive_rng(seed, _TAG_CLASSIFIER, 0)
    rng_m = derive_rng(seed, _TAG_CLASSIFIER, 1)
    rng_e = derive_rng(seed, _TAG_CLASSIFIER, 2)

    n1_p = int(rng_p.binomial(n_train, float(model.p1(theta + delta))))
    n1_m = int(rng_m.binomial(n_train, float(model.p1(theta - delta))))
    s0, s1 = classifier_score((n_train - n1_p, n1_p),
                              (n_train - n1_m, n1_m), delta, alpha)

    n1_e = int(rng_e.binomial(n_eval, float(model.p1(theta))))
    n0_e = n_eval - n1_e
    sq = np.array([s0 * s0, s1 * s1])
    counts = np.array([n0_e, n1_e], dtype=float)
    value = float(counts @ sq) / n_eval
    if n_eval == 1:
        return FiEstimate(value=value, variance=0.0, n=1, degenerate=True)
    ss = float(counts @ (sq - value) ** 2)
    return FiEstimate(value=value, variance=ss / (n_eval - 1) / n_eval,
                      n=n_eval)


def mle_theta(p0_hat: float, vartheta: float = 0.0) -> float:
    """Invert the ideal fringe frequency: theta_hat = vartheta +
    2 arccos(sqrt(p0_hat)), one-to-one on the branch (vartheta,
    vartheta + pi).  Frequencies are clamped to [1e-12, 1 - 1e-12]; a
    frequency pinned at 0 or 1 sits on the branch boundary and triggers a
    warning."""
    if not 0.0 <= p0_hat <= 1.0:
        raise ValueError(f"p0_hat must lie in [0, 1], got {p0_hat}")
    if p0_hat <= 0.0 or p0_hat >= 1.0:
        warnings.warn("frequency on the branch boundary; estimate pinned",
                      BranchWarning, stacklevel=2)
    clamped = min(max(p0_hat, 1e-12), 1.0 - 1e-12)
    theta_hat = vartheta + 2.0 * math.acos(math.sqrt(clamped))
    if p0_hat >= 1.0:
        theta_hat = vartheta
    elif p0_hat <= 0.0:
        theta_hat = vartheta + math.pi
    return theta_hat


def mc_rmse(model: BinaryModel, theta_true: float, n: int, reps: int,
            seed: int, vartheta: float = 0.0) -> float:
    """Root-mean-square error of the fringe MLE over seeded replications of
    an n-shot experiment at theta_true."""
    if n < 1 or reps < 1:
        raise ValueError("n and reps must be >= 1")
    p0 = float(model.p0(theta_true))
    rng = derive_rng(seed, _TAG_RMSE)
    n0 = rng.binomial(n, p0, size=reps)
    p0_hat = np.clip(n0 / n, 1e-12, 1.0 - 1e-12)
    theta_hat = vartheta + 2.0 * np.arccos(np.sqrt(p0_hat))
    return float(np.sqrt(np.mean((theta_hat - theta_true) ** 2)))


def mc_vk_distribution(params: NoisyFringeParams, t_total: float, k: int,
                       n_per_context: int, reps: int, seed: int
                       ) -> tuple[float, tuple[float, float]]:
    """Sampling distribution of the chain witness estimate.

    Runs `reps` independent equal-partition experiments with n_per_context
    shots in each of the 1 + k contexts (one derived stream per context) and
    returns the mean and the empirical 2.5%/97.5% quantiles of V_hat.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    if k < 2:
        raise ValueError(f"chain needs k >= 2 segments, got {k}")
    model = NoisyFringeModel(params)

    def fhat(theta: float, stream: int, size) -> np.ndarray:
        p0 = float(model.p0(theta))
        s0 = float(model.score(0, theta))
        s1 = float(model.score(1, theta))
        rng = derive_rng(seed, _TAG_VK, stream)
        n0 = rng.binomial(n_per_context, p0, size=size)
        return (n0 * s0 * s0 + (n_per_context - n0) * s1 * s1) / n_per_context

    f_end = fhat(t_total, 0, reps)
    f_seg = np.column_stack(
        [fhat(t_total / k, 1 + j, reps) for j in range(k)])
    v = 1.0 / f_end - (1.0 / f_seg).sum(axis=1)
    lo, hi = np.quantile(v, [0.025, 0.975])
    return float(v.mean()), (float(lo), float(hi))
