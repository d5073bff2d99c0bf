"""Bayes factors and posterior model probabilities for ANOVA designs.

Three routes to the Bayes factor BF01 (null over alternative) are provided,
all based on the BIC approximation BF01 = exp(dBIC10 / 2) under a unit
information prior (Wagenmakers, 2007):

* :func:`bf01_minimal_rm` -- repeated measures, from the F statistic, the
  number of subjects and the number of conditions alone;
* :func:`bf01_between` -- independent groups, from F, its degrees of freedom
  and the total number of observations;
* :func:`delta_bic_nathoo` -- repeated measures, from sums of squares, using
  the Nathoo & Masson (2016) formula that accounts for the correlation
  between repeated measurements.

Everything is computed in natural-log space; the linear Bayes factor is
derived afterwards and saturates to the largest finite float (with a flag)
instead of overflowing.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, replace
from enum import Enum

from .anova import DesignSpec
from .errors import DomainError

__all__ = [
    "EvidenceResult",
    "Method",
    "ModelChoice",
    "SummaryStats",
    "bf01_between",
    "bf01_minimal_rm",
    "choose_model",
    "delta_bic_nathoo",
    "effective_sample_size",
    "posterior_probs",
]

_MAX_EXP_ARG = math.log(sys.float_info.max)


class Method(str, Enum):
    """Which route produced an evidence value."""

    MINIMAL_RM = "minimal_rm"
    BETWEEN_SUBJECTS = "between_subjects"
    NATHOO_MASSON = "nathoo_masson"


class ModelChoice(str, Enum):
    H0 = "H0"
    H1 = "H1"


@dataclass(frozen=True)
class EvidenceResult:
    """Bayes factor, BIC difference and posterior model probabilities.

    ``bf01 = exp(log_bf01)`` and ``delta_bic10 = 2 * log_bf01`` always hold;
    when a linear Bayes factor would overflow it is clamped to the largest
    finite float and ``saturated`` is set.
    """

    method: Method
    log_bf01: float
    bf01: float
    bf10: float
    delta_bic10: float
    posterior_h0: float
    posterior_h1: float
    prior_h0: float
    saturated: bool = False

    def to_dict(self) -> dict:
        return {
            "method": self.method.value,
            "log_bf01": self.log_bf01,
            "bf01": self.bf01,
            "bf10": self.bf10,
            "delta_bic10": self.delta_bic10,
            "posterior_h0": self.posterior_h0,
            "posterior_h1": self.posterior_h1,
            "prior_h0": self.prior_h0,
            "saturated": self.saturated,
        }


@dataclass(frozen=True)
class SummaryStats:
    """Sums of squares from a repeated-measures ANOVA, for designs where the
    raw data are unavailable.  The residual SST - SSA - SSB must be positive."""

    ss_treatment: float
    ss_subjects: float
    ss_total: float
    design: DesignSpec

    def __post_init__(self) -> None:
        ssa, ssb, sst = self.ss_treatment, self.ss_subjects, self.ss_total
        for name, value in (("ss_treatment", ssa), ("ss_subjects", ssb), ("ss_total", sst)):
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise DomainError(f"{name} must be a finite real, got {value!r}")
        if ssa < 0:
            raise DomainError(f"ss_treatment must be nonnegative, got {ssa!r}")
        if ssb <= 0:
            raise DomainError("ss_subjects must be positive (a zero subject sum of "
                              "squares signals a degenerate decomposition)")
        if sst <= ssb:
            raise DomainError("ss_total must exceed ss_subjects")
        if sst - ssa - ssb <= 0:
            raise DomainError("sums of squares imply a nonpositive residual "
                              "(ss_total - ss_treatment - ss_subjects must be positive)")

    @property
    def ss_residual(self) -> float:
        return self.ss_total - self.ss_treatment - self.ss_subjects


def _check_prior(prior_h0: float) -> None:
    if not (0.0 < prior_h0 < 1.0):
        raise DomainError(f"prior_h0 must lie strictly between 0 and 1, got {prior_h0!r}")


def _check_f(f_stat: float) -> None:
    if math.isnan(f_stat) or math.isinf(f_stat) or f_stat < 0:
        raise DomainError(f"F statistic must be a finite nonnegative real, got {f_stat!r}")


def _saturating_exp(x: float) -> tuple[float, bool]:
    if x > _MAX_EXP_ARG:
        return sys.float_info.max, True
    return math.exp(x), False


def _posterior_from_log_odds(log_odds: float) -> float:
    # logistic transform, stable on both tails
    if log_odds >= 0:
        return 1.0 / (1.0 + math.exp(-log_odds))
    e = math.exp(log_odds)
    return e / (1.0 + e)


def _result(method: Method, log_bf01: float, delta_bic10: float, prior_h0: float) -> EvidenceResult:
    bf01, hi = _saturating_exp(log_bf01)
    bf10, lo = _saturating_exp(-log_bf01)
    posterior_h0 = _posterior_from_log_odds(
        log_bf01 + math.log(prior_h0) - math.log1p(-prior_h0)
    )
    return EvidenceResult(
        method=method,
        log_bf01=log_bf01,
        bf01=bf01,
        bf10=bf10,
        delta_bic10=delta_bic10,
        posterior_h0=posterior_h0,
        posterior_h1=1.0 - posterior_h0,
        prior_h0=prior_h0,
        saturated=hi or lo,
    )


def bf01_between(f_stat: float, df1: int, df2: int, n_obs: int,
                 prior_h0: float = 0.5) -> EvidenceResult:
    """BIC Bayes factor for an independent-groups ANOVA.

    log BF01 = [df1 * ln(N) - N * ln(1 + F * df1 / df2)] / 2 with N = n_obs
    independent observations.
    """
    _check_f(f_stat)
    _check_prior(prior_h0)
    if not (isinstance(df1, int) and df1 >= 1 and isinstance(df2, int) and df2 >= 1):
        raise DomainError(f"degrees of freedom must be integers >= 1, got ({df1!r}, {df2!r})")
    if not (isinstance(n_obs, int) and n_obs >= 2):
        raise DomainError(f"need at least 2 observations, got n_obs={n_obs!r}")
    log_bf01 = 0.5 * (df1 * math.log(n_obs) - n_obs * math.log1p(f_stat * df1 / df2))
    return _result(Method.BETWEEN_SUBJECTS, log_bf01, 2.0 * log_bf01, prior_h0)


def bf01_minimal_rm(f_stat: float, design: DesignSpec,
                    prior_h0: float = 0.5) -> EvidenceResult:
    """BIC Bayes factor for a repeated-measures ANOVA from (F, n, k) alone.

    log BF01 = [(k-1) * ln(nk - n) + (n - nk) * ln(1 + F / (n - 1))] / 2.
    This is algebraically the independent-groups form with df1 = k - 1,
    df2 = (n-1)(k-1) and N = n(k-1) independent observations, and is computed
    through that route so the reduction identity holds to the bit.
    """
    if not isinstance(design, DesignSpec):
        raise DomainError(f"design must be a DesignSpec, got {type(design).__name__}")
    base = bf01_between(
        f_stat,
        design.k - 1,
        (design.n - 1) * (design.k - 1),
        design.n_independent,
        prior_h0=prior_h0,
    )
    return replace(base, method=Method.MINIMAL_RM)


def delta_bic_nathoo(stats: SummaryStats, prior_h0: float = 0.5) -> EvidenceResult:
    """Nathoo & Masson (2016) sums-of-squares Bayes factor for repeated
    measures, which estimates and adjusts for the intraclass correlation.

    dBIC10 = n(k-1) * ln[(SST-SSA-SSB)/(SST-SSB)]
           + (k+2) * ln[n(SST-SSA)/SSB] - 3 * ln[n*SST/SSB]
    and BF01 = exp(dBIC10 / 2).
    """
    if not isinstance(stats, SummaryStats):
        raise DomainError(f"stats must be a SummaryStats, got {type(stats).__name__}")
    _check_prior(prior_h0)
    n, k = stats.design.n, stats.design.k
    ssa, ssb, sst = stats.ss_treatment, stats.ss_subjects, stats.ss_total
    delta_bic10 = (
        n * (k - 1) * math.log((sst - ssa - ssb) / (sst - ssb))
        + (k + 2) * math.log(n * (sst - ssa) / ssb)
        - 3.0 * math.log(n * sst / ssb)
    )
    return _result(Method.NATHOO_MASSON, 0.5 * delta_bic10, delta_bic10, prior_h0)


def posterior_probs(bf01: float, prior_h0: float = 0.5) -> tuple[float, float]:
    """Posterior model probabilities from a Bayes factor and a prior.

    Returns (p(H0|y), p(H1|y)) with
    p(H0|y) = BF01 * p(H0) / (BF01 * p(H0) + p(H1)); at prior_h0 = 0.5 this
    reduces to BF01 / (BF01 + 1).
    """
    if not (bf01 > 0) or math.isinf(bf01):
        raise DomainError(f"bf01 must be a finite positive real, got {bf01!r}")
    _check_prior(prior_h0)
    weighted = bf01 * prior_h0
    posterior_h0 = weighted / (weighted + (1.0 - prior_h0))
    return posterior_h0, 1.0 - posterior_h0


def effective_sample_size(design: DesignSpec, rho: float) -> float:
    """Effective number of independent observations, nk / (1 + rho*(k-1)).

    ``rho`` is the intraclass correlation: rho = 0 gives nk (fully
    independent measurements), rho = 1 gives n (fully redundant ones).
    Informational only; no Bayes factor route consumes it.
    """
    if math.isnan(rho) or not (0.0 <= rho <= 1.0):
        raise DomainError(f"intraclass correlation must lie in [0, 1], got {rho!r}")
    return design.n_total / (1.0 + rho * (design.k - 1))


def choose_model(result: EvidenceResult) -> ModelChoice:
    """Pick H0 when BF01 >= 1 (log BF01 >= 0), else H1.

    The tie at BF01 = 1 goes to H0 so repeated runs classify deterministically.
    """
    return ModelChoice.H0 if result.log_bf01 >= 0 else ModelChoice.H1
