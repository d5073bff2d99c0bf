"""One-factor repeated-measures ANOVA on subject-by-condition data matrices.

The decomposition splits total variability into a treatment component
(between condition means), a subject component (between subject means), and
the residual left over after removing both.  The treatment F statistic and
its upper-tail p-value are computed with no external statistics dependency;
the F CDF is evaluated through the regularized incomplete beta function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateResidualError, DomainError

__all__ = ["AnovaTable", "DesignSpec", "f_cdf", "rm_anova"]

# Relative threshold below which a sum of squares counts as exactly zero.
# Guards the F ratio against 0/0 noise when SSR = SST - SSA - SSB cancels.
_SS_REL_EPS = 1e-12


@dataclass(frozen=True)
class DesignSpec:
    """A repeated-measures design: n subjects each measured in k conditions."""

    n: int
    k: int

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 2:
            raise DomainError(f"need at least 2 subjects, got n={self.n!r}")
        if not isinstance(self.k, int) or self.k < 2:
            raise DomainError(f"need at least 2 conditions, got k={self.k!r}")

    @property
    def n_total(self) -> int:
        """Total number of measurements, n*k."""
        return self.n * self.k

    @property
    def n_independent(self) -> int:
        """Number of independent observations in the design, n*(k-1)."""
        return self.n * (self.k - 1)


@dataclass(frozen=True)
class AnovaTable:
    """Sums of squares, degrees of freedom, mean squares, F and p for a
    one-factor repeated-measures decomposition."""

    ss_treatment: float
    ss_subjects: float
    ss_residual: float
    ss_total: float
    df_treatment: int
    df_subjects: int
    df_residual: int
    ms_treatment: float
    ms_residual: float
    f_stat: float
    p_value: float

    def to_dict(self) -> dict:
        return {
            "ss_treatment": self.ss_treatment,
            "ss_subjects": self.ss_subjects,
            "ss_residual": self.ss_residual,
            "ss_total": self.ss_total,
            "df_treatment": self.df_treatment,
            "df_subjects": self.df_subjects,
            "df_residual": self.df_residual,
            "ms_treatment": self.ms_treatment,
            "ms_residual": self.ms_residual,
            "f_stat": self.f_stat,
            "p_value": self.p_value,
        }


def rm_anova(data) -> AnovaTable:
    """Decompose a subject-by-condition matrix into treatment, subject and
    residual sums of squares and test the treatment effect.

    Parameters
    ----------
    data : array-like, shape (n, k)
        One row per subject, one column per condition.  Requires n >= 2,
        k >= 2 and finite entries.

    Returns
    -------
    AnovaTable
        Full decomposition with F = (SSA/SSR)*(n-1) and the upper-tail
        p-value from the F(k-1, (n-1)(k-1)) distribution.

    Raises
    ------
    DomainError
        If the matrix is not 2-d, is smaller than 2x2, or has non-finite
        entries.
    DegenerateResidualError
        If the residual sum of squares is zero while the treatment sum of
        squares is not (the F ratio would be unbounded).  A matrix with
        neither residual nor treatment variability yields F = 0 instead.
    """
    values = np.asarray(data, dtype=float)
    if values.ndim != 2:
        raise DomainError(f"expected a 2-d subject-by-condition matrix, got shape {values.shape}")
    n, k = values.shape
    if n < 2 or k < 2:
        raise DomainError(f"need at least 2 subjects and 2 conditions, got {n}x{k}")
    if not np.isfinite(values).all():
        raise DomainError("data matrix contains non-finite entries")

    # numpy reductions sum pairwise, which keeps the partition identity
    # SSA + SSB + SSR = SST tight even for large matrices
    grand = float(values.mean())
    col_dev = values.mean(axis=0) - grand
    row_dev = values.mean(axis=1) - grand
    ss_treatment = float(n * (col_dev @ col_dev))
    ss_subjects = float(k * (row_dev @ row_dev))
    centered = values - grand
    ss_total = float((centered * centered).sum())
    ss_residual = ss_total - ss_treatment - ss_subjects

    df_treatment = k - 1
    df_subjects = n - 1
    df_residual = df_treatment * df_subjects

    tol = _SS_REL_EPS * ss_total
    if ss_residual <= tol:
        if ss_treatment > tol:
            raise DegenerateResidualError(
                "residual sum of squares is zero but the treatment sum of squares "
                f"is {ss_treatment:.6g}; the F ratio is unbounded for this matrix"
            )
        # no residual and no treatment signal (constant rows / identical
        # columns): F = 0 is the only consistent completion
        ss_residual = max(ss_residual, 0.0)
        f_stat = 0.0
        p_value = 1.0
    else:
        f_stat = (ss_treatment / ss_residual) * df_subjects
        p_value = 1.0 - f_cdf(f_stat, df_treatment, df_residual)

    return AnovaTable(
        ss_treatment=ss_treatment,
        ss_subjects=ss_subjects,
        ss_residual=ss_residual,
        ss_total=ss_total,
        df_treatment=df_treatment,
        df_subjects=df_subjects,
        df_residual=df_residual,
        ms_treatment=ss_treatment / df_treatment,
        ms_residual=ss_residual / df_residual,
        f_stat=f_stat,
        p_value=p_value,
    )


def f_cdf(x: float, df1: float, df2: float) -> float:
    """P(F <= x) for the F distribution with (df1, df2) degrees of freedom.

    Evaluated as the regularized incomplete beta function
    I_{df1*x / (df1*x + df2)}(df1/2, df2/2); absolute accuracy is well below
    1e-10 across the domain.

    Raises
    ------
    DomainError
        For x < 0, NaN x, or nonpositive degrees of freedom.
    """
    if not (df1 > 0 and df2 > 0):
        raise DomainError(f"degrees of freedom must be positive, got ({df1!r}, {df2!r})")
    if math.isnan(x) or x < 0:
        raise DomainError(f"F statistic must be a nonnegative real, got {x!r}")
    if math.isinf(x):
        return 1.0
    if x == 0.0:
        return 0.0
    t = df1 * x
    return _reg_incomplete_beta(0.5 * df1, 0.5 * df2, t / (t + df2))


def _reg_incomplete_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) by Lentz's continued fraction,
    switching to the symmetric form for x > (a+1)/(a+b+2)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        value = front * _beta_continued_fraction(a, b, x) / a
    else:
        value = 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b
    return min(max(value, 0.0), 1.0)


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Modified Lentz evaluation of the incomplete-beta continued fraction."""
    tiny = 1e-300  # floor keeps intermediate denominators away from 0
    eps = 1e-16
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 501):
        m2 = 2 * m
        coef = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + coef * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + coef / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        coef = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + coef * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + coef / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise RuntimeError(
        f"incomplete beta continued fraction did not converge for a={a}, b={b}, x={x}"
    )
