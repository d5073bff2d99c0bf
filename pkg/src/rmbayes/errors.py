"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class DegenerateResidualError(DomainError):
    """The sums-of-squares decomposition left no residual variability, so the
    treatment F statistic is unbounded."""


class DesignInferenceError(DomainError):
    """Reported degrees of freedom are not consistent with a one-factor
    repeated-measures design, so (n, k) cannot be recovered from them."""
