"""Exception hierarchy shared by every module of the package."""


class FLLRError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(FLLRError, ValueError):
    def __init__(self, dim_a, dim_b):
        super().__init__(f"dimension mismatch: {dim_a} != {dim_b}")
        self.dims = (dim_a, dim_b)


class DomainError(FLLRError, ValueError):
    """Argument outside the domain where a function is defined."""


class EmptyNeighborhood(FLLRError):
    """No observation falls inside the kernel window around x0."""

    def __init__(self, h, nearest):
        super().__init__(
            f"no observation within bandwidth h={h:.6g}; "
            f"nearest curve is at distance {nearest:.6g}, use h above it"
        )
        self.h = h
        self.nearest = nearest


class DegenerateDenominator(FLLRError):
    def __init__(self, weight_sum, threshold):
        super().__init__(
            f"sum of local linear weights {weight_sum:.3e} is below the guard "
            f"{threshold:.3e}; increase the regularization parameter or h"
        )
        self.weight_sum = weight_sum
        self.threshold = threshold


class DegenerateTruncation(FLLRError):
    """Spectral truncation asked to invert a zero eigenvalue."""


class DegenerateOperator(FLLRError):
    """The local covariance operator is identically zero."""


class NumericalSingularity(FLLRError):
    """Normal equations of the direct weighted least squares are singular."""


class EigenNonConvergence(FLLRError):
    def __init__(self, sweeps, off_norm):
        super().__init__(
            f"Jacobi eigensolver did not converge after {sweeps} sweeps "
            f"(off-diagonal norm {off_norm:.3e})"
        )
        self.sweeps = sweeps
        self.off_norm = off_norm


class NoRoot(FLLRError):
    def __init__(self, lo, hi, g_lo, g_hi):
        super().__init__(
            f"no sign change on [{lo:.6g}, {hi:.6g}]: "
            f"g(lo)={g_lo:.6g}, g(hi)={g_hi:.6g}"
        )
        self.bracket = (lo, hi)
        self.values = (g_lo, g_hi)


class SelectionFailed(FLLRError):
    """Every cell of a cross-validation grid failed."""


class FitError(FLLRError):
    """Parametric small-ball family could not be fitted."""


class ConfigError(FLLRError, ValueError):
    """Malformed experiment configuration."""
