import numpy as np


class OpInfError(Exception):
    """Base class for every error raised by the rom package."""


class DimensionError(OpInfError, ValueError):
    """Shapes, ranks or sizes that do not fit together."""


class TransformDomainError(OpInfError, ValueError):
    """A value outside the domain of a variable transform recipe."""

    def __init__(self, variable, column, message):
        self.variable = variable
        self.column = column
        super().__init__(f"{message} (variable '{variable}', column {column})")


class ScalingError(OpInfError, ValueError):
    pass


class FactorizationError(OpInfError, np.linalg.LinAlgError):
    """The regularized Gram matrix is not positive definite."""

    def __init__(self, pivot, message=None):
        self.pivot = pivot
        super().__init__(
            message or f"Cholesky factorization failed at pivot {pivot}: "
                       f"matrix is not positive definite"
        )


class OverParameterizedError(OpInfError, ValueError):
    """The regression has at least as many unknowns per row as data columns."""

    def __init__(self, r, m, d, k):
        self.r, self.m, self.d, self.k = r, m, d, k
        super().__init__(
            f"over-parameterized regression: d(r={r}, m={m}) = {d} >= k = {k}; "
            f"use a smaller r or more snapshots"
        )


class GridSearchError(OpInfError):
    """Every point of the regularization grid was disqualified."""


class MatrixFormatError(OpInfError, ValueError):
    pass


class IntegrationError(OpInfError):
    """A reference trajectory could not be integrated."""
