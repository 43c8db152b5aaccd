"""Exception hierarchy shared by all adlasso modules."""


class AdlassoError(Exception):
    """Base class for all errors raised by this package."""


class InvalidDims(AdlassoError):
    """Inconsistent or out-of-range problem dimensions."""


class NotSymmetric(AdlassoError):
    """Matrix asymmetry exceeds the allowed tolerance."""


class IndefiniteMatrix(AdlassoError):
    """A factorization pivot is negative beyond tolerance."""


class NonPsdCovariance(AdlassoError):
    """A covariance matrix fails the positive-semidefiniteness check."""


class NoConvergence(AdlassoError):
    """An iterative routine hit its iteration cap before converging."""


class EigenFailure(AdlassoError):
    """The eigensolver failed to reduce the off-diagonal mass."""


class SingularGram(AdlassoError):
    """X_S' X_S is numerically singular."""


class SingularSubmatrix(AdlassoError):
    """A covariance sub-block required to be invertible is singular."""


class DegenerateDirection(AdlassoError):
    """A perturbation direction had zero norm even after one resample."""


class LambdaZeroDual(AdlassoError):
    """The dual vector is undefined at lambda = 0."""


class KktViolation(AdlassoError):
    """A dual coordinate exceeds 1 by more than the allowed slack."""


class MissingTruth(AdlassoError):
    """The operation needs ground truth but the instance has none."""


class MissingCleanData(AdlassoError):
    """The operation needs retained clean/perturbation matrices."""


class ParseError(AdlassoError):
    """A tabular cell failed to parse; carries its row and column."""

    def __init__(self, row, col, message):
        super().__init__(f"row {row}, column {col}: {message}")
        self.row = row
        self.col = col


class MissingTarget(AdlassoError):
    """The requested target column does not exist."""


class EmptyDataset(AdlassoError):
    """The tabular file holds no data rows."""


class UnknownClaim(AdlassoError):
    """verify_tail_bound was asked for a claim id it does not know."""


class InvalidDeltaRange(AdlassoError):
    """A delta grid lies outside the claim's validity window."""
