"""Exception types shared across the package."""


class TvMarkovError(Exception):
    """Base class for all package-specific errors."""


class NonErgodicError(TvMarkovError):
    """No power of the transition matrix contracts in total variation."""


class CertificateNotFoundError(TvMarkovError):
    """A requested contraction/minoration certificate could not be produced."""


class TruncationError(TvMarkovError):
    """Probability mass beyond the truncation boundary exceeds the declared tolerance."""


class ModelInvalidError(TvMarkovError):
    """Model parameters violate a stability or simplex precondition."""


class RegressionDegenerateError(TvMarkovError):
    """Weighted design matrix is singular or too ill-conditioned."""


class BandwidthWindowError(TvMarkovError):
    """No observation index falls inside the smoothing window."""


class OracleSizeError(TvMarkovError):
    """Transport oracle called beyond its exact-solve size cap."""


class ConcaveCostDisagreementError(TvMarkovError):
    """Monotone-coupling and exact-transport values disagree for a concave cost."""


class ConfigValidationError(TvMarkovError):
    """Scenario configuration violates the documented schema."""
