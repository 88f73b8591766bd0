"""Exception hierarchy.

Every error raised by the library derives from SpikeCCAError so callers
can catch one type at the boundary.  The CLI maps each subclass to a
distinct exit code and the HTTP service to an error category string.
"""


class SpikeCCAError(Exception):
    """Base class for all package errors."""

    category = "error"


class ModelDomainError(SpikeCCAError):
    """Parameter outside the model's domain (ratios, spikes, levels)."""

    category = "model_domain"


class DataShapeError(SpikeCCAError):
    """Data matrices with unusable shapes or sizes."""

    category = "data_shape"


class RankDeficiencyError(SpikeCCAError):
    """Input data matrix does not have full row rank."""

    category = "rank_deficiency"


class NumericalError(SpikeCCAError):
    """Numerical result outside tolerated bounds (not a user error)."""

    category = "numerical"


class ConfigError(SpikeCCAError):
    """Malformed study configuration or unknown preset."""

    category = "config"
