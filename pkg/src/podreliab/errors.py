"""Exception hierarchy for the reliability-evaluation pipeline."""


class PodReliabError(Exception):
    """Base class for all errors raised by this package."""


class InputError(PodReliabError):
    """Malformed or inconsistent input data (files, records, configs)."""


class AlignmentError(PodReliabError):
    """Truth and prediction series disagree in length or timing."""


class EmptyGroupError(PodReliabError):
    """A traffic-situation group has no samples at the requested horizon."""


class SingularDesignError(PodReliabError):
    """Regression design matrix is singular (e.g. a single distinct level)."""


class ScaleDomainError(PodReliabError):
    """Log-scale transform requested for data with non-positive values."""


class CovarianceError(PodReliabError):
    """Parameter covariance is unusable (non-finite or negative variance)."""


class ScenarioError(PodReliabError):
    """Synthetic scenario specification is infeasible or inconsistent."""
