"""Exception hierarchy shared by all dpasim modules."""


class DpaError(Exception):
    """Base class for every error raised by dpasim."""


class DomainError(DpaError, ValueError):
    """An argument lies outside the domain where a model is defined."""


class ConfigurationError(DpaError, ValueError):
    """A configuration record is missing fields or is inconsistent."""


class SingularityError(DomainError):
    """A model was evaluated at (or numerically on) one of its poles."""


class ThresholdError(SingularityError):
    """The amplifier is at or above the parametric self-oscillation threshold.

    Attributes
    ----------
    margin : float
        Signed threshold margin, ``|xi|^2 / (Delta^2 + kappa_bar^2) - 1``.
    """

    def __init__(self, margin, message=None):
        self.margin = float(margin)
        super().__init__(message or f"parameters at or above oscillation threshold (margin={self.margin:.6g})")


class BracketingError(DpaError, ValueError):
    """A root search interval does not contain a sign change."""


class ExtractionError(DpaError, ValueError):
    """A feature (peak, crossing) could not be located in a trace."""


class AlignmentError(DomainError):
    """No pump phase aligns the amplification axis for these parameters."""


class DegenerateInputError(DpaError, ValueError):
    """Input data carry no usable information (e.g. zero peak-to-peak)."""


class AggregationError(DomainError):
    """A detection chain cannot be reduced to a single net-gain amplifier."""


class FitError(DpaError, RuntimeError):
    """A fit failed; ``result`` holds the best parameters reached, if any."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NotSaturatedError(DpaError, ValueError):
    """A gain-compression trace never drops 1 dB below its small-signal gain."""


class ComplexKappaWarning(UserWarning):
    """A complex coupling rate was reduced to its real part."""
