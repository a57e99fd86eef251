"""Exception types shared across rmqlab."""


class RmqError(Exception):
    """Base class for all rmqlab errors."""


class DimensionError(RmqError, ValueError):
    pass


class ParameterError(RmqError, ValueError):
    pass


class SizeError(RmqError):
    """A search space or matrix exceeds its configured guard."""


class DegreeError(RmqError, ValueError):
    pass


class InfeasibleGuessError(RmqError, ValueError):
    """A guess pattern leaves a block without any free coordinate."""


class IncompleteDataError(RmqError, KeyError):
    """An interpolation input is missing a required evaluation."""

    def __init__(self, missing):
        super().__init__(f"missing evaluation for {missing!r}")
        self.missing = missing


class InconsistentDecisionError(RmqError):
    """A decision oracle answered positively, then every refinement negatively."""


class EstimatorError(RmqError):
    """Root isolation or optimisation failed to produce a valid exponent."""
