"""Exception hierarchy shared by every stage of the pipeline.

Each class carries the process exit code the CLI reports for it.
"""


class BreathSegError(Exception):
    exit_code = 1


class AudioIOError(BreathSegError):
    """File could not be read or written."""

    exit_code = 2


class FormatError(AudioIOError):
    """Malformed RIFF/WAVE container."""


class UnsupportedError(AudioIOError):
    """Well-formed file in an encoding we do not decode."""


class RateError(AudioIOError):
    """Sample rate too low for the 2 kHz low-pass stage."""


class EstimationError(BreathSegError):
    """Breath rate could not be estimated from the energy spectrum."""

    exit_code = 3


class NoPeriodicityError(EstimationError):
    pass


class InfeasibleError(BreathSegError):
    """No boundary sequence satisfies the search-range constraints."""

    exit_code = 4


class ValidationError(BreathSegError, ValueError):
    """Input violates a documented precondition."""

    exit_code = 5


class ParseError(ValidationError):
    pass


class DesignError(ValidationError):
    pass


class FitError(ValidationError):
    pass


class PowerError(ValidationError):
    pass


class SpecError(ValidationError):
    pass
