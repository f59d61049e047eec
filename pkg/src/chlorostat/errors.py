"""Exception types shared across the package.

Each error class carries the CLI exit code it maps to, so the command
layer can translate failures without a lookup table.
"""


class ChlorostatError(Exception):
    exit_code = 3


class InvalidParameterError(ChlorostatError, ValueError):
    exit_code = 2


class DomainError(ChlorostatError, ValueError):
    """A kinetics function was evaluated outside its domain."""

    exit_code = 2


class NoPreimageError(ChlorostatError, ValueError):
    exit_code = 3


class RegionViolation(ChlorostatError, ValueError):
    """A state lies outside the invariant region beyond the clip tolerance."""

    exit_code = 3


class SamplingWindowError(ChlorostatError, ValueError):
    exit_code = 3


class NotOnLocusError(ChlorostatError, ValueError):
    exit_code = 3


class IntegrationFailure(ChlorostatError, RuntimeError):
    """Step-size collapse. ``partial`` holds the trajectory computed so far."""

    exit_code = 3

    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


class PropertyViolation(ChlorostatError, AssertionError):
    exit_code = 4
