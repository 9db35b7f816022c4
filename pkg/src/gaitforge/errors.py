"""Exception types shared across the package."""


class GaitforgeError(Exception):
    """Base class for every package-specific error."""


class UnknownMorphology(GaitforgeError):
    """Requested morphology is not built in and is not a readable config path."""


class ValidationError(GaitforgeError):
    """A morphology description violates one or more structural constraints.

    Carries the full list of violations so a bad config surfaces every
    problem in a single load attempt.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class DimensionMismatch(GaitforgeError):
    """An input vector or matrix has the wrong length or shape."""


class InvalidInput(GaitforgeError):
    """An input contains NaN or infinite entries."""


class NumericalBlowup(GaitforgeError):
    """A state entry exceeded the magnitude cap; the simulation went unstable."""


class NotReset(GaitforgeError):
    """step() was called on an environment whose episode is not live."""


class SchemaMismatch(GaitforgeError):
    """A serialised file does not match the expected schema or is corrupt."""


class ProtocolError(GaitforgeError):
    """The external policy server violated the action protocol."""
