"""Exception types shared across the lab modules."""


class LabError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(LabError):
    """Parameters violate a documented precondition."""


class InvalidInputError(LabError):
    """Field data is malformed: non-finite entries, wrong shape, bad norm."""


class UndefinedFractionError(InvalidInputError):
    """A spectral fraction was requested for a field with zero norm."""


class DegenerateInputError(LabError):
    """Two inputs that must differ are numerically identical."""


class WindowTooFarError(LabError):
    """A tail-fit window lies below the double-precision floor."""


class StrandedConfigurationError(LabError):
    """The jump process sits on a configuration with zero amplitude."""

    def __init__(self, message, time=None, configuration=None):
        super().__init__(message)
        self.time = time
        self.configuration = configuration


class ConfigParseError(LabError):
    """Config text failed validation; carries the itemized error list."""

    def __init__(self, errors):
        super().__init__("; ".join(errors))
        self.errors = list(errors)
