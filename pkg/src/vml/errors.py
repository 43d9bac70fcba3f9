"""Exception hierarchy.  Everything raised on purpose derives from VMLError."""


class VMLError(Exception):
    """Base class; the CLI maps these to exit code 3."""


class ConfigError(VMLError):
    """A descriptor failed validation (CLI exit code 2)."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(message)
        self.pointer = pointer


class InvalidLawError(VMLError, ValueError):
    pass


class UnsupportedClosedFormError(VMLError):
    pass


class ResolutionError(VMLError, ValueError):
    pass


class IndexWindowError(VMLError, IndexError):
    pass


class NotPositiveDefiniteError(VMLError):
    pass


class UnsupportedMeasureError(VMLError):
    """Operation defined only for a narrower class of measures (e.g. Gaussian products)."""
