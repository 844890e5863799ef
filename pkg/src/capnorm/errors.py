"""Exception hierarchy. Everything raised on bad input derives from ValueError."""


class CapnormError(ValueError):
    """Base class for data and validation errors."""


class ModuleError(CapnormError):
    """Invalid module data (bad sigma, dimension mismatch, missing action)."""


class IngestError(CapnormError):
    """Malformed transcript or canonical file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class CanonicalizationWarning(UserWarning):
    """Input was accepted after reordering generators."""
