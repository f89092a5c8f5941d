"""Exception types shared across the pipeline stages."""


class FnliftError(Exception):
    """Base class for all tool errors."""


class IoError(FnliftError):
    pass


class SelectionInvalid(FnliftError):
    """Selection spans item boundaries or covers no executable code."""


class MarkerMissing(FnliftError):
    """Zero or duplicated selection markers in a marker-annotated file."""


class VersionMismatch(FnliftError):
    """Edit script built against a different version of the source unit."""


class OverlapError(FnliftError):
    """Edit script contains overlapping or unsorted edits."""


class ToolchainMissing(FnliftError):
    """The object-language compiler is not available on this machine."""


class ToolchainCrashed(FnliftError):
    """The compiler failed in a way that produced no diagnostics."""


class TypeMismatch(FnliftError):
    """Interpreter invoked with values that do not match the IR signature."""
