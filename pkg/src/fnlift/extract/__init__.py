from .specimen import EditScript, ExtractionOutcome, FailureClass, FunctionSpecimen
from .edits import apply_edits
from .synthesize import synthesize
from .controlflow import reify_control_flow

__all__ = [
    "EditScript",
    "ExtractionOutcome",
    "FailureClass",
    "FunctionSpecimen",
    "apply_edits",
    "synthesize",
    "reify_control_flow",
]
