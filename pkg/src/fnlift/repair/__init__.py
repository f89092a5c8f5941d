from .toolchain import Diag, Suggestion, compile_check, probe_toolchain, scratch_crate
from .repairer import RepairSession, RepairOutcome, RepairStatus, repair
from .elision import elide

__all__ = [
    "Diag",
    "Suggestion",
    "compile_check",
    "probe_toolchain",
    "scratch_crate",
    "RepairSession",
    "RepairOutcome",
    "RepairStatus",
    "repair",
    "elide",
]
