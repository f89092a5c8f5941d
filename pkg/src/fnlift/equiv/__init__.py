from .ir import FuncIR, IrModule
from .lower import LowerError, lower_function, lower_module
from .interp import Outcome, PanicSignal, interpret
from .domain import InputDomain, build_domain
from .checker import EquivalenceVerdict, FunctionPair, VerdictKind, check_equivalence, lower_pair
from .report import emit_obligation_report
from .sandbox import VirtualCrates, build_virtual_crates

__all__ = [
    "FuncIR",
    "IrModule",
    "LowerError",
    "lower_function",
    "lower_module",
    "Outcome",
    "PanicSignal",
    "interpret",
    "InputDomain",
    "build_domain",
    "EquivalenceVerdict",
    "FunctionPair",
    "VerdictKind",
    "check_equivalence",
    "lower_pair",
    "emit_obligation_report",
    "VirtualCrates",
    "build_virtual_crates",
]
