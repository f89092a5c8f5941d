"""Synthesized function model, edit scripts, and the failure taxonomy."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from ..analysis.profile import Mode
from ..source.types import TypeDesc


class FailureCode(enum.Enum):
    # the seven observed ways signature synthesis goes wrong
    SIG_INFERENCE_PARTIAL = "SigInferencePartial"
    RETURN_INFERENCE_FAILED = "ReturnInferenceFailed"
    BOUNDARY_UNRESOLVABLE = "BoundaryUnresolvable"
    TRAIT_OBJECT_MISMAPPED = "TraitObjectMismapped"
    RETURN_PLACEHOLDER = "ReturnPlaceholder"
    BOUNDS_DROPPED = "BoundsDropped"
    BOUNDS_NOT_IDENTIFIED = "BoundsNotIdentified"


@dataclass(frozen=True)
class FailureClass:
    code: FailureCode
    detail: str

    def __str__(self) -> str:
        return f"{self.code.value}: {self.detail}"


@dataclass
class SpecimenParam:
    name: str
    mode: Mode
    ty_text: str  # rendered parameter type, mode already applied
    mut_binding: bool = False  # `mut name: T` for by-value params mutated inside


@dataclass
class FunctionSpecimen:
    name: str
    asyncness: bool
    constness: bool
    generics: list[tuple[str, list[str]]]  # (param, bounds) incl. HRTB verbatim
    lifetimes: list[str]  # empty until the repairer fills them
    params: list[SpecimenParam]
    return_type: str  # rendered; '' for unit
    body_lines: list[str]  # statements, unindented
    receiver: str | None = None  # '&self' / '&mut self' / 'self' for impl methods
    where_preds: list[str] = field(default_factory=list)

    def signature(self) -> str:
        quals = []
        if self.constness:
            quals.append("const")
        if self.asyncness:
            quals.append("async")
        head = (" ".join(quals) + " " if quals else "") + "fn " + self.name
        gen_parts = list(self.lifetimes)
        for name, bounds in self.generics:
            gen_parts.append(name + (": " + " + ".join(bounds) if bounds else ""))
        if gen_parts:
            head += "<" + ", ".join(gen_parts) + ">"
        params = []
        if self.receiver is not None:
            params.append(self.receiver)
        for p in self.params:
            prefix = "mut " if p.mut_binding else ""
            params.append(f"{prefix}{p.name}: {p.ty_text}")
        head += "(" + ", ".join(params) + ")"
        if self.return_type and self.return_type != "()":
            head += " -> " + self.return_type
        if self.where_preds:
            head += "\nwhere\n" + "".join(f"    {p},\n" for p in self.where_preds).rstrip("\n")
        return head

    def render(self, indent_unit: str = "    ", base_indent: str = "") -> str:
        sig = self.signature()
        sig = "\n".join(base_indent + line for line in sig.splitlines())
        body = "".join(
            base_indent + indent_unit + line + "\n" if line.strip() else "\n" for line in self.body_lines
        )
        opener = f"\n{base_indent}{{\n" if self.where_preds else " {\n"
        return f"{sig}{opener}{body}{base_indent}}}"


@dataclass
class EditScript:
    edits: list[tuple[int, int, str]]  # (start byte, end byte, replacement)
    base_version: int

    def __post_init__(self) -> None:
        prev_end = -1
        for start, end, _r in self.edits:
            if start < prev_end:
                from ..errors import OverlapError

                raise OverlapError("edits overlap or are unsorted")
            if end < start:
                from ..errors import OverlapError

                raise OverlapError("edit has negative extent")
            prev_end = end


@dataclass
class ExtractionOutcome:
    specimen: FunctionSpecimen | None
    script: EditScript | None
    flags: set[str]
    failure: FailureClass | None = None
    call_text: str = ""
    new_fn_text: str = ""

    @property
    def ok(self) -> bool:
        return self.failure is None
