"""Analysis result types: captures, outflow, control-flow profile, flags."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from ..source.types import TypeDesc


class Mode(enum.Enum):
    BY_VALUE = "ByValue"
    SHARED_REF = "SharedRef"
    MUT_REF = "MutRef"


class NlcfKind(enum.Enum):
    NONE = "None"
    BREAK = "Break"
    CONTINUE = "Continue"
    RETURN = "Return"
    MIXED = "Mixed"


@dataclass
class CaptureInfo:
    name: str
    declared_type: TypeDesc
    mode: Mode
    live_after: bool
    mutated_inside: bool
    read_inside: bool
    is_self: bool = False
    first_use: int = 0  # byte offset of first use in the region (param order key)
    # occurrence starts that need a `*` when the capture crosses by reference
    deref_occs: list[int] = field(default_factory=list)

    def check_invariants(self) -> None:
        if self.mode is Mode.MUT_REF:
            assert self.mutated_inside and self.live_after
        elif self.mode is Mode.SHARED_REF:
            assert self.read_inside and not self.mutated_inside and self.live_after
        else:
            assert not self.live_after


@dataclass
class OutflowInfo:
    outputs: list[tuple[str, TypeDesc, bool]]  # (name, type, declared mut)
    tail_value: TypeDesc | None = None


@dataclass
class NlcfProfile:
    kind: NlcfKind
    loop_context: bool
    break_payload: TypeDesc | None = None
    return_payload: TypeDesc | None = None
    jumps: list[tuple[str, int, int]] = field(default_factory=list)  # (kind, start, end)
    has_try: bool = False  # `?` operators escaping the region


@dataclass
class RegionProfile:
    captures: list[CaptureInfo]
    outflow: OutflowInfo
    nlcf: NlcfProfile
    flags: set[str]  # over {GEN, ASYNC, CONST, NLCF, HRTB, DYN}
    generics_in_scope: list[tuple[str, list[str]]]  # fn-level type params with bounds
    lifetimes_in_scope: list[str]
    where_preds: list[str] = field(default_factory=list)
