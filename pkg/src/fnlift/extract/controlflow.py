"""Reification of escaping jumps into std::ops::ControlFlow.

Escaping `break` / `continue` / `return` cannot cross a function boundary,
so the extracted body returns ControlFlow::Break(payload) at each jump and
ControlFlow::Continue(value) on its normal exit; the call site matches on
the result and re-issues the jump in the host function.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..analysis.profile import NlcfKind, NlcfProfile
from .specimen import FailureClass, FailureCode, FunctionSpecimen

CF = "std::ops::ControlFlow"


class ReifyError(Exception):
    def __init__(self, failure: FailureClass):
        super().__init__(str(failure))
        self.failure = failure


@dataclass
class BodyDraft:
    """Region text plus jump spans relative to it, before reification."""

    text: str
    jumps: list[tuple[str, int, int]]  # (kind, rel start, rel end)
    tail_span: tuple[int, int] | None  # relative span of the trailing expression
    normal_value: str  # expression for the normal exit: 'out', '(a, b)', '()'


@dataclass
class CallSitePattern:
    kind: str  # 'plain' | 'if_let' | 'match'
    payload_pat: str = "_"
    jump_stmt: str = ""  # 'break' / 'continue' / 'return v' ...


def reify_control_flow(
    specimen: FunctionSpecimen, nlcf: NlcfProfile, draft: BodyDraft | None = None
) -> CallSitePattern:
    """Rewrite the specimen for NLCF; identity when the region has none."""
    if nlcf.kind is NlcfKind.NONE:
        return CallSitePattern("plain")
    if nlcf.kind is NlcfKind.MIXED:
        kinds = sorted({k for k, _s, _e in nlcf.jumps})
        raise ReifyError(
            FailureClass(
                FailureCode.BOUNDARY_UNRESOLVABLE,
                "escaping jumps of mixed kinds (%s) cannot share one Break encoding" % ", ".join(kinds),
            )
        )
    if draft is None:
        raise ValueError("reification needs the body draft for a region with NLCF")

    if nlcf.kind is NlcfKind.BREAK:
        payload = nlcf.break_payload
        payload_text = payload.text if payload is not None else "()"
    elif nlcf.kind is NlcfKind.CONTINUE:
        payload_text = "()"
    else:  # RETURN
        payload = nlcf.return_payload
        if payload is None or payload.is_unknown:
            raise ReifyError(
                FailureClass(FailureCode.RETURN_INFERENCE_FAILED, "escaping return payload type unknown")
            )
        payload_text = payload.text

    continue_ty = specimen.return_type or "()"
    specimen.return_type = f"{CF}<{payload_text}, {continue_ty}>"

    text = draft.text
    jumps = [[k, s, e] for k, s, e in draft.jumps]

    # wrap the normal exit first so jump spans can be adjusted in one place
    if draft.tail_span is not None:
        ts, te = draft.tail_span
        head = f"{CF}::Continue("
        text = text[:ts] + head + text[ts:te] + ")" + text[te:]
        for j in jumps:
            if j[1] >= te:
                j[1] += len(head) + 1
                j[2] += len(head) + 1
            elif j[1] >= ts:
                j[1] += len(head)
                j[2] += len(head)
    else:
        text = text.rstrip("\n") + f"\n{CF}::Continue({draft.normal_value})"

    # rewrite jumps right-to-left so earlier spans stay valid
    labels: set[str] = set()
    for kind, rel_s, rel_e in sorted(jumps, key=lambda j: -j[1]):
        original = text[rel_s:rel_e]
        if kind == "break":
            value = original[len("break") :].strip()
            if value.startswith("'"):
                parts = value.split(None, 1)
                labels.add(parts[0])
                value = parts[1] if len(parts) > 1 else ""
            value = value or "()"
            repl = f"return {CF}::Break({value})"
        elif kind == "continue":
            rest = original[len("continue") :].strip()
            if rest.startswith("'"):
                labels.add(rest.split()[0])
            repl = f"return {CF}::Break(())"
        else:  # return
            value = original[len("return") :].strip() or "()"
            repl = f"return {CF}::Break({value})"
        text = text[:rel_s] + repl + text[rel_e:]
    if len(labels) > 1:
        raise ReifyError(
            FailureClass(
                FailureCode.BOUNDARY_UNRESOLVABLE,
                "escaping jumps target multiple labeled loops: " + ", ".join(sorted(labels)),
            )
        )
    label = labels.pop() if labels else None
    draft.text = text

    suffix = (" " + label) if label else ""
    if nlcf.kind is NlcfKind.BREAK:
        uses_payload = payload_text != "()"
        return CallSitePattern(
            "match",
            payload_pat="v" if uses_payload else "_",
            jump_stmt=("break" + suffix + " v") if uses_payload else ("break" + suffix),
        )
    if nlcf.kind is NlcfKind.CONTINUE:
        return CallSitePattern("match", payload_pat="_", jump_stmt="continue" + suffix)
    return CallSitePattern("match", payload_pat="v", jump_stmt="return v")
