"""Plain-text obligation reports.

The report states the quantified obligation, the domain it ranges over, and
the result. The two failure flavours look deliberately different: a refuted
obligation shows a replayable counterexample; an unsupported construct is a
coverage statement and never borrows equivalence wording.
"""

from __future__ import annotations

from .checker import EquivalenceVerdict, FunctionPair, VerdictKind
from .domain import InputDomain
from .interp import format_value

_RULE = "=" * 64


def emit_obligation_report(
    pair: FunctionPair, verdict: EquivalenceVerdict, domain: InputDomain | None = None
) -> str:
    f = pair.original.name
    lines: list[str] = []
    lines.append(_RULE)
    lines.append(f"EQUIVALENCE OBLIGATION for `{f}`")
    lines.append(_RULE)
    lines.append("")
    lines.append(f"    ∀ x ∈ Dom({f}).  ⟦{f}⟧(x) = ⟦{f}'⟧(x)")
    lines.append("")
    if pair.callee is not None:
        lines.append(f"where `{f}'` calls the extracted function `{pair.callee.name}`.")
    if domain is not None:
        lines.append(f"Dom({f}): {domain.describe()}")
        lines.append(f"domain size: {domain.total_size}")
    elif verdict.domain_size:
        lines.append(f"domain size: {verdict.domain_size}")
    lines.append("")

    kind = verdict.kind
    if kind is VerdictKind.UNSUPPORTED:
        lines.append("RESULT: UNSUPPORTED CONSTRUCT — no obligation was checked")
        lines.append(f"    unsupported: {verdict.unsupported_reason}")
        if verdict.unsupported_span:
            lines.append(f"    at bytes [{verdict.unsupported_span[0]}, {verdict.unsupported_span[1]})")
        lines.append("    (this is a coverage limit, not a behavioural finding)")
    elif kind is VerdictKind.NOT_EQUIVALENT:
        lines.append("RESULT: NOT EQUIVALENT — the obligation is refuted")
        args = ", ".join(format_value(v) for v in (verdict.counterexample or ()))
        lines.append(f"    counterexample: x = ({args})")
        lines.append(f"    original:   {verdict.original_outcome.brief()}")
        lines.append(f"    refactored: {verdict.refactored_outcome.brief()}")
        lines.append("    (re-interpreting both members on x reproduces the divergence)")
    elif kind is VerdictKind.TIMEOUT:
        lines.append("RESULT: TIMEOUT — no verdict")
        lines.append(f"    {verdict.evidence}")
    elif kind is VerdictKind.EQUIVALENT:
        lines.append("RESULT: EQUIVALENT")
        lines.append("    equivalence established by structural identity of normal forms")
    elif kind is VerdictKind.EQUIVALENT_WITHIN_DOMAIN:
        lines.append("RESULT: EQUIVALENT WITHIN DOMAIN")
        lines.append(f"    {verdict.evidence}")
    else:
        lines.append("RESULT: LIKELY EQUIVALENT (sampled)")
        lines.append(f"    {verdict.evidence}")
    lines.append("")
    lines.append(f"inputs checked: {verdict.checked_inputs}")
    lines.append(_RULE)
    return "\n".join(lines) + "\n"
