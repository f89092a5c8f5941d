"""Function synthesis: profile in, new function + call-site edit script out.

The contract is "never silently break code": when a parameter or return type
cannot be named, the synthesizer refuses with a FailureClass instead of
writing a `_` placeholder that would not compile.
"""

from __future__ import annotations

import re

from ..analysis.analyze import applicable_generics
from ..analysis.profile import Mode, NlcfKind, RegionProfile
from ..source.types import TypeDesc
from ..source.unit import SelectionRegion, SourceUnit
from .controlflow import CF, BodyDraft, CallSitePattern, ReifyError, reify_control_flow
from .specimen import (
    EditScript,
    ExtractionOutcome,
    FailureClass,
    FailureCode,
    FunctionSpecimen,
    SpecimenParam,
)

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _quality(t: TypeDesc) -> str:
    if t.is_unknown:
        return "unknown"
    if t.kind == "infer" or re.search(r"\b_\b", t.text):
        return "partial"
    return "known"


def synthesize(profile: RegionProfile, name: str, unit: SourceUnit, region: SelectionRegion) -> ExtractionOutcome:
    host = region.host
    if not _IDENT.match(name):
        raise ValueError(f"{name!r} is not a valid function name")
    if name in unit.syntax.module_names or unit.syntax.fn_named(name) is not None:
        raise ValueError(f"{name!r} is already bound at module scope")

    flags = set(profile.flags)

    failure = _check_signature(profile)
    if failure is not None:
        return ExtractionOutcome(None, None, flags, failure)

    region_text = unit.text[region.start : region.end]
    region_idents = set(re.findall(r"[A-Za-z_][A-Za-z0-9_]*", region_text))

    # parameters in capture discovery order; self becomes the receiver
    receiver = None
    params: list[SpecimenParam] = []
    args: list[str] = []
    for cap in profile.captures:
        if cap.is_self:
            # the helper's receiver can never demand more than the host's own
            host_recv = (host.receiver or "self").replace(" ", "")
            if host_recv.startswith("&"):
                receiver = "&mut self" if cap.mutated_inside else "&self"
                if "mut" not in host_recv:
                    receiver = "&self"
            else:
                receiver = {Mode.BY_VALUE: "self", Mode.SHARED_REF: "&self", Mode.MUT_REF: "&mut self"}[cap.mode]
            continue
        ty = cap.declared_type
        if ty.is_ref:
            params.append(SpecimenParam(cap.name, cap.mode, ty.text))
            args.append(cap.name)
        elif cap.mode is Mode.BY_VALUE:
            params.append(SpecimenParam(cap.name, cap.mode, ty.text, mut_binding=cap.mutated_inside))
            args.append(cap.name)
        elif cap.mode is Mode.SHARED_REF:
            params.append(SpecimenParam(cap.name, cap.mode, "&" + ty.text))
            args.append("&" + cap.name)
        else:
            params.append(SpecimenParam(cap.name, cap.mode, "&mut " + ty.text))
            args.append("&mut " + cap.name)

    generics = applicable_generics(profile, region_idents)
    gen_failure = _check_bounds(profile, generics, unit, region)
    if gen_failure is not None:
        return ExtractionOutcome(None, None, flags, gen_failure)
    applicable_names = {g for g, _b in generics}
    where_preds = [
        p
        for p in profile.where_preds
        if _pred_subject(p) in applicable_names
    ]
    # inline bounds that already live in where-clauses stay there; bounds list
    # from the generic declarations is carried inline
    generics_inline = [(g, [b for b in bounds]) for g, bounds in generics]

    outputs = profile.outflow.outputs
    tail_ty = profile.outflow.tail_value

    if tail_ty is not None:
        normal_ty = tail_ty.text
        normal_value = ""  # the tail expression itself is the value
    elif len(outputs) == 1:
        normal_ty = outputs[0][1].text
        normal_value = outputs[0][0]
    elif outputs:
        normal_ty = "(" + ", ".join(t.text for _n, t, _m in outputs) + ")"
        normal_value = "(" + ", ".join(n for n, _t, _m in outputs) + ")"
    else:
        normal_ty = "()"
        normal_value = "()"

    is_async = "ASYNC" in flags
    is_const = "CONST" in flags

    # `?` propagation: the helper returns the host's Result/Option family
    try_wrap: tuple[str, str] | None = None
    if profile.nlcf.has_try:
        if profile.nlcf.kind is not NlcfKind.NONE:
            return ExtractionOutcome(
                None,
                None,
                flags,
                FailureClass(
                    FailureCode.BOUNDARY_UNRESOLVABLE,
                    "`?` operators and escaping jumps in the same region cannot share one boundary",
                ),
            )
        host_ret = host.ret_ty
        if host_ret is None or host_ret.name not in ("Result", "Option"):
            return ExtractionOutcome(
                None,
                None,
                flags,
                FailureClass(
                    FailureCode.BOUNDARY_UNRESOLVABLE,
                    "`?` escapes a region inside a function that does not return Result or Option",
                ),
            )
        if host_ret.name == "Result":
            err_ty = host_ret.inner[1].text if len(host_ret.inner) > 1 else None
            if err_ty is None:
                return ExtractionOutcome(
                    None, None, flags, FailureClass(FailureCode.RETURN_INFERENCE_FAILED, "could not name the host error type for `?`")
                )
            try_wrap = (f"Result<{normal_ty}, {err_ty}>", f"Ok({normal_value or '<tail>'})")
        else:
            try_wrap = (f"Option<{normal_ty}>", f"Some({normal_value or '<tail>'})")

    specimen = FunctionSpecimen(
        name=name,
        asyncness=is_async,
        constness=is_const,
        generics=generics_inline,
        lifetimes=[],
        params=params,
        return_type=(try_wrap[0] if try_wrap else ("" if normal_ty == "()" else normal_ty)),
        body_lines=[],
        receiver=receiver,
        where_preds=where_preds,
    )

    # body draft with jump spans made region-relative
    rel_jumps = [[k, s - region.start, e - region.start] for k, s, e in profile.nlcf.jumps]
    tail_span = None
    if tail_ty is not None and region.stmts:
        tail_stmt = region.stmts[-1]
        tail_span = [tail_stmt.start - region.start, tail_stmt.end - region.start]

    # reference-mode captures read/write through the new parameter: insert `*`
    body_text = region_text
    deref_positions = sorted(
        {p - region.start for cap in profile.captures for p in cap.deref_occs}, reverse=True
    )
    for pos in deref_positions:
        body_text = body_text[:pos] + "*" + body_text[pos:]
        for j in rel_jumps:
            if pos <= j[1]:
                j[1] += 1
                j[2] += 1
            elif pos < j[2]:
                j[2] += 1
        if tail_span is not None:
            if pos <= tail_span[0]:
                tail_span[0] += 1
                tail_span[1] += 1
            elif pos < tail_span[1]:
                tail_span[1] += 1

    draft = BodyDraft(
        body_text,
        [(k, s, e) for k, s, e in rel_jumps],
        tuple(tail_span) if tail_span is not None else None,
        normal_value,
    )

    try:
        pattern = reify_control_flow(specimen, profile.nlcf, draft if profile.nlcf.kind is not NlcfKind.NONE else None)
    except ReifyError as exc:
        return ExtractionOutcome(None, None, flags, exc.failure)

    if profile.nlcf.kind is NlcfKind.NONE and try_wrap is not None:
        # wrap the normal exit in Ok(...) / Some(...)
        if tail_span is not None:
            ts, te = tail_span
            ok_head = try_wrap[1].split("(", 1)[0]
            draft.text = draft.text[:ts] + f"{ok_head}(" + draft.text[ts:te] + ")" + draft.text[te:]
        else:
            draft.text = draft.text.rstrip("\n") + "\n" + try_wrap[1].replace("<tail>", normal_value or "()")
    elif profile.nlcf.kind is NlcfKind.NONE and tail_span is None and normal_value not in ("()", ""):
        draft.text = draft.text.rstrip("\n") + "\n" + normal_value

    host_indent, indent_unit = _indentation(unit, host)
    region_indent = _line_indent(unit.text, region.start)
    specimen.body_lines = _reindent(draft.text, region_indent)

    call_core = (f"self.{name}" if receiver is not None else name) + "(" + ", ".join(args) + ")"
    if is_async:
        call_core += ".await"
    if try_wrap is not None:
        call_core += "?"
    call_text = _render_call(call_core, pattern, outputs, tail_ty is not None, region_indent, region.is_tail)

    fn_indent = host_indent
    new_fn_text = specimen.render(indent_unit, fn_indent)
    insert_at = host.end
    insertion = "\n\n" + new_fn_text

    script = EditScript(
        edits=[(region.start, region.end, call_text), (insert_at, insert_at, insertion)],
        base_version=unit.version,
    )
    return ExtractionOutcome(specimen, script, flags, None, call_text, new_fn_text)


def _pred_subject(pred: str) -> str:
    subject = pred.split(":", 1)[0].strip()
    return re.sub(r"^for<[^>]*>\s*", "", subject)


def _check_signature(profile: RegionProfile) -> FailureClass | None:
    for cap in profile.captures:
        q = _quality(cap.declared_type)
        if q == "unknown":
            return FailureClass(
                FailureCode.SIG_INFERENCE_PARTIAL,
                f"type of captured `{cap.name}` could not be inferred",
            )
        if q == "partial":
            return FailureClass(
                FailureCode.SIG_INFERENCE_PARTIAL,
                f"type of captured `{cap.name}` is only partially inferred ({cap.declared_type.text})",
            )
        declared = cap.declared_type
        if cap.mode is Mode.BY_VALUE and declared.kind in ("dyn", "impl"):
            return FailureClass(
                FailureCode.TRAIT_OBJECT_MISMAPPED,
                f"`{cap.name}: {declared.text}` is moved by value; naming its concrete type would "
                f"require generalizing the trait application, which changes dispatch",
            )
    for out_name, out_ty, _m in profile.outflow.outputs:
        q = _quality(out_ty)
        if q == "unknown":
            return FailureClass(
                FailureCode.RETURN_INFERENCE_FAILED,
                f"type of returned `{out_name}` could not be inferred",
            )
        if q == "partial":
            return FailureClass(
                FailureCode.RETURN_PLACEHOLDER,
                f"return type for `{out_name}` would need a placeholder ({out_ty.text})",
            )
    if profile.outflow.tail_value is not None:
        q = _quality(profile.outflow.tail_value)
        if q == "unknown":
            return FailureClass(FailureCode.RETURN_INFERENCE_FAILED, "tail expression type could not be inferred")
        if q == "partial":
            return FailureClass(
                FailureCode.RETURN_PLACEHOLDER,
                f"tail type would need a placeholder ({profile.outflow.tail_value.text})",
            )
    if profile.nlcf.kind is NlcfKind.BREAK and profile.nlcf.break_payload is not None:
        if _quality(profile.nlcf.break_payload) != "known":
            return FailureClass(FailureCode.RETURN_INFERENCE_FAILED, "break payload type could not be inferred")
    return None


def _check_bounds(
    profile: RegionProfile,
    generics: list[tuple[str, list[str]]],
    unit: SourceUnit,
    region: SelectionRegion,
) -> FailureClass | None:
    host = region.host
    for gname, bounds in generics:
        for b in bounds:
            if re.search(r"\bSelf\b", b) and host.impl_index is None:
                return FailureClass(
                    FailureCode.BOUNDS_DROPPED,
                    f"bound `{b}` on `{gname}` names Self outside an impl and cannot be copied",
                )
    if host.generics_span is not None and not host.generics:
        raw = unit.text[host.generics_span[0] : host.generics_span[1]]
        if raw.strip("<> \t\n"):
            return FailureClass(
                FailureCode.BOUNDS_NOT_IDENTIFIED,
                "generic parameter list could not be parsed; bounds cannot be reconstructed",
            )
    return None


def _indentation(unit: SourceUnit, host) -> tuple[str, str]:
    host_indent = _line_indent(unit.text, host.start)
    indent_unit = "    "
    if host.body_span is not None:
        body_text = unit.text[host.body_span[0] : host.body_span[1]]
        m = re.search(r"\n([ \t]+)\S", body_text)
        if m:
            inner = m.group(1)
            if inner.startswith(host_indent) and len(inner) > len(host_indent):
                indent_unit = inner[len(host_indent) :]
    return host_indent, indent_unit


def _line_indent(text: str, offset: int) -> str:
    line_start = text.rfind("\n", 0, offset) + 1
    indent = ""
    for ch in text[line_start:offset]:
        if ch in " \t":
            indent += ch
        else:
            break
    return indent


def _reindent(body: str, old_indent: str) -> list[str]:
    lines = body.split("\n")
    out = []
    for line in lines:
        if line.startswith(old_indent):
            out.append(line[len(old_indent) :])
        else:
            out.append(line.strip() if not line.strip() else line.lstrip() if not line.startswith(" ") else line)
    # drop leading/trailing blank lines
    while out and not out[0].strip():
        out.pop(0)
    while out and not out[-1].strip():
        out.pop()
    return out


def _render_call(
    call_core: str,
    pattern: CallSitePattern,
    outputs: list,
    has_tail: bool,
    indent: str,
    region_is_tail: bool,
) -> str:
    if pattern.kind == "plain":
        if has_tail and region_is_tail:
            return call_core
        if len(outputs) == 1:
            name, _t, mut_after = outputs[0]
            return f"let {'mut ' if mut_after else ''}{name} = {call_core};"
        if outputs:
            pat = ", ".join(("mut " if m else "") + n for n, _t, m in outputs)
            return f"let ({pat}) = {call_core};"
        return call_core + ";"

    # ControlFlow match at the call site
    arm_jump = pattern.jump_stmt
    pat = pattern.payload_pat
    if outputs:
        bind = (
            outputs[0][0]
            if len(outputs) == 1
            else "(" + ", ".join(n for n, _t, _m in outputs) + ")"
        )
        mut_bind = (
            ("mut " if outputs[0][2] else "") + outputs[0][0]
            if len(outputs) == 1
            else "(" + ", ".join(("mut " if m else "") + n for n, _t, m in outputs) + ")"
        )
        lines = [
            f"let {mut_bind} = match {call_core} {{",
            f"{indent}    {CF}::Break({pat}) => {arm_jump},",
            f"{indent}    {CF}::Continue(v) => v,",
            f"{indent}}};",
        ]
        return "\n".join(lines)
    if has_tail and region_is_tail:
        lines = [
            f"match {call_core} {{",
            f"{indent}    {CF}::Break({pat}) => {arm_jump},",
            f"{indent}    {CF}::Continue(v) => v,",
            f"{indent}}}",
        ]
        return "\n".join(lines)
    lines = [
        f"if let {CF}::Break({pat}) = {call_core} {{",
        f"{indent}    {arm_jump};",
        f"{indent}}}",
    ]
    return "\n".join(lines)
