"""The extract / repair / verify pipeline shared by daemon, CLI, and bench.

Raw timing covers request decode to EditScript ready, nothing else; repair
and verification are measured separately so the extraction figure stays
comparable across modes.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .analysis import analyze_region
from .config import Config
from .equiv import (
    EquivalenceVerdict,
    VerdictKind,
    check_equivalence,
    emit_obligation_report,
    lower_pair,
)
from .equiv.lower import LowerError
from .errors import ToolchainMissing
from .extract import ExtractionOutcome, apply_edits, synthesize
from .repair import RepairOutcome, RepairSession, RepairStatus, compile_check, repair
from .source import SourceUnit, StdCatalog, find_marked_region, load_default_catalog, resolve_selection

MODES = ("Extract", "ExtractRepair", "ExtractRepairVerify")


@dataclass
class PipelineResult:
    outcome: ExtractionOutcome
    pre_text: str
    final_text: str
    host_name: str
    raw_ns: int
    repair_ns: int = 0
    verify_ns: int = 0
    repair_outcome: RepairOutcome | None = None
    verdict: EquivalenceVerdict | None = None
    report: str | None = None
    compile_clean: bool | None = None

    @property
    def total_ns(self) -> int:
        return self.raw_ns + self.repair_ns + self.verify_ns


def run_extraction(
    unit: SourceUnit,
    name: str,
    mode: str = "Extract",
    start: int | None = None,
    end: int | None = None,
    config: Config | None = None,
    catalog: StdCatalog | None = None,
    should_stop=None,
    verify_seed: int = 0,
) -> PipelineResult:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    config = config or Config()
    catalog = catalog or load_default_catalog()

    t0 = time.perf_counter_ns()
    if start is None or end is None:
        region = find_marked_region(unit)
    else:
        region = resolve_selection(unit, start, end)
    profile = analyze_region(unit, region, catalog)
    outcome = synthesize(profile, name, unit, region)
    raw_ns = time.perf_counter_ns() - t0

    result = PipelineResult(
        outcome=outcome,
        pre_text=unit.text,
        final_text=unit.text,
        host_name=region.host.name,
        raw_ns=raw_ns,
    )
    if outcome.failure is not None or outcome.script is None:
        return result

    edited = apply_edits(unit, outcome.script)
    result.final_text = edited.text

    if mode in ("ExtractRepair", "ExtractRepairVerify"):
        t1 = time.perf_counter_ns()
        session = RepairSession(
            edited, name, max_iterations=config.repair_max_iterations, config=config
        )
        result.repair_outcome = repair(session)
        result.repair_ns = time.perf_counter_ns() - t1
        if result.repair_outcome.compiling:
            result.final_text = result.repair_outcome.final_text
            result.compile_clean = True
        else:
            result.compile_clean = False

    if mode == "ExtractRepairVerify" and (result.compile_clean is not False):
        t2 = time.perf_counter_ns()
        result.verdict, result.report = run_verification(
            result.pre_text,
            result.final_text,
            result.host_name,
            config=config,
            should_stop=should_stop,
            seed=verify_seed,
            callee_name=name,
        )
        result.verify_ns = time.perf_counter_ns() - t2
    return result


def run_verification(
    original_text: str,
    refactored_text: str,
    caller_name: str,
    config: Config | None = None,
    should_stop=None,
    seed: int = 0,
    callee_name: str | None = None,
    compile_first: bool | None = None,
) -> tuple[EquivalenceVerdict, str]:
    config = config or Config()
    compile_first = config.verify_compile_check if compile_first is None else compile_first

    if compile_first:
        from .equiv.sandbox import VirtualCrates

        with VirtualCrates(original_text, refactored_text):
            try:
                for tag, text in (("original", original_text), ("refactored", refactored_text)):
                    if compile_check(text, config):
                        verdict = EquivalenceVerdict(
                            VerdictKind.UNSUPPORTED,
                            unsupported_reason=f"the {tag} program is rejected upstream by the compiler; "
                            "no obligation was stated",
                        )
                        return verdict, _report_for(original_text, refactored_text, caller_name, verdict, callee_name)
            except ToolchainMissing:
                pass  # verification is compiler-independent; proceed on the IR

    try:
        pair = lower_pair(original_text, refactored_text, caller_name, callee_name)
    except LowerError as exc:
        verdict = EquivalenceVerdict(
            VerdictKind.UNSUPPORTED, unsupported_reason=exc.reason, unsupported_span=exc.span
        )
        return verdict, _report_for(original_text, refactored_text, caller_name, verdict, callee_name)

    from .equiv.domain import build_domain

    try:
        domain = build_domain(pair.original, pair.original_module, config, seed=seed)
    except LowerError as exc:
        verdict = EquivalenceVerdict(VerdictKind.UNSUPPORTED, unsupported_reason=exc.reason)
        return verdict, emit_obligation_report(pair, verdict)

    verdict = check_equivalence(pair, domain, config=config, should_stop=should_stop)
    return verdict, emit_obligation_report(pair, verdict, domain)


def _report_for(original_text, refactored_text, caller_name, verdict, callee_name) -> str:
    # a pair may not exist when lowering failed; report without it
    from .equiv.report import _RULE

    lines = [
        _RULE,
        f"EQUIVALENCE OBLIGATION for `{caller_name}`",
        _RULE,
        "",
        "RESULT: UNSUPPORTED CONSTRUCT — no obligation was checked",
        f"    unsupported: {verdict.unsupported_reason}",
        "    (this is a coverage limit, not a behavioural finding)",
        "",
    ]
    return "\n".join(lines)
