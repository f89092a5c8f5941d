"""Compiler-as-oracle lifetime repair.

Loop: check; if only lifetime-class diagnostics remain, edit the target
signature (compiler suggestions first, then a fresh named lifetime bound to
the reference types the diagnostics point at) and check again. Any
diagnostic outside the lifetime class aborts with the original text intact
so the caller can revert.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field

from ..config import Config
from ..source.syntax import SyntaxTree
from ..source.unit import SourceUnit
from .elision import elide
from .toolchain import Diag, compile_check


class RepairStatus(enum.Enum):
    NOT_NEEDED = "NotNeeded"
    REPAIRED = "Repaired"
    EXHAUSTED = "Exhausted"
    NON_LIFETIME_ERROR = "NonLifetimeError"


@dataclass
class RepairSession:
    unit: SourceUnit  # post-extraction
    target: str  # name of the synthesized function
    max_iterations: int = 8
    iterations: int = 0
    log: list[tuple[str, str]] = field(default_factory=list)  # (diag summary, edit applied)
    config: Config = field(default_factory=Config)


@dataclass
class RepairOutcome:
    status: RepairStatus
    final_text: str
    elision_applied: bool = False

    @property
    def compiling(self) -> bool:
        return self.status in (RepairStatus.NOT_NEEDED, RepairStatus.REPAIRED)


def _is_lifetime_diag(diag: Diag, config: Config) -> bool:
    if diag.code and diag.code in config.lifetime_codes:
        return True
    msg = diag.message.lower()
    return any(pat in msg for pat in config.lifetime_patterns)


def _target_span(text: str, target: str) -> tuple[int, int, int] | None:
    """(item_start, sig_end, item_end) of the target function in text."""
    tree = SyntaxTree(text.encode())
    fn = tree.fn_named(target)
    if fn is None:
        return None
    return fn.start, fn.sig_end, fn.end


_LIFETIME_EDIT_TEXT = re.compile(r"^[A-Za-z0-9_'<>,&\s:+]*$")


def repair(session: RepairSession) -> RepairOutcome:
    config = session.config
    original_text = session.unit.text
    text = original_text
    edited = False

    for iteration in range(session.max_iterations + 1):
        errors = compile_check(text, config)
        if not errors:
            if not edited:
                return RepairOutcome(RepairStatus.NOT_NEEDED, text, False)
            final = text
            applied = False
            if config.repair_elide:
                elided = elide(text, session.target, config)
                applied = elided != text
                final = elided
            return RepairOutcome(RepairStatus.REPAIRED, final, applied)
        if any(not _is_lifetime_diag(d, config) for d in errors):
            return RepairOutcome(RepairStatus.NON_LIFETIME_ERROR, original_text, False)
        if iteration == session.max_iterations:
            break
        edits = _plan_edits(text, errors, session.target)
        if not edits:
            break
        summary = "; ".join(f"{d.code or '?'}: {d.message.splitlines()[0][:80]}" for d in errors[:2])
        text = _apply(text, edits)
        session.iterations = iteration + 1
        session.log.append((summary, _describe(edits)))
        edited = True

    return RepairOutcome(RepairStatus.EXHAUSTED, original_text, False)


def _describe(edits: list[tuple[int, int, str]]) -> str:
    return "; ".join(f"[{s},{e})->{r!r}" for s, e, r in edits[:4])


def _apply(text: str, edits: list[tuple[int, int, str]]) -> str:
    data = text.encode("utf-8")
    for s, e, repl in sorted(edits, key=lambda t: -t[0]):
        data = data[:s] + repl.encode("utf-8") + data[e:]
    return data.decode("utf-8")


def _plan_edits(text: str, errors: list[Diag], target: str) -> list[tuple[int, int, str]]:
    span = _target_span(text, target)
    if span is None:
        return []
    item_start, sig_end, item_end = span

    def in_signature(s: int, e: int) -> bool:
        return item_start <= s and e <= sig_end

    def in_item(s: int, e: int) -> bool:
        return item_start <= s and e <= item_end

    # compiler suggestions first, machine-applicable ones before the rest;
    # a suggestion is taken only when every part stays inside the target item
    # and the replacement is lifetime-shaped text
    candidates = []
    for diag in errors:
        for sug in diag.suggestions:
            if not all(in_item(s, e) for s, e, _r in sug.parts):
                continue
            if not all(_LIFETIME_EDIT_TEXT.match(r) for _s, _e, r in sug.parts):
                continue
            sig_only = all(in_signature(s, e) for s, e, _r in sug.parts)
            rank = (
                0 if sug.applicability == "MachineApplicable" else 1,
                0 if sig_only else 1,
            )
            candidates.append((rank, sug))
    if candidates:
        candidates.sort(key=lambda t: t[0])
        best = candidates[0][1]
        return [(s, e, r) for s, e, r in best.parts]

    # heuristic: introduce one fresh lifetime on the target generics and bind
    # the reference types the diagnostics point at (all bare ones as fallback)
    sig_text = text[item_start:sig_end]
    fresh = _fresh_lifetime(sig_text)
    edits: list[tuple[int, int, str]] = []

    tree = SyntaxTree(text.encode())
    fn = tree.fn_named(target)
    if fn is None:
        return []
    if fn.generics_span is not None:
        g0, _g1 = fn.generics_span
        edits.append((g0 + 1, g0 + 1, f"{fresh}, "))
    else:
        name_end = fn.name_span[1]
        edits.append((name_end, name_end, f"<{fresh}>"))

    ref_positions: list[int] = []
    diag_spans = [(s, e) for d in errors for (s, e, _p) in d.spans if in_signature(s, e)]
    for m in re.finditer(r"&(?!['&])", sig_text):
        pos = item_start + m.start()
        if diag_spans and not any(s - 2 <= pos <= e + 2 for s, e in diag_spans):
            continue
        ref_positions.append(pos)
    if not ref_positions:
        for m in re.finditer(r"&(?!['&])", sig_text):
            ref_positions.append(item_start + m.start())
    for pos in ref_positions:
        edits.append((pos + 1, pos + 1, fresh + " "))
    if len(edits) <= 1:
        return []
    return sorted(edits)


def _fresh_lifetime(sig_text: str) -> str:
    for ch in "abcdefgh":
        name = f"'{ch}"
        if name not in sig_text:
            return name
    return "'z"
