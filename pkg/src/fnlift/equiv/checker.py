"""Equivalence decision: structural identity, then bounded enumeration.

The verdict vocabulary is honest about strength: Equivalent comes only from
alpha-identical normal forms; exhaustive agreement over the finite domain is
EquivalentWithinDomain; sampling gives LikelyEquivalent; a fuel-starved run
is Timeout (termination evidence is missing, which is not a behavioural
difference); unsupported constructs never co-exist with any equivalence
claim.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

from ..config import Config
from ..errors import TypeMismatch
from .domain import InputDomain, build_domain
from .interp import Outcome, interpret
from .ir import FuncIR, IrModule
from .lower import LowerError, lower_module
from .normalize import alpha_key, inline_callee, simplify


class VerdictKind(enum.Enum):
    EQUIVALENT = "Equivalent"
    EQUIVALENT_WITHIN_DOMAIN = "EquivalentWithinDomain"
    LIKELY_EQUIVALENT = "LikelyEquivalent"
    NOT_EQUIVALENT = "NotEquivalent"
    UNSUPPORTED = "Unsupported"
    TIMEOUT = "Timeout"

    @property
    def is_equivalence_claim(self) -> bool:
        return self in (
            VerdictKind.EQUIVALENT,
            VerdictKind.EQUIVALENT_WITHIN_DOMAIN,
            VerdictKind.LIKELY_EQUIVALENT,
        )


@dataclass
class EquivalenceVerdict:
    kind: VerdictKind
    evidence: str = ""
    counterexample: tuple | None = None
    original_outcome: Outcome | None = None
    refactored_outcome: Outcome | None = None
    checked_inputs: int = 0
    domain_size: int = 0
    sampled: bool = False
    unsupported_reason: str = ""
    unsupported_span: tuple[int, int] | None = None
    elapsed_s: float = 0.0

    def to_record(self) -> dict:
        from .interp import format_value

        rec: dict = {
            "kind": self.kind.value,
            "checkedInputs": self.checked_inputs,
            "domainSize": self.domain_size,
            "elapsedSeconds": round(self.elapsed_s, 6),
        }
        if self.counterexample is not None:
            rec["counterexample"] = [format_value(v) for v in self.counterexample]
            rec["originalOutcome"] = self.original_outcome.brief() if self.original_outcome else None
            rec["refactoredOutcome"] = self.refactored_outcome.brief() if self.refactored_outcome else None
        if self.unsupported_reason:
            rec["unsupported"] = self.unsupported_reason
            if self.unsupported_span:
                rec["span"] = list(self.unsupported_span)
        if self.evidence:
            rec["evidence"] = self.evidence
        return rec


@dataclass
class FunctionPair:
    original: FuncIR
    refactored: FuncIR
    callee: FuncIR | None
    original_module: IrModule
    refactored_module: IrModule
    caller_name: str = ""


def lower_pair(original_text: str, refactored_text: str, caller_name: str, callee_name: str | None = None):
    """Lower both sides; LowerError from any function the caller reaches is
    the pair's Unsupported verdict."""
    from .lower import _check_reachable

    orig_mod, orig_errs = lower_module(original_text)
    refa_mod, refa_errs = lower_module(refactored_text)
    if caller_name not in orig_mod.functions:
        raise orig_errs.get(caller_name, LowerError(f"no function named `{caller_name}` in the original"))
    if caller_name not in refa_mod.functions:
        raise refa_errs.get(caller_name, LowerError(f"no function named `{caller_name}` in the refactored file"))
    _check_reachable(orig_mod, orig_errs, caller_name)
    _check_reachable(refa_mod, refa_errs, caller_name)
    if callee_name is None:
        new_names = set(refa_mod.functions) - set(orig_mod.functions)
        callee_name = sorted(new_names)[0] if new_names else None
    callee = refa_mod.functions.get(callee_name) if callee_name else None
    return FunctionPair(
        original=orig_mod.functions[caller_name],
        refactored=refa_mod.functions[caller_name],
        callee=callee,
        original_module=orig_mod,
        refactored_module=refa_mod,
        caller_name=caller_name,
    )


def check_equivalence(
    pair: FunctionPair,
    domain: InputDomain | None = None,
    timeout_s: float | None = None,
    config: Config | None = None,
    should_stop=None,
) -> EquivalenceVerdict:
    config = config or Config()
    timeout_s = timeout_s if timeout_s is not None else config.verify_timeout_s
    started = time.monotonic()

    orig_tys = [ty for _n, ty in pair.original.params]
    refa_tys = [ty for _n, ty in pair.refactored.params]
    if orig_tys != refa_tys:
        raise TypeMismatch(
            f"caller signatures disagree: {orig_tys!r} vs {refa_tys!r} (not the same Dom)"
        )

    # (1) structural fast path: inline the callee, normalize, compare
    try:
        inlined = inline_callee(pair.refactored, pair.callee) if pair.callee else pair.refactored
        lhs = FuncIR(
            pair.original.name,
            list(pair.original.params),
            list(pair.original.mut_slots),
            simplify(pair.original.body),
            pair.original.ret_ty,
        )
        rhs = FuncIR(
            inlined.name,
            list(inlined.params),
            list(inlined.mut_slots),
            simplify(inlined.body),
            inlined.ret_ty,
        )
        if alpha_key(lhs) == alpha_key(rhs):
            return EquivalenceVerdict(
                VerdictKind.EQUIVALENT,
                evidence="equivalence established by structural identity of normal forms",
                elapsed_s=time.monotonic() - started,
            )
    except RecursionError:
        pass

    # (2) bounded enumeration over the explicit domain
    try:
        if domain is None:
            domain = build_domain(pair.original, pair.original_module, config)
    except LowerError as exc:
        return EquivalenceVerdict(
            VerdictKind.UNSUPPORTED,
            unsupported_reason=str(exc),
            unsupported_span=exc.span,
            elapsed_s=time.monotonic() - started,
        )

    total = domain.total_size
    exhaustive = total <= domain.budget
    inputs = domain.enumerate() if exhaustive else domain.sample(domain.budget)
    fuel = config.domain_fuel

    checked = 0
    fuel_starved = 0
    for args in inputs:
        if checked % 256 == 0:
            if time.monotonic() - started > timeout_s:
                return EquivalenceVerdict(
                    VerdictKind.TIMEOUT,
                    evidence=f"wall clock exceeded {timeout_s}s after {checked} inputs",
                    checked_inputs=checked,
                    domain_size=total,
                    elapsed_s=time.monotonic() - started,
                )
            if should_stop is not None and should_stop():
                return EquivalenceVerdict(
                    VerdictKind.TIMEOUT,
                    evidence=f"cancelled after {checked} inputs",
                    checked_inputs=checked,
                    domain_size=total,
                    elapsed_s=time.monotonic() - started,
                )
        a = interpret(pair.original, args, fuel, pair.original_module)
        b = interpret(pair.refactored, args, fuel, pair.refactored_module)
        checked += 1
        if a.kind == "fuel" or b.kind == "fuel":
            fuel_starved += 1
            continue
        if not a.agrees_with(b):
            verdict = EquivalenceVerdict(
                VerdictKind.NOT_EQUIVALENT,
                counterexample=args,
                original_outcome=a,
                refactored_outcome=b,
                checked_inputs=checked,
                domain_size=total,
                elapsed_s=time.monotonic() - started,
            )
            _assert_replays(pair, verdict, fuel)
            return verdict

    if fuel_starved:
        return EquivalenceVerdict(
            VerdictKind.TIMEOUT,
            evidence=(
                f"termination evidence missing: the step budget ({fuel} fuel) ran out on "
                f"{fuel_starved} of {checked} inputs; this is not a behavioural difference"
            ),
            checked_inputs=checked,
            domain_size=total,
            elapsed_s=time.monotonic() - started,
        )
    if exhaustive:
        return EquivalenceVerdict(
            VerdictKind.EQUIVALENT_WITHIN_DOMAIN,
            evidence=f"exhaustive agreement on all {checked} inputs of the domain",
            checked_inputs=checked,
            domain_size=total,
            elapsed_s=time.monotonic() - started,
        )
    return EquivalenceVerdict(
        VerdictKind.LIKELY_EQUIVALENT,
        evidence=f"agreement on {checked} sampled inputs of {total} (seed {domain.seed})",
        checked_inputs=checked,
        domain_size=total,
        sampled=True,
        elapsed_s=time.monotonic() - started,
    )


def _assert_replays(pair: FunctionPair, verdict: EquivalenceVerdict, fuel: int) -> None:
    """Counterexample evidence must replay; a non-replaying one is a bug."""
    a = interpret(pair.original, verdict.counterexample, fuel, pair.original_module)
    b = interpret(pair.refactored, verdict.counterexample, fuel, pair.refactored_module)
    assert not a.agrees_with(b), "counterexample does not replay"
    assert a.agrees_with(verdict.original_outcome) and b.agrees_with(verdict.refactored_outcome)
