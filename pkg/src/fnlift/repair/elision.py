"""Lifetime elision on repaired signatures.

The three standard rules, applied in reverse: a named lifetime is removed
when the compiler could re-infer it (single input lifetime, or a `self`
receiver lifetime covering the outputs). The rewritten text is re-checked;
if it no longer compiles, the input comes back unchanged, which also makes
the operation idempotent.
"""

from __future__ import annotations

import re

from ..config import Config
from ..source.syntax import SyntaxTree


def elide(text: str, target: str, config: Config | None = None) -> str:
    config = config or Config()
    candidate = _elide_once(text, target)
    if candidate == text:
        return text
    from .toolchain import compile_check

    try:
        if compile_check(candidate, config):
            return text
    except Exception:
        return text
    return candidate


def _elide_once(text: str, target: str) -> str:
    tree = SyntaxTree(text.encode())
    fn = tree.fn_named(target)
    if fn is None:
        return text
    declared = [g.name for g in fn.generics if g.kind == "lifetime"]
    if len(declared) != 1:
        return text  # zero: nothing to do; several: not an elision shape
    lt = declared[0]

    sig_start, sig_end = fn.start, fn.sig_end
    sig = text[sig_start:sig_end]
    body = text[fn.body_span[0] : fn.body_span[1]] if fn.body_span else ""
    if re.search(r"(?<!\w)%s\b" % re.escape(lt), body):
        return text  # the body names it; keep the declaration

    # usable only when every use is a reference annotation `&'x` (path
    # generics like File<'x> have no elided spelling here)
    uses = [m for m in re.finditer(r"(?<!\w)%s\b" % re.escape(lt), sig)]
    if not uses:
        return text
    for m in uses:
        before = sig[: m.start()].rstrip()
        is_ref = before.endswith("&")
        is_decl = before.endswith(("<", ","))
        if not (is_ref or is_decl):
            return text

    input_region = sig[fn.params_span[0] - sig_start : fn.params_span[1] - sig_start]
    input_refs = len(re.findall(r"&", input_region))
    annotated_inputs = len(re.findall(r"&\s*%s\b" % re.escape(lt), input_region))
    has_self_lt = bool(re.search(r"&\s*%s\s+(mut\s+)?self\b" % re.escape(lt), input_region))
    # rule 1: exactly one input lifetime position; rule 2: receiver lifetime
    if not has_self_lt:
        if annotated_inputs != 1 or input_refs != annotated_inputs:
            return text

    new_sig = re.sub(r"&\s*%s\s+" % re.escape(lt), "&", sig)
    new_sig = re.sub(r"&\s*%s\b" % re.escape(lt), "&", new_sig)
    # drop the generics declaration entry
    new_sig = re.sub(r"<\s*%s\s*,\s*" % re.escape(lt), "<", new_sig)
    new_sig = re.sub(r",\s*%s\s*>" % re.escape(lt), ">", new_sig)
    new_sig = re.sub(r"<\s*%s\s*>" % re.escape(lt), "", new_sig)
    return text[:sig_start] + new_sig + text[sig_end:]
