"""Compiler invocation: scratch crates and machine-readable diagnostics.

Every check runs on a throwaway crate in the system temp directory holding a
generated manifest and one source file; the user's tree is never locked or
modified, and the crate is removed on all paths.
"""

from __future__ import annotations

import json
import os
import shutil
import subprocess
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass, field

from ..config import Config
from ..errors import ToolchainCrashed, ToolchainMissing

_MANIFEST = """[package]
name = "scratch"
version = "0.0.0"
edition = "2021"

[lib]
path = "src/lib.rs"
"""


@dataclass
class Suggestion:
    message: str
    applicability: str  # MachineApplicable | MaybeIncorrect | HasPlaceholders | Unspecified
    parts: list[tuple[int, int, str]]  # (byte_start, byte_end, replacement)


@dataclass
class Diag:
    code: str | None
    level: str
    message: str
    spans: list[tuple[int, int, bool]]  # (byte_start, byte_end, is_primary)
    suggestions: list[Suggestion] = field(default_factory=list)
    rendered: str = ""


def probe_toolchain(config: Config | None = None) -> str | None:
    """Version string when the compiler is available, else None."""
    exe = (config or Config()).check_argv("x.rs", ".")[0]
    try:
        res = subprocess.run([exe, "--version"], capture_output=True, text=True, timeout=20)
    except (FileNotFoundError, subprocess.TimeoutExpired, OSError):
        return None
    if res.returncode != 0:
        return None
    return res.stdout.strip() or res.stderr.strip()


@contextmanager
def scratch_crate(text: str, workdir: str | None = None):
    """Yield (crate_dir, src_path) for an isolated single-file crate."""
    root = tempfile.mkdtemp(prefix="fnlift-crate-", dir=workdir)
    try:
        src_dir = os.path.join(root, "src")
        os.makedirs(src_dir, exist_ok=True)
        with open(os.path.join(root, "Cargo.toml"), "w", encoding="utf-8") as fh:
            fh.write(_MANIFEST)
        src_path = os.path.join(src_dir, "lib.rs")
        with open(src_path, "w", encoding="utf-8") as fh:
            fh.write(text)
        yield root, src_path
    finally:
        shutil.rmtree(root, ignore_errors=True)


def compile_check(text: str, config: Config | None = None) -> list[Diag]:
    """Error-level diagnostics for the text; empty list means it compiles."""
    config = config or Config()
    with scratch_crate(text) as (root, src_path):
        argv = config.check_argv(src_path, root)
        try:
            res = subprocess.run(
                argv,
                capture_output=True,
                text=True,
                cwd=root,
                timeout=config.repair_timeout_s,
            )
        except FileNotFoundError as exc:
            raise ToolchainMissing(f"check command not found: {argv[0]}") from exc
        except subprocess.TimeoutExpired as exc:
            raise ToolchainCrashed(f"check command timed out after {config.repair_timeout_s}s") from exc
    diags = _parse_diags(res.stderr) + _parse_diags(res.stdout)
    errors = [d for d in diags if d.level == "error"]
    if res.returncode != 0 and not errors:
        raise ToolchainCrashed(
            f"check command failed (exit {res.returncode}) without diagnostics: {res.stderr[:400]}"
        )
    return errors


def _parse_diags(stream: str) -> list[Diag]:
    out: list[Diag] = []
    for line in stream.splitlines():
        line = line.strip()
        if not line.startswith("{"):
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            continue
        if obj.get("reason") == "compiler-message":  # cargo wrapping
            obj = obj.get("message", {})
        if obj.get("$message_type") not in (None, "diagnostic"):
            continue
        if "message" not in obj or "level" not in obj:
            continue
        if obj["level"] not in ("error", "warning"):
            continue
        if obj["message"].startswith("aborting due to"):
            continue
        code = (obj.get("code") or {}).get("code") if obj.get("code") else None
        spans = [
            (sp["byte_start"], sp["byte_end"], bool(sp.get("is_primary")))
            for sp in obj.get("spans", [])
            if "byte_start" in sp
        ]
        suggestions = []
        for child in obj.get("children", []):
            parts = [
                (sp["byte_start"], sp["byte_end"], sp["suggested_replacement"])
                for sp in child.get("spans", [])
                if sp.get("suggested_replacement") is not None
            ]
            if parts:
                appl = next(
                    (sp.get("suggestion_applicability") for sp in child.get("spans", []) if sp.get("suggestion_applicability")),
                    "Unspecified",
                )
                suggestions.append(Suggestion(child.get("message", ""), appl, parts))
        out.append(
            Diag(
                code=code,
                level=obj["level"],
                message=obj["message"],
                spans=spans,
                suggestions=suggestions,
                rendered=obj.get("rendered") or "",
            )
        )
    return out
