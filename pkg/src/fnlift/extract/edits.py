"""Applying edit scripts to source units."""

from __future__ import annotations

from ..errors import OverlapError, VersionMismatch
from ..source.unit import SourceUnit
from .specimen import EditScript


def apply_edits(unit: SourceUnit, script: EditScript) -> SourceUnit:
    """Produce the edited unit (version + 1); the input unit is untouched,
    which is what makes revert possible."""
    if script.base_version != unit.version:
        raise VersionMismatch(
            f"script built against version {script.base_version}, unit is at {unit.version}"
        )
    data = unit.data
    n = len(data)
    out: list[bytes] = []
    cursor = 0
    for start, end, replacement in script.edits:
        if not (0 <= start <= end <= n):
            raise OverlapError(f"edit [{start}, {end}) out of bounds for {n}-byte file")
        if start < cursor:
            raise OverlapError("edits overlap")
        out.append(data[cursor:start])
        out.append(replacement.encode("utf-8"))
        cursor = end
    out.append(data[cursor:])
    new_text = b"".join(out).decode("utf-8")
    return unit.with_text(new_text)
