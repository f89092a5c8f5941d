"""Source units, selection resolution, and marker-delimited regions.

A selection is a byte range that gets snapped outward to the smallest
sequence of complete statements covering it, always within one function.
Marker comments (`// START SELECTION //` / `// END SELECTION //`, or the
block-comment spellings) give benchmark corpora a file-embedded selection.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import IoError, MarkerMissing, SelectionInvalid
from .expr import (
    Block,
    ExprStmt,
    IfExpr,
    LetStmt,
    LoopExpr,
    MatchExpr,
    Node,
    WhileExpr,
    ForExpr,
    children,
)
from .syntax import FnItem, SyntaxTree

_START_MARKERS = ("// START SELECTION //", "/* START SELECTION */")
_END_MARKERS = ("// END SELECTION //", "/* END SELECTION */")


@dataclass
class SourceUnit:
    path: str
    text: str
    syntax: SyntaxTree
    version: int = 0

    @property
    def data(self) -> bytes:
        return self.syntax.data

    def with_text(self, new_text: str) -> "SourceUnit":
        return SourceUnit(self.path, new_text, SyntaxTree(new_text.encode()), self.version + 1)


@dataclass
class SelectionRegion:
    start: int  # snapped byte offsets
    end: int
    host: FnItem
    block: Block  # the statement block the region lives in
    stmts: list[Node]  # the covered statements, in order
    is_tail: bool = False  # last covered statement is the block's tail expr


def parse_unit(path: str, text: str | None = None) -> SourceUnit:
    if text is None:
        try:
            with open(path, "rb") as fh:
                raw = fh.read()
        except OSError as exc:
            raise IoError(f"cannot read {path}: {exc}") from exc
        text = raw.decode("utf-8")
    tree = SyntaxTree(text.encode())
    return SourceUnit(path, text, tree)


def _blocks_within(unit: SourceUnit, fn: FnItem) -> list[Block]:
    """Every statement block of the function body, outermost first."""
    body = unit.syntax.body_block(fn)
    if body is None:
        return []
    out = [body]
    stack: list[Node] = list(body.stmts)
    while stack:
        node = stack.pop()
        if isinstance(node, Block) and node is not body:
            out.append(node)
        stack.extend(children(node))
    return out


def resolve_selection(unit: SourceUnit, start: int, end: int) -> SelectionRegion:
    n = len(unit.data)
    if not (0 <= start < end <= n):
        raise SelectionInvalid(f"offsets [{start}, {end}) out of range for {n}-byte file")
    fn = unit.syntax.fn_at(start)
    fn_end = unit.syntax.fn_at(max(start, end - 1))
    if fn is None or fn_end is None or fn is not fn_end:
        raise SelectionInvalid("selection must lie within a single function body")
    # deepest block containing the whole range wins; statements there get snapped
    best: Block | None = None
    for blk in _blocks_within(unit, fn):
        if blk.start <= start and end <= blk.end:
            if best is None or blk.start >= best.start:
                best = blk
    if best is None:
        raise SelectionInvalid("selection does not resolve to a statement block")
    covered = [s for s in best.stmts if s.end > start and s.start < end]
    if not covered:
        # selection may sit in trivia between statements; snap to the nearest
        # following statement the range touches, else reject
        raise SelectionInvalid("selection covers no executable code")
    is_tail = bool(best.tail is not None and covered[-1] is best.stmts[-1])
    return SelectionRegion(covered[0].start, covered[-1].end, fn, best, covered, is_tail)


def find_marked_region(unit: SourceUnit) -> SelectionRegion:
    ts = unit.syntax.stream
    starts: list[tuple[int, int]] = []
    ends: list[tuple[int, int]] = []
    for tok in ts.tokens:
        if tok.kind != "comment":
            continue
        text = ts.text(tok).strip()
        if text in _START_MARKERS:
            starts.append((tok.start, tok.end))
        elif text in _END_MARKERS:
            ends.append((tok.start, tok.end))
    if len(starts) != 1 or len(ends) != 1:
        raise MarkerMissing(
            f"expected exactly one start and one end marker, found {len(starts)} start / {len(ends)} end"
        )
    (s0, s1), (e0, e1) = starts[0], ends[0]
    if s1 > e0:
        raise MarkerMissing("start marker appears after end marker")
    region = resolve_selection(unit, s1, e0)
    # strictly between the markers: drop statements leaking past either side
    kept = [st for st in region.stmts if st.start >= s1 and st.end <= e0]
    if not kept:
        raise SelectionInvalid("no complete statements between the selection markers")
    region.stmts = kept
    region.start = kept[0].start
    region.end = kept[-1].end
    region.is_tail = bool(region.block.tail is not None and kept[-1] is region.block.stmts[-1])
    return region
