"""Expression and statement AST over the token stream.

The parser is deliberately tolerant: a statement whose expression grammar we
do not recognize degrades to an Opaque node that still exposes identifier
occurrences, so analysis can stay conservative instead of failing. Spans are
byte offsets into the file.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .lex import KEYWORDS, TokenStream
from .types import TypeDesc, parse_type, render_tokens

# --------------------------------------------------------------------------
# AST nodes


@dataclass
class Node:
    start: int
    end: int


@dataclass
class Lit(Node):
    kind: str  # int float bool str char
    text: str


@dataclass
class PathExpr(Node):
    segments: list[str]
    text: str

    @property
    def is_var(self) -> bool:
        return len(self.segments) == 1 and not self.text[0].isupper()


@dataclass
class Unary(Node):
    op: str  # '-' '!' '*' '&' '&mut'
    operand: Node


@dataclass
class Binary(Node):
    op: str
    left: Node
    right: Node


@dataclass
class Assign(Node):
    op: str  # '=' '+=' '-=' ...
    target: Node
    value: Node


@dataclass
class Call(Node):
    callee: Node
    args: list[Node]


@dataclass
class MethodCall(Node):
    receiver: Node
    name: str
    args: list[Node]


@dataclass
class FieldAccess(Node):
    receiver: Node
    name: str  # identifier or tuple index digits


@dataclass
class IndexExpr(Node):
    receiver: Node
    index: Node


@dataclass
class TupleExpr(Node):
    items: list[Node]


@dataclass
class ArrayExpr(Node):
    items: list[Node]
    repeat: tuple[Node, Node] | None = None  # [elem; count]


@dataclass
class StructExpr(Node):
    path: str
    fields: list[tuple[str, Node | None]]  # None for shorthand `x`
    rest: Node | None = None


@dataclass
class RangeExpr(Node):
    lo: Node | None
    hi: Node | None
    inclusive: bool


@dataclass
class CastExpr(Node):
    operand: Node
    ty: TypeDesc


@dataclass
class AwaitExpr(Node):
    operand: Node


@dataclass
class TryExpr(Node):  # postfix ?
    operand: Node


@dataclass
class RefExpr(Node):
    mutable: bool
    operand: Node


@dataclass
class Block(Node):
    stmts: list[Node]  # LetStmt | ExprStmt | ItemStmt | EmptyStmt

    @property
    def tail(self) -> Node | None:
        if self.stmts:
            last = self.stmts[-1]
            if isinstance(last, ExprStmt) and not last.semi:
                return last.expr
        return None


@dataclass
class IfExpr(Node):
    cond: Node
    then: Block
    orelse: Node | None  # Block | IfExpr | None
    is_let: bool = False
    let_pat: "Pat | None" = None


@dataclass
class WhileExpr(Node):
    cond: Node
    body: Block
    label: str | None = None
    is_let: bool = False
    let_pat: "Pat | None" = None


@dataclass
class LoopExpr(Node):
    body: Block
    label: str | None = None


@dataclass
class ForExpr(Node):
    pat: "Pat"
    iterable: Node
    body: Block
    label: str | None = None


@dataclass
class MatchExpr(Node):
    scrutinee: Node
    arms: list["Arm"]


@dataclass
class Arm(Node):
    pat: "Pat"
    guard: Node | None
    body: Node


@dataclass
class BreakExpr(Node):
    label: str | None
    value: Node | None


@dataclass
class ContinueExpr(Node):
    label: str | None


@dataclass
class ReturnExpr(Node):
    value: Node | None


@dataclass
class ClosureExpr(Node):
    params: list[str]
    body: Node
    is_move: bool = False


@dataclass
class MacroCall(Node):
    name: str
    args: list[Node]  # best-effort comma-split parse; may be empty
    raw: str = ""


@dataclass
class Opaque(Node):
    """Unparsed token run; identifier occurrences kept for analysis."""

    idents: list[tuple[str, int, int]] = field(default_factory=list)  # (name, start, end)


# Statements


@dataclass
class LetStmt(Node):
    pat: "Pat"
    ty: TypeDesc | None
    init: Node | None
    else_block: Block | None = None  # let-else


@dataclass
class ExprStmt(Node):
    expr: Node
    semi: bool


@dataclass
class ItemStmt(Node):
    name: str = ""


@dataclass
class EmptyStmt(Node):
    pass


# Patterns


@dataclass
class Pat(Node):
    pass


@dataclass
class PatIdent(Pat):
    name: str
    mutable: bool = False
    by_ref: bool = False


@dataclass
class PatWild(Pat):
    pass


@dataclass
class PatTuple(Pat):
    items: list[Pat]


@dataclass
class PatLit(Pat):
    text: str


@dataclass
class PatPath(Pat):
    path: str
    args: list[Pat] | None = None  # Some(x) style payloads


@dataclass
class PatStruct(Pat):
    path: str
    fields: list[tuple[str, Pat | None]]
    rest: bool = False


@dataclass
class PatRef(Pat):
    mutable: bool
    inner: Pat


def pat_bound_names(pat: Pat) -> list[tuple[str, bool]]:
    """(name, is_mut) pairs bound by the pattern, in source order."""
    out: list[tuple[str, bool]] = []

    def walk(p: Pat) -> None:
        if isinstance(p, PatIdent):
            out.append((p.name, p.mutable))
        elif isinstance(p, PatTuple):
            for it in p.items:
                walk(it)
        elif isinstance(p, PatPath) and p.args:
            for it in p.args:
                walk(it)
        elif isinstance(p, PatStruct):
            for name, sub in p.fields:
                if sub is None:
                    out.append((name, False))
                else:
                    walk(sub)
        elif isinstance(p, PatRef):
            walk(p.inner)

    walk(pat)
    return out


# --------------------------------------------------------------------------
# Parser

_BLOCK_KW = {"if", "match", "while", "for", "loop", "unsafe"}
_ITEM_KW = {"fn", "struct", "enum", "impl", "trait", "mod", "use", "type", "static", "macro_rules"}
_BIN_OPS = [
    # (ops at this level, precedence); parsed by climbing
    ({"||"}, 1),
    ({"&&"}, 2),
    ({"==", "!=", "<", ">", "<=", ">="}, 3),
    ({"|"}, 4),
    ({"^"}, 5),
    ({"&"}, 6),
    ({"<<", ">>"}, 7),
    ({"+", "-"}, 8),
    ({"*", "/", "%"}, 9),
]
_PREC = {op: prec for ops, prec in _BIN_OPS for op in ops}
_ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="}


class ParseBail(Exception):
    pass


class Parser:
    """Parses one token window; entry points: block(), statements(), expression()."""

    def __init__(self, ts: TokenStream, t0: int, t1: int):
        self.ts = ts
        self.lo = t0
        self.hi = t1
        self.i = ts.skip_trivia(t0)

    # -- token helpers ------------------------------------------------------

    def _tok(self, i: int | None = None):
        i = self.i if i is None else i
        return self.ts.tokens[i] if i < self.hi else None

    def at_end(self) -> bool:
        return self.i >= self.hi

    def peek_text(self, ahead: int = 0) -> str | None:
        i = self.i
        for _ in range(ahead):
            i = self.ts.skip_trivia(i + 1)
        tok = self._tok(i)
        return None if tok is None else self.ts.text(tok)

    def peek_kind(self) -> str | None:
        tok = self._tok()
        return None if tok is None else tok.kind

    def bump(self):
        tok = self._tok()
        if tok is None:
            raise ParseBail()
        self.i = self.ts.skip_trivia(self.i + 1)
        return tok

    def eat(self, text: str) -> bool:
        if self.peek_text() == text:
            self.bump()
            return True
        return False

    def expect(self, text: str):
        if not self.eat(text):
            raise ParseBail()

    def _adjacent(self, a: int, b: int) -> bool:
        return self.ts.tokens[a].end == self.ts.tokens[b].start

    def peek_op(self) -> str | None:
        """Longest operator starting at the cursor, fusing adjacent puncts."""
        tok = self._tok()
        if tok is None or tok.kind not in ("punct",):
            return None
        t1 = self.ts.text(tok)
        j = self.i + 1
        if j < self.hi and self.ts.tokens[j].kind == "punct" and self._adjacent(self.i, j):
            t2 = t1 + self.ts.text(self.ts.tokens[j])
            k = j + 1
            if k < self.hi and self.ts.tokens[k].kind == "punct" and self._adjacent(j, k):
                t3 = t2 + self.ts.text(self.ts.tokens[k])
                if t3 in ("<<=", ">>=", "..="):
                    return t3
            if t2 in _ASSIGN_OPS or t2 in _PREC or t2 in ("::", "->", "=>", "..", "..="):
                return t2
        return t1

    def bump_op(self, op: str) -> None:
        # operators span 1-3 adjacent punct tokens
        text = ""
        while len(text) < len(op):
            tok = self._tok()
            if tok is None:
                raise ParseBail()
            text += self.ts.text(tok)
            self.i += 1
        if text != op:
            raise ParseBail()
        self.i = self.ts.skip_trivia(self.i)

    # -- statements ---------------------------------------------------------

    def statements(self) -> list[Node]:
        out: list[Node] = []
        while not self.at_end():
            out.append(self.statement())
        return out

    def statement(self) -> Node:
        tok = self._tok()
        start = tok.start
        text = self.ts.text(tok)
        kind = tok.kind
        while text == "#":  # attributes on statements/items: skip
            self.bump()
            self.eat("!")
            if self.peek_text() == "[":
                m = self.ts.match_of(self.i)
                if m is None:
                    break
                self.i = self.ts.skip_trivia(m + 1)
            tok = self._tok()
            if tok is None:
                return EmptyStmt(start, start)
            text = self.ts.text(tok)
            kind = tok.kind
        if text == ";":
            self.bump()
            return EmptyStmt(start, tok.end)
        if text == "let":
            return self._let_stmt(start)
        if text in _ITEM_KW or text in ("const", "pub"):
            # in statement position these always start a nested item
            return self._item_stmt(start)
        if text in _BLOCK_KW or text == "{" or (kind == "lifetime" and self.peek_text(1) == ":"):
            # an expression-with-block statement ends at its closing brace
            save = self.i
            try:
                expr = self._primary(False)
            except ParseBail:
                self.i = save
                return self._expr_stmt(start)
            if self.peek_text() == ";":
                semi = self._tok()
                self.bump()
                return ExprStmt(start, semi.end, expr, True)
            # `.` / `?` after the brace means it was a value expression after all
            if self.peek_text() in (".", "?"):
                self.i = save
                return self._expr_stmt(start)
            return ExprStmt(start, expr.end, expr, False)
        return self._expr_stmt(start)

    def _let_stmt(self, start: int) -> Node:
        self.expect("let")
        pat = self.pattern()
        ty = None
        if self.eat(":"):
            a = self.i
            b = self._scan_type_until({"=", ";"})
            ty = parse_type(self.ts, a, b)
            self.i = self.ts.skip_trivia(b)
        init = None
        else_block = None
        if self.eat("="):
            init = self.expression()
            if self.peek_text() == "else":
                self.bump()
                else_block = self.block()
        end = else_block.end if else_block else (init.end if init else pat.end)
        if self.peek_text() == ";":
            end = self._tok().end
            self.bump()
        return LetStmt(start, end, pat, ty, init, else_block)

    def _scan_type_until(self, stops: set[str]) -> int:
        depth = 0
        j = self.i
        while j < self.hi:
            tok = self.ts.tokens[j]
            if tok.kind == "open":
                m = self.ts.match_of(j)
                if m is None or m >= self.hi:
                    return j
                j = m + 1
                continue
            if self.ts.arrow_at(j):
                j += 2
                continue
            t = self.ts.text(tok)
            if t == "<":
                depth += 1
            elif t == ">":
                depth -= 1
            elif depth <= 0 and t in stops:
                return j
            j += 1
        return j

    def _item_stmt(self, start: int) -> Node:
        # consume a nested item: skip to its body braces (match) or `;`
        name = ""
        saw_kw = False
        while not self.at_end():
            tok = self._tok()
            t = self.ts.text(tok)
            if tok.kind == "open" and t == "{":
                m = self.ts.match_of(self.i)
                if m is None:
                    self.i = self.hi
                    return ItemStmt(start, self.ts.tokens[self.hi - 1].end, name)
                end = self.ts.tokens[m].end
                self.i = self.ts.skip_trivia(m + 1)
                return ItemStmt(start, end, name)
            if t == ";":
                end = tok.end
                self.bump()
                return ItemStmt(start, end, name)
            if tok.kind == "open":
                m = self.ts.match_of(self.i)
                if m is None:
                    raise ParseBail()
                self.i = self.ts.skip_trivia(m + 1)
                continue
            if not name and saw_kw and tok.kind == "ident" and t not in KEYWORDS:
                name = t
            if tok.kind == "ident" and t in _ITEM_KW:
                saw_kw = True
            self.bump()
        return ItemStmt(start, self.ts.tokens[self.hi - 1].end, name)

    def _expr_stmt(self, start: int) -> Node:
        save = self.i
        try:
            expr = self.expression()
        except ParseBail:
            self.i = save
            expr = self._opaque_to_semi(start)
            if self.eat(";"):
                return ExprStmt(start, expr.end, expr, True)
            return ExprStmt(start, expr.end, expr, False)
        if self.peek_text() == ";":
            semi_tok = self._tok()
            self.bump()
            return ExprStmt(start, semi_tok.end, expr, True)
        return ExprStmt(start, expr.end, expr, False)

    def _opaque_to_semi(self, start: int) -> Opaque:
        idents: list[tuple[str, int, int]] = []
        end = start
        while not self.at_end():
            tok = self._tok()
            t = self.ts.text(tok)
            if t == ";":
                break
            if tok.kind == "open":
                m = self.ts.match_of(self.i)
                if m is None or m >= self.hi:
                    # collect idents to end
                    j = self.i
                    while j < self.hi:
                        tk = self.ts.tokens[j]
                        if tk.kind == "ident" and self.ts.text(tk) not in KEYWORDS:
                            idents.append((self.ts.text(tk), tk.start, tk.end))
                        j += 1
                    end = self.ts.tokens[self.hi - 1].end
                    self.i = self.hi
                    return Opaque(start, end, idents)
                j = self.i
                while j <= m:
                    tk = self.ts.tokens[j]
                    if tk.kind == "ident" and self.ts.text(tk) not in KEYWORDS:
                        idents.append((self.ts.text(tk), tk.start, tk.end))
                    j += 1
                end = self.ts.tokens[m].end
                self.i = self.ts.skip_trivia(m + 1)
                continue
            if tok.kind == "ident" and t not in KEYWORDS:
                idents.append((t, tok.start, tok.end))
            end = tok.end
            self.bump()
        return Opaque(start, end, idents)

    # -- blocks -------------------------------------------------------------

    def block(self) -> Block:
        tok = self._tok()
        if tok is None or self.ts.text(tok) != "{":
            raise ParseBail()
        m = self.ts.match_of(self.i)
        if m is None or m >= self.hi:
            raise ParseBail()
        inner = Parser(self.ts, self.i + 1, m)
        stmts = inner.statements()
        blk = Block(tok.start, self.ts.tokens[m].end, stmts)
        self.i = self.ts.skip_trivia(m + 1)
        return blk

    # -- patterns -----------------------------------------------------------

    def pattern(self) -> Pat:
        tok = self._tok()
        if tok is None:
            raise ParseBail()
        start = tok.start
        t = self.ts.text(tok)
        if t == "&":
            self.bump()
            is_mut = self.eat("mut")
            inner = self.pattern()
            return PatRef(start, inner.end, is_mut, inner)
        if t == "(":
            m = self.ts.match_of(self.i)
            if m is None:
                raise ParseBail()
            inner = Parser(self.ts, self.i + 1, m)
            items: list[Pat] = []
            while not inner.at_end():
                items.append(inner.pattern())
                if not inner.eat(","):
                    break
            end = self.ts.tokens[m].end
            self.i = self.ts.skip_trivia(m + 1)
            return PatTuple(start, end, items)
        if t == "_":
            self.bump()
            return PatWild(start, tok.end)
        if t in ("ref", "mut"):
            by_ref = False
            mutable = False
            while self.peek_text() in ("ref", "mut"):
                if self.peek_text() == "ref":
                    by_ref = True
                else:
                    mutable = True
                self.bump()
            name_tok = self._tok()
            if name_tok is None or name_tok.kind != "ident":
                raise ParseBail()
            self.bump()
            return PatIdent(start, name_tok.end, self.ts.text(name_tok), mutable, by_ref)
        if tok.kind in ("num", "str", "char") or t in ("true", "false") or t == "-":
            end = tok.end
            text = t
            self.bump()
            if t == "-":
                nxt = self._tok()
                if nxt is None:
                    raise ParseBail()
                text += self.ts.text(nxt)
                end = nxt.end
                self.bump()
            return PatLit(start, end, text)
        if tok.kind == "ident":
            # path pattern, possibly with payload or struct fields
            path, end_i = self._scan_path()
            nxt = self.peek_text()
            if nxt == "(":
                m = self.ts.match_of(self.i)
                if m is None:
                    raise ParseBail()
                inner = Parser(self.ts, self.i + 1, m)
                args: list[Pat] = []
                while not inner.at_end():
                    args.append(inner.pattern())
                    if not inner.eat(","):
                        break
                end = self.ts.tokens[m].end
                self.i = self.ts.skip_trivia(m + 1)
                return PatPath(start, end, path, args)
            if nxt == "{":
                m = self.ts.match_of(self.i)
                if m is None:
                    raise ParseBail()
                inner = Parser(self.ts, self.i + 1, m)
                fields: list[tuple[str, Pat | None]] = []
                rest = False
                while not inner.at_end():
                    if inner.peek_op() == "..":
                        rest = True
                        break
                    fname_tok = inner.bump()
                    fname = inner.ts.text(fname_tok)
                    sub = None
                    if inner.eat(":"):
                        sub = inner.pattern()
                    fields.append((fname, sub))
                    if not inner.eat(","):
                        break
                end = self.ts.tokens[m].end
                self.i = self.ts.skip_trivia(m + 1)
                return PatStruct(start, end, path, fields, rest)
            if "::" in path or (path[0].isupper() and path not in ("Self",)):
                return PatPath(start, end_i, path, None)
            return PatIdent(start, end_i, path, False, False)
        raise ParseBail()

    def _scan_path(self) -> tuple[str, int]:
        parts = []
        end = self._tok().end
        tok = self.bump()
        parts.append(self.ts.text(tok))
        while self.peek_op() == "::":
            self.bump_op("::")
            nxt = self._tok()
            if nxt is None or nxt.kind != "ident":
                raise ParseBail()
            parts.append(self.ts.text(nxt))
            end = nxt.end
            self.bump()
        return "::".join(parts), end

    # -- expressions --------------------------------------------------------

    def expression(self, no_struct: bool = False) -> Node:
        return self._assign(no_struct)

    def _assign(self, no_struct: bool) -> Node:
        lhs = self._range(no_struct)
        op = self.peek_op()
        if op in _ASSIGN_OPS:
            self.bump_op(op)
            rhs = self._assign(no_struct)
            return Assign(lhs.start, rhs.end, op, lhs, rhs)
        return lhs

    def _range(self, no_struct: bool) -> Node:
        op = self.peek_op()
        if op in ("..", "..="):
            op_start = self._tok().start
            self.bump_op(op)
            hi = None
            if not self._range_ends_here(no_struct):
                hi = self._binary(1, no_struct)
            return RangeExpr(op_start, hi.end if hi else op_start, None, hi, op == "..=")
        lo = self._binary(1, no_struct)
        op = self.peek_op()
        if op in ("..", "..="):
            self.bump_op(op)
            hi = None
            if not self._range_ends_here(no_struct):
                hi = self._binary(1, no_struct)
            return RangeExpr(lo.start, hi.end if hi else lo.end, lo, hi, op == "..=")
        return lo

    def _range_ends_here(self, no_struct: bool) -> bool:
        t = self.peek_text()
        return t is None or t in (")", "]", "}", ",", ";", "{") or t == "="

    def _binary(self, min_prec: int, no_struct: bool) -> Node:
        lhs = self._unary(no_struct)
        while True:
            op = self.peek_op()
            if op is None:
                break
            if op == "as":
                pass
            prec = _PREC.get(op)
            # `<` / `>` ambiguity with generics does not arise in expression
            # position (turbofish is required there), so compare freely.
            if prec is None or prec < min_prec:
                if self.peek_text() == "as":
                    self.bump()
                    a = self.i
                    b = self._scan_type_until({";", ",", ")", "]", "}", "=", "<", ">", "+", "-", "*", "/", "?", "."})
                    ty = parse_type(self.ts, a, b)
                    self.i = self.ts.skip_trivia(b)
                    lhs = CastExpr(lhs.start, self.ts.tokens[b - 1].end if b > a else lhs.end, lhs, ty)
                    continue
                break
            self.bump_op(op)
            rhs = self._binary(prec + 1, no_struct)
            lhs = Binary(lhs.start, rhs.end, op, lhs, rhs)
        return lhs

    def _unary(self, no_struct: bool) -> Node:
        tok = self._tok()
        if tok is None:
            raise ParseBail()
        t = self.ts.text(tok)
        start = tok.start
        if t == "&":
            self.bump()
            if self.eat("&"):  # `&&x` double borrow
                is_mut = self.eat("mut")
                inner = self._unary(no_struct)
                inner_ref = RefExpr(start, inner.end, is_mut, inner)
                return RefExpr(start, inner.end, False, inner_ref)
            is_mut = self.eat("mut")
            inner = self._unary(no_struct)
            return RefExpr(start, inner.end, is_mut, inner)
        if t in ("-", "!", "*"):
            op = t
            self.bump()
            inner = self._unary(no_struct)
            return Unary(start, inner.end, op, inner)
        return self._postfix(no_struct)

    def _postfix(self, no_struct: bool) -> Node:
        node = self._primary(no_struct)
        while True:
            tok = self._tok()
            if tok is None:
                break
            t = self.ts.text(tok)
            if t == ".":
                if self.peek_op() in ("..", "..="):
                    break
                self.bump()
                nxt = self._tok()
                if nxt is None:
                    raise ParseBail()
                ntext = self.ts.text(nxt)
                if ntext == "await":
                    self.bump()
                    node = AwaitExpr(node.start, nxt.end, node)
                    continue
                if nxt.kind == "num":
                    self.bump()
                    node = FieldAccess(node.start, nxt.end, node, ntext)
                    continue
                if nxt.kind == "ident":
                    self.bump()
                    # turbofish on methods: .collect::<Vec<_>>()
                    if self.peek_op() == "::":
                        self.bump_op("::")
                        if self.peek_text() == "<":
                            close = self._matching_angle(self.i)
                            self.i = self.ts.skip_trivia(close + 1)
                    if self.peek_text() == "(":
                        m = self.ts.match_of(self.i)
                        if m is None:
                            raise ParseBail()
                        args = self._comma_exprs(self.i + 1, m)
                        end = self.ts.tokens[m].end
                        self.i = self.ts.skip_trivia(m + 1)
                        node = MethodCall(node.start, end, node, ntext, args)
                    else:
                        node = FieldAccess(node.start, nxt.end, node, ntext)
                    continue
                raise ParseBail()
            if t == "?":
                self.bump()
                node = TryExpr(node.start, tok.end, node)
                continue
            if t == "(":
                m = self.ts.match_of(self.i)
                if m is None:
                    raise ParseBail()
                args = self._comma_exprs(self.i + 1, m)
                end = self.ts.tokens[m].end
                self.i = self.ts.skip_trivia(m + 1)
                node = Call(node.start, end, node, args)
                continue
            if t == "[":
                m = self.ts.match_of(self.i)
                if m is None:
                    raise ParseBail()
                inner = Parser(self.ts, self.i + 1, m)
                idx = inner.expression()
                end = self.ts.tokens[m].end
                self.i = self.ts.skip_trivia(m + 1)
                node = IndexExpr(node.start, end, node, idx)
                continue
            break
        return node

    def _matching_angle(self, open_i: int) -> int:
        depth = 0
        j = open_i
        while j < self.hi:
            tok = self.ts.tokens[j]
            if tok.kind == "open":
                m = self.ts.match_of(j)
                if m is None:
                    raise ParseBail()
                j = m + 1
                continue
            if self.ts.arrow_at(j):
                j += 2
                continue
            t = self.ts.text(tok)
            if t == "<":
                depth += 1
            elif t == ">":
                depth -= 1
                if depth == 0:
                    return j
            j += 1
        raise ParseBail()

    def _comma_exprs(self, a: int, b: int) -> list[Node]:
        inner = Parser(self.ts, a, b)
        out: list[Node] = []
        while not inner.at_end():
            out.append(inner.expression())
            if not inner.eat(","):
                break
        return out

    def _primary(self, no_struct: bool) -> Node:
        tok = self._tok()
        if tok is None:
            raise ParseBail()
        t = self.ts.text(tok)
        kind = tok.kind
        start = tok.start

        if kind == "num":
            self.bump()
            is_float = t.endswith(("f32", "f64")) or ("." in t) or bool(re.search(r"[0-9][eE][+-]?[0-9]", t))
            if t.startswith(("0x", "0X", "0b", "0B", "0o", "0O")):
                is_float = False
            return Lit(start, tok.end, "float" if is_float else "int", t)
        if kind == "str":
            self.bump()
            return Lit(start, tok.end, "str", t)
        if kind == "char":
            self.bump()
            return Lit(start, tok.end, "char", t)
        if t in ("true", "false"):
            self.bump()
            return Lit(start, tok.end, "bool", t)
        if kind == "lifetime":
            # label: 'x: loop {...} / break 'x
            label = t
            j = self.ts.skip_trivia(self.i + 1)
            if j < self.hi and self.ts.text(self.ts.tokens[j]) == ":":
                self.bump()
                self.bump()
                inner = self._primary(no_struct)
                for cls in (LoopExpr, WhileExpr, ForExpr):
                    if isinstance(inner, cls):
                        inner.label = label
                inner.start = start
                return inner
            raise ParseBail()
        if t == "(":
            m = self.ts.match_of(self.i)
            if m is None:
                raise ParseBail()
            items = self._comma_exprs(self.i + 1, m)
            had_comma = self._window_has_toplevel_comma(self.i + 1, m)
            end = self.ts.tokens[m].end
            self.i = self.ts.skip_trivia(m + 1)
            if len(items) == 1 and not had_comma:
                node = items[0]
                node.start, node.end = start, end
                return node
            return TupleExpr(start, end, items)
        if t == "[":
            m = self.ts.match_of(self.i)
            if m is None:
                raise ParseBail()
            inner = Parser(self.ts, self.i + 1, m)
            first = None
            repeat = None
            items: list[Node] = []
            if not inner.at_end():
                first = inner.expression()
                if inner.eat(";"):
                    count = inner.expression()
                    repeat = (first, count)
                else:
                    items.append(first)
                    while inner.eat(","):
                        if inner.at_end():
                            break
                        items.append(inner.expression())
            end = self.ts.tokens[m].end
            self.i = self.ts.skip_trivia(m + 1)
            return ArrayExpr(start, end, items, repeat)
        if t == "{":
            return self.block()
        if t == "if":
            return self._if_expr(start, no_struct)
        if t == "while":
            self.bump()
            is_let = self.eat("let")
            pat = self.pattern() if is_let else None
            if is_let:
                self.expect("=")
            cond = self.expression(no_struct=True)
            body = self.block()
            return WhileExpr(start, body.end, cond, body, None, is_let, pat)
        if t == "loop":
            self.bump()
            body = self.block()
            return LoopExpr(start, body.end, body)
        if t == "for":
            self.bump()
            pat = self.pattern()
            self.expect("in")
            it = self.expression(no_struct=True)
            body = self.block()
            return ForExpr(start, body.end, pat, it, body)
        if t == "match":
            return self._match_expr(start)
        if t == "unsafe":
            self.bump()
            body = self.block()
            body.start = start
            return body
        if t == "break":
            self.bump()
            label = None
            if self.peek_kind() == "lifetime":
                label = self.ts.text(self._tok())
                self.bump()
            value = None
            nt = self.peek_text()
            if nt is not None and nt not in (";", "}", ")", ","):
                value = self.expression(no_struct)
            end = value.end if value else tok.end
            return BreakExpr(start, end, label, value)
        if t == "continue":
            self.bump()
            label = None
            if self.peek_kind() == "lifetime":
                label = self.ts.text(self._tok())
                self.bump()
            return ContinueExpr(start, tok.end, label)
        if t == "return":
            self.bump()
            value = None
            nt = self.peek_text()
            if nt is not None and nt not in (";", "}", ")", ","):
                value = self.expression(no_struct)
            end = value.end if value else tok.end
            return ReturnExpr(start, end, value)
        if t in ("move", "|") or (t == "|" and kind == "punct"):
            return self._closure(start)
        if t == "||":
            return self._closure(start)
        if kind == "ident" or t in ("self", "Self", "crate", "super"):
            return self._path_like(start, no_struct)
        raise ParseBail()

    def _window_has_toplevel_comma(self, a: int, b: int) -> bool:
        j = a
        while j < b:
            tok = self.ts.tokens[j]
            if tok.kind == "open":
                m = self.ts.match_of(j)
                if m is None or m > b:
                    return False
                j = m + 1
                continue
            if self.ts.text(tok) == ",":
                return True
            j += 1
        return False

    def _closure(self, start: int) -> Node:
        is_move = self.eat("move")
        params: list[str] = []
        tok = self._tok()
        if tok is None:
            raise ParseBail()
        first = self.ts.text(tok)
        if first == "|" and self.peek_op() == "||":
            self.bump()
            self.bump()
        else:
            self.expect("|")
            while self.peek_text() != "|":
                pat = self.pattern()
                for name, _m in pat_bound_names(pat):
                    params.append(name)
                if self.eat(":"):
                    b = self._scan_type_until({",", "|"})
                    self.i = self.ts.skip_trivia(b)
                if not self.eat(","):
                    break
            self.expect("|")
        # optional -> type
        if self.peek_op() == "->":
            self.bump_op("->")
            b = self._scan_type_until({"{"})
            self.i = self.ts.skip_trivia(b)
            body: Node = self.block()
        else:
            body = self.expression()
        return ClosureExpr(start, body.end, params, body, is_move)

    def _if_expr(self, start: int, no_struct: bool) -> IfExpr:
        self.expect("if")
        is_let = self.eat("let")
        pat = None
        if is_let:
            pat = self.pattern()
            self.expect("=")
        cond = self.expression(no_struct=True)
        then = self.block()
        orelse: Node | None = None
        if self.peek_text() == "else":
            self.bump()
            if self.peek_text() == "if":
                orelse = self._if_expr(self._tok().start, no_struct)
            else:
                orelse = self.block()
        end = orelse.end if orelse else then.end
        return IfExpr(start, end, cond, then, orelse, is_let, pat)

    def _match_expr(self, start: int) -> MatchExpr:
        self.expect("match")
        scrut = self.expression(no_struct=True)
        tok = self._tok()
        if tok is None or self.ts.text(tok) != "{":
            raise ParseBail()
        m = self.ts.match_of(self.i)
        if m is None:
            raise ParseBail()
        inner = Parser(self.ts, self.i + 1, m)
        arms: list[Arm] = []
        while not inner.at_end():
            astart_tok = inner._tok()
            pat = inner.pattern()
            while inner.peek_text() == "|":  # or-patterns: keep first, skip rest
                inner.bump()
                inner.pattern()
            guard = None
            if inner.peek_text() == "if":
                inner.bump()
                guard = inner.expression(no_struct=True)
            if inner.peek_op() != "=>":
                raise ParseBail()
            inner.bump_op("=>")
            body = inner.expression()
            arms.append(Arm(astart_tok.start, body.end, pat, guard, body))
            inner.eat(",")
        end = self.ts.tokens[m].end
        self.i = self.ts.skip_trivia(m + 1)
        return MatchExpr(start, end, scrut, arms)

    def _path_like(self, start: int, no_struct: bool) -> Node:
        segments: list[str] = []
        end = self._tok().end
        tok = self.bump()
        segments.append(self.ts.text(tok))
        while self.peek_op() == "::":
            save = self.i
            self.bump_op("::")
            nxt = self._tok()
            if nxt is None:
                raise ParseBail()
            nt = self.ts.text(nxt)
            if nt == "<":  # turbofish
                close = self._matching_angle(self.i)
                end = self.ts.tokens[close].end
                self.i = self.ts.skip_trivia(close + 1)
                continue
            if nxt.kind != "ident":
                self.i = save
                break
            segments.append(nt)
            end = nxt.end
            self.bump()
        path_text = "::".join(segments)
        nt = self.peek_text()
        if nt == "!":
            # macro call  name!(...) / name![...] / name!{...}
            self.bump()
            dtok = self._tok()
            if dtok is None or dtok.kind != "open":
                raise ParseBail()
            m = self.ts.match_of(self.i)
            if m is None:
                raise ParseBail()
            raw = self.ts.slice(dtok.start, self.ts.tokens[m].end)
            args: list[Node] = []
            try:
                args = self._comma_exprs(self.i + 1, m)
            except ParseBail:
                args = []
            mend = self.ts.tokens[m].end
            self.i = self.ts.skip_trivia(m + 1)
            return MacroCall(start, mend, path_text, args, raw)
        if nt == "{" and not no_struct and self._looks_like_struct_lit():
            m = self.ts.match_of(self.i)
            if m is None:
                raise ParseBail()
            inner = Parser(self.ts, self.i + 1, m)
            fields: list[tuple[str, Node | None]] = []
            rest: Node | None = None
            while not inner.at_end():
                if inner.peek_op() == "..":
                    inner.bump_op("..")
                    rest = inner.expression()
                    break
                ftok = inner._tok()
                if ftok is None or ftok.kind not in ("ident", "num"):
                    raise ParseBail()
                fname = inner.ts.text(ftok)
                inner.bump()
                if inner.eat(":"):
                    fields.append((fname, inner.expression()))
                else:
                    fields.append((fname, None))
                if not inner.eat(","):
                    break
            end = self.ts.tokens[m].end
            self.i = self.ts.skip_trivia(m + 1)
            return StructExpr(start, end, path_text, fields, rest)
        return PathExpr(start, end, segments, path_text)

    def _looks_like_struct_lit(self) -> bool:
        """Disambiguate `Path { .. }` struct literal from a following block."""
        m = self.ts.match_of(self.i)
        if m is None:
            return False
        j = self.ts.skip_trivia(self.i + 1)
        if j >= m:
            return True  # `S {}`
        tok = self.ts.tokens[j]
        if tok.kind != "ident" and self.ts.text(tok) != "..":
            return self.ts.text(tok) == ".."
        k = self.ts.skip_trivia(j + 1)
        if k >= m:
            return True  # `S { x }`
        nt = self.ts.text(self.ts.tokens[k])
        return nt in (":", ",", "}")


# --------------------------------------------------------------------------
# Walking helpers


def walk(node: Node):
    """Yield every AST node in evaluation-ish order (pre-order)."""
    stack = [node]
    while stack:
        n = stack.pop()
        if n is None:
            continue
        yield n
        stack.extend(reversed(list(children(n))))


def children(n: Node):
    if isinstance(n, (Lit, PathExpr, Opaque, EmptyStmt, ItemStmt, ContinueExpr)):
        return
    if isinstance(n, Unary):
        yield n.operand
    elif isinstance(n, RefExpr):
        yield n.operand
    elif isinstance(n, Binary):
        yield n.left
        yield n.right
    elif isinstance(n, Assign):
        yield n.target
        yield n.value
    elif isinstance(n, Call):
        yield n.callee
        yield from n.args
    elif isinstance(n, MethodCall):
        yield n.receiver
        yield from n.args
    elif isinstance(n, FieldAccess):
        yield n.receiver
    elif isinstance(n, IndexExpr):
        yield n.receiver
        yield n.index
    elif isinstance(n, TupleExpr):
        yield from n.items
    elif isinstance(n, ArrayExpr):
        if n.repeat:
            yield n.repeat[0]
            yield n.repeat[1]
        yield from n.items
    elif isinstance(n, StructExpr):
        for _, v in n.fields:
            if v is not None:
                yield v
        if n.rest is not None:
            yield n.rest
    elif isinstance(n, RangeExpr):
        if n.lo:
            yield n.lo
        if n.hi:
            yield n.hi
    elif isinstance(n, CastExpr):
        yield n.operand
    elif isinstance(n, (AwaitExpr, TryExpr)):
        yield n.operand
    elif isinstance(n, Block):
        yield from n.stmts
    elif isinstance(n, IfExpr):
        yield n.cond
        yield n.then
        if n.orelse is not None:
            yield n.orelse
    elif isinstance(n, WhileExpr):
        yield n.cond
        yield n.body
    elif isinstance(n, LoopExpr):
        yield n.body
    elif isinstance(n, ForExpr):
        yield n.iterable
        yield n.body
    elif isinstance(n, MatchExpr):
        yield n.scrutinee
        yield from n.arms
    elif isinstance(n, Arm):
        if n.guard is not None:
            yield n.guard
        yield n.body
    elif isinstance(n, (BreakExpr, ReturnExpr)):
        if n.value is not None:
            yield n.value
    elif isinstance(n, ClosureExpr):
        yield n.body
    elif isinstance(n, MacroCall):
        yield from n.args
    elif isinstance(n, LetStmt):
        if n.init is not None:
            yield n.init
        if n.else_block is not None:
            yield n.else_block
    elif isinstance(n, ExprStmt):
        yield n.expr
