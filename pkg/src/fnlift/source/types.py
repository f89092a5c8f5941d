"""Type descriptors: a light structural view over source type text.

The tool never invents types. A descriptor either reflects tokens that were
written in the file (or the std catalog), or it is the explicit Unknown
sentinel, which downstream stages turn into an inference failure rather than
a `_` placeholder in generated code.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lex import TokenStream


@dataclass(frozen=True)
class TypeDesc:
    text: str
    kind: str = "path"  # path ref tuple array slice dyn impl never infer fn unknown
    mutable: bool = False
    lifetime: str | None = None
    inner: tuple["TypeDesc", ...] = ()
    name: str = ""  # last path segment, e.g. Vec, i32
    array_len: int | None = None

    @property
    def is_unknown(self) -> bool:
        return self.kind == "unknown"

    @property
    def is_ref(self) -> bool:
        return self.kind == "ref"

    @property
    def is_mut_ref(self) -> bool:
        return self.kind == "ref" and self.mutable

    def peel_refs(self) -> "TypeDesc":
        t = self
        while t.kind == "ref" and t.inner:
            t = t.inner[0]
        return t

    def mentions(self, ident: str) -> bool:
        import re

        return re.search(r"\b%s\b" % re.escape(ident), self.text) is not None

    def __str__(self) -> str:  # pragma: no cover - debugging aid
        return self.text


UNKNOWN = TypeDesc(text="{unknown}", kind="unknown")
UNIT = TypeDesc(text="()", kind="tuple", inner=())

_TIGHT_BEFORE = {",", ";", ".", ")", "]", ">", "?", "!", ":"}
_TIGHT_AFTER = {".", "(", "[", "<", "&", "#", "!", "?", "$"}
_WORDY = {"ident", "num", "lifetime", "str", "char"}


def render_tokens(ts: TokenStream, t0: int, t1: int) -> str:
    """Re-render a token window with canonical spacing (rustfmt-lite).

    Used for type text, bounds and signatures we copy into generated code.
    Comments and original whitespace are dropped.
    """
    out: list[str] = []
    prev_text = ""
    prev_kind = ""
    i = t0
    toks = ts.tokens
    while i < t1:
        tok = toks[i]
        if tok.kind in ("ws", "comment"):
            i += 1
            continue
        text = ts.text(tok)
        if out:
            sep = " "
            if text in _TIGHT_BEFORE:
                sep = ""
            elif prev_text in _TIGHT_AFTER:
                sep = ""
            elif prev_text == "::" or text == "::":
                sep = ""
            elif prev_text == ">" and text in (">", "("):
                sep = ""
            elif text == "(" and (prev_kind in _WORDY or prev_text == ")"):
                sep = ""  # call-like adjacency: foo( / )(
            elif text == "[" and (prev_kind in _WORDY or prev_text in (")", "]")):
                sep = ""
            elif text == "<" and prev_kind in ("ident",):
                sep = ""  # generic args hug the path segment
            elif prev_text == ":" and prev_kind == "punct":
                sep = " "
            elif text == "'" or prev_text == "'":
                sep = ""
            if prev_text == "," :
                sep = " "
            if prev_text == "&":
                sep = ""
            out.append(sep + text if sep else text)
        else:
            out.append(text)
        # '::' arrives as two ':' tokens; fuse for the spacing rules above
        if text == ":" and prev_text == ":":
            prev_text = "::"
        else:
            prev_text = text
        prev_kind = tok.kind
        i += 1
    s = "".join(out)
    # two-token operators reassemble without inner spaces
    for frag, whole in ((": :", "::"), ("- >", "->"), ("= >", "=>"), (". .", ".."), (": <", ":<")):
        s = s.replace(frag, whole)
    return s


def parse_type(ts: TokenStream, t0: int, t1: int) -> TypeDesc:
    """Parse the token window as one type. Tolerant: anything surprising
    still yields a descriptor with the rendered text and kind 'path'."""
    p = _TypeParser(ts, t0, t1)
    try:
        desc = p.parse()
        if p.peek() is not None:  # trailing tokens: keep full text, best-effort kind
            return TypeDesc(text=render_tokens(ts, t0, t1), kind=desc.kind, name=desc.name, inner=desc.inner)
        return desc
    except _Bail:
        text = render_tokens(ts, t0, t1)
        return TypeDesc(text=text, kind="path", name=text)


def parse_type_text(text: str) -> TypeDesc:
    from .lex import tokenize

    ts = tokenize(text.encode())
    return parse_type(ts, 0, len(ts.tokens))


class _Bail(Exception):
    pass


class _TypeParser:
    def __init__(self, ts: TokenStream, t0: int, t1: int):
        self.ts = ts
        self.t1 = t1
        self.i = ts.skip_trivia(t0)

    def peek(self) -> str | None:
        if self.i >= self.t1:
            return None
        return self.ts.text(self.ts.tokens[self.i])

    def kind(self) -> str | None:
        if self.i >= self.t1:
            return None
        return self.ts.tokens[self.i].kind

    def bump(self) -> str:
        t = self.peek()
        if t is None:
            raise _Bail()
        self.i = self.ts.skip_trivia(self.i + 1)
        return t

    def eat(self, text: str) -> bool:
        if self.peek() == text:
            self.bump()
            return True
        return False

    def span_text(self, a: int, b: int) -> str:
        return render_tokens(self.ts, a, b)

    def parse(self) -> TypeDesc:
        start = self.i
        t = self.peek()
        if t is None:
            raise _Bail()
        if t == "&":
            self.bump()
            lt = None
            if self.kind() == "lifetime":
                lt = self.bump()
            is_mut = self.eat("mut")
            inner = self.parse()
            text = "&" + ((lt + " ") if lt else "") + ("mut " if is_mut else "") + inner.text
            return TypeDesc(text=text, kind="ref", mutable=is_mut, lifetime=lt, inner=(inner,))
        if t == "(":
            close = self.ts.match_of(self.i)
            if close is None:
                raise _Bail()
            items, a = [], self.ts.skip_trivia(self.i + 1)
            depth_end = close
            while a < depth_end:
                b = self._find_comma(a, depth_end)
                items.append(parse_type(self.ts, a, b))
                a = self.ts.skip_trivia(b + 1)
            self.i = self.ts.skip_trivia(close + 1)
            if len(items) == 1:
                return items[0]  # parenthesized type
            text = "(" + ", ".join(it.text for it in items) + ")"
            return TypeDesc(text=text, kind="tuple", inner=tuple(items))
        if t == "[":
            close = self.ts.match_of(self.i)
            if close is None:
                raise _Bail()
            a = self.ts.skip_trivia(self.i + 1)
            semi = self._find_at_level(";", a, close)
            if semi is None:
                elem = parse_type(self.ts, a, close)
                self.i = self.ts.skip_trivia(close + 1)
                return TypeDesc(text="[" + elem.text + "]", kind="slice", inner=(elem,))
            elem = parse_type(self.ts, a, semi)
            len_text = render_tokens(self.ts, semi + 1, close)
            self.i = self.ts.skip_trivia(close + 1)
            try:
                n = int(len_text, 0)
            except ValueError:
                n = None
            return TypeDesc(
                text="[" + elem.text + "; " + len_text + "]",
                kind="array",
                inner=(elem,),
                array_len=n,
            )
        if t == "!":
            self.bump()
            return TypeDesc(text="!", kind="never")
        if t == "_":
            self.bump()
            return TypeDesc(text="_", kind="infer")
        if t == "*":  # raw pointer: record text only
            self.bump()
            self.eat("const") or self.eat("mut")
            inner = self.parse()
            return TypeDesc(text=self.span_text(start, self.i), kind="path", name="*")
        if t in ("dyn", "impl"):
            self.bump()
            bound_start = self.i
            self._skip_bounds()
            text = ("dyn " if t == "dyn" else "impl ") + self.span_text(bound_start, self.i)
            return TypeDesc(text=text, kind=("dyn" if t == "dyn" else "impl"))
        if t == "fn" or (t == "for" and True):
            # fn pointers and for<'a> fn(..); keep as opaque fn type
            self._skip_bounds()
            return TypeDesc(text=self.span_text(start, self.i), kind="fn")
        if self.kind() in ("ident",):
            return self._parse_path(start)
        raise _Bail()

    def _parse_path(self, start: int) -> TypeDesc:
        name = self.bump()
        while self.peek() == ":" and self._next_is_colon():
            self.bump()
            self.bump()
            name = self.bump()
        args: tuple[TypeDesc, ...] = ()
        if self.peek() == "<":
            open_i = self.i
            close_i = self._matching_angle(open_i)
            a = self.ts.skip_trivia(open_i + 1)
            parts: list[TypeDesc] = []
            while a < close_i:
                b = self._find_comma(a, close_i, angle_aware=True)
                seg = self.ts.tokens[a]
                if seg.kind == "lifetime":
                    a = self.ts.skip_trivia(b + 1)
                    continue
                parts.append(parse_type(self.ts, a, b))
                a = self.ts.skip_trivia(b + 1)
            args = tuple(parts)
            self.i = self.ts.skip_trivia(close_i + 1)
        text = self.span_text(start, self.i)
        return TypeDesc(text=text, kind="path", name=name, inner=args)

    def _next_is_colon(self) -> bool:
        j = self.ts.skip_trivia(self.i + 1)
        return j < self.t1 and self.ts.text(self.ts.tokens[j]) == ":" and self.ts.tokens[j].start == self.ts.tokens[self.i].end

    def _matching_angle(self, open_i: int) -> int:
        depth = 0
        j = open_i
        while j < self.t1:
            tok = self.ts.tokens[j]
            if tok.kind == "open":
                m = self.ts.match_of(j)
                if m is None:
                    raise _Bail()
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
        raise _Bail()

    def _find_comma(self, a: int, end: int, angle_aware: bool = False) -> int:
        depth = 0
        j = a
        while j < end:
            tok = self.ts.tokens[j]
            if tok.kind == "open":
                m = self.ts.match_of(j)
                if m is None or m > end:
                    return end
                j = m + 1
                continue
            if self.ts.arrow_at(j):
                j += 2
                continue
            t = self.ts.text(tok)
            if angle_aware:
                if t == "<":
                    depth += 1
                elif t == ">":
                    depth -= 1
            if t == "," and depth <= 0:
                return j
            j += 1
        return end

    def _find_at_level(self, text: str, a: int, end: int) -> int | None:
        j = a
        while j < end:
            tok = self.ts.tokens[j]
            if tok.kind == "open":
                m = self.ts.match_of(j)
                if m is None or m > end:
                    return None
                j = m + 1
                continue
            if self.ts.text(tok) == text:
                return j
            j += 1
        return None

    def _skip_bounds(self) -> None:
        """Consume a bound list: Path<..> (+ Path<..>)* including for<'a> and
        parenthesized Fn(..) -> Ret sugar. Stops at , ; ) > = { where ..."""
        stop = {",", ";", ")", "{", "=", "where"}
        depth = 0
        while self.i < self.t1:
            t = self.peek()
            if t is None:
                return
            k = self.kind()
            if k == "open":
                m = self.ts.match_of(self.i)
                if m is None:
                    raise _Bail()
                self.i = self.ts.skip_trivia(m + 1)
                continue
            if self.ts.arrow_at(self.i):
                self.i += 2
                self.i = self.ts.skip_trivia(self.i)
                continue
            if t == "<":
                depth += 1
            elif t == ">":
                if depth == 0:
                    return
                depth -= 1
            elif depth == 0 and t in stop:
                return
            self.bump()
