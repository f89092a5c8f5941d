"""Item-level view of a source file: functions, structs, enums, impls.

The item scan is a single cheap pass that records header spans and jumps over
bodies; function bodies are parsed into statements/AST lazily and cached, so
parsing a large file costs little until a selection lands in it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .expr import Block, Parser, ParseBail
from .lex import KEYWORDS, TokenStream, tokenize
from .types import TypeDesc, parse_type, render_tokens

_QUALIFIERS = ("pub", "const", "async", "unsafe", "extern", "default")


@dataclass
class GenericParam:
    name: str
    kind: str  # 'type' | 'lifetime' | 'const'
    bounds: list[str] = field(default_factory=list)  # rendered bound text, HRTB kept verbatim


@dataclass
class Param:
    name: str | None  # None for non-trivial patterns
    pat_text: str
    ty: TypeDesc
    span: tuple[int, int]


@dataclass
class FnItem:
    name: str
    start: int  # first qualifier / `fn` keyword byte
    end: int  # past closing `}` or `;`
    name_span: tuple[int, int]
    sig_end: int  # byte where the signature ends (before body `{`)
    generics_span: tuple[int, int] | None  # incl. angle brackets
    params_span: tuple[int, int]  # incl. parens
    ret_span: tuple[int, int] | None  # the type tokens after `->`
    where_span: tuple[int, int] | None
    body_span: tuple[int, int] | None  # incl. braces
    qualifiers: tuple[str, ...]
    generics: list[GenericParam]
    where_preds: list[str]
    params: list[Param]
    receiver: str | None  # 'self' | '&self' | '&mut self' | "&'a self" | "&'a mut self"
    ret_ty: TypeDesc | None
    impl_index: int | None  # index into SyntaxTree.impls
    body_tokens: tuple[int, int] | None  # token window inside braces

    @property
    def is_async(self) -> bool:
        return "async" in self.qualifiers

    @property
    def is_const(self) -> bool:
        return "const" in self.qualifiers


@dataclass
class StructItem:
    name: str
    start: int
    end: int
    fields: list[tuple[str, TypeDesc]]
    generics_text: str
    is_tuple: bool = False


@dataclass
class EnumItem:
    name: str
    start: int
    end: int
    variants: list[tuple[str, list[TypeDesc]]]


@dataclass
class ImplItem:
    self_ty: str
    trait_name: str | None
    start: int
    end: int
    body_span: tuple[int, int]
    indent: str = ""


@dataclass
class Diagnostic:
    message: str
    start: int
    end: int


class SyntaxTree:
    """Lossless syntax for one file. `serialize()` reproduces the text."""

    def __init__(self, data: bytes):
        self.data = data
        self.stream: TokenStream = tokenize(data)
        self.fns: list[FnItem] = []
        self.structs: list[StructItem] = []
        self.enums: list[EnumItem] = []
        self.impls: list[ImplItem] = []
        self.module_names: set[str] = set()
        self.diagnostics: list[Diagnostic] = []
        self._blocks: dict[tuple[int, int], Block] = {}
        self._scan_items()

    # -- invariant: byte-for-byte round trip ---------------------------------

    def serialize(self) -> bytes:
        return b"".join(self.data[t.start : t.end] for t in self.stream.tokens)

    # -- lookups --------------------------------------------------------------

    def fn_at(self, offset: int) -> FnItem | None:
        """Innermost function whose body contains the byte offset."""
        best = None
        for fn in self.fns:
            if fn.body_span and fn.body_span[0] <= offset < fn.body_span[1]:
                if best is None or fn.body_span[0] >= best.body_span[0]:
                    best = fn
        return best

    def fn_named(self, name: str) -> FnItem | None:
        for fn in self.fns:
            if fn.name == name:
                return fn
        return None

    def struct_named(self, name: str) -> StructItem | None:
        for s in self.structs:
            if s.name == name:
                return s
        return None

    def body_block(self, fn: FnItem) -> Block | None:
        """Parse (and cache) the function body into statements."""
        if fn.body_tokens is None:
            return None
        key = fn.body_tokens
        blk = self._blocks.get(key)
        if blk is None:
            t0, t1 = key
            parser = Parser(self.stream, t0, t1)
            try:
                stmts = parser.statements()
            except ParseBail:
                stmts = []
                self.diagnostics.append(Diagnostic("unparsable function body", *fn.body_span))
            blk = Block(fn.body_span[0], fn.body_span[1], stmts)
            self._blocks[key] = blk
        return blk

    # -- item scan -------------------------------------------------------------

    def _scan_items(self) -> None:
        ts = self.stream
        toks = ts.tokens
        n = len(toks)
        i = 0
        # stack of (kind, inner_end_token, impl_index) for impl/mod recursion
        scopes: list[tuple[str, int, int | None]] = []
        while i < n:
            while scopes and i >= scopes[-1][1]:
                scopes.pop()
            if ts.is_trivia(i):
                i += 1
                continue
            tok = toks[i]
            t = ts.text(tok)
            if tok.kind == "ident":
                if t == "fn" or (t in _QUALIFIERS and self._leads_to_fn(i)):
                    impl_idx = None
                    for kind, _e, idx in reversed(scopes):
                        if kind == "impl":
                            impl_idx = idx
                            break
                    i = self._parse_fn(i, impl_idx)
                    continue
                if t == "struct":
                    i = self._parse_struct(i)
                    continue
                if t == "enum":
                    i = self._parse_enum(i)
                    continue
                if t == "impl":
                    i = self._parse_impl_header(i, scopes)
                    continue
                if t == "mod":
                    j = self._skip_to_body_or_semi(i)
                    if j is not None and toks[j].kind == "open":
                        m = ts.match_of(j)
                        name = self._name_after(i)
                        if name:
                            self.module_names.add(name)
                        if m is not None:
                            scopes.append(("mod", m, None))
                            i = j + 1
                            continue
                    i = (j + 1) if j is not None else i + 1
                    continue
                if t in ("use", "static", "type", "trait", "union", "macro_rules"):
                    name = self._name_after(i)
                    if name:
                        self.module_names.add(name)
                    j = self._skip_to_body_or_semi(i)
                    if j is None:
                        i += 1
                        continue
                    if toks[j].kind == "open":
                        m = ts.match_of(j)
                        i = (m + 1) if m is not None else j + 1
                    else:
                        i = j + 1
                    continue
                if t == "const":  # const item (not const fn; that matched above)
                    name = self._name_after(i)
                    if name:
                        self.module_names.add(name)
                    j = self._skip_to_body_or_semi(i)
                    i = (j + 1) if j is not None else i + 1
                    continue
            if tok.kind == "open":
                m = ts.match_of(i)
                if m is None:
                    self.diagnostics.append(Diagnostic("unmatched delimiter", tok.start, tok.end))
                    i += 1
                    continue
                i = m + 1  # skip unknown grouped content
                continue
            if tok.kind == "close" and ts.match_of(i) is None:
                self.diagnostics.append(Diagnostic("unmatched delimiter", tok.start, tok.end))
            if tok.kind == "err":
                self.diagnostics.append(Diagnostic("unrecognized byte", tok.start, tok.end))
            i += 1

    def _leads_to_fn(self, i: int) -> bool:
        ts = self.stream
        j = i
        hops = 0
        while j < len(ts.tokens) and hops < 8:
            tok = ts.tokens[j]
            if ts.is_trivia(j):
                j += 1
                continue
            t = ts.text(tok)
            if t == "fn":
                return True
            if t in _QUALIFIERS:
                j += 1
                hops += 1
                continue
            if t == "(" and tok.kind == "open":  # pub(crate)
                m = ts.match_of(j)
                if m is None:
                    return False
                j = m + 1
                hops += 1
                continue
            if t == '"' or tok.kind == "str":  # extern "C"
                j += 1
                hops += 1
                continue
            return False
        return False

    def _name_after(self, i: int) -> str | None:
        ts = self.stream
        j = ts.skip_trivia(i + 1)
        if j < len(ts.tokens) and ts.tokens[j].kind == "ident":
            t = ts.text(ts.tokens[j])
            if t not in KEYWORDS:
                return t
        return None

    def _skip_to_body_or_semi(self, i: int) -> int | None:
        """Token index of the item's `{` or `;`, skipping nested groups."""
        ts = self.stream
        j = i
        n = len(ts.tokens)
        while j < n:
            tok = ts.tokens[j]
            if tok.kind == "open":
                if ts.text(tok) == "{":
                    return j
                m = ts.match_of(j)
                if m is None:
                    return None
                j = m + 1
                continue
            if ts.text(tok) == ";":
                return j
            j += 1
        return None

    # -- fn ---------------------------------------------------------------------

    def _parse_fn(self, i: int, impl_idx: int | None) -> int:
        ts = self.stream
        toks = ts.tokens
        n = len(toks)
        start_tok = i
        quals: list[str] = []
        j = i
        while j < n:
            if ts.is_trivia(j):
                j += 1
                continue
            t = ts.text(toks[j])
            if t == "fn":
                break
            if t in _QUALIFIERS:
                quals.append(t)
                j += 1
                continue
            if toks[j].kind in ("open", "str"):  # pub(crate) / extern "C"
                if toks[j].kind == "open":
                    m = ts.match_of(j)
                    j = (m + 1) if m is not None else j + 1
                else:
                    j += 1
                continue
            break
        if j >= n or ts.text(toks[j]) != "fn":
            return i + 1
        fn_kw = j
        j = ts.skip_trivia(j + 1)
        if j >= n or toks[j].kind != "ident":
            self.diagnostics.append(Diagnostic("fn without a name", toks[fn_kw].start, toks[fn_kw].end))
            return fn_kw + 1
        name_tok = j
        name = ts.text(toks[j])
        j = ts.skip_trivia(j + 1)

        generics_span = None
        generics: list[GenericParam] = []
        if j < n and ts.text(toks[j]) == "<":
            close = self._matching_angle(j)
            if close is None:
                self.diagnostics.append(Diagnostic("unterminated generics", toks[j].start, toks[j].end))
                return j + 1
            generics_span = (toks[j].start, toks[close].end)
            generics = self._parse_generic_params(j + 1, close)
            j = ts.skip_trivia(close + 1)

        if j >= n or ts.text(toks[j]) != "(":
            self.diagnostics.append(Diagnostic("fn without parameter list", toks[name_tok].start, toks[name_tok].end))
            return name_tok + 1
        paren_open = j
        paren_close = ts.match_of(j)
        if paren_close is None:
            self.diagnostics.append(Diagnostic("unterminated parameter list", toks[j].start, toks[j].end))
            return j + 1
        params_span = (toks[paren_open].start, toks[paren_close].end)
        receiver, params = self._parse_params(paren_open + 1, paren_close)
        j = ts.skip_trivia(paren_close + 1)

        ret_span = None
        ret_ty = None
        if j + 1 < n and ts.text(toks[j]) == "-" and ts.text(toks[j + 1]) == ">":
            j = ts.skip_trivia(j + 2)
            a = j
            b = self._scan_type_end(j)
            ret_span = (toks[a].start, toks[b - 1].end) if b > a else None
            if ret_span:
                ret_ty = parse_type(ts, a, b)
            j = ts.skip_trivia(b)

        where_span = None
        where_preds: list[str] = []
        if j < n and ts.text(toks[j]) == "where":
            wstart = toks[j].start
            j = ts.skip_trivia(j + 1)
            a = j
            while j < n and ts.text(toks[j]) not in ("{", ";"):
                if toks[j].kind == "open":
                    m = ts.match_of(j)
                    if m is None:
                        break
                    j = m + 1
                    continue
                j += 1
            where_span = (wstart, toks[j - 1].end if j > a else wstart)
            where_preds = self._split_where_preds(a, j)

        body_span = None
        body_tokens = None
        end = toks[j - 1].end if j > 0 else toks[start_tok].end
        sig_end = end
        if j < n and ts.text(toks[j]) == "{":
            m = ts.match_of(j)
            if m is None:
                self.diagnostics.append(Diagnostic("unterminated fn body", toks[j].start, toks[j].end))
                m = n - 1
            body_span = (toks[j].start, toks[m].end)
            body_tokens = (j + 1, m)
            sig_end = toks[j].start
            end = toks[m].end
            next_i = m + 1
        elif j < n and ts.text(toks[j]) == ";":
            sig_end = toks[j].start
            end = toks[j].end
            next_i = j + 1
        else:
            next_i = j + 1

        self.fns.append(
            FnItem(
                name=name,
                start=toks[start_tok].start,
                end=end,
                name_span=(toks[name_tok].start, toks[name_tok].end),
                sig_end=sig_end,
                generics_span=generics_span,
                params_span=params_span,
                ret_span=ret_span,
                where_span=where_span,
                body_span=body_span,
                qualifiers=tuple(quals),
                generics=generics,
                where_preds=where_preds,
                params=params,
                receiver=receiver,
                ret_ty=ret_ty,
                impl_index=impl_idx,
                body_tokens=body_tokens,
            )
        )
        return next_i

    def _matching_angle(self, open_i: int) -> int | None:
        ts = self.stream
        depth = 0
        j = open_i
        while j < len(ts.tokens):
            tok = ts.tokens[j]
            if tok.kind == "open":
                m = ts.match_of(j)
                if m is None:
                    return None
                j = m + 1
                continue
            if ts.arrow_at(j):
                j += 2
                continue
            t = ts.text(tok)
            if t == "<":
                depth += 1
            elif t == ">":
                depth -= 1
                if depth == 0:
                    return j
            j += 1
        return None

    def _parse_generic_params(self, a: int, close: int) -> list[GenericParam]:
        ts = self.stream
        out: list[GenericParam] = []
        j = ts.skip_trivia(a)
        while j < close:
            tok = ts.tokens[j]
            t = ts.text(tok)
            if tok.kind == "lifetime":
                out.append(GenericParam(t, "lifetime"))
                j = self._skip_generic_entry(j, close)
                continue
            if t == "const":
                j2 = ts.skip_trivia(j + 1)
                cname = ts.text(ts.tokens[j2]) if j2 < close else "?"
                out.append(GenericParam(cname, "const"))
                j = self._skip_generic_entry(j, close)
                continue
            if tok.kind == "ident":
                name = t
                j2 = ts.skip_trivia(j + 1)
                bounds: list[str] = []
                if j2 < close and ts.text(ts.tokens[j2]) == ":":
                    bstart = ts.skip_trivia(j2 + 1)
                    bend = self._skip_generic_entry(j, close)
                    bounds = self._split_bounds(bstart, bend)
                    j = bend
                else:
                    j = self._skip_generic_entry(j, close)
                out.append(GenericParam(name, "type", bounds))
                continue
            j += 1
        return out

    def _skip_generic_entry(self, j: int, close: int) -> int:
        """Advance past one generic parameter entry, to the comma or close."""
        ts = self.stream
        depth = 0
        while j < close:
            tok = ts.tokens[j]
            if tok.kind == "open":
                m = ts.match_of(j)
                if m is None:
                    return close
                j = m + 1
                continue
            if ts.arrow_at(j):
                j += 2
                continue
            t = ts.text(tok)
            if t == "<":
                depth += 1
            elif t == ">":
                depth -= 1
            elif t == "," and depth == 0:
                return ts.skip_trivia(j + 1)
            j += 1
        return close

    def _split_bounds(self, a: int, b: int) -> list[str]:
        """Split `Bound + Bound + ...`, keeping each bound's text verbatim
        (HRTB `for<'a> ...` included)."""
        ts = self.stream
        out = []
        j = ts.skip_trivia(a)
        seg_start = j
        depth = 0
        while j < b:
            tok = ts.tokens[j]
            if tok.kind == "open":
                m = ts.match_of(j)
                if m is None or m > b:
                    break
                j = m + 1
                continue
            if ts.arrow_at(j):
                j += 2
                continue
            t = ts.text(tok)
            if t == "<":
                depth += 1
            elif t == ">":
                depth -= 1
            elif t == "+" and depth == 0:
                if j > seg_start:
                    out.append(render_tokens(ts, seg_start, j))
                seg_start = ts.skip_trivia(j + 1)
            elif t == "," and depth == 0:
                break
            j += 1
        if seg_start < j:
            out.append(render_tokens(ts, seg_start, min(j, b)))
        return [s for s in out if s]

    def _split_where_preds(self, a: int, b: int) -> list[str]:
        ts = self.stream
        out = []
        j = a
        seg_start = a
        depth = 0
        while j < b:
            tok = ts.tokens[j]
            if tok.kind == "open":
                m = ts.match_of(j)
                if m is None or m > b:
                    break
                j = m + 1
                continue
            if ts.arrow_at(j):
                j += 2
                continue
            t = ts.text(tok)
            if t == "<":
                depth += 1
            elif t == ">":
                depth -= 1
            elif t == "," and depth == 0:
                if j > seg_start:
                    out.append(render_tokens(ts, seg_start, j))
                seg_start = ts.skip_trivia(j + 1)
            j += 1
        if seg_start < b:
            text = render_tokens(ts, seg_start, b)
            if text:
                out.append(text)
        return out

    def _scan_type_end(self, j: int) -> int:
        ts = self.stream
        n = len(ts.tokens)
        depth = 0
        while j < n:
            tok = ts.tokens[j]
            if tok.kind == "open":
                if ts.text(tok) == "{" and depth == 0:
                    return j
                m = ts.match_of(j)
                if m is None:
                    return j
                j = m + 1
                continue
            if ts.arrow_at(j):
                j += 2
                continue
            t = ts.text(tok)
            if t == "<":
                depth += 1
            elif t == ">":
                depth -= 1
            elif depth == 0 and t in (";", "where"):
                return j
            j += 1
        return j

    def _parse_params(self, a: int, close: int) -> tuple[str | None, list[Param]]:
        ts = self.stream
        receiver = None
        params: list[Param] = []
        j = ts.skip_trivia(a)
        while j < close:
            entry_start = j
            entry_end = self._find_comma(j, close)
            receiver_candidate = self._try_receiver(entry_start, entry_end)
            if receiver_candidate is not None and not params and receiver is None:
                receiver = receiver_candidate
            else:
                colon = self._find_colon(entry_start, entry_end)
                if colon is not None:
                    pat_text = render_tokens(ts, entry_start, colon)
                    ty = parse_type(ts, ts.skip_trivia(colon + 1), entry_end)
                    name = None
                    bare = pat_text.replace("mut ", "").strip()
                    if bare.isidentifier():
                        name = bare
                    params.append(
                        Param(name, pat_text, ty, (ts.tokens[entry_start].start, ts.tokens[entry_end - 1].end))
                    )
            j = ts.skip_trivia(entry_end + 1)
        return receiver, params

    def _try_receiver(self, a: int, b: int) -> str | None:
        ts = self.stream
        texts = [ts.text(ts.tokens[k]) for k in range(a, b) if not ts.is_trivia(k)]
        if "self" in texts and ":" not in texts:
            return render_tokens(ts, a, b)
        return None

    def _find_comma(self, a: int, end: int) -> int:
        ts = self.stream
        j = a
        depth = 0
        while j < end:
            tok = ts.tokens[j]
            if tok.kind == "open":
                m = ts.match_of(j)
                if m is None or m > end:
                    return end
                j = m + 1
                continue
            if ts.arrow_at(j):
                j += 2
                continue
            t = ts.text(tok)
            if t == "<":
                depth += 1
            elif t == ">":
                depth -= 1
            elif t == "," and depth == 0:
                return j
            j += 1
        return end

    def _find_colon(self, a: int, end: int) -> int | None:
        ts = self.stream
        j = a
        while j < end:
            tok = ts.tokens[j]
            if tok.kind == "open":
                m = ts.match_of(j)
                if m is None or m > end:
                    return None
                j = m + 1
                continue
            if ts.text(tok) == ":":
                nxt = j + 1
                if nxt < end and ts.text(ts.tokens[nxt]) == ":" and ts.tokens[nxt].start == tok.end:
                    j = nxt + 1  # `::` path separator
                    continue
                return j
            j += 1
        return None

    # -- struct / enum / impl ---------------------------------------------------

    def _parse_struct(self, i: int) -> int:
        ts = self.stream
        toks = ts.tokens
        name = self._name_after(i) or ""
        if name:
            self.module_names.add(name)
        j = self._skip_to_body_or_semi(i)
        if j is None:
            return i + 1
        start = toks[i].start
        generics_text = ""
        gi = ts.skip_trivia(i + 1)
        gi = ts.skip_trivia(gi + 1)
        if gi < len(toks) and ts.text(toks[gi]) == "<":
            close = self._matching_angle(gi)
            if close is not None:
                generics_text = render_tokens(ts, gi, close + 1)
        fields: list[tuple[str, TypeDesc]] = []
        is_tuple = False
        if toks[j].kind == "open" and ts.text(toks[j]) == "{":
            m = ts.match_of(j)
            if m is None:
                return j + 1
            a = ts.skip_trivia(j + 1)
            while a < m:
                b = self._find_comma(a, m)
                colon = self._find_colon(a, b)
                if colon is not None:
                    fname_idx = colon - 1
                    while fname_idx > a and ts.is_trivia(fname_idx):
                        fname_idx -= 1
                    fname = ts.text(toks[fname_idx])
                    fields.append((fname, parse_type(ts, ts.skip_trivia(colon + 1), b)))
                a = ts.skip_trivia(b + 1)
            end = toks[m].end
            self.structs.append(StructItem(name, start, end, fields, generics_text))
            return m + 1
        end = toks[j].end
        self.structs.append(StructItem(name, start, end, fields, generics_text, is_tuple=True))
        return j + 1

    def _parse_enum(self, i: int) -> int:
        ts = self.stream
        toks = ts.tokens
        name = self._name_after(i) or ""
        if name:
            self.module_names.add(name)
        j = self._skip_to_body_or_semi(i)
        if j is None or ts.text(toks[j]) != "{":
            return (j + 1) if j is not None else i + 1
        m = ts.match_of(j)
        if m is None:
            return j + 1
        variants: list[tuple[str, list[TypeDesc]]] = []
        a = ts.skip_trivia(j + 1)
        while a < m:
            b = self._find_comma(a, m)
            vtok = toks[a]
            if vtok.kind == "ident":
                vname = ts.text(vtok)
                payload: list[TypeDesc] = []
                pj = ts.skip_trivia(a + 1)
                if pj < b and ts.text(toks[pj]) == "(":
                    pm = ts.match_of(pj)
                    if pm is not None and pm <= b:
                        x = ts.skip_trivia(pj + 1)
                        while x < pm:
                            y = self._find_comma(x, pm)
                            payload.append(parse_type(ts, x, y))
                            x = ts.skip_trivia(y + 1)
                variants.append((vname, payload))
            a = ts.skip_trivia(b + 1)
        self.enums.append(EnumItem(name, toks[i].start, toks[m].end, variants))
        return m + 1

    def _parse_impl_header(self, i: int, scopes: list) -> int:
        ts = self.stream
        toks = ts.tokens
        j = self._skip_to_body_or_semi(i)
        if j is None or ts.text(toks[j]) != "{":
            return (j + 1) if j is not None else i + 1
        m = ts.match_of(j)
        if m is None:
            return j + 1
        header = render_tokens(ts, i, j)
        trait_name = None
        self_ty = header[len("impl") :].strip()
        if self_ty.startswith("<"):
            depth = 0
            for idx, ch in enumerate(self_ty):
                if ch == "<":
                    depth += 1
                elif ch == ">":
                    depth -= 1
                    if depth == 0:
                        self_ty = self_ty[idx + 1 :].strip()
                        break
        if " for " in self_ty:
            trait_name, self_ty = self_ty.split(" for ", 1)
            trait_name = trait_name.strip()
            self_ty = self_ty.strip()
        line_start = self.data.rfind(b"\n", 0, toks[i].start) + 1
        indent = self.data[line_start : toks[i].start].decode("utf-8", "replace")
        idx = len(self.impls)
        self.impls.append(
            ImplItem(self_ty, trait_name, toks[i].start, toks[m].end, (toks[j].start, toks[m].end), indent)
        )
        scopes.append(("impl", m, idx))
        return j + 1
