"""Region analysis: scope-resolved occurrences, capture modes, dataflow out,
non-local control flow, and feature flags.

Liveness is syntactic by design: any resolved use of the same binding after
the region end counts as live. Over-approximation can only upgrade a capture
from by-value to a reference mode, which the downstream repairer tolerates.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..source.catalog import StdCatalog
from ..source.expr import (
    Arm,
    ArrayExpr,
    Assign,
    AwaitExpr,
    Binary,
    Block,
    BreakExpr,
    Call,
    CastExpr,
    ClosureExpr,
    ContinueExpr,
    EmptyStmt,
    ExprStmt,
    FieldAccess,
    ForExpr,
    IfExpr,
    IndexExpr,
    ItemStmt,
    LetStmt,
    Lit,
    LoopExpr,
    MacroCall,
    MatchExpr,
    MethodCall,
    Node,
    Opaque,
    PathExpr,
    RangeExpr,
    RefExpr,
    ReturnExpr,
    StructExpr,
    TryExpr,
    TupleExpr,
    Unary,
    WhileExpr,
    pat_bound_names,
)
from ..source.syntax import FnItem
from ..source.types import UNKNOWN, UNIT, TypeDesc, parse_type_text
from ..source.unit import SelectionRegion, SourceUnit
from .profile import CaptureInfo, Mode, NlcfKind, NlcfProfile, OutflowInfo, RegionProfile

_FMT_CAPTURE = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)(?::[^}]*)?\}")


@dataclass
class Binding:
    uid: int
    name: str
    kind: str  # param | self | let | for | closure | match
    mutable: bool
    ty_annot: TypeDesc | None
    decl_start: int
    init: Node | None = None
    occs: list["Occ"] = field(default_factory=list)


@dataclass
class Occ:
    binding: Binding
    start: int
    kind: str  # read | write | rw | borrow_mut | recv
    method: str | None = None
    recv_expr: Node | None = None
    # syntactic role drives the `*` rewrite for reference-mode captures:
    # 'plain' needs a deref, 'borrow' needs one behind the `&`,
    # 'recv' / 'member' / 'fmt' auto-deref and are left alone
    role: str = "plain"


class _Walker:
    """Collects scope-resolved identifier occurrences over a function body."""

    def __init__(self) -> None:
        self.scopes: list[dict[str, Binding]] = [{}]
        self.bindings: list[Binding] = []
        self.occs: list[Occ] = []
        self._uid = 0

    def bind(self, name: str, kind: str, mutable: bool, ty: TypeDesc | None, decl_start: int, init: Node | None = None) -> Binding:
        b = Binding(self._uid, name, kind, mutable, ty, decl_start, init)
        self._uid += 1
        self.bindings.append(b)
        self.scopes[-1][name] = b
        return b

    def resolve(self, name: str) -> Binding | None:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None

    def occ(self, name: str, start: int, kind: str, method: str | None = None, recv_expr: Node | None = None, role: str = "plain") -> None:
        b = self.resolve(name)
        if b is None:
            return
        o = Occ(b, start, kind, method, recv_expr, role)
        b.occs.append(o)
        self.occs.append(o)

    # -- traversal ----------------------------------------------------------

    def walk_stmts(self, stmts: list[Node]) -> None:
        for s in stmts:
            self.walk_stmt(s)

    def walk_stmt(self, s: Node) -> None:
        if isinstance(s, LetStmt):
            if s.init is not None:
                self.walk_expr(s.init)
            if s.else_block is not None:
                self.push()
                self.walk_stmts(s.else_block.stmts)
                self.pop()
            for name, is_mut in pat_bound_names(s.pat):
                self.bind(name, "let", is_mut, s.ty, s.start, s.init)
        elif isinstance(s, ExprStmt):
            self.walk_expr(s.expr)
        elif isinstance(s, (ItemStmt, EmptyStmt)):
            pass
        else:
            self.walk_expr(s)

    def push(self) -> None:
        self.scopes.append({})

    def pop(self) -> None:
        self.scopes.pop()

    def walk_expr(self, e: Node) -> None:
        if e is None:
            return
        if isinstance(e, PathExpr):
            if len(e.segments) == 1:
                self.occ(e.segments[0], e.start, "read")
            return
        if isinstance(e, Assign):
            self.walk_place(e.target, "write" if e.op == "=" else "rw")
            self.walk_expr(e.value)
            return
        if isinstance(e, RefExpr):
            base = _place_base(e.operand)
            if base is not None:
                kind = "borrow_mut" if e.mutable else "read"
                self.occ(base.segments[0], base.start, kind, role="borrow")
                self._walk_place_components(e.operand)
            else:
                self.walk_expr(e.operand)
            return
        if isinstance(e, MethodCall):
            base = _place_base(e.receiver)
            if base is not None:
                self.occ(base.segments[0], base.start, "recv", e.name, e.receiver, role="recv")
                self._walk_place_components(e.receiver)
            else:
                self.walk_expr(e.receiver)
            for a in e.args:
                self.walk_expr(a)
            return
        if isinstance(e, Block):
            self.push()
            self.walk_stmts(e.stmts)
            self.pop()
            return
        if isinstance(e, IfExpr):
            self.walk_expr(e.cond)
            self.push()
            if e.is_let and e.let_pat is not None:
                for name, is_mut in pat_bound_names(e.let_pat):
                    self.bind(name, "match", is_mut, None, e.start)
            self.walk_stmts(e.then.stmts)
            self.pop()
            if e.orelse is not None:
                self.walk_expr(e.orelse)
            return
        if isinstance(e, WhileExpr):
            self.walk_expr(e.cond)
            self.push()
            if e.is_let and e.let_pat is not None:
                for name, is_mut in pat_bound_names(e.let_pat):
                    self.bind(name, "match", is_mut, None, e.start)
            self.walk_stmts(e.body.stmts)
            self.pop()
            return
        if isinstance(e, ForExpr):
            self.walk_expr(e.iterable)
            self.push()
            for name, is_mut in pat_bound_names(e.pat):
                self.bind(name, "for", is_mut, None, e.start, e.iterable)
            self.walk_stmts(e.body.stmts)
            self.pop()
            return
        if isinstance(e, MatchExpr):
            self.walk_expr(e.scrutinee)
            for arm in e.arms:
                self.push()
                for name, is_mut in pat_bound_names(arm.pat):
                    self.bind(name, "match", is_mut, None, arm.start)
                if arm.guard is not None:
                    self.walk_expr(arm.guard)
                self.walk_expr(arm.body)
                self.pop()
            return
        if isinstance(e, ClosureExpr):
            self.push()
            for p in e.params:
                self.bind(p, "closure", False, None, e.start)
            self.walk_expr(e.body)
            self.pop()
            return
        if isinstance(e, MacroCall):
            for a in e.args:
                if isinstance(a, PathExpr) and len(a.segments) == 1:
                    self.occ(a.segments[0], a.start, "read", role="fmt")
                    continue
                self.walk_expr(a)
                if isinstance(a, Lit) and a.kind == "str":
                    for m in _FMT_CAPTURE.finditer(a.text):
                        self.occ(m.group(1), a.start, "read", role="fmt")
            if not e.args and e.raw:
                for m in re.finditer(r"[A-Za-z_][A-Za-z0-9_]*", e.raw):
                    self.occ(m.group(0), e.start, "read", role="fmt")
            return
        if isinstance(e, Opaque):
            for name, start, _end in e.idents:
                self.occ(name, start, "read")
            return
        if isinstance(e, (Lit, ContinueExpr, ItemStmt, EmptyStmt)):
            return
        if isinstance(e, Unary):
            self.walk_expr(e.operand)
            return
        if isinstance(e, Binary):
            self.walk_expr(e.left)
            self.walk_expr(e.right)
            return
        if isinstance(e, Call):
            # callee identifiers resolve like any other read; names that do
            # not resolve are item references and produce no occurrence
            self.walk_expr(e.callee)
            for a in e.args:
                self.walk_expr(a)
            return
        if isinstance(e, FieldAccess):
            base = _place_base(e.receiver)
            if base is not None:
                self.occ(base.segments[0], base.start, "read", role="member")
                self._walk_place_components(e.receiver)
            else:
                self.walk_expr(e.receiver)
            return
        if isinstance(e, IndexExpr):
            base = _place_base(e.receiver)
            if base is not None:
                self.occ(base.segments[0], base.start, "read", role="member")
                self._walk_place_components(e.receiver)
            else:
                self.walk_expr(e.receiver)
            self.walk_expr(e.index)
            return
        if isinstance(e, TupleExpr):
            for it in e.items:
                self.walk_expr(it)
            return
        if isinstance(e, ArrayExpr):
            if e.repeat:
                self.walk_expr(e.repeat[0])
                self.walk_expr(e.repeat[1])
            for it in e.items:
                self.walk_expr(it)
            return
        if isinstance(e, StructExpr):
            for fname, v in e.fields:
                if v is None:
                    self.occ(fname, e.start, "read")
                else:
                    self.walk_expr(v)
            if e.rest is not None:
                self.walk_expr(e.rest)
            return
        if isinstance(e, RangeExpr):
            if e.lo:
                self.walk_expr(e.lo)
            if e.hi:
                self.walk_expr(e.hi)
            return
        if isinstance(e, (CastExpr, AwaitExpr, TryExpr)):
            self.walk_expr(e.operand)
            return
        if isinstance(e, (BreakExpr, ReturnExpr)):
            if e.value is not None:
                self.walk_expr(e.value)
            return
        if isinstance(e, LoopExpr):
            self.push()
            self.walk_stmts(e.body.stmts)
            self.pop()
            return
        if isinstance(e, Arm):
            return

    def walk_place(self, target: Node, kind: str) -> None:
        base = _place_base(target)
        if base is not None:
            self.occ(base.segments[0], base.start, kind)
            self._walk_place_components(target)
        else:
            self.walk_expr(target)

    def _walk_place_components(self, place: Node) -> None:
        # index expressions and nested non-place parts still produce reads
        node = place
        while True:
            if isinstance(node, FieldAccess):
                node = node.receiver
            elif isinstance(node, IndexExpr):
                self.walk_expr(node.index)
                node = node.receiver
            elif isinstance(node, Unary) and node.op == "*":
                node = node.operand
            else:
                return


def _place_base(e: Node) -> PathExpr | None:
    """The root variable of a place expression chain, if it is one."""
    node = e
    while True:
        if isinstance(node, PathExpr):
            return node if len(node.segments) == 1 else None
        if isinstance(node, FieldAccess):
            node = node.receiver
        elif isinstance(node, IndexExpr):
            node = node.receiver
        elif isinstance(node, Unary) and node.op == "*":
            node = node.operand
        else:
            return None


# ---------------------------------------------------------------------------
# Expression type inference (three-tier: annotation > shape > catalog)

_INT_SUFFIX = re.compile(r"(i8|i16|i32|i64|i128|isize|u8|u16|u32|u64|u128|usize)$")
_FLOAT_SUFFIX = re.compile(r"(f32|f64)$")


class TypeInferer:
    def __init__(self, unit: SourceUnit, host: FnItem, catalog: StdCatalog, walker: _Walker):
        self.unit = unit
        self.host = host
        self.catalog = catalog
        self.walker = walker
        self._binding_memo: dict[int, TypeDesc] = {}
        self._in_progress: set[int] = set()
        self._bindings_by_occ_pos: dict[tuple[str, int], Binding] = {}
        for b in walker.bindings:
            for o in b.occs:
                self._bindings_by_occ_pos[(b.name, o.start)] = b

    # -- bindings -------------------------------------------------------------

    def binding_type(self, b: Binding) -> TypeDesc:
        if b.uid in self._binding_memo:
            return self._binding_memo[b.uid]
        if b.uid in self._in_progress:
            return UNKNOWN
        self._in_progress.add(b.uid)
        try:
            ty = self._binding_type_inner(b)
        finally:
            self._in_progress.discard(b.uid)
        self._binding_memo[b.uid] = ty
        return ty

    def _binding_type_inner(self, b: Binding) -> TypeDesc:
        if b.ty_annot is not None and b.ty_annot.kind != "infer":
            return b.ty_annot
        if b.kind == "self":
            impl = self.unit.syntax.impls[self.host.impl_index] if self.host.impl_index is not None else None
            if impl is None or self.host.receiver is None:
                return UNKNOWN
            recv = self.host.receiver
            if recv.strip() == "self":
                return parse_type_text(impl.self_ty)
            return parse_type_text(recv.replace("self", impl.self_ty))
        if b.kind == "for" and b.init is not None:
            return self._iterated_elem(b.init)
        if b.init is not None:
            return self.infer_expr(b.init)
        return UNKNOWN

    def _iterated_elem(self, iterable: Node) -> TypeDesc:
        if isinstance(iterable, RangeExpr):
            # a suffixed endpoint pins the type; unsuffixed literals default late
            for end in (iterable.lo, iterable.hi):
                if end is not None and not (isinstance(end, Lit) and not _INT_SUFFIX.search(end.text)):
                    t = self.infer_expr(end)
                    if t.kind == "path":
                        return t
            lo = iterable.lo or iterable.hi
            if lo is None:
                return UNKNOWN
            t = self.infer_expr(lo)
            return t if t.kind == "path" else UNKNOWN
        src = self.infer_expr(iterable)
        base = src.peel_refs()
        if base.kind == "array" or base.kind == "slice":
            elem = base.inner[0]
            return elem if src.kind != "ref" else TypeDesc("&" + elem.text, "ref", inner=(elem,))
        if base.name in ("Vec", "Iter") and base.inner:
            elem = base.inner[0]
            if base.name == "Iter" or src.kind == "ref":
                return TypeDesc("&" + elem.text, "ref", inner=(elem,))
            return elem
        return UNKNOWN

    # -- expressions ------------------------------------------------------------

    def infer_expr(self, e: Node) -> TypeDesc:
        if e is None:
            return UNKNOWN
        if isinstance(e, Lit):
            return self._lit_type(e)
        if isinstance(e, PathExpr):
            if len(e.segments) == 1:
                b = self._resolve_occ(e)
                return self.binding_type(b) if b is not None else UNKNOWN
            return UNKNOWN
        if isinstance(e, Binary):
            if e.op in ("==", "!=", "<", ">", "<=", ">=", "&&", "||"):
                return TypeDesc("bool", "path", name="bool")
            lt = self.infer_expr(e.left)
            return lt if not lt.is_unknown else self.infer_expr(e.right)
        if isinstance(e, Unary):
            if e.op == "!":
                t = self.infer_expr(e.operand)
                return t
            if e.op == "-":
                return self.infer_expr(e.operand)
            if e.op == "*":
                t = self.infer_expr(e.operand)
                return t.inner[0] if t.kind == "ref" and t.inner else UNKNOWN
            return UNKNOWN
        if isinstance(e, RefExpr):
            inner = self.infer_expr(e.operand)
            if inner.is_unknown:
                return UNKNOWN
            prefix = "&mut " if e.mutable else "&"
            return TypeDesc(prefix + inner.text, "ref", mutable=e.mutable, inner=(inner,))
        if isinstance(e, CastExpr):
            return e.ty
        if isinstance(e, TupleExpr):
            parts = [self.infer_expr(it) for it in e.items]
            if any(p.is_unknown for p in parts):
                return UNKNOWN
            return TypeDesc("(" + ", ".join(p.text for p in parts) + ")", "tuple", inner=tuple(parts))
        if isinstance(e, ArrayExpr):
            if e.repeat is not None:
                elem = self.infer_expr(e.repeat[0])
                count = e.repeat[1]
                if elem.is_unknown or not isinstance(count, Lit):
                    return UNKNOWN
                return TypeDesc(f"[{elem.text}; {count.text}]", "array", inner=(elem,), array_len=int(count.text.rstrip("usize") or "0"))
            if not e.items:
                return UNKNOWN
            elem = self.infer_expr(e.items[0])
            if elem.is_unknown:
                return UNKNOWN
            return TypeDesc(f"[{elem.text}; {len(e.items)}]", "array", inner=(elem,), array_len=len(e.items))
        if isinstance(e, StructExpr):
            name = e.path.split("::")[-1]
            if self.unit.syntax.struct_named(name) is not None:
                return TypeDesc(e.path, "path", name=name)
            return UNKNOWN
        if isinstance(e, FieldAccess):
            recv = self.infer_expr(e.receiver).peel_refs()
            if recv.kind == "tuple" and e.name.isdigit():
                idx = int(e.name)
                if idx < len(recv.inner):
                    return recv.inner[idx]
                return UNKNOWN
            st = self.unit.syntax.struct_named(recv.name)
            if st is not None:
                for fname, fty in st.fields:
                    if fname == e.name:
                        return fty
            return UNKNOWN
        if isinstance(e, IndexExpr):
            recv = self.infer_expr(e.receiver).peel_refs()
            if recv.kind in ("array", "slice") and recv.inner:
                return recv.inner[0]
            if recv.name == "Vec" and recv.inner:
                return recv.inner[0]
            return UNKNOWN
        if isinstance(e, Call):
            return self._call_type(e)
        if isinstance(e, MethodCall):
            return self._method_type(e)
        if isinstance(e, AwaitExpr):
            inner = self.infer_expr(e.operand)
            return inner  # async fn calls report their declared return type
        if isinstance(e, TryExpr):
            inner = self.infer_expr(e.operand)
            if inner.name in ("Result", "Option") and inner.inner:
                return inner.inner[0]
            return UNKNOWN
        if isinstance(e, IfExpr):
            t = self._block_tail_type(e.then)
            if not t.is_unknown:
                return t
            if isinstance(e.orelse, Block):
                return self._block_tail_type(e.orelse)
            if isinstance(e.orelse, IfExpr):
                return self.infer_expr(e.orelse)
            return UNKNOWN
        if isinstance(e, MatchExpr):
            for arm in e.arms:
                t = self.infer_expr(arm.body) if not isinstance(arm.body, Block) else self._block_tail_type(arm.body)
                if not t.is_unknown:
                    return t
            return UNKNOWN
        if isinstance(e, Block):
            return self._block_tail_type(e)
        if isinstance(e, MacroCall):
            if e.name == "vec":
                if e.args:
                    elem = self.infer_expr(e.args[0])
                    if not elem.is_unknown:
                        return TypeDesc(f"Vec<{elem.text}>", "path", name="Vec", inner=(elem,))
                return TypeDesc("Vec<_>", "path", name="Vec", inner=(TypeDesc("_", "infer"),))
            if e.name == "format":
                return TypeDesc("String", "path", name="String")
            if e.name in ("matches",):
                return TypeDesc("bool", "path", name="bool")
            return UNKNOWN
        if isinstance(e, RangeExpr):
            return UNKNOWN
        return UNKNOWN

    def _block_tail_type(self, blk: Block) -> TypeDesc:
        tail = blk.tail
        if tail is None:
            return UNIT
        return self.infer_expr(tail)

    def _lit_type(self, e: Lit) -> TypeDesc:
        if e.kind == "int":
            m = _INT_SUFFIX.search(e.text)
            name = m.group(1) if m else "i32"
            return TypeDesc(name, "path", name=name)
        if e.kind == "float":
            m = _FLOAT_SUFFIX.search(e.text)
            name = m.group(1) if m else "f64"
            return TypeDesc(name, "path", name=name)
        if e.kind == "bool":
            return TypeDesc("bool", "path", name="bool")
        if e.kind == "str":
            inner = TypeDesc("str", "path", name="str")
            return TypeDesc("&str", "ref", inner=(inner,))
        if e.kind == "char":
            return TypeDesc("char", "path", name="char")
        return UNKNOWN

    def _resolve_occ(self, e: PathExpr) -> Binding | None:
        return self._bindings_by_occ_pos.get((e.segments[0], e.start))

    def _call_type(self, e: Call) -> TypeDesc:
        if not isinstance(e.callee, PathExpr):
            return UNKNOWN
        path = e.callee.text
        segs = e.callee.segments
        # local function?
        local = self.unit.syntax.fn_named(segs[-1]) if len(segs) == 1 else None
        if local is not None:
            return local.ret_ty or UNIT
        if len(segs) == 1:
            # a callable binding: its Fn(..) -> Ret bound names the result
            b = self._resolve_occ(e.callee)
            if b is not None:
                bty = self.binding_type(b)
                ret = self._fn_bound_ret(bty.name)
                if ret is not None:
                    return ret
        # Type::method constructor-style paths, e.g. String::from, Vec::new
        if len(segs) >= 2:
            tname = segs[-2]
            st = self.unit.syntax.struct_named(tname)
            if st is not None:
                owner_fn = self._local_method(tname, segs[-1])
                if owner_fn is not None:
                    return self._subst_self(owner_fn.ret_ty or UNIT, TypeDesc(tname, "path", name=tname))
            for full, short in _CTOR_PATHS.items():
                if path == full or path.endswith("::" + full) or (short == tname and True):
                    pass
            desc = self._catalog_fn(path)
            if desc is not None and desc.ret:
                return parse_type_text(desc.ret)
        return UNKNOWN

    def _fn_bound_ret(self, param_name: str) -> TypeDesc | None:
        """Return type read from an Fn-family bound on a generic parameter;
        HRTB lifetimes are elided since the call-site result drops them."""
        if not param_name:
            return None
        sources: list[str] = []
        for g in self.host.generics:
            if g.kind == "type" and g.name == param_name:
                sources.extend(g.bounds)
        for pred in self.host.where_preds:
            subject = re.sub(r"^for<[^>]*>\s*", "", pred.split(":", 1)[0].strip())
            if subject == param_name:
                sources.append(pred.split(":", 1)[1] if ":" in pred else "")
        for b in sources:
            m = re.search(r"\bFn(?:Mut|Once)?\s*\(.*?\)\s*->\s*(.+)$", b)
            if m:
                ret_text = m.group(1).strip().rstrip(",")
                ret_text = re.sub(r"&\s*'[A-Za-z_][A-Za-z0-9_]*\s*", "&", ret_text)
                ret_text = re.sub(r"<\s*'[A-Za-z_][A-Za-z0-9_]*\s*>", "", ret_text)
                return parse_type_text(ret_text)
            if re.search(r"\bFn(?:Mut|Once)?\s*\(", b):
                return UNIT
        return None

    def _catalog_fn(self, path: str):
        for full, desc in self.catalog.entries.items():
            if desc.kind != "function":
                continue
            if full == path or full.endswith("::" + path):
                return desc
        return None

    def _local_method(self, type_name: str, method: str) -> FnItem | None:
        for fn in self.unit.syntax.fns:
            if fn.name != method or fn.impl_index is None:
                continue
            impl = self.unit.syntax.impls[fn.impl_index]
            if impl.self_ty.split("<")[0].strip() == type_name:
                return fn
        return None

    def _subst_self(self, ty: TypeDesc, recv: TypeDesc) -> TypeDesc:
        if ty.text == "Self":
            return recv
        if "Self" in ty.text:
            return parse_type_text(ty.text.replace("Self", recv.text))
        return ty

    def _method_type(self, e: MethodCall) -> TypeDesc:
        recv = self.infer_expr(e.receiver)
        base = recv.peel_refs()
        if e.name == "clone":
            return base if not base.is_unknown else UNKNOWN
        if base.is_unknown:
            return UNKNOWN
        local = self._local_method(base.name, e.name)
        if local is not None:
            return self._subst_self(local.ret_ty or UNIT, base)
        desc = self.catalog.method_on(base.name, e.name)
        if desc:
            return self._instantiate_catalog_ret(desc.ret, base)
        return UNKNOWN

    def _instantiate_catalog_ret(self, ret: str, base: TypeDesc) -> TypeDesc:
        if not ret:
            return UNKNOWN
        text = ret
        if "Self" in text:
            text = text.replace("Self", base.text)
        if base.inner:
            if re.search(r"\bT\b", text):
                text = re.sub(r"\bT\b", base.inner[0].text, text)
            if base.name in ("HashMap", "Result") and len(base.inner) > 1:
                text = re.sub(r"\bK\b", base.inner[0].text, text)
                text = re.sub(r"\bV\b", base.inner[1].text, text)
                text = re.sub(r"\bE\b", base.inner[1].text, text)
        return parse_type_text(text)


_CTOR_PATHS = {"String::from": "String", "Vec::new": "Vec", "String::new": "String"}


# ---------------------------------------------------------------------------
# Mutation resolution for method receivers


def _method_mutates(unit: SourceUnit, catalog: StdCatalog, inferer: TypeInferer, occ: Occ) -> bool | None:
    """True/False when the receiver's method mutability is known, else None."""
    recv_ty = inferer.infer_expr(occ.recv_expr) if occ.recv_expr is not None else UNKNOWN
    base = recv_ty.peel_refs()
    if not base.is_unknown:
        local = inferer._local_method(base.name, occ.method or "")
        if local is not None and local.receiver is not None:
            return "mut" in local.receiver
        desc = catalog.method_on(base.name, occ.method or "")
        if desc:
            return desc.mutates_receiver
    return None


# ---------------------------------------------------------------------------
# Public operations


def _collect(unit: SourceUnit, host: FnItem) -> _Walker:
    w = _Walker()
    if host.receiver is not None:
        w.bind("self", "self", "mut" in host.receiver, None, host.params_span[0])
    for p in host.params:
        if p.name is not None:
            w.bind(p.name, "param", p.pat_text.startswith("mut "), p.ty, p.span[0])
    body = unit.syntax.body_block(host)
    if body is not None:
        w.push()
        w.walk_stmts(body.stmts)
        w.pop()
    return w


def analyze_region(unit: SourceUnit, region: SelectionRegion, catalog: StdCatalog) -> RegionProfile:
    host = region.host
    walker = _collect(unit, host)
    inferer = TypeInferer(unit, host, catalog, walker)
    r0, r1 = region.start, region.end
    loop_span = _enclosing_loop_span(unit, region)

    captures: list[CaptureInfo] = []
    for b in walker.bindings:
        if b.kind == "closure":
            continue
        inside = [o for o in b.occs if r0 <= o.start < r1]
        if not inside or b.decl_start >= r0:
            continue
        after = [o for o in b.occs if o.start >= r1]
        live_after = bool(after)
        # back edge: a binding declared before the enclosing loop is read
        # again on the next iteration, so the region's view of it must survive
        if not live_after and loop_span is not None and b.decl_start < loop_span[0]:
            live_after = True
        mutated = False
        read = False
        for o in inside:
            if o.kind in ("write", "rw", "borrow_mut"):
                mutated = True
                if o.kind == "rw":
                    read = True
            elif o.kind == "recv":
                verdict = _method_mutates(unit, catalog, inferer, o)
                if verdict:
                    mutated = True
                read = True
            else:
                read = True
        mode = (
            Mode.BY_VALUE
            if not live_after
            else (Mode.MUT_REF if mutated else Mode.SHARED_REF)
        )
        ty = inferer.binding_type(b)
        deref_occs: list[int] = []
        if mode in (Mode.SHARED_REF, Mode.MUT_REF) and not ty.is_ref and b.kind != "self":
            deref_occs = sorted(o.start for o in inside if o.role in ("plain", "borrow"))
        captures.append(
            CaptureInfo(
                name=b.name,
                declared_type=ty,
                mode=mode,
                live_after=live_after,
                mutated_inside=mutated,
                read_inside=read,
                is_self=(b.kind == "self"),
                first_use=min(o.start for o in inside),
                deref_occs=deref_occs,
            )
        )
    captures.sort(key=lambda c: c.first_use)

    out_bindings: list[Binding] = []
    for b in walker.bindings:
        if b.kind == "closure":
            continue
        if not (r0 <= b.decl_start < r1):
            continue
        if any(o.start >= r1 for o in b.occs):
            out_bindings.append(b)
    out_bindings.sort(key=lambda b: b.decl_start)
    outputs: list[tuple[str, TypeDesc, bool]] = []
    for b in out_bindings:
        mut_after = any(
            o.start >= r1 and (o.kind in ("write", "rw", "borrow_mut") or (o.kind == "recv" and _method_mutates(unit, catalog, inferer, o)))
            for o in b.occs
        )
        outputs.append((b.name, inferer.binding_type(b), mut_after))

    tail_ty = None
    if region.is_tail:
        tail = region.block.tail
        if tail is not None:
            tail_ty = inferer.infer_expr(tail)
            if tail_ty.text == "()":  # unit tails carry no value out
                tail_ty = None

    nlcf = detect_nlcf(unit, region, inferer)
    flags = detect_flags(unit, region, catalog, captures=captures, nlcf=nlcf)

    generics = [(g.name, list(g.bounds)) for g in host.generics if g.kind == "type"]
    lifetimes = [g.name for g in host.generics if g.kind == "lifetime"]
    if host.impl_index is not None:
        impl = unit.syntax.impls[host.impl_index]
        m = re.findall(r"'[a-zA-Z_][a-zA-Z0-9_]*", impl.self_ty)
        lifetimes.extend(x for x in m if x not in lifetimes)

    return RegionProfile(
        captures=captures,
        outflow=OutflowInfo(outputs=outputs, tail_value=tail_ty),
        nlcf=nlcf,
        flags=flags,
        generics_in_scope=generics,
        lifetimes_in_scope=lifetimes,
        where_preds=list(host.where_preds),
    )


def detect_nlcf(unit: SourceUnit, region: SelectionRegion, inferer: TypeInferer | None = None) -> NlcfProfile:
    host = region.host
    if inferer is None:
        from ..source.catalog import StdCatalog as _SC

        walker = _collect(unit, host)
        inferer = TypeInferer(unit, host, _empty_catalog(), walker)

    jumps: list[tuple[str, int, int]] = []
    break_payload: TypeDesc | None = None
    return_payload: TypeDesc | None = None
    has_try = False

    def scan(node: Node, loop_depth: int, labels: list[str]) -> None:
        nonlocal break_payload, return_payload, has_try
        if isinstance(node, ClosureExpr):
            return  # jumps inside closures never escape the region
        if isinstance(node, (WhileExpr, LoopExpr, ForExpr)):
            lbl = labels + ([node.label] if node.label else [])
            for child in _iter_children(node):
                scan(child, loop_depth + 1, lbl)
            return
        if isinstance(node, BreakExpr):
            escapes = loop_depth == 0 or (node.label is not None and node.label not in labels)
            if escapes:
                jumps.append(("break", node.start, node.end))
                if node.value is not None:
                    break_payload = inferer.infer_expr(node.value)
                elif break_payload is None:
                    break_payload = UNIT
        elif isinstance(node, ContinueExpr):
            escapes = loop_depth == 0 or (node.label is not None and node.label not in labels)
            if escapes:
                jumps.append(("continue", node.start, node.end))
        elif isinstance(node, ReturnExpr):
            jumps.append(("return", node.start, node.end))
            if host.ret_ty is not None:
                return_payload = host.ret_ty
            elif node.value is not None:
                return_payload = inferer.infer_expr(node.value)
            else:
                return_payload = UNIT
        elif isinstance(node, TryExpr):
            has_try = True
            scan(node.operand, loop_depth, labels)
            return
        for child in _iter_children(node):
            scan(child, loop_depth, labels)

    for stmt in region.stmts:
        scan(stmt, 0, [])

    kinds = {k for k, _s, _e in jumps}
    if not kinds:
        kind = NlcfKind.NONE
    elif len(kinds) > 1:
        kind = NlcfKind.MIXED
    elif "break" in kinds:
        kind = NlcfKind.BREAK
    elif "continue" in kinds:
        kind = NlcfKind.CONTINUE
    else:
        kind = NlcfKind.RETURN

    loop_context = _region_in_loop(unit, region)
    return NlcfProfile(
        kind=kind,
        loop_context=loop_context,
        break_payload=break_payload,
        return_payload=return_payload,
        jumps=jumps,
        has_try=has_try,
    )


def _iter_children(node: Node):
    from ..source.expr import children

    return children(node)


def _region_in_loop(unit: SourceUnit, region: SelectionRegion) -> bool:
    return _enclosing_loop_span(unit, region) is not None


def _enclosing_loop_span(unit: SourceUnit, region: SelectionRegion) -> tuple[int, int] | None:
    """Span of the innermost host loop whose body contains the region."""
    body = unit.syntax.body_block(region.host)
    if body is None:
        return None
    best: tuple[int, int] | None = None

    def scan(node: Node) -> None:
        nonlocal best
        if isinstance(node, (WhileExpr, LoopExpr, ForExpr)):
            blk = node.body
            if blk.start <= region.start and region.end <= blk.end:
                if best is None or node.start > best[0]:
                    best = (node.start, node.end)
        for child in _iter_children(node):
            scan(child)

    for stmt in body.stmts:
        scan(stmt)
    return best


_EMPTY_CATALOG = None


def _empty_catalog() -> StdCatalog:
    global _EMPTY_CATALOG
    if _EMPTY_CATALOG is None:
        _EMPTY_CATALOG = StdCatalog({}, "empty")
    return _EMPTY_CATALOG


def detect_flags(
    unit: SourceUnit,
    region: SelectionRegion,
    catalog: StdCatalog,
    captures: list[CaptureInfo] | None = None,
    nlcf: NlcfProfile | None = None,
) -> set[str]:
    host = region.host
    flags: set[str] = set()
    region_text = unit.text[region.start : region.end]
    region_idents = set(re.findall(r"[A-Za-z_][A-Za-z0-9_]*", region_text))

    if host.is_async or ".await" in region_text or re.search(r"\.\s*await\b", region_text):
        flags.add("ASYNC")
    if host.is_const:
        flags.add("CONST")
    if nlcf is None:
        nlcf = detect_nlcf(unit, region)
    if nlcf.kind is not NlcfKind.NONE:
        flags.add("NLCF")

    type_params = {g.name for g in host.generics if g.kind == "type"}
    if host.impl_index is not None:
        impl = unit.syntax.impls[host.impl_index]
        type_params.update(re.findall(r"\b([A-Z][A-Za-z0-9_]*)\b", impl.self_ty.split("<", 1)[-1]) if "<" in impl.self_ty else [])
    if type_params & region_idents:
        flags.add("GEN")

    bound_texts = [b for g in host.generics for b in g.bounds] + host.where_preds
    if any("for<'" in b.replace(" ", "") for b in bound_texts):
        flags.add("HRTB")

    if "dyn" in region_idents:
        flags.add("DYN")
    else:
        caps = captures if captures is not None else []
        for c in caps:
            text = c.declared_type.text
            if text.startswith("dyn ") or "dyn " in text or c.declared_type.peel_refs().kind in ("dyn", "impl") or text.startswith("impl "):
                flags.add("DYN")
                break
    return flags


def applicable_generics(profile: RegionProfile, region_idents: set[str] | None = None) -> list[tuple[str, list[str]]]:
    """Type parameters the new function must re-declare: exactly those
    mentioned by captures, outputs, or the region body, transitively closed
    over bound mentions."""
    all_params = dict(profile.generics_in_scope)
    if not all_params:
        return []
    mentioned: set[str] = set()
    texts = [c.declared_type.text for c in profile.captures]
    texts += [t.text for _n, t, _m in profile.outflow.outputs]
    if profile.outflow.tail_value is not None:
        texts.append(profile.outflow.tail_value.text)
    for text in texts:
        for name in all_params:
            if re.search(r"\b%s\b" % re.escape(name), text):
                mentioned.add(name)
    if region_idents:
        mentioned.update(n for n in all_params if n in region_idents)

    # where-clause predicates contribute bounds to their subject parameter
    pred_bounds: dict[str, list[str]] = {}
    for pred in profile.where_preds:
        subject = pred.split(":", 1)[0].strip()
        subject = re.sub(r"^for<[^>]*>\s*", "", subject)
        if subject in all_params:
            pred_bounds.setdefault(subject, []).append(pred)

    # transitive closure: a bound mentioning another in-scope param pulls it in
    changed = True
    while changed:
        changed = False
        for name in list(mentioned):
            bound_srcs = list(all_params.get(name, []))
            bound_srcs += pred_bounds.get(name, [])
            for b in bound_srcs:
                for other in all_params:
                    if other not in mentioned and re.search(r"\b%s\b" % re.escape(other), b):
                        mentioned.add(other)
                        changed = True

    out: list[tuple[str, list[str]]] = []
    for name, bounds in profile.generics_in_scope:
        if name not in mentioned:
            continue
        kept = []
        for b in bounds:
            foreign = [p for p in all_params if p != name and re.search(r"\b%s\b" % re.escape(p), b)]
            if all(f in mentioned for f in foreign):
                kept.append(b)
        out.append((name, kept))
    return out
