"""Inlining and semantics-preserving normalization.

The fast equivalence path inlines the extracted callee back into the
refactored caller and normalizes both sides; alpha-identical trees prove
equivalence outright. Every rule here must preserve semantics exactly:
substitution only of atoms, projection only over pure discards, match
reduction only on literal constructor applications.
"""

from __future__ import annotations

from .ir import (
    ArrayNew,
    ArrayWith,
    BinOp,
    Call,
    Cast,
    FieldGet,
    FuncIR,
    If,
    Index,
    Ir,
    IrModule,
    Let,
    Lit,
    Loop,
    Match,
    Panic,
    StructNew,
    StructWith,
    TupleGet,
    TupleNew,
    UnOp,
    Var,
    Variant,
    ir_key,
)

_PURE_NODES = (Lit, Var, TupleNew, TupleGet, ArrayNew, StructNew, FieldGet, Variant, StructWith)


def is_pure(node: Ir) -> bool:
    """Conservatively effect-free: cannot panic, burn fuel, or call."""
    if isinstance(node, (Lit, Var)):
        return True
    if isinstance(node, TupleNew):
        return all(is_pure(i) for i in node.items)
    if isinstance(node, ArrayNew):
        return all(is_pure(i) for i in node.items)
    if isinstance(node, TupleGet):
        return is_pure(node.operand)
    if isinstance(node, FieldGet):
        return is_pure(node.operand)
    if isinstance(node, StructNew):
        return all(is_pure(a) for a in node.args)
    if isinstance(node, StructWith):
        return is_pure(node.operand) and is_pure(node.value)
    if isinstance(node, Variant):
        return all(is_pure(a) for a in node.args)
    if isinstance(node, BinOp):
        return node.op in ("==", "!=", "<", "<=", ">", ">=", "&&", "||") and is_pure(node.left) and is_pure(node.right)
    if isinstance(node, UnOp):
        return node.op == "not" and is_pure(node.operand)
    if isinstance(node, Cast):
        return is_pure(node.operand)
    if isinstance(node, If):
        return is_pure(node.cond) and is_pure(node.then) and is_pure(node.els)
    if isinstance(node, Let):
        return is_pure(node.value) and is_pure(node.body)
    return False


def _subst(node: Ir, name: str, replacement: Ir) -> Ir:
    """Replace free occurrences of name with an atomic replacement."""
    if isinstance(node, Var):
        return replacement if node.name == name else node
    if isinstance(node, Lit):
        return node
    if isinstance(node, Let):
        value = _subst(node.value, name, replacement)
        if node.name == name:
            return Let(node.name, value, node.body)
        return Let(node.name, value, _subst(node.body, name, replacement))
    if isinstance(node, Match):
        scrut = _subst(node.scrutinee, name, replacement)
        arms = []
        for pat, body in node.arms:
            if name in _pat_binds(pat):
                arms.append((pat, body))
            else:
                arms.append((pat, _subst(body, name, replacement)))
        return Match(scrut, tuple(arms))
    if isinstance(node, Loop):
        init = tuple(_subst(i, name, replacement) for i in node.init)
        if name in node.state:
            return Loop(node.state, init, node.body)
        return Loop(node.state, init, _subst(node.body, name, replacement))
    return _rebuild(node, lambda child: _subst(child, name, replacement))


def _pat_binds(pat) -> set[str]:
    kind = pat[0]
    if kind == "bind":
        return {pat[1]}
    if kind in ("var", "tup"):
        out: set[str] = set()
        for sub in pat[2] if kind == "var" else pat[1]:
            out |= _pat_binds(sub)
        return out
    return set()


def _rebuild(node: Ir, f) -> Ir:
    if isinstance(node, If):
        return If(f(node.cond), f(node.then), f(node.els))
    if isinstance(node, BinOp):
        return BinOp(node.op, node.ty, f(node.left), f(node.right))
    if isinstance(node, UnOp):
        return UnOp(node.op, node.ty, f(node.operand))
    if isinstance(node, TupleNew):
        return TupleNew(tuple(f(i) for i in node.items))
    if isinstance(node, TupleGet):
        return TupleGet(f(node.operand), node.index)
    if isinstance(node, ArrayNew):
        return ArrayNew(tuple(f(i) for i in node.items))
    if isinstance(node, Index):
        return Index(f(node.operand), f(node.index))
    if isinstance(node, ArrayWith):
        return ArrayWith(f(node.operand), f(node.index), f(node.value))
    if isinstance(node, StructNew):
        return StructNew(node.name, node.fields, tuple(f(a) for a in node.args))
    if isinstance(node, FieldGet):
        return FieldGet(f(node.operand), node.name)
    if isinstance(node, StructWith):
        return StructWith(f(node.operand), node.name, f(node.value))
    if isinstance(node, Variant):
        return Variant(node.ctor, tuple(f(a) for a in node.args))
    if isinstance(node, Call):
        return Call(node.fname, tuple(f(a) for a in node.args))
    if isinstance(node, Panic):
        return node
    if isinstance(node, Cast):
        return Cast(f(node.operand), node.to_ty)
    if isinstance(node, Lit):
        return node
    if isinstance(node, Var):
        return node
    raise TypeError(f"rebuild: {node!r}")


def inline_callee(caller: FuncIR, callee: FuncIR) -> FuncIR:
    """Replace calls to the callee with let-bound copies of its body.

    The callee returns (ret, *slots) when it threads mutable borrows; the
    call site already projects those, so the inlined body slots in directly.
    """
    counter = [0]

    def visit(node: Ir) -> Ir:
        if isinstance(node, Call) and node.fname == callee.name:
            counter[0] += 1
            suffix = f"%inl{counter[0]}"
            body = _rename_binders(callee.body, suffix)
            args = [visit(a) for a in node.args]
            for (pname, _ty), arg in zip(reversed(callee.params), reversed(args)):
                body = Let(pname + suffix, arg, body)
            return body
        if isinstance(node, Let):
            return Let(node.name, visit(node.value), visit(node.body))
        if isinstance(node, Match):
            return Match(visit(node.scrutinee), tuple((p, visit(b)) for p, b in node.arms))
        if isinstance(node, Loop):
            return Loop(node.state, tuple(visit(i) for i in node.init), visit(node.body))
        return _rebuild(node, visit)

    return FuncIR(caller.name, list(caller.params), list(caller.mut_slots), visit(caller.body), caller.ret_ty)


def _rename_binders(node: Ir, suffix: str, bound: frozenset[str] = frozenset()) -> Ir:
    """Alpha-rename every binder (and its uses) by appending a suffix."""
    if isinstance(node, Var):
        return Var(node.name + suffix) if node.name in bound else node
    if isinstance(node, Lit):
        return node
    if isinstance(node, Let):
        value = _rename_binders(node.value, suffix, bound)
        b2 = bound | {node.name}
        return Let(node.name + suffix, value, _rename_binders(node.body, suffix, b2))
    if isinstance(node, Match):
        scrut = _rename_binders(node.scrutinee, suffix, bound)
        arms = []
        for pat, body in node.arms:
            names = _pat_binds(pat)
            arms.append((_rename_pat(pat, suffix), _rename_binders(body, suffix, bound | names)))
        return Match(scrut, tuple(arms))
    if isinstance(node, Loop):
        init = tuple(_rename_binders(i, suffix, bound) for i in node.init)
        b2 = bound | set(node.state)
        return Loop(tuple(s + suffix for s in node.state), init, _rename_binders(node.body, suffix, b2))
    return _rebuild(node, lambda child: _rename_binders(child, suffix, bound))


def _rename_pat(pat, suffix: str):
    kind = pat[0]
    if kind == "bind":
        return ("bind", pat[1] + suffix)
    if kind == "var":
        return ("var", pat[1], tuple(_rename_pat(p, suffix) for p in pat[2]))
    if kind == "tup":
        return ("tup", tuple(_rename_pat(p, suffix) for p in pat[1]))
    return pat


# -- simplification ------------------------------------------------------------


def simplify(node: Ir, passes: int = 64) -> Ir:
    prev_key = None
    for _ in range(passes):
        node = _simp(node)
        key = ir_key(node)
        if key == prev_key:
            break
        prev_key = key
    return node


def _simp(node: Ir) -> Ir:
    if isinstance(node, Let):
        value = _simp(node.value)
        body = _simp(node.body)
        if isinstance(value, Let) and value.name != node.name and value.name not in _free_vars(body):
            # let a = (let b = v in e) in rest  ->  let b = v in let a = e in rest
            return _simp(Let(value.name, value.value, Let(node.name, value.body, body)))
        if isinstance(value, Lit):
            return _subst(body, node.name, value)
        if isinstance(value, Var) and not _binds_any(body, {value.name}):
            return _subst(body, node.name, value)
        if isinstance(body, Var) and body.name == node.name:
            return value
        if node.name == "_" or not _uses(body, node.name):
            if is_pure(value):
                return body
            return Let("_", value, body) if node.name != "_" else Let(node.name, value, body)
        if (
            _count_uses(body, node.name) == 1
            and is_pure(value)
            and _use_not_under_binder(body, node.name)
            and not _binds_any(body, _free_vars(value))
        ):
            return _subst(body, node.name, value)
        return Let(node.name, value, body)
    if isinstance(node, Match):
        scrut = _simp(node.scrutinee)
        arms = tuple((p, _simp(b)) for p, b in node.arms)
        if isinstance(scrut, Let) and all(
            scrut.name not in _free_vars(b, frozenset(_pat_binds(p))) for p, b in arms
        ):
            # match (let n = v in e) ... -> let n = v in match e ...
            return _simp(Let(scrut.name, scrut.value, Match(scrut.body, arms)))
        if isinstance(scrut, Variant):
            for pat, body in arms:
                binding = _try_match_static(pat, scrut)
                if binding is None:
                    continue
                if binding is False:
                    break
                out = body
                for name, val_ir in reversed(binding):
                    out = Let(name, val_ir, out)
                return _simp(out)
        if isinstance(scrut, Lit):
            for pat, body in arms:
                if pat[0] == "wild":
                    return body
                if pat[0] == "bind":
                    return _simp(Let(pat[1], scrut, body))
                if pat[0] == "lit":
                    if pat[1] == scrut.value:
                        return body
                    continue
                break
        if len(arms) == 1 and arms[0][0][0] == "bind":
            return _simp(Let(arms[0][0][1], scrut, arms[0][1]))
        return Match(scrut, arms)
    if isinstance(node, TupleGet):
        operand = _simp(node.operand)
        if isinstance(operand, TupleNew):
            dropped = [e for i, e in enumerate(operand.items) if i != node.index]
            if all(is_pure(d) for d in dropped) and node.index < len(operand.items):
                return operand.items[node.index]
        if isinstance(operand, Let):
            return _simp(Let(operand.name, operand.value, TupleGet(operand.body, node.index)))
        return TupleGet(operand, node.index)
    if isinstance(node, FieldGet):
        operand = _simp(node.operand)
        if isinstance(operand, StructNew):
            try:
                i = operand.fields.index(node.name)
            except ValueError:
                i = -1
            if i >= 0:
                dropped = [a for j, a in enumerate(operand.args) if j != i]
                if all(is_pure(d) for d in dropped):
                    return operand.args[i]
        return FieldGet(operand, node.name)
    if isinstance(node, If):
        cond = _simp(node.cond)
        if isinstance(cond, Lit):
            if cond.value is True:
                return _simp(node.then)
            if cond.value is False:
                return _simp(node.els)
        return If(cond, _simp(node.then), _simp(node.els))
    if isinstance(node, Loop):
        return Loop(node.state, tuple(_simp(i) for i in node.init), _simp(node.body))
    return _rebuild(node, _simp)


def _try_match_static(pat, scrut: Variant):
    """None: no match; False: cannot decide statically; else binding list."""
    if pat[0] == "wild":
        return []
    if pat[0] == "bind":
        return [(pat[1], scrut)]
    if pat[0] != "var":
        return False
    if pat[1] != scrut.ctor:
        return None
    if len(pat[2]) != len(scrut.args):
        return None
    out: list[tuple[str, Ir]] = []
    for sub, arg in zip(pat[2], scrut.args):
        if sub[0] == "bind":
            out.append((sub[1], arg))
        elif sub[0] == "wild":
            if not is_pure(arg):
                return False
        elif sub[0] == "var" and isinstance(arg, Variant):
            inner = _try_match_static(sub, arg)
            if inner is None or inner is False:
                return inner
            out.extend(inner)
        elif sub[0] == "lit" and isinstance(arg, Lit):
            if arg.value != sub[1]:
                return None
        else:
            return False
    return out


def _free_vars(node: Ir, bound: frozenset[str] = frozenset()) -> set[str]:
    out: set[str] = set()
    if isinstance(node, Var):
        if node.name not in bound:
            out.add(node.name)
        return out
    if isinstance(node, Let):
        out |= _free_vars(node.value, bound)
        out |= _free_vars(node.body, bound | {node.name})
        return out
    if isinstance(node, Match):
        out |= _free_vars(node.scrutinee, bound)
        for pat, body in node.arms:
            out |= _free_vars(body, bound | frozenset(_pat_binds(pat)))
        return out
    if isinstance(node, Loop):
        for i in node.init:
            out |= _free_vars(i, bound)
        out |= _free_vars(node.body, bound | frozenset(node.state))
        return out
    for attr in getattr(node, "__slots__", ()):
        v = getattr(node, attr)
        if isinstance(v, Ir):
            out |= _free_vars(v, bound)
        elif isinstance(v, tuple):
            for x in v:
                if isinstance(x, Ir):
                    out |= _free_vars(x, bound)
    return out


def _binds_any(node: Ir, names: set[str]) -> bool:
    if not names:
        return False
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, Let):
            if n.name in names:
                return True
            stack.append(n.value)
            stack.append(n.body)
            continue
        if isinstance(n, Match):
            stack.append(n.scrutinee)
            for pat, body in n.arms:
                if _pat_binds(pat) & names:
                    return True
                stack.append(body)
            continue
        if isinstance(n, Loop):
            if set(n.state) & names:
                return True
            stack.extend(n.init)
            stack.append(n.body)
            continue
        for attr in getattr(n, "__slots__", ()):
            v = getattr(n, attr)
            if isinstance(v, Ir):
                stack.append(v)
            elif isinstance(v, tuple):
                stack.extend(x for x in v if isinstance(x, Ir))
    return False


def _uses(node: Ir, name: str) -> bool:
    return _count_uses(node, name, limit=1) >= 1


def _count_uses(node: Ir, name: str, limit: int = 1 << 30) -> int:
    count = 0
    stack = [node]
    while stack and count < limit:
        n = stack.pop()
        if isinstance(n, Var):
            if n.name == name:
                count += 1
            continue
        if isinstance(n, Let):
            stack.append(n.value)
            if n.name != name:
                stack.append(n.body)
            continue
        if isinstance(n, Match):
            stack.append(n.scrutinee)
            for pat, body in n.arms:
                if name not in _pat_binds(pat):
                    stack.append(body)
            continue
        if isinstance(n, Loop):
            stack.extend(n.init)
            if name not in n.state:
                stack.append(n.body)
            continue
        for attr in getattr(n, "__slots__", ()):
            v = getattr(n, attr)
            if isinstance(v, Ir):
                stack.append(v)
            elif isinstance(v, tuple):
                stack.extend(x for x in v if isinstance(x, Ir))
    return count


def _use_not_under_binder(node: Ir, name: str) -> bool:
    """True when the single use is not inside a Loop or Match arm (where a
    substitution could change how many times the value is evaluated)."""
    hit: list[bool] = []

    def walk(n: Ir, protected: bool) -> None:
        if isinstance(n, Var):
            if n.name == name and not protected:
                hit.append(True)
            elif n.name == name:
                hit.append(False)
            return
        if isinstance(n, Loop):
            for i in n.init:
                walk(i, protected)
            if name not in n.state:
                walk(n.body, True)
            return
        if isinstance(n, Match):
            walk(n.scrutinee, protected)
            for pat, body in n.arms:
                if name not in _pat_binds(pat):
                    walk(body, True)
            return
        if isinstance(n, If):
            walk(n.cond, protected)
            walk(n.then, True)
            walk(n.els, True)
            return
        if isinstance(n, Let):
            walk(n.value, protected)
            if n.name != name:
                walk(n.body, protected)
            return
        for attr in getattr(n, "__slots__", ()):
            v = getattr(n, attr)
            if isinstance(v, Ir):
                walk(v, protected)
            elif isinstance(v, tuple):
                for x in v:
                    if isinstance(x, Ir):
                        walk(x, protected)

    walk(node, False)
    return bool(hit) and all(hit)


# -- alpha normal form ----------------------------------------------------------


def alpha_key(fn: FuncIR) -> object:
    """Structural key with canonical binder names and parameter positions."""
    mapping = {name: f"%p{i}" for i, (name, _ty) in enumerate(fn.params)}
    counter = [0]

    def fresh() -> str:
        counter[0] += 1
        return f"%a{counter[0]}"

    def canon(node: Ir, env: dict[str, str]) -> Ir:
        if isinstance(node, Var):
            return Var(env.get(node.name, node.name))
        if isinstance(node, Lit):
            return node
        if isinstance(node, Let):
            value = canon(node.value, env)
            nm = fresh()
            env2 = dict(env)
            env2[node.name] = nm
            return Let(nm, value, canon(node.body, env2))
        if isinstance(node, Match):
            scrut = canon(node.scrutinee, env)
            arms = []
            for pat, body in node.arms:
                env2 = dict(env)
                new_pat = _canon_pat(pat, env2, fresh)
                arms.append((new_pat, canon(body, env2)))
            return Match(scrut, tuple(arms))
        if isinstance(node, Loop):
            init = tuple(canon(i, env) for i in node.init)
            env2 = dict(env)
            new_state = []
            for s in node.state:
                nm = fresh()
                env2[s] = nm
                new_state.append(nm)
            return Loop(tuple(new_state), init, canon(node.body, env2))
        return _rebuild(node, lambda child: canon(child, env))

    return ir_key(canon(fn.body, mapping))


def _canon_pat(pat, env: dict[str, str], fresh):
    kind = pat[0]
    if kind == "bind":
        nm = fresh()
        env[pat[1]] = nm
        return ("bind", nm)
    if kind == "var":
        return ("var", pat[1], tuple(_canon_pat(p, env, fresh) for p in pat[2]))
    if kind == "tup":
        return ("tup", tuple(_canon_pat(p, env, fresh) for p in pat[1]))
    return pat
