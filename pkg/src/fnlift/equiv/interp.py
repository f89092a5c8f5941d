"""Deterministic interpreter over the functional IR.

Integer arithmetic is checked (overflow panics, like a debug build of the
object language); loops and calls burn fuel, and running out is reported as
FuelExhausted rather than an equivalence claim either way.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import TypeMismatch
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
    UNIT_VAL,
    UnOp,
    Var,
    Variant,
    int_range,
)


class PanicSignal(Exception):
    def __init__(self, cls: str, msg: str = ""):
        super().__init__(f"panic[{cls}] {msg}")
        self.cls = cls
        self.msg = msg


class FuelExhausted(Exception):
    pass


@dataclass(frozen=True)
class Outcome:
    kind: str  # 'value' | 'panic' | 'fuel'
    value: object = None
    panic_class: str = ""

    def agrees_with(self, other: "Outcome") -> bool:
        if self.kind != other.kind:
            return False
        if self.kind == "value":
            return self.value == other.value
        if self.kind == "panic":
            return self.panic_class == other.panic_class
        return True

    def brief(self) -> str:
        if self.kind == "value":
            return f"Value({format_value(self.value)})"
        if self.kind == "panic":
            return f"Panic({self.panic_class})"
        return "FuelExhausted"


def format_value(v: object) -> str:
    if v is True or v is False:
        return "true" if v else "false"
    if isinstance(v, tuple):
        tag = v[0]
        if tag == "i":
            return str(v[2])
        if tag == "unit":
            return "()"
        if tag == "tup":
            return "(" + ", ".join(format_value(x) for x in v[1]) + ")"
        if tag == "arr":
            return "[" + ", ".join(format_value(x) for x in v[1]) + "]"
        if tag == "struct":
            return v[1] + " { " + ", ".join(format_value(x) for x in v[2]) + " }"
        if tag == "var":
            return v[1] + ("(" + ", ".join(format_value(x) for x in v[2]) + ")" if v[2] else "")
        if tag in ("char", "str"):
            return repr(v[1])
    return repr(v)


class _Fuel:
    __slots__ = ("left",)

    def __init__(self, amount: int):
        self.left = amount

    def burn(self) -> None:
        self.left -= 1
        if self.left < 0:
            raise FuelExhausted()


def interpret(f: FuncIR, args: tuple, fuel: int = 10_000, module: IrModule | None = None) -> Outcome:
    """Evaluate ⟦f⟧(args): Value, Panic(class), or FuelExhausted."""
    module = module or IrModule()
    if len(args) != len(f.params):
        raise TypeMismatch(f"{f.name} expects {len(f.params)} values, got {len(args)}")
    env = {name: val for (name, _ty), val in zip(f.params, args)}
    tank = _Fuel(fuel)
    try:
        result = _eval(f.body, env, module, tank)
    except PanicSignal as p:
        return Outcome("panic", panic_class=p.cls)
    except FuelExhausted:
        return Outcome("fuel")
    return Outcome("value", value=result)


def _call(fname: str, argvals: tuple, module: IrModule, tank: _Fuel):
    fn = module.functions.get(fname)
    if fn is None:
        raise TypeMismatch(f"call to unknown function {fname}")
    if len(argvals) != len(fn.params):
        raise TypeMismatch(f"{fname} expects {len(fn.params)} args, got {len(argvals)}")
    tank.burn()
    env = {name: val for (name, _ty), val in zip(fn.params, argvals)}
    return _eval(fn.body, env, module, tank)


def _int_binop(op: str, ty: str, a: int, b: int) -> object:
    lo, hi = int_range(ty)
    if op == "+":
        r = a + b
    elif op == "-":
        r = a - b
    elif op == "*":
        r = a * b
    elif op == "/":
        if b == 0:
            raise PanicSignal("overflow", "divide by zero")
        q = abs(a) // abs(b)
        r = q if (a >= 0) == (b >= 0) else -q
    elif op == "%":
        if b == 0:
            raise PanicSignal("overflow", "remainder by zero")
        q = abs(a) // abs(b)
        q = q if (a >= 0) == (b >= 0) else -q
        r = a - q * b
        return ("i", ty, r)
    elif op == "&":
        return ("i", ty, _mask(a & b, ty))
    elif op == "|":
        return ("i", ty, _mask(a | b, ty))
    elif op == "^":
        return ("i", ty, _mask(a ^ b, ty))
    elif op in ("<<", ">>"):
        from .ir import INT_BITS

        if b < 0 or b >= INT_BITS[ty]:
            raise PanicSignal("overflow", "shift amount out of range")
        r = a << b if op == "<<" else a >> b
        return ("i", ty, _mask(r, ty))
    else:
        raise TypeMismatch(f"unknown integer op {op}")
    if r < lo or r > hi:
        raise PanicSignal("overflow", f"attempt to {op} with overflow")
    return ("i", ty, r)


def _mask(v: int, ty: str) -> int:
    from .ir import INT_BITS

    bits = INT_BITS[ty]
    v &= (1 << bits) - 1
    if ty.startswith("i") and v >= 1 << (bits - 1):
        v -= 1 << bits
    return v


def _eval(node, env: dict, module: IrModule, tank: _Fuel):
    while True:  # trampoline for Let chains to keep recursion shallow
        if isinstance(node, Lit):
            return node.value
        if isinstance(node, Var):
            try:
                return env[node.name]
            except KeyError:
                raise TypeMismatch(f"unbound variable {node.name}") from None
        if isinstance(node, Let):
            env = dict(env)
            env[node.name] = _eval(node.value, env, module, tank)
            node = node.body
            continue
        if isinstance(node, If):
            c = _eval(node.cond, env, module, tank)
            if c is not True and c is not False:
                raise TypeMismatch("if condition is not a bool")
            node = node.then if c else node.els
            continue
        if isinstance(node, BinOp):
            a = _eval(node.left, env, module, tank)
            op = node.op
            if op == "&&":
                if a is False:
                    return False
                return _eval(node.right, env, module, tank)
            if op == "||":
                if a is True:
                    return True
                return _eval(node.right, env, module, tank)
            b = _eval(node.right, env, module, tank)
            if op in ("==", "!="):
                eq = a == b
                return eq if op == "==" else not eq
            if op in ("<", "<=", ">", ">="):
                av = a[2] if isinstance(a, tuple) and a[0] == "i" else a
                bv = b[2] if isinstance(b, tuple) and b[0] == "i" else b
                if isinstance(a, tuple) and a[0] in ("char", "str"):
                    av = a[1]
                if isinstance(b, tuple) and b[0] in ("char", "str"):
                    bv = b[1]
                if op == "<":
                    return av < bv
                if op == "<=":
                    return av <= bv
                if op == ">":
                    return av > bv
                return av >= bv
            if isinstance(a, tuple) and a[0] == "i" and isinstance(b, tuple) and b[0] == "i":
                return _int_binop(op, node.ty or a[1], a[2], b[2])
            raise TypeMismatch(f"operator {op} on non-integers")
        if isinstance(node, UnOp):
            v = _eval(node.operand, env, module, tank)
            if node.op == "not":
                if v is True or v is False:
                    return not v
                if isinstance(v, tuple) and v[0] == "i":
                    return ("i", v[1], _mask(~v[2], v[1]))
                raise TypeMismatch("! on non-bool")
            if node.op == "neg":
                if not (isinstance(v, tuple) and v[0] == "i"):
                    raise TypeMismatch("negation of non-integer")
                lo, hi = int_range(v[1])
                r = -v[2]
                if r < lo or r > hi:
                    raise PanicSignal("overflow", "negation overflow")
                return ("i", v[1], r)
        if isinstance(node, TupleNew):
            return ("tup", tuple(_eval(i, env, module, tank) for i in node.items))
        if isinstance(node, TupleGet):
            v = _eval(node.operand, env, module, tank)
            if not (isinstance(v, tuple) and v[0] == "tup"):
                raise TypeMismatch("tuple projection on non-tuple")
            return v[1][node.index]
        if isinstance(node, ArrayNew):
            return ("arr", tuple(_eval(i, env, module, tank) for i in node.items))
        if isinstance(node, Index):
            arr = _eval(node.operand, env, module, tank)
            idx = _eval(node.index, env, module, tank)
            if not (isinstance(arr, tuple) and arr[0] == "arr"):
                raise TypeMismatch("indexing a non-array")
            i = idx[2] if isinstance(idx, tuple) and idx[0] == "i" else idx
            if not isinstance(i, int) or i < 0 or i >= len(arr[1]):
                raise PanicSignal("index", f"index out of bounds: {i}")
            return arr[1][i]
        if isinstance(node, ArrayWith):
            arr = _eval(node.operand, env, module, tank)
            idx = _eval(node.index, env, module, tank)
            val = _eval(node.value, env, module, tank)
            i = idx[2] if isinstance(idx, tuple) and idx[0] == "i" else idx
            if not (isinstance(arr, tuple) and arr[0] == "arr"):
                raise TypeMismatch("index-assign on non-array")
            if not isinstance(i, int) or i < 0 or i >= len(arr[1]):
                raise PanicSignal("index", f"index out of bounds: {i}")
            items = list(arr[1])
            items[i] = val
            return ("arr", tuple(items))
        if isinstance(node, StructNew):
            return ("struct", node.name, tuple(_eval(a, env, module, tank) for a in node.args))
        if isinstance(node, FieldGet):
            v = _eval(node.operand, env, module, tank)
            if not (isinstance(v, tuple) and v[0] == "struct"):
                raise TypeMismatch("field access on non-struct")
            fields = module.structs.get(v[1])
            if fields is None:
                raise TypeMismatch(f"unknown struct {v[1]}")
            for i, (fname, _ty) in enumerate(fields):
                if fname == node.name:
                    return v[2][i]
            raise TypeMismatch(f"struct {v[1]} has no field {node.name}")
        if isinstance(node, StructWith):
            v = _eval(node.operand, env, module, tank)
            val = _eval(node.value, env, module, tank)
            fields = module.structs.get(v[1])
            if fields is None:
                raise TypeMismatch(f"unknown struct {v[1]}")
            vals = list(v[2])
            for i, (fname, _ty) in enumerate(fields):
                if fname == node.name:
                    vals[i] = val
                    return ("struct", v[1], tuple(vals))
            raise TypeMismatch(f"struct {v[1]} has no field {node.name}")
        if isinstance(node, Variant):
            return ("var", node.ctor, tuple(_eval(a, env, module, tank) for a in node.args))
        if isinstance(node, Match):
            v = _eval(node.scrutinee, env, module, tank)
            for pat, body in node.arms:
                bound = _match(pat, v)
                if bound is None:
                    continue
                if bound:
                    env = dict(env)
                    env.update(bound)
                node = body
                break
            else:
                raise TypeMismatch(f"match fell through on {v!r}")
            continue
        if isinstance(node, Call):
            argvals = tuple(_eval(a, env, module, tank) for a in node.args)
            return _call(node.fname, argvals, module, tank)
        if isinstance(node, Loop):
            state = tuple(_eval(i, env, module, tank) for i in node.init)
            while True:
                tank.burn()
                ienv = dict(env)
                ienv.update(zip(node.state, state))
                step = _eval(node.body, ienv, module, tank)
                if not (isinstance(step, tuple) and step[0] == "var"):
                    raise TypeMismatch("loop body produced a non-variant")
                tag, args = step[1], step[2]
                if tag == "#cont":
                    state = args
                    continue
                if tag == "#brk":
                    return ("var", "#ok", args)
                if tag == "#ret":
                    return ("var", "#ret", args)
                raise TypeMismatch(f"loop body produced unexpected tag {tag}")
        if isinstance(node, Panic):
            raise PanicSignal(node.cls, node.msg)
        if isinstance(node, Cast):
            v = _eval(node.operand, env, module, tank)
            if isinstance(v, tuple) and v[0] == "i":
                return ("i", node.to_ty, _mask(v[2], node.to_ty))
            if v is True or v is False:
                return ("i", node.to_ty, 1 if v else 0)
            if isinstance(v, tuple) and v[0] == "char":
                return ("i", node.to_ty, _mask(ord(v[1]), node.to_ty))
            raise TypeMismatch("unsupported cast operand")
        raise TypeMismatch(f"unknown IR node {node!r}")


def _match(pat, v) -> dict | None:
    kind = pat[0]
    if kind == "wild":
        return {}
    if kind == "bind":
        return {pat[1]: v}
    if kind == "lit":
        return {} if v == pat[1] else None
    if kind == "var":
        if not (isinstance(v, tuple) and v[0] == "var" and v[1] == pat[1]):
            return None
        subs = pat[2]
        if len(subs) != len(v[2]):
            return None
        out: dict = {}
        for sp, sv in zip(subs, v[2]):
            m = _match(sp, sv)
            if m is None:
                return None
            out.update(m)
        return out
    if kind == "tup":
        if not (isinstance(v, tuple) and v[0] == "tup" and len(v[1]) == len(pat[1])):
            return None
        out = {}
        for sp, sv in zip(pat[1], v[1]):
            m = _match(sp, sv)
            if m is None:
                return None
            out.update(m)
        return out
    raise TypeMismatch(f"unknown pattern {pat!r}")
