"""Pure functional IR: the carrier for behavioural equivalence checks.

No reference types survive lowering: a `&mut T` parameter appears as an
input value plus one threaded-back output slot, a `&T` parameter as a plain
input value. Values are plain Python data, hashable, compared structurally.

Value encoding (tagged tuples):
    ('i', ty, n)           integers with their Rust type name
    True / False           bool
    ('unit',)              ()
    ('tup', (v, ...))      tuples
    ('arr', (v, ...))      arrays
    ('struct', name, (v, ...))   field values in declaration order
    ('var', ctor, (v, ...))      enum-ish variants (ControlFlow etc.)
    ('char', c) / ('str', s)     literal scalars
"""

from __future__ import annotations

from dataclasses import dataclass, field

UNIT_VAL = ("unit",)

INT_BITS = {
    "i8": 8, "i16": 16, "i32": 32, "i64": 64, "i128": 128, "isize": 64,
    "u8": 8, "u16": 16, "u32": 32, "u64": 64, "u128": 128, "usize": 64,
}


def int_range(ty: str) -> tuple[int, int]:
    bits = INT_BITS[ty]
    if ty.startswith("u"):
        return 0, (1 << bits) - 1
    return -(1 << (bits - 1)), (1 << (bits - 1)) - 1


# -- expression nodes --------------------------------------------------------


@dataclass(slots=True)
class Ir:
    pass


@dataclass(slots=True)
class Lit(Ir):
    value: object


@dataclass(slots=True)
class Var(Ir):
    name: str


@dataclass(slots=True)
class Let(Ir):
    name: str
    value: Ir
    body: Ir


@dataclass(slots=True)
class If(Ir):
    cond: Ir
    then: Ir
    els: Ir


@dataclass(slots=True)
class BinOp(Ir):
    op: str  # + - * / % == != < <= > >= & | ^ << >>
    ty: str | None  # integer type for checked arithmetic; None for comparisons
    left: Ir
    right: Ir


@dataclass(slots=True)
class UnOp(Ir):
    op: str  # 'neg' | 'not'
    ty: str | None
    operand: Ir


@dataclass(slots=True)
class TupleNew(Ir):
    items: tuple[Ir, ...]


@dataclass(slots=True)
class TupleGet(Ir):
    operand: Ir
    index: int


@dataclass(slots=True)
class ArrayNew(Ir):
    items: tuple[Ir, ...]


@dataclass(slots=True)
class Index(Ir):
    operand: Ir
    index: Ir


@dataclass(slots=True)
class ArrayWith(Ir):
    operand: Ir
    index: Ir
    value: Ir


@dataclass(slots=True)
class StructNew(Ir):
    name: str
    fields: tuple[str, ...]
    args: tuple[Ir, ...]


@dataclass(slots=True)
class FieldGet(Ir):
    operand: Ir
    name: str


@dataclass(slots=True)
class StructWith(Ir):
    operand: Ir
    name: str
    value: Ir


@dataclass(slots=True)
class Variant(Ir):
    ctor: str
    args: tuple[Ir, ...]


@dataclass(slots=True)
class Match(Ir):
    scrutinee: Ir
    arms: tuple[tuple[object, Ir], ...]  # (pattern, body)
    # patterns: ('var', ctor, (subpat, ...)) | ('lit', value) | ('bind', name)
    #           | ('wild',) | ('tup', (subpat, ...))


@dataclass(slots=True)
class Call(Ir):
    fname: str
    args: tuple[Ir, ...]


@dataclass(slots=True)
class Loop(Ir):
    state: tuple[str, ...]
    init: tuple[Ir, ...]
    body: Ir  # evaluates to '#cont'(m..) | '#brk'(v, m..) | '#ret'(v, m..)
    # the node itself yields '#ok'(v, m..) | '#ret'(v, m..)


@dataclass(slots=True)
class Panic(Ir):
    cls: str  # 'overflow' | 'index' | 'explicit'
    msg: str


@dataclass(slots=True)
class Cast(Ir):
    operand: Ir
    to_ty: str  # wrapping `as` conversion


# -- functions and modules ---------------------------------------------------

ValueTy = object  # 'i32' | 'bool' | 'unit' | 'char' | ('tuple', (...)) | ('array', t, n) | ('struct', name)


@dataclass
class FuncIR:
    name: str
    params: list[tuple[str, ValueTy]]  # functionalised: values only
    mut_slots: list[int]  # indices of params threaded back as extra outputs
    body: Ir
    ret_ty: ValueTy = "unit"


@dataclass
class IrModule:
    functions: dict[str, FuncIR] = field(default_factory=dict)
    structs: dict[str, tuple[tuple[str, ValueTy], ...]] = field(default_factory=dict)


def ir_key(node: Ir) -> object:
    """Stable structural key for tree comparison."""
    if isinstance(node, Lit):
        return ("lit", node.value)
    if isinstance(node, Var):
        return ("v", node.name)
    if isinstance(node, Let):
        return ("let", node.name, ir_key(node.value), ir_key(node.body))
    if isinstance(node, If):
        return ("if", ir_key(node.cond), ir_key(node.then), ir_key(node.els))
    if isinstance(node, BinOp):
        return ("b", node.op, node.ty, ir_key(node.left), ir_key(node.right))
    if isinstance(node, UnOp):
        return ("u", node.op, node.ty, ir_key(node.operand))
    if isinstance(node, TupleNew):
        return ("t", tuple(ir_key(i) for i in node.items))
    if isinstance(node, TupleGet):
        return ("tg", node.index, ir_key(node.operand))
    if isinstance(node, ArrayNew):
        return ("a", tuple(ir_key(i) for i in node.items))
    if isinstance(node, Index):
        return ("ix", ir_key(node.operand), ir_key(node.index))
    if isinstance(node, ArrayWith):
        return ("aw", ir_key(node.operand), ir_key(node.index), ir_key(node.value))
    if isinstance(node, StructNew):
        return ("s", node.name, node.fields, tuple(ir_key(a) for a in node.args))
    if isinstance(node, FieldGet):
        return ("fg", node.name, ir_key(node.operand))
    if isinstance(node, StructWith):
        return ("sw", node.name, ir_key(node.operand), ir_key(node.value))
    if isinstance(node, Variant):
        return ("vr", node.ctor, tuple(ir_key(a) for a in node.args))
    if isinstance(node, Match):
        return ("m", ir_key(node.scrutinee), tuple((p, ir_key(b)) for p, b in node.arms))
    if isinstance(node, Call):
        return ("c", node.fname, tuple(ir_key(a) for a in node.args))
    if isinstance(node, Loop):
        return ("lp", node.state, tuple(ir_key(i) for i in node.init), ir_key(node.body))
    if isinstance(node, Panic):
        return ("p", node.cls)
    if isinstance(node, Cast):
        return ("cast", node.to_ty, ir_key(node.operand))
    raise TypeError(f"unknown IR node {node!r}")
