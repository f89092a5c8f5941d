"""Finite input domains: the explicit Dom(f) the obligation quantifies over.

Integers get a window around zero plus the type extremes; arrays and structs
are products of their element domains. Enumeration order is lexicographic in
value order, so the first counterexample found by a sequential scan is the
lexicographically smallest one.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from ..config import Config
from .ir import FuncIR, IrModule, int_range
from .lower import LowerError


@dataclass
class InputDomain:
    per_param: list[tuple[str, list[object]]]  # (name, ordered value set)
    budget: int
    seed: int = 0

    @property
    def total_size(self) -> int:
        n = 1
        for _name, values in self.per_param:
            n *= len(values)
        return n

    def enumerate(self):
        return itertools.product(*(values for _n, values in self.per_param))

    def sample(self, count: int):
        rng = random.Random(self.seed)
        sets = [values for _n, values in self.per_param]
        for _ in range(count):
            yield tuple(rng.choice(vs) for vs in sets)

    def describe(self) -> str:
        parts = []
        for name, values in self.per_param:
            parts.append(f"{name} ∈ {{{len(values)} values}}")
        return ", ".join(parts) if parts else "(no inputs)"


def _int_values(ty: str, lo: int, hi: int) -> list[object]:
    tmin, tmax = int_range(ty)
    window = range(max(lo, tmin), min(hi, tmax) + 1)
    values = {tmin, tmax}
    values.update(window)
    return [("i", ty, v) for v in sorted(values)]


def _values_for(ty: object, config: Config, module: IrModule) -> list[object]:
    if isinstance(ty, str):
        if ty == "bool":
            return [False, True]
        if ty == "unit":
            return [("unit",)]
        if ty == "char":
            return [("char", c) for c in ("A", "a", "z", "0")]
        if ty in ("str",):
            raise LowerError("string inputs cannot be enumerated")
        return _int_values(ty, config.domain_int_lo, config.domain_int_hi)
    if isinstance(ty, tuple):
        if ty[0] == "tuple":
            parts = [_values_for(t, config, module) for t in ty[1]]
            return [("tup", combo) for combo in itertools.product(*parts)]
        if ty[0] == "array":
            if ty[2] > config.domain_array_max:
                raise LowerError(f"array length {ty[2]} exceeds the domain cap {config.domain_array_max}")
            elem = _values_for(ty[1], config, module)
            return [("arr", combo) for combo in itertools.product(elem, repeat=ty[2])]
        if ty[0] == "struct":
            fields = module.structs.get(ty[1])
            if fields is None:
                raise LowerError(f"struct `{ty[1]}` has no lowered definition")
            parts = [_values_for(ft, config, module) for _fn, ft in fields]
            return [("struct", ty[1], combo) for combo in itertools.product(*parts)]
        if ty[0] == "enumv":
            raise LowerError(f"enum-typed inputs ({ty[1]}) cannot be enumerated")
    if ty is None:
        raise LowerError("untyped input cannot be enumerated")
    raise LowerError(f"inputs of type {ty!r} cannot be enumerated")


def build_domain(fn: FuncIR, module: IrModule, config: Config | None = None, seed: int = 0) -> InputDomain:
    config = config or Config()
    per_param = [(name, _values_for(ty, config, module)) for name, ty in fn.params]
    return InputDomain(per_param, budget=config.domain_budget, seed=seed)
