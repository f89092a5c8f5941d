"""Curated standard-library signature catalog.

A single-file view of a program has no knowledge of std, which is exactly
what produces `_` placeholders in synthesized signatures. The catalog is a
small, versioned table of the std items the tool needs: type constructors,
method receiver/param/return shapes, and trait memberships. Lookups are
total: an unknown path yields the explicit NotInCatalog value, never an
invented signature.

The data file is line-oriented TSV (`path<TAB>kind<TAB>field=value...`) and
can be overridden with the FNLIFT_STD_CATALOG environment variable.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from importlib import resources


class _NotInCatalog:
    __slots__ = ()

    def __bool__(self) -> bool:
        return False

    def __repr__(self) -> str:
        return "NotInCatalog"


NotInCatalog = _NotInCatalog()


@dataclass(frozen=True)
class SigDescriptor:
    path: str  # fully qualified, e.g. std::vec::Vec::push
    kind: str  # 'type' | 'method' | 'function'
    receiver: str = ""  # '', 'self', '&self', '&mut self'
    params: tuple[str, ...] = ()
    ret: str = ""
    arity: int = 0  # generic arity for type entries
    traits: tuple[str, ...] = ()  # trait memberships for type entries

    @property
    def mutates_receiver(self) -> bool:
        return self.receiver == "&mut self"


@dataclass
class StdCatalog:
    entries: dict[str, SigDescriptor]
    provenance: str
    _methods: dict[tuple[str, str], SigDescriptor] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for desc in self.entries.values():
            if desc.kind == "method":
                owner = desc.path.rsplit("::", 2)[-2]
                self._methods[(owner, desc.path.rsplit("::", 1)[-1])] = desc

    def lookup(self, qualified_path: str):
        return self.entries.get(qualified_path, NotInCatalog)

    def method_on(self, type_name: str, method: str):
        """Method lookup by short type name: ('Vec', 'push') etc.
        Integer primitives share one method table under 'int'."""
        desc = self._methods.get((type_name, method))
        if desc is not None:
            return desc
        if type_name in _INT_TYPES:
            d = self._methods.get(("int", method))
            if d is not None:
                return d
        return NotInCatalog


_INT_TYPES = {"i8", "i16", "i32", "i64", "i128", "isize", "u8", "u16", "u32", "u64", "u128", "usize"}


def lookup_std(catalog: StdCatalog, qualified_path: str):
    """Total lookup: descriptor or NotInCatalog."""
    return catalog.lookup(qualified_path)


def parse_catalog(text: str, provenance: str) -> StdCatalog:
    entries: dict[str, SigDescriptor] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.rstrip("\n")
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise ValueError(f"catalog line {lineno}: expected path<TAB>kind")
        path, kind = parts[0], parts[1]
        fields = dict(p.split("=", 1) for p in parts[2:] if "=" in p)
        entries[path] = SigDescriptor(
            path=path,
            kind=kind,
            receiver=fields.get("recv", ""),
            params=tuple(p for p in fields.get("params", "").split(",") if p),
            ret=fields.get("ret", ""),
            arity=int(fields.get("arity", "0")),
            traits=tuple(t for t in fields.get("traits", "").split(",") if t),
        )
    return StdCatalog(entries, provenance)


def load_default_catalog() -> StdCatalog:
    override = os.environ.get("FNLIFT_STD_CATALOG")
    if override:
        with open(override, "r", encoding="utf-8") as fh:
            return parse_catalog(fh.read(), f"file:{override}")
    data = resources.files("fnlift.source").joinpath("data/std_catalog.tsv").read_text("utf-8")
    first = data.splitlines()[0]
    version = first.lstrip("# ").strip() if first.startswith("#") else "unversioned"
    return parse_catalog(data, version)
