from .unit import SourceUnit, SelectionRegion, parse_unit, resolve_selection, find_marked_region
from .catalog import StdCatalog, SigDescriptor, NotInCatalog, load_default_catalog, lookup_std

__all__ = [
    "SourceUnit",
    "SelectionRegion",
    "parse_unit",
    "resolve_selection",
    "find_marked_region",
    "StdCatalog",
    "SigDescriptor",
    "NotInCatalog",
    "load_default_catalog",
    "lookup_std",
]
