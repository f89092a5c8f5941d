from .profile import CaptureInfo, OutflowInfo, NlcfProfile, RegionProfile, Mode, NlcfKind
from .analyze import analyze_region, detect_nlcf, detect_flags, applicable_generics

__all__ = [
    "CaptureInfo",
    "OutflowInfo",
    "NlcfProfile",
    "RegionProfile",
    "Mode",
    "NlcfKind",
    "analyze_region",
    "detect_nlcf",
    "detect_flags",
    "applicable_generics",
]
