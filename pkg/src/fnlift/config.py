"""Tool configuration: key=value config files with environment overrides.

Recognized keys (file form / env form):

    repair.check_cmd        FNLIFT_REPAIR_CHECK_CMD     compiler check template
    repair.max_iterations   FNLIFT_REPAIR_MAX_ITERATIONS
    repair.timeout_s        FNLIFT_REPAIR_TIMEOUT_S
    repair.lifetime_codes   FNLIFT_REPAIR_LIFETIME_CODES (comma separated)
    repair.elide            FNLIFT_REPAIR_ELIDE
    domain.int_lo / int_hi  FNLIFT_DOMAIN_INT_LO / ..HI
    domain.array_max        FNLIFT_DOMAIN_ARRAY_MAX
    domain.budget           FNLIFT_DOMAIN_BUDGET
    domain.fuel             FNLIFT_DOMAIN_FUEL
    verify.timeout_s        FNLIFT_VERIFY_TIMEOUT_S
    verify.compile_check    FNLIFT_VERIFY_COMPILE_CHECK
    daemon.session_cap      FNLIFT_DAEMON_SESSION_CAP

The check command is a shell-style template; {file} and {dir} expand to the
scratch crate's source file and root.
"""

from __future__ import annotations

import os
import shlex
from dataclasses import dataclass, field, replace

DEFAULT_CHECK_CMD = "rustc --edition=2021 --crate-type=lib --error-format=json -A warnings --emit=metadata -o {devnull} {file}"

DEFAULT_LIFETIME_CODES = ("E0106", "E0621", "E0623", "E0495", "E0700", "E0311")
DEFAULT_LIFETIME_PATTERNS = (
    "missing lifetime",
    "lifetime may not live long enough",
    "explicit lifetime required",
    "lifetime mismatch",
    "borrowed data escapes outside of function",
)


@dataclass
class Config:
    check_cmd: str = DEFAULT_CHECK_CMD
    repair_max_iterations: int = 8
    repair_timeout_s: float = 30.0
    lifetime_codes: tuple[str, ...] = DEFAULT_LIFETIME_CODES
    lifetime_patterns: tuple[str, ...] = DEFAULT_LIFETIME_PATTERNS
    repair_elide: bool = True
    domain_int_lo: int = -8
    domain_int_hi: int = 8
    domain_array_max: int = 3
    domain_budget: int = 200_000
    domain_fuel: int = 10_000
    verify_timeout_s: float = 10.0
    verify_compile_check: bool = True
    session_cap: int = 32

    def check_argv(self, file: str, directory: str) -> list[str]:
        devnull = os.devnull
        return [
            part.format(file=file, dir=directory, devnull=devnull)
            for part in shlex.split(self.check_cmd)
        ]


_KEYMAP = {
    "repair.check_cmd": ("check_cmd", str),
    "repair.max_iterations": ("repair_max_iterations", int),
    "repair.timeout_s": ("repair_timeout_s", float),
    "repair.elide": ("repair_elide", lambda v: v.lower() in ("1", "true", "yes")),
    "repair.lifetime_codes": ("lifetime_codes", lambda v: tuple(x.strip() for x in v.split(",") if x.strip())),
    "domain.int_lo": ("domain_int_lo", int),
    "domain.int_hi": ("domain_int_hi", int),
    "domain.array_max": ("domain_array_max", int),
    "domain.budget": ("domain_budget", int),
    "domain.fuel": ("domain_fuel", int),
    "verify.timeout_s": ("verify_timeout_s", float),
    "verify.compile_check": ("verify_compile_check", lambda v: v.lower() in ("1", "true", "yes")),
    "daemon.session_cap": ("session_cap", int),
}


def load_config(path: str | None = None, env: dict[str, str] | None = None) -> Config:
    cfg = Config()
    values: dict[str, object] = {}
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected key=value")
                key, raw = line.split("=", 1)
                key = key.strip()
                if key not in _KEYMAP:
                    raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
                attr, conv = _KEYMAP[key]
                values[attr] = conv(raw.strip())
    env = os.environ if env is None else env
    for key, (attr, conv) in _KEYMAP.items():
        env_key = "FNLIFT_" + key.replace(".", "_").upper()
        if env_key in env:
            values[attr] = conv(env[env_key])
    return replace(cfg, **values)
