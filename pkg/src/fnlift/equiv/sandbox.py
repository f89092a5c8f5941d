"""Virtual crates: isolated sandbox directories for the two program versions.

Both live under the system temp directory, never inside the user's tree, and
are removed when the session ends, on success and on every error path.
"""

from __future__ import annotations

import os
import shutil
import tempfile

from ..errors import IoError
from ..repair.toolchain import _MANIFEST


class VirtualCrates:
    def __init__(self, original_text: str, refactored_text: str, workdir: str | None = None):
        self.original_dir: str | None = None
        self.refactored_dir: str | None = None
        try:
            self.original_dir = self._make(original_text, "original", workdir)
            self.refactored_dir = self._make(refactored_text, "refactored", workdir)
        except OSError as exc:
            self.cleanup()
            raise IoError(f"cannot create virtual crates: {exc}") from exc

    @staticmethod
    def _make(text: str, tag: str, workdir: str | None) -> str:
        root = tempfile.mkdtemp(prefix=f"fnlift-{tag}-", dir=workdir)
        try:
            os.makedirs(os.path.join(root, "src"), exist_ok=True)
            with open(os.path.join(root, "Cargo.toml"), "w", encoding="utf-8") as fh:
                fh.write(_MANIFEST)
            with open(os.path.join(root, "src", "lib.rs"), "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError:
            shutil.rmtree(root, ignore_errors=True)
            raise
        return root

    def cleanup(self) -> None:
        for d in (self.original_dir, self.refactored_dir):
            if d:
                shutil.rmtree(d, ignore_errors=True)
        self.original_dir = None
        self.refactored_dir = None

    def __enter__(self) -> "VirtualCrates":
        return self

    def __exit__(self, *exc) -> None:
        self.cleanup()

    def __del__(self) -> None:  # dropped mid-verification still cleans up
        self.cleanup()


def build_virtual_crates(original_text: str, refactored_text: str, workdir: str | None = None) -> VirtualCrates:
    return VirtualCrates(original_text, refactored_text, workdir)
