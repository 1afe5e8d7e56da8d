"""Small shared I/O helpers."""

from __future__ import annotations

import hashlib
from pathlib import Path


def fmt9(x: float) -> str:
    """Fixed 9-decimal formatting used for every float we serialize."""
    return f"{x:.9f}"


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
