"""Small CSV/file helpers shared by the output writers."""

from __future__ import annotations

import os
import tempfile

__all__ = ["fmt_float", "atomic_write_text"]


def fmt_float(v: float) -> str:
    """17 significant digits: enough for a bit-exact binary64 round trip."""
    return format(float(v), ".17g")


def atomic_write_text(path: str, text: str) -> None:
    """Write via a temp file in the same directory + rename, so readers never
    see a partially written file and an interrupt leaves no torn output."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix=".csv")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
