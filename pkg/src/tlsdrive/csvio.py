"""CSV artifacts: fixed dialect, atomic writes.

Comma separated, '.' decimal, scientific notation with 9 significant
digits, one header row, metadata as leading '#'-prefixed key=value
lines.  Files are written to a temporary sibling and renamed into place
so readers never observe partial output.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path


def format_number(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    return f"{float(x):.8e}"


def format_cell(x) -> str:
    if isinstance(x, str):
        return x
    return format_number(x)


def write_csv(path, header: list[str], rows, meta: dict | None = None) -> None:
    """Atomically write rows (iterable of value tuples) with metadata lines."""
    path = Path(path)
    lines = []
    for key in sorted(meta or {}):
        lines.append(f"# {key}={meta[key]}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(format_cell(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
