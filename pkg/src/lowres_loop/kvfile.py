"""Plain ``key = value`` text files.

Used for corpus manifests and experiment configs.  Blank lines and lines
starting with ``#`` are ignored; keys may repeat only where the caller
allows it.
"""

from pathlib import Path


def parse_kv_text(text: str) -> list[tuple[str, str]]:
    """Parse key-value lines, preserving order.  Raises ValueError on junk."""
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        entries.append((key, value))
    return entries


def read_kv_file(path: str | Path) -> list[tuple[str, str]]:
    return parse_kv_text(Path(path).read_text(encoding="utf-8"))


def format_kv(entries: list[tuple[str, str]], header: str | None = None) -> str:
    lines = []
    if header:
        lines.append(f"# {header}")
    lines.extend(f"{key} = {value}" for key, value in entries)
    return "\n".join(lines) + "\n"


def write_kv_file(path: str | Path, entries: list[tuple[str, str]],
                  header: str | None = None) -> None:
    Path(path).write_text(format_kv(entries, header), encoding="utf-8")
