"""Helpers shared by the plain-text file formats."""

from pathlib import Path

from .errors import LhvOutError


def content_lines(source):
    """Non-empty lines of a file or string with ``#`` comments removed."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                    and Path(source).exists()):
        text = Path(source).read_text()
    else:
        text = source
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    return lines


def parse_header(line, keys):
    """Parse ``key value key value ...`` into a dict of ints, checking key order."""
    tokens = line.split()
    if len(tokens) != 2 * len(keys) or tuple(tokens[0::2]) != tuple(keys):
        raise LhvOutError(f"expected header with keys {keys}, got {line!r}")
    try:
        return {k: int(v) for k, v in zip(tokens[0::2], tokens[1::2])}
    except ValueError as exc:
        raise LhvOutError(f"non-integer header value in {line!r}") from exc


def expect_magic(lines, *magics):
    if not lines or lines[0] not in magics:
        found = lines[0] if lines else "<empty>"
        raise LhvOutError(f"expected one of {magics} on first line, got {found!r}")
    return lines[0]


def fmt(value):
    return repr(float(value))


def write_text(path, lines):
    Path(path).write_text("\n".join(lines) + "\n")
