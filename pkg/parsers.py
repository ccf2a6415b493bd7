"""Input detection and parsing of loss files into validated samples."""

from __future__ import annotations

import csv
import logging
import re
from pathlib import Path

from errors import EmptyInput, ParseError
from estimators import make_sample
from models import InputFormat, Sample

logger = logging.getLogger(__name__)

_DELIMITERS = (",", ";", "\t")
_COMMENT = re.compile(r"^\s*#")


# --- Format detection ---

def _delimiter(line: str) -> str | None:
    for d in _DELIMITERS:
        if d in line:
            return d
    return None


def detect_format(text: str, column: str | int | None = None) -> tuple[InputFormat, str | None]:
    """Plain one-value-per-line text, or a delimited table.

    Returns the format and the delimiter for delimited input.
    """
    for line in text.splitlines():
        if not line.strip() or _COMMENT.match(line):
            continue
        d = _delimiter(line)
        if d is not None:
            return InputFormat.DELIMITED, d
        break
    if column is not None:
        # a single-column table with a header still selects by name
        return InputFormat.DELIMITED, ","
    return InputFormat.PLAIN, None


# --- Parsers ---

def _to_float(token: str, line: int) -> float:
    try:
        return float(token.strip().strip('"'))
    except ValueError:
        raise ParseError(line, f"not a number: {token.strip()!r}") from None


def parse_plain(text: str) -> list[float]:
    values: list[float] = []
    for i, line in enumerate(text.splitlines(), 1):
        if not line.strip() or _COMMENT.match(line):
            continue
        values.append(_to_float(line, i))
    return values


def _resolve_column(fields: list[str], column: str | int | None, line: int) -> tuple[int, bool]:
    """Column index, and whether this first row is a header."""
    names = [f.strip().strip('"') for f in fields]

    if column is None:
        idx = len(fields) - 1
    elif isinstance(column, int) or str(column).isdigit():
        idx = int(column)
        if not 0 <= idx < len(fields):
            raise ParseError(line, f"column index {idx} out of range ({len(fields)} fields)")
    elif column in names:
        return names.index(column), True
    else:
        raise ParseError(line, f"column {column!r} not found in header {names}")
    return idx, not _is_number(names[idx])


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def parse_delimited(text: str, delimiter: str, column: str | int | None = None) -> list[float]:
    values: list[float] = []
    idx: int | None = None
    for i, line in enumerate(text.splitlines(), 1):
        if not line.strip() or _COMMENT.match(line):
            continue
        fields = next(csv.reader([line], delimiter=delimiter))
        if idx is None:
            idx, is_header = _resolve_column(fields, column, i)
            if is_header:
                continue
        if idx >= len(fields):
            raise ParseError(i, f"expected at least {idx + 1} fields, got {len(fields)}")
        values.append(_to_float(fields[idx], i))
    return values


def parse_text(text: str, column: str | int | None = None) -> list[float]:
    fmt, delimiter = detect_format(text, column)
    if fmt is InputFormat.PLAIN:
        return parse_plain(text)
    return parse_delimited(text, delimiter or ",", column)


def ingest(path: str | Path, column: str | int | None = None, take_abs: bool = False) -> Sample:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"input file not found: {path}")

    text = path.read_text(encoding="utf-8", errors="replace")
    values = parse_text(text, column)
    if not values:
        raise EmptyInput(f"no values in {path}")

    sample = make_sample(values, take_abs=take_abs, source=path.name)
    logger.info("ingested %d values from %s (sha256 %s)", sample.n, path.name, sample.digest()[:16])
    return sample
