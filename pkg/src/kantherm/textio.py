"""Small helpers for the line-oriented ``key = value`` config files and CSVs.

All tabular artifacts are plain CSV with floats written via ``repr`` so a
write/read cycle is lossless and reruns are byte-identical.
"""

from __future__ import annotations

import configparser
import csv
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError, ParseError


def fmt(value) -> str:
    """Format a scalar for CSV/INI output; ``None`` and NaN become empty."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return repr(float(value))
    if hasattr(value, "item"):  # numpy scalar
        return fmt(value.item())
    return str(value)


def parse_pairs(text: str) -> list[tuple[float, float]]:
    """Parse ``"a:b, c:d"`` into ``[(a, b), (c, d)]``."""
    pairs = []
    for chunk in text.replace("\n", ",").split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            a, b = chunk.split(":")
            pairs.append((float(a), float(b)))
        except ValueError:
            raise ConfigError(f"bad pair {chunk!r}, expected 'x:y'") from None
    return pairs


def format_pairs(pairs: Iterable[tuple[float, float]]) -> str:
    return ", ".join(f"{fmt(float(a))}:{fmt(float(b))}" for a, b in pairs)


def parse_list(text: str, kind=float) -> list:
    items = [s.strip() for s in text.replace("\n", ",").split(",")]
    try:
        return [kind(float(s)) if kind is int else kind(s) for s in items if s]
    except ValueError:
        raise ConfigError(f"cannot parse list {text!r}") from None


def read_ini(path) -> configparser.ConfigParser:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return cp


def write_ini(path, sections: Mapping[str, Mapping[str, object]], header: str | None = None) -> None:
    """Write sections in the given order; values are formatted with :func:`fmt`."""
    lines = []
    if header:
        lines += [f"# {ln}" if ln else "#" for ln in header.splitlines()]
        lines.append("")
    for name, body in sections.items():
        lines.append(f"[{name}]")
        for key, value in body.items():
            lines.append(f"{key} = {value if isinstance(value, str) else fmt(value)}")
        lines.append("")
    Path(path).write_text("\n".join(lines), encoding="utf-8")


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    if not path.is_file():
        raise ParseError(f"file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: empty file")
    return rows[0], rows[1:]


def to_float(text: str) -> float:
    return float("nan") if text == "" else float(text)
