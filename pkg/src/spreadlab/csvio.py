"""Small CSV helpers: '#'-prefixed comment headers over plain CSV bodies."""

from __future__ import annotations

import csv
import io
import os
from typing import Iterable, Iterator


def comment_lines(comments: dict | Iterable[str] | None) -> list[str]:
    if comments is None:
        return []
    if isinstance(comments, dict):
        return [f"# {key} = {value}" for key, value in comments.items()]
    return [line if line.startswith("#") else f"# {line}" for line in comments]


def format_rows(buf, columns, rows: Iterable, comments=None) -> None:
    """Write comment lines, a header row, then data rows to a text buffer."""
    for line in comment_lines(comments):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)


def write_csv(path, columns, rows: Iterable, comments=None) -> None:
    with open(path, "w", newline="") as fh:
        format_rows(fh, columns, rows, comments)


def iter_csv_rows(source) -> Iterator[list[str]]:
    """Yield CSV rows from a path, text blob, or line iterable, skipping comments.

    A str containing a newline is treated as CSV text, anything else
    str-or-pathlike as a filesystem path.
    """
    if isinstance(source, str) and "\n" in source:
        lines = io.StringIO(source)
    elif isinstance(source, (str, os.PathLike)):
        with open(source, newline="") as fh:
            lines = io.StringIO(fh.read())
    else:
        lines = source
    for row in csv.reader(line for line in lines if not line.lstrip().startswith("#")):
        yield row
