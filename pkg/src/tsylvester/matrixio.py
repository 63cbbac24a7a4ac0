"""Plain-text matrix files shared by the command-line tools.

Format: a header line ``rows cols``, then ``rows`` lines of whitespace
separated decimal values.  Values are written with 17 significant digits,
which round-trips float64 exactly.
"""
from __future__ import annotations

import os

import numpy as np

__all__ = ["MatrixFormatError", "format_matrix", "parse_matrix", "read_matrix", "write_matrix"]


class MatrixFormatError(ValueError):
    """Malformed matrix text."""


def format_matrix(m: np.ndarray) -> str:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    rows, cols = m.shape
    lines = [f"{rows} {cols}"]
    for row in m:
        lines.append(" ".join(f"{value:.17g}" for value in row))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    tokens = text.split()
    if len(tokens) < 2:
        raise MatrixFormatError("missing 'rows cols' header")
    try:
        rows, cols = int(tokens[0]), int(tokens[1])
    except ValueError as exc:
        raise MatrixFormatError(f"bad header {tokens[:2]!r}: {exc}") from exc
    if rows < 0 or cols < 0:
        raise MatrixFormatError(f"negative dimensions {rows} x {cols}")
    values = tokens[2:]
    if len(values) != rows * cols:
        raise MatrixFormatError(
            f"expected {rows * cols} values for a {rows} x {cols} matrix, got {len(values)}"
        )
    try:
        data = np.array([float(v) for v in values])
    except ValueError as exc:
        raise MatrixFormatError(f"non-numeric value: {exc}") from exc
    return data.reshape(rows, cols)


def read_matrix(path: str | os.PathLike) -> np.ndarray:
    with open(path, "r", encoding="ascii") as fh:
        return parse_matrix(fh.read())


def write_matrix(path: str | os.PathLike, m: np.ndarray) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_matrix(m))
