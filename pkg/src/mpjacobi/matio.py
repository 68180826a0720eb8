"""Plain-text symmetric matrix files.

Format: the first line holds the dimension n, followed by n lines of n
whitespace-separated values.  Hex-float (``float.hex()``) is the normative
encoding and round-trips exactly; shortest-decimal (``repr``) is accepted and
also round-trips.  Tokens containing ``x`` or ``p`` are parsed as hex-floats.
"""

from __future__ import annotations

import numpy as np


class MatrixParseError(ValueError):
    """Malformed matrix file; the message carries the 1-based line number."""


def format_float(x: float, fmt: str = "hex") -> str:
    if fmt == "hex":
        return float(x).hex()
    if fmt == "dec":
        return repr(float(x))
    raise ValueError(f"unknown float format {fmt!r}")


def parse_float(token: str) -> float:
    if "x" in token or "X" in token or "p" in token or "P" in token:
        return float.fromhex(token)
    return float(token)


def save_matrix(path, A, fmt: str = "hex") -> None:
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    n = A.shape[0]
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{n}\n")
        for i in range(n):
            f.write(" ".join(format_float(A[i, j], fmt) for j in range(n)))
            f.write("\n")


def load_matrix(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as f:
        lines = f.readlines()
    if not lines:
        raise MatrixParseError("line 1: empty file")
    try:
        n = int(lines[0].split()[0])
    except (ValueError, IndexError):
        raise MatrixParseError(f"line 1: expected the dimension, got {lines[0]!r}")
    if n < 1:
        raise MatrixParseError(f"line 1: dimension must be positive, got {n}")
    if len(lines) < n + 1:
        raise MatrixParseError(
            f"line {len(lines)}: expected {n} rows, file ends after "
            f"{len(lines) - 1}"
        )
    A = np.empty((n, n))
    for i in range(n):
        lineno = i + 2
        tokens = lines[i + 1].split()
        if len(tokens) != n:
            raise MatrixParseError(
                f"line {lineno}: expected {n} values, got {len(tokens)}"
            )
        for j, tok in enumerate(tokens):
            try:
                A[i, j] = parse_float(tok)
            except ValueError:
                raise MatrixParseError(
                    f"line {lineno}: cannot parse {tok!r} as a number"
                )
    if not np.all(np.isfinite(A)):
        raise MatrixParseError("matrix has non-finite entries")
    return A
