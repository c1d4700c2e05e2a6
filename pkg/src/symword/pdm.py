"""Reader and writer for the ``pdm1`` plain-text matrix format.

::

    # optional comment lines
    pdm1 <n> <real|complex>
    <n rows; real: n floats, complex: 2n floats as interleaved re im pairs>
"""

from __future__ import annotations

import io
import os
from typing import TextIO, Union

import numpy as np

from .matcore import HermitianMatrix, MatrixError

PathOrFile = Union[str, os.PathLike, TextIO]


class PDMFormatError(ValueError):
    def __init__(self, message: str, source: str = "<input>", line: int | None = None):
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")
        self.source = source
        self.line = line


def _lines(src: PathOrFile):
    if hasattr(src, "read"):
        return getattr(src, "name", "<stream>"), src.read().splitlines()
    with open(src, encoding="utf-8") as fh:
        return str(src), fh.read().splitlines()


def read_pdm(src: PathOrFile, hermitian: bool = True) -> np.ndarray:
    """Read a ``pdm1`` matrix.

    With ``hermitian=True`` (the default) the payload must pass the
    :class:`HermitianMatrix` constructor tolerance and is returned symmetrized.
    General square matrices (e.g. field-of-values input) use ``hermitian=False``.
    """
    name, raw = _lines(src)
    rows = [(i + 1, ln.strip()) for i, ln in enumerate(raw)]
    rows = [(i, ln) for i, ln in rows if ln and not ln.startswith("#")]
    if not rows:
        raise PDMFormatError("empty file", name)
    lineno, header = rows[0]
    parts = header.split()
    if len(parts) != 3 or parts[0] != "pdm1":
        raise PDMFormatError("expected header 'pdm1 <n> <real|complex>'", name, lineno)
    try:
        n = int(parts[1])
    except ValueError:
        raise PDMFormatError(f"bad dimension {parts[1]!r}", name, lineno) from None
    if n < 1:
        raise PDMFormatError("dimension must be >= 1", name, lineno)
    mode = parts[2]
    if mode not in ("real", "complex"):
        raise PDMFormatError(f"unknown mode {mode!r}", name, lineno)
    body = rows[1:]
    if len(body) != n:
        raise PDMFormatError(f"expected {n} rows, found {len(body)}", name)
    width = n if mode == "real" else 2 * n
    out = np.zeros((n, n), dtype=np.float64 if mode == "real" else np.complex128)
    for r, (lineno, ln) in enumerate(body):
        toks = ln.split()
        if len(toks) != width:
            raise PDMFormatError(f"expected {width} numbers, found {len(toks)}", name, lineno)
        try:
            vals = np.array([float(t) for t in toks])
        except ValueError as exc:
            raise PDMFormatError(str(exc), name, lineno) from None
        out[r] = vals if mode == "real" else vals[0::2] + 1j * vals[1::2]
    if not np.all(np.isfinite(out)):
        raise PDMFormatError("non-finite entry", name)
    if hermitian:
        try:
            return HermitianMatrix(out).array
        except MatrixError as exc:
            raise PDMFormatError(str(exc), name) from None
    return out


def format_pdm(matrix, comment: str | None = None) -> str:
    a = np.asarray(matrix)
    n = a.shape[0]
    complex_mode = np.iscomplexobj(a) and bool(np.any(a.imag))
    buf = io.StringIO()
    if comment:
        for ln in comment.splitlines():
            buf.write(f"# {ln}\n")
    buf.write(f"pdm1 {n} {'complex' if complex_mode else 'real'}\n")
    for row in a:
        if complex_mode:
            vals = [v for z in row for v in (z.real, z.imag)]
        else:
            vals = np.real(row)
        buf.write(" ".join(f"{float(v):.17g}" for v in vals) + "\n")
    return buf.getvalue()


def write_pdm(dest: PathOrFile, matrix, comment: str | None = None) -> None:
    text = format_pdm(matrix, comment)
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)
