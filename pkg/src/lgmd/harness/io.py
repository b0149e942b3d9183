"""Matrix file I/O.

Two formats: RFC-4180 CSV where an empty field marks a missing entry, and
MatrixMarket (coordinate entries are the observed set; array files are fully
observed). Values are written with 17 significant digits so a save/load
round trip is bit exact.
"""

from __future__ import annotations

import csv
import os

import numpy as np

from ..core import DataMatrix
from ..errors import DimensionMismatch, IoError, ParseError

FORMATS = ("csv", "matrix-market")


def _fmt(v: float) -> str:
    return format(v, ".17g")


def _infer_format(path: str) -> str:
    ext = os.path.splitext(path)[1].lower()
    if ext in (".mtx", ".mm"):
        return "matrix-market"
    return "csv"


def load_matrix(path: str, format: str | None = None) -> DataMatrix:
    """Read a matrix file into a DataMatrix; the mask reflects missingness.

    Raises
    ------
    ParseError
        On malformed numeric fields or headers (carries line/column).
    DimensionMismatch
        On ragged CSV rows or out-of-range coordinate entries.
    """
    fmt = format or _infer_format(path)
    if fmt not in FORMATS:
        raise ValueError("unknown format %r" % fmt)
    try:
        with open(path, "r", newline="") as fh:
            text_rows = fh.read()
    except OSError as exc:
        raise IoError("cannot read %s: %s" % (path, exc)) from exc
    if fmt == "csv":
        return _parse_csv(text_rows)
    return _parse_matrix_market(text_rows)


def _parse_csv(text: str) -> DataMatrix:
    rows: list[list[float]] = []
    mask_rows: list[list[bool]] = []
    width = None
    reader = csv.reader(text.splitlines())
    for line_no, record in enumerate(reader, start=1):
        if not record:
            continue
        if width is None:
            width = len(record)
        elif len(record) != width:
            raise DimensionMismatch(
                "line %d has %d fields, expected %d" % (line_no, len(record), width))
        vals, obs = [], []
        for col_no, fieldv in enumerate(record, start=1):
            fieldv = fieldv.strip()
            if fieldv == "":
                vals.append(0.0)
                obs.append(False)
                continue
            try:
                vals.append(float(fieldv))
            except ValueError as exc:
                raise ParseError("bad number %r" % fieldv,
                                 line=line_no, column=col_no) from exc
            obs.append(True)
        rows.append(vals)
        mask_rows.append(obs)
    if not rows:
        raise ParseError("empty CSV file", line=1, column=1)
    values = np.array(rows, dtype=float)
    mask = np.array(mask_rows, dtype=bool)
    return DataMatrix(values, None if mask.all() else mask)


def _parse_matrix_market(text: str) -> DataMatrix:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("%%MatrixMarket"):
        raise ParseError("missing MatrixMarket header", line=1, column=1)
    header = lines[0].split()
    if len(header) < 4 or header[1] != "matrix" or header[3] != "real":
        raise ParseError("unsupported MatrixMarket header", line=1, column=1)
    layout = header[2]
    if layout not in ("coordinate", "array"):
        raise ParseError("unsupported layout %r" % layout, line=1, column=1)
    body = [(i + 1, ln) for i, ln in enumerate(lines)
            if ln.strip() and not ln.startswith("%")]
    if not body:
        raise ParseError("missing size line", line=1, column=1)
    size_line_no, size_line = body[0]
    parts = size_line.split()
    try:
        if layout == "coordinate":
            n, p, nnz = (int(t) for t in parts)
        else:
            n, p = (int(t) for t in parts)
            nnz = n * p
    except ValueError as exc:
        raise ParseError("bad size line", line=size_line_no, column=1) from exc
    entries = body[1:]
    if len(entries) != nnz:
        raise DimensionMismatch("expected %d entries, found %d" % (nnz, len(entries)))
    values = np.zeros((n, p))
    if layout == "coordinate":
        mask = np.zeros((n, p), dtype=bool)
        for line_no, ln in entries:
            toks = ln.split()
            if len(toks) != 3:
                raise ParseError("expected 'i j value'", line=line_no, column=1)
            try:
                i, j, v = int(toks[0]), int(toks[1]), float(toks[2])
            except ValueError as exc:
                raise ParseError("bad entry", line=line_no, column=1) from exc
            if not (1 <= i <= n and 1 <= j <= p):
                raise DimensionMismatch(
                    "entry (%d, %d) outside %dx%d" % (i, j, n, p))
            values[i - 1, j - 1] = v
            mask[i - 1, j - 1] = True
        return DataMatrix(values, None if mask.all() else mask)
    flat = []
    for line_no, ln in entries:
        try:
            flat.append(float(ln.split()[0]))
        except (ValueError, IndexError) as exc:
            raise ParseError("bad array entry", line=line_no, column=1) from exc
    # array layout is column major
    values = np.array(flat).reshape((p, n)).T
    return DataMatrix(values)


def save_matrix(m: DataMatrix, path: str, format: str | None = None) -> None:
    """Write a DataMatrix; missing entries become empty CSV fields or are
    omitted from the MatrixMarket coordinate listing."""
    fmt = format or _infer_format(path)
    if fmt not in FORMATS:
        raise ValueError("unknown format %r" % fmt)
    try:
        with open(path, "w", newline="") as fh:
            if fmt == "csv":
                writer = csv.writer(fh, lineterminator="\n")
                for i in range(m.shape[0]):
                    row = []
                    for j in range(m.shape[1]):
                        if m.mask is not None and not m.mask[i, j]:
                            row.append("")
                        else:
                            row.append(_fmt(m.values[i, j]))
                    writer.writerow(row)
                return
            n, p = m.shape
            if m.mask is None:
                fh.write("%%MatrixMarket matrix array real general\n")
                fh.write("%d %d\n" % (n, p))
                for j in range(p):
                    for i in range(n):
                        fh.write(_fmt(m.values[i, j]) + "\n")
            else:
                fh.write("%%MatrixMarket matrix coordinate real general\n")
                count = int(m.mask.sum())
                fh.write("%d %d %d\n" % (n, p, count))
                for i in range(n):
                    for j in range(p):
                        if m.mask[i, j]:
                            fh.write("%d %d %s\n" % (i + 1, j + 1, _fmt(m.values[i, j])))
    except OSError as exc:
        raise IoError("cannot write %s: %s" % (path, exc)) from exc
