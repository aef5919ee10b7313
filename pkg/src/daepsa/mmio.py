"""Matrix Market reader and writer.

Supports ``matrix array`` and ``matrix coordinate`` files with ``real``,
``complex`` or ``integer`` fields and ``general``, ``symmetric``,
``skew-symmetric`` or ``hermitian`` storage.  Pattern matrices are rejected
since they carry no values.  Duplicate coordinate entries are summed.
"""

from __future__ import annotations

import os

import numpy as np
import scipy.sparse as sp

from .errors import MatrixMarketError

FIELDS = ("real", "complex", "integer")
SYMMETRIES = ("general", "symmetric", "skew-symmetric", "hermitian")


def _tokens(lines):
    """Yield ``(line_number, tokens)`` for non-comment, non-blank lines."""
    for no, line in lines:
        s = line.strip()
        if not s or s.startswith("%"):
            continue
        yield no, s.split()


def _value(tok, field, no):
    try:
        if field == "complex":
            if len(tok) != 2:
                raise ValueError("complex entries need real and imaginary parts")
            return complex(float(tok[0]), float(tok[1]))
        if len(tok) != 1:
            raise ValueError(f"expected one value, got {len(tok)}")
        return int(tok[0]) if field == "integer" else float(tok[0])
    except ValueError as exc:
        raise MatrixMarketError(f"bad value {' '.join(tok)!r}: {exc}", no) from None


def read_matrix(path, sparse: bool = False):
    """Read a Matrix Market file.

    Parameters
    ----------
    path
        File to read.
    sparse
        Return a ``scipy.sparse.csr_matrix`` instead of a dense array.

    Raises
    ------
    MatrixMarketError
        For any malformed content; the message starts with the line number.
    """
    try:
        with open(path, "r", encoding="ascii", errors="strict") as fh:
            text = fh.read().splitlines()
    except FileNotFoundError:
        raise MatrixMarketError(f"no such file: {path}") from None
    except (UnicodeDecodeError, IsADirectoryError) as exc:
        raise MatrixMarketError(f"cannot read {path}: {exc}") from None
    if not text:
        raise MatrixMarketError("empty file", 1)
    head = text[0].split()
    if len(head) != 5 or head[0].lower() != "%%matrixmarket":
        raise MatrixMarketError("header must be '%%MatrixMarket matrix <format> <field> <symmetry>'", 1)
    obj, fmt, field, sym = (h.lower() for h in head[1:])
    if obj != "matrix":
        raise MatrixMarketError(f"unsupported object {obj!r}", 1)
    if fmt not in ("array", "coordinate"):
        raise MatrixMarketError(f"unsupported format {fmt!r}", 1)
    if field == "pattern":
        raise MatrixMarketError("pattern matrices carry no values and are not supported", 1)
    if field not in FIELDS:
        raise MatrixMarketError(f"unsupported field {field!r}", 1)
    if sym not in SYMMETRIES:
        raise MatrixMarketError(f"unsupported symmetry {sym!r}", 1)
    if sym == "hermitian" and field != "complex":
        sym = "symmetric"

    body = _tokens(enumerate(text[1:], start=2))
    try:
        no, size = next(body)
    except StopIteration:
        raise MatrixMarketError("missing size line", len(text)) from None
    try:
        dims = [int(s) for s in size]
    except ValueError:
        raise MatrixMarketError(f"bad size line {' '.join(size)!r}", no) from None
    width = 2 if field == "complex" else 1
    dtype = complex if field == "complex" else float

    if fmt == "coordinate":
        if len(dims) != 3 or min(dims) < 0 or min(dims[:2]) < 1:
            raise MatrixMarketError("coordinate size line must be 'rows cols entries'", no)
        nr, nc, nnz = dims
        rows, cols, vals = [], [], []
        for no, tok in body:
            if len(rows) == nnz:
                raise MatrixMarketError(f"more than the declared {nnz} entries", no)
            if len(tok) != 2 + width:
                raise MatrixMarketError(f"expected {2 + width} fields, got {len(tok)}", no)
            try:
                i, j = int(tok[0]), int(tok[1])
            except ValueError:
                raise MatrixMarketError(f"bad index in {' '.join(tok)!r}", no) from None
            if not (1 <= i <= nr and 1 <= j <= nc):
                raise MatrixMarketError(f"index ({i}, {j}) outside {nr}x{nc}", no)
            if sym != "general" and i < j:
                raise MatrixMarketError(f"{sym} storage expects the lower triangle, got ({i}, {j})", no)
            v = _value(tok[2:], field, no)
            if not np.isfinite(v):
                raise MatrixMarketError("non-finite value", no)
            rows.append(i - 1)
            cols.append(j - 1)
            vals.append(v)
        if len(rows) != nnz:
            raise MatrixMarketError(f"expected {nnz} entries, found {len(rows)}", len(text))
        r, c, v = np.array(rows, dtype=int), np.array(cols, dtype=int), np.array(vals, dtype=dtype)
    else:
        if len(dims) != 2 or min(dims) < 1:
            raise MatrixMarketError("array size line must be 'rows cols'", no)
        nr, nc = dims
        if sym != "general":
            if nr != nc:
                raise MatrixMarketError(f"{sym} matrices must be square", no)
            slots = [(i, j) for j in range(nc) for i in range(j + (sym == "skew-symmetric"), nr)]
        else:
            slots = [(i, j) for j in range(nc) for i in range(nr)]
        vals = []
        for no, tok in body:
            if len(vals) == len(slots):
                raise MatrixMarketError(f"more than the expected {len(slots)} values", no)
            v = _value(tok, field, no)
            if not np.isfinite(v):
                raise MatrixMarketError("non-finite value", no)
            vals.append(v)
        if len(vals) != len(slots):
            raise MatrixMarketError(f"expected {len(slots)} values, found {len(vals)}", len(text))
        r = np.array([s[0] for s in slots], dtype=int)
        c = np.array([s[1] for s in slots], dtype=int)
        v = np.array(vals, dtype=dtype)

    if sym != "general":
        off = r != c
        if sym == "symmetric":
            mirror = v[off]
        elif sym == "skew-symmetric":
            if (v[~off] != 0).any():
                raise MatrixMarketError("skew-symmetric matrix with nonzero diagonal")
            mirror = -v[off]
        else:
            if (np.abs(np.imag(v[~off])) > 0).any():
                raise MatrixMarketError("hermitian matrix with non-real diagonal")
            mirror = np.conj(v[off])
        r, c = np.concatenate([r, c[off]]), np.concatenate([c, r[off]])
        v = np.concatenate([v, mirror])
    M = sp.coo_matrix((v, (r, c)), shape=(nr, nc)).tocsr()
    M.sum_duplicates()
    M.eliminate_zeros()
    return M if sparse else M.toarray()


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_matrix(path, M, fmt: str | None = None, comment: str | None = None) -> None:
    """Write a dense or sparse matrix; values use 17 significant digits.

    ``fmt`` is ``"array"`` or ``"coordinate"`` (default: coordinate for
    sparse input, array otherwise).  The field is ``real`` unless an entry
    has a nonzero imaginary part.
    """
    is_sparse = sp.issparse(M)
    fmt = fmt or ("coordinate" if is_sparse else "array")
    if fmt not in ("array", "coordinate"):
        raise MatrixMarketError(f"unknown format {fmt!r}")
    if is_sparse:
        C = sp.coo_matrix(M)
        C.sum_duplicates()
        shape = C.shape
    else:
        D = np.atleast_2d(np.asarray(M))
        shape = D.shape
    data = C.data if is_sparse else D
    cplx = np.iscomplexobj(data) and bool(np.any(np.imag(data) != 0))
    field = "complex" if cplx else "real"

    def entry(v):
        return f"{_fmt(np.real(v))} {_fmt(np.imag(v))}" if cplx else _fmt(np.real(v))

    lines = [f"%%MatrixMarket matrix {fmt} {field} general"]
    if comment:
        lines += ["%" + c for c in comment.splitlines()]
    if fmt == "coordinate":
        C = C if is_sparse else sp.coo_matrix(D)
        order = np.lexsort((C.row, C.col))
        lines.append(f"{shape[0]} {shape[1]} {C.nnz}")
        lines += [f"{C.row[k] + 1} {C.col[k] + 1} {entry(C.data[k])}" for k in order]
    else:
        D = C.toarray() if is_sparse else D
        lines.append(f"{shape[0]} {shape[1]}")
        lines += [entry(D[i, j]) for j in range(shape[1]) for i in range(shape[0])]
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)
