"""Dense operator container for offline eigensolvers.

Flat binary layout: a fixed-size ASCII header line, then the row-major
float64 matrix. The header records the matrix size, the number of points and
ambient dimension it was built from, and the operator kind tag.
"""

import numpy as np

_MAGIC = "MRBFDENSE1"
_KINDS = ("grad", "lb_nsym", "lb_sym_A", "bochner_nsym", "bochner_sym_A",
          "hodge_nsym", "hodge_sym_A", "lich_nsym", "lich_sym_A", "dm_sym",
          "generic")


def save_operator(path, matrix, kind, N, n):
    """Write a dense real operator with its provenance tag."""
    if kind not in _KINDS:
        raise ValueError(f"unknown operator kind {kind!r}")
    matrix = np.ascontiguousarray(matrix, dtype=np.float64)
    rows, cols = matrix.shape
    header = f"{_MAGIC} kind={kind} rows={rows} cols={cols} N={N} n={n}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii").ljust(128, b" "))
        fh.write(matrix.tobytes(order="C"))


def load_operator(path):
    """Read back (matrix, meta) written by save_operator."""
    with open(path, "rb") as fh:
        header = fh.read(128).decode("ascii").strip()
        if not header.startswith(_MAGIC):
            raise ValueError(f"not a dense operator container: {path}")
        meta = {}
        for tok in header.split()[1:]:
            k, v = tok.split("=", 1)
            meta[k] = v if k == "kind" else int(v)
        data = np.frombuffer(fh.read(), dtype=np.float64)
    matrix = data.reshape(meta["rows"], meta["cols"]).copy()
    return matrix, meta
