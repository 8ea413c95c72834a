"""Matrix ingestion and emission: CSV (one observation per row) and a binary cache.

In memory every matrix is ``d x N`` with observations as columns, so CSV rows
are transposed on the way in and out.  The cache layout is the magic bytes
``AAKIT1``, two little-endian u64 (rows, cols), then little-endian float64 in
column-major order.
"""

import csv
import hashlib
import struct
from pathlib import Path

import numpy as np

MAGIC = b"AAKIT1"
_HEADER = struct.Struct("<6sQQ")


class InputError(ValueError):
    """Input could not be read or parsed."""


def read_csv(path, header=False):
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise InputError(f"cannot open {path}: {exc.strerror}") from exc
    rows = []
    width = None
    with fh:
        reader = csv.reader(fh)
        for lineno, fields in enumerate(reader, start=1):
            if header and lineno == 1:
                continue
            if not fields or all(not f.strip() for f in fields):
                continue
            values = []
            for col, text in enumerate(fields, start=1):
                try:
                    values.append(float(text))
                except ValueError:
                    raise InputError(f"{path}: row {lineno}, column {col}: non-numeric field {text!r}") from None
                if not np.isfinite(values[-1]):
                    raise InputError(f"{path}: row {lineno}, column {col}: non-finite value {text!r}")
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise InputError(f"{path}: row {lineno} has {len(values)} fields, expected {width}")
            rows.append(values)
    if not rows:
        raise InputError(f"{path}: no data rows")
    return np.asfortranarray(np.array(rows, dtype=np.float64).T)


def write_csv(path, x, header=False):
    x = np.asarray(x, dtype=np.float64)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow([f"f{i}" for i in range(x.shape[0])])
        for col in x.T:
            # repr round-trips float64 exactly
            w.writerow([repr(float(v)) for v in col])


def write_binary(path, x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("binary cache holds 2-D matrices only")
    with Path(path).open("wb") as fh:
        fh.write(_HEADER.pack(MAGIC, x.shape[0], x.shape[1]))
        fh.write(np.asfortranarray(x).astype("<f8").tobytes(order="F"))


def read_binary(path):
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot open {path}: {exc.strerror}") from exc
    if len(raw) < _HEADER.size:
        raise InputError(f"{path}: truncated header")
    magic, rows, cols = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise InputError(f"{path}: bad magic {magic!r}")
    need = _HEADER.size + 8 * rows * cols
    if len(raw) != need:
        raise InputError(f"{path}: expected {need} bytes for {rows}x{cols}, found {len(raw)}")
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size, count=rows * cols)
    return np.asfortranarray(data.reshape((rows, cols), order="F").astype(np.float64))


def is_binary(path):
    try:
        with Path(path).open("rb") as fh:
            return fh.read(len(MAGIC)) == MAGIC
    except OSError:
        return False


def read_matrix(path, header=False):
    """Binary cache if the file starts with the magic bytes, CSV otherwise."""
    return read_binary(path) if is_binary(path) else read_csv(path, header=header)


def digest(x):
    """64-bit content hash (blake2b) of shape plus column-major float64 bytes, as hex."""
    x = np.asarray(x, dtype=np.float64)
    h = hashlib.blake2b(digest_size=8)
    h.update(struct.pack("<QQ", *x.shape))
    h.update(np.asfortranarray(x).astype("<f8").tobytes(order="F"))
    return h.hexdigest()
