"""Binary matrix storage, masking and text I/O.

Bits are stored packed (one bit per element, rows padded to whole bytes)
with row and column sums cached at construction.  Matrices are immutable.
"""
from __future__ import annotations

import csv
import io
import logging
import os
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, TextIO, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

FORMATS = ("dense01", "triplets", "ratings_csv")

Source = Union[str, os.PathLike, TextIO]


class FormatError(ValueError):
    """Raised when a matrix file cannot be parsed."""


@dataclass(frozen=True, eq=False)
class BinaryMatrix:
    """Immutable m x n 0/1 matrix.

    Parameters
    ----------
    packed : np.ndarray of uint8, shape (m, ceil(n / 8))
        Row-wise packed bits (``np.packbits(..., axis=1)``).
    n : int
        Number of columns.
    row_labels, col_labels : tuple, optional
        External identifiers, set when the matrix comes from a ratings file.
    """

    packed: np.ndarray
    n: int
    row_labels: Optional[Tuple[str, ...]] = None
    col_labels: Optional[Tuple[str, ...]] = None
    row_sums: np.ndarray = field(init=False, repr=False)
    col_sums: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        packed = np.ascontiguousarray(self.packed, dtype=np.uint8)
        if packed.ndim != 2:
            raise ValueError("packed bits must be two dimensional")
        if packed.shape[1] != (self.n + 7) // 8:
            raise ValueError("packed width does not match n")
        # Padding bits must be zero so that packed comparisons are exact.
        if self.n % 8 and packed.shape[0]:
            pad_mask = np.uint8(0xFF >> (self.n % 8))
            if np.any(packed[:, -1] & pad_mask):
                packed = packed.copy()
                packed[:, -1] &= np.uint8(~pad_mask & 0xFF)
        packed.setflags(write=False)
        object.__setattr__(self, "packed", packed)
        bits = self.to_array()
        row_sums = bits.sum(axis=1, dtype=np.int64)
        col_sums = bits.sum(axis=0, dtype=np.int64)
        row_sums.setflags(write=False)
        col_sums.setflags(write=False)
        object.__setattr__(self, "row_sums", row_sums)
        object.__setattr__(self, "col_sums", col_sums)
        if self.row_labels is not None and len(self.row_labels) != self.m:
            raise ValueError("row_labels length does not match m")
        if self.col_labels is not None and len(self.col_labels) != self.n:
            raise ValueError("col_labels length does not match n")

    @classmethod
    def from_array(cls, bits, row_labels=None, col_labels=None) -> "BinaryMatrix":
        """Build from any 2-D array-like of 0/1 (or booleans)."""
        arr = np.asarray(bits)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {arr.shape}")
        if arr.dtype != bool:
            if arr.size and not np.isin(arr, (0, 1)).all():
                raise ValueError("entries must be 0 or 1")
            arr = arr.astype(bool)
        return cls(np.packbits(arr, axis=1), arr.shape[1], row_labels, col_labels)

    @classmethod
    def zeros(cls, m: int, n: int) -> "BinaryMatrix":
        return cls(np.zeros((m, (n + 7) // 8), dtype=np.uint8), n)

    @property
    def m(self) -> int:
        return self.packed.shape[0]

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.m, self.n)

    @property
    def total(self) -> int:
        """Number of ones, ``|X|``."""
        return int(self.row_sums.sum())

    def to_array(self) -> np.ndarray:
        """Unpacked boolean copy of the bits."""
        return np.unpackbits(self.packed, axis=1, count=self.n).astype(bool)

    def row(self, i: int) -> np.ndarray:
        return np.unpackbits(self.packed[i], count=self.n).astype(bool)

    def col(self, j: int) -> np.ndarray:
        byte, bit = divmod(j, 8)
        return ((self.packed[:, byte] >> (7 - bit)) & 1).astype(bool)

    def __getitem__(self, ij):
        i, j = ij
        byte, bit = divmod(j, 8)
        return int((self.packed[i, byte] >> (7 - bit)) & 1)

    def __eq__(self, other):
        if not isinstance(other, BinaryMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.packed, other.packed)

    def __hash__(self):
        return hash((self.shape, self.packed.tobytes()))

    def __repr__(self):
        return f"BinaryMatrix(m={self.m}, n={self.n}, ones={self.total})"


def hadamard_mask(X: BinaryMatrix, row_ind, col_ind) -> BinaryMatrix:
    """Return ``X o (row_ind col_ind^T)``, keeping the original dimensions."""
    row_ind = np.asarray(row_ind).astype(bool).ravel()
    col_ind = np.asarray(col_ind).astype(bool).ravel()
    if row_ind.size != X.m:
        raise ValueError(f"row indicator has length {row_ind.size}, expected {X.m}")
    if col_ind.size != X.n:
        raise ValueError(f"column indicator has length {col_ind.size}, expected {X.n}")
    col_bits = np.packbits(col_ind)
    packed = X.packed & col_bits[None, :]
    packed[~row_ind] = 0
    return BinaryMatrix(packed, X.n, X.row_labels, X.col_labels)


# ---------------------------------------------------------------------------
# I/O

def _read_text(source: Source) -> str:
    if hasattr(source, "read"):
        return source.read()
    with open(source, encoding="utf-8") as fh:
        return fh.read()


def loads(text: str, fmt: str = "dense01", header: Optional[bool] = None) -> BinaryMatrix:
    """Parse a matrix from text.  See :func:`load`."""
    if fmt == "dense01":
        return _parse_dense01(text)
    if fmt == "triplets":
        return _parse_triplets(text)
    if fmt == "ratings_csv":
        return _parse_ratings(text, header)
    raise ValueError(f"unknown format {fmt!r}; choose one of {FORMATS}")


def load(source: Source, fmt: str = "dense01", header: Optional[bool] = None) -> BinaryMatrix:
    """Load a matrix from a path or text stream.

    ``dense01``: one line per row of ``0``/``1`` characters.
    ``triplets``: header ``m n nnz`` then 1-based ``i j`` pairs.
    ``ratings_csv``: ``user,item[,rating...]`` rows; every (user, item)
    occurrence becomes a 1, ids are indexed in first-appearance order and
    kept as ``row_labels``/``col_labels``.  ``header=None`` skips a first
    row whose first field looks like a column name (``user``, ``userId``).
    """
    return loads(_read_text(source), fmt, header)


def _parse_dense01(text: str) -> BinaryMatrix:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise FormatError("empty input")
    width = len(lines[0])
    for k, ln in enumerate(lines, 1):
        if len(ln) != width:
            raise FormatError(f"line {k}: ragged row of length {len(ln)}, expected {width}")
        if set(ln) - {"0", "1"}:
            raise FormatError(f"line {k}: only '0' and '1' are allowed")
    buf = np.frombuffer("".join(lines).encode("ascii"), dtype=np.uint8) - ord("0")
    return BinaryMatrix.from_array(buf.reshape(len(lines), width).astype(bool))


def _parse_triplets(text: str) -> BinaryMatrix:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("%")]
    if not rows:
        raise FormatError("empty input")
    try:
        m, n, nnz = (int(v) for v in rows[0])
    except ValueError:
        raise FormatError("triplets header must be 'm n nnz'") from None
    if m < 1 or n < 1:
        raise FormatError("dimensions must be positive")
    body = rows[1:]
    if len(body) != nnz:
        raise FormatError(f"header announces {nnz} entries, found {len(body)}")
    bits = np.zeros((m, n), dtype=bool)
    duplicates = 0
    for k, entry in enumerate(body, 2):
        if len(entry) < 2:
            raise FormatError(f"line {k}: expected 'i j'")
        i, j = int(entry[0]), int(entry[1])
        if not (1 <= i <= m and 1 <= j <= n):
            raise FormatError(f"line {k}: index ({i}, {j}) outside {m}x{n}")
        duplicates += bits[i - 1, j - 1]
        bits[i - 1, j - 1] = True
    if duplicates:
        logger.warning("collapsed %d duplicate triplet entries", duplicates)
    return BinaryMatrix.from_array(bits)


_HEADER_NAMES = {"user", "userid", "user_id", "users"}


def _parse_ratings(text: str, header: Optional[bool]) -> BinaryMatrix:
    records = [r for r in csv.reader(io.StringIO(text)) if r and any(f.strip() for f in r)]
    if header is None:
        header = bool(records) and records[0][0].strip().lower() in _HEADER_NAMES
    if header:
        records = records[1:]
    if not records:
        raise FormatError("empty input")
    users: dict = {}
    items: dict = {}
    pairs = []
    for k, rec in enumerate(records, 1):
        if len(rec) < 2:
            raise FormatError(f"record {k}: expected 'user,item[,rating...]'")
        u, it = rec[0].strip(), rec[1].strip()
        pairs.append((users.setdefault(u, len(users)), items.setdefault(it, len(items))))
    bits = np.zeros((len(users), len(items)), dtype=bool)
    idx = np.array(pairs)
    bits[idx[:, 0], idx[:, 1]] = True
    return BinaryMatrix.from_array(bits, tuple(users), tuple(items))


def dumps(X: BinaryMatrix, fmt: str = "dense01") -> str:
    """Serialize ``X``; the inverse of :func:`loads`."""
    bits = X.to_array()
    if fmt == "dense01":
        chars = (bits.astype(np.uint8) + ord("0")).tobytes()
        return "\n".join(chars[i * X.n:(i + 1) * X.n].decode("ascii") for i in range(X.m))
    if fmt == "triplets":
        ii, jj = np.nonzero(bits)
        lines = [f"{X.m} {X.n} {ii.size}"]
        lines += [f"{i + 1} {j + 1}" for i, j in zip(ii, jj)]
        return "\n".join(lines)
    if fmt == "ratings_csv":
        # Rows or columns without ones cannot be represented in this format.
        rl = X.row_labels or tuple(str(i) for i in range(X.m))
        cl = X.col_labels or tuple(str(j) for j in range(X.n))
        ii, jj = np.nonzero(bits)
        return "\n".join(f"{rl[i]},{cl[j]}" for i, j in zip(ii, jj))
    raise ValueError(f"unknown format {fmt!r}; choose one of {FORMATS}")


def save(X: BinaryMatrix, dest: Source, fmt: str = "dense01") -> None:
    text = dumps(X, fmt) + "\n"
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)
