"""Binary transaction data stored as packed per-attribute bit-vectors."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .measures import PairCounts

log = logging.getLogger(__name__)

__all__ = [
    "Dataset",
    "DataError",
    "attrset",
    "load_fimi",
    "load_csv",
    "load",
    "write_fimi",
    "write_csv",
    "support",
    "pair_counts",
]

AttributeSet = tuple  # strictly increasing tuple of attribute ids


class DataError(ValueError):
    """Malformed input data."""


def attrset(items: Iterable[int]) -> tuple[int, ...]:
    """Canonical attribute set: sorted, duplicates removed."""
    return tuple(sorted(set(int(a) for a in items)))


def _n_words(n: int) -> int:
    return max(1, (n + 63) // 64)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable 0/1 matrix, one packed bit-vector per attribute.

    ``words[a]`` holds attribute ``a`` as little-endian uint64 words; bit
    ``r % 64`` of word ``r // 64`` is row ``r``.  Padding bits are zero.
    """

    n: int
    names: tuple[str, ...]
    words: np.ndarray
    transaction_lengths: np.ndarray = field(repr=False)
    source: str = ""

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise DataError("attribute names must be unique")
        if self.words.shape != (len(self.names), _n_words(self.n)):
            raise DataError("bit matrix shape does not match n and k")
        self.words.setflags(write=False)
        self.transaction_lengths.setflags(write=False)
        sup = np.bitwise_count(self.words).sum(axis=1, dtype=np.int64)
        sup.setflags(write=False)
        object.__setattr__(self, "supports", sup)
        object.__setattr__(self, "_index", {nm: i for i, nm in enumerate(self.names)})
        full = np.zeros(_n_words(self.n), dtype=np.uint64)
        for w in range(self.n // 64):
            full[w] = np.uint64(0xFFFFFFFFFFFFFFFF)
        if self.n % 64:
            full[self.n // 64] = np.uint64((1 << (self.n % 64)) - 1)
        full.setflags(write=False)
        object.__setattr__(self, "all_rows", full)

    # construction ---------------------------------------------------------

    @classmethod
    def from_columns(cls, n: int, names: Sequence[str], rows_per_attr: Sequence[np.ndarray],
                     source: str = "") -> "Dataset":
        """Build from, for every attribute, the array of row indices holding a 1."""
        k = len(names)
        words = np.zeros((k, _n_words(n)), dtype=np.uint64)
        lengths = np.zeros(n, dtype=np.int64)
        for a, rows in enumerate(rows_per_attr):
            rows = np.unique(np.asarray(rows, dtype=np.int64))
            if rows.size and (rows[0] < 0 or rows[-1] >= n):
                raise DataError(f"row index out of range for attribute {names[a]!r}")
            np.bitwise_or.at(words[a], rows >> 6,
                             np.left_shift(np.uint64(1), (rows & 63).astype(np.uint64)))
            np.add.at(lengths, rows, 1)
        return cls(n, tuple(names), words, lengths, source)

    @classmethod
    def from_matrix(cls, matrix, names: Sequence[str] | None = None, source: str = "") -> "Dataset":
        m = np.asarray(matrix)
        if m.ndim != 2:
            raise DataError("matrix must be 2-D")
        if not np.isin(m, (0, 1)).all():
            raise DataError("matrix cells must be 0 or 1")
        m = m.astype(bool)
        n, k = m.shape
        if names is None:
            names = [str(i) for i in range(k)]
        return cls.from_columns(n, list(names), [np.flatnonzero(m[:, a]) for a in range(k)], source)

    # accessors ------------------------------------------------------------

    @property
    def k(self) -> int:
        return len(self.names)

    @property
    def unusable(self) -> bool:
        """True when there is nothing to mine (no rows)."""
        return self.n == 0

    @property
    def degenerate(self) -> np.ndarray:
        """Boolean mask of attributes constant over all rows."""
        return (self.supports == 0) | (self.supports == self.n)

    @property
    def mean_transaction_length(self) -> float:
        return float(self.transaction_lengths.mean()) if self.n else 0.0

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown attribute {name!r}") from None

    def cover(self, s: Sequence[int]) -> np.ndarray:
        """Bit-vector of the rows where every attribute of ``s`` is 1."""
        if len(s) == 0:
            return self.all_rows
        self._check(s)
        return np.bitwise_and.reduce(self.words[list(s)], axis=0)

    def column(self, a: int, value: int = 1) -> np.ndarray:
        self._check((a,))
        if value:
            return self.words[a]
        return ~self.words[a] & self.all_rows

    def to_matrix(self) -> np.ndarray:
        """Dense boolean (n, k) view; for small data and tests."""
        raw = self.words.view(np.uint8)
        bits = np.unpackbits(raw, axis=1, bitorder="little")[:, : self.n]
        return bits.T.astype(bool)

    def _check(self, s):
        for a in s:
            if not 0 <= a < self.k:
                raise KeyError(f"unknown attribute id {a}")

    def describe(self) -> dict:
        return {"n": self.n, "k": self.k,
                "mean_transaction_length": self.mean_transaction_length,
                "transaction_length_convention": "distinct items per row",
                "degenerate_attributes": [self.names[a] for a in np.flatnonzero(self.degenerate)]}


def popcount(words: np.ndarray) -> int:
    return int(np.bitwise_count(words).sum())


def support(d: Dataset, s: Sequence[int]) -> int:
    """Number of rows where every attribute in ``s`` is 1; support(()) = n."""
    if len(s) == 0:
        return d.n
    return popcount(d.cover(s))


def pair_counts(d: Dataset, x: Sequence[int], q: Sequence[int], c: int,
                polarity: int = 1, polarity_x: int = 1) -> PairCounts:
    """Joint frequencies of X, Q and C=polarity."""
    if c in x or c in q:
        raise ValueError("consequent must not occur in either antecedent")
    cx, cq = d.cover(x), d.cover(q)
    cc = d.column(c, polarity)
    xq = cx & cq
    pc = PairCounts(
        n=d.n,
        n_x=popcount(cx),
        n_q=popcount(cq),
        n_c=popcount(cc),
        n_xq=popcount(xq),
        n_xc=popcount(cx & cc),
        n_qc=popcount(cq & cc),
        n_xqc=popcount(xq & cc),
        polarity_q=polarity,
        polarity_x=polarity_x,
    )
    return pc


# -- file formats ----------------------------------------------------------

def load_fimi(path) -> Dataset:
    """Read a FIMI ``.dat`` file: one transaction of integer item ids per line.

    Item ids need not be contiguous; attributes are ordered by numeric id and
    named by the id.  Empty lines count as empty transactions, except a
    trailing run of blank lines at the end of the file.
    """
    path = Path(path)
    try:
        text = path.read_bytes().decode("ascii")
    except (OSError, UnicodeDecodeError) as e:
        raise DataError(f"cannot read {path}: {e}") from e
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    rows: dict[int, list[int]] = {}
    for r, line in enumerate(lines):
        for tok in line.split():
            try:
                item = int(tok)
            except ValueError:
                raise DataError(f"{path}:{r + 1}: non-integer item {tok!r}") from None
            if item < 0:
                raise DataError(f"{path}:{r + 1}: negative item id {item}")
            rows.setdefault(item, []).append(r)
    items = sorted(rows)
    d = Dataset.from_columns(len(lines), [str(i) for i in items],
                             [np.array(rows[i]) for i in items], source=str(path))
    if d.unusable:
        log.warning("%s: no transactions; dataset unusable for mining", path)
    log.info("%s: n=%d k=%d mean transaction length %.1f", path, d.n, d.k,
             d.mean_transaction_length)
    return d


def load_csv(path) -> Dataset:
    """Read a 0/1 CSV table with a header row of attribute names."""
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DataError(f"{path}: empty file, no header") from None
            header = [h.strip() for h in header]
            if len(set(header)) != len(header):
                raise DataError(f"{path}: duplicate header names")
            cols: list[list[int]] = [[] for _ in header]
            n = 0
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise DataError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
                for a, cell in enumerate(row):
                    cell = cell.strip()
                    if cell == "1":
                        cols[a].append(n)
                    elif cell != "0":
                        raise DataError(f"{path}:{lineno}: cell {cell!r} is not 0 or 1")
                n += 1
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from e
    d = Dataset.from_columns(n, header, [np.array(c) for c in cols], source=str(path))
    if d.unusable:
        log.warning("%s: no rows; dataset unusable for mining", path)
    return d


def load(path, fmt: str | None = None) -> Dataset:
    if fmt is None:
        fmt = "csv" if str(path).lower().endswith(".csv") else "fimi"
    if fmt == "fimi":
        return load_fimi(path)
    if fmt == "csv":
        return load_csv(path)
    raise ValueError(f"unknown format {fmt!r}")


def _fimi_ids(d: Dataset) -> list[int]:
    try:
        ids = [int(nm) for nm in d.names]
    except ValueError:
        return list(range(d.k))
    if len(set(ids)) != len(ids) or min(ids, default=0) < 0:
        return list(range(d.k))
    return ids


def write_fimi(d: Dataset, path) -> None:
    """Write as FIMI; numeric attribute names are kept as item ids."""
    ids = _fimi_ids(d)
    m = d.to_matrix()
    with open(path, "w") as fh:
        for r in range(d.n):
            fh.write(" ".join(str(ids[a]) for a in np.flatnonzero(m[r])) + "\n")


def write_csv(d: Dataset, path) -> None:
    m = d.to_matrix().astype(np.uint8)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(d.names)
        w.writerows(m.tolist())
