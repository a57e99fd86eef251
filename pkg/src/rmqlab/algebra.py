"""GF(2) polynomials in algebraic normal form and bit-packed linear algebra.

Monomials are squarefree (the field equations x^2 = x are applied on
construction) and are stored as Python ``int`` bitmasks: bit ``i`` set means
variable ``x_i`` divides the monomial.  A polynomial is a frozen set of such
masks, so addition is symmetric difference.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numba
import numpy as np

from .errors import DimensionError

Monomial = int  # squarefree monomial as a bitmask over variable indices


def monomial(variables: Iterable[int]) -> Monomial:
    mask = 0
    for v in variables:
        mask |= 1 << v
    return mask


def monomial_vars(mask: Monomial) -> tuple[int, ...]:
    """Strictly increasing variable indices of a monomial mask."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def monomial_degree(mask: Monomial) -> int:
    return bin(mask).count("1")


@dataclass(frozen=True)
class AnfPoly:
    """Polynomial over GF(2) in ``nvars`` variables, reduced modulo x_i^2 - x_i."""

    terms: frozenset
    nvars: int

    @classmethod
    def zero(cls, nvars: int) -> "AnfPoly":
        return cls(frozenset(), nvars)

    @classmethod
    def one(cls, nvars: int) -> "AnfPoly":
        return cls(frozenset((0,)), nvars)

    @classmethod
    def var(cls, i: int, nvars: int) -> "AnfPoly":
        if not 0 <= i < nvars:
            raise DimensionError(f"variable {i} out of range for {nvars} variables")
        return cls(frozenset((1 << i,)), nvars)

    @classmethod
    def from_terms(cls, terms: Iterable[Monomial], nvars: int) -> "AnfPoly":
        """Build from monomial masks; repeated masks cancel in pairs."""
        acc: set[int] = set()
        for t in terms:
            acc ^= {t}
        return cls(frozenset(acc), nvars)

    def __add__(self, other: "AnfPoly") -> "AnfPoly":
        self._check(other)
        return AnfPoly(self.terms ^ other.terms, self.nvars)

    __sub__ = __add__

    def __mul__(self, other: "AnfPoly") -> "AnfPoly":
        self._check(other)
        acc: set[int] = set()
        for a in self.terms:
            for b in other.terms:
                acc ^= {a | b}
        return AnfPoly(frozenset(acc), self.nvars)

    def mul_monomial(self, mask: Monomial) -> "AnfPoly":
        acc: set[int] = set()
        for t in self.terms:
            acc ^= {t | mask}
        return AnfPoly(frozenset(acc), self.nvars)

    def _check(self, other: "AnfPoly") -> None:
        if self.nvars != other.nvars:
            raise DimensionError(f"{self.nvars} vs {other.nvars} variables")

    def __bool__(self) -> bool:
        return bool(self.terms)

    @property
    def degree(self) -> int:
        """Maximum monomial degree, -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(monomial_degree(t) for t in self.terms)

    def homogeneous_part(self, d: int | None = None) -> "AnfPoly":
        d = self.degree if d is None else d
        return AnfPoly(frozenset(t for t in self.terms if monomial_degree(t) == d), self.nvars)

    def __call__(self, point: Sequence[int]) -> int:
        return eval_anf(self, point)

    def substitute(self, mapping: dict) -> "AnfPoly":
        """Replace variables by polynomials; ``mapping`` maps index -> AnfPoly."""
        if not mapping:
            return self
        subst_mask = monomial(mapping)
        out: set[int] = set()
        for t in self.terms:
            keep = t & ~subst_mask
            prod = {keep}
            rest = t & subst_mask
            while rest:
                low = rest & -rest
                i = low.bit_length() - 1
                rest ^= low
                nxt: set[int] = set()
                for a in prod:
                    for b in mapping[i].terms:
                        nxt ^= {a | b}
                prod = nxt
                if not prod:
                    break
            out ^= prod
        return AnfPoly(frozenset(out), self.nvars)

    def rename(self, index_map: dict, nvars: int) -> "AnfPoly":
        """Relabel variables (``old -> new``); every occurring variable must be mapped."""
        out = set()
        for t in self.terms:
            out ^= {monomial(index_map[v] for v in monomial_vars(t))}
        return AnfPoly(frozenset(out), nvars)

    def sorted_terms(self) -> list[tuple[int, ...]]:
        return sorted((monomial_vars(t) for t in self.terms), key=lambda v: (len(v), v))

    def __repr__(self) -> str:
        if not self.terms:
            return "AnfPoly(0)"
        parts = ["*".join(f"x{i}" for i in v) or "1" for v in self.sorted_terms()]
        return "AnfPoly(" + " + ".join(parts) + ")"


def eval_anf(p: AnfPoly, point: Sequence[int]) -> int:
    """Evaluate ``p`` at a 0/1 point of length ``p.nvars``."""
    if len(point) != p.nvars:
        raise DimensionError(f"point has length {len(point)}, polynomial has {p.nvars} variables")
    mask = 0
    for i, b in enumerate(point):
        if b & 1:
            mask |= 1 << i
    acc = 0
    for t in p.terms:
        if t & mask == t:
            acc ^= 1
    return acc


def mobius_transform(table) -> np.ndarray:
    """Truth table <-> ANF coefficient vector (index = subset bitmask); an involution."""
    a = np.array(table, dtype=np.uint8) & 1
    size = a.shape[0]
    if size == 0 or size & (size - 1):
        raise DimensionError(f"length {size} is not a power of two")
    n = size.bit_length() - 1
    for i in range(n):
        step = 1 << i
        v = a.reshape(-1, 2 * step)
        v[:, step:] ^= v[:, :step]
    return a


# --- bit-packed dense matrices -------------------------------------------------


def _words(cols: int) -> int:
    return max(1, (cols + 63) >> 6)


class BitMatrix:
    """Dense GF(2) matrix with rows packed into ``uint64`` words (bit c of a row is column c)."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: np.ndarray | None = None):
        self.rows = rows
        self.cols = cols
        if data is None:
            data = np.zeros((rows, _words(cols)), dtype=np.uint64)
        self.data = data

    @classmethod
    def from_dense(cls, arr) -> "BitMatrix":
        arr = np.asarray(arr, dtype=np.uint8) & 1
        if arr.ndim != 2:
            raise DimensionError("expected a 2-d array")
        r, c = arr.shape
        m = cls(r, c)
        if r and c:
            padded = np.zeros((r, _words(c) * 64), dtype=np.uint8)
            padded[:, :c] = arr
            bits = np.packbits(padded.reshape(r, -1, 8)[:, :, ::-1], axis=-1)
            m.data = bits.reshape(r, -1).view("<u8").copy().astype(np.uint64)
        return m

    @classmethod
    def from_column_lists(cls, row_cols: Sequence[Sequence[int]], cols: int) -> "BitMatrix":
        """Rows given as lists of set column indices (repeats cancel)."""
        m = cls(len(row_cols), cols)
        for r, cs in enumerate(row_cols):
            for c in cs:
                m.data[r, c >> 6] ^= np.uint64(1) << np.uint64(c & 63)
        return m

    def to_dense(self) -> np.ndarray:
        if self.rows == 0:
            return np.zeros((0, self.cols), dtype=np.uint8)
        b = self.data.astype("<u8").view(np.uint8).reshape(self.rows, -1, 8)
        bits = np.unpackbits(b, axis=-1, bitorder="little").reshape(self.rows, -1)
        return bits[:, : self.cols].copy()

    def copy(self) -> "BitMatrix":
        return BitMatrix(self.rows, self.cols, self.data.copy())

    def row_weight(self, r: int) -> int:
        return int(sum(bin(int(x)).count("1") for x in self.data[r]))

    def row_columns(self, r: int) -> list[int]:
        out = []
        for w, word in enumerate(self.data[r]):
            word = int(word)
            while word:
                low = word & -word
                out.append((w << 6) + low.bit_length() - 1)
                word ^= low
        return out

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and np.array_equal(self.data, other.data)
        )

    def __repr__(self) -> str:
        return f"BitMatrix({self.rows}x{self.cols})"


@numba.njit(cache=True)
def _rref_kernel(data, cols, full, reverse):
    nrows = data.shape[0]
    nwords = data.shape[1]
    pivots = np.empty(min(nrows, cols), dtype=np.int64)
    rank = 0
    for step in range(cols):
        if rank == nrows:
            break
        c = cols - 1 - step if reverse else step
        w = c >> 6
        bit = np.uint64(1) << np.uint64(c & 63)
        piv = -1
        for r in range(rank, nrows):
            if data[r, w] & bit:
                piv = r
                break
        if piv < 0:
            continue
        lo = 0 if reverse else w
        hi = w + 1 if reverse else nwords
        if piv != rank:
            for k in range(nwords):
                tmp = data[piv, k]
                data[piv, k] = data[rank, k]
                data[rank, k] = tmp
        start = 0 if full else rank + 1
        for r in range(start, nrows):
            if r != rank and (data[r, w] & bit):
                for k in range(lo, hi):
                    data[r, k] ^= data[rank, k]
        pivots[rank] = c
        rank += 1
    return rank, pivots[:rank].copy()


@numba.njit(cache=True)
def _reduce_kernel(rows, basis, pivots):
    # basis is fully reduced: each pivot column is set in exactly one basis row
    nwords = rows.shape[1]
    for r in range(rows.shape[0]):
        for b in range(basis.shape[0]):
            c = pivots[b]
            if rows[r, c >> 6] & (np.uint64(1) << np.uint64(c & 63)):
                for k in range(nwords):
                    rows[r, k] ^= basis[b, k]


def rref(m: BitMatrix, full: bool = True, reverse: bool = False) -> tuple[int, BitMatrix, list[int]]:
    """Row-reduce over GF(2); returns ``(rank, reduced, pivot_columns)``.

    With ``full=False`` only the forward pass runs (row echelon form).  With
    ``reverse=True`` pivots are chosen from the last column towards the first,
    so leading terms are the highest-indexed columns; rows whose pivot lies
    below a column ``k`` then span the row space restricted to columns ``< k``.
    The reduced matrix keeps all ``m.rows`` rows, nonzero ones first.
    """
    out = m.copy()
    if out.rows == 0 or out.cols == 0:
        return 0, out, []
    rank, piv = _rref_kernel(out.data, out.cols, full, reverse)
    return int(rank), out, [int(p) for p in piv]


def reduce_rows(rows: BitMatrix, basis: BitMatrix, pivots: Sequence[int]) -> BitMatrix:
    """Reduce ``rows`` modulo a fully reduced ``basis`` with the given pivot columns."""
    out = rows.copy()
    if out.rows and basis.rows:
        b = basis.data
        if b.shape[1] < out.data.shape[1]:
            b = np.pad(b, ((0, 0), (0, out.data.shape[1] - b.shape[1])))
        _reduce_kernel(out.data, np.ascontiguousarray(b[: len(pivots)]), np.asarray(pivots, dtype=np.int64))
    return out


def rank(m: BitMatrix) -> int:
    return rref(m, full=False)[0]


def solve_affine(rows: Sequence[int], nvars: int):
    """Solve a GF(2) affine system given as bitmask rows ``(linear mask, constant)``.

    Each entry of ``rows`` is ``(mask, c)`` meaning ``sum_{i in mask} x_i = c``.
    Returns ``(particular, kernel_basis)`` with integer bitmask vectors, or
    ``None`` when the system is inconsistent.
    """
    pivots: dict[int, tuple[int, int]] = {}
    for mask, c in rows:
        for p, (pm, pc) in pivots.items():
            if mask >> p & 1:
                mask ^= pm
                c ^= pc
        if mask == 0:
            if c:
                return None
            continue
        p = mask.bit_length() - 1
        for q, (qm, qc) in list(pivots.items()):
            if qm >> p & 1:
                pivots[q] = (qm ^ mask, qc ^ c)
        pivots[p] = (mask, c)
    particular = 0
    for p, (pm, pc) in pivots.items():
        if pc:
            particular |= 1 << p
    free = [i for i in range(nvars) if i not in pivots]
    kernel = []
    for f in free:
        vec = 1 << f
        for p, (pm, _) in pivots.items():
            if pm >> f & 1:
                vec |= 1 << p
        kernel.append(vec)
    return particular, kernel
