"""Algebraic modeling of RMQ, Macaulay matrices, XL solving and Hilbert-function probes.

The modeled system contains the instance quadratics, the pairwise products
inside each block and one affine sum-to-one constraint per block.  Field
equations are implicit in the squarefree monomials.

After the sum-to-one constraint of a block is used to eliminate its last free
coordinate, the block products generate exactly the ideal spanned by all
monomials with two variables from the same block.  The Macaulay matrices are
therefore built in that monomial quotient by default: such monomials are
simply never given a column.  Pass ``quotient=False`` to keep the products as
explicit generators instead (same row space, larger matrices).
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Callable, Sequence

import numpy as np

from .algebra import AnfPoly, BitMatrix, monomial, reduce_rows, rref, solve_affine
from .errors import InfeasibleGuessError, ParameterError, SizeError
from .instance import PolySystem, RegularVector, RmqInstance, evaluate_instance, is_regular

COLUMN_GUARD = 2_000_000
ENUM_LIMIT = 1 << 16


# --- guesses and the modeled system --------------------------------------------


@dataclass(frozen=True)
class GuessPattern:
    """Coordinates (1-based, per block) forced to zero before solving."""

    l: int
    zeros: tuple  # one tuple of 1-based indices per block

    def __post_init__(self):
        z = tuple(tuple(sorted(set(int(j) for j in blk))) for blk in self.zeros)
        object.__setattr__(self, "zeros", z)
        for blk in z:
            if any(not 1 <= j <= self.l for j in blk):
                raise ParameterError(f"guess index out of 1..{self.l}: {blk}")

    @classmethod
    def none(cls, l: int, w: int) -> "GuessPattern":
        return cls(l, ((),) * w)

    @property
    def w(self) -> int:
        return len(self.zeros)

    def free(self, i: int) -> list[int]:
        """0-based free coordinates of block ``i``."""
        z = set(self.zeros[i])
        return [j for j in range(self.l) if j + 1 not in z]

    def free_counts(self) -> list[int]:
        return [self.l - len(z) for z in self.zeros]

    def gammas(self) -> dict[int, float]:
        """Fraction of blocks having each number of free coordinates."""
        out: dict[int, float] = {}
        for c in self.free_counts():
            out[c] = out.get(c, 0.0) + 1.0 / self.w
        return out


@dataclass
class ModeledSystem(PolySystem):
    """A :class:`PolySystem` produced from an instance, with its back-substitution recipe."""

    instance: RmqInstance | None = None
    guess: GuessPattern | None = None
    eliminated: bool = True
    groups: list = field(default_factory=list)  # per block: system variables living in it
    # per block: (kept coordinates, their system variables, eliminated coordinate or None)
    recipe: list = field(default_factory=list)

    def full_assignment(self, bits) -> np.ndarray:
        inst = self.instance
        x = np.zeros(inst.n, dtype=np.uint8)
        for i, (kept, kept_vars, elim) in enumerate(self.recipe):
            base = i * inst.l
            acc = 1
            for j, v in zip(kept, kept_vars):
                x[base + j] = bits[v] & 1
                acc ^= x[base + j]
            if elim is not None:
                x[base + elim] = acc
        return x

    def decode(self, bits) -> RegularVector | None:
        x = self.full_assignment(bits)
        if not is_regular(x, self.instance.l):
            return None
        return RegularVector.from_bits(x, self.instance.l)

    def verify(self, sol: RegularVector) -> bool:
        return not evaluate_instance(self.instance, sol.to_bits()).any()


def _affine_map(inst: RmqInstance, guess: GuessPattern):
    """Express every original coordinate as ``x = A y + b`` in the system variables."""
    l, w, n = inst.l, inst.w, inst.n
    recipe, groups = [], []
    nv = 0
    for i in range(w):
        free = guess.free(i)
        if not free:
            raise InfeasibleGuessError(f"block {i} has every coordinate guessed to zero")
        kept, elim = free[:-1], free[-1]
        kv = list(range(nv, nv + len(kept)))
        nv += len(kept)
        groups.append(kv)
        recipe.append((kept, kv, elim))
    A = np.zeros((n, nv), dtype=np.int64)
    b = np.zeros(n, dtype=np.int64)
    for i, (kept, kv, elim) in enumerate(recipe):
        for j, v in zip(kept, kv):
            A[i * l + j, v] = 1
        A[i * l + elim, kv] = 1
        b[i * l + elim] = 1
    return A, b, nv, groups, recipe


def _quadratic_to_anf(c: int, lin: np.ndarray, Q: np.ndarray, nv: int) -> AnfPoly:
    """ANF of ``c + lin.y + y^T Q y`` with ``y_i^2 = y_i``."""
    lin = (lin + np.diag(Q)) & 1
    U = (np.triu(Q, 1) + np.tril(Q, -1).T) & 1
    terms = [0] if c & 1 else []
    terms += [1 << int(i) for i in np.flatnonzero(lin)]
    a, bb = np.nonzero(U)
    terms += [(1 << int(x)) | (1 << int(y)) for x, y in zip(a, bb)]
    return AnfPoly(frozenset(terms), nv)


def build_modeling(
    inst: RmqInstance, guess: GuessPattern | None = None, eliminate_linear: bool = True
) -> ModeledSystem:
    """Quadratics, block products, block sums and guesses as one labeled system.

    With ``eliminate_linear`` the last free coordinate of each block is
    replaced by one plus the sum of the other free ones and guessed
    coordinates are substituted by zero, leaving ``sum(l'_i - 1)`` variables.
    Without it all ``n`` coordinates stay and guesses become unit generators.
    """
    if inst.q != 2:
        raise ParameterError("modeling is implemented over GF(2) only")
    l, w = inst.l, inst.w
    guess = guess or GuessPattern.none(l, w)
    if guess.w != w or guess.l != l:
        raise ParameterError("guess pattern geometry does not match the instance")
    if not eliminate_linear:
        for i in range(w):
            if not guess.free(i):
                raise InfeasibleGuessError(f"block {i} has every coordinate guessed to zero")
        A, b = np.eye(inst.n, dtype=np.int64), np.zeros(inst.n, dtype=np.int64)
        nv = inst.n
        groups = [list(range(i * l, (i + 1) * l)) for i in range(w)]
        recipe = [(list(range(l)), groups[i], None) for i in range(w)]
    else:
        A, b, nv, groups, recipe = _affine_map(inst, guess)

    sysm = ModeledSystem(nv, instance=inst, guess=guess, eliminated=eliminate_linear,
                         groups=groups, recipe=recipe)
    Qall = inst.quad.astype(np.int64)
    for k in range(inst.m):
        Q = Qall[k]
        bQ = b @ Q
        Qb = Q @ b
        c = (int(inst.const[k]) + int(inst.lin[k] @ b) + int(b @ Qb)) & 1
        lin = (inst.lin[k].astype(np.int64) @ A + bQ @ A + Qb @ A) & 1
        Qy = (A.T @ Q @ A) & 1
        sysm.add(_quadratic_to_anf(c, lin, Qy, nv), "init")

    def image(idx: int) -> AnfPoly:
        terms = [1 << int(v) for v in np.flatnonzero(A[idx])]
        if b[idx]:
            terms.append(0)
        return AnfPoly.from_terms(terms, nv)

    for i in range(w):
        for j1, j2 in combinations(range(l), 2):
            sysm.add(image(i * l + j1) * image(i * l + j2), "quad-constraint")
    for i in range(w):
        s = AnfPoly.one(nv)
        for j in range(l):
            s = s + image(i * l + j)
        sysm.add(s, "linear-constraint")
    if not eliminate_linear:
        for i in range(w):
            for j in guess.zeros[i]:
                sysm.add(AnfPoly.var(i * l + j - 1, nv), "guess")
    return sysm


# --- Macaulay matrices ---------------------------------------------------------


def count_columns(nvars: int, d: int, groups: Sequence[Sequence[int]] | None = None) -> int:
    if not groups:
        return sum(math.comb(nvars, i) for i in range(d + 1))
    # coefficient extraction from prod_g (1 + |g| z)
    poly = [1]
    for g in groups:
        nxt = poly + [0]
        for i, c in enumerate(poly):
            nxt[i + 1] += c * len(g)
        poly = nxt
    return sum(poly[: d + 1])


def enumerate_monomials(nvars: int, d: int, groups: Sequence[Sequence[int]] | None = None) -> list[int]:
    """Squarefree monomials of degree <= d, graded then lexicographic.

    With ``groups``, monomials using two variables of one group are skipped.
    """
    out = [0]
    if groups:
        gid = {}
        for g, vs in enumerate(groups):
            for v in vs:
                gid[v] = g
        for k in range(1, d + 1):
            for vs in combinations(range(nvars), k):
                gs = [gid.get(v, -1 - v) for v in vs]
                if len(set(gs)) == k:
                    out.append(monomial(vs))
    else:
        for k in range(1, d + 1):
            out.extend(monomial(vs) for vs in combinations(range(nvars), k))
    return out


@dataclass
class MacaulayMatrix:
    matrix: BitMatrix
    columns: list  # monomial masks, graded ascending then lexicographic
    degree: int
    nvars: int
    row_origins: list = field(default_factory=list)  # (generator index, multiplier mask)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.rows, self.matrix.cols

    def column_degrees(self) -> np.ndarray:
        return np.array([bin(c).count("1") for c in self.columns], dtype=np.int64)


class _ColumnIndex:
    """Lookup from monomial masks to column positions (vectorised)."""

    def __init__(self, columns: Sequence[int]):
        cols = np.array(columns, dtype=np.int64)
        self.order = np.argsort(cols, kind="stable")
        self.sorted = cols[self.order]
        self.n = len(columns)

    def lookup(self, masks: np.ndarray) -> np.ndarray:
        pos = np.searchsorted(self.sorted, masks)
        pos = np.minimum(pos, self.n - 1)
        hit = self.sorted[pos] == masks
        return np.where(hit, self.order[pos], -1)


def _product_rows(terms: np.ndarray, mults: np.ndarray, index: _ColumnIndex):
    """Row/column coordinates (with GF(2) cancellation) of ``mults[r] * poly``."""
    if terms.size == 0 or mults.size == 0:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    U = mults[:, None] | terms[None, :]
    cols = index.lookup(U.ravel())
    rows = np.repeat(np.arange(mults.size, dtype=np.int64), terms.size)
    keep = cols >= 0
    key = rows[keep] * index.n + cols[keep]
    key, counts = np.unique(key, return_counts=True)
    key = key[counts & 1 == 1]
    return key // index.n, key % index.n


def _pack(nrows: int, ncols: int, r: np.ndarray, c: np.ndarray) -> BitMatrix:
    m = BitMatrix(nrows, ncols)
    if r.size:
        np.bitwise_or.at(m.data, (r, c >> 6), np.left_shift(np.uint64(1), (c & 63).astype(np.uint64)))
    return m


def _generator_arrays(sysm: PolySystem, use_quotient: bool):
    groups = getattr(sysm, "groups", None) if use_quotient else None
    gens = []
    for gi, (p, lab) in enumerate(zip(sysm.polys, sysm.labels)):
        if groups and lab == "quad-constraint":
            continue  # zero in the quotient ring
        if not p.terms:
            continue
        gens.append((gi, np.array(sorted(p.terms), dtype=np.int64), p.degree))
    return gens, (groups or None)


def macaulay_matrix(
    sysm: PolySystem,
    d: int,
    use_quotient: bool = True,
    column_guard: int = COLUMN_GUARD,
    dedup: bool = True,
) -> MacaulayMatrix:
    """Rows ``u * f`` for every generator ``f`` and monomial ``u`` with ``deg u + deg f <= d``."""
    if sysm.nvars > 62:
        raise SizeError("at most 62 variables are supported by the packed monomial index")
    gens, groups = _generator_arrays(sysm, use_quotient)
    ncols = count_columns(sysm.nvars, d, groups)
    if ncols > column_guard:
        raise SizeError(f"{ncols} columns exceed the guard {column_guard}")
    columns = enumerate_monomials(sysm.nvars, d, groups)
    index = _ColumnIndex(columns)
    col_arr = np.array(columns, dtype=np.int64)
    deg_arr = np.array([bin(c).count("1") for c in columns], dtype=np.int64)
    rs, cs, origins = [], [], []
    base = 0
    for gi, terms, e in gens:
        if e > d:
            continue
        mults = col_arr[deg_arr <= d - e]
        r, c = _product_rows(terms, mults, index)
        rs.append(r + base)
        cs.append(c)
        origins.extend((gi, int(u)) for u in mults)
        base += mults.size
    r = np.concatenate(rs) if rs else np.zeros(0, np.int64)
    c = np.concatenate(cs) if cs else np.zeros(0, np.int64)
    mat = _pack(base, len(columns), r, c)
    if dedup and mat.rows:
        nz = mat.data.any(axis=1)
        _, first = np.unique(mat.data, axis=0, return_index=True)
        keep = np.sort(first[nz[first]])
        mat = BitMatrix(keep.size, mat.cols, mat.data[keep].copy())
        origins = [origins[i] for i in keep]
    return MacaulayMatrix(mat, columns, d, sysm.nvars, origins)


def macaulay_cost(nvars: int, m: int, d: int, r_avg: float) -> float:
    """Cost ``3 * r_avg * cols^2`` of sparse elimination on the degree-d Macaulay matrix."""
    if min(nvars, m, d) <= 0 or r_avg <= 0:
        raise ParameterError("all arguments must be positive")
    cols = sum(math.comb(nvars, i) for i in range(d + 1))
    return 3 * r_avg * cols * cols


# --- reports -------------------------------------------------------------------


CSV_FIELDS = ("method", "l", "w", "m", "seed", "d_solv", "max_rows", "max_cols", "guesses", "elapsed_s", "found")


@dataclass
class SolveReport:
    method: str
    l: int
    w: int
    m: int
    seed: int
    status: str = "inconclusive"  # solved | unsat | inconclusive
    solutions: list = field(default_factory=list)
    solving_degree: int | None = None
    max_rows: int = 0
    max_cols: int = 0
    guesses_tried: int = 0
    elapsed: float = 0.0
    calls: int = 0

    @property
    def found(self) -> bool:
        return bool(self.solutions)

    def csv_row(self) -> dict:
        sols = ";".join(".".join(str(p) for p in s.positions) for s in self.solutions)
        return {
            "method": self.method,
            "l": self.l,
            "w": self.w,
            "m": self.m,
            "seed": self.seed,
            "d_solv": "" if self.solving_degree is None else self.solving_degree,
            "max_rows": self.max_rows,
            "max_cols": self.max_cols,
            "guesses": self.guesses_tried,
            "elapsed_s": f"{self.elapsed:.3f}",
            "found": sols or "none",
        }

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        wr = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        if header:
            wr.writeheader()
        wr.writerow(self.csv_row())
        return buf.getvalue()


def _report_for(method: str, inst: RmqInstance | None) -> SolveReport:
    if inst is None:
        return SolveReport(method, 0, 0, 0, 0)
    return SolveReport(method, inst.l, inst.w, inst.m, inst.seed)


# --- XL ------------------------------------------------------------------------


class _XLState:
    """Incremental XL bookkeeping for one system."""

    def __init__(self, sysm: PolySystem, use_quotient: bool, column_guard: int):
        if sysm.nvars > 62:
            raise SizeError("at most 62 variables are supported by the packed monomial index")
        self.sysm = sysm
        gens, groups = _generator_arrays(sysm, use_quotient)
        self.gens = [(t, e) for _, t, e in gens]
        self.groups = groups
        self.guard = column_guard
        self.nvars = sysm.nvars
        self.basis: BitMatrix | None = None  # fully reduced echelon basis from the previous degree
        self.basis_piv: list[int] = []

    def columns(self, d):
        ncols = count_columns(self.nvars, d, self.groups)
        if ncols > self.guard:
            raise SizeError(f"{ncols} columns exceed the guard {self.guard}")
        return enumerate_monomials(self.nvars, d, self.groups)

    def rows_from(self, gens, d, col_arr, deg_arr, index):
        rs, cs, base = [], [], 0
        for terms, e in gens:
            if e > d:
                continue
            mults = col_arr[deg_arr <= d - e]
            r, c = _product_rows(terms, mults, index)
            rs.append(r + base)
            cs.append(c)
            base += mults.size
        r = np.concatenate(rs) if rs else np.zeros(0, np.int64)
        c = np.concatenate(cs) if cs else np.zeros(0, np.int64)
        return _pack(base, index.n, r, c)


def _stack(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    words = max(a.data.shape[1], b.data.shape[1])
    da = np.pad(a.data, ((0, 0), (0, words - a.data.shape[1])))
    db = np.pad(b.data, ((0, 0), (0, words - b.data.shape[1])))
    return BitMatrix(a.rows + b.rows, max(a.cols, b.cols), np.vstack([da, db]))


def _row_terms(data_row: np.ndarray, col_arr: np.ndarray) -> np.ndarray:
    bits = np.unpackbits(data_row.view(np.uint8), bitorder="little")[: col_arr.size]
    return col_arr[np.flatnonzero(bits)]


def xl_solve(
    sysm: PolySystem,
    d_max: int | None = None,
    decode: Callable | None = None,
    verify: Callable | None = None,
    mutants: bool = False,
    use_quotient: bool = True,
    column_guard: int = COLUMN_GUARD,
    enum_limit: int = ENUM_LIMIT,
    method: str = "xl",
) -> SolveReport:
    """Linearize at increasing degree until the degree-<=1 part pins the solutions down.

    At each degree the Macaulay matrix is echelonized with leading terms taken
    from the highest-degree columns, so the rows led by the constant or a
    variable span every affine relation present at that degree.  Degree falls
    (row-space elements of lower degree that were not known before) are
    multiplied by all monomials that keep them within the degree and the
    elimination is repeated until it stabilises.

    Stops with ``solved`` when the affine relations leave one candidate that
    verifies, ``unsat`` when they are inconsistent (or the candidate fails),
    and ``inconclusive`` when ``d_max`` is exhausted (``None`` runs until the
    row space is the whole ideal, see below).  Once the degree is high
    enough for the row space to contain the whole ideal, the affine solution
    set is enumerated and every verified point is returned.
    """
    t0 = time.perf_counter()
    inst = getattr(sysm, "instance", None)
    rep = _report_for(method, inst)
    decode = decode or getattr(sysm, "decode", None) or (lambda bits: tuple(int(x) for x in bits))
    if verify is None:
        verify = getattr(sysm, "verify", None)
    if verify is None:
        polys = list(sysm.polys)

        def verify(bits):
            return all(p(list(bits)) == 0 for p in polys)

    st = _XLState(sysm, use_quotient, column_guard)
    nv = st.nvars
    top = max((e for _, e in st.gens), default=0)
    d_full = (len([g for g in st.groups if g]) if st.groups else nv) + top
    d = max(2, top)
    if d_max is None:
        d_max = d_full
    if not st.gens:
        d_full = d  # zero ideal: nothing more to learn
    d_last = max(d, d_max)
    while d <= d_last:
        columns = st.columns(d)
        col_arr = np.array(columns, dtype=np.int64)
        deg_arr = np.array([bin(c).count("1") for c in columns], dtype=np.int64)
        index = _ColumnIndex(columns)
        mat = st.rows_from(st.gens, d, col_arr, deg_arr, index)
        rep.max_rows = max(rep.max_rows, mat.rows)
        rep.max_cols = max(rep.max_cols, mat.cols)
        rank, ech, piv = rref(mat, full=True, reverse=True)
        n_top = int(np.searchsorted(deg_arr, d))  # columns of degree < d
        known, known_piv = st.basis, st.basis_piv
        while mutants:
            low = [i for i in range(rank) if piv[i] < n_top]
            if not low:
                break
            cand = BitMatrix(len(low), ech.cols, ech.data[low].copy())
            if known is not None and known.rows:
                cand = reduce_rows(cand, known, known_piv)
            crank, cech, _ = rref(cand, full=True, reverse=True)
            if crank == 0:
                break
            new_gens = []
            for i in range(crank):
                terms = _row_terms(cech.data[i], col_arr)
                new_gens.append((terms, int(max(bin(int(t)).count("1") for t in terms))))
            st.gens.extend(new_gens)
            fresh = BitMatrix(crank, cech.cols, cech.data[:crank].copy())
            kk = fresh if known is None else _stack(known, fresh)
            krank, kech, known_piv = rref(kk, full=True, reverse=True)
            known = BitMatrix(krank, kech.cols, kech.data[:krank].copy())
            extra = st.rows_from(new_gens, d, col_arr, deg_arr, index)
            both = _stack(BitMatrix(rank, ech.cols, ech.data[:rank].copy()), extra)
            rep.max_rows = max(rep.max_rows, both.rows)
            rank2, ech, piv = rref(both, full=True, reverse=True)
            grew = rank2 > rank
            rank = rank2
            if not grew:
                break
        st.basis = BitMatrix(rank, ech.cols, ech.data[:rank].copy())
        st.basis_piv = piv

        # affine relations: rows led by column 0 (the constant) or a variable
        lin_rows = []
        for i in range(rank):
            if piv[i] > nv:
                continue
            terms = _row_terms(ech.data[i], col_arr)
            mask, c = 0, 0
            for t in terms:
                t = int(t)
                if t == 0:
                    c = 1
                else:
                    mask |= t
            lin_rows.append((mask, c))
        rep.solving_degree = d
        sol = solve_affine(lin_rows, nv)
        if sol is None:
            rep.status = "unsat"
            break
        particular, kernel = sol
        if not kernel or d >= d_full:
            if 1 << len(kernel) > enum_limit:
                rep.status = "inconclusive"
                break
            found = []
            for combo in range(1 << len(kernel)):
                vec = particular
                for k, kv in enumerate(kernel):
                    if combo >> k & 1:
                        vec ^= kv
                bits = [(vec >> i) & 1 for i in range(nv)]
                cand = decode(bits)
                if cand is not None and verify(cand):
                    found.append(cand)
            found = sorted(set(found), key=_sort_key)
            rep.solutions = found
            rep.status = "solved" if found else "unsat"
            break
        d += 1
    else:
        rep.status = "inconclusive"
        rep.solving_degree = None
    rep.elapsed = time.perf_counter() - t0
    return rep


def _sort_key(s):
    return getattr(s, "positions", s)


def solve_plain(inst: RmqInstance, d_max: int | None = None, **kw) -> SolveReport:
    """XL on the full modeling of an instance."""
    rep = xl_solve(build_modeling(inst), d_max, **kw)
    rep.guesses_tried = 1
    return rep


# --- hybrid strategies ---------------------------------------------------------


def _windows(l: int, lp: int) -> list[list[int]]:
    return [list(range(a, min(a + lp, l))) for a in range(0, l, lp)]


def guess_patterns(l: int, w: int, strategy: str, params) -> list[GuessPattern]:
    """All guess patterns of a strategy in enumeration order.

    ``full``: ``params`` is gamma; the first ``round(gamma*w)`` blocks get
    their nonzero position guessed.  ``partial``: ``params`` is l'; every
    block is cut into windows of l' consecutive coordinates and the window
    holding the nonzero entry is guessed.  ``different``: ``params`` is a
    per-block list of window lengths.
    """
    if strategy == "full":
        gamma = float(params)
        if not 0.0 <= gamma <= 1.0:
            raise ParameterError("gamma must lie in [0, 1]")
        g = int(round(gamma * w))
        per_block = [[[j] for j in range(l)]] * g + [[list(range(l))]] * (w - g)
    elif strategy == "partial":
        lp = int(params)
        if not 1 <= lp <= l:
            raise ParameterError(f"l' must lie in 1..{l}")
        per_block = [_windows(l, lp)] * w
    elif strategy == "different":
        lps = [int(x) for x in params]
        if len(lps) != w or any(not 1 <= x <= l for x in lps):
            raise ParameterError(f"need {w} window lengths in 1..{l}")
        per_block = [_windows(l, x) for x in lps]
    else:
        raise ParameterError(f"unknown strategy {strategy!r}")
    out = []
    for choice in product(*per_block):
        zeros = tuple(tuple(j + 1 for j in range(l) if j not in win) for win in choice)
        out.append(GuessPattern(l, zeros))
    return out


def hybrid_solve(
    inst: RmqInstance,
    strategy: str,
    params,
    d_max: int | None = None,
    all_solutions: bool = False,
    **kw,
) -> SolveReport:
    """Guess, specialize, and run XL on each specialized system in a fixed order.

    Returns at the first verified solution unless ``all_solutions`` is set, in
    which case every guess is tried and the union is returned (guesses
    partition the regular vectors, so this is the full solution set).
    """
    t0 = time.perf_counter()
    rep = _report_for(f"hybrid-{strategy}", inst)
    sols = []
    inconclusive = False
    degs = []
    for pat in guess_patterns(inst.l, inst.w, strategy, params):
        rep.guesses_tried += 1
        sub = xl_solve(build_modeling(inst, pat), d_max, **kw)
        rep.max_rows = max(rep.max_rows, sub.max_rows)
        rep.max_cols = max(rep.max_cols, sub.max_cols)
        if sub.solving_degree is not None:
            degs.append(sub.solving_degree)
        if sub.status == "inconclusive":
            inconclusive = True
        if sub.solutions:
            sols.extend(sub.solutions)
            if not all_solutions:
                rep.solving_degree = sub.solving_degree
                break
    rep.solutions = sorted(set(sols), key=_sort_key)
    if rep.solving_degree is None and degs:
        rep.solving_degree = max(degs)
    if rep.solutions:
        rep.status = "solved"
    else:
        rep.status = "inconclusive" if inconclusive else "unsat"
    rep.elapsed = time.perf_counter() - t0
    return rep


# --- Hilbert function probes ---------------------------------------------------


@dataclass(frozen=True)
class HilbertProbe:
    degree: int
    value: int


def _homog_product_nilpotent(a: int, b: int):
    return None if a & b else a | b


def hilbert_function_probe(
    sysm: PolySystem,
    d: int,
    ring: str = "nilpotent",
    homog_var_degree: Sequence[int] | None = None,
    guard: int = 200_000,
) -> HilbertProbe:
    """``HF(d)`` = number of degree-d monomials minus the rank of the degree-d slice of the ideal.

    ``ring="nilpotent"``: squarefree monomials with ``x_i^2 = 0`` (the
    homogenized field equations).  Generators must be homogeneous AnfPolys.

    ``ring="homogenized"``: monomials ``x^S h^k`` with ``x_i^2 = x_i h``.
    Generators are AnfPolys of degree <= D homogenized to degree D with ``h``
    (``homog_var_degree`` optionally fixes D per generator).
    """
    if ring not in ("nilpotent", "homogenized"):
        raise ParameterError(f"unknown ring {ring!r}")
    nv = sysm.nvars
    if ring == "nilpotent":
        cols = [monomial(vs) for vs in combinations(range(nv), d)]
        if len(cols) > guard:
            raise SizeError(f"{len(cols)} columns exceed the guard {guard}")
        index = {c: i for i, c in enumerate(cols)}
        rows = []
        for p in sysm.polys:
            if not p.terms:
                continue
            e = p.degree
            if any(bin(t).count("1") != e for t in p.terms):
                raise ParameterError("generator is not homogeneous")
            if e > d:
                continue
            for mv in combinations(range(nv), d - e):
                u = monomial(mv)
                row = set()
                for t in p.terms:
                    if not t & u:
                        row ^= {index[t | u]}
                if row:
                    rows.append(sorted(row))
        total = len(cols)
    else:
        # monomial x^S h^k with |S| + k = d is identified by S alone
        cols = [monomial(vs) for k in range(d + 1) for vs in combinations(range(nv), k)]
        if len(cols) > guard:
            raise SizeError(f"{len(cols)} columns exceed the guard {guard}")
        index = {c: i for i, c in enumerate(cols)}
        rows = []
        for gi, p in enumerate(sysm.polys):
            if not p.terms:
                continue
            D = p.degree if homog_var_degree is None else homog_var_degree[gi]
            if D > d:
                continue
            # multipliers x^U h^j with |U| + j = d - D; x^S h^a * x^U h^j = x^(S|U) h^(...)
            for k in range(d - D + 1):
                for mv in combinations(range(nv), k):
                    u = monomial(mv)
                    row = set()
                    for t in p.terms:
                        row ^= {index[t | u]}
                    if row:
                        rows.append(sorted(row))
        total = len(cols)
    mat = BitMatrix.from_column_lists(rows, max(total, 1))
    r = rref(mat, full=False)[0] if rows else 0
    return HilbertProbe(d, total - r)


def structured_generators(l: int, w: int) -> PolySystem:
    """Homogeneous structured part: block products and block sums in ``n = l*w`` variables."""
    n = l * w
    sysm = PolySystem(n)
    for i in range(w):
        for j1, j2 in combinations(range(l), 2):
            sysm.add(AnfPoly(frozenset((monomial((i * l + j1, i * l + j2)),)), n), "quad-constraint")
    for i in range(w):
        sysm.add(AnfPoly.from_terms((1 << (i * l + j) for j in range(l)), n), "linear-constraint")
    return sysm


def series_coefficients(num: Sequence[int], den: Sequence[int], upto: int) -> list[int]:
    """Power-series coefficients of num/den up to ``z^upto`` (den[0] must be 1)."""
    out = []
    num = list(num) + [0] * (upto + 1)
    for k in range(upto + 1):
        c = num[k] - sum(den[j] * out[k - j] for j in range(1, min(k, len(den) - 1) + 1))
        out.append(c)
    return out


def poly_pow(base: Sequence[int], e: int) -> list[int]:
    out = [1]
    for _ in range(e):
        nxt = [0] * (len(out) + len(base) - 1)
        for i, a in enumerate(out):
            for j, b in enumerate(base):
                nxt[i + j] += a * b
        out = nxt
    return out


def truncated_series(coeffs: Sequence[int]) -> list[int]:
    """Truncate at the first non-positive coefficient (the usual semi-regular convention)."""
    out = []
    for c in coeffs:
        if c <= 0:
            break
        out.append(c)
    return out + [0] * (len(coeffs) - len(out))
