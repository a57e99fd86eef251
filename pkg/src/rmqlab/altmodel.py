"""Compact encoding of regular vectors: each length-2^s block becomes s bits.

Block coordinate ``j`` (1-based) is replaced by the product
``prod_a (x'_a + bin_a(j-1))`` over the block's ``s`` new variables, where
``bin_a`` is the a-th least significant bit.  That product is 1 at exactly
one point of F2^s, namely the complement of ``bin(j-1)``, so a regular
vector with nonzero position ``j`` in a block corresponds to that point.
Quadratic equations become equations of degree at most ``2s`` in ``s*w``
variables.  Primed variable ``a`` (0-based) of block ``i`` has index ``i*s + a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np

from .algebra import AnfPoly, monomial
from .errors import ParameterError, SizeError
from .instance import PolySystem, RegularVector, RmqInstance, evaluate_instance, plant_instance
from .modeling import hilbert_function_probe, poly_pow, series_coefficients


def log2_exact(l: int) -> int:
    """``s`` with ``l == 2**s``; anything else is rejected."""
    if l < 2 or l & (l - 1):
        raise ParameterError(f"block length {l} is not a power of two >= 2")
    return l.bit_length() - 1


def _g_matrix(s: int) -> np.ndarray:
    """``G[j, S]`` = coefficient of the monomial with support mask ``S`` in g(x_{j+1})."""
    l = 1 << s
    G = np.zeros((l, l), dtype=np.int64)
    for j in range(l):
        for S in range(l):
            # prod_a (x_a + b_a): x^S picks x_a for a in S, constant b_a elsewhere
            if all((j >> a) & 1 for a in range(s) if not (S >> a) & 1):
                G[j, S] = 1
    return G


def encode_map_g(l: int) -> list[AnfPoly]:
    """The ``l`` images ``g(x_1), ..., g(x_l)`` as polynomials in ``s`` variables."""
    s = log2_exact(l)
    G = _g_matrix(s)
    return [AnfPoly(frozenset(int(S) for S in np.flatnonzero(G[j])), s) for j in range(l)]


def encode_solution(v: RegularVector) -> np.ndarray:
    """Primed bits of a regular vector: block i holds the complement of bin(j_i - 1)."""
    s = log2_exact(v.l)
    out = np.zeros(s * v.w, dtype=np.uint8)
    for i, p in enumerate(v.positions):
        for a in range(s):
            out[i * s + a] = 1 ^ (((p - 1) >> a) & 1)
    return out


def decode_solution(vp, l: int) -> RegularVector:
    """Inverse of :func:`encode_solution` (total on F2^(s*w))."""
    s = log2_exact(l)
    vp = np.asarray(vp, dtype=np.int64) & 1
    if vp.size % s:
        raise ParameterError(f"length {vp.size} is not a multiple of s={s}")
    w = vp.size // s
    pos = []
    for i in range(w):
        j = sum((1 ^ int(vp[i * s + a])) << a for a in range(s))
        pos.append(j + 1)
    return RegularVector(l, w, tuple(pos))


@dataclass
class DegreeSystem(PolySystem):
    """Transformed system in ``s*w`` variables, degree at most ``2s``."""

    s: int = 1
    w: int = 1
    instance: RmqInstance | None = None
    fixed: dict = field(default_factory=dict)  # original primed index -> bit, for specializations
    free_vars: list = field(default_factory=list)  # original primed index of each system variable

    @property
    def l(self) -> int:
        return 1 << self.s

    @property
    def mu_prime(self) -> float:
        return len(self.polys) / (self.s * self.w)

    def full_bits(self, bits) -> np.ndarray:
        out = np.zeros(self.s * self.w, dtype=np.uint8)
        for k, b in self.fixed.items():
            out[k] = b
        for v, k in enumerate(self.free_vars):
            out[k] = bits[v] & 1
        return out

    def decode(self, bits) -> RegularVector:
        return decode_solution(self.full_bits(bits), self.l)

    def verify(self, sol: RegularVector) -> bool:
        if self.instance is None:
            vp = encode_solution(sol)
            return all(p(list(vp)) == 0 for p in self.polys_full())
        return not evaluate_instance(self.instance, sol.to_bits()).any()

    def polys_full(self):
        return self.polys


def _terms_from_block_coeffs(s: int, blocks: tuple, coeff: np.ndarray) -> list[int]:
    """Monomial masks for a coefficient tensor over per-block subsets."""
    out = []
    for idx in zip(*np.nonzero(coeff & 1)):
        mask = 0
        for blk, S in zip(blocks, idx):
            mask |= int(S) << (blk * s)
        out.append(mask)
    return out


def transform_instance(inst: RmqInstance) -> DegreeSystem:
    """Apply the encoding to every equation of an instance."""
    if inst.q != 2:
        raise ParameterError("only binary instances can be transformed")
    s = log2_exact(inst.l)
    l, w = inst.l, inst.w
    G = _g_matrix(s)
    nv = s * w
    dsys = DegreeSystem(nv, s=s, w=w, instance=inst, free_vars=list(range(nv)))
    for k in range(inst.m):
        terms: list[int] = [0] if inst.const[k] else []
        for i in range(w):
            lin = (inst.lin[k, i * l:(i + 1) * l].astype(np.int64) @ G) & 1
            terms += _terms_from_block_coeffs(s, (i,), lin)
        for i1, i2 in combinations(range(w), 2):
            Q = inst.quad[k, i1 * l:(i1 + 1) * l, i2 * l:(i2 + 1) * l].astype(np.int64)
            C = (G.T @ Q @ G) & 1
            terms += _terms_from_block_coeffs(s, (i1, i2), C)
        dsys.add(AnfPoly.from_terms(terms, nv), "init")
    return dsys


def specialize(dsys: DegreeSystem, fixed: dict) -> DegreeSystem:
    """Substitute constants for some primed variables (indices in the current system)."""
    keep = [v for v in range(dsys.nvars) if v not in fixed]
    rename = {v: i for i, v in enumerate(keep)}
    const_map = {v: (AnfPoly.one(dsys.nvars) if b else AnfPoly.zero(dsys.nvars)) for v, b in fixed.items()}
    out = DegreeSystem(
        len(keep),
        s=dsys.s,
        w=dsys.w,
        instance=dsys.instance,
        fixed={**dsys.fixed, **{dsys.free_vars[v]: int(b) & 1 for v, b in fixed.items()}},
        free_vars=[dsys.free_vars[v] for v in keep],
    )
    for p, lab in zip(dsys.polys, dsys.labels):
        out.add(p.substitute(const_map).rename(rename, len(keep)), lab)
    return out


def alt_solve(inst: RmqInstance, d_max: int | None = None, s_prime: int | None = None,
              all_solutions: bool = True, mutants: bool = True, **kw):
    """XL on the transformed system, optionally guessing ``s - s'`` primed bits per block.

    Guessing the first ``s - s'`` bits of every block corresponds to guessing
    ``l - 2^s'`` zero positions per block in the quadratic modeling.
    """
    import time

    from .modeling import _report_for, xl_solve

    t0 = time.perf_counter()
    dsys = transform_instance(inst)
    s, w = dsys.s, dsys.w
    sp = s if s_prime is None else int(s_prime)
    if not 0 <= sp <= s:
        raise ParameterError(f"s' must lie in 0..{s}")
    rep = _report_for("alt-xl", inst)
    g = s - sp
    guessed = [i * s + a for i in range(w) for a in range(g)]
    sols = []
    inconclusive = False
    for bits in product((0, 1), repeat=len(guessed)):
        rep.guesses_tried += 1
        sub_sys = specialize(dsys, dict(zip(guessed, bits))) if guessed else dsys
        sub = xl_solve(sub_sys, d_max, method="alt-xl", mutants=mutants, **kw)
        rep.max_rows = max(rep.max_rows, sub.max_rows)
        rep.max_cols = max(rep.max_cols, sub.max_cols)
        rep.solving_degree = max(rep.solving_degree or 0, sub.solving_degree or 0) or None
        inconclusive |= sub.status == "inconclusive"
        sols.extend(sub.solutions)
        if sols and not all_solutions:
            break
    rep.solutions = sorted(set(sols), key=lambda v: v.positions)
    rep.status = "solved" if sols else ("inconclusive" if inconclusive else "unsat")
    rep.elapsed = time.perf_counter() - t0
    return rep


# --- non-admissible monomials and the Hilbert heuristic ------------------------


def enumerate_non_admissible(s: int, w: int, d: int, guard: int = 2_000_000) -> list:
    """Degree-d monomials ``x'^S h^k`` of the homogenized ring no pair of blocks can reach.

    A monomial is returned as ``(per-block variable subsets, k)``.  It is
    non-admissible when for every pair of distinct blocks the degree carried
    by the two blocks plus ``k`` stays below ``2s``.
    """
    if s < 1 or w < 2 or d < 0:
        raise ParameterError("need s >= 1, w >= 2, d >= 0")
    count = sum(math.comb(s * w, k) for k in range(min(d, s * w) + 1))
    if count > guard:
        raise SizeError(f"{count} candidate monomials exceed the guard {guard}")
    out = []
    subsets = [list(combinations(range(s), k)) for k in range(s + 1)]
    for degs in product(range(s + 1), repeat=w):
        h = d - sum(degs)
        if h < 0:
            continue
        if all(degs[a] + degs[b] + h < 2 * s for a, b in combinations(range(w), 2)):
            for choice in product(*(subsets[k] for k in degs)):
                out.append((tuple(choice), h))
    return out


def heuristic_hf(s: int, w: int, m: int, d: int) -> int:
    """max(truncated series coefficient, |M_NA(d)|) predicted for ``HF(d)``."""
    num = poly_pow([1, 1], s * w)
    den = [1]
    for fac in ([1, -1],) + tuple([[1] + [0] * (2 * s - 1) + [1]] * m):
        den = [sum(den[i] * fac[k - i] for i in range(len(den)) if 0 <= k - i < len(fac))
               for k in range(len(den) + len(fac) - 1)]
    coeffs = series_coefficients(num, den, d)
    trunc = coeffs[d] if all(c > 0 for c in coeffs[: d + 1]) else 0
    return max(trunc, len(enumerate_non_admissible(s, w, d)))


def measured_hf(dsys: DegreeSystem, d: int) -> int:
    return hilbert_function_probe(dsys, d, ring="homogenized",
                                  homog_var_degree=[2 * dsys.s] * len(dsys.polys)).value


@dataclass
class HeuristicCheck:
    s: int
    w: int
    m: int
    d: int
    predicted: int
    measured: list
    lower_bound_ok: bool

    @property
    def pass_rate(self) -> float:
        return sum(1 for x in self.measured if x == self.predicted) / max(1, len(self.measured))


def alt_hilbert_check(s: int, w: int, m: int, d: int, seeds) -> HeuristicCheck:
    """Measure ``HF(d)`` of transformed planted instances against the heuristic prediction."""
    pred = heuristic_hf(s, w, m, d)
    na = len(enumerate_non_admissible(s, w, d))
    vals = []
    for seed in seeds:
        dsys = transform_instance(plant_instance(1 << s, w, m, seed))
        vals.append(measured_hf(dsys, d))
    return HeuristicCheck(s, w, m, d, pred, vals, all(v >= na for v in vals))


# --- text form -----------------------------------------------------------------


def render_degree_system(dsys: PolySystem) -> str:
    """One polynomial per line; monomials ``deg: i,j,...`` separated by `` ; ``."""
    lines = []
    for p in dsys.polys:
        mons = [f"{len(v)}: " + ",".join(str(i) for i in v) for v in p.sorted_terms()]
        lines.append(" ; ".join(m.rstrip() for m in mons))
    return "\n".join(lines) + "\n"


def parse_degree_system(text: str, nvars: int) -> list[AnfPoly]:
    polys = []
    for line in text.splitlines():
        line = line.strip()
        terms = []
        if line:
            for mon in line.split(";"):
                deg, _, idx = mon.partition(":")
                vs = [int(x) for x in idx.split(",") if x.strip()]
                if len(vs) != int(deg):
                    raise ParameterError(f"degree {deg} does not match {vs}")
                terms.append(monomial(vs))
        polys.append(AnfPoly.from_terms(terms, nvars))
    return polys

