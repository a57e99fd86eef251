"""Probabilistic polynomial method specialised to regular solutions.

Outline of one parity computation on a system whose blocks have lengths
``L_i``:

* the last ``n_z`` blocks form the z part, the others the y part;
* ``k`` random combinations ``R_1..R_k`` of the equations give
  ``F~ = prod(1 + R_i)``, which is 1 on every solution and, per point, on a
  non-solution with probability ``2^-k``;
* ``G(y) = sum over regular z of F~(y, z)`` has degree at most ``2k - n_z`` in
  y when every z block has even length, so it is fixed by its values on the
  at-most-regular y of weight at most that bound;
* those values are interpolated (Moebius over the at-most-regular lattice),
  ``G`` is evaluated on every regular y, and the per-y majority over ``t``
  independent draws is summed.

With a unique solution the parity decides existence, and fixing one block at
a time turns the decision procedure into a search.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np

from .errors import (
    IncompleteDataError,
    InconsistentDecisionError,
    ParameterError,
)
from .instance import QuadraticPoly, RegularVector, RmqInstance, evaluate_instance, rng_for
from .modeling import SolveReport


# --- parameters ----------------------------------------------------------------


@dataclass(frozen=True)
class PolyMethodParams:
    gamma: float
    l_prime: int
    t: int | None = None  # repetitions; default max(15, 2w + 1)
    k: int | None = None  # subsystem size; default floor(n_z log2 L) + 2
    seed: int = 0

    def check(self) -> None:
        if self.l_prime < 2 or self.l_prime % 2:
            raise ParameterError(f"l' must be even, got {self.l_prime}")
        bound = 1.0 / (2.0 * math.log2(self.l_prime))
        if not 0.0 < self.gamma < bound:
            raise ParameterError(f"gamma must lie in (0, {bound:.4f}) for l'={self.l_prime}")
        if self.t is not None and self.t < 1:
            raise ParameterError("t must be positive")

    def repetitions(self, w: int) -> int:
        return self.t if self.t is not None else max(15, 2 * w + 1)


def default_params(l: int, seed: int = 0, t: int | None = None) -> PolyMethodParams:
    """Largest even window not above ``l`` and gamma at 90% of its admissible bound."""
    lp = l if l % 2 == 0 else l - 1
    return PolyMethodParams(0.9 / (2 * math.log2(lp)), lp, t=t, seed=seed)


def z_block_count(gamma: float, w: int) -> int:
    """``round(gamma * w)`` clamped to ``[1, w - 1]``."""
    return min(max(int(round(gamma * w)), 1), w - 1)


# --- ragged systems ------------------------------------------------------------


@dataclass
class Ragged:
    """Quadratic system over blocks of possibly different lengths.

    ``quad`` is strictly upper triangular.  ``coords[v]`` is the original
    coordinate of variable ``v`` (for decoding).
    """

    const: np.ndarray
    lin: np.ndarray
    quad: np.ndarray
    blocks: list
    coords: list
    n_orig: int = 0
    fixed_ones: list = field(default_factory=list)

    @property
    def nvars(self) -> int:
        return self.lin.shape[1]

    @property
    def m(self) -> int:
        return self.const.shape[0]

    def evaluate_support(self, supp: np.ndarray) -> np.ndarray:
        """Residuals at points given by sorted supports padded with ``nvars`` (N, s) -> (N, m)."""
        N = supp.shape[0]
        n = self.nvars
        lin = np.concatenate([self.lin, np.zeros((self.m, 1), np.uint8)], axis=1).T
        Q = np.zeros((n + 1, n + 1, self.m), np.uint8)
        Q[:n, :n] = self.quad.transpose(1, 2, 0)
        acc = np.broadcast_to(self.const, (N, self.m)).copy()
        for a in range(supp.shape[1]):
            acc ^= lin[supp[:, a]]
        for a, b in combinations(range(supp.shape[1]), 2):
            acc ^= Q[supp[:, a], supp[:, b]]
        return acc

    def restrict(self, keep_blocks: list, fixed_ones: list) -> "Ragged":
        """Set the given variables to 1, every other variable of their blocks to 0,
        and keep only ``keep_blocks`` (indices into ``self.blocks``)."""
        one = np.zeros(self.nvars, np.int64)
        one[fixed_ones] = 1
        keep = [v for bi in keep_blocks for v in self.blocks[bi]]
        Qf = self.quad.astype(np.int64)
        c = (self.const + self.lin.astype(np.int64) @ one + np.einsum("kij,i,j->k", Qf, one, one)) & 1
        lin = (self.lin.astype(np.int64) + Qf @ one + np.einsum("kij,i->kj", Qf, one)) & 1
        lin = lin[:, keep]
        quad = Qf[:, keep][:, :, keep] & 1
        pos = {v: i for i, v in enumerate(keep)}
        blocks = [[pos[v] for v in self.blocks[bi]] for bi in keep_blocks]
        return Ragged(c.astype(np.uint8), lin.astype(np.uint8), quad.astype(np.uint8), blocks,
                      [self.coords[v] for v in keep], self.n_orig,
                      self.fixed_ones + [self.coords[v] for v in fixed_ones])


def ragged_from_instance(inst: RmqInstance) -> Ragged:
    blocks = [list(range(i * inst.l, (i + 1) * inst.l)) for i in range(inst.w)]
    return Ragged(inst.const.copy(), inst.lin.copy(), inst.quad.copy(), blocks,
                  list(range(inst.n)), inst.n)


def restrict_to_windows(rag: Ragged, windows: list) -> Ragged:
    """Keep only the coordinates in ``windows[i]`` (positions inside block i).

    Blocks reduced to a single coordinate are fixed to 1 and removed.
    """
    keep_vars = []
    new_blocks = []
    ones = []
    for bi, win in enumerate(windows):
        vs = [rag.blocks[bi][j] for j in win]
        if len(vs) == 1:
            ones.append(vs[0])
        else:
            new_blocks.append(vs)
            keep_vars.extend(vs)
    n = rag.nvars
    one = np.zeros(n, np.int64)
    one[ones] = 1
    Qf = rag.quad.astype(np.int64)
    c = (rag.const + rag.lin.astype(np.int64) @ one + np.einsum("kij,i,j->k", Qf, one, one)) & 1
    lin = (rag.lin.astype(np.int64) + Qf @ one + np.einsum("kij,i->kj", Qf, one)) & 1
    pos = {v: i for i, v in enumerate(keep_vars)}
    return Ragged(
        c.astype(np.uint8),
        lin[:, keep_vars].astype(np.uint8),
        (Qf[:, keep_vars][:, :, keep_vars] & 1).astype(np.uint8),
        [[pos[v] for v in blk] for blk in new_blocks],
        [rag.coords[v] for v in keep_vars],
        rag.n_orig,
        rag.fixed_ones + [rag.coords[v] for v in ones],
    )


# --- random subsystems ---------------------------------------------------------


def _full_rank_matrix(rng: np.random.Generator, k: int, m: int) -> np.ndarray:
    from .algebra import BitMatrix, rank

    while True:
        A = rng.integers(0, 2, size=(k, m), dtype=np.uint8)
        if rank(BitMatrix.from_dense(A)) == k:
            return A


def _combine(A: np.ndarray, const, lin, quad):
    Ai = A.astype(np.int64)
    c = (Ai @ const.astype(np.int64)) & 1
    li = (Ai @ lin.astype(np.int64)) & 1
    qu = np.einsum("km,mij->kij", Ai, quad.astype(np.int64)) & 1
    return c.astype(np.uint8), li.astype(np.uint8), qu.astype(np.uint8)


def random_subsystem(inst: RmqInstance, k: int, seed: int) -> list[QuadraticPoly]:
    """``k`` combinations ``R_i = sum_j A_ij P_j`` with ``A`` uniformly random of full rank."""
    if not 1 <= k < inst.m:
        raise ParameterError(f"need 1 <= k < m = {inst.m}, got k={k}")
    A = _full_rank_matrix(rng_for(seed), k, inst.m)
    c, li, qu = _combine(A, inst.const, inst.lin, inst.quad)
    return [QuadraticPoly(inst.l, inst.w, int(c[i]), li[i], qu[i]) for i in range(k)]


# --- interpolation over at-most-regular vectors --------------------------------


def amr_vectors(l: int, w: int, d: int):
    """At-most-regular vectors of weight <= d as position tuples (0 = empty block)."""
    for wt in range(min(d, w) + 1):
        for blocks in combinations(range(w), wt):
            for pos in product(range(1, l + 1), repeat=wt):
                v = [0] * w
                for b, p in zip(blocks, pos):
                    v[b] = p
                yield tuple(v)


def amr_count(l: int, w: int, d: int) -> int:
    return sum(math.comb(w, i) * l**i for i in range(min(d, w) + 1))


def _star_mobius(arr: np.ndarray) -> np.ndarray:
    """Moebius transform over the product of stars {0 < 1..L}; an involution over GF(2)."""
    arr = arr.copy()
    for ax in range(arr.ndim):
        sl0 = [slice(None)] * arr.ndim
        sl1 = [slice(None)] * arr.ndim
        sl0[ax] = slice(0, 1)
        sl1[ax] = slice(1, None)
        arr[tuple(sl1)] ^= arr[tuple(sl0)]
    return arr


def _weight_grid(shape) -> np.ndarray:
    grids = np.indices(shape)
    return (grids > 0).sum(axis=0)


def regular_mobius_interpolate(evals: dict, l: int, w: int, d: int) -> dict:
    """Coefficients ``a_S`` of the at-most-regular monomials of degree <= d.

    ``evals`` maps every at-most-regular vector of weight <= d (as a tuple of
    per-block positions, 0 meaning an empty block) to the function value.
    ``a_S`` is the XOR of the values on all vectors below ``S``.
    """
    shape = (l + 1,) * w
    table = np.zeros(shape, np.uint8)
    for v in amr_vectors(l, w, d):
        if v not in evals:
            raise IncompleteDataError(v)
        table[v] = evals[v] & 1
    coeff = _star_mobius(table)
    coeff[_weight_grid(shape) > d] = 0
    return {v: int(coeff[v]) for v in amr_vectors(l, w, d)}


def evaluate_from_coefficients(coeffs: dict, l: int, w: int) -> np.ndarray:
    """Values on every at-most-regular vector, array of shape ``(l+1,)*w``."""
    table = np.zeros((l + 1,) * w, np.uint8)
    for v, a in coeffs.items():
        table[v] = a & 1
    return _star_mobius(table)


# --- parity counting -----------------------------------------------------------


def _supports(rag: Ragged, y_blocks, z_blocks, ys: np.ndarray, zs: np.ndarray) -> np.ndarray:
    """Sorted supports of the points (y, z): ys holds positions (0 = empty), zs 1-based positions."""
    n = rag.nvars
    cols = []
    for b, bi in enumerate(y_blocks):
        blk = np.array(rag.blocks[bi] + [n])
        p = ys[:, b]
        cols.append(np.where(p > 0, blk[np.maximum(p - 1, 0)], n))
    yv = np.stack(cols, axis=1) if cols else np.zeros((ys.shape[0], 0), np.int64)
    zc = [np.array(rag.blocks[bi])[zs[:, b] - 1] for b, bi in enumerate(z_blocks)]
    zv = np.stack(zc, axis=1) if zc else np.zeros((zs.shape[0], 0), np.int64)
    Y = np.repeat(yv, zs.shape[0], axis=0)
    Z = np.tile(zv, (ys.shape[0], 1))
    return np.sort(np.concatenate([Y, Z], axis=1), axis=1)


@dataclass
class ParityTrace:
    """Everything one parity computation produced, for inspection and tests."""

    parity: int
    n_z: int
    k: int
    d_G: int
    t: int
    y_lengths: list
    per_rep: list  # per repetition: G on every regular y, array (L1, L2, ...)
    majority: np.ndarray | None
    evaluations: int


def _regular_slice(table: np.ndarray) -> np.ndarray:
    return table[(slice(1, None),) * table.ndim]


def _g_table_direct(rag, y_blocks, z_blocks, c, li, qu, ylens, ys_list, zs) -> np.ndarray:
    sub = Ragged(c, li, qu, rag.blocks, rag.coords)
    ys = np.array(ys_list, dtype=np.int64).reshape(len(ys_list), len(y_blocks))
    supp = _supports(sub, y_blocks, z_blocks, ys, zs)
    res = sub.evaluate_support(supp)
    ftilde = (~res.any(axis=1)).astype(np.uint8).reshape(len(ys_list), zs.shape[0])
    return ftilde.sum(axis=1) & 1


def parity_count(rag: Ragged, gamma: float, t: int, seed: int, k: int | None = None) -> ParityTrace:
    """Parity of the number of regular solutions of a ragged system (per-y majority over t draws)."""
    w = len(rag.blocks)
    if w == 0:
        par = int(not rag.const.any())
        return ParityTrace(par, 0, 0, 0, 0, [], [], None, 1)
    if w == 1:
        pts = np.array([[v] for v in rag.blocks[0]])
        res = rag.evaluate_support(pts)
        par = int((~res.any(axis=1)).sum() & 1)
        return ParityTrace(par, 0, 0, 0, 0, [], [], None, len(pts))
    n_z = z_block_count(gamma, w)
    z_blocks = list(range(w - n_z, w))
    y_blocks = list(range(w - n_z))
    zl = [len(rag.blocks[b]) for b in z_blocks]
    if any(L % 2 for L in zl):
        raise ParameterError(f"z blocks must have even length, got {zl}")
    ylens = [len(rag.blocks[b]) for b in y_blocks]
    if k is None:
        k = int(math.floor(sum(math.log2(L) for L in zl) + 1e-12)) + 2
    exact = k >= rag.m
    d_G = 2 * (rag.m if exact else k) - n_z
    zs = np.array(list(product(*(range(1, L + 1) for L in zl))), dtype=np.int64)
    # at-most-regular y of weight <= d_G over ragged y blocks
    ys_list = []
    for wt in range(min(d_G, len(y_blocks)) + 1):
        for bl in combinations(range(len(y_blocks)), wt):
            for pos in product(*(range(1, ylens[b] + 1) for b in bl)):
                v = [0] * len(y_blocks)
                for b, p in zip(bl, pos):
                    v[b] = p
                ys_list.append(tuple(v))
    shape = tuple(L + 1 for L in ylens)
    wgrid = _weight_grid(shape)
    reps = 1 if exact else t
    per_rep = []
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, len(rag.blocks), rag.nvars])
    for r, child in enumerate(ss.spawn(reps)):
        if exact:
            c, li, qu = rag.const, rag.lin, rag.quad
        else:
            rng = np.random.Generator(np.random.Philox(child))
            A = _full_rank_matrix(rng, k, rag.m)
            c, li, qu = _combine(A, rag.const, rag.lin, rag.quad)
        vals = _g_table_direct(rag, y_blocks, z_blocks, c, li, qu, ylens, ys_list, zs)
        table = np.zeros(shape, np.uint8)
        for v, g in zip(ys_list, vals):
            table[v] = g
        coeff = _star_mobius(table)
        coeff[wgrid > d_G] = 0
        per_rep.append(_regular_slice(_star_mobius(coeff)))
    stack = np.stack(per_rep)
    majority = (stack.sum(axis=0) * 2 > reps).astype(np.uint8)
    parity = int(majority.sum() & 1)
    return ParityTrace(parity, n_z, k, d_G, reps, ylens, per_rep, majority,
                       len(ys_list) * zs.shape[0] * reps)


def exact_partial_parities(rag: Ragged, n_z: int) -> np.ndarray:
    """True ``sum_z F(y, z)`` on every regular y (brute force, for checks)."""
    w = len(rag.blocks)
    z_blocks = list(range(w - n_z, w))
    y_blocks = list(range(w - n_z))
    ylens = [len(rag.blocks[b]) for b in y_blocks]
    zl = [len(rag.blocks[b]) for b in z_blocks]
    zs = np.array(list(product(*(range(1, L + 1) for L in zl))), dtype=np.int64)
    ys = list(product(*(range(1, L + 1) for L in ylens)))
    vals = _g_table_direct(rag, y_blocks, z_blocks, rag.const, rag.lin, rag.quad, ylens, ys, zs)
    return vals.reshape(tuple(ylens))


def _window_choices(lengths: list, lp: int) -> list[list[list[int]]]:
    """Per block, the windows of ``lp`` consecutive positions (last one may be shorter)."""
    out = []
    for L in lengths:
        wins = [list(range(a, min(a + lp, L))) for a in range(0, L, lp)]
        for win in wins:
            if len(win) > 1 and len(win) % 2:
                raise ParameterError(f"window of odd length {len(win)} for block length {L}, l'={lp}")
        out.append(wins)
    return out


def decide(rag: Ragged, params: PolyMethodParams, stats: dict | None = None) -> int:
    """Parity of the number of regular solutions, summed over window guesses."""
    params.check()
    lengths = [len(b) for b in rag.blocks]
    total = 0
    for pattern in product(*_window_choices(lengths, params.l_prime)):
        sub = restrict_to_windows(rag, list(pattern))
        tr = parity_count(sub, params.gamma, params.repetitions(len(rag.blocks)),
                          params.seed + 7919 * (stats or {}).get("calls", 0), params.k)
        total ^= tr.parity
        if stats is not None:
            stats["evaluations"] = stats.get("evaluations", 0) + tr.evaluations
    if stats is not None:
        stats["calls"] = stats.get("calls", 0) + 1
    return total


def regular_parity_count(inst: RmqInstance, params: PolyMethodParams) -> int:
    """Parity of the number of regular solutions of an instance."""
    return decide(ragged_from_instance(inst), params)


def search_via_decision(inst: RmqInstance, params: PolyMethodParams, stats: dict | None = None):
    """Recover the (assumed unique) regular solution block by block, or ``None``.

    Block ``b`` gets each position tried in turn; the first one whose
    restricted system has odd parity is kept.  The last block is settled by
    direct evaluation.  At most ``w * l`` decisions are made.
    """
    params.check()
    stats = stats if stats is not None else {}
    stats.setdefault("calls", 0)
    l, w = inst.l, inst.w
    base = ragged_from_instance(inst)
    chosen: list[int] = []
    for b in range(w - 1):
        hit = None
        for p in range(1, l + 1):
            fixed = [i * l + q - 1 for i, q in enumerate(chosen + [p])]
            sub = base.restrict(list(range(b + 1, w)), fixed)
            if decide(sub, params, stats):
                hit = p
                break
        if hit is None:
            if b == 0:
                return None
            raise InconsistentDecisionError(f"no position of block {b} survives after {chosen}")
        chosen.append(hit)
    for p in range(1, l + 1):
        cand = RegularVector(l, w, tuple(chosen + [p]))
        if not evaluate_instance(inst, cand.to_bits()).any():
            return cand
    if chosen:
        raise InconsistentDecisionError(f"prefix {chosen} has no completion")
    return None


def polymethod_solve(inst: RmqInstance, params: PolyMethodParams | None = None) -> SolveReport:
    """Search-to-decision run wrapped in a :class:`SolveReport`."""
    t0 = time.perf_counter()
    params = params or default_params(inst.l, seed=inst.seed)
    rep = SolveReport("polymethod", inst.l, inst.w, inst.m, inst.seed)
    stats: dict = {}
    try:
        sol = search_via_decision(inst, params, stats)
        rep.status = "solved" if sol else "unsat"
        rep.solutions = [sol] if sol else []
    except InconsistentDecisionError:
        rep.status = "inconclusive"
    rep.calls = stats.get("calls", 0)
    rep.guesses_tried = rep.calls
    rep.elapsed = time.perf_counter() - t0
    return rep
