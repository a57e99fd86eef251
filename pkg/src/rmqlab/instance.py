"""Regular MQ instances over GF(2): generation, evaluation, brute force, text I/O.

Variables are laid out block by block: coordinate ``j`` (0-based) of block
``i`` is variable ``i*l + j``.  Regular vectors are stored compactly as the
1-based position of the nonzero entry in each block.

Random bits come from numpy's counter-based Philox generator keyed by the
64-bit seed, so a seed pins an instance down on any platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Callable, Iterator, Sequence

import numpy as np

from .algebra import AnfPoly, monomial
from .errors import DegreeError, DimensionError, ParameterError, SizeError

BRUTE_FORCE_LIMIT = 1 << 28


def rng_for(seed: int) -> np.random.Generator:
    """The generator used for every random draw keyed by ``seed``."""
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))


def default_m(l: int, w: int) -> int:
    """Equation count 1.2 times the uniqueness bound, i.e. ceil(1.2 * w * log2 l)."""
    return math.ceil(round(1.2 * w * math.log2(l), 9))


def _check_geometry(l: int, w: int) -> None:
    if l < 2 or w < 1:
        raise ParameterError(f"need l >= 2 and w >= 1, got l={l}, w={w}")


@dataclass(frozen=True)
class RegularVector:
    l: int
    w: int
    positions: tuple  # 1-based nonzero position per block

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(int(p) for p in self.positions))
        if len(self.positions) != self.w:
            raise DimensionError(f"{len(self.positions)} positions for {self.w} blocks")
        if any(not 1 <= p <= self.l for p in self.positions):
            raise ParameterError(f"positions must lie in 1..{self.l}: {self.positions}")

    @property
    def n(self) -> int:
        return self.l * self.w

    def to_bits(self) -> np.ndarray:
        v = np.zeros(self.n, dtype=np.uint8)
        for i, p in enumerate(self.positions):
            v[i * self.l + p - 1] = 1
        return v

    def support(self) -> list[int]:
        return [i * self.l + p - 1 for i, p in enumerate(self.positions)]

    @classmethod
    def from_bits(cls, bits, l: int) -> "RegularVector":
        bits = np.asarray(bits, dtype=np.uint8)
        if not is_regular(bits, l):
            raise ParameterError("bit vector is not regular")
        blocks = bits.reshape(-1, l)
        return cls(l, blocks.shape[0], tuple(int(np.argmax(b)) + 1 for b in blocks))


def random_regular_vector(l: int, w: int, seed: int) -> RegularVector:
    _check_geometry(l, w)
    pos = rng_for(seed).integers(0, l, size=w)
    return RegularVector(l, w, tuple(int(p) + 1 for p in pos))


def iter_regular(l: int, w: int) -> Iterator[tuple]:
    """All regular vectors as 1-based position tuples, lexicographic order."""
    return product(range(1, l + 1), repeat=w)


def is_regular(v, l: int) -> bool:
    blocks = _blocks(v, l)
    return bool(np.all(blocks.sum(axis=1) == 1))


def is_at_most_regular(v, l: int) -> bool:
    blocks = _blocks(v, l)
    return bool(np.all(blocks.sum(axis=1) <= 1))


def _blocks(v, l: int) -> np.ndarray:
    v = np.asarray(v, dtype=np.int64) & 1
    if l < 1 or v.size % l:
        raise DimensionError(f"length {v.size} is not a multiple of l={l}")
    return v.reshape(-1, l)


def uniqueness_mu(l: int, q: int = 2) -> float:
    """Equation ratio m/n at which one regular solution is expected."""
    if l < 2 or q < 2:
        raise ParameterError("need l >= 2 and q >= 2")
    if q == 2:
        return math.log2(l) / l
    return math.log((q - 1) * l, q) / l


# --- polynomials ---------------------------------------------------------------


def cross_pairs(l: int, w: int) -> tuple[np.ndarray, np.ndarray]:
    """Variable index pairs of all inter-block products in storage order."""
    a, b = [], []
    for i1, i2 in combinations(range(w), 2):
        for j1 in range(l):
            for j2 in range(l):
                a.append(i1 * l + j1)
                b.append(i2 * l + j2)
    return np.array(a, dtype=np.int64), np.array(b, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class QuadraticPoly:
    """One quadratic with no products inside a block.

    ``quad[a, b]`` for ``a < b`` is the coefficient of ``x_a x_b``.
    """

    l: int
    w: int
    constant: int
    linear: np.ndarray
    quad: np.ndarray

    def __post_init__(self):
        n = self.l * self.w
        if self.linear.shape != (n,) or self.quad.shape != (n, n):
            raise DimensionError("coefficient arrays do not match the block geometry")
        blk = np.arange(n) // self.l
        same = blk[:, None] == blk[None, :]
        if np.any(self.quad[same]) or np.any(np.tril(self.quad)):
            raise ParameterError("intra-block or lower-triangular quadratic coefficient")

    @property
    def n(self) -> int:
        return self.l * self.w

    def cross_bits(self) -> np.ndarray:
        a, b = cross_pairs(self.l, self.w)
        return self.quad[a, b]

    def __call__(self, v) -> int:
        v = np.asarray(v, dtype=np.int64) & 1
        return int((self.constant + self.linear @ v + v @ self.quad @ v) & 1)

    def to_anf(self) -> AnfPoly:
        terms = []
        if self.constant:
            terms.append(0)
        terms += [1 << int(i) for i in np.flatnonzero(self.linear)]
        a, b = np.nonzero(self.quad)
        terms += [monomial((int(x), int(y))) for x, y in zip(a, b)]
        return AnfPoly.from_terms(terms, self.n)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, QuadraticPoly)
            and (self.l, self.w, self.constant) == (other.l, other.w, other.constant)
            and np.array_equal(self.linear, other.linear)
            and np.array_equal(self.quad, other.quad)
        )


@dataclass(eq=False)
class RmqInstance:
    """``m`` quadratics stacked into arrays: ``const (m,)``, ``lin (m,n)``, ``quad (m,n,n)``."""

    l: int
    w: int
    const: np.ndarray
    lin: np.ndarray
    quad: np.ndarray
    planted: RegularVector | None = None
    seed: int = 0
    q: int = 2

    def __post_init__(self):
        _check_geometry(self.l, self.w)
        n = self.n
        self.const = np.asarray(self.const, dtype=np.uint8).reshape(-1)
        m = self.const.shape[0]
        self.lin = np.asarray(self.lin, dtype=np.uint8).reshape(m, n)
        self.quad = np.asarray(self.quad, dtype=np.uint8).reshape(m, n, n)

    @property
    def n(self) -> int:
        return self.l * self.w

    @property
    def m(self) -> int:
        return self.const.shape[0]

    @property
    def mu(self) -> float:
        return self.m / self.n

    @property
    def polys(self) -> list[QuadraticPoly]:
        return [
            QuadraticPoly(self.l, self.w, int(self.const[k]), self.lin[k], self.quad[k])
            for k in range(self.m)
        ]

    def anf_polys(self) -> list[AnfPoly]:
        return [p.to_anf() for p in self.polys]

    @classmethod
    def from_polys(cls, polys: Sequence[QuadraticPoly], l: int, w: int, **kw) -> "RmqInstance":
        n = l * w
        if not polys:
            return cls(l, w, np.zeros(0), np.zeros((0, n)), np.zeros((0, n, n)), **kw)
        return cls(
            l,
            w,
            np.array([p.constant for p in polys]),
            np.stack([p.linear for p in polys]),
            np.stack([p.quad for p in polys]),
            **kw,
        )

    def with_polys(self, extra_const, extra_lin=None, extra_quad=None) -> "RmqInstance":
        """Copy with additional equations appended (planted solution dropped)."""
        c = np.atleast_1d(np.asarray(extra_const, dtype=np.uint8))
        k, n = c.shape[0], self.n
        el = np.zeros((k, n), np.uint8) if extra_lin is None else extra_lin
        eq = np.zeros((k, n, n), np.uint8) if extra_quad is None else extra_quad
        return RmqInstance(
            self.l,
            self.w,
            np.concatenate([self.const, c]),
            np.concatenate([self.lin, el]),
            np.concatenate([self.quad, eq]),
            None,
            self.seed,
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RmqInstance)
            and (self.q, self.l, self.w, self.m, self.seed, self.planted)
            == (other.q, other.l, other.w, other.m, other.seed, other.planted)
            and np.array_equal(self.const, other.const)
            and np.array_equal(self.lin, other.lin)
            and np.array_equal(self.quad, other.quad)
        )


@dataclass
class PolySystem:
    """A list of ANF polynomials sharing ``nvars`` with an origin label per polynomial."""

    nvars: int
    polys: list = field(default_factory=list)
    labels: list = field(default_factory=list)

    LABELS = ("init", "field-eq", "quad-constraint", "linear-constraint", "guess")

    def add(self, p: AnfPoly, label: str) -> None:
        if p.nvars != self.nvars:
            raise DimensionError(f"polynomial has {p.nvars} variables, system has {self.nvars}")
        if label not in self.LABELS:
            raise ParameterError(f"unknown label {label!r}")
        self.polys.append(p)
        self.labels.append(label)

    def count(self, label: str) -> int:
        return sum(1 for x in self.labels if x == label)

    def by_label(self, label: str) -> list[AnfPoly]:
        return [p for p, t in zip(self.polys, self.labels) if t == label]

    def __len__(self) -> int:
        return len(self.polys)


# --- generation and evaluation -------------------------------------------------


def _random_part(rng: np.random.Generator, l: int, w: int, m: int):
    n = l * w
    lin = rng.integers(0, 2, size=(m, n), dtype=np.uint8)
    a, b = cross_pairs(l, w)
    cross = rng.integers(0, 2, size=(m, a.size), dtype=np.uint8)
    quad = np.zeros((m, n, n), dtype=np.uint8)
    quad[:, a, b] = cross
    return lin, quad


def plant_instance(l: int, w: int, m: int, seed: int) -> RmqInstance:
    """Random quadratics with constants chosen so a random regular vector is a root."""
    _check_geometry(l, w)
    if m < 1:
        raise ParameterError(f"need m >= 1, got {m}")
    rng = rng_for(seed)
    v = RegularVector(l, w, tuple(int(p) + 1 for p in rng.integers(0, l, size=w)))
    lin, quad = _random_part(rng, l, w, m)
    inst = RmqInstance(l, w, np.zeros(m, np.uint8), lin, quad, v, seed)
    inst.const = evaluate_instance(inst, v.to_bits())
    return inst


def evaluate_instance(inst: RmqInstance, v) -> np.ndarray:
    """Residual vector ``(P_1(v), ..., P_m(v))``."""
    v = np.asarray(v, dtype=np.int64) & 1
    if v.shape != (inst.n,):
        raise DimensionError(f"point has shape {v.shape}, expected ({inst.n},)")
    quad = np.einsum("kij,i,j->k", inst.quad.astype(np.int64), v, v)
    return ((inst.const + inst.lin.astype(np.int64) @ v + quad) & 1).astype(np.uint8)


def evaluate_regular(inst: RmqInstance, positions: np.ndarray) -> np.ndarray:
    """Residuals at many regular vectors given as 0-based positions ``(N, w)``.

    Returns an ``(N, m)`` uint8 array.  Only the w support coordinates are
    touched, so this is much cheaper than generic evaluation.
    """
    positions = np.asarray(positions, dtype=np.int64)
    l, w = inst.l, inst.w
    idx = positions + np.arange(w) * l
    acc = np.broadcast_to(inst.const, (idx.shape[0], inst.m)).astype(np.uint8).copy()
    lin_t = inst.lin.T
    for b in range(w):
        acc ^= lin_t[idx[:, b]]
    qt = inst.quad.transpose(1, 2, 0)
    for b1, b2 in combinations(range(w), 2):
        acc ^= qt[idx[:, b1], idx[:, b2]]
    return acc


def brute_force_solve(inst: RmqInstance, limit: int = BRUTE_FORCE_LIMIT, chunk: int = 1 << 15):
    """All regular roots, in lexicographic order of their position tuples."""
    l, w = inst.l, inst.w
    total = l**w
    if total > limit:
        raise SizeError(f"{total} regular vectors exceed the brute-force limit {limit}")
    sols = []
    radix = l ** np.arange(w - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        codes = np.arange(start, min(total, start + chunk), dtype=np.int64)
        pos = (codes[:, None] // radix) % l
        if inst.m == 0:
            hits = pos
        else:
            res = evaluate_regular(inst, pos)
            hits = pos[~res.any(axis=1)]
        sols.extend(RegularVector(l, w, tuple(int(p) + 1 for p in row)) for row in hits)
    return sols


# --- MQ -> RMQ -----------------------------------------------------------------


@dataclass
class Reduction:
    instance: RmqInstance
    forward: Callable  # MQ solution bits -> RegularVector
    backward: Callable  # RegularVector -> MQ solution bits


def mq_to_rmq_reduction(mq: PolySystem, l: int) -> Reduction:
    """Embed an MQ system in n variables into an RMQ system with n blocks of length l.

    Variable ``x_i`` becomes the first coordinate of block ``i``.  An MQ root
    ``v`` maps to the regular vector whose block ``i`` is ``(v_i, v_i + 1, 0, ...)``.
    """
    n = mq.nvars
    _check_geometry(l, n)
    N = n * l
    const, lin, quad = [], [], []
    for p in mq.polys:
        if p.degree > 2:
            raise DegreeError(f"polynomial of degree {p.degree} in an MQ system")
        c = 0
        li = np.zeros(N, np.uint8)
        qu = np.zeros((N, N), np.uint8)
        for t in p.terms:
            vs = [i for i in range(n) if t >> i & 1]
            if not vs:
                c ^= 1
            elif len(vs) == 1:
                li[vs[0] * l] ^= 1
            else:
                qu[vs[0] * l, vs[1] * l] ^= 1
        const.append(c)
        lin.append(li)
        quad.append(qu)
    m = len(const)
    inst = RmqInstance(
        l,
        n,
        np.array(const, np.uint8),
        np.array(lin, np.uint8).reshape(m, N),
        np.array(quad, np.uint8).reshape(m, N, N),
    )

    def forward(v) -> RegularVector:
        v = np.asarray(v, dtype=np.uint8) & 1
        if v.shape != (n,):
            raise DimensionError(f"expected {n} bits")
        return RegularVector(l, n, tuple(1 if b else 2 for b in v))

    def backward(rv: RegularVector) -> np.ndarray:
        return (np.array(rv.positions) == 1).astype(np.uint8)

    return Reduction(inst, forward, backward)


# --- text format ---------------------------------------------------------------


def _bits_to_hex(bits: np.ndarray) -> str:
    if bits.size == 0:
        return ""
    return np.packbits(bits.astype(np.uint8), bitorder="little").tobytes().hex()


def _hex_to_bits(text: str, count: int) -> np.ndarray:
    if count == 0:
        return np.zeros(0, np.uint8)
    raw = np.frombuffer(bytes.fromhex(text.strip()), dtype=np.uint8)
    bits = np.unpackbits(raw, bitorder="little")
    if bits.size < count:
        raise DimensionError(f"hex field has {bits.size} bits, need {count}")
    return bits[:count].copy()


def render_instance(inst: RmqInstance) -> str:
    """Text form: header, optional planted line, one ``c | linear | cross`` line per equation.

    Bit strings are packed least-significant bit first into bytes and written
    as lowercase hex.  Cross bits follow block pairs ``i1 < i2`` and, within a
    pair, positions ``(j1, j2)`` row-major.
    """
    lines = [f"RMQ {inst.q} {inst.l} {inst.w} {inst.m} {inst.seed}"]
    if inst.planted is not None:
        lines.append("planted " + " ".join(str(p) for p in inst.planted.positions))
    a, b = cross_pairs(inst.l, inst.w)
    for k in range(inst.m):
        lines.append(
            f"{int(inst.const[k])} | {_bits_to_hex(inst.lin[k])} | {_bits_to_hex(inst.quad[k][a, b])}"
        )
    return "\n".join(lines) + "\n"


def parse_instance(text: str) -> RmqInstance:
    rows = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not rows:
        raise ParameterError("empty instance text")
    head = rows[0].split()
    if len(head) != 6 or head[0] != "RMQ":
        raise ParameterError(f"bad header line: {rows[0]!r}")
    q, l, w, m, seed = (int(x) for x in head[1:])
    if q != 2:
        raise ParameterError("only q = 2 instances can be parsed")
    _check_geometry(l, w)
    planted = None
    body = rows[1:]
    if body and body[0].startswith("planted"):
        planted = RegularVector(l, w, tuple(int(x) for x in body[0].split()[1:]))
        body = body[1:]
    if len(body) != m:
        raise ParameterError(f"header announces {m} equations, found {len(body)}")
    n = l * w
    a, b = cross_pairs(l, w)
    const = np.zeros(m, np.uint8)
    lin = np.zeros((m, n), np.uint8)
    quad = np.zeros((m, n, n), np.uint8)
    for k, row in enumerate(body):
        parts = [p.strip() for p in row.split("|")]
        if len(parts) != 3:
            raise ParameterError(f"equation line {k} needs three fields")
        const[k] = int(parts[0]) & 1
        lin[k] = _hex_to_bits(parts[1], n)
        quad[k][a, b] = _hex_to_bits(parts[2], a.size)
    return RmqInstance(l, w, const, lin, quad, planted, seed, q)
