"""Asymptotic cost exponents for regular-MQ solvers.

Every estimate is an exponent ``tau`` such that the cost is ``2^(tau*n)`` up
to polynomial factors, with ``n = l*w``.  Groebner-basis estimates follow the
saddle-point recipe: the relative degree of regularity ``dbar`` is the
critical value of ``phi(z) = z f'(z)`` where ``f`` is the log of the per-variable
Hilbert series, and the matrix has about ``C(free*n, dbar*n)`` columns.
Column counts use the variable count left after eliminating one coordinate
per block.

Polynomial coefficients are kept as exact rationals; roots are isolated with
Sturm sequences and refined by bisection.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import EstimatorError, ParameterError

log2 = math.log2

INNER_TOL = 1e-14


# --- entropy -------------------------------------------------------------------


def entropy(p: float) -> float:
    """Binary entropy ``H(p)`` in bits."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"entropy argument {p} outside [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * log2(p) - (1 - p) * log2(1 - p)


def entropy_star(p: float) -> float:
    """``H(p)`` below one half, 1 from one half on."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"entropy argument {p} outside [0, 1]")
    return 1.0 if p >= 0.5 else entropy(p)


def _hstar(p: float) -> float:
    # tolerant version for optimiser internals, where p may overshoot 1 by rounding
    if p <= 0.0:
        return 0.0
    return 1.0 if p >= 0.5 else -p * log2(p) - (1 - p) * log2(1 - p)


def _hstar_vec(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 1e-300, 0.5)
    h = -p * np.log2(p) - (1 - p) * np.log2(1 - p)
    return np.where(p >= 0.5, 1.0, h)


# --- exact polynomials -----------------------------------------------------------


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class RealPoly:
    """Univariate polynomial with rational coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        c = [_frac(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(c)

    @classmethod
    def monomial(cls, k: int, c=1) -> "RealPoly":
        return cls([0] * k + [c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RealPoly):
            other = RealPoly([other])
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"RealPoly({[str(c) for c in self.coeffs]})"

    def _coerce(self, other) -> "RealPoly":
        return other if isinstance(other, RealPoly) else RealPoly([other])

    def __add__(self, other):
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return RealPoly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return RealPoly(-x for x in self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if self.is_zero() or other.is_zero():
            return RealPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            if x:
                for j, y in enumerate(other.coeffs):
                    out[i + j] += x * y
        return RealPoly(out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        out = RealPoly([1])
        for _ in range(e):
            out = out * self
        return out

    def __call__(self, x):
        acc = Fraction(0) if isinstance(x, Fraction) else 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + (c if isinstance(x, Fraction) else float(c))
        return acc

    def derivative(self) -> "RealPoly":
        return RealPoly(i * c for i, c in enumerate(self.coeffs) if i)

    def divmod(self, other: "RealPoly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.coeffs)
        q = [Fraction(0)] * max(0, len(r) - len(other.coeffs) + 1)
        lc = other.lc
        for k in range(len(q) - 1, -1, -1):
            c = r[k + other.degree] / lc
            q[k] = c
            if c:
                for j, y in enumerate(other.coeffs):
                    r[k + j] -= c * y
        return RealPoly(q), RealPoly(r[: other.degree] if other.degree > 0 else [])

    def monic(self) -> "RealPoly":
        return RealPoly(c / self.lc for c in self.coeffs)

    def as_floats(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs])


def poly_gcd(a: RealPoly, b: RealPoly) -> RealPoly:
    while not b.is_zero():
        a, b = b, a.divmod(b)[1]
        if not b.is_zero():
            b = b.monic()
    return a.monic() if not a.is_zero() else a


def sturm_sequence(p: RealPoly) -> list[RealPoly]:
    # remainders are rescaled by positive constants, which keeps sign counts intact
    seq = [p, p.derivative()]
    while seq[-1].degree > 0:
        r = -seq[-2].divmod(seq[-1])[1]
        if r.is_zero():
            break
        seq.append(RealPoly(c / abs(r.lc) for c in r.coeffs))
    return seq


def _sign_changes(seq: list[RealPoly], x: Fraction) -> int:
    prev = 0
    n = 0
    for p in seq:
        v = p(x)
        if v == 0:
            continue
        s = 1 if v > 0 else -1
        if prev and s != prev:
            n += 1
        prev = s
    return n


def smallest_positive_root(p: RealPoly, tol: float = 1e-9) -> float | None:
    """Smallest real root in ``(0, inf)`` to within ``tol``, or ``None``.

    Roots are counted with a Sturm sequence of the squarefree part; once an
    interval holds exactly one root, plain sign bisection finishes the job.
    """
    if p.is_zero():
        raise ParameterError("the zero polynomial has no isolated roots")
    c = list(p.coeffs)
    while c and c[0] == 0:
        c.pop(0)
    p = RealPoly(c)
    if p.degree < 1:
        return None
    g = poly_gcd(p, p.derivative())
    sq = p.divmod(g)[0] if g.degree > 0 else p
    seq = sturm_sequence(sq)
    bound = 1 + max(abs(x / sq.lc) for x in sq.coeffs[:-1])
    lo, hi = Fraction(0), Fraction(bound)
    v_lo = _sign_changes(seq, lo)
    if v_lo - _sign_changes(seq, hi) == 0:
        return None
    tol_f = Fraction(tol)
    # shrink (lo, hi] until it holds the smallest root alone
    while True:
        v_hi = _sign_changes(seq, hi)
        if v_lo - v_hi == 1 or hi - lo <= tol_f:
            break
        mid = (lo + hi) / 2
        if v_lo - _sign_changes(seq, mid) >= 1:
            hi = mid
        else:
            lo, v_lo = mid, _sign_changes(seq, mid)
    s_lo = sq(lo)
    while hi - lo > tol_f:
        mid = (lo + hi) / 2
        v = sq(mid)
        if v == 0:
            return float(mid)
        if (v > 0) == (s_lo > 0):
            lo, s_lo = mid, v
        else:
            hi = mid
    return float((lo + hi) / 2)


def _float_smallest_positive_root(coeffs_low_first: np.ndarray) -> float | None:
    """Fast path for optimiser loops: companion roots plus Newton polishing."""
    c = np.trim_zeros(np.asarray(coeffs_low_first, dtype=float), "b")
    if c.size < 2:
        return None
    roots = np.roots(c[::-1])
    scale = max(1.0, float(np.max(np.abs(roots)))) if roots.size else 1.0
    cand = sorted(r.real for r in roots if abs(r.imag) <= 1e-7 * scale and r.real > 1e-15)
    if not cand:
        return None
    x = cand[0]
    dc = c[1:] * np.arange(1, c.size)
    for _ in range(4):
        f = np.polynomial.polynomial.polyval(x, c)
        d = np.polynomial.polynomial.polyval(x, dc)
        if d == 0:
            break
        x -= f / d
    return float(x)


# --- resultants ------------------------------------------------------------------


def _bareiss_det(rows: list[list[int]]) -> int:
    a = [r[:] for r in rows]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[-1][-1]


def sylvester_determinant(f: Sequence[Fraction], g: Sequence[Fraction]) -> Fraction:
    """Resultant of two coefficient lists (lowest degree first, formal degrees kept)."""
    n, m = len(f) - 1, len(g) - 1
    size = n + m
    rows: list[list[Fraction]] = []
    for i in range(m):
        rows.append([Fraction(0)] * i + list(reversed(f)) + [Fraction(0)] * (size - n - 1 - i))
    for i in range(n):
        rows.append([Fraction(0)] * i + list(reversed(g)) + [Fraction(0)] * (size - m - 1 - i))
    scale = Fraction(1)
    irows = []
    for r in rows:
        den = math.lcm(*(x.denominator for x in r))
        scale *= den
        irows.append([int(x * den) for x in r])
    return Fraction(_bareiss_det(irows)) / scale


def _interpolate(xs: Sequence[Fraction], ys: Sequence[Fraction]) -> RealPoly:
    out = RealPoly()
    for i, (xi, yi) in enumerate(zip(xs, ys)):
        if yi == 0:
            continue
        basis = RealPoly([1])
        den = Fraction(1)
        for j, xj in enumerate(xs):
            if j != i:
                basis = basis * RealPoly([-xj, 1])
                den *= xi - xj
        out = out + basis * (yi / den)
    return out


@dataclass(frozen=True)
class SaddleTerm:
    """One summand ``c * N(z)/D(z)`` of ``z f'(z)``."""

    c: Fraction
    num: RealPoly
    den: RealPoly


def saddle_numerator(terms: Sequence[SaddleTerm]) -> tuple[RealPoly, RealPoly]:
    """``(g0, g1)`` with ``g(z) = g0(z) - delta*g1(z)``: ``phi(z) - delta`` times all denominators."""
    terms = [t for t in terms if t.c != 0]
    dens = []
    for t in terms:
        if t.den not in dens:
            dens.append(t.den)
    full = RealPoly([1])
    for d in dens:
        full = full * d
    g0 = RealPoly()
    for t in terms:
        rest = RealPoly([1])
        for d in dens:
            if d != t.den:
                rest = rest * d
        g0 = g0 + t.num * rest * t.c
    return g0, full


def saddle_resultant(terms: Sequence[SaddleTerm]) -> RealPoly:
    """``Res_z(g, g')`` as a polynomial in ``delta``, by evaluation and interpolation."""
    g0, g1 = saddle_numerator(terms)
    n = max(g0.degree, g1.degree)
    if n < 1:
        raise EstimatorError("degenerate saddle equation")
    pts = [Fraction(k) for k in range(2 * n)]
    vals = []
    for dl in pts:
        g = g0 - g1 * dl
        f = list(g.coeffs) + [Fraction(0)] * (n + 1 - len(g.coeffs))
        df = [i * c for i, c in enumerate(f)][1:]
        vals.append(sylvester_determinant(f, df))
    res = _interpolate(pts, vals)
    if res.is_zero():
        raise EstimatorError("resultant vanishes identically")
    return res


def residual(p: RealPoly, x: float) -> float:
    """``|p(x)|`` relative to the size of its terms."""
    c = p.as_floats()
    terms = c * x ** np.arange(c.size)
    return float(abs(terms.sum()) / max(np.abs(terms).max(), 1e-300))


# --- reports -------------------------------------------------------------------

REPORT_FIELDS = ("method", "l", "q", "omega", "mu", "gamma", "l_prime", "tuple",
                 "delta_bar", "tau", "tau_rel")


def brute_force_tau(l: int, q: int = 2) -> float:
    """Exhaustive search over regular vectors: ``log2((q-1)l)/l``."""
    if l < 2 or q < 2:
        raise ParameterError("need l >= 2 and q >= 2")
    return log2((q - 1) * l) / l


@dataclass
class ComplexityReport:
    method: str
    l: int
    tau: float
    q: int = 2
    omega: float = 2.0
    mu: float | None = None
    gamma: float | None = None
    l_prime: int | None = None
    gammas: tuple | None = None  # per free-coordinate count 1..l
    split: int | None = None
    delta_bar: float | None = None
    eta: float | None = None
    D: int | None = None
    beats_brute_force: bool | None = None
    heuristic: bool = False
    notes: list = field(default_factory=list)

    @property
    def tau_rel(self) -> float:
        return self.tau / brute_force_tau(self.l, self.q)

    def __post_init__(self):
        if self.tau < -1e-12:
            raise EstimatorError(f"negative exponent {self.tau}")

    def csv_row(self) -> dict:
        def fmt(x, nd=6):
            if x is None:
                return ""
            return f"{x:.{nd}g}" if isinstance(x, float) else str(x)

        tup = ""
        if self.gammas is not None:
            tup = ";".join(str(Fraction(g).limit_denominator(self.split or 10**6)) for g in self.gammas)
        return {
            "method": self.method,
            "l": str(self.l),
            "q": str(self.q),
            "omega": fmt(float(self.omega)),
            "mu": fmt(self.mu),
            "gamma": fmt(self.gamma),
            "l_prime": fmt(self.l_prime),
            "tuple": tup,
            "delta_bar": fmt(self.delta_bar),
            "tau": fmt(self.tau),
            "tau_rel": fmt(self.tau_rel),
        }


def _check_dbar(dbar: float | None, l: int, what: str, cap: float | None = None) -> float:
    # a regular monomial has degree at most w = n/l; the compact ring allows s*w
    if dbar is None:
        raise EstimatorError(f"{what}: no positive root")
    cap = 1 / l if cap is None else cap
    if not 0 < dbar <= cap + 1e-12:
        raise EstimatorError(f"{what}: relative degree {dbar} outside (0, {cap:.6g}]")
    return dbar


def default_mu(l: int) -> float:
    return log2(l) / l


def _mu_frac(mu: float) -> Fraction:
    return Fraction(mu).limit_denominator(10**15)


# --- plain Groebner basis over F2 -------------------------------------------------


def quartic_plain_f2(l: int, mu) -> RealPoly:
    """Quartic in delta whose smallest positive root is the plain relative degree."""
    if l < 2:
        raise ParameterError("l must be at least 2")
    L = Fraction(l)
    mu = _frac(mu)
    k = (L - 1) ** 2
    r4 = (k + 1) ** 2
    r3 = 2 * mu * (k + 1) * (k + 3) - 4 * k * (k + 1) / L
    r2 = 4 * mu**2 * (2 * k + 3) - 2 * mu * k * (3 * k - 1) / L + 2 * k * (3 * k + 1) / L**2
    r1 = 8 * mu**3 + 20 * mu**2 * k / L + 2 * mu * k * (3 * k - 5) / L**2 - 4 * k**2 / L**3
    r0 = -(mu**2) * k / L**2 - 2 * mu * k**2 / L**3 + k**2 / L**4
    return RealPoly([r0, r1, r2, r3, r4])


def _cubic_minus_disc_quarter(p3, p2, p1, p0):
    disc = (18 * p3 * p2 * p1 * p0 - 4 * p2**3 * p0 + p2**2 * p1**2
            - 4 * p3 * p1**3 - 27 * p3**2 * p0**2)
    return disc * Fraction(-1, 4)


def saddle_quartic(a, b, mu) -> RealPoly:
    """Double-root condition for ``a z/(1+b z) - 2 mu z^2/(1+z^2) = delta``.

    The saddle cubic is ``p3 z^3 + p2 z^2 + p1 z + p0`` with ``p3 = b(2mu+d) - a``,
    ``p2 = 2mu + d``, ``p1 = b d - a`` and ``p0 = d``; the quartic is minus a
    quarter of its discriminant.
    """
    a, b, mu = _frac(a), _frac(b), _frac(mu)
    d = RealPoly([0, 1])
    p3 = (d + 2 * mu) * b - a
    p2 = d + 2 * mu
    p1 = d * b - a
    return _cubic_minus_disc_quarter(p3, p2, p1, d)


def _saddle_quartic_float(a: float, b: float, mu: float) -> np.ndarray:
    P = np.polynomial.polynomial
    p3 = np.array([2 * mu * b - a, b])
    p2 = np.array([2 * mu, 1.0])
    p1 = np.array([-a, b])
    p0 = np.array([0.0, 1.0])
    m = P.polymul
    disc = 18 * m(m(p3, p2), m(p1, p0))
    disc = P.polysub(disc, 4 * m(P.polypow(p2, 3), p0))
    disc = P.polyadd(disc, m(P.polypow(p2, 2), P.polypow(p1, 2)))
    disc = P.polysub(disc, 4 * m(p3, P.polypow(p1, 3)))
    disc = P.polysub(disc, 27 * m(P.polypow(p3, 2), P.polypow(p0, 2)))
    return -disc / 4


def _window_dbar(a: float, b: float, mu: float, exact: bool = False) -> float | None:
    if exact:
        return smallest_positive_root(saddle_quartic(_mu_frac(a), _mu_frac(b), _mu_frac(mu)), INNER_TOL)
    return _float_smallest_positive_root(_saddle_quartic_float(a, b, mu))


def _full_objective(l: int, gamma: float, omega: float, mu: float, exact: bool = False):
    if gamma >= 1.0:
        return log2(l) / l, None
    a = (1 - gamma) * (l - 1) / l
    dbar = _window_dbar(a, l - 1, mu, exact)
    if dbar is None:
        raise EstimatorError(f"full window l={l} gamma={gamma}: no positive root")
    return gamma * log2(l) / l + omega * a * _hstar(dbar / a), dbar


def _partial_objective(l: int, lp: int, omega: float, mu: float, exact: bool = False):
    if lp == 1:
        return log2(l) / l, None
    a = (lp - 1) / l
    dbar = _window_dbar(a, lp - 1, mu, exact)
    if dbar is None:
        raise EstimatorError(f"partial window l={l} l'={lp}: no positive root")
    return log2(l / lp) / l + omega * a * _hstar(dbar / a), dbar


def tau_plain_gb_f2(l: int, omega: float = 2.0, mu: float | None = None) -> ComplexityReport:
    if l < 2:
        raise ParameterError("l must be at least 2")
    mu = default_mu(l) if mu is None else mu
    q = quartic_plain_f2(l, _mu_frac(mu))
    dbar = _check_dbar(smallest_positive_root(q, INNER_TOL), l, "plain")
    a = (l - 1) / l
    tau = omega * a * _hstar(dbar / a)
    return ComplexityReport("plain", l, tau, omega=omega, mu=mu, delta_bar=dbar)


# --- plain Groebner basis over Fq -------------------------------------------------


def quartic_plain_fq(l: int, mu) -> RealPoly:
    """Discriminant of the non-binary saddle cubic, expanded in delta."""
    if l < 2:
        raise ParameterError("l must be at least 2")
    L, u = Fraction(l), _frac(mu)
    r4 = 4 * L**2 * (L - 2) ** 2
    r3 = -4 * (L - 2) * (2 * L**3 * u - 4 * L**2 * u + 3 * L**2 - 4 * L * u - 8 * L + 8)
    r2 = (24 * L**3 * u - 32 * L**2 * u**2 - 112 * L**2 * u + 13 * L**2 + 64 * L * u**2
          + 232 * L * u - 48 * L + 16 * u**2 - 192 * u + 48)
    r1 = -2 * (12 * L**2 * u + 40 * L * u**2 - 46 * L * u + 3 * L + 16 * u**3 - 64 * u**2 + 48 * u - 6)
    r0 = 8 * L * u + 4 * u**2 - 12 * u + 1
    return RealPoly([r0, r1, r2, r3, r4])


def tau_plain_gb_fq(l: int, q: int, omega: float = 2.0, mu: float | None = None) -> ComplexityReport:
    if q < 3:
        raise ParameterError("the non-binary estimate needs q >= 3")
    if l < 2:
        raise ParameterError("l must be at least 2")
    mu = math.log((q - 1) * l, q) / l if mu is None else mu
    dbar = smallest_positive_root(quartic_plain_fq(l, _mu_frac(mu)), INNER_TOL)
    if dbar is None:
        raise EstimatorError(f"plain Fq l={l} q={q}: no positive root")
    tau = omega * (1 + dbar) * entropy(dbar / (1 + dbar))
    rep = ComplexityReport("plain-fq", l, tau, q=q, omega=omega, mu=mu, delta_bar=dbar)
    rep.beats_brute_force = tau < brute_force_tau(l, q)
    return rep


# --- hybrid strategies ------------------------------------------------------------


def _golden_refine(f: Callable[[float], float], grid: np.ndarray, vals: np.ndarray,
                   lo: float, hi: float) -> tuple[float, float]:
    i = int(np.argmin(vals))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, len(grid) - 1)]
    best_x, best_v = float(grid[i]), float(vals[i])
    if b > a:
        r = minimize_scalar(f, bounds=(max(a, lo), min(b, hi)), method="bounded",
                            options={"xatol": 1e-10})
        if r.fun < best_v:
            best_x, best_v = float(r.x), float(r.fun)
    return best_x, best_v


def tau_hybrid_full(l: int, omega: float = 2.0, mu: float | None = None,
                    grid_step: float = 1e-4) -> ComplexityReport:
    """Guess the nonzero position of a fraction ``gamma`` of the blocks."""
    if l < 2:
        raise ParameterError("l must be at least 2")
    mu = default_mu(l) if mu is None else mu
    grid = np.arange(0.0, 1.0 + grid_step / 2, grid_step)
    grid[-1] = 1.0
    f = lambda g: _full_objective(l, g, omega, mu)[0]
    vals = np.array([f(g) for g in grid])
    g_best, _ = _golden_refine(f, grid, vals, 0.0, 1.0)
    tau, dbar = _full_objective(l, g_best, omega, mu, exact=True)
    if dbar is not None:
        _check_dbar(dbar, l, "full window")
    return ComplexityReport("full", l, tau, omega=omega, mu=mu, gamma=g_best, delta_bar=dbar,
                            gammas=_full_tuple(l, g_best))


def _full_tuple(l: int, gamma: float) -> tuple:
    t = [0.0] * l
    t[0] += gamma
    t[l - 1] += 1 - gamma
    return tuple(t)


def tau_hybrid_partial(l: int, omega: float = 2.0, mu: float | None = None) -> ComplexityReport:
    """Guess the same number of zeros in every block, leaving ``l'`` free coordinates."""
    if l < 2:
        raise ParameterError("l must be at least 2")
    mu = default_mu(l) if mu is None else mu
    best = None
    for lp in range(1, l + 1):
        tau, dbar = _partial_objective(l, lp, omega, mu, exact=True)
        if best is None or tau < best[0] - 1e-15:
            best = (tau, dbar, lp)
    tau, dbar, lp = best
    if dbar is not None:
        _check_dbar(dbar, l, "partial window")
    gam = [0.0] * l
    gam[lp - 1] = 1.0
    return ComplexityReport("partial", l, tau, omega=omega, mu=mu, l_prime=lp, delta_bar=dbar,
                            gammas=tuple(gam))


# different windows: gammas[k] is the fraction of blocks left with k+1 free coordinates


def window_terms(l: int, gammas: Sequence, mu) -> list[SaddleTerm]:
    """Summands of ``z f'(z)`` for a mix of window lengths."""
    z = RealPoly([0, 1])
    terms = []
    for k, g in enumerate(gammas):
        lp = k + 1
        g = _mu_frac(g) if not isinstance(g, Fraction) else g
        if lp >= 2 and g:
            terms.append(SaddleTerm(g * (lp - 1) / l, z, RealPoly([1, lp - 1])))
    terms.append(SaddleTerm(-2 * _frac(mu), z * z, RealPoly([1, 0, 1])))
    return terms


def _critical_value(phi: Callable, dphi: Callable, zmin=1e-9, zmax=1e6) -> float | None:
    """Value of ``phi`` at its first local maximum on ``z > 0``."""
    zs = np.geomspace(zmin, zmax, 4001)
    d = dphi(zs)
    neg = np.flatnonzero(d < 0)
    if neg.size == 0 or neg[0] == 0:
        return None
    i = neg[0]
    z = brentq(dphi, zs[i - 1], zs[i], xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)
    return float(phi(z))


def _window_phi(l: int, gammas, mu):
    parts = [(float(g) * k / l, float(k)) for k, g in enumerate(gammas) if k >= 1 and g]

    def phi(z):
        return sum(c * z / (1 + b * z) for c, b in parts) - 2 * mu * z * z / (1 + z * z)

    def dphi(z):
        return sum(c / (1 + b * z) ** 2 for c, b in parts) - 4 * mu * z / (1 + z * z) ** 2

    return phi, dphi


def tau_for_tuple(l: int, gammas: Sequence, omega: float = 2.0, mu: float | None = None,
                  exact: bool = False) -> tuple[float, float | None]:
    """Exponent of the mixed-window hybrid for one tuple; returns ``(tau, dbar)``."""
    if len(gammas) != l:
        raise ParameterError(f"tuple needs {l} entries")
    if any(g < 0 for g in gammas) or abs(sum(float(g) for g in gammas) - 1) > 1e-9:
        raise ParameterError("tuple entries must be nonnegative and sum to 1")
    mu = default_mu(l) if mu is None else mu
    guess = sum(float(g) * log2(l / (k + 1)) for k, g in enumerate(gammas)) / l
    free = sum(float(g) * k for k, g in enumerate(gammas)) / l
    if free <= 0:
        return guess, None
    if exact:
        res = saddle_resultant(window_terms(l, gammas, _mu_frac(mu)))
        dbar = smallest_positive_root(res, INNER_TOL)
    else:
        dbar = _critical_value(*_window_phi(l, gammas, mu))
    if dbar is None:
        raise EstimatorError(f"tuple {tuple(gammas)}: no positive root")
    return guess + omega * free * _hstar(dbar / free), dbar


def _compositions(total: int, parts: int) -> np.ndarray:
    out = []
    for bars in combinations(range(total + parts - 1), parts - 1):
        prev = -1
        row = []
        for b in bars:
            row.append(b - prev - 1)
            prev = b
        row.append(total + parts - 2 - prev)
        out.append(row)
    return np.array(out, dtype=np.int64).reshape(-1, parts)


def _batch_tau(l: int, G: np.ndarray, omega: float, mu: float, chunk: int = 20000) -> np.ndarray:
    """Vectorised mixed-window exponents for the rows of ``G`` (fractions summing to 1)."""
    k = np.arange(l, dtype=float)  # free coordinates minus one
    zs = np.geomspace(1e-6, 1e4, 160)
    out = np.empty(G.shape[0])
    for s in range(0, G.shape[0], chunk):
        g = G[s:s + chunk]
        c = g * k / l
        guess = (g * np.log2(l / (k + 1))).sum(axis=1) / l
        free = c.sum(axis=1)

        def dphi_grid(z):  # z: (K,) shared by all rows
            zz = z[None, :, None]
            return (c[:, None, :] / (1 + k * zz) ** 2).sum(-1) - 4 * mu * z / (1 + z * z) ** 2

        def dphi(z):  # z: (B,) one point per row
            return (c / (1 + k * z[:, None]) ** 2).sum(-1) - 4 * mu * z / (1 + z * z) ** 2

        dv = dphi_grid(zs)
        neg = dv < 0
        first = np.where(neg.any(axis=1), neg.argmax(axis=1), zs.size - 1)
        first = np.maximum(first, 1)
        lo = zs[first - 1].copy()
        hi = zs[first].copy()
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            pos = dphi(mid) > 0
            lo = np.where(pos, mid, lo)
            hi = np.where(pos, hi, mid)
        z = 0.5 * (lo + hi)
        dbar = (c * z[:, None] / (1 + k * z[:, None])).sum(-1) - 2 * mu * z * z / (1 + z * z)
        ratio = np.divide(dbar, free, out=np.zeros_like(dbar), where=free > 0)
        tau = guess + omega * free * _hstar_vec(ratio)
        out[s:s + chunk] = np.where(free > 0, tau, guess)
    return out


EXHAUSTIVE_LIMIT = 2_000_000


def tau_hybrid_different(l: int, omega: float = 2.0, split: int | None = None,
                         mu: float | None = None) -> ComplexityReport:
    """Per-block guesses of different sizes; optimise the tuple of block fractions.

    All tuples on the ``1/split`` grid are scored when there are at most
    ``EXHAUSTIVE_LIMIT`` of them.  Beyond that a coarse grid is scored and
    the best points are improved by pairwise transfers at the fine grid; this
    search is a heuristic and the report says so.
    """
    if l < 2:
        raise ParameterError("l must be at least 2")
    if split is None:
        split = 200 if l <= 6 else 60
        if l > 6:
            warnings.warn(f"l={l}: tuple grid lowered to 1/{split}", stacklevel=2)
    if split < 1:
        raise ParameterError("split must be at least 1")
    mu = default_mu(l) if mu is None else mu
    heuristic = math.comb(split + l - 1, l - 1) > EXHAUSTIVE_LIMIT
    if not heuristic:
        comps = _compositions(split, l)
        taus = _batch_tau(l, comps / split, omega, mu)
        best = comps[int(np.argmin(taus))]
    else:
        best = _local_search(l, split, omega, mu)
    gam = tuple(Fraction(int(x), split) for x in best)
    tau, dbar = tau_for_tuple(l, gam, omega, mu, exact=True)
    check, _ = tau_for_tuple(l, gam, omega, mu)
    rep = ComplexityReport("different", l, tau, omega=omega, mu=mu, gammas=tuple(float(g) for g in gam),
                           split=split, delta_bar=dbar, heuristic=heuristic)
    if dbar is not None:
        _check_dbar(dbar, l, "different windows")
    if abs(check - tau) > 1e-8:
        rep.notes.append(f"resultant and critical-value routes differ by {abs(check - tau):.2e}")
    if heuristic:
        rep.notes.append("coarse grid plus local search; not exhaustive")
    return rep


def _local_search(l: int, split: int, omega: float, mu: float, coarse: int = 20, keep: int = 6):
    coarse = min(coarse, split)
    comps = _compositions(coarse, l)
    taus = _batch_tau(l, comps / coarse, omega, mu)
    # pure strategies are always worth a look
    seeds = [comps[i] * split // coarse for i in np.argsort(taus)[:keep]]
    seeds += [np.eye(l, dtype=np.int64)[j] * split for j in range(l)]
    best, best_tau = None, np.inf
    moves = [(i, j) for i in range(l) for j in range(l) if i != j]
    for x in seeds:
        x = x.copy()
        x[-1] += split - x.sum()
        cur = float(_batch_tau(l, x[None, :] / split, omega, mu)[0])
        step = max(1, split // coarse)
        while step >= 1:
            cand = []
            for i, j in moves:
                if x[i] >= step:
                    y = x.copy()
                    y[i] -= step
                    y[j] += step
                    cand.append(y)
            cand = np.array(cand)
            vals = _batch_tau(l, cand / split, omega, mu)
            k = int(np.argmin(vals))
            if vals[k] < cur - 1e-15:
                x, cur = cand[k], float(vals[k])
            else:
                step //= 2
        if cur < best_tau:
            best, best_tau = x, cur
    return best


# --- polynomial method -------------------------------------------------------------


def g_poly_method(p, l: int):
    """Exponent of evaluating the identifying polynomial on low-weight inputs."""
    if l < 2:
        raise ParameterError("l must be at least 2")
    arr = np.asarray(p, dtype=float)
    if np.any((arr < 0) | (arr > 1)):
        raise ParameterError("p must lie in [0, 1]")
    a = 2 * log2(l) - 1
    with np.errstate(divide="ignore", invalid="ignore"):
        one_m = 1 - arr
        x = np.divide(arr * a, one_m, out=np.zeros_like(arr), where=one_m > 0)
        first = (one_m * _entropy_vec(np.clip(x, 0, 1)) + arr * a * log2(l)) / l
        second = one_m * log2(l + 1) / l
        out = np.where(arr * a <= l * one_m / (l + 1), first, second)
    return float(out) if np.ndim(p) == 0 else out


def _entropy_vec(p: np.ndarray) -> np.ndarray:
    q = np.clip(p, 1e-300, 1 - 1e-16)
    h = -q * np.log2(q) - (1 - q) * np.log2(1 - q)
    return np.where((p <= 0) | (p >= 1), 0.0, h)


def _even_windows(l: int) -> range:
    return range(2, l + 1, 2)


def tau_poly_nonrecursive(l: int, grid: int = 20001) -> ComplexityReport:
    if l < 2:
        raise ParameterError("l must be at least 2")
    best = None
    for lp in _even_windows(l):
        gam = np.linspace(0, 1 / (2 * log2(lp)), grid)
        inner = np.maximum(g_poly_method(gam, lp) + gam * log2(lp) / lp, (1 - gam) * log2(lp) / lp)
        vals = log2(l / lp) / l + lp / l * inner
        i = int(np.argmin(vals))
        if best is None or vals[i] < best[0]:
            best = (float(vals[i]), lp, float(gam[i]))
    tau, lp, gamma = best
    return ComplexityReport("poly", l, tau, gamma=gamma, l_prime=lp)


def _first_crossing(h: Callable[[np.ndarray], np.ndarray], lo: float, hi: float, n: int = 200001):
    """Smallest ``x`` in ``[lo, hi]`` with ``h(x) > 0``, refined by bisection."""
    xs = np.linspace(lo, hi, n)
    v = h(xs)
    idx = np.flatnonzero(v > 0)
    if idx.size == 0:
        return hi
    i = idx[0]
    if i == 0:
        return lo
    a, b = xs[i - 1], xs[i]
    for _ in range(60):
        m = 0.5 * (a + b)
        if h(np.array([m]))[0] > 0:
            b = m
        else:
            a = m
    return float(b)


def tau_poly_bjorklund(l: int) -> ComplexityReport:
    """Recursive parity counting; the admissible ``gamma`` ends where the recursion stops paying."""
    if l < 2:
        raise ParameterError("l must be at least 2")
    best = None
    for lp in _even_windows(l):
        c = log2(lp) / lp
        gl = _first_crossing(lambda x: g_poly_method(x, lp) - (1 - x) ** 2 * c, 0.0, 1.0)
        tau = log2(l / lp) / l + (1 - gl) * log2(lp) / l
        if best is None or tau < best[0]:
            best = (tau, lp, gl)
    tau, lp, gl = best
    return ComplexityReport("bjorklund", l, tau, gamma=gl, l_prime=lp)


def tau_poly_dinur(l: int, grid: int = 4001) -> ComplexityReport:
    if l < 2:
        raise ParameterError("l must be at least 2")
    best = None
    for lp in _even_windows(l):
        c = log2(lp) / lp
        gh = _first_crossing(lambda x: g_poly_method(x, lp) - (1 - x) * c, 0.0, 1.0)
        xs = np.append(np.linspace(0, gh, grid), gh)
        tau = float(np.max(log2(l / lp) / l + lp / l * g_poly_method(xs, lp)))
        if best is None or tau < best[0]:
            best = (tau, lp, gh)
    tau, lp, gh = best
    return ComplexityReport("dinur", l, tau, gamma=gh, l_prime=lp, eta=0.0)


# --- compact (alternative) encoding ---------------------------------------------------


def _log2_exact(l: int) -> int:
    if l < 2 or l & (l - 1):
        raise ParameterError(f"l={l} is not a power of two")
    return l.bit_length() - 1


def alt_terms(A, sp: int, mu) -> list[SaddleTerm]:
    z = RealPoly([0, 1])
    zz = RealPoly.monomial(2 * sp)
    return [SaddleTerm(_frac(A), z, RealPoly([1, 1])),
            SaddleTerm(-2 * sp * _frac(mu), zz, RealPoly([1]) + zz)]


def _alt_dbar(A: float, sp: int, mu: float, exact: bool = False) -> float | None:
    if exact:
        res = saddle_resultant(alt_terms(_mu_frac(A), sp, _mu_frac(mu)))
        return smallest_positive_root(res, INNER_TOL)
    e = 2 * sp

    def phi(z):
        return A * z / (1 + z) - e * mu * z**e / (1 + z**e)

    def dphi(z):
        return A / (1 + z) ** 2 - e * e * mu * z ** (e - 1) / (1 + z**e) ** 2

    return _critical_value(phi, dphi)


def _alt_full_objective(l: int, gamma: float, omega: float, exact: bool = False):
    s = _log2_exact(l)
    if gamma >= 1.0:
        return s / l, None
    A = (1 - gamma) * s / l
    dbar = _alt_dbar(A, s, s / l, exact)
    if dbar is None:
        raise EstimatorError(f"compact full l={l} gamma={gamma}: no critical point")
    return gamma * s / l + omega * A * _hstar(dbar / A), dbar


def _alt_partial_objective(l: int, sp: int, omega: float, exact: bool = False):
    s = _log2_exact(l)
    if sp == 0:
        return s / l, None
    A = sp / l
    dbar = _alt_dbar(A, sp, s / l, exact)
    if dbar is None:
        raise EstimatorError(f"compact partial l={l} s'={sp}: no critical point")
    return (s - sp) / l + omega * A * _hstar(dbar / A), dbar


def _alt_report(method, l, tau, dbar, omega, **kw) -> ComplexityReport:
    if dbar is not None:
        _check_dbar(dbar, l, method, cap=_log2_exact(l) / l)
    return ComplexityReport(method, l, tau, omega=omega, mu=_log2_exact(l) / l, delta_bar=dbar, **kw)


def tau_alt_plain(l: int, omega: float = 2.0) -> ComplexityReport:
    tau, dbar = _alt_full_objective(l, 0.0, omega, exact=True)
    return _alt_report("plain-alt", l, tau, dbar, omega)


def tau_alt_full(l: int, omega: float = 2.0, grid_step: float = 1e-3) -> ComplexityReport:
    _log2_exact(l)
    grid = np.arange(0.0, 1.0 + grid_step / 2, grid_step)
    grid[-1] = 1.0
    f = lambda g: _alt_full_objective(l, g, omega)[0]
    vals = np.array([f(g) for g in grid])
    g_best, _ = _golden_refine(f, grid, vals, 0.0, 1.0)
    tau, dbar = _alt_full_objective(l, g_best, omega, exact=True)
    return _alt_report("full-alt", l, tau, dbar, omega, gamma=g_best)


def tau_alt_partial(l: int, omega: float = 2.0) -> ComplexityReport:
    s = _log2_exact(l)
    best = min((_alt_partial_objective(l, sp, omega, exact=True) + (sp,) for sp in range(s + 1)),
               key=lambda t: t[0])
    tau, dbar, sp = best
    return _alt_report("partial-alt", l, tau, dbar, omega, l_prime=1 << sp)


def tau_alt_dinur(l: int) -> float:
    s = _log2_exact(l)
    return s / l - 1 / (4 * l)


def tau_simple_estimate(l: int, omega: float = 2.0) -> ComplexityReport:
    """Closed form for two free coordinates per block, no root isolation."""
    if l < 4:
        raise ParameterError("the closed form needs l >= 4")
    mu = log2(l)
    dbar = simple_dbar(mu)
    tau = (log2(l / 2) + omega * entropy(dbar)) / l
    return ComplexityReport("simple", l, tau, omega=omega, mu=mu, l_prime=2, delta_bar=dbar / l)


def simple_dbar(mu: float) -> float:
    """Relative degree of a semi-regular quadratic F2 system with ``mu*n`` equations."""
    return -mu + 0.5 + 0.5 * math.sqrt(2 * mu * mu - 10 * mu - 1 + 2 * (mu + 2) * math.sqrt(mu * (mu + 2)))


# --- comparison tables --------------------------------------------------------------

STANDARD_METHODS = ("plain", "brute", "full", "partial", "different", "poly", "bjorklund", "dinur")
COMPACT_METHODS = ("plain", "brute", "hybrid", "plain-alt", "full-alt", "partial-alt", "dinur", "dinur-alt")


def estimate(method: str, l: int, omega: float = 2.0, q: int = 2, split: int | None = None) -> ComplexityReport:
    """Dispatch one estimate by method id."""
    if method == "brute":
        return ComplexityReport("brute", l, brute_force_tau(l, q), q=q, omega=omega)
    if method == "plain":
        return tau_plain_gb_f2(l, omega)
    if method == "plain-fq":
        return tau_plain_gb_fq(l, q, omega)
    if method == "full":
        return tau_hybrid_full(l, omega)
    if method == "partial":
        return tau_hybrid_partial(l, omega)
    if method == "different":
        return tau_hybrid_different(l, omega, split)
    if method == "hybrid":
        a, b = tau_hybrid_full(l, omega), tau_hybrid_partial(l, omega)
        r = a if a.tau <= b.tau else b
        r.method = "hybrid"
        return r
    if method == "poly":
        return tau_poly_nonrecursive(l)
    if method == "bjorklund":
        return tau_poly_bjorklund(l)
    if method == "dinur":
        return tau_poly_dinur(l)
    if method == "plain-alt":
        return tau_alt_plain(l, omega)
    if method == "full-alt":
        return tau_alt_full(l, omega)
    if method == "partial-alt":
        return tau_alt_partial(l, omega)
    if method == "dinur-alt":
        return ComplexityReport("dinur-alt", l, tau_alt_dinur(l), omega=omega)
    if method == "simple":
        return tau_simple_estimate(l, omega)
    raise ParameterError(f"unknown estimate method {method!r}")


@dataclass
class CompareRow:
    method: str
    l: int
    report: ComplexityReport | None
    error: str | None = None

    @property
    def tau(self) -> float | None:
        return None if self.report is None else self.report.tau

    @property
    def tau_rel(self) -> float | None:
        return None if self.report is None else self.report.tau_rel


def compare_all(ls: Sequence[int], omega: float = 2.0, methods: Sequence[str] = STANDARD_METHODS,
                max_different_l: int = 6) -> list[CompareRow]:
    """One row per ``(l, method)``; failures become empty rows with the error text."""
    rows = []
    for l in ls:
        for m in methods:
            if m == "different" and l > max_different_l:
                rows.append(CompareRow(m, l, None, f"skipped: l > {max_different_l}"))
                continue
            try:
                rows.append(CompareRow(m, l, estimate(m, l, omega)))
            except (ParameterError, EstimatorError) as exc:
                rows.append(CompareRow(m, l, None, str(exc)))
    return rows
