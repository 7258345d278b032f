"""Piecewise-linear homeomorphisms of [0, 1] with exact rational data.

A :class:`PLMap` is stored as its graph: the list of knots ``(x, y)`` from
``(0, 0)`` to ``(1, 1)`` at which the slope changes.  Composition is a right
action, as for prefix maps: ``evaluate(compose(f, g), x) == evaluate(g, evaluate(f, x))``.

Bieri-Strebel parameters ``(P, A)`` fix a multiplicative group of slopes
``P = <p1, ..., pk>`` and a breakpoint ring ``A = Z[1/m]``.  F itself is
``P = <2>``, ``A = Z[1/2]``; the Stein group F_{2,3} is ``<2, 3>`` over ``Z[1/6]``.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass
from fractions import Fraction

from .cantor import RationalPoint, interval_word, to_dyadic, word_value
from .velement import PrefixMap, X0, X1, is_order_preserving, random_element

F0, F1 = Fraction(0), Fraction(1)


class Infeasible(ValueError):
    """No map with the requested properties is produced for these parameters."""


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class PLMap:
    knots: tuple  # ((x, y), ...) including (0, 0) and (1, 1); no redundant knots

    def __post_init__(self):
        ks = self.knots
        if ks[0] != (F0, F0) or ks[-1] != (F1, F1):
            raise ValueError("endpoints must be fixed")
        for (x0, y0), (x1, y1) in zip(ks, ks[1:]):
            if not (x1 > x0 and y1 > y0):
                raise ValueError("map must be strictly increasing")
        object.__setattr__(self, "_xs", [x for x, _ in ks])
        object.__setattr__(self, "_ys", [y for _, y in ks])

    @classmethod
    def from_knots(cls, knots) -> "PLMap":
        pts = [(_frac(x), _frac(y)) for x, y in knots]
        if pts[0] != (F0, F0):
            pts.insert(0, (F0, F0))
        if pts[-1] != (F1, F1):
            pts.append((F1, F1))
        # drop knots where the slope does not change
        out = [pts[0]]
        for p in pts[1:]:
            if len(out) >= 2:
                (ax, ay), (bx, by) = out[-2], out[-1]
                if (by - ay) * (p[0] - bx) == (p[1] - by) * (bx - ax):
                    out[-1] = p
                    continue
            out.append(p)
        return cls(tuple(out))

    @classmethod
    def from_breakpoints(cls, breakpoints, slopes) -> "PLMap":
        bps = [_frac(b) for b in breakpoints]
        sls = [_frac(s) for s in slopes]
        if len(sls) != len(bps) + 1:
            raise ValueError("need one more slope than breakpoints")
        if any(s <= 0 for s in sls):
            raise ValueError("slopes must be positive")
        xs = [F0] + bps + [F1]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("breakpoints must increase strictly inside (0, 1)")
        ys = [F0]
        for (a, b), s in zip(zip(xs, xs[1:]), sls):
            ys.append(ys[-1] + s * (b - a))
        if ys[-1] != 1:
            raise ValueError(f"pieces end at {ys[-1]}, not at 1")
        return cls.from_knots(zip(xs, ys))

    @property
    def breakpoints(self) -> tuple:
        return tuple(self._xs[1:-1])

    @property
    def slopes(self) -> tuple:
        ks = self.knots
        return tuple((y1 - y0) / (x1 - x0) for (x0, y0), (x1, y1) in zip(ks, ks[1:]))

    def is_identity(self) -> bool:
        return len(self.knots) == 2

    def __call__(self, x) -> Fraction:
        return evaluate(self, x)

    def __mul__(self, other: "PLMap") -> "PLMap":
        return compose(self, other)

    # text format "bp: 1/2,3/4; sl: 1/2,1,2"
    def __str__(self) -> str:
        return f"bp: {','.join(map(str, self.breakpoints))}; sl: {','.join(map(str, self.slopes))}"

    def __repr__(self) -> str:
        return f"PLMap({str(self)!r})"

    @classmethod
    def parse(cls, text: str) -> "PLMap":
        m = re.match(r"^\s*bp:\s*([^;]*);\s*sl:\s*(.+?)\s*$", text)
        if not m:
            raise ValueError(f"bad PL map syntax {text!r}; expected 'bp: ...; sl: ...'")
        bps = [Fraction(s) for s in m.group(1).split(",") if s.strip()]
        sls = [Fraction(s) for s in m.group(2).split(",") if s.strip()]
        return cls.from_breakpoints(bps, sls)


IDENTITY = PLMap(((F0, F0), (F1, F1)))


def _interp(xs, ys, x):
    i = bisect.bisect_right(xs, x) - 1
    if i >= len(xs) - 1:
        return ys[-1]
    return ys[i] + (ys[i + 1] - ys[i]) * (x - xs[i]) / (xs[i + 1] - xs[i])


def evaluate(f: PLMap, x) -> Fraction:
    x = _frac(x)
    if not 0 <= x <= 1:
        raise ValueError(f"{x} is outside [0, 1]")
    return _interp(f._xs, f._ys, x)


def preimage(f: PLMap, y) -> Fraction:
    return _interp(f._ys, f._xs, _frac(y))


def invert(f: PLMap) -> PLMap:
    return PLMap(tuple((y, x) for x, y in f.knots))


def compose(f: PLMap, g: PLMap) -> PLMap:
    """First ``f``, then ``g``."""
    xs = sorted(set(f._xs) | {preimage(f, x) for x in g._xs})
    return PLMap.from_knots((x, evaluate(g, evaluate(f, x))) for x in xs)


def product(maps) -> PLMap:
    out = IDENTITY
    for m in maps:
        out = compose(out, m)
    return out


def power(f: PLMap, n: int) -> PLMap:
    base = f if n >= 0 else invert(f)
    return product([base] * abs(n))


def commutator(f: PLMap, g: PLMap) -> PLMap:
    """``f^-1 g^-1 f g``."""
    return product([invert(f), invert(g), f, g])


def conjugate(f: PLMap, g: PLMap) -> PLMap:
    """``g^-1 f g``."""
    return product([invert(g), f, g])


# -- Bieri-Strebel parameters ------------------------------------------------------


@dataclass(frozen=True)
class BSParams:
    slope_generators: tuple
    breakpoint_denominator: int

    def __post_init__(self):
        gens = tuple(_frac(p) for p in self.slope_generators)
        if any(p <= 1 for p in gens):
            raise ValueError("slope generators must exceed 1")
        if self.breakpoint_denominator < 2:
            raise ValueError("breakpoint denominator must be at least 2")
        object.__setattr__(self, "slope_generators", gens)


F_PARAMS = BSParams((2,), 2)
STEIN_PARAMS = BSParams((2, 3), 6)


def f_n_params(n: int) -> BSParams:
    return BSParams((n,), n)


def _prime_factors(n: int) -> list:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def in_ring(x: Fraction, m: int) -> bool:
    """``x`` lies in ``Z[1/m]``: its denominator has only prime factors of ``m``."""
    d = _frac(x).denominator
    for p in _prime_factors(m):
        while d % p == 0:
            d //= p
    return d == 1


def _exponents(q: Fraction, primes: list) -> list | None:
    """Prime exponent vector of ``q`` over ``primes``, or ``None`` if another prime occurs."""
    vec = []
    num, den = q.numerator, q.denominator
    for p in primes:
        e = 0
        while num % p == 0:
            num //= p
            e += 1
        while den % p == 0:
            den //= p
            e -= 1
        vec.append(e)
    return vec if num == den == 1 else None


def hermite_rows(rows) -> list:
    """Row-style Hermite normal form (nonzero rows only) of an integer matrix."""
    rows = [list(r) for r in rows if any(r)]
    if not rows:
        return []
    ncols = len(rows[0])
    out = []
    col = 0
    while rows and col < ncols:
        active = [r for r in rows if r[col]]
        if not active:
            col += 1
            continue
        rest = [r for r in rows if not r[col]]
        # Euclid on the pivot column
        while len(active) > 1:
            active.sort(key=lambda r: abs(r[col]))
            piv = active[0]
            nxt = [piv]
            for r in active[1:]:
                q = r[col] // piv[col]
                r = [a - q * b for a, b in zip(r, piv)]
                (nxt if r[col] else rest).append(r)
            active = nxt
        piv = active[0]
        if piv[col] < 0:
            piv = [-a for a in piv]
        out.append(piv)
        rows = [r for r in rest if any(r)]
        col += 1
    # reduce entries above pivots
    for i, r in enumerate(out):
        c = next(j for j, a in enumerate(r) if a)
        for k in range(i):
            q = out[k][c] // r[c]
            out[k] = [a - q * b for a, b in zip(out[k], r)]
    return out


def _lattice_contains(basis: list, v: list) -> bool:
    """Whether integer vector ``v`` is an integer combination of the Hermite ``basis`` rows."""
    v = list(v)
    for r in basis:
        c = next(j for j, a in enumerate(r) if a)
        if v[c] % r[c]:
            return False
        q = v[c] // r[c]
        v = [a - q * b for a, b in zip(v, r)]
    return not any(v)


def _slope_lattice(gens):
    primes = sorted({p for g in gens for p in _prime_factors(g.numerator) + _prime_factors(g.denominator)})
    return primes, hermite_rows([_exponents(g, primes) for g in gens])


def slope_in_group(s: Fraction, gens) -> bool:
    primes, basis = _slope_lattice(gens)
    v = _exponents(_frac(s), primes)
    return v is not None and _lattice_contains(basis, v)


def membership(f: PLMap, p: BSParams) -> bool:
    """``f`` lies in F([0, 1]; Z[1/m], P)."""
    m = p.breakpoint_denominator
    for x, y in f.knots:
        if not (in_ring(x, m) and in_ring(y, m)):
            return False
    primes, basis = _slope_lattice(p.slope_generators)
    for s in f.slopes:
        v = _exponents(s, primes)
        if v is None or not _lattice_contains(basis, v):
            return False
    return True


def is_cyclic_slope_group(p: BSParams) -> bool:
    return len(_slope_lattice(p.slope_generators)[1]) <= 1


def slope_group_generator(p: BSParams) -> Fraction | None:
    """The generator ``> 1`` of a cyclic slope group, else ``None``."""
    primes, basis = _slope_lattice(p.slope_generators)
    if len(basis) != 1:
        return None
    g = F1
    for q, e in zip(primes, basis[0]):
        g *= Fraction(q) ** e
    return g if g > 1 else 1 / g


# -- germs and supports ------------------------------------------------------


@dataclass(frozen=True)
class GermPair:
    initial_slope: Fraction
    final_slope: Fraction

    def is_trivial(self) -> bool:
        return self.initial_slope == 1 and self.final_slope == 1


def germs(f: PLMap) -> GermPair:
    s = f.slopes
    return GermPair(s[0], s[-1])


def fixed_points_finite(f: PLMap) -> list:
    """Knots on the diagonal plus isolated crossings inside pieces, sorted."""
    pts = {x for x, y in f.knots if x == y}
    ks = f.knots
    for (x0, y0), (x1, y1) in zip(ks, ks[1:]):
        d0, d1 = y0 - x0, y1 - x1
        if d0 * d1 < 0:
            pts.add(x0 + (x1 - x0) * d0 / (d0 - d1))
    return sorted(pts)


def support_intervals(f: PLMap) -> list:
    """Maximal open intervals on which ``f(x) != x``."""
    pts = fixed_points_finite(f)
    out = []
    for a, b in zip(pts, pts[1:]):
        mid = (a + b) / 2
        if evaluate(f, mid) != mid:
            out.append((a, b))
    return out


def tame_at_ends(f: PLMap) -> bool:
    """Near each endpoint the fixed set is either a one-sided neighbourhood or just the endpoint.

    For a map fixing 0 and 1 this holds by construction; the check recomputes it
    from the first and last pieces.
    """
    sl = f.slopes
    (x1, y1), (a0, b0) = f.knots[1], f.knots[-2]
    return (sl[0] == 1) == (x1 == y1) and (sl[-1] == 1) == (a0 == b0)


# -- interpolation in F_n --------------------------------------------------


def _standard_pieces(a: Fraction, b: Fraction, n: int) -> list:
    """Greedy decomposition of ``[a, b]`` into standard ``n``-adic intervals ``[k/n^j, (k+1)/n^j]``."""
    out = []
    while a < b:
        j = 0
        while True:
            size = Fraction(1, n ** j)
            if (a / size).denominator == 1 and a + size <= b:
                break
            j += 1
        out.append((a, a + size))
        a += size
    return out


def _split(pieces: list, n: int) -> list:
    """Split the widest piece into ``n`` equal parts (adds ``n - 1`` pieces)."""
    i = max(range(len(pieces)), key=lambda k: pieces[k][1] - pieces[k][0])
    a, b = pieces[i]
    w = (b - a) / n
    return pieces[:i] + [(a + k * w, a + (k + 1) * w) for k in range(n)] + pieces[i + 1:]


def interval_map(a, b, c, d, n: int = 2) -> list:
    """Knots of an increasing PL map ``[a, b] -> [c, d]`` with ``n``-adic data and slopes in ``<n>``."""
    a, b, c, d = map(_frac, (a, b, c, d))
    for v in (a, b, c, d):
        if not in_ring(v, n):
            raise Infeasible(f"{v} is not in Z[1/{n}]")
    src, dst = _standard_pieces(a, b, n), _standard_pieces(c, d, n)
    if (len(src) - len(dst)) % (n - 1):
        raise Infeasible(f"[{a}, {b}] and [{c}, {d}] have lengths in different classes mod {n - 1}")
    while len(src) < len(dst):
        src = _split(src, n)
    while len(dst) < len(src):
        dst = _split(dst, n)
    return [(s[0], t[0]) for s, t in zip(src, dst)] + [(b, d)]


def interpolate(pairs, p: BSParams) -> PLMap:
    """A member of F([0,1]; Z[1/n], <n>) sending each ``x_i`` to ``y_i``.

    Only the F_n families (one integer slope generator ``n`` and ``m = n``) are
    supported; other parameters raise :class:`Infeasible`.
    """
    if len(p.slope_generators) != 1 or p.slope_generators[0].denominator != 1 \
            or p.slope_generators[0] != p.breakpoint_denominator:
        raise Infeasible("interpolation is implemented for F_n parameters only")
    n = int(p.slope_generators[0])
    pts = sorted((_frac(x), _frac(y)) for x, y in pairs)
    xs, ys = [x for x, _ in pts], [y for _, y in pts]
    if any(not 0 < v < 1 for v in xs + ys):
        raise Infeasible("interpolation points must lie in (0, 1)")
    if len(set(xs)) != len(xs) or ys != sorted(ys) or len(set(ys)) != len(ys):
        raise Infeasible("pairs are not order-compatible")
    anchors = [(F0, F0)] + pts + [(F1, F1)]
    knots = []
    for (x0, y0), (x1, y1) in zip(anchors, anchors[1:]):
        knots += interval_map(x0, x1, y0, y1, n)[:-1]
    knots.append((F1, F1))
    return PLMap.from_knots(knots)


# -- F as order-preserving elements of V -----------------------------------------------


def cone_interval(w: str) -> tuple:
    lo = word_value(w)
    return lo, lo + Fraction(1, 2 ** len(w))


def v_to_pl(g: PrefixMap) -> PLMap:
    """Each domain cone is mapped affinely onto its range cone."""
    if not is_order_preserving(g):
        raise ValueError("element is not order preserving")
    return PLMap.from_knots([(word_value(d), word_value(r)) for d, r in g.pairs] + [(F1, F1)])


def _is_dyadic_interval(lo: Fraction, hi: Fraction) -> bool:
    w = hi - lo
    return w.numerator == 1 and w.denominator & (w.denominator - 1) == 0 and (lo / w).denominator == 1


def pl_to_v(f: PLMap, max_depth: int = 64) -> PrefixMap:
    """Refine cones until ``f`` maps each affinely onto a standard dyadic interval."""
    if not membership(f, F_PARAMS):
        raise ValueError("map is not in F")
    pairs = []
    stack = [""]
    while stack:
        w = stack.pop()
        lo, hi = cone_interval(w)
        inner = any(lo < x < hi for x in f.breakpoints)
        flo, fhi = evaluate(f, lo), evaluate(f, hi)
        if not inner and _is_dyadic_interval(flo, fhi):
            pairs.append((w, interval_word(flo, fhi)))
            continue
        if len(w) >= max_depth:
            raise ValueError("refinement depth exceeded")
        stack += [w + "1", w + "0"]
    return PrefixMap.from_pairs(pairs)


def standard_phi(k: RationalPoint) -> Fraction:
    """Binary-expansion value of a point; it intertwines ``pl_to_v(f)`` with ``f``."""
    return to_dyadic(k)


X0_PL = v_to_pl(X0)
X1_PL = v_to_pl(X1)


def dyadic_homeo(a, b, c, d) -> list:
    """Knots of a dyadic PL map ``[a, b] -> [c, d]``."""
    return interval_map(a, b, c, d, 2)


def restricted_generators(a, b) -> tuple:
    """Copies ``psi^-1 x psi`` of ``x0``, ``x1`` supported in ``[a, b]``.

    ``psi`` is a dyadic PL map ``[0, 1] -> [a, b]``; the copies are the identity
    outside ``[a, b]`` and generate F[a, b].
    """
    a, b = _frac(a), _frac(b)
    if not (0 <= a < b <= 1 and in_ring(a, 2) and in_ring(b, 2)):
        raise ValueError("need dyadic 0 <= a < b <= 1")
    psi = dyadic_homeo(0, 1, a, b)
    ss, ts = [s for s, _ in psi], [t for _, t in psi]
    fwd = lambda s: _interp(ss, ts, s)
    back = lambda t: _interp(ts, ss, t)
    out = []
    for x in (X0_PL, X1_PL):
        cuts = set(ts) | {fwd(s) for s, _ in x.knots} | {fwd(preimage(x, s)) for s in ss}
        knots = [(t, fwd(evaluate(x, back(t)))) for t in sorted(cuts)]
        out.append(PLMap.from_knots([(F0, F0)] + knots + [(F1, F1)]))
    return tuple(out)


# -- random elements ---------------------------------------------------------


def random_f(rng, max_depth: int = 6, max_leaves: int = 10) -> PLMap:
    return v_to_pl(random_element(rng, max_depth, max_leaves, order_preserving=True))


def random_f_n(rng, n: int, points: int = 3, depth: int = 3) -> PLMap:
    """Random element of F_n by interpolating random ``n``-adic points."""
    grid = n ** depth
    for _ in range(100):
        xs = sorted(rng.sample(range(1, grid), points))
        ys = sorted(rng.sample(range(1, grid), points))
        try:
            return interpolate([(Fraction(x, grid), Fraction(y, grid)) for x, y in zip(xs, ys)],
                               f_n_params(n))
        except Infeasible:
            continue
    return IDENTITY


def random_stein(rng) -> PLMap:
    """Random element of F_{2,3}: a product of random F and F_3 elements."""
    parts = [random_f(rng, 4, 6), random_f_n(rng, 3, 2, 2), random_f(rng, 4, 6)]
    return product(parts)
