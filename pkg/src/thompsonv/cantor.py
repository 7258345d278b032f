"""Finite binary words and eventually periodic points of Cantor space.

Words are plain ``str`` objects over the alphabet ``"01"``.  A rational point
``w(u)`` is the infinite sequence ``w u u u ...``; it is always stored in
canonical form (primitive period, shortest preperiod), so equality and hashing
of :class:`RationalPoint` coincide with equality of points.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from math import gcd

ALPHABET = "01"

_POINT_RE = re.compile(r"^\s*([01]*)\(([01]+)\)\s*$")


def check_word(w: str) -> str:
    if not isinstance(w, str) or any(c not in ALPHABET for c in w):
        raise ValueError(f"not a binary word: {w!r}")
    return w


def is_prefix(p: str, w: str) -> bool:
    return w.startswith(p)


def comparable(a: str, b: str) -> bool:
    """True when one word is a prefix of the other (the cones meet)."""
    return a.startswith(b) or b.startswith(a)


def primitive_root(u: str) -> str:
    """Shortest ``r`` with ``u == r * k``."""
    n = len(u)
    for d in range(1, n + 1):
        if n % d == 0 and u[:d] * (n // d) == u:
            return u[:d]
    return u


def flip(letter: str) -> str:
    return "1" if letter == "0" else "0"


@total_ordering
@dataclass(frozen=True)
class RationalPoint:
    """The point ``pre + per + per + ...`` of Cantor space.

    Construct through :func:`point` (or :meth:`parse`) to get the canonical
    representative; the raw constructor trusts its arguments.
    """

    pre: str
    per: str

    def __post_init__(self):
        if not self.per:
            raise ValueError("period must be non-empty")

    @classmethod
    def parse(cls, text: str) -> "RationalPoint":
        m = _POINT_RE.match(text)
        if not m:
            raise ValueError(f"bad point syntax {text!r}; expected w(u)")
        return point(m.group(1), m.group(2))

    def __str__(self) -> str:
        return f"{self.pre}({self.per})"

    def __repr__(self) -> str:
        return f"RationalPoint({str(self)!r})"

    def __lt__(self, other: "RationalPoint") -> bool:
        return compare_lex(self, other) < 0

    def prefix(self, n: int) -> str:
        """First ``n`` letters."""
        if n <= len(self.pre):
            return self.pre[:n]
        k = n - len(self.pre)
        reps = -(-k // len(self.per))
        return self.pre + (self.per * reps)[:k]

    def letter(self, i: int) -> str:
        if i < len(self.pre):
            return self.pre[i]
        return self.per[(i - len(self.pre)) % len(self.per)]

    def prepend(self, w: str) -> "RationalPoint":
        return _settle(check_word(w) + self.pre, self.per)

    def tail(self, k: int = 1) -> "RationalPoint":
        """Drop the first ``k`` letters."""
        if k <= len(self.pre):
            return RationalPoint(self.pre[k:], self.per)
        s = (k - len(self.pre)) % len(self.per)
        return RationalPoint("", self.per[s:] + self.per[:s])

    def in_cone(self, w: str) -> bool:
        return self.prefix(len(w)) == w


def canonicalize(w: str, u: str) -> RationalPoint:
    """Canonical representative of ``w(u)``.

    The period is reduced to its primitive root; then letters are moved from
    the end of the preperiod into the period (rotating it) while they agree.
    """
    check_word(w)
    check_word(u)
    if not u:
        raise ValueError("period must be non-empty")
    return _settle(w, primitive_root(u))


def _settle(w: str, u: str) -> RationalPoint:
    """Canonical form of ``w(u)`` for an already primitive ``u``."""
    i = len(w)
    j = 0
    n = len(u)
    while i and w[i - 1] == u[(n - 1 - j) % n]:
        i -= 1
        j += 1
    j %= n
    return RationalPoint(w[:i], u[n - j:] + u[:n - j] if j else u)


point = canonicalize


def compare_lex(a: RationalPoint, b: RationalPoint) -> int:
    """-1, 0 or 1 according to the lexicographic order with ``0 < 1``."""
    if a == b:
        return 0
    # two distinct eventually periodic sequences differ before this horizon
    lp, lq = len(a.per), len(b.per)
    n = max(len(a.pre), len(b.pre)) + lp * lq // gcd(lp, lq)
    sa, sb = a.prefix(n), b.prefix(n)
    return -1 if sa < sb else 1


def strip_prefix(k: RationalPoint, w: str) -> RationalPoint | None:
    """The point ``t`` with ``k == w t``, or ``None`` when ``w`` is not a prefix."""
    if not k.in_cone(w):
        return None
    return k.tail(len(w))


def word_value(w: str) -> Fraction:
    """Left endpoint of the dyadic interval of the cone ``w``."""
    if not w:
        return Fraction(0)
    return Fraction(int(w, 2), 2 ** len(w))


def to_dyadic(k: RationalPoint) -> Fraction:
    """Exact value of the binary expansion ``sum e_i / 2**i``."""
    w, u = k.pre, k.per
    periodic = Fraction(int(u, 2), 2 ** len(u) - 1)
    return word_value(w) + periodic / 2 ** len(w)


def interval_word(lo: Fraction, hi: Fraction) -> str:
    """The word whose cone maps onto the standard dyadic interval ``[lo, hi]``."""
    width = hi - lo
    if width <= 0 or width.numerator != 1 or width.denominator & (width.denominator - 1):
        raise ValueError(f"[{lo}, {hi}] is not a standard dyadic interval")
    q = width.denominator.bit_length() - 1
    n = lo * 2 ** q
    if n.denominator != 1:
        raise ValueError(f"[{lo}, {hi}] is not a standard dyadic interval")
    return format(int(n), "b").zfill(q) if q else ""


def words_of_length(n: int):
    if n == 0:
        yield ""
        return
    for i in range(2 ** n):
        yield format(i, "b").zfill(n)


def random_word(rng, n: int) -> str:
    return "".join(rng.choice(ALPHABET) for _ in range(n))


def random_point(rng, max_pre: int = 6, max_per: int = 4) -> RationalPoint:
    w = random_word(rng, rng.randint(0, max_pre))
    u = random_word(rng, rng.randint(1, max_per))
    return canonicalize(w, u)
