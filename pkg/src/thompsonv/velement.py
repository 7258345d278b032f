"""Elements of Thompson's group V as prefix-replacement tables.

A :class:`PrefixMap` is a bijection between two complete prefix codes; the
point ``d t`` is sent to ``r t`` for each pair ``d -> r``.  Tables are kept in
reduced form (no collapsible sibling pairs) with pairs sorted by domain word,
so ``==`` is equality of homeomorphisms.

Actions are on the right: ``compose(f, g)`` is "first ``f``, then ``g``".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .cantor import (
    RationalPoint,
    canonicalize,
    check_word,
    flip,
)


class NotFixedError(ValueError):
    pass


def is_prefix_code(words) -> bool:
    ws = sorted(words)
    return all(not b.startswith(a) for a, b in zip(ws, ws[1:]))


def is_complete_code(words) -> bool:
    ws = list(words)
    if len(set(ws)) != len(ws) or not is_prefix_code(ws):
        return False
    return sum(Fraction(1, 2 ** len(w)) for w in ws) == 1


def _reduce_pairs(table: dict) -> dict:
    table = dict(table)
    changed = True
    while changed:
        changed = False
        for d in list(table):
            if d not in table or not d or d[-1] != "0":
                continue
            sib = d[:-1] + "1"
            r = table[d]
            if sib in table and r and r[-1] == "0" and table[sib] == r[:-1] + "1":
                del table[d], table[sib]
                table[d[:-1]] = r[:-1]
                changed = True
    return table


@dataclass(frozen=True)
class PrefixMap:
    pairs: tuple
    _lookup: dict = field(default=None, compare=False, repr=False, hash=False)
    _lengths: tuple = field(default=(), compare=False, repr=False, hash=False)

    def __post_init__(self):
        lookup = dict(self.pairs)
        object.__setattr__(self, "_lookup", lookup)
        object.__setattr__(self, "_lengths", tuple(sorted({len(d) for d in lookup})))

    @classmethod
    def from_pairs(cls, pairs, check: bool = True) -> "PrefixMap":
        table = {}
        for d, r in pairs:
            check_word(d)
            check_word(r)
            if d in table:
                raise ValueError(f"domain word {d!r} repeated")
            table[d] = r
        if check:
            if not is_complete_code(table):
                raise ValueError("domain is not a complete prefix code")
            if not is_complete_code(table.values()):
                raise ValueError("range is not a complete prefix code")
        return cls(tuple(sorted(_reduce_pairs(table).items())))

    @classmethod
    def parse(cls, text: str) -> "PrefixMap":
        """Parse ``d>r;d>r;...``; the empty word is written as nothing."""
        pairs = []
        for chunk in text.strip().split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            if chunk.count(">") != 1:
                raise ValueError(f"bad pair {chunk!r}; expected domain>range")
            d, r = (s.strip() for s in chunk.split(">"))
            pairs.append((d, r))
        if not pairs:
            raise ValueError("empty element")
        return cls.from_pairs(pairs)

    def __str__(self) -> str:
        return ";".join(f"{d}>{r}" for d, r in self.pairs)

    def __repr__(self) -> str:
        return f"PrefixMap({str(self)!r})"

    @property
    def domain(self) -> tuple:
        return tuple(d for d, _ in self.pairs)

    @property
    def range(self) -> tuple:
        return tuple(r for _, r in self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def is_identity(self) -> bool:
        return self.pairs == (("", ""),)

    def domain_word_of(self, k: RationalPoint) -> str:
        """The domain word whose cone contains ``k``."""
        for n in self._lengths:
            p = k.prefix(n)
            if p in self._lookup:
                return p
        raise AssertionError("domain code is not complete")

    def __call__(self, k: RationalPoint) -> RationalPoint:
        return apply_point(self, k)

    def __mul__(self, other: "PrefixMap") -> "PrefixMap":
        return compose(self, other)

    def __pow__(self, n: int) -> "PrefixMap":
        return power(self, n)


IDENTITY = PrefixMap((("", ""),))


def reduce(m: PrefixMap) -> PrefixMap:
    return PrefixMap(tuple(sorted(_reduce_pairs(dict(m.pairs)).items())))


def compose(f: PrefixMap, g: PrefixMap) -> PrefixMap:
    """The element ``k -> (k.f).g``."""
    table = {}
    glook = g._lookup
    for d, r in f.pairs:
        hit = None
        for n in g._lengths:
            if n > len(r):
                break
            if r[:n] in glook:
                hit = r[:n]
                break
        if hit is not None:
            table[d] = glook[hit] + r[len(hit):]
        else:
            # r is a proper prefix of several domain words of g
            for e, s in g.pairs:
                if e.startswith(r):
                    table[d + e[len(r):]] = s
    return PrefixMap(tuple(sorted(_reduce_pairs(table).items())))


def invert(f: PrefixMap) -> PrefixMap:
    return PrefixMap(tuple(sorted((r, d) for d, r in f.pairs)))


def power(f: PrefixMap, n: int) -> PrefixMap:
    base = f if n >= 0 else invert(f)
    result = IDENTITY
    for _ in range(abs(n)):
        result = compose(result, base)
    return result


def product(elements) -> PrefixMap:
    result = IDENTITY
    for e in elements:
        result = compose(result, e)
    return result


def commutator(f: PrefixMap, g: PrefixMap) -> PrefixMap:
    """``f^-1 g^-1 f g``."""
    return product((invert(f), invert(g), f, g))


def conjugate(f: PrefixMap, g: PrefixMap) -> PrefixMap:
    """``g^-1 f g``."""
    return product((invert(g), f, g))


def apply_point(f: PrefixMap, k: RationalPoint) -> RationalPoint:
    d = f.domain_word_of(k)
    return k.tail(len(d)).prepend(f._lookup[d])


def apply_word(f: PrefixMap, w: str) -> str | None:
    """Image of the cone ``w``; ``None`` when ``w`` must be refined first."""
    for n in f._lengths:
        if n > len(w):
            break
        if w[:n] in f._lookup:
            return f._lookup[w[:n]] + w[n:]
    return None


def is_order_preserving(f: PrefixMap) -> bool:
    rng = f.range
    return all(a < b for a, b in zip(rng, rng[1:]))


@dataclass(frozen=True)
class ClopenishSet:
    """A union of cones, minus finitely many points, plus finitely many points."""

    cones: frozenset = frozenset()
    deleted_points: frozenset = frozenset()
    added_points: frozenset = frozenset()

    def __contains__(self, k: RationalPoint) -> bool:
        if k in self.added_points:
            return True
        if k in self.deleted_points:
            return False
        return any(k.in_cone(c) for c in self.cones)

    def is_empty(self) -> bool:
        return not self.cones and not self.added_points

    def is_everything(self) -> bool:
        return normalize_cones(self.cones) == ("",) and not self.deleted_points

    def cone_closure(self) -> tuple:
        """Maximal cones covering ``cones`` (siblings merged)."""
        return normalize_cones(self.cones)


def normalize_cones(words) -> tuple:
    """Canonical antichain for the union of the given cones."""
    ws = sorted(set(words))
    anti = []
    for w in ws:
        if anti and w.startswith(anti[-1]):
            continue
        anti.append(w)
    cur = set(anti)
    changed = True
    while changed:
        changed = False
        for w in sorted(cur, key=len, reverse=True):
            if w and w in cur and w[-1] == "0" and w[:-1] + "1" in cur:
                cur -= {w, w[:-1] + "1"}
                cur.add(w[:-1])
                changed = True
    return tuple(sorted(cur))


def _isolated_fixed_points(f: PrefixMap):
    for d, r in f.pairs:
        if d != r and r.startswith(d):
            yield canonicalize(d, r[len(d):])
        elif d != r and d.startswith(r):
            yield canonicalize(r, d[len(r):])


def fixed_points(f: PrefixMap) -> ClopenishSet:
    return ClopenishSet(
        cones=frozenset(d for d, r in f.pairs if d == r),
        added_points=frozenset(_isolated_fixed_points(f)),
    )


def support(f: PrefixMap) -> ClopenishSet:
    return ClopenishSet(
        cones=frozenset(d for d, r in f.pairs if d != r),
        deleted_points=frozenset(_isolated_fixed_points(f)),
    )


def germ_at(f: PrefixMap, k: RationalPoint) -> int:
    """Germ exponent of ``f`` at a fixed point ``k``.

    Counts the periods of ``k`` that ``f`` inserts locally (negative when it
    deletes them); 0 exactly when ``f`` fixes a neighbourhood of ``k``.
    """
    d = f.domain_word_of(k)
    r = f._lookup[d]
    if apply_point(f, k) != k:
        raise NotFixedError(f"{k} is not fixed")
    if d == r:
        return 0
    period = len(k.per)
    return (len(r) - len(d)) // period


def deferment(f: PrefixMap, w: str) -> PrefixMap:
    """Copy of ``f`` acting on the cone ``w`` and trivially elsewhere."""
    check_word(w)
    table = {w + d: w + r for d, r in f.pairs}
    for i in range(len(w)):
        s = w[:i] + flip(w[i])
        table[s] = s
    return PrefixMap(tuple(sorted(_reduce_pairs(table).items())))


X0 = PrefixMap.from_pairs([("0", "00"), ("10", "01"), ("11", "1")])
X1 = deferment(X0, "1")
SWAP = PrefixMap.from_pairs([("0", "10"), ("10", "0"), ("11", "11")])
CYCLE = PrefixMap.from_pairs([("0", "11"), ("10", "0"), ("11", "10")])


def standard_generators() -> dict:
    """``x0``, ``x1`` (generating F), plus ``swap`` and ``cycle`` (with them, V)."""
    return {"x0": X0, "x1": X1, "swap": SWAP, "cycle": CYCLE}


def symmetrize(gens) -> list:
    """Close a list of ``(name, element)`` under inverses, named ``name^-1``."""
    out = list(gens)
    seen = {g for _, g in out}
    for name, g in gens:
        gi = invert(g)
        if gi not in seen:
            out.append((f"{name}^-1", gi))
            seen.add(gi)
    return out


# -- Thompson's group F as words in x0, x1 --------------------------------


def x_n(n: int) -> PrefixMap:
    """Standard infinite generator ``x_n``: ``x0`` deferred to the cone ``1^n``."""
    return deferment(X0, "1" * n)


def x_n_word(n: int) -> list:
    """``x_n`` as a word in ``x0``, ``x1``: ``x0^(n-1) x1 x0^-(n-1)``."""
    if n == 0:
        return [("x0", 1)]
    return [("x0", n - 1), ("x1", 1), ("x0", -(n - 1))]


def _vine_rotations(code) -> list:
    """Spine nodes ``n`` such that applying ``x_n^-1`` in turn takes ``code`` to the right vine."""
    leaves = set(code)
    moves = []
    n = 0
    while True:
        spine = "1" * n
        if spine in leaves:
            break
        left = spine + "0"
        if left in leaves:
            n += 1
            continue
        # rotate ((A, B), C) -> (A, (B, C)) at the spine node
        new = set()
        for w in leaves:
            if w.startswith(spine + "00"):
                new.add(spine + "0" + w[len(spine) + 2:])
            elif w.startswith(spine + "01"):
                new.add(spine + "10" + w[len(spine) + 2:])
            elif w.startswith(spine + "1"):
                new.add(spine + "11" + w[len(spine) + 1:])
            else:
                new.add(w)
        leaves = new
        moves.append(n)
    return moves


def f_word(f: PrefixMap) -> list:
    """Word in ``x0``, ``x1`` (list of ``(name, exponent)``) equal to ``f``.

    ``f`` must be order preserving.
    """
    if not is_order_preserving(f):
        raise ValueError("element is not order preserving")
    down = _vine_rotations(f.domain)
    up = _vine_rotations(f.range)
    word = []
    for n in down:
        word.extend(_invert_word(x_n_word(n)))
    for n in reversed(up):
        word.extend(x_n_word(n))
    return _freely_reduce(word)


def _invert_word(word) -> list:
    return [(g, -e) for g, e in reversed(word)]


def _freely_reduce(word) -> list:
    out = []
    for g, e in word:
        if e == 0:
            continue
        if out and out[-1][0] == g:
            e2 = out[-1][1] + e
            out.pop()
            if e2:
                out.append((g, e2))
        else:
            out.append((g, e))
    return out


def evaluate_word(word, images: dict) -> PrefixMap:
    """Product of ``images[name] ** exponent`` over the word, left to right."""
    result = IDENTITY
    for name, e in word:
        result = compose(result, power(images[name], e))
    return result


def format_word(word) -> str:
    return " ".join(f"{g}^{e}" if e != 1 else g for g, e in word) or "1"


# -- random elements ----------------------------------------------------


def random_code(rng, leaves: int, max_depth: int) -> list:
    """A random complete prefix code with ``leaves`` words of length <= ``max_depth``."""
    leaves = max(1, min(leaves, 2 ** max_depth))
    code = [""]
    while len(code) < leaves:
        splittable = [w for w in code if len(w) < max_depth]
        w = rng.choice(splittable)
        code.remove(w)
        code += [w + "0", w + "1"]
    return sorted(code)


def random_element(rng, max_depth: int = 6, max_leaves: int = 12,
                   order_preserving: bool = False) -> PrefixMap:
    n = rng.randint(1, max_leaves)
    dom = random_code(rng, n, max_depth)
    rng_code = random_code(rng, n, max_depth)
    if not order_preserving:
        rng.shuffle(rng_code)
    return PrefixMap.from_pairs(zip(dom, rng_code), check=False)
