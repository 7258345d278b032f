"""Bracket estimates for the semiconjugacy attached to an embedding of F into V.

For an embedding ``iota: F -> V`` and a point ``k`` of Cantor space, ``phi(k)``
is the unique real lying in every window ``(a, b)`` such that ``k`` is moved by
the commutator subgroup of ``iota(F[a, b])``; if there is no such window,
``phi(k)`` is infinity.  Support membership is only semidecidable from finite
data, so we test dyadic windows against a finite sample of commutators and
report nested brackets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct

from . import plhomeo as pl
from .cantor import RationalPoint
from .velement import (
    PrefixMap,
    X0,
    X1,
    apply_point,
    evaluate_word,
    f_word,
    invert,
    product,
)

_INV = {"a": "A", "A": "a", "b": "B", "B": "b"}


@dataclass
class Embedding:
    images: dict  # {"x0": PrefixMap, "x1": PrefixMap}
    word_length_budget: int = 2
    depth_budget: int = 8
    _windows: dict = field(default_factory=dict, repr=False, compare=False)

    def image(self, word) -> PrefixMap:
        """``iota`` of a word in ``x0``, ``x1``."""
        return evaluate_word(word, self.images)

    def image_of_pl(self, f: pl.PLMap) -> PrefixMap:
        return self.image(f_word(pl.pl_to_v(f)))

    def to_json(self) -> str:
        return json.dumps({k: str(v) for k, v in self.images.items()})

    @classmethod
    def from_json(cls, text: str, **kw) -> "Embedding":
        doc = json.loads(text)
        if set(doc) != {"x0", "x1"}:
            raise ValueError("embedding must give images of exactly x0 and x1")
        return cls({k: PrefixMap.parse(v) for k, v in doc.items()}, **kw)


def standard_embedding(**kw) -> Embedding:
    return Embedding({"x0": X0, "x1": X1}, **kw)


def conjugated_embedding(T, **kw) -> Embedding:
    """``iota^T``: every image conjugated by the transducer homeomorphism ``T``."""
    from .transducer import conjugate_v_element

    return Embedding({"x0": conjugate_v_element(T, X0), "x1": conjugate_v_element(T, X1)}, **kw)


# -- sampled commutator subgroups ------------------------------------------------------


def _reduced_words(n: int) -> list:
    out = []
    for length in range(1, n + 1):
        for t in iproduct("aAbB", repeat=length):
            if all(_INV[x] != y for x, y in zip(t, t[1:])):
                out.append("".join(t))
    return out


def _inverse_word(w: str) -> str:
    return "".join(_INV[c] for c in reversed(w))


def commutator_words(budget: int, edge: int) -> list:
    """Words ``u^-1 v^-1 u v`` for reduced ``u``, ``v`` up to ``budget`` letters in ``a``, ``b``,
    then the basic commutators conjugated by ``a^{+-k}``, ``k <= edge``.

    ``a`` and ``b`` stand for the two generators of F[a, b].  The conjugates
    push supports toward both ends of the window.
    """
    ws = _reduced_words(budget)
    out = []
    for i, u in enumerate(ws):
        for v in ws[i + 1:]:
            out.append(_inverse_word(u) + _inverse_word(v) + u + v)
    for k in range(1, edge + 1):
        for c in ("a" * k, "A" * k):
            for base in ("ABab", "AbaB"):
                out.append(_inverse_word(c) + base + c)
    return out


class _Window:
    """Lazily built data for one window ``(a, b)``: the two generator images."""

    def __init__(self, emb: Embedding, a: Fraction, b: Fraction):
        self.a, self.b = a, b
        g1, g2 = pl.restricted_generators(a, b)
        self.pl_gens = (g1, g2)
        e1, e2 = emb.image_of_pl(g1), emb.image_of_pl(g2)
        self.letters = {"a": e1, "A": invert(e1), "b": e2, "B": invert(e2)}
        self.words = commutator_words(emb.word_length_budget, emb.depth_budget)

    def fixes(self, k: RationalPoint) -> bool:
        """``k`` is fixed by both generators, so by every sampled commutator."""
        return apply_point(self.letters["a"], k) == k and apply_point(self.letters["b"], k) == k

    def moves(self, word: str, k: RationalPoint) -> bool:
        p = k
        for c in word:
            p = apply_point(self.letters[c], p)
        return p != k

    def element(self, word: str) -> PrefixMap:
        return product(self.letters[c] for c in word)

    def pl_element(self, word: str) -> pl.PLMap:
        g1, g2 = self.pl_gens
        table = {"a": g1, "A": pl.invert(g1), "b": g2, "B": pl.invert(g2)}
        return pl.product(table[c] for c in word)


def _window(emb: Embedding, a, b) -> _Window:
    key = (Fraction(a), Fraction(b))
    if key not in emb._windows:
        emb._windows[key] = _Window(emb, *key)
    return emb._windows[key]


def subgroup_words(emb: Embedding, a, b, budget: int | None = None) -> list:
    """Generator images of G[a, b] followed by the sampled commutators, as elements of V."""
    w = _window(emb, a, b)
    words = w.words if budget is None else commutator_words(budget, emb.depth_budget)
    return [w.letters["a"], w.letters["b"]] + [w.element(x) for x in words]


@dataclass(frozen=True)
class Yes:
    word: str
    element: PrefixMap


class NoEvidence:
    def __repr__(self):
        return "NoEvidence"


NO_EVIDENCE = NoEvidence()


def fixed_by_group(emb: Embedding, k: RationalPoint) -> bool:
    """``k`` is fixed by both generator images, hence by the whole image group."""
    return all(apply_point(g, k) == k for g in emb.images.values())


def in_support_of_commutators(emb: Embedding, a, b, k: RationalPoint):
    """``Yes(witness)`` if a sampled commutator of G[a, b] moves ``k``, else ``NO_EVIDENCE``."""
    if fixed_by_group(emb, k):
        return NO_EVIDENCE
    w = _window(emb, a, b)
    if w.fixes(k):
        return NO_EVIDENCE
    for word in w.words:
        if w.moves(word, k):
            g = w.element(word)
            if apply_point(g, k) == k:
                raise AssertionError("witness does not move the point")
            return Yes(word, g)
    return NO_EVIDENCE


# -- brackets -------------------------------------------------------------------------


@dataclass(frozen=True)
class PhiBracket:
    status: str  # "interval", "infinity" or "unknown"
    depth: int
    lo: Fraction | None = None
    hi: Fraction | None = None
    witnesses: tuple = ()

    def contains(self, x) -> bool:
        return self.status == "interval" and self.lo <= x <= self.hi

    def width(self):
        return self.hi - self.lo if self.status == "interval" else None

    def as_dict(self) -> dict:
        d = {"status": self.status, "depth": self.depth}
        if self.status == "interval":
            d.update(lo=str(self.lo), hi=str(self.hi))
        d["windows"] = [[str(a), str(b), wd] for a, b, wd in self.witnesses]
        return d


def windows(level: int) -> list:
    """Overlapping dyadic windows ``(k/2^l, (k+2)/2^l)``; level 0 is ``(0, 1)``."""
    if level == 0:
        return [(Fraction(0), Fraction(1))]
    n = 2 ** level
    return [(Fraction(k, n), Fraction(k + 2, n)) for k in range(n - 1)]


def phi_brackets(emb: Embedding, k: RationalPoint, depth: int) -> list:
    """Brackets after levels ``0, 1, ..., depth``; see :func:`phi_bracket`."""
    if fixed_by_group(emb, k):
        return [PhiBracket("infinity", d) for d in range(depth + 1)]
    lo, hi = Fraction(0), Fraction(1)
    found = []
    seen = set()
    out = []
    for level in range(depth + 1):
        for a, b in windows(level):
            if (a, b) in seen or b <= lo or a >= hi:
                continue
            seen.add((a, b))
            r = in_support_of_commutators(emb, a, b, k)
            if isinstance(r, Yes):
                found.append((a, b, r.word))
                lo, hi = max(lo, a), min(hi, b)
                if lo >= hi:
                    out += [PhiBracket("unknown", d, witnesses=tuple(found)) for d in range(level, depth + 1)]
                    return out
        if found:
            out.append(PhiBracket("interval", level, lo, hi, tuple(found)))
        elif level == depth:
            out.append(PhiBracket("infinity", level))
        else:
            out.append(PhiBracket("unknown", level))
    return out


def phi_bracket(emb: Embedding, k: RationalPoint, depth: int) -> PhiBracket:
    """Intersect every tested window whose sampled commutators move ``k``.

    At each level only windows meeting the current bracket are tested, which
    keeps the brackets nested.  The result is infinity when ``k`` is fixed by
    both generator images, or when every window at every level up to ``depth``
    (including ``(0, 1)``, whose commutators sample the whole group) gives no
    witness.  An empty intersection gives ``unknown``.
    """
    return phi_brackets(emb, k, depth)[-1]


@dataclass
class EquivarianceReport:
    checked: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {"checked": self.checked, "ok": self.ok,
                "violations": [{"point": str(k), "reason": why} for k, why in self.violations]}


def verify_equivariance(emb: Embedding, f: pl.PLMap, samples, depth: int) -> EquivarianceReport:
    """Check ``phi(k . iota(f))`` against ``f(phi(k))`` bracket-wise."""
    g = emb.image_of_pl(f)
    rep = EquivarianceReport()
    for k in samples:
        rep.checked += 1
        b0 = phi_bracket(emb, k, depth)
        b1 = phi_bracket(emb, apply_point(g, k), depth)
        if b0.status != b1.status:
            rep.violations.append((k, f"status {b0.status} vs {b1.status} after f"))
            continue
        if b0.status == "unknown":
            rep.violations.append((k, "empty bracket"))
            continue
        if b0.status == "interval":
            flo, fhi = pl.evaluate(f, b0.lo), pl.evaluate(f, b0.hi)
            if max(flo, b1.lo) > min(fhi, b1.hi):
                rep.violations.append((k, f"[{flo}, {fhi}] misses [{b1.lo}, {b1.hi}]"))
    return rep


def adversarial_embedding(**kw) -> Embedding:
    """Not an embedding: the image of ``x0`` is replaced by the swap of the cones 0 and 10."""
    from .velement import SWAP

    return Embedding({"x0": SWAP, "x1": X1}, **kw)
