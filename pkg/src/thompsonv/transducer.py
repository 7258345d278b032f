"""Asynchronous binary transducers and the homeomorphisms of Cantor space they induce.

A transducer reads one letter at a time and emits a (possibly empty) word per
transition.  Conjugating an element of V by a synchronizing transducer
homeomorphism ``T`` gives another element of V; :func:`conjugate_v_element`
builds its prefix table directly from the runs of ``T``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from itertools import product as iproduct

from .cantor import ALPHABET, RationalPoint, canonicalize, words_of_length
from .velement import (
    PrefixMap,
    apply_point as v_apply,
    is_complete_code,
    normalize_cones,
)


class DegenerateOutput(ValueError):
    """The run stops producing output letters forever."""


class DepthExceeded(RuntimeError):
    """A bounded search gave up; the question is left open."""


@dataclass(frozen=True)
class Transducer:
    states: tuple
    initial: object
    transitions: tuple  # ((state, letter), (output, next)) pairs

    def __post_init__(self):
        table = dict(self.transitions)
        for q in self.states:
            for a in ALPHABET:
                if (q, a) not in table:
                    raise ValueError(f"missing transition from {q!r} on {a!r}")
                out, nxt = table[(q, a)]
                if nxt not in self.states:
                    raise ValueError(f"transition to unknown state {nxt!r}")
                if any(c not in ALPHABET for c in out):
                    raise ValueError(f"bad output word {out!r}")
        if self.initial not in self.states:
            raise ValueError(f"unknown initial state {self.initial!r}")
        object.__setattr__(self, "_table", table)

    @classmethod
    def from_table(cls, initial, table: dict) -> "Transducer":
        """``table[(state, letter)] = (output, next_state)``."""
        states = []
        for (q, _), (_, nxt) in table.items():
            for s in (q, nxt):
                if s not in states:
                    states.append(s)
        if initial in states:
            states.remove(initial)
        states.insert(0, initial)
        return cls(tuple(states), initial, tuple(sorted(table.items(), key=lambda kv: (str(kv[0][0]), kv[0][1]))))

    def step(self, state, letter):
        return self._table[(state, letter)]

    def with_initial(self, state) -> "Transducer":
        return Transducer(self.states, state, self.transitions)

    # JSON machine format
    def to_json(self) -> str:
        doc = {
            "states": [str(q) for q in self.states],
            "initial": str(self.initial),
            "transitions": [
                {"state": str(q), "in": a, "out": out, "next": str(nxt)}
                for (q, a), (out, nxt) in self.transitions
            ],
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Transducer":
        doc = json.loads(text)
        table = {}
        for t in doc["transitions"]:
            key = (t["state"], t["in"])
            if key in table:
                raise ValueError(f"duplicate transition {key}")
            table[key] = (t["out"], t["next"])
        states = tuple(doc.get("states") or sorted({q for q, _ in table}))
        return cls(states, doc["initial"], tuple(sorted(table.items())))


# -- built-in machines ------------------------------------------------------


def paper_h() -> Transducer:
    """The three-state order-two machine ``h``."""
    return Transducer.from_table("q0", {
        ("q0", "0"): ("10", "q0"),
        ("q0", "1"): ("", "q1"),
        ("q1", "0"): ("0", "q0"),
        ("q1", "1"): ("11", "q2"),
        ("q2", "0"): ("0", "q0"),
        ("q2", "1"): ("1", "q2"),
    })


def identity_machine() -> Transducer:
    return Transducer.from_table("e", {("e", "0"): ("0", "e"), ("e", "1"): ("1", "e")})


def letter_swap() -> Transducer:
    return Transducer.from_table("s", {("s", "0"): ("1", "s"), ("s", "1"): ("0", "s")})


def parity_machine() -> Transducer:
    """Copies its input while flipping between two states; never synchronizes."""
    return Transducer.from_table("even", {
        ("even", "0"): ("0", "odd"), ("even", "1"): ("1", "odd"),
        ("odd", "0"): ("0", "even"), ("odd", "1"): ("1", "even"),
    })


BUILTINS = {
    "paper-h": paper_h,
    "identity": identity_machine,
    "swap": letter_swap,
    "parity": parity_machine,
}


def load_machine(spec: str) -> Transducer:
    """A built-in name or a path to a JSON machine file."""
    if spec in BUILTINS:
        return BUILTINS[spec]()
    with open(spec) as fh:
        return Transducer.from_json(fh.read())


# -- running --------------------------------------------------------------


def apply_word(T: Transducer, w: str, start=None) -> tuple:
    """Output and final state of the run on ``w``."""
    q = T.initial if start is None else start
    out = []
    for a in w:
        o, q = T.step(q, a)
        out.append(o)
    return "".join(out), q


def apply_point(T: Transducer, k: RationalPoint, start=None) -> RationalPoint:
    """Image of a rational point; the period is found when a state recurs at a period boundary."""
    out, q = apply_word(T, k.pre, start)
    seen = {}
    chunks = []
    while q not in seen:
        seen[q] = len(chunks)
        o, q = apply_word(T, k.per, q)
        chunks.append(o)
    loop = "".join(chunks[seen[q]:])
    if not loop:
        raise DegenerateOutput(f"no output letters along the period of {k}")
    return canonicalize(out + "".join(chunks[:seen[q]]), loop)


def synchronizing_level(T: Transducer, max_n: int) -> int | None:
    """Least ``n <= max_n`` after which the state no longer depends on where the run started."""
    images = {frozenset(T.states)}
    for n in range(max_n + 1):
        if all(len(s) == 1 for s in images):
            return n
        images = {frozenset(T.step(q, a)[1] for q in s) for s in images for a in ALPHABET}
    return None


def state_after(T: Transducer, w: str):
    return apply_word(T, w)[1]


# -- composition and minimization ----------------------------------------------------


def compose(T1: Transducer, T2: Transducer) -> Transducer:
    """Machine for "first ``T1``, then ``T2``".

    ``T2`` consumes ``T1``'s output as it is produced, so no buffering is
    needed and the product state is just the pair.
    """
    start = (T1.initial, T2.initial)
    table = {}
    todo = [start]
    seen = {start}
    while todo:
        q1, q2 = todo.pop()
        for a in ALPHABET:
            o1, n1 = T1.step(q1, a)
            o2, n2 = apply_word(T2, o1, q2)
            nxt = (n1, n2)
            table[((q1, q2), a)] = (o2, nxt)
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return minimize(Transducer.from_table(start, table))


def minimize(T: Transducer) -> Transducer:
    """Merge states with identical transition behaviour (exact output words)."""
    reach = [T.initial]
    for q in reach:
        for a in ALPHABET:
            n = T.step(q, a)[1]
            if n not in reach:
                reach.append(n)
    block = {q: 0 for q in reach}
    while True:
        sig = {q: (block[q],) + tuple((T.step(q, a)[0], block[T.step(q, a)[1]]) for a in ALPHABET)
               for q in reach}
        ids = {}
        new = {q: ids.setdefault(sig[q], len(ids)) for q in reach}
        if len(ids) == len(set(block.values())):
            break
        block = new
    block = new
    names = {}
    for q in reach:
        names.setdefault(block[q], f"s{len(names)}")
    table = {}
    for q in reach:
        for a in ALPHABET:
            o, n = T.step(q, a)
            table[(names[block[q]], a)] = (o, names[block[n]])
    return Transducer.from_table(names[block[T.initial]], table)


def is_identity(T: Transducer, depth: int) -> bool:
    """Whether ``T`` induces the identity map of Cantor space.

    Explores configurations ``(state, pending input not yet echoed)`` for all
    inputs up to ``depth`` letters; every output must echo the input.  When the
    configuration set closes before ``depth`` the answer is exact.
    """
    T = minimize(T)
    frontier = {(T.initial, "")}
    seen = set(frontier)
    for _ in range(depth):
        nxt = set()
        for q, pending in frontier:
            for a in ALPHABET:
                o, q2 = T.step(q, a)
                buf = pending + a
                if not buf.startswith(o):
                    return False
                cfg = (q2, buf[len(o):])
                if cfg not in seen:
                    seen.add(cfg)
                    nxt.add(cfg)
        if not nxt:
            return True
        frontier = nxt
    return True


# -- images of states ----------------------------------------------------------------


def _no_empty_cycles(T: Transducer) -> bool:
    eps = {q: [T.step(q, a)[1] for a in ALPHABET if not T.step(q, a)[0]] for q in T.states}
    state = {}

    def visit(q):
        state[q] = 1
        for n in eps[q]:
            if state.get(n) == 1 or (n not in state and not visit(n)):
                return False
        state[q] = 2
        return True

    return all(q in state or visit(q) for q in T.states)


def _output_prefixes(T: Transducer, depth: int) -> dict:
    @lru_cache(maxsize=None)
    def pref(q, n):
        if n == 0:
            return frozenset({""})
        out = set()
        for a in ALPHABET:
            o, nxt = T.step(q, a)
            if len(o) >= n:
                out.add(o[:n])
            else:
                out |= {o + p for p in pref(nxt, n - len(o))}
        return frozenset(out)

    return {q: pref(q, depth) for q in T.states}


def state_images(T: Transducer, depth_bound: int = 12) -> dict:
    """For each state ``q``, the image of Cantor space under the run from ``q``, as cones.

    Candidate cone sets are read off the output prefixes of increasing length
    and accepted once they satisfy ``Im(q) = U_a out(q,a) Im(next(q,a))``
    exactly; with no empty-output cycles that system has a unique solution.
    """
    if not _no_empty_cycles(T):
        raise DegenerateOutput("a cycle of empty outputs makes the induced map undefined")
    for depth in range(depth_bound + 1):
        cand = {q: normalize_cones(ws) for q, ws in _output_prefixes(T, depth).items()}
        ok = True
        for q in T.states:
            rhs = []
            for a in ALPHABET:
                o, nxt = T.step(q, a)
                rhs += [o + c for c in cand[nxt]]
            if normalize_cones(rhs) != cand[q]:
                ok = False
                break
        if ok:
            return cand
    raise DepthExceeded(f"state images not certified up to depth {depth_bound}")


def preimage_point(T: Transducer, k: RationalPoint, depth_bound: int = 12) -> RationalPoint:
    """The point ``p`` with ``apply_point(T, p) == k``, for an injective ``T``.

    Input letters are chosen one at a time: a prefix ``y`` is viable when the
    rest of ``k`` after ``T``'s output on ``y`` lies in the image of the state
    reached.  The answer is periodic once a (state, remaining point) pair recurs.
    """
    images = state_images(T, depth_bound)

    def viable(q, rest):
        return any(rest.in_cone(c) for c in images[q])

    q, rest = T.initial, k
    letters = []
    seen = {}
    while (q, rest) not in seen:
        seen[(q, rest)] = len(letters)
        choices = []
        for a in ALPHABET:
            o, q2 = T.step(q, a)
            if rest.in_cone(o) and viable(q2, rest.tail(len(o))):
                choices.append((a, q2, rest.tail(len(o))))
        if len(choices) != 1:
            raise ValueError(f"{k} has {len(choices)} viable continuations; T is not a bijection")
        a, q, rest = choices[0]
        letters.append(a)
    i = seen[(q, rest)]
    word = "".join(letters)
    return canonicalize(word[:i], word[i:])


def inverse_map(T: Transducer, depth_bound: int = 12):
    """Point map of ``T^-1``."""
    return lambda k: preimage_point(T, k, depth_bound)


# -- conjugating elements of V ----------------------------------------------------------------


def conjugate_v_element(T: Transducer, g: PrefixMap, depth_bound: int = 12,
                        samples: int = 64, seed: int = 0) -> PrefixMap:
    """The element ``T^-1 g T`` of V (right actions: it sends ``T(p)`` to ``T(p.g)``).

    After ``n`` = synchronizing level letters the state of ``T`` forgets the
    past, so for a domain pair ``d -> r`` of ``g`` and any ``t`` of length
    ``n``, the runs on ``d t`` and ``r t`` end in the same state ``q`` and the
    conjugate replaces ``out(d t) e`` by ``out(r t) e`` for every cone ``e``
    of the image of ``q``.
    """
    n = synchronizing_level(T, depth_bound)
    if n is None:
        raise DepthExceeded(f"no synchronizing level up to {depth_bound}")
    images = state_images(T, depth_bound)
    pairs = []
    for d, r in g.pairs:
        for t in words_of_length(n):
            od, qd = apply_word(T, d + t)
            orr, qr = apply_word(T, r + t)
            if qd != qr:
                raise AssertionError("synchronizing level violated")
            pairs += [(od + e, orr + e) for e in images[qd]]
    doms = [p for p, _ in pairs]
    rngs = [p for _, p in pairs]
    if not (is_complete_code(doms) and is_complete_code(rngs)):
        raise ValueError("transducer does not induce a homeomorphism")
    result = PrefixMap.from_pairs(pairs, check=False)
    _verify_conjugate(T, g, result, samples, seed)
    return result


def _verify_conjugate(T, g, gt, samples, seed):
    import random
    from .cantor import random_point

    rng = random.Random(seed)
    for _ in range(samples):
        k = random_point(rng, 8, 5)
        lhs = apply_point(T, v_apply(g, k))
        rhs = v_apply(gt, apply_point(T, k))
        if lhs != rhs:
            raise AssertionError(f"conjugate fails at {k}: {lhs} != {rhs}")


def cone_image(T: Transducer, w: str, depth_bound: int = 12) -> tuple:
    """Image of the cone ``w`` as a canonical union of cones."""
    images = state_images(T, depth_bound)
    o, q = apply_word(T, w)
    return normalize_cones(o + e for e in images[q])


def all_words(max_len: int):
    for n in range(max_len + 1):
        for t in iproduct(ALPHABET, repeat=n):
            yield "".join(t)
