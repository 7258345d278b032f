"""Finite balls of orbit graphs of subgroups of V, and of QT graphs.

The QT graph on Cantor space has a directed edge ``k -> a k`` for each
letter ``a``.  The component of a rational point ``w(u)`` is a cycle (the
rotations of ``u``) with a binary tree hanging off every cycle vertex; the
canonical preperiod length of a point is its height above the cycle, which
gives the discrepancy potential directly.

Infinite graphs are represented by BFS balls with an explicit radius and a
truncation flag; claims are only checked on the untruncated part.
"""

from __future__ import annotations

import csv
import io
import json
import random
from collections import defaultdict, deque
from dataclasses import dataclass, field

from .cantor import RationalPoint, canonicalize
from .velement import (
    PrefixMap,
    apply_point,
    compose,
    invert,
    power,
    product,
)


@dataclass
class OrbitGraph:
    base: RationalPoint
    vertices: dict  # vertex -> BFS distance from base
    edges: tuple  # (source, target, label)
    radius: int
    truncated: bool = False
    kind: str = "schreier"  # "qt", "schreier" or "synthetic"
    complete: bool = False  # True when the graph has no boundary (synthetic graphs)
    _adj: dict = field(default=None, repr=False, compare=False)

    @property
    def adjacency(self) -> dict:
        """Undirected simple adjacency (loops and multi-edges dropped)."""
        if self._adj is None:
            adj = {v: set() for v in self.vertices}
            for s, t, _ in self.edges:
                if s != t:
                    adj[s].add(t)
                    adj[t].add(s)
            self._adj = adj
        return self._adj

    def degree(self, v) -> int:
        """Degree counting loops twice and parallel edges separately."""
        d = 0
        for s, t, _ in self.edges:
            d += (s == v) + (t == v)
        return d

    def degrees(self) -> dict:
        deg = dict.fromkeys(self.vertices, 0)
        for s, t, _ in self.edges:
            deg[s] += 1
            deg[t] += 1
        return deg

    def interior(self) -> list:
        return [v for v, r in self.vertices.items() if r < self.radius]

    def cycle_rank(self) -> int:
        """First Betti number of the (multi)graph, loops included."""
        comps = len(connected_components(self.adjacency, self.vertices))
        return len(self.edges) - len(self.vertices) + comps

    def distances_from(self, source) -> dict:
        return bfs(self.adjacency, source)[0]


def bfs(adj, source, blocked=frozenset(), limit=None):
    dist = {source: 0}
    parent = {source: None}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        if limit is not None and dist[v] >= limit:
            continue
        for w in adj[v]:
            if w not in dist and w not in blocked:
                dist[w] = dist[v] + 1
                parent[w] = v
                queue.append(w)
    return dist, parent


def connected_components(adj, vertices) -> list:
    seen = set()
    comps = []
    for v in vertices:
        if v in seen:
            continue
        comp = set(bfs(adj, v)[0])
        seen |= comp
        comps.append(comp)
    return comps


def graph_from_edges(edges, base, kind: str = "synthetic") -> OrbitGraph:
    """Wrap an explicit finite graph (e.g. a test tree or cycle) as an OrbitGraph."""
    edges = tuple((e[0], e[1], e[2] if len(e) > 2 else "") for e in edges)
    verts = {base}
    for s, t, _ in edges:
        verts |= {s, t}
    g = OrbitGraph(base, dict.fromkeys(verts, 0), edges, 0, kind=kind, complete=True)
    dist = g.distances_from(base)
    g.vertices = {v: dist.get(v, -1) for v in verts}
    g.radius = max(dist.values())
    return g


# -- QT graphs -------------------------------------------------------------


def on_cycle(k: RationalPoint) -> bool:
    return k.pre == ""


def potential(k: RationalPoint) -> int:
    """Height of ``k`` above the cycle of its QT component."""
    return len(k.pre)


def same_component(a: RationalPoint, b: RationalPoint) -> bool:
    """Rational points share a QT component iff their periods are rotations."""
    return len(a.per) == len(b.per) and b.per in a.per + a.per


def qt_neighbours(k: RationalPoint) -> list:
    return [k.prepend("0"), k.prepend("1"), k.tail(1)]


@dataclass(frozen=True)
class QTCycle:
    vertices: tuple

    def __len__(self) -> int:
        return len(self.vertices)


def detect_cycle(k0: RationalPoint) -> QTCycle:
    """The cycle of ``QT_k0``, ordered along its directed edges."""
    u = k0.per
    c = canonicalize("", u)
    verts = [c]
    for i in range(1, len(u)):
        verts.append(c.prepend(u[-i:]))
    return QTCycle(tuple(verts))


def build_qt_ball(k0: RationalPoint, radius: int) -> OrbitGraph:
    if radius < 0:
        raise ValueError("radius must be >= 0")
    dist = {k0: 0}
    queue = deque([k0])
    while queue:
        v = queue.popleft()
        if dist[v] >= radius:
            continue
        for w in qt_neighbours(v):
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    edges = set()
    for v in dist:
        for a in "01":
            w = v.prepend(a)
            if w in dist:
                edges.add((v, w, a))
    return OrbitGraph(k0, dist, tuple(sorted(edges, key=_edge_key)), radius, kind="qt")


def _edge_key(e):
    s, t, lab = e
    return (str(s), str(t), lab)


def qt_geodesic(a: RationalPoint, b: RationalPoint) -> list:
    """A geodesic vertex path from ``a`` to ``b`` in their QT component."""
    if not same_component(a, b):
        raise ValueError(f"{a} and {b} lie in different QT components")
    ca, cb = canonicalize("", a.per), canonicalize("", b.per)
    wa, wb = a.pre, b.pre
    if ca == cb:
        s = 0
        while s < min(len(wa), len(wb)) and wa[len(wa) - 1 - s] == wb[len(wb) - 1 - s]:
            s += 1
        down = [a.tail(i) for i in range(len(wa) - s + 1)]
        meet = down[-1]
        up = [meet.prepend(wb[len(wb) - s - i:len(wb) - s]) for i in range(1, len(wb) - s + 1)]
        return down + up
    down = [a.tail(i) for i in range(len(wa) + 1)]
    cyc = list(detect_cycle(ca).vertices)
    i, j = cyc.index(ca), cyc.index(cb)
    n = len(cyc)
    fwd = (j - i) % n
    if fwd <= n - fwd:
        around = [cyc[(i + t) % n] for t in range(1, fwd + 1)]
    else:
        around = [cyc[(i - t) % n] for t in range(1, n - fwd + 1)]
    up = [cb.prepend(wb[len(wb) - t:]) for t in range(1, len(wb) + 1)]
    return down + around + up


def qt_distance(a: RationalPoint, b: RationalPoint) -> int:
    return len(qt_geodesic(a, b)) - 1


def edge_increment(a: RationalPoint, b: RationalPoint) -> int:
    """Discrepancy across one QT edge traversed from ``a`` to ``b``."""
    if on_cycle(a) and on_cycle(b):
        return 0
    if b.tail(1) == a:
        return 1
    if a.tail(1) == b:
        return -1
    raise ValueError(f"{a} and {b} are not adjacent in QT")


def discrepancy(k0: RationalPoint, k: RationalPoint, k2: RationalPoint) -> int:
    """Discrepancy from ``k`` to ``k2`` in ``QT_k0``, summed along a geodesic."""
    if not (same_component(k0, k) and same_component(k0, k2)):
        raise ValueError("points are not in the QT component of the base")
    path = qt_geodesic(k, k2)
    return sum(edge_increment(x, y) for x, y in zip(path, path[1:]))


def ball_potentials(graph: OrbitGraph) -> dict:
    """f_base on a QT ball, accumulated edge by edge along BFS from the base."""
    f = {graph.base: 0}
    queue = deque([graph.base])
    out = defaultdict(list)
    for s, t, _ in graph.edges:
        out[s].append(t)
        out[t].append(s)
    while queue:
        v = queue.popleft()
        for w in out[v]:
            if w not in f:
                f[w] = f[v] + edge_increment(v, w)
                queue.append(w)
    return f


def f_values(graph: OrbitGraph) -> dict:
    """Discrepancy from the base to every vertex of the graph."""
    if graph.kind == "qt":
        return ball_potentials(graph)
    h = potential(graph.base)
    return {v: potential(v) - h for v in graph.vertices}


# -- action graphs ------------------------------------------------------------


def build_action_graph(gens, k0: RationalPoint, radius: int,
                       max_vertices: int = 100_000) -> OrbitGraph:
    """BFS ball of the Schreier graph of ``<gens>`` on the orbit of ``k0``.

    ``gens`` is a list of ``(name, PrefixMap)``, expected to be symmetric.
    """
    dist = {k0: 0}
    queue = deque([k0])
    truncated = False
    while queue:
        v = queue.popleft()
        if dist[v] >= radius:
            continue
        for _, g in gens:
            w = apply_point(g, v)
            if w in dist:
                continue
            if len(dist) >= max_vertices:
                truncated = True
                continue
            dist[w] = dist[v] + 1
            queue.append(w)
    edges = []
    for v in dist:
        for name, g in gens:
            w = apply_point(g, v)
            if w in dist:
                edges.append((v, w, name))
    return OrbitGraph(k0, dist, tuple(edges), radius, truncated=truncated)


def max_prefix_depth(gens) -> int:
    """Least ``N`` such that every prefix in every table is shorter than ``N``."""
    longest = 0
    for g in gens:
        if isinstance(g, tuple):
            g = g[1]
        for d, r in g.pairs:
            longest = max(longest, len(d), len(r))
    return longest + 1


def band_components(graph: OrbitGraph, k0: RationalPoint, m: int, d: int) -> list:
    """Components of the subgraph induced on vertices with ``f`` in ``[m, m+d]``.

    ``f`` is the discrepancy from ``k0``.
    """
    base_f = f_values(graph)
    shift = base_f[k0] if k0 in base_f else discrepancy(graph.base, graph.base, k0)
    band = {v for v, x in base_f.items() if m <= x - shift <= m + d}
    adj = {v: graph.adjacency[v] & band for v in band}
    return sorted(connected_components(adj, band), key=len, reverse=True)


def band_bound(k0: RationalPoint, d: int, meets_cycle: bool) -> int:
    """Largest possible band component in QT: a full binary tree, or the cycle with its trees."""
    if meets_cycle:
        return 2 ** (d + 1) * len(k0.per)
    return 2 ** (d + 1) - 1


def band_statistics(graph: OrbitGraph, d_max: int) -> list:
    """Rows ``(m, d, components, max_size)`` over every nonempty band of the graph."""
    f = f_values(graph)
    lo, hi = min(f.values()), max(f.values())
    rows = []
    for d in range(d_max + 1):
        for m in range(lo, hi + 1):
            comps = band_components(graph, graph.base, m, d)
            if comps:
                rows.append((m, d, len(comps), len(comps[0])))
    return rows


def empirical_band_constant(graph: OrbitGraph, d: int) -> int:
    f = f_values(graph)
    lo, hi = min(f.values()), max(f.values())
    best = 0
    for m in range(lo, hi + 1):
        comps = band_components(graph, graph.base, m, d)
        if comps:
            best = max(best, len(comps[0]))
    return best


def measured_lipschitz(graph: OrbitGraph) -> int:
    """Largest QT distance spanned by a single edge of the graph."""
    return max((qt_distance(s, t) for s, t, _ in graph.edges), default=0)


# -- bottleneck checking ---------------------------------------------------------


@dataclass
class BottleneckReport:
    delta: int
    checked: int
    passed: int
    failed: int
    failures: list
    minimal_delta: int | None

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def as_rows(self) -> list:
        return [("delta", "checked", "passed", "failed", "minimal_delta"),
                (self.delta, self.checked, self.passed, self.failed,
                 "" if self.minimal_delta is None else self.minimal_delta)]


class _Bottleneck:
    def __init__(self, graph: OrbitGraph):
        self.graph = graph
        self.adj = graph.adjacency
        self._bfs = {}
        self._cut = {}

    def tree(self, v):
        if v not in self._bfs:
            self._bfs[v] = bfs(self.adj, v)
        return self._bfs[v]

    def midpoints(self, x, y, length):
        # walk back from y along x's BFS tree
        _, parent = self.tree(x)
        path = [y]
        while path[-1] != x:
            path.append(parent[path[-1]])
        path.reverse()
        if length % 2 == 0:
            return [path[length // 2]]
        return [path[length // 2], path[length // 2 + 1]]

    def labels(self, m, delta):
        key = (m, delta)
        if key not in self._cut:
            ball = set(bfs(self.adj, m, limit=delta)[0])
            comp = {}
            for i, c in enumerate(connected_components(
                    {v: self.adj[v] - ball for v in self.adj if v not in ball},
                    [v for v in self.adj if v not in ball])):
                for v in c:
                    comp[v] = i
            self._cut[key] = (ball, comp)
        return self._cut[key]

    def separates(self, x, y, m, delta) -> bool:
        ball, comp = self.labels(m, delta)
        if x in ball or y in ball:
            return True
        return comp[x] != comp[y]

    def check_pair(self, x, y, delta) -> bool:
        length = self.tree(x)[0].get(y)
        if length is None:
            return True
        return any(self.separates(x, y, m, delta) for m in self.midpoints(x, y, length))


def _pairs(graph, pairs, rng):
    verts = sorted(graph.vertices, key=str)
    if pairs is None or pairs == "all":
        for i, x in enumerate(verts):
            for y in verts[i + 1:]:
                yield x, y
    else:
        for _ in range(int(pairs)):
            x, y = rng.sample(verts, 2)
            yield x, y


def bottleneck_check(graph: OrbitGraph, delta: int, pairs=None, seed: int = 0) -> BottleneckReport:
    """Midpoint-ball separation test over pairs of vertices.

    A pair passes when removing the ball of radius ``delta`` about a geodesic
    midpoint separates its endpoints (either centre for odd lengths).  For
    balls, only pairs with ``d(x, y) <= radius - 2 delta`` are checked.
    """
    if delta < 0:
        raise ValueError("delta must be >= 0")
    state = _Bottleneck(graph)
    pair_list = list(_pairs(graph, pairs, random.Random(seed)))
    minimal = None
    report = None
    for dl in range(delta + 1):
        limit = None if graph.complete else graph.radius - 2 * dl
        checked = passed = 0
        failures = []
        for x, y in pair_list:
            dxy = state.tree(x)[0].get(y)
            if dxy is None or (limit is not None and dxy > limit):
                continue
            checked += 1
            if state.check_pair(x, y, dl):
                passed += 1
            elif len(failures) < 20:
                failures.append((x, y))
        if minimal is None and checked == passed:
            minimal = dl
        report = BottleneckReport(dl, checked, passed, checked - passed, failures, minimal)
    return report


# -- shortcuts (uniform generation of cycles) --------------------------------------


@dataclass
class ShortcutResult:
    x: RationalPoint
    y: RationalPoint
    path: list  # vertices from x to y
    labels: list  # generator names along the path
    m1: int
    m2: int

    def __len__(self) -> int:
        return len(self.labels)


def _step_generator(gens, a, b):
    for name, g in gens:
        if apply_point(g, a) == b:
            return name, g
    return None


def _inverse_name(gens, g, name):
    gi = invert(g)
    for n, h in gens:
        if h == gi:
            return n, h
    return f"{name}^-1", gi


def find_shortcut(graph: OrbitGraph, cycle, gens) -> ShortcutResult | None:
    """Look for a chord strictly shorter than both arcs of a simple cycle.

    The search follows the prefix-pair collision argument: with ``f`` the
    discrepancy from the base, left and right paths run from a minimum ``p``
    to a maximum ``q`` of ``f``; for each level ``m`` the last vertices at
    levels ``[1, m]`` on each side and the prefixes their next edges remove
    give a pair of words, and two levels with the same pair let the segment
    through ``q`` be replayed lower down.  Every candidate is verified before
    it is returned.
    """
    cyc = list(cycle)
    n = len(cyc)
    if len(set(cyc)) != n or n < 3:
        raise ValueError("cycle must be a simple closed path with at least 3 vertices")
    steps = []
    for i in range(n):
        st = _step_generator(gens, cyc[i], cyc[(i + 1) % n])
        if st is None:
            raise ValueError(f"cycle is not closed: no generator takes {cyc[i]} to {cyc[(i + 1) % n]}")
        steps.append(st)
    h0 = potential(graph.base)
    f = [potential(v) - h0 for v in cyc]
    ip = min(range(n), key=lambda i: (f[i], i))
    iq = max(range(n), key=lambda i: (f[i], -i))
    low = f[ip]
    f = [x - low for x in f]
    top = f[iq]
    if top < 2:
        return None

    left = [(ip + t) % n for t in range((iq - ip) % n + 1)]
    right = [(ip - t) % n for t in range((ip - iq) % n + 1)]

    def last_in(path, m, side):
        best = None
        for t in range(len(path) - 1):
            if 1 <= f[path[t]] <= m:
                best = t
        if best is None:
            return None
        i = path[best]
        if side == "left":
            name, g = steps[i]
        else:
            name, g = _inverse_name(gens, *reversed(steps[(i - 1) % n]))
        return best, g.domain_word_of(cyc[i])

    theta = {}
    for m in range(1, top):
        lam = last_in(left, m, "left")
        rho = last_in(right, m, "right")
        if lam is None or rho is None:
            continue
        theta[m] = (lam[0], rho[0], lam[1], rho[1])

    by_pair = defaultdict(list)
    for m, (_, _, w, u) in theta.items():
        by_pair[(w, u)].append(m)
    candidates = []
    for ms in by_pair.values():
        for a in range(len(ms)):
            for b in range(a + 1, len(ms)):
                candidates.append((ms[a], ms[b]))
    candidates.sort(key=lambda c: (-c[1], -c[0]))

    for m1, m2 in candidates:
        tl1, tr1, _, _ = theta[m1]
        tl2, tr2, _, _ = theta[m2]
        word = []
        for t in range(tl2, len(left) - 1):
            word.append(steps[left[t]])
        for t in range(len(right) - 1, tr2, -1):
            # right path edge right[t-1] -> right[t] runs backwards along the cycle
            i = right[t]
            word.append(steps[i])
        x, y = cyc[left[tl1]], cyc[right[tr1]]
        if x == y or not word:
            continue
        path = [x]
        for _, g in word:
            path.append(apply_point(g, path[-1]))
        if path[-1] != y:
            continue
        ix, iy = left[tl1], right[tr1]
        arc = (iy - ix) % n
        if len(word) < min(arc, n - arc):
            return ShortcutResult(x, y, path, [nm for nm, _ in word], m1, m2)
    return None


def verify_shortcut(result: ShortcutResult, cycle, gens) -> bool:
    """Independent re-check: valid edges, right endpoints, shorter than both arcs."""
    cyc = list(cycle)
    maps = dict(gens)
    p = result.path
    if p[0] != result.x or p[-1] != result.y or len(p) != len(result.labels) + 1:
        return False
    for a, b, name in zip(p, p[1:], result.labels):
        if apply_point(maps[name], a) != b:
            return False
    n = len(cyc)
    arc = (cyc.index(result.y) - cyc.index(result.x)) % n
    return len(result.labels) < min(arc, n - arc)


def fundamental_cycles(graph: OrbitGraph, max_length: int | None = None) -> list:
    """Simple cycles closed by the non-tree edges of a BFS tree from the base."""
    adj = graph.adjacency
    parent = {graph.base: None}
    order = [graph.base]
    for v in order:
        for w in sorted(adj[v], key=str):
            if w not in parent:
                parent[w] = v
                order.append(w)

    def up(v):
        path = []
        while v is not None:
            path.append(v)
            v = parent[v]
        return path

    out = []
    done = set()
    for v in order:
        for w in adj[v]:
            key = frozenset((v, w))
            if w not in parent or parent[w] == v or parent[v] == w or key in done:
                continue
            done.add(key)
            pv, pw = up(v), up(w)
            common = set(pv) & set(pw)
            a = [x for x in pv if x not in common]
            b = [x for x in pw if x not in common]
            top = next(x for x in pv if x in common)
            cyc = a + [top] + b[::-1]
            if len(cyc) >= 3 and (max_length is None or len(cyc) <= max_length):
                out.append(cyc)
    return out


# -- Z^2 stabilizer witnesses ---------------------------------------------------------


@dataclass
class Z2Witness:
    n: int
    m: int
    n2: int
    m2: int
    element: PrefixMap  # g^(n-n2) h^(m-m2), fixes the point


def z2_stabilizer_witness(g: PrefixMap, h: PrefixMap, k: RationalPoint,
                          bound: int) -> Z2Witness | None:
    """Find ``(n, m) != (n', m')`` in ``[0, bound]^2`` with ``k.g^n h^m = k.g^n' h^m'``.

    ``g`` and ``h`` must commute.  ``None`` means no collision within the
    bound, which is inconclusive.
    """
    if compose(g, h) != compose(h, g):
        raise ValueError("g and h do not commute")
    seen = {}
    row = k
    for n in range(bound + 1):
        x = row
        for m in range(bound + 1):
            if x in seen:
                n2, m2 = seen[x]
                elem = product((power(g, n - n2), power(h, m - m2)))
                if apply_point(elem, k) != k:
                    raise AssertionError("collision does not give a fixing element")
                return Z2Witness(n, m, n2, m2, elem)
            seen[x] = (n, m)
            x = apply_point(h, x)
        row = apply_point(g, row)
    return None


# -- exports ---------------------------------------------------------------------------


def _ids(graph):
    order = sorted(graph.vertices, key=lambda v: (graph.vertices[v], str(v)))
    return {v: f"v{i}" for i, v in enumerate(order)}


def to_dot(graph: OrbitGraph) -> str:
    ids = _ids(graph)
    lines = ["digraph G {"]
    for v, i in ids.items():
        lines.append(f'    {i} [label="{v}"];')
    for s, t, lab in graph.edges:
        lines.append(f'    {ids[s]} -> {ids[t]} [label="{lab}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_json(graph: OrbitGraph) -> str:
    ids = _ids(graph)
    doc = {
        "base": str(graph.base),
        "radius": graph.radius,
        "truncated": graph.truncated,
        "kind": graph.kind,
        "vertices": [{"id": i, "point": str(v), "dist": graph.vertices[v]} for v, i in ids.items()],
        "edges": [{"source": ids[s], "target": ids[t], "label": lab} for s, t, lab in graph.edges],
    }
    return json.dumps(doc, indent=2)


def bands_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m", "d", "components", "max_size"])
    w.writerows(rows)
    return buf.getvalue()
