"""Acceptance criteria, one test per criterion.

Each test is marked with its criterion number; the terminal summary prints one
PASS/FAIL line per criterion (see conftest.py).
"""

import ast
import pathlib
import random
import time
from fractions import Fraction as Fr

import networkx as nx
import pytest

from thompsonv import plhomeo as pl
from thompsonv import transducer as tr
from thompsonv import velement as ve
from thompsonv.actiongraph import (
    band_bound,
    band_components,
    bottleneck_check,
    build_action_graph,
    build_qt_ball,
    detect_cycle,
    discrepancy,
    edge_increment,
    f_values,
    find_shortcut,
    graph_from_edges,
    qt_geodesic,
    verify_shortcut,
    z2_stabilizer_witness,
)
from thompsonv.cantor import canonicalize, point, random_point, random_word, to_dyadic
from thompsonv.semiconj import (
    adversarial_embedding,
    conjugated_embedding,
    phi_bracket,
    phi_brackets,
    standard_embedding,
    verify_equivariance,
)

ROOT = pathlib.Path(__file__).resolve().parents[1]
ZERO, ONE = point("", "0"), point("", "1")
K001 = point("", "001")


def criterion(n, title):
    return pytest.mark.criterion(n, title)


def nx_graph(g):
    G = nx.Graph()
    G.add_nodes_from(g.vertices)
    G.add_edges_from((s, t) for s, t, _ in g.edges if s != t)
    return G


def aperiodic_base(rng):
    """A rational point whose canonical preperiod has 24 letters, so radius-8 balls miss the cycle."""
    while True:
        k = canonicalize(random_word(rng, 24), rng.choice(["01", "011", "0"]))
        if len(k.pre) == 24:
            return k


# -- 1 ------------------------------------------------------------------------------------


@criterion(1, "group laws on 1000 random PrefixMaps, under 10 s")
def test_group_algebra_suite():
    rng = random.Random(1)
    start = time.monotonic()
    failures = 0
    for _ in range(1000):
        f, g, h = (ve.random_element(rng, 6) for _ in range(3))
        k = random_point(rng)
        checks = [
            ve.compose(ve.compose(f, g), h) == ve.compose(f, ve.compose(g, h)),
            ve.compose(f, ve.invert(f)).is_identity(),
            ve.compose(ve.invert(f), f).is_identity(),
            ve.apply_point(ve.compose(f, g), k) == ve.apply_point(g, ve.apply_point(f, k)),
            ve.reduce(ve.reduce(f)) == ve.reduce(f),
        ]
        failures += checks.count(False)
    elapsed = time.monotonic() - start
    assert failures == 0
    assert elapsed < 10, f"took {elapsed:.1f} s"


# -- 2 ------------------------------------------------------------------------------------


@criterion(2, "QT structure: cycle of (001), one cycle at radius 8, aperiodic balls acyclic, degree 3")
def test_qt_structure():
    cyc = detect_cycle(K001)
    assert len(cyc) == 3
    assert set(cyc.vertices) == {K001, point("1", "001"), point("01", "001")}
    g = build_qt_ball(K001, 8)
    assert g.cycle_rank() == 1 and len(nx.cycle_basis(nx_graph(g))) == 1
    assert all(g.degree(v) == 3 for v in g.interior())
    rng = random.Random(2)
    for _ in range(20):
        g = build_qt_ball(aperiodic_base(rng), 8)
        assert g.cycle_rank() == 0 and nx.is_tree(nx_graph(g))
        assert all(g.degree(v) == 3 for v in g.interior())


# -- 3 ------------------------------------------------------------------------------------


@criterion(3, "band components within bounds in radius-10 QT balls, d <= 4")
def test_band_bounds():
    rng = random.Random(3)
    bases = [K001, point("", "01"), point("", "0"), point("110", "0111"), aperiodic_base(rng)]
    violations = checked = 0
    for base in bases:
        g = build_qt_ball(base, 10)
        cyc = set(detect_cycle(base).vertices)
        f = f_values(g)
        ms = range(min(f.values()), max(f.values()) + 1)
        for d in range(5):
            for m in ms:
                for comp in band_components(g, base, m, d):
                    checked += 1
                    if len(comp) > band_bound(base, d, bool(comp & cyc)):
                        violations += 1
    assert checked > 0 and violations == 0


# -- 4 ------------------------------------------------------------------------------------


@criterion(4, "discrepancy values near a vertex and zero increments around 500 closed paths")
def test_discrepancy():
    rng = random.Random(4)
    k = aperiodic_base(rng)
    k0 = k.prepend("0")
    expected = {"": -1, "0": 0, "1": 0, "00": 1, "10": 1, "01": 1, "11": 1}
    expected.update({w: 2 for w in ["000", "100", "010", "110", "001", "011", "111"]})
    for w, val in expected.items():
        assert discrepancy(k0, k0, k.prepend(w)) == val
    g = build_qt_ball(k0, 6)
    bfs = f_values(g)
    assert all(bfs[v] - bfs[k0] == discrepancy(k0, k0, v) for v in g.vertices)

    sums = []
    for base in [K001, point("", "0"), point("1", "011"), k]:
        ball = build_qt_ball(base, 6)
        adj = ball.adjacency
        verts = sorted(ball.vertices, key=str)
        for _ in range(125):
            start = rng.choice(verts)
            walk = [start]
            for _ in range(rng.randint(1, 12)):
                walk.append(rng.choice(sorted(adj[walk[-1]], key=str)))
            walk += qt_geodesic(walk[-1], start)[1:]
            sums.append(sum(edge_increment(a, b) for a, b in zip(walk, walk[1:])))
    assert len(sums) == 500 and not any(sums)


# -- 5 ------------------------------------------------------------------------------------


def _shortcut_audit(g, gens, max_len):
    """Run the shortcut procedure on every simple cycle; return (cycles, emitted, unsound)."""
    G = nx_graph(g)
    maps = dict(gens)
    cycles = emitted = unsound = 0
    for cyc in nx.simple_cycles(G, length_bound=max_len):
        if len(cyc) < 3:
            continue
        cycles += 1
        r = find_shortcut(g, cyc, gens)
        if r is None:
            continue
        emitted += 1
        n = len(cyc)
        arc = (cyc.index(r.y) - cyc.index(r.x)) % n
        p = r.x
        for lab in r.labels:
            p = ve.apply_point(maps[lab], p)
        ok = (verify_shortcut(r, cyc, gens) and p == r.y
              and len(r.labels) < min(arc, n - arc)
              and nx.shortest_path_length(G, r.x, r.y) <= len(r.labels))
        unsound += not ok
    return cycles, emitted, unsound


@criterion(5, "shortcut procedure sound on every simple cycle of length <= 20")
def test_shortcuts():
    gens = ve.symmetrize([("x0", ve.X0), ("x1", ve.X1)])
    g = build_action_graph(gens, point("1", "0"), 10)
    assert not g.truncated
    _, _, unsound = _shortcut_audit(g, gens, 20)
    assert unsound == 0
    # this ball is a tree up to loops and parallel edges, so the procedure is
    # also run on graphs that do have cycles
    assert nx.is_tree(nx_graph(g))
    dist = ve.symmetrize([("g", ve.PrefixMap.parse("00>10;01>01;10>00;11>11")),
                          ("h", ve.PrefixMap.parse("000>00;001>010;01>011;10>100;110>101;111>11"))])
    g = build_action_graph(dist, point("", "01"), 10)
    cycles, emitted, unsound = _shortcut_audit(g, dist, 14)
    assert cycles > 0 and emitted > 0 and unsound == 0
    vgens = ve.symmetrize(list(ve.standard_generators().items()))
    g = build_action_graph(vgens, point("1", "0"), 5)
    cycles, emitted, unsound = _shortcut_audit(g, vgens, 8)
    assert cycles > 0 and emitted > 0 and unsound == 0


# -- 6 ------------------------------------------------------------------------------------


@criterion(6, "bottleneck: trees pass at 1, C12 fails at 1, QT ball of (001) passes at <= 3")
def test_bottleneck():
    rng = random.Random(6)
    for _ in range(5):
        T = nx.random_labeled_tree(30, seed=rng.randint(0, 10 ** 6))
        assert bottleneck_check(graph_from_edges(list(T.edges()), 0), 1).ok
    c12 = graph_from_edges([(i, (i + 1) % 12) for i in range(12)], 0)
    assert not bottleneck_check(c12, 1).ok
    rep = bottleneck_check(build_qt_ball(K001, 8), 3)
    assert rep.checked > 0 and rep.ok and rep.minimal_delta <= 3


# -- 7 ------------------------------------------------------------------------------------


@criterion(7, "Z^2 stabilizer witnesses for d0d1, d0d1^-1 on 50 random points, bound 8")
def test_z2_witness():
    d0, d1 = ve.deferment(ve.X0, "0"), ve.deferment(ve.X0, "1")
    g, h = ve.compose(d0, d1), ve.compose(d0, ve.invert(d1))
    rng = random.Random(7)
    found = 0
    for _ in range(50):
        k = random_point(rng, 8, 5)
        w = z2_stabilizer_witness(g, h, k, 8)
        if w is None:
            continue
        assert (w.n, w.m) != (w.n2, w.m2)
        elem = ve.compose(ve.power(g, w.n - w.n2), ve.power(h, w.m - w.m2))
        if elem == w.element and not elem.is_identity() and ve.apply_point(elem, k) == k:
            found += 1
    assert found == 50


# -- 8 ------------------------------------------------------------------------------------


@criterion(8, "transducer fixture values")
def test_transducer_fixture():
    H = tr.paper_h()
    assert tr.synchronizing_level(H, 10) == 2
    assert tr.is_identity(tr.compose(H, H), 12)
    assert tr.apply_point(H, ZERO) == point("", "10")
    z = "1100"
    out, _ = tr.apply_word(H, z + "00")
    assert out.endswith("010")
    zp = out[:-3]
    assert tr.apply_point(H, point(z + "00", "0")).in_cone(zp + "010")
    assert tr.cone_image(H, z + "00") == (zp + "010",)
    assert tr.preimage_point(H, point(zp + "010", "0")) == point(z + "00", "10")
    a = ve.deferment(ve.X0, z + "00")
    assert ve.apply_point(a, point(z + "00", "10")) == point(z + "0001", "10")


# -- 9 ------------------------------------------------------------------------------------


@criterion(9, "conjugation by h is equivariant on 1000 points per element; a^h is not order-preserving")
def test_conjugation():
    H = tr.paper_h()
    z = "1100"
    elements = [ve.X0, ve.X1, ve.deferment(ve.X0, z + "00"), ve.deferment(ve.X1, "01"),
                ve.deferment(ve.X0, "1")]
    rng = random.Random(9)
    bad = 0
    for g in elements:
        gh = tr.conjugate_v_element(H, g)
        for _ in range(1000):
            k = random_point(rng, 10, 5)
            bad += tr.apply_point(H, ve.apply_point(g, k)) != ve.apply_point(gh, tr.apply_point(H, k))
    assert bad == 0
    ah = tr.conjugate_v_element(H, ve.deferment(ve.X0, z + "00"))
    assert not ve.is_order_preserving(ah)


# -- 10 -----------------------------------------------------------------------------------


def _smooth(n, primes):
    n = abs(n)
    for p in primes:
        while n % p == 0:
            n //= p
    return n == 1


def _oracle_member(f, primes):
    """Direct check: breakpoints have denominators built from ``primes``, slopes are products of them."""
    return (all(_smooth(x.denominator, primes) for x in f.breakpoints)
            and all(_smooth(s.numerator, primes) and _smooth(s.denominator, primes) for s in f.slopes))


def _random_knot_map(rng):
    n = rng.randint(1, 3)
    den = rng.choice([4, 6, 8, 10, 12, 16, 18])
    xs = sorted(rng.sample(range(1, den), n))
    ys = sorted(rng.sample(range(1, den), n))
    knots = [(0, 0)] + [(Fr(x, den), Fr(y, den)) for x, y in zip(xs, ys)] + [(1, 1)]
    return pl.PLMap.from_knots(knots)


@criterion(10, "PL suite: membership, slope cyclicity, PL/V round trips, exact equivariance")
def test_pl_suite():
    rng = random.Random(10)
    sample = []
    for _ in range(70):
        sample += [pl.random_f(rng), pl.random_stein(rng), _random_knot_map(rng)]
    sample = sample[:200]
    for f in sample:
        assert pl.membership(f, pl.F_PARAMS) == _oracle_member(f, (2,))
        assert pl.membership(f, pl.STEIN_PARAMS) == _oracle_member(f, (2, 3))
    members = {"F": [f for f in sample if _oracle_member(f, (2,))],
               "S": [f for f in sample if _oracle_member(f, (2, 3))]}
    for key, params in (("F", pl.F_PARAMS), ("S", pl.STEIN_PARAMS)):
        group = members[key]
        assert len(group) > 20
        for _ in range(200):
            f, g = rng.choice(group), rng.choice(group)
            assert pl.membership(pl.compose(f, g), params)
            assert pl.membership(pl.invert(f), params)

    assert pl.is_cyclic_slope_group(pl.BSParams((2,), 2))
    assert not pl.is_cyclic_slope_group(pl.BSParams((2, 3), 6))
    assert pl.is_cyclic_slope_group(pl.BSParams((4, 8), 2))

    for _ in range(250):
        v = ve.random_element(rng, 6, 12, order_preserving=True)
        assert pl.pl_to_v(pl.v_to_pl(v)) == v
        f = pl.random_f(rng)
        assert pl.v_to_pl(pl.pl_to_v(f)) == f

    for _ in range(500):
        v = ve.random_element(rng, 6, 12, order_preserving=True)
        k = random_point(rng, 8, 5)
        assert to_dyadic(ve.apply_point(v, k)) == pl.evaluate(pl.v_to_pl(v), to_dyadic(k))


# -- 11 -----------------------------------------------------------------------------------


@criterion(11, "phi brackets: containment, width, nesting, infinity at ends, conjugated and adversarial embeddings")
def test_phi_brackets():
    std = standard_embedding()
    rng = random.Random(11)
    n = 0
    while n < 200:
        k = random_point(rng, 8, 5)
        if k in (ZERO, ONE):
            continue
        n += 1
        bs = phi_brackets(std, k, 8)
        last = bs[-1]
        assert last.status == "interval"
        assert last.contains(to_dyadic(k)) and last.width() <= Fr(1, 2 ** 6)
        for prev, cur in zip(bs, bs[1:]):
            if prev.status == "interval":
                assert cur.status == "interval" and prev.lo <= cur.lo and cur.hi <= prev.hi
    assert phi_bracket(std, ZERO, 8).status == "infinity"
    assert phi_bracket(std, ONE, 8).status == "infinity"

    H = tr.paper_h()
    emb = conjugated_embedding(H)
    for _ in range(50):
        k = random_point(rng, 8, 5)
        pushed = tr.apply_point(H, k)
        got = phi_bracket(emb, k, 8)
        if pushed in (ZERO, ONE):
            assert got.status == "infinity"
            continue
        assert got.status == "interval"
        assert got.contains(to_dyadic(pushed)) and got.width() <= Fr(1, 2 ** 6)

    samples = [random_point(rng, 6, 4) for _ in range(8)]
    assert not verify_equivariance(adversarial_embedding(), pl.X0_PL, samples, 6).ok
    assert verify_equivariance(std, pl.X0_PL, samples, 6).ok


# -- 12 -----------------------------------------------------------------------------------


FLOAT_MODULES = {"math", "cmath", "numpy", "statistics"}
INTEGER_MATH = {"gcd", "lcm", "isqrt", "comb", "factorial"}


def _float_sites(path):
    tree = ast.parse(path.read_text())
    sites = []
    for node in ast.walk(tree):
        if isinstance(node, ast.Constant) and isinstance(node.value, float):
            sites.append((node.lineno, "float literal"))
        elif isinstance(node, ast.Name) and node.id == "float":
            sites.append((node.lineno, "float()"))
        elif isinstance(node, ast.Import):
            if any(a.name.split(".")[0] in FLOAT_MODULES for a in node.names):
                sites.append((node.lineno, "float library"))
        elif isinstance(node, ast.ImportFrom) and (node.module or "").split(".")[0] in FLOAT_MODULES:
            if node.module != "math" or any(a.name not in INTEGER_MATH for a in node.names):
                sites.append((node.lineno, "float library"))
        elif isinstance(node, ast.Attribute) and node.attr in ("random", "uniform", "gauss"):
            sites.append((node.lineno, "float RNG"))
    return sites


@criterion(12, "whole suite under 5 minutes; no floating point in the library or assertions")
@pytest.mark.runs_last
def test_budget_and_exactness(request):
    files = sorted((ROOT / "src" / "thompsonv").glob("*.py")) + sorted((ROOT / "tests").glob("*.py"))
    # this module names float only to look for it
    sites = {f.name: s for f in files if f.name != "test_acceptance.py" and (s := _float_sites(f))}
    assert sites == {}
    # every division in the library runs on Fractions: spot-check the numeric outputs
    rng = random.Random(12)
    for _ in range(50):
        f = pl.random_stein(rng)
        vals = list(f.breakpoints) + list(f.slopes) + [pl.evaluate(f, Fr(rng.randint(0, 36), 36))]
        vals += [x for iv in pl.support_intervals(f) for x in iv]
        assert all(isinstance(x, (int, Fr)) for x in vals)
        assert isinstance(to_dyadic(random_point(rng)), Fr)
    elapsed = time.monotonic() - request.session.started_at
    assert elapsed < 300, f"suite took {elapsed:.0f} s"
