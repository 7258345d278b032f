"""Command-line front end: ``thompsonv <group> <command> [options]``.

Exit status is 0 on success, 1 when the input is well formed but the
operation fails (domain error), and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction

from . import actiongraph as ag
from . import plhomeo as pl
from . import semiconj as sc
from . import transducer as tr
from . import velement as ve
from .cantor import RationalPoint


class DomainError(Exception):
    pass


def _element(text: str) -> ve.PrefixMap:
    if text in ve.standard_generators():
        return ve.standard_generators()[text]
    try:
        return ve.PrefixMap.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def _point(text: str) -> RationalPoint:
    try:
        return RationalPoint.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def _plmap(text: str) -> pl.PLMap:
    if text in ("x0", "x1"):
        return pl.X0_PL if text == "x0" else pl.X1_PL
    try:
        return pl.PLMap.parse(text)
    except (ValueError, ZeroDivisionError) as e:
        raise argparse.ArgumentTypeError(str(e))


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as e:
        raise argparse.ArgumentTypeError(str(e))


def _fraction_list(text: str) -> list:
    return [_fraction(t) for t in text.split(",") if t.strip()]


def _generators(text: str) -> list:
    """Comma-separated names of standard generators or element strings; closed under inverses."""
    gens = []
    for i, item in enumerate(t for t in text.split(",") if t.strip()):
        name = item if item in ve.standard_generators() else f"g{i}"
        gens.append((name, _element(item)))
    return ve.symmetrize(gens)


def _machine(text: str) -> tr.Transducer:
    try:
        return tr.load_machine(text)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as e:
        raise argparse.ArgumentTypeError(f"cannot load machine {text!r}: {e}")


def _embedding(text: str) -> sc.Embedding:
    if text == "standard":
        return sc.standard_embedding()
    if text.startswith("conjugated:"):
        return sc.conjugated_embedding(_machine(text.split(":", 1)[1]))
    try:
        with open(text) as fh:
            return sc.Embedding.from_json(fh.read())
    except (OSError, ValueError, KeyError) as e:
        raise argparse.ArgumentTypeError(f"cannot load embedding {text!r}: {e}")


# -- subcommand handlers ---------------------------------------------------------------


def _need_seed(args):
    if args.seed is None:
        raise UsageError("--seed is required for randomized commands")


class UsageError(Exception):
    pass


def elem_cmd(args):
    els = list(args.el or [])
    if args.infile:
        with open(args.infile) as fh:
            els += [_element(line.strip()) for line in fh if line.strip()]
    if not els:
        raise UsageError("--el is required")
    if args.action == "compose":
        return str(ve.product(els))
    if len(els) != 1:
        raise UsageError(f"--el: {args.action} takes exactly one element")
    f = els[0]
    if args.action == "invert":
        return str(ve.invert(f))
    if args.action == "reduce":
        return str(ve.reduce(f))
    if args.action in ("apply", "germ"):
        if args.pt is None:
            raise UsageError("--pt is required")
        if args.action == "apply":
            return str(ve.apply_point(f, args.pt))
        try:
            return str(ve.germ_at(f, args.pt))
        except ve.NotFixedError as e:
            raise DomainError(str(e))
    if args.action == "support":
        s = ve.support(f)
        if args.format == "json":
            return json.dumps({"cones": sorted(s.cones),
                               "deleted_points": [str(p) for p in s.deleted_points],
                               "added_points": [str(p) for p in s.added_points],
                               "cone_closure": list(s.cone_closure())})
        return ";".join(s.cone_closure())
    raise UsageError(f"unknown elem command {args.action}")


def _graph(args):
    if args.action == "qt" or args.gens is None:
        if args.action not in ("qt", "bands", "bottleneck"):
            raise UsageError("--gens is required")
        return ag.build_qt_ball(args.base, args.radius)
    return ag.build_action_graph(args.gens, args.base, args.radius, args.max_vertices)


def graph_cmd(args):
    if args.action == "z2":
        if args.g is None or args.h is None or args.pt is None:
            raise UsageError("--g, --h and --pt are required")
        try:
            w = ag.z2_stabilizer_witness(args.g, args.h, args.pt, args.bound)
        except ValueError as e:
            raise DomainError(str(e))
        if w is None:
            raise DomainError(f"no collision within bound {args.bound}")
        doc = {"n": w.n, "m": w.m, "n2": w.n2, "m2": w.m2, "element": str(w.element)}
        return json.dumps(doc) if args.format == "json" else \
            f"g^{w.n - w.n2} h^{w.m - w.m2} = {w.element}"
    if args.base is None:
        raise UsageError("--base is required")
    g = _graph(args)
    if args.action in ("qt", "schreier"):
        return ag.to_json(g) if args.format == "json" else ag.to_dot(g)
    if args.action == "bands":
        rows = ag.band_statistics(g, args.d)
        if args.format == "json":
            return json.dumps([dict(zip(("m", "d", "components", "max_size"), r)) for r in rows])
        return ag.bands_csv(rows).rstrip("\n")
    if args.action == "bottleneck":
        pairs = "all"
        if args.pairs is not None:
            _need_seed(args)
            pairs = args.pairs
        rep = ag.bottleneck_check(g, args.delta, pairs, seed=args.seed or 0)
        if args.format == "json":
            return json.dumps({"delta": rep.delta, "checked": rep.checked, "passed": rep.passed,
                               "failed": rep.failed, "minimal_delta": rep.minimal_delta,
                               "failures": [[str(x), str(y)] for x, y in rep.failures]})
        return "\n".join(",".join(map(str, r)) for r in rep.as_rows())
    if args.action == "shortcut":
        results = []
        for cyc in ag.fundamental_cycles(g, args.max_length):
            r = ag.find_shortcut(g, cyc, args.gens)
            if r is not None:
                if not ag.verify_shortcut(r, cyc, args.gens):
                    raise AssertionError("unsound shortcut")
                results.append({"cycle_length": len(cyc), "x": str(r.x), "y": str(r.y),
                                "labels": r.labels, "length": len(r)})
        if args.format == "json":
            return json.dumps(results)
        return "\n".join(f"{d['x']} -> {d['y']} len {d['length']} (cycle {d['cycle_length']}): "
                         + " ".join(d["labels"]) for d in results) or "no shortcuts"
    raise UsageError(f"unknown graph command {args.action}")


def trans_cmd(args):
    machines = args.machine or []
    if not machines:
        raise UsageError("--machine is required")
    T = machines[0]
    if args.action == "sync":
        n = tr.synchronizing_level(T, args.depth)
        if n is None:
            raise DomainError(f"not synchronizing within {args.depth}")
        return str(n)
    if args.action == "apply":
        if args.pt is not None:
            try:
                return str(tr.apply_point(T, args.pt))
            except tr.DegenerateOutput as e:
                raise DomainError(str(e))
        if args.word is None:
            raise UsageError("--pt or --word is required")
        out, q = tr.apply_word(T, args.word)
        return json.dumps({"output": out, "state": str(q)}) if args.format == "json" else f"{out} {q}"
    if args.action == "compose":
        if len(machines) != 2:
            raise UsageError("--machine must be given twice")
        return tr.compose(machines[0], machines[1]).to_json()
    if args.action == "conjugate":
        if args.el is None or len(args.el) != 1:
            raise UsageError("--el is required once")
        try:
            return str(tr.conjugate_v_element(T, args.el[0], args.depth))
        except (tr.DepthExceeded, tr.DegenerateOutput, ValueError) as e:
            raise DomainError(str(e))
    raise UsageError(f"unknown trans command {args.action}")


def pl_cmd(args):
    if args.action == "cyclic":
        if not args.gens:
            raise UsageError("--gens is required")
        p = pl.BSParams(tuple(args.gens), 2)
        return "true" if pl.is_cyclic_slope_group(p) else "false"
    maps = args.map or []
    if args.action == "interp":
        if args.n is None or not args.pairs:
            raise UsageError("--n and --pairs are required")
        pts = [tuple(_fraction(t) for t in pair.split(":")) for pair in args.pairs.split(",")]
        try:
            return str(pl.interpolate(pts, pl.f_n_params(args.n)))
        except pl.Infeasible as e:
            raise DomainError(str(e))
    if args.action == "topl":
        if args.el is None or len(args.el) != 1:
            raise UsageError("--el is required once")
        try:
            return str(pl.v_to_pl(args.el[0]))
        except ValueError as e:
            raise DomainError(str(e))
    if not maps:
        raise UsageError("--map is required")
    f = maps[0]
    if args.action == "eval":
        if args.x is None:
            raise UsageError("--x is required")
        try:
            return str(pl.evaluate(f, args.x))
        except ValueError as e:
            raise DomainError(str(e))
    if args.action == "compose":
        return str(pl.product(maps))
    if args.action == "member":
        if not args.gens or args.m is None:
            raise UsageError("--gens and --m are required")
        return "true" if pl.membership(f, pl.BSParams(tuple(args.gens), args.m)) else "false"
    if args.action == "germs":
        gp = pl.germs(f)
        sup = pl.support_intervals(f)
        if args.format == "json":
            return json.dumps({"initial_slope": str(gp.initial_slope), "final_slope": str(gp.final_slope),
                               "support": [[str(a), str(b)] for a, b in sup]})
        return f"{gp.initial_slope} {gp.final_slope}"
    if args.action == "tov":
        try:
            return str(pl.pl_to_v(f))
        except ValueError as e:
            raise DomainError(str(e))
    raise UsageError(f"unknown pl command {args.action}")


def phi_cmd(args):
    emb = args.embedding or sc.standard_embedding()
    if args.action == "bracket":
        if args.pt is None:
            raise UsageError("--pt is required")
        b = sc.phi_bracket(emb, args.pt, args.depth)
        if args.format == "json":
            return json.dumps(b.as_dict())
        return f"[{b.lo}, {b.hi}]" if b.status == "interval" else b.status
    if args.action == "equivariance":
        _need_seed(args)
        if args.map is None:
            raise UsageError("--map is required")
        from .cantor import random_point

        rng = random.Random(args.seed)
        samples = [random_point(rng) for _ in range(args.samples)]
        try:
            rep = sc.verify_equivariance(emb, args.map[0], samples, args.depth)
        except ValueError as e:
            raise DomainError(str(e))
        if args.format == "json":
            return json.dumps(rep.as_dict())
        return "ok" if rep.ok else "\n".join(f"{k}: {why}" for k, why in rep.violations)
    raise UsageError(f"unknown phi command {args.action}")


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    def global_flags(parser, suppress):
        # sub-parsers must not overwrite flags given before the subcommand
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        parser.add_argument("--format", choices=["dot", "json", "csv", "text"], default=d("text"))
        parser.add_argument("--seed", type=int, default=d(None))
        parser.add_argument("--max-vertices", type=int, default=d(100_000))
        parser.add_argument("--depth", type=int, default=d(None),
                            help="search bound (trans, default 12) or bracket depth (phi, default 6)")
        parser.add_argument("--out", default=d(None), help="write output to this file")

    common = argparse.ArgumentParser(add_help=False)
    global_flags(common, True)
    p = argparse.ArgumentParser(prog="thompsonv",
                                description="Exact computations in Thompson's group V.")
    global_flags(p, False)
    sub = p.add_subparsers(dest="group", required=True)

    e = sub.add_parser("elem", parents=[common], help="prefix-replacement elements")
    e.add_argument("action", choices=["compose", "invert", "apply", "support", "germ", "reduce"])
    e.add_argument("--el", type=_element, action="append")
    e.add_argument("--in", dest="infile", help="file with one element per line")
    e.add_argument("--pt", type=_point)
    e.set_defaults(func=elem_cmd)

    g = sub.add_parser("graph", parents=[common], help="orbit graphs and quasi-tree checks")
    g.add_argument("action", choices=["qt", "schreier", "bands", "bottleneck", "shortcut", "z2"])
    g.add_argument("--base", type=_point)
    g.add_argument("--radius", type=int, default=6)
    g.add_argument("--gens", type=_generators)
    g.add_argument("--d", type=int, default=2, help="band width for bands")
    g.add_argument("--delta", type=int, default=3)
    g.add_argument("--pairs", type=int, help="sample this many pairs (needs --seed)")
    g.add_argument("--max-length", type=int, default=20)
    g.add_argument("--g", type=_element)
    g.add_argument("--h", type=_element)
    g.add_argument("--pt", type=_point)
    g.add_argument("--bound", type=int, default=8)
    g.set_defaults(func=graph_cmd)

    t = sub.add_parser("trans", parents=[common], help="transducers")
    t.add_argument("action", choices=["apply", "sync", "compose", "conjugate"])
    t.add_argument("--machine", type=_machine, action="append",
                   help="built-in name (" + ", ".join(tr.BUILTINS) + ") or JSON file")
    t.add_argument("--pt", type=_point)
    t.add_argument("--word")
    t.add_argument("--el", type=_element, action="append")
    t.set_defaults(func=trans_cmd)

    q = sub.add_parser("pl", parents=[common], help="piecewise-linear maps")
    q.add_argument("action", choices=["eval", "compose", "member", "germs", "cyclic", "interp", "tov", "topl"])
    q.add_argument("--map", type=_plmap, action="append")
    q.add_argument("--x", type=_fraction)
    q.add_argument("--gens", type=_fraction_list, help="slope generators, e.g. 2,3")
    q.add_argument("--m", type=int, help="breakpoints lie in Z[1/m]")
    q.add_argument("--n", type=int, help="interpolate in F_n")
    q.add_argument("--pairs", help="x:y pairs, e.g. 1/2:1/4,3/4:1/2")
    q.add_argument("--el", type=_element, action="append")
    q.set_defaults(func=pl_cmd)

    f = sub.add_parser("phi", parents=[common], help="semiconjugacy brackets")
    f.add_argument("action", choices=["bracket", "equivariance"])
    f.add_argument("--embedding", type=_embedding,
                   help="'standard', 'conjugated:<machine>' or a JSON file of x0/x1 images")
    f.add_argument("--pt", "--point", dest="pt", type=_point)
    f.add_argument("--map", type=_plmap, action="append")
    f.add_argument("--samples", type=int, default=20)
    f.set_defaults(func=phi_cmd)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.depth is None:
        args.depth = 6 if args.group == "phi" else 12
    try:
        out = args.func(args)
    except UsageError as e:
        print(f"{parser.prog}: error: {e}", file=sys.stderr)
        return 2
    except (DomainError, ValueError) as e:
        print(f"{parser.prog}: {e}", file=sys.stderr)
        return 1
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out + "\n")
    else:
        print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
