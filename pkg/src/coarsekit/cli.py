"""Command-line front end.  Every output carries a run manifest."""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .boundary import boundary_model, cross_ratio_chain, shadow_annuli, verify_chain
from .cayley import BallTooLarge, Presentation, generate_ball, read_presentation
from .ccomplex import build_coarse, build_exact, stats
from .patterns import coset_pattern, discreteness_profile, grid_lines_pattern
from .pipeline import dynamics_report
from .rigidity import KTooSmall, Pairing, check_axioms, construct_q, verify_qi, verify_uniform_properness
from .serialize import (
    ball_from_json,
    closed_set_from_json,
    jsonable,
    pattern_from_json,
    predicate_from_json,
    predicate_json,
)
from .stallings import SubgroupPredicate, enumerate_cosets, fold, height, is_malnormal, width


class DomainError(Exception):
    pass


def load_constants() -> dict:
    return json.loads(resources.files("coarsekit").joinpath("data/constants.json").read_text())


def threads() -> int:
    raw = os.environ.get("COARSEKIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise DomainError(f"COARSEKIT_THREADS must be an integer, got {raw!r}")


def _versions() -> dict:
    import networkx
    import numpy
    import scipy

    return {"coarsekit": __version__, "numpy": numpy.__version__, "scipy": scipy.__version__, "networkx": networkx.__version__}


def manifest(argv: Sequence[str], args: argparse.Namespace, seeds: dict | None = None) -> dict:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}
    digest = hashlib.sha256(json.dumps(jsonable(config), sort_keys=True).encode()).hexdigest()
    return {
        "command": ["coarsekit", *argv],
        "configDigest": digest,
        "seeds": seeds or {},
        "versions": _versions(),
        "constants": load_constants(),
        "threads": threads(),
    }


def _emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def write_json(payload: dict, out: str, man: dict) -> None:
    doc = {"manifest": man, **jsonable(payload)}
    _emit(json.dumps(doc, indent=2, sort_keys=False) + "\n", out)


def _read_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise DomainError(f"no such file: {path}")
    except json.JSONDecodeError as e:
        raise DomainError(f"{path} is not valid JSON: {e}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _int_range(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return _int_list(text)


def _subgroup(args) -> SubgroupPredicate:
    if getattr(args, "subgroup", None):
        return predicate_from_json(_read_json(args.subgroup))
    if getattr(args, "kernel", False):
        return SubgroupPredicate.abelianization_kernel(args.rank)
    if getattr(args, "gens", None):
        p = Presentation.free(args.rank)
        words = [p.parse(w.strip()) for w in args.gens.split(";") if w.strip()]
        return SubgroupPredicate.of(fold(words, args.rank))
    raise DomainError("give --subgroup FILE, --gens WORDS or --kernel")


# ------------------------------------------------------------ subcommands


def cmd_ball(args, argv):
    if args.presentation:
        pres = read_presentation(args.presentation)
    else:
        pres = Presentation.free(args.rank)
    ball = generate_ball(pres, args.radius, vertex_cap=args.vertex_cap)
    write_json(ball.to_json(), args.out, manifest(argv, args))


def _scan_json(scan, pres) -> dict:
    return {
        "value": scan.value,
        "radius": scan.radius,
        "stable": scan.stable,
        "certificate": [pres.format(c.representative) for c in scan.certificate],
    }


def cmd_subgroup(args, argv):
    pred = _subgroup(args)
    if pred.kind != "coreGraph":
        raise DomainError("height, width and malnormality need a finitely generated subgroup")
    pres = Presentation.free(pred.rank)
    out = predicate_json(pred)
    out["generatorsFound"] = [pres.format(w) for w in pred.core.generators()]
    if args.height:
        out["height"] = _scan_json(height(pred.core, args.radius, args.dedupe), pres)
    if args.width:
        out["width"] = _scan_json(width(pred.core, args.radius, args.dedupe), pres)
    if args.malnormal:
        m = is_malnormal(pred.core, args.radius)
        out["malnormal"] = {
            "value": m.answer,
            "witness": None if m.witness is None else pres.format(m.witness),
            "radius": m.radius,
            "stable": m.stable,
        }
    write_json(out, args.out, manifest(argv, args))


def _profile_spec(tokens: Sequence[str]) -> tuple[int, list[int]]:
    N, radii = None, None
    for tok in tokens:
        key, _, val = tok.partition("=")
        if key == "N":
            N = int(val)
        elif key == "R":
            radii = _int_range(val)
        else:
            raise DomainError(f"profile takes N=.. and R=.., got {tok!r}")
    if N is None or radii is None:
        raise DomainError("profile needs both N= and R=")
    return N, radii


def cmd_pattern(args, argv):
    pred = _subgroup(args)
    if args.ball:
        ball = ball_from_json(_read_json(args.ball))
    else:
        ball = generate_ball(Presentation.free(pred.rank), args.radius)
    out: dict = {}
    if args.joins or not args.profile:
        out.update(coset_pattern(ball, pred, args.far_threshold, args.nondegenerate_only).to_json())
    else:
        out.update({"graph": {"kind": "cayley_ball", "radius": ball.radius}, "family": [], "labels": []})
    if args.profile:
        N, radii = _profile_spec(args.profile)
        prof = discreteness_profile(pred, N, radii, arm=args.arm)
        out["profile"] = {str(r): c for r, c in zip(radii, prof)}
    write_json(out, args.out, manifest(argv, args))


def cmd_ccx(args, argv):
    pred = _subgroup(args)
    if pred.kind != "coreGraph":
        raise DomainError("C-complexes are built for finitely generated subgroups")
    window = generate_ball(Presentation.free(pred.rank), args.radius)
    cosets = enumerate_cosets(pred, window)
    if args.mode == "exact":
        c = build_exact(pred.core, args.radius, cosets)
    else:
        pat_radius = args.pattern_radius or args.radius + 5
        p = coset_pattern(generate_ball(Presentation.free(pred.rank), pat_radius), pred).subpattern(cosets)
        c = build_coarse(p, args.threshold, args.k)
    man = manifest(argv, args)
    dot = args.format == "dot" or (args.format is None and args.out.endswith(".dot"))
    if dot:
        _emit("// manifest: " + json.dumps(man, sort_keys=True) + "\n" + c.to_dot(), args.out)
        return
    st = stats(c)
    payload = c.to_json()
    payload["stats"] = {"maxCellDimension": st.max_cell_dimension, "maxCliqueSize": st.max_clique_size}
    write_json(payload, args.out, man)


def cmd_rigidity(args, argv):
    p1 = pattern_from_json(_read_json(args.p1))
    p2 = pattern_from_json(_read_json(args.p2))
    phi = Pairing.from_json(_read_json(args.pairing)) if args.pairing else Pairing.identity(len(p1))
    if len(phi.map) != len(p1) or max(phi.map.values(), default=-1) >= len(p2):
        raise DomainError("pairing does not match the member counts of the patterns")
    q = construct_q(p1, p2, phi, args.K, args.w2)
    name1 = _namer(p1.graph)
    name2 = _namer(p2.graph)
    out: dict = {"K": args.K, "w2": args.w2, "q": [[name1(g), name2(h)] for g, h in sorted(q.items())]}
    if args.verify:
        qi = verify_qi(q, p1, p2, phi, sample_count=args.sample_count, seed=args.seed)
        env = verify_uniform_properness(p1, p2, phi)
        out["qi"] = qi.to_json()
        out["properness"] = {
            "forward": env.forward,
            "backward": env.backward,
            "blowup": env.blowup,
            "witness": env.witness,
            "sampleCount": env.sample_count,
        }
    write_json(out, args.out, manifest(argv, args, {"qi": args.seed}))


def _namer(graph):
    pres = getattr(graph, "presentation", None)
    if pres is not None:
        return lambda v: pres.format(graph.words[v])
    return lambda v: str(graph.names[v])


def cmd_boundary(args, argv):
    model = boundary_model(args.rank, args.depth)
    ball = generate_ball(Presentation.free(args.rank), args.radius)
    system = shadow_annuli(ball, model, args.shadows)
    out: dict = {"depth": args.depth, "rank": args.rank, "annuli": len(system)}
    if args.with_system:
        out["system"] = system.to_json()
    if args.crossratio:
        K, L = (closed_set_from_json(_read_json(f)) for f in args.crossratio)
        if K.model != model or L.model != model:
            raise DomainError("closed sets must be given at the same depth and rank as --depth/--rank")
        chain = cross_ratio_chain(K, L, system)
        fmt = lambda s: ["".join(chr(96 + x) if x > 0 else chr(64 - x) for x in w) for w in s.points]
        out["crossRatio"] = {
            "value": chain.length,
            "chain": [{"index": i, "minus": fmt(system.annuli[i].minus), "plus": fmt(system.annuli[i].plus)} for i in chain.annuli],
            "verified": verify_chain(K, L, chain, system),
        }
    write_json(out, args.out, manifest(argv, args))


def cmd_axioms(args, argv):
    if args.pattern:
        p = pattern_from_json(_read_json(args.pattern))
    elif args.grid_lines is not None:
        p = grid_lines_pattern(args.grid_lines, args.spacing)
    else:
        pred = _subgroup(args)
        p = coset_pattern(generate_ball(Presentation.free(pred.rank), args.radius), pred)
    rep = check_axioms(p, args.k, args.n)
    write_json(rep.to_json(), args.out, manifest(argv, args))


def cmd_report(args, argv):
    gens = [w.strip() for w in args.gens.split(";") if w.strip()]
    rep = dynamics_report(
        gens,
        translation=args.translation,
        radius=args.radius,
        window=args.window,
        depth=args.depth,
        shadows=args.shadows,
        K=args.K,
        w2=args.w2,
    )
    write_json(rep.to_json(), args.out, manifest(argv, args))


# ----------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="coarsekit", description="Coarse geometry of subgroup patterns in free groups.")
    sub = ap.add_subparsers(dest="command", metavar="{ball,subgroup,pattern,ccx,rigidity,boundary,axioms,report}")
    sub.required = True

    def common(p, out_default="-"):
        p.add_argument("--out", default=out_default, help="output path, '-' for stdout (default: %(default)s)")

    def subgroup_args(p):
        p.add_argument("--subgroup", metavar="FILE", help="subgroup JSON (core graph, predicate or generator words)")
        p.add_argument("--gens", metavar="WORDS", help='generator words separated by ";", e.g. "a; b a b^-1"')
        p.add_argument("--kernel", action="store_true", help="use the kernel of the abelianisation")
        p.add_argument("--rank", type=int, default=2, help="free group rank (default: %(default)s)")

    p = sub.add_parser("ball", help="enumerate a Cayley ball")
    p.add_argument("--presentation", metavar="FILE", help="presentation text file (default: free group)")
    p.add_argument("--rank", type=int, default=2, help="rank of the free group when no presentation is given")
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--vertex-cap", type=int, default=2_000_000, help="refuse balls larger than this")
    common(p)
    p.set_defaults(func=cmd_ball)

    p = sub.add_parser("subgroup", help="fold a subgroup; height, width, malnormality")
    subgroup_args(p)
    p.add_argument("--height", action="store_true")
    p.add_argument("--width", action="store_true")
    p.add_argument("--malnormal", action="store_true")
    p.add_argument("--radius", type=int, default=4, help="conjugator radius (default: %(default)s)")
    p.add_argument("--dedupe", action="store_true", help="drop conjugates equal as subgroups")
    common(p)
    p.set_defaults(func=cmd_subgroup)

    p = sub.add_parser("pattern", help="coset joins and discreteness profiles")
    subgroup_args(p)
    p.add_argument("--ball", metavar="FILE", help="ball JSON (default: free ball of --radius)")
    p.add_argument("--radius", type=int, default=6)
    p.add_argument("--joins", action="store_true", help="export the join pattern")
    p.add_argument("--far-threshold", type=int, default=None)
    p.add_argument("--nondegenerate-only", action="store_true")
    p.add_argument("--profile", nargs="+", metavar="N=n|R=a..b", help="discreteness profile, e.g. N=2 R=3..8")
    p.add_argument("--arm", type=int, default=1, help="minimum arm length in the profile")
    common(p)
    p.set_defaults(func=cmd_pattern)

    p = sub.add_parser("ccx", help="exact or coarse C-complex")
    subgroup_args(p)
    p.add_argument("--radius", type=int, default=3, help="coset window radius (default: %(default)s)")
    p.add_argument("--mode", choices=["exact", "coarse"], default="exact")
    p.add_argument("--threshold", type=int, default=6, help="coarse overlap diameter threshold")
    p.add_argument("--k", type=int, default=2, help="neighbourhood radius in coarse mode")
    p.add_argument("--pattern-radius", type=int, default=None, help="ball radius for coarse mode (default: radius + 5)")
    p.add_argument("--format", choices=["json", "dot"], default=None, help="default: dot if --out ends in .dot")
    common(p)
    p.set_defaults(func=cmd_ccx)

    p = sub.add_parser("rigidity", help="build q from a pairing of pattern spaces")
    p.add_argument("--p1", required=True, metavar="FILE")
    p.add_argument("--p2", required=True, metavar="FILE")
    p.add_argument("--pairing", metavar="FILE", help="pairing JSON (default: identity)")
    p.add_argument("--K", type=int, default=1)
    p.add_argument("--w2", type=int, default=1)
    p.add_argument("--verify", action="store_true", help="also estimate QI and properness envelopes")
    p.add_argument("--sample-count", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_rigidity)

    p = sub.add_parser("boundary", help="shadow annuli and cross-ratios on the tree boundary")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--rank", type=int, default=2)
    p.add_argument("--radius", type=int, default=6, help="ball radius supplying shadow centres")
    p.add_argument("--shadows", type=_int_list, default=[1, 2, 3], help="comma-separated shadow radii")
    p.add_argument("--crossratio", nargs=2, metavar=("K.json", "L.json"))
    p.add_argument("--with-system", action="store_true", help="include every annulus in the output")
    common(p)
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("axioms", help="measure the pattern-space conditions")
    subgroup_args(p)
    p.add_argument("--pattern", metavar="FILE")
    p.add_argument("--grid-lines", type=int, metavar="RADIUS", help="use axis lines in a square grid")
    p.add_argument("--spacing", type=int, default=5)
    p.add_argument("--radius", type=int, default=6)
    p.add_argument("--k", type=_int_list, default=[1, 2])
    p.add_argument("--n", type=_int_list, default=[1, 2, 3])
    common(p)
    p.set_defaults(func=cmd_axioms)

    p = sub.add_parser("report", help="end-to-end run on a translation self-pairing")
    p.add_argument("--gens", default="a", help='subgroup generators separated by ";"')
    p.add_argument("--translation", default="b")
    p.add_argument("--radius", type=int, default=6)
    p.add_argument("--window", type=int, default=2)
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--shadows", type=_int_list, default=[1, 2, 3])
    p.add_argument("--K", type=int, default=1)
    p.add_argument("--w2", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_report)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        threads()
        args.func(args, argv)
    except (DomainError, ValueError, KeyError, BallTooLarge, KTooSmall) as e:
        print(f"coarsekit {args.command}: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
