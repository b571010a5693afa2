"""JSON readers and writers for the domain objects."""
from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources
from typing import Any

import numpy as np

from .boundary import ClosedSet, boundary_model, limit_set_approx
from .cayley import CayleyBall, Presentation, generate_ball
from .graphs import MetricGraph
from .patterns import PatternSpace
from .stallings import CoreGraph, CosetId, SubgroupPredicate, fold


def rational(x: Fraction | int) -> dict:
    x = Fraction(x)
    return {"num": x.numerator, "den": x.denominator}


def from_rational(d: dict) -> Fraction:
    return Fraction(d["num"], d["den"])


def presentation_json(p: Presentation) -> dict:
    return {"generators": list(p.generators), "relators": [p.format(r) for r in p.relators], "kind": p.kind}


def presentation_from_json(d: dict) -> Presentation:
    return Presentation.from_strings(d["generators"], d.get("relators", []), d.get("kind"))


def ball_from_json(d: dict) -> CayleyBall:
    """Regenerate a ball from its export and check it matches."""
    ball = generate_ball(presentation_from_json(d["presentation"]), int(d["radius"]))
    if "vertices" in d and len(d["vertices"]) != ball.n:
        raise ValueError("ball file does not match its presentation and radius")
    return ball


def predicate_json(s: SubgroupPredicate) -> dict:
    if s.kind == "abelianizationKernel":
        return {"kind": s.kind, "rank": s.rank}
    return {"kind": s.kind, "rank": s.rank, "core": s.core.to_json()}


def predicate_from_json(d: dict) -> SubgroupPredicate:
    """Accepts a predicate export, a bare core graph, or a list of generator words."""
    kind = d.get("kind")
    if kind == "abelianizationKernel":
        return SubgroupPredicate.abelianization_kernel(int(d.get("rank", 2)))
    if kind == "coreGraph":
        return SubgroupPredicate.of(CoreGraph.from_json(d["core"]))
    if "edges" in d:
        return SubgroupPredicate.of(CoreGraph.from_json(d))
    if "words" in d:
        p = Presentation.free(int(d.get("rank", 2))) if "names" not in d else Presentation.from_strings(d["names"])
        return SubgroupPredicate.of(fold([p.parse(w) for w in d["words"]], p.rank))
    raise ValueError("unrecognised subgroup description")


def pattern_from_json(d: dict) -> PatternSpace:
    ref = d["graph"]
    if ref["kind"] == "cayley_ball":
        graph: MetricGraph = generate_ball(presentation_from_json(ref["presentation"]), int(ref["radius"]))
        p = graph.presentation
        vertex = lambda name: graph.index[p.parse(name)]
        label = lambda lab: CosetId.of(p.parse(lab)) if isinstance(lab, str) else lab
    else:
        names = [tuple(v) if isinstance(v, list) else v for v in ref["vertices"]]
        graph = MetricGraph(names, [tuple(e) for e in ref["edges"]])
        vertex = lambda name: graph.index[tuple(name) if isinstance(name, list) else name]
        label = lambda lab: tuple(lab) if isinstance(lab, list) else lab
    family = [[vertex(v) for v in s] for s in d["family"]]
    labels = [label(x) for x in d.get("labels", [])]
    return PatternSpace(graph, family, labels, list(d.get("degenerate", [])))


def closed_set_from_json(d: dict) -> ClosedSet:
    """Either explicit points on a model, or a coset limit set."""
    depth = int(d["depth"])
    if "points" in d:
        rank = int(d.get("rank", 2))
        p = Presentation.free(rank)
        return boundary_model(rank, depth).set_of(p.parse(w) for w in d["points"])
    pred = predicate_from_json(d["subgroup"])
    coset = Presentation.free(pred.rank).parse(d.get("coset", "1"))
    return limit_set_approx(pred, coset, depth)


def closed_set_json(s: ClosedSet) -> dict:
    p = Presentation.free(s.model.rank)
    return {"depth": s.model.depth, "rank": s.model.rank, "points": [p.format(w) for w in s.points]}


def jsonable(x: Any) -> Any:
    """Turn Fractions, tuples and numpy scalars into plain JSON values."""
    if isinstance(x, Fraction):
        return rational(x)
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    return x


def bundled_subgroups() -> dict[str, SubgroupPredicate]:
    """The small test subgroups of F2 shipped with the package."""
    data = json.loads(resources.files("coarsekit").joinpath("data/subgroups.json").read_text())
    p = Presentation.free(2)
    return {name: SubgroupPredicate.of(fold([p.parse(w) for w in gens], 2)) for name, gens in data.items()}
