"""
tree-build: tree of spheres from a family's scaling scheme, or from the
path fixture A_{n,k} = t_k⁻ⁿ z.
"""
from __future__ import annotations

import argparse

from ratlimits.cli.common import CommandOutput, json_output, write_artifact
from ratlimits.config import Settings
from ratlimits.core.rescaling import geometric_schedule, left_class_limits
from ratlimits.core.spheretree import SphereTree, build_tree, hausdorff_residual, path_fixture, tree_from_scheme
from ratlimits.errors import SchemaError
from ratlimits.models.reports import JunctionReport, TreeReport
from ratlimits.models.schemas import FamilyModel, PointModel, load_model


def register(subparsers, parents) -> None:
    p = subparsers.add_parser("tree-build", parents=parents, help="tree of spheres for independent scalings")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--family", help="family JSON; spheres are the scheme levels 0..N")
    src.add_argument("--path", type=int, metavar="SIZE", help="path fixture with SIZE spheres")
    p.add_argument("--levels", type=int, default=2, help="scheme levels N (with --family)")
    p.add_argument("--start", default="0.1", help="path fixture schedule start")
    p.add_argument("--ratio", default="0.1", help="path fixture schedule ratio")
    p.add_argument("--count", type=int, default=7, help="path fixture schedule length")
    p.add_argument("--k", type=int, default=-1, help="schedule index for the Hausdorff residual")
    p.add_argument("--dot", help="write the tree graph in DOT format here")
    p.set_defaults(handler=run, inputs=("family",))


def tree_report(tree: SphereTree, residual: float | None) -> TreeReport:
    return TreeReport(
        spheres=list(tree.index),
        points=[
            {"from": n, "on": m, "point": PointModel.from_point(p).model_dump(exclude_none=True)}
            for (n, m), p in sorted(tree.points.items())
        ],
        junctions=[
            JunctionReport(members=[{"sphere": n, "point": PointModel.from_point(p).model_dump(exclude_none=True)}
                                    for n, p in j.members])
            for j in tree.junctions
        ],
        adjacency=[list(e) for e in tree.edges()],
        hausdorff_residual=residual,
        dot=tree.to_dot(),
    )


def run(args: argparse.Namespace, cfg: Settings) -> CommandOutput:
    if args.family:
        F = load_model(args.family, FamilyModel).to_core()
        tree = tree_from_scheme(left_class_limits(F, args.levels, cfg), cfg=cfg)
    else:
        if args.path < 1:
            raise SchemaError("--path needs at least one sphere", size=args.path)
        schedule = [float(t) for t in geometric_schedule(args.start, args.ratio, args.count)]
        tree = build_tree(path_fixture(schedule, args.path), cfg)
    k = args.k % len(next(iter(tree.scalings.values())))
    residual = hausdorff_residual(tree, k, cfg)
    write_artifact(args.dot, tree.to_dot())
    return json_output(tree_report(tree, residual), **{"tree.dot": tree.to_dot()})
