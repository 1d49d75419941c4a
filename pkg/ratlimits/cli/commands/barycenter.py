"""
barycenter --measure m.json|m.csv → {"center": [x, y, z]} or {"class": "infinity"}.
"""
from __future__ import annotations

import argparse

from ratlimits.cli.common import CommandOutput, json_output
from ratlimits.config import Settings
from ratlimits.core.barycenter import conformal_barycenter, heavy_atom_check
from ratlimits.models.reports import BarycenterReport
from ratlimits.models.schemas import PointModel, load_measure


def register(subparsers, parents) -> None:
    p = subparsers.add_parser("barycenter", parents=parents, help="conformal barycenter of a measure")
    p.add_argument("--measure", required=True, help="measure JSON or CSV")
    p.set_defaults(handler=run, inputs=("measure",))


def run(args: argparse.Namespace, cfg: Settings) -> CommandOutput:
    mu = load_measure(args.measure).normalized()
    heavy = heavy_atom_check(mu, cfg)
    if heavy is not None:
        point, weight = heavy
        return json_output(BarycenterReport(class_="infinity", heavy_atom=PointModel.from_point(point),
                                            heavy_weight=weight))
    res = conformal_barycenter(mu, cfg)
    translation = [[[float(x.real), float(x.imag)] for x in row] for row in res.translation.matrix]
    return json_output(BarycenterReport(
        center=[float(x) for x in res.center.x],
        iterations=res.iterations,
        moment_norm=res.moment_norm,
        translation=translation,
    ))
