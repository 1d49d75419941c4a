"""
iterate --map f.json --times n: the n-th iterate and its reduced form.
"""
from __future__ import annotations

import argparse

from ratlimits.cli.common import CommandOutput, json_output
from ratlimits.config import Settings
from ratlimits.core.ratmap import iterate, reduce
from ratlimits.errors import SchemaError
from ratlimits.models.reports import MapReport, ReduceReport
from ratlimits.models.schemas import MapModel, load_model


def register(subparsers, parents) -> None:
    p = subparsers.add_parser("iterate", parents=parents, help="n-th iterate of a map")
    p.add_argument("--map", dest="map_path", required=True, help="map JSON")
    p.add_argument("--times", type=int, default=2, help="number of iterations n ≥ 1")
    p.set_defaults(handler=run, inputs=("map_path",))


def run(args: argparse.Namespace, cfg: Settings) -> CommandOutput:
    if args.times < 1:
        raise SchemaError("--times must be at least 1", times=args.times)
    f = load_model(args.map_path, MapModel).to_core()
    h = iterate(f, args.times, cfg)
    return json_output(MapReport(map=MapModel.from_map(h), reduced=ReduceReport.from_reduced(reduce(h, cfg))))
