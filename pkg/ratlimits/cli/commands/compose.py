"""
compose --outer f.json --inner g.json: the map f∘g of degree deg f·deg g.
"""
from __future__ import annotations

import argparse

from ratlimits.cli.common import CommandOutput, json_output
from ratlimits.config import Settings
from ratlimits.core.ratmap import compose, reduce
from ratlimits.models.reports import MapReport, ReduceReport
from ratlimits.models.schemas import MapModel, load_model


def register(subparsers, parents) -> None:
    p = subparsers.add_parser("compose", parents=parents, help="formal composition outer∘inner")
    p.add_argument("--outer", required=True, help="map JSON applied second")
    p.add_argument("--inner", required=True, help="map JSON applied first")
    p.set_defaults(handler=run, inputs=("outer", "inner"))


def run(args: argparse.Namespace, cfg: Settings) -> CommandOutput:
    f = load_model(args.outer, MapModel).to_core()
    g = load_model(args.inner, MapModel).to_core()
    h = compose(f, g, cfg)
    return json_output(MapReport(map=MapModel.from_map(h), reduced=ReduceReport.from_reduced(reduce(h, cfg))))
