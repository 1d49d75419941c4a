"""
reduce --map m.json: holes, depths, reduction and GIT class of one map.
"""
from __future__ import annotations

import argparse
import logging

from ratlimits.cli.common import CommandOutput, json_output
from ratlimits.config import Settings
from ratlimits.core.ratmap import git_classify, reduce, resultant_vanishes
from ratlimits.models.reports import ReduceReport
from ratlimits.models.schemas import MapModel, load_model

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    p = subparsers.add_parser("reduce", parents=parents, help="reduced form of a possibly degenerate map")
    p.add_argument("--map", dest="map_path", required=True, help="map JSON")
    p.set_defaults(handler=run, inputs=("map_path",))


def run(args: argparse.Namespace, cfg: Settings) -> CommandOutput:
    f = load_model(args.map_path, MapModel).to_core()
    red = reduce(f, cfg)
    extra = {}
    if f.degree >= 1:
        extra = {"resultant_vanishes": resultant_vanishes(f, cfg), "stability": git_classify(f, cfg)}
    logger.info("reduced degree %d map: %d holes", f.degree, len(red.holes))
    return json_output(ReduceReport.from_reduced(red, **extra))
