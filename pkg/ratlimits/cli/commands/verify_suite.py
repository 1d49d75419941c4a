"""
verify-suite --tier desk|quick: run the acceptance battery and report per criterion.
"""
from __future__ import annotations

import argparse
import logging

from ratlimits.cli.common import CommandOutput, json_output
from ratlimits.config import Settings
from ratlimits.core.acceptance import TIERS, run_battery
from ratlimits.errors import SchemaError
from ratlimits.models.reports import CriterionResult, VerifyReport

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    p = subparsers.add_parser("verify-suite", parents=parents, help="run the acceptance battery")
    p.add_argument("--tier", choices=tuple(TIERS), default="desk", help="full sizes (desk) or a fast pass (quick)")
    p.add_argument("--only", type=int, action="append", help="criterion number to run; repeatable")
    p.set_defaults(handler=run, inputs=())


def run(args: argparse.Namespace, cfg: Settings) -> CommandOutput:
    only = set(args.only or ())
    if any(not 1 <= c <= 13 for c in only):
        raise SchemaError("criteria are numbered 1 to 13", only=sorted(only))
    outcomes = run_battery(args.tier, cfg, only or None)
    report = VerifyReport(
        tier=args.tier,
        criteria=[
            CriterionResult(id=o.id, name=o.name, status=o.status, seconds=round(o.seconds, 3), detail=o.detail)
            for o in outcomes
        ],
        passed=all(o.status == "pass" for o in outcomes),
    )
    failed = [o.id for o in outcomes if o.status != "pass"]
    if failed:
        logger.warning("criteria not passing: %s", failed)
    return json_output(report)
