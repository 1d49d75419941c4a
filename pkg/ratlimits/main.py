"""
Command-Line Entry Point
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Sequence

from ratlimits.cli.commands import (
    barycenter,
    compose,
    family_analyze,
    iterate,
    mme,
    polylike_detect,
    reduce,
    tree_build,
    verify_suite,
)
from ratlimits.cli.common import common_parser, write_output
from ratlimits.config import configure, load_settings
from ratlimits.errors import RatLimitsError
from ratlimits.utils.run_recorder import RunRecorder

logger = logging.getLogger(__name__)

COMMANDS = (reduce, compose, iterate, mme, barycenter, family_analyze, tree_build, polylike_detect, verify_suite)

VERSION = "1.0.0"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ratlimits",
        description="Limits of degenerating rational maps: reductions, rescalings, measures and trees of spheres",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    parents = [common_parser()]
    for module in COMMANDS:
        module.register(subparsers, parents)
    return parser


def _input_paths(args: argparse.Namespace) -> list[str]:
    return [p for p in (getattr(args, name, None) for name in getattr(args, "inputs", ())) if p]


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)

    recorder = None
    try:
        cfg = load_settings(args.config, seed=args.seed, threads=args.threads)
        configure(cfg)
        arguments = {k: v for k, v in vars(args).items() if k not in ("handler", "inputs")}
        recorder = RunRecorder(cfg).start(args.command, arguments)
        recorder.save_inputs(_input_paths(args))

        out = args.handler(args, cfg)
        write_output(out.text, args.out)
        for name, text in out.artifacts.items():
            recorder.save_text(name, text)
        code = 0
        if args.command == "verify-suite" and not out.payload.get("passed", False):
            code = 1
        recorder.save_report(code, out.payload)
        return code
    except RatLimitsError as e:
        logger.debug("%s failed", args.command, exc_info=True)
        sys.stderr.write(json.dumps(e.to_report(), ensure_ascii=False, default=str) + "\n")
        if recorder:
            recorder.save_exception(e)
            recorder.save_report(e.exit_code, e.to_report())
        return e.exit_code
    except Exception as e:
        logger.exception("%s crashed", args.command)
        sys.stderr.write(json.dumps({"error": type(e).__name__, "message": str(e), "details": {}}) + "\n")
        if recorder:
            recorder.save_exception(e)
        return 1
    finally:
        configure(None)


if __name__ == "__main__":
    sys.exit(main())
