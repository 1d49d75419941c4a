"""
polylike-detect: polynomial-like certificates along a family
(--family F.json --window 5) or for one polynomial on a round disk
(--map f.json --radius R).
"""
from __future__ import annotations

import argparse
import logging
from dataclasses import asdict
from fractions import Fraction

from ratlimits.cli.common import CommandOutput, json_output
from ratlimits.config import Settings
from ratlimits.core.polylike import julia_localization_check, polynomial_like_search, round_disk_certificate
from ratlimits.core.rescaling import left_class_limits
from ratlimits.errors import SchemaError
from ratlimits.models.reports import PolyLikeReport
from ratlimits.models.schemas import FamilyModel, MapModel, load_model

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    p = subparsers.add_parser("polylike-detect", parents=parents, help="polynomial-like certificates")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--family", help="family JSON")
    src.add_argument("--map", dest="map_path", help="single polynomial map JSON (round-disk certificate)")
    p.add_argument("--window", type=int, default=5, help="consecutive fully ramified times required")
    p.add_argument("--levels", type=int, help="scheme levels (default: the window)")
    p.add_argument("--t", nargs="*", default=None, help="schedule values to certify (default: all)")
    p.add_argument("--radius", type=float, default=8.0, help="escape radius R (with --map)")
    p.add_argument("--localize", action="store_true", help="also check Julia localization")
    p.add_argument("--localize-samples", type=int, default=2000)
    p.set_defaults(handler=run, inputs=("family", "map_path"))


def _indices(schedule, values) -> list[int] | None:
    if values is None:
        return None
    out = []
    for text in values:
        try:
            target = complex(Fraction(text)) if "j" not in text else complex(text)
        except ValueError as e:
            raise SchemaError(f"cannot read t value {text!r}") from e
        hits = [k for k, t in enumerate(schedule) if abs(complex(t) - target) <= 1e-9 * max(1.0, abs(target))]
        if not hits:
            raise SchemaError(f"t = {text} is not on the schedule")
        out.append(hits[0])
    return out


def run(args: argparse.Namespace, cfg: Settings) -> CommandOutput:
    if args.map_path:
        h = load_model(args.map_path, MapModel).to_core().to_float()
        cert = round_disk_certificate(h, args.radius, cfg)
        payload = {"certificate": cert.to_dict()}
        if args.localize:
            loc = julia_localization_check(h, cert, args.localize_samples, 30, cfg.seed, cfg)
            payload["localization"] = asdict(loc)
        return json_output(payload)

    if args.window < 1:
        raise SchemaError("--window must be positive", window=args.window)
    F = load_model(args.family, FamilyModel).to_core()
    levels = args.levels or args.window
    scheme = left_class_limits(F, levels, cfg)
    search = polynomial_like_search(F, levels, args.window, cfg, scheme=scheme,
                                    indices=_indices(F.schedule, args.t))
    certificates = []
    for cert in search.certificates:
        entry = cert.to_dict()
        if args.localize:
            h = scheme.sample(cert.index, cfg)
            entry["localization"] = asdict(julia_localization_check(h, cert, args.localize_samples, 30, cfg.seed, cfg))
        certificates.append(entry)
    return json_output(PolyLikeReport(
        window=search.window,
        experimental=search.experimental,
        fully_ramified_run=list(search.run),
        level=search.level,
        hypotheses=[h.to_dict() for h in search.hypotheses],
        certificates=certificates,
        failures=[{"k": k, "reason": r} for k, r in search.failures],
    ))
