"""
family-analyze --family F.json --levels N

Builds the scaling scheme of a degenerating family, its iterate limits and
depth profile, then identifies the limit of (1/dⁿ)(g_n)*μ.
"""
from __future__ import annotations

import argparse
import logging

from ratlimits.cli.common import CommandOutput, describe_measure, json_output, measure_dict, parse_point
from ratlimits.config import Settings
from ratlimits.core.measures import AtomicMeasure
from ratlimits.core.mme import quasi_random_points
from ratlimits.core.rescaling import (
    depth_profile_limit,
    iterate_limits,
    left_class_limits,
    pullback_limit,
)
from ratlimits.core.sphere import SpherePoint
from ratlimits.errors import HypothesisUnmet, SchemaError
from ratlimits.models.reports import FamilyReport, IterateReport, ReduceReport, TransitionReport
from ratlimits.models.schemas import FamilyModel, load_model

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    p = subparsers.add_parser("family-analyze", parents=parents, help="scaling scheme and limit measure of a family")
    p.add_argument("--family", required=True, help="family JSON")
    p.add_argument("--levels", type=int, default=4, help="number of levels N")
    p.add_argument("--point", help="Dirac mass to pull back (default: a fixed quasi-random point)")
    p.add_argument("--sampler", type=int, default=0, help="also compare with N sampler atoms at the last t")
    p.add_argument("--sampler-steps", type=int, default=30)
    p.set_defaults(handler=run, inputs=("family",))


def run(args: argparse.Namespace, cfg: Settings) -> CommandOutput:
    if args.levels < 1:
        raise SchemaError("--levels must be at least 1", levels=args.levels)
    F = load_model(args.family, FamilyModel).to_core()
    scheme = left_class_limits(F, args.levels, cfg)
    limits = iterate_limits(scheme, cfg)
    point = parse_point(args.point) if args.point else SpherePoint.from_pair(quasi_random_points(1)[0])

    ratios: dict[str, list[float]] = {}
    if args.levels >= 3:
        try:
            profile = depth_profile_limit(scheme, cfg)
            ratios = {repr(p): list(row) for p, row in zip(profile.points, profile.ratios)}
        except HypothesisUnmet as e:
            logger.warning("no depth profile: %s", e.message)

    lim = pullback_limit(F, AtomicMeasure.dirac(point), args.levels, cfg, scheme=scheme,
                         sampler_samples=args.sampler, sampler_steps=args.sampler_steps)
    logger.info("family %s: case %s", F.name or "(unnamed)", lim.case)
    report = FamilyReport(
        name=F.name,
        degree=F.degree,
        levels=args.levels,
        transitions=[
            TransitionReport(
                level=n,
                reduced=ReduceReport.from_reduced(tr.reduced),
                fully_ramified=scheme.fully_ramified[n],
                cauchy_rate=tr.certificate.rate,
                last_step=tr.certificate.last_step,
                redraws=tr.redraws,
            )
            for n, tr in sorted(scheme.transitions.items())
        ],
        phis=[ReduceReport.from_reduced(scheme.phis[n]) for n in range(1, args.levels + 1)],
        iterates=[
            IterateReport(level=L.level, reduced=ReduceReport.from_reduced(L.reduced), last_step=L.certificate.last_step)
            for L in limits
        ],
        fully_ramified={str(n): v for n, v in sorted(scheme.fully_ramified.items())},
        decomposition_residuals={str(n): v for n, v in sorted(scheme.decomposition_residuals.items())},
        decomposition_tolerances={str(n): v for n, v in sorted(scheme.decomposition_tolerances.items())},
        depth_ratios=ratios,
        case=lim.case,
        limit=measure_dict(lim.limit),
        limit_label=describe_measure(lim.limit),
        distance_to_limit=lim.distance_to_limit,
        cauchy_steps=list(lim.cauchy_steps),
        degree_ratios=list(lim.degree_ratios),
        sampler_distance=lim.sampler_distance,
        notes=list(lim.notes),
    )
    return json_output(report)
