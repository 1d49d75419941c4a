"""
Acceptance battery behind ``verify-suite``.

Thirteen numbered checks, each a plain function returning a detail dict with
a boolean ``passed``. The ``quick`` tier runs the same checks on smaller
samples; ``desk`` uses the full sizes.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any, Callable

import numpy as np

from ratlimits.config import Settings, get_settings
from ratlimits.core import catalog
from ratlimits.core.barycenter import (
    act_on_ball,
    conformal_barycenter,
    dm_class,
    euclidean_moment,
    hyperbolic_distance,
)
from ratlimits.core.measures import AtomicMeasure, pull_back, push_forward, weakstar_distance
from ratlimits.core.mme import fixed_point_check, mme_sample
from ratlimits.core.moebius import MoebiusMap
from ratlimits.core.polylike import PairSamples, check_julia_hypotheses, extract_polynomial_like
from ratlimits.core.ratmap import ProjectiveRatMap, compose, compose_reduced, git_classify, reduce
from ratlimits.core.rescaling import (
    CASE_SMALL,
    ScalingScheme,
    depth_profile_limit,
    left_class_limits,
    pullback_limit,
    sample_family,
)
from ratlimits.core.sphere import SpherePoint
from ratlimits.core.spheretree import (
    build_tree,
    hausdorff_residual,
    induced_map,
    monomial_tree_pair,
    path_fixture,
    preimage_count_verify,
)
from ratlimits.errors import ContinuityFailure, Indeterminate, RatLimitsError

logger = logging.getLogger(__name__)

INF = SpherePoint.infinity()


@dataclass(frozen=True)
class Tier:
    name: str
    random_pairs: int
    random_maps: int
    barycenter_trials: int
    samples: int
    steps: int
    pullback_levels: int


TIERS = {
    "desk": Tier("desk", 200, 20, 100, 10_000, 30, 8),
    "quick": Tier("quick", 25, 3, 20, 5_000, 30, 6),
}


class BatteryContext:
    """Settings, tier sizes and the schemes several checks share."""

    def __init__(self, tier: Tier, cfg: Settings) -> None:
        self.tier = tier
        self.cfg = cfg

    @cached_property
    def z2_family(self):
        return catalog.z2_plus_inverse_t()

    @cached_property
    def z2_scheme(self) -> ScalingScheme:
        return left_class_limits(self.z2_family, max(6, self.tier.pullback_levels), self.cfg)

    def rng(self, salt: int) -> np.random.Generator:
        return np.random.default_rng([self.cfg.seed, salt])


Check = Callable[[BatteryContext], dict]
CRITERIA: list[tuple[int, str, Check]] = []


def criterion(cid: int, name: str) -> Callable[[Check], Check]:
    def register(fn: Check) -> Check:
        CRITERIA.append((cid, name, fn))
        return fn

    return register


# --- 1: depth composition law ---

def _same_holes(got, expected, tol: float) -> bool:
    if got.hole_mass != expected.hole_mass or got.reduction_degree != expected.reduction_degree:
        return False
    return all(expected.depth_at(h.point, tol) == h.depth for h in got.holes)


@criterion(1, "depth composition law on random degenerate pairs")
def check_depth_composition(ctx: BatteryContext) -> dict:
    cfg = ctx.cfg
    rng = ctx.rng(1)
    checked, skipped, mismatches = 0, 0, []
    while checked + skipped < ctx.tier.random_pairs:
        d1, d2 = (int(x) for x in rng.integers(1, 5, size=2))
        f = catalog.random_degenerate_map(rng, d1)
        g = catalog.random_degenerate_map(rng, d2)
        try:
            expected = compose_reduced(reduce(f, cfg), reduce(g, cfg), cfg)
            got = reduce(compose(f, g, cfg), cfg)
        except Indeterminate:
            skipped += 1
            continue
        checked += 1
        if not _same_holes(got, expected, cfg.tau_root_merge):
            mismatches.append({"degrees": [d1, d2], "got": got.hole_mass, "expected": expected.hole_mass})
    return {"passed": not mismatches, "checked": checked, "indeterminate": skipped, "mismatches": mismatches[:5]}


# --- 2: depth profile of z² + 1/t ---

@criterion(2, "depth profile of z^2+1/t")
def check_depth_profile(ctx: BatteryContext) -> dict:
    cfg = ctx.cfg
    step = ProjectiveRatMap.from_lists([0, 2, 0], [1, 0, 0], "exact")       # [2zw : w²]
    phi = ProjectiveRatMap.from_lists([0, 0, 1], [1, 0, 0], "exact")        # z²
    exact_ratios, float_errors = {}, {}
    ok = True
    for n in range(2, 7):
        phi = compose(step, phi, cfg)
        want = 1 - Fraction(2) ** (1 - n)
        got = Fraction(reduce(phi, cfg).depth_at(INF), 2 ** n)
        exact_ratios[n] = str(got)
        ok &= got == want
        err = abs(ctx.z2_scheme.phis[n].depth_at(INF, cfg.tau_root_merge) / 2 ** n - float(want))
        float_errors[n] = err
        ok &= err <= 1e-9
    return {"passed": bool(ok), "exact": exact_ratios, "float_errors": float_errors}


# --- 3: pulled-back limit of z² + 1/t ---

@criterion(3, "pulled-back limit of z^2+1/t")
def check_pullback_limit(ctx: BatteryContext) -> dict:
    cfg = ctx.cfg
    mu = AtomicMeasure.dirac(SpherePoint.from_complex(0.3 + 0.2j))
    report = pullback_limit(ctx.z2_family, mu, ctx.z2_scheme.levels, cfg, scheme=ctx.z2_scheme)
    to_inf = weakstar_distance(report.limit, AtomicMeasure.dirac(INF), cfg)
    f = sample_family(ctx.z2_family, Fraction(1, 10_000), cfg=cfg)
    sampled = mme_sample(f, ctx.tier.samples, ctx.tier.steps, cfg.seed, cfg)
    sampler = weakstar_distance(sampled, AtomicMeasure.dirac(INF), cfg)
    passed = report.case == CASE_SMALL and report.distance_to_limit < 0.05 and to_inf < 1e-6 and sampler < 0.1
    return {
        "passed": passed,
        "case": report.case,
        "distance_to_limit": report.distance_to_limit,
        "limit_to_delta_infinity": to_inf,
        "sampler_distance": sampler,
    }


# --- 4: t(z + 1/z) ---

@criterion(4, "t(z+1/z) limit measure")
def check_antipodal_family(ctx: BatteryContext) -> dict:
    cfg = ctx.cfg
    F = catalog.demarco_faber()
    target = AtomicMeasure.from_points([SpherePoint.from_complex(1j), SpherePoint.from_complex(-1j)], [0.5, 0.5], cfg)
    sampled = mme_sample(sample_family(F, 1000, cfg=cfg), ctx.tier.samples, ctx.tier.steps, cfg.seed, cfg)
    sampler = weakstar_distance(sampled, target, cfg)
    profile = depth_profile_limit(left_class_limits(F, 4, cfg), cfg)
    depth = weakstar_distance(profile.measure, target, cfg)
    at_infinity = dm_class(profile.measure, cfg).infinity
    return {
        "passed": sampler < 0.05 and depth < 0.02 and at_infinity,
        "sampler_distance": sampler,
        "depth_profile_distance": depth,
        "class_at_infinity": at_infinity,
    }


# --- 5: sampler sanity ---

@criterion(5, "measure of maximal entropy sanity")
def check_sampler_sanity(ctx: BatteryContext) -> dict:
    cfg = ctx.cfg
    n, steps = ctx.tier.samples, ctx.tier.steps
    circle = mme_sample(ProjectiveRatMap.polynomial([0, 0, 1]), n, steps, cfg.seed, cfg)
    radii = np.abs(np.array([p.to_complex() for p in circle.points()]))
    spread = float(np.max(np.abs(radii - 1.0)))
    moment = float(np.linalg.norm(euclidean_moment(circle)))
    interval = mme_sample(ProjectiveRatMap.polynomial([-2, 0, 1]), n, steps, cfg.seed, cfg)
    x = np.array([p.to_complex().real for p in interval.points()])
    mean, second = float(interval.weights @ x), float(interval.weights @ x ** 2)
    passed = spread < 0.02 and moment < 0.05 and abs(mean) < 0.05 and abs(second - 2.0) < 0.05
    return {"passed": passed, "circle_spread": spread, "circle_moment": moment, "mean": mean, "second_moment": second}


# --- 6: fixed-point residual ---

@criterion(6, "fixed-point residual within twice the noise floor")
def check_fixed_point(ctx: BatteryContext) -> dict:
    cfg = ctx.cfg
    rng = ctx.rng(6)
    n, steps = ctx.tier.samples // 2, ctx.tier.steps
    rows = []
    for i in range(ctx.tier.random_maps):
        f = catalog.random_map(rng, 2 + i % 2)
        report = fixed_point_check(f, n, steps, seed=cfg.seed, cfg=cfg)
        rows.append({
            "degree": f.degree,
            "residual": report.residual,
            "noise_floor": report.noise_floor,
            "passed": report.within_noise,
        })
    return {"passed": all(r["passed"] for r in rows), "maps": rows}


# --- 7: barycenter equivariance ---

def _random_measure(rng: np.random.Generator, atoms: int = 20) -> AtomicMeasure:
    z = rng.normal(size=atoms) + 1j * rng.normal(size=atoms)
    w = rng.uniform(0.5, 1.5, size=atoms)
    return AtomicMeasure.from_pairs(np.stack([z, np.ones_like(z)], axis=-1), w / w.sum())


def _random_moebius(rng: np.random.Generator) -> MoebiusMap:
    while True:
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        if abs(np.linalg.det(m)) > 0.1 * np.linalg.norm(m) ** 2:
            return MoebiusMap.from_matrix(m)


@criterion(7, "barycenter equivariance and idempotence")
def check_barycenter(ctx: BatteryContext) -> dict:
    cfg = ctx.cfg
    rng = ctx.rng(7)
    worst_equivariance, worst_idempotence = 0.0, 0.0
    for _ in range(ctx.tier.barycenter_trials):
        mu = _random_measure(rng)
        a = _random_moebius(rng)
        c = conformal_barycenter(mu, cfg)
        moved = conformal_barycenter(push_forward(a, mu, cfg), cfg)
        worst_equivariance = max(worst_equivariance, hyperbolic_distance(moved.center, act_on_ball(a, c.center)))
        again = conformal_barycenter(push_forward(c.translation, mu, cfg), cfg)
        worst_idempotence = max(worst_idempotence, again.center.norm)
    return {
        "passed": worst_equivariance < 1e-6 and worst_idempotence < 1e-6,
        "equivariance": worst_equivariance,
        "idempotence": worst_idempotence,
    }


# --- 8: pull-back continuity ---

@criterion(8, "pull-back continuity along z^2+1/t")
def check_pullback_continuity(ctx: BatteryContext) -> dict:
    cfg = ctx.cfg
    base = 0.3 + 0.2j
    g = ProjectiveRatMap(2, [1, 0, 0], [0, 0, 0])                        # [w² : 0] = ∞ with hole ∞
    target = pull_back(g, AtomicMeasure.dirac(SpherePoint.from_complex(base)), cfg)
    distances = []
    for j in range(2, 11):
        f = sample_family(ctx.z2_family, Fraction(1, 10 ** j), cfg=cfg)
        nu = AtomicMeasure.dirac(SpherePoint.from_complex(base + 1 / j))
        distances.append(weakstar_distance(pull_back(f, nu, cfg), target, cfg))
    tail = distances[-3:]
    passed = all(b < a for a, b in zip(tail, tail[1:])) and tail[-1] < 0.01
    return {"passed": passed, "distances": distances}


# --- 9: trees and preimage counts ---

@criterion(9, "path tree and preimage predictions")
def check_path_tree(ctx: BatteryContext) -> dict:
    cfg = ctx.cfg
    schedule = [0.1 ** (k + 1) for k in range(7)]
    tree = build_tree(path_fixture(schedule, 6), cfg)
    edges = sorted(tuple(sorted(e)) for e in tree.edges())
    residual = hausdorff_residual(tree, -1, cfg)
    scheme = ctx.z2_scheme
    z_generic = SpherePoint.from_complex(0.7 + 0.2j)
    cases = [
        (0, z_generic, scheme.transitions[1].reduced.apply_reduction(z_generic, cfg), 1),
        (1, SpherePoint.from_complex(0.5 + 0.5j), SpherePoint.from_complex(0.3 - 0.4j), 0),
        (1, INF, INF, 2),
    ]
    counts = []
    ok = True
    for j, z0, w0, expected in cases:
        v = preimage_count_verify(scheme, j, z0, w0, 0.05, cfg)
        counts.append({"level": j, "predicted": v.predicted, "observed": v.counts[-1]})
        ok &= v.predicted == expected and v.agree
    passed = ok and len(tree.junctions) == 5 and edges == [(n, n + 1) for n in range(5)] and residual < 0.01
    return {"passed": bool(passed), "junctions": len(tree.junctions), "hausdorff": residual, "counts": counts}


# --- 10: induced tree map ---

@criterion(10, "induced map on the z^2/eps tree")
def check_induced_map(ctx: BatteryContext) -> dict:
    cfg = ctx.cfg
    schedule = catalog.schedule_floats(catalog.z2_over_eps())
    src, tgt, tau = monomial_tree_pair(schedule, 4, 2)
    source, target = build_tree(src, cfg), build_tree(tgt, cfg)
    square = ProjectiveRatMap.polynomial([0, 0, 1])
    f_last = ProjectiveRatMap.from_lists([0, 0, 1 / schedule[-1]], [1, 0, 0])
    data = induced_map(source, target, tau, {n: square for n in tau}, f_last, cfg)
    perturbed = {n: square for n in tau}
    perturbed[1] = ProjectiveRatMap.polynomial([0.1, 0, 1])
    try:
        induced_map(source, target, tau, perturbed, None, cfg)
        caught = False
    except ContinuityFailure:
        caught = True
    passed = data.critical_total == 2 and data.fully_ramified and caught
    return {"passed": passed, "critical_total": data.critical_total, "perturbation_detected": caught}


# --- 11: polynomial-like restrictions ---

@criterion(11, "polynomial-like restriction of z^2/eps")
def check_polynomial_like(ctx: BatteryContext) -> dict:
    cfg = ctx.cfg
    F = catalog.z2_over_eps()
    maps = [sample_family(F, t, cfg=cfg) for t in F.schedule]
    ident = [MoebiusMap.identity()] * len(maps)
    shrink = [MoebiusMap.sample(np.diag([float(t), 1.0])) for t in F.schedule]
    pair = PairSamples.from_maps(maps, ident, shrink, cfg)
    hyp = check_julia_hypotheses(pair, cfg)
    k = list(F.schedule).index(Fraction(1, 1000))
    cert = extract_polynomial_like(pair, k, cfg, hypotheses=hyp)

    G = catalog.demarco_faber()
    flat = [sample_family(G, t, cfg=cfg) for t in G.schedule]
    widen = [MoebiusMap.sample(np.diag([1.0 / float(t), 1.0])) for t in G.schedule]
    other = check_julia_hypotheses(PairSamples.from_maps(flat, [MoebiusMap.identity()] * len(flat), widen, cfg), cfg)
    passed = hyp.passed and cert.degree == 2 and bool(cert.periodic) and not other.passed and other.local_degree == 1
    return {
        "passed": passed,
        "certificate": {"degree": cert.degree, "modulus": cert.modulus, "periodic_inside": len(cert.periodic)},
        "antipodal_local_degree": other.local_degree,
    }


# --- 12: GIT classification ---

@criterion(12, "GIT stability")
def check_git(ctx: BatteryContext) -> dict:
    cfg = ctx.cfg
    cases = {
        "[z^4 : z^3 w]": (ProjectiveRatMap.from_lists([0, 0, 0, 0, 1], [0, 0, 0, 1, 0], "exact"), "unstable"),
        "z^2+1": (ProjectiveRatMap.polynomial([1, 0, 1], "exact"), "stable"),
        "[z^2 : z w]": (ProjectiveRatMap.from_lists([0, 0, 1], [0, 1, 0], "exact"), "unstable"),
    }
    got = {name: git_classify(f, cfg) for name, (f, _) in cases.items()}
    return {"passed": all(got[name] == want for name, (_, want) in cases.items()), "classes": got}


# --- 13: determinism ---

@criterion(13, "determinism across runs and thread counts")
def check_determinism(ctx: BatteryContext) -> dict:
    cfg = ctx.cfg
    f = ProjectiveRatMap.polynomial([-1, 0, 1])
    n = max(ctx.tier.samples // 4, 2 * cfg.chain_block + 1)
    runs = [mme_sample(f, n, ctx.tier.steps, cfg.seed, cfg, threads=t) for t in (1, 1, 4)]
    same = all(np.array_equal(r.pairs, runs[0].pairs) and np.array_equal(r.weights, runs[0].weights) for r in runs[1:])
    return {"passed": same, "atoms": len(runs[0])}


# --- runner ---

@dataclass(frozen=True)
class CriterionOutcome:
    id: int
    name: str
    status: str
    seconds: float
    detail: dict[str, Any]


def run_battery(tier: str = "desk", cfg: Settings | None = None, only: set[int] | None = None) -> list[CriterionOutcome]:
    cfg = cfg or get_settings()
    if tier not in TIERS:
        raise ValueError(f"unknown tier {tier!r}")
    ctx = BatteryContext(TIERS[tier], cfg)
    out = []
    for cid, name, fn in sorted(CRITERIA, key=lambda c: c[0]):
        if only and cid not in only:
            continue
        logger.info("criterion %d: %s", cid, name)
        start = time.perf_counter()
        try:
            detail = fn(ctx)
            status = "pass" if detail.pop("passed") else "fail"
        except RatLimitsError as e:
            detail, status = e.to_report(), "error"
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as e:
            detail, status = {"error": type(e).__name__, "message": str(e)}, "error"
        seconds = time.perf_counter() - start
        logger.info("criterion %d: %s in %.1fs", cid, status, seconds)
        out.append(CriterionOutcome(cid, name, status, seconds, detail))
    return out
