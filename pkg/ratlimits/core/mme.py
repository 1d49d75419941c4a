"""
Measure of maximal entropy.

Two estimators: exact pull-back iteration (1/dⁿ)(fⁿ)*μ₀ with seeded
resampling above a cap, and an inverse-iteration sampler running
independent chains that choose one preimage uniformly (with multiplicity)
at every step. Chains are processed in blocks whose random streams are
derived from (seed, block index), so the output does not depend on the
thread count.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import qmc

from ratlimits.config import Settings, get_settings
from ratlimits.core.measures import (
    AtomicMeasure,
    is_nonexceptional,
    pull_back,
    push_forward,
    resample,
    weakstar_distance,
)
from ratlimits.core.moebius import MoebiusMap
from ratlimits.core.parallel_executor import parallel_map
from ratlimits.core.ratmap import (
    ProjectiveRatMap,
    ReducedForm,
    compose,
    exceptional_set,
    moebius_as_map,
    projective_distance,
    reduce,
)
from ratlimits.core.roots import form_roots_batch
from ratlimits.core.sphere import SpherePoint, chordal_distance, chordal_pairs, xyz_to_pairs
from ratlimits.errors import ExceptionalMass, HypothesisUnmet, NotConverging

logger = logging.getLogger(__name__)


def pullback_iterate(
    f: ProjectiveRatMap,
    mu0: AtomicMeasure,
    n: int,
    cap: int | None = None,
    seed: int | None = None,
    cfg: Settings | None = None,
) -> AtomicMeasure:
    """(1/dⁿ)(fⁿ)*μ₀ as a probability measure."""
    cfg = cfg or get_settings()
    cap = cfg.resample_cap if cap is None else cap
    if not is_nonexceptional(mu0, [f], cfg):
        raise ExceptionalMass("starting measure charges an exceptional point")
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    red = reduce(f, cfg)
    mu = mu0.normalized()
    for _ in range(n):
        mu = pull_back(red, mu, cfg).scaled(1.0 / f.degree)
        mu = resample(mu, cap, rng)
    return mu


def quasi_random_points(count: int, skip: int = 0) -> np.ndarray:
    """Deterministic, nearly uniform sphere points from an unscrambled Halton stream."""
    u = qmc.Halton(d=2, scramble=False).random(count + skip + 1)[skip + 1 :]
    x3 = 1.0 - 2.0 * u[:, 0]
    r = np.sqrt(np.clip(1.0 - x3 * x3, 0.0, None))
    theta = 2.0 * np.pi * u[:, 1]
    return xyz_to_pairs(np.stack([r * np.cos(theta), r * np.sin(theta), x3], axis=-1))


def start_point(f: ProjectiveRatMap, cfg: Settings) -> SpherePoint:
    bad = exceptional_set(f, cfg)
    for pair in quasi_random_points(32):
        p = SpherePoint.from_pair(pair)
        if all(chordal_distance(p, e) > 1e-3 for e in bad):
            return p
    raise HypothesisUnmet("no non-exceptional starting point found")


def random_starts(bad: Sequence[SpherePoint], size: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform sphere points at chordal distance above 1e-3 from every point of ``bad``."""
    pts = xyz_to_pairs(rng.normal(size=(size, 3)))
    if not bad:
        return pts
    avoid = np.array([e.pair() for e in bad])
    for _ in range(100):
        near = np.any(chordal_pairs(pts[:, None, :], avoid[None, :, :]) <= 1e-3, axis=1)
        if not near.any():
            return pts
        pts[near] = xyz_to_pairs(rng.normal(size=(int(near.sum()), 3)))
    raise HypothesisUnmet("no non-exceptional starting points found")


def _run_block(f: ProjectiveRatMap, bad: Sequence[SpherePoint], size: int, steps: int, seed: int, block: int, cfg: Settings) -> np.ndarray:
    rng = np.random.default_rng([seed, block])
    pts = random_starts(bad, size, rng)
    d = f.degree
    for _ in range(steps):
        forms = pts[:, 1:2] * f.num_f[None, :] - pts[:, 0:1] * f.den_f[None, :]
        roots = form_roots_batch(forms, cfg)
        pick = rng.integers(d, size=size)
        pts = roots[np.arange(size), pick]
    return pts


def mme_sample(
    f: ProjectiveRatMap,
    n_samples: int,
    n_steps: int,
    seed: int | None = None,
    cfg: Settings | None = None,
    threads: int | None = None,
) -> AtomicMeasure:
    """N equal atoms, each the endpoint of an inverse-orbit chain of length n_steps from its own random start."""
    cfg = cfg or get_settings()
    if f.degree < 2:
        raise HypothesisUnmet("the sampler needs degree at least 2", degree=f.degree)
    seed = cfg.seed if seed is None else seed
    steps = n_steps
    if steps < cfg.burn_in:
        logger.warning("chain length %d below burn-in %d; using %d steps", n_steps, cfg.burn_in, cfg.burn_in)
        steps = cfg.burn_in
    bad = exceptional_set(f, cfg)
    sizes = [min(cfg.chain_block, n_samples - i) for i in range(0, n_samples, cfg.chain_block)]
    jobs = list(enumerate(sizes))
    blocks = parallel_map(
        lambda job: _run_block(f, bad, job[1], steps, seed, job[0], cfg),
        jobs,
        threads if threads is not None else cfg.resolved_threads(),
    )
    pts = np.concatenate(blocks, axis=0)
    return AtomicMeasure.from_pairs(pts, np.full(len(pts), 1.0 / len(pts)), cfg)


def mme_fixed_point_residual(f: ProjectiveRatMap | ReducedForm, mu: AtomicMeasure, cfg: Settings | None = None) -> float:
    """weak-* distance between (1/d)f*μ̂ and μ̂."""
    cfg = cfg or get_settings()
    degree = f.degree
    return weakstar_distance(pull_back(f, mu, cfg).scaled(1.0 / degree), mu, cfg)


def noise_floor(
    f: ProjectiveRatMap,
    n_samples: int,
    n_steps: int,
    seeds: tuple[int, int] | None = None,
    cfg: Settings | None = None,
) -> float:
    """Dictionary distance between two independent-seed sampler runs."""
    cfg = cfg or get_settings()
    s1, s2 = seeds or (cfg.seed, cfg.seed + 1)
    return weakstar_distance(mme_sample(f, n_samples, n_steps, s1, cfg), mme_sample(f, n_samples, n_steps, s2, cfg), cfg)


@dataclass(frozen=True)
class FixedPointReport:
    residuals: tuple[float, ...]
    floors: tuple[float, ...]

    @property
    def residual(self) -> float:
        return float(np.mean(self.residuals))

    @property
    def noise_floor(self) -> float:
        return float(np.mean(self.floors))

    @property
    def within_noise(self) -> bool:
        return self.residual <= 2.0 * self.noise_floor


def fixed_point_check(
    f: ProjectiveRatMap,
    n_samples: int,
    n_steps: int,
    replicates: int = 3,
    seed: int | None = None,
    cfg: Settings | None = None,
) -> FixedPointReport:
    """
    Fixed-point residuals of 2·replicates independent runs against the floor of their pairings.

    Run j uses seed + j; runs 2i and 2i+1 give the i-th floor.
    """
    cfg = cfg or get_settings()
    if replicates < 1:
        raise ValueError("at least one replicate")
    seed = cfg.seed if seed is None else seed
    runs = [mme_sample(f, n_samples, n_steps, seed + j, cfg) for j in range(2 * replicates)]
    residuals = tuple(mme_fixed_point_residual(f, mu, cfg) for mu in runs)
    floors = tuple(weakstar_distance(runs[2 * i], runs[2 * i + 1], cfg) for i in range(replicates))
    report = FixedPointReport(residuals, floors)
    logger.info("fixed-point residual %.4f against noise floor %.4f", report.residual, report.noise_floor)
    return report


@dataclass(frozen=True)
class WeakPairReport:
    residuals: tuple[float, ...]
    map_distances: tuple[float, ...]
    noise_floor: float
    converging: bool


def weak_pair_limit_check(
    maps: Sequence[ProjectiveRatMap],
    scalings: Sequence[MoebiusMap],
    phi: ProjectiveRatMap,
    n_samples: int,
    n_steps: int,
    seed: int | None = None,
    cfg: Settings | None = None,
    strict: bool = False,
) -> WeakPairReport:
    """
    Residual of μ̂_k against (1/d)φ*(A_k)_*μ̂_k for every k.

    A_k ∘ f_k must tend to φ on the schedule; HypothesisUnmet otherwise. The
    residuals converge when every tail step grows by at most the noise floor of
    the last map.
    """
    cfg = cfg or get_settings()
    if len(maps) != len(scalings):
        raise HypothesisUnmet("one scaling per map", maps=len(maps), scalings=len(scalings))
    if not maps:
        raise HypothesisUnmet("empty sequence")
    d = phi.degree
    seed = cfg.seed if seed is None else seed
    distances = []
    for f, a in zip(maps, scalings):
        if f.degree != d:
            raise HypothesisUnmet("maps and limit differ in degree", degree=f.degree, limit_degree=d)
        distances.append(projective_distance(compose(moebius_as_map(a), f, cfg), phi))
    if distances[-1] > cfg.tau_cauchy or distances[-1] > distances[0]:
        raise HypothesisUnmet("A_k ∘ f_k does not tend to the limit map", distances=distances)
    residuals, last = [], None
    for f, a in zip(maps, scalings):
        last = mme_sample(f, n_samples, n_steps, seed, cfg)
        rhs = pull_back(phi, push_forward(a, last, cfg), cfg).scaled(1.0 / d)
        residuals.append(weakstar_distance(last, rhs, cfg))
    floor = weakstar_distance(last, mme_sample(maps[-1], n_samples, n_steps, seed + 1, cfg), cfg)
    tail = residuals[-3:]
    converging = all(b <= a + floor for a, b in zip(tail, tail[1:]))
    logger.info("weak pair residuals %s, noise floor %.4f", ["%.4f" % r for r in residuals], floor)
    if strict and not converging:
        raise NotConverging("weak pair residuals do not decrease", residuals=residuals, noise_floor=floor)
    return WeakPairReport(tuple(residuals), tuple(distances), floor, converging)
