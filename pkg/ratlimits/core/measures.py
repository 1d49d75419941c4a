"""
Finite atomic measures on the sphere.

Every measure in the library is a list of weighted atoms; weak-* statements
are tested through the harmonic dictionary of :mod:`ratlimits.core.harmonics`.
Pull-back by a degenerate map g follows g*μ = g̃*μ + μ(C̄)·η_g, where η_g is
the depth measure of g.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from ratlimits.config import Settings, get_settings
from ratlimits.core.harmonics import dictionary
from ratlimits.core.moebius import MoebiusMap
from ratlimits.core.ratmap import ProjectiveRatMap, ReducedForm, exceptional_set, reduce
from ratlimits.core.roots import cluster_labels, form_roots_batch
from ratlimits.core.sphere import SpherePoint, chordal_pairs, normalize_pairs, points_to_pairs
from ratlimits.errors import ExceptionalMass, HoleMass, NotDegenerate

logger = logging.getLogger(__name__)

MapLike = Union[ProjectiveRatMap, ReducedForm]


def _merge(pairs: np.ndarray, weights: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    if len(pairs) <= 1:
        return pairs, weights
    labels = cluster_labels(pairs, tol)
    _, first = np.unique(labels, return_index=True)
    order = np.sort(first)
    merged = np.bincount(labels, weights=weights)
    return pairs[order], merged[labels[order]]


@dataclass(frozen=True, eq=False)
class AtomicMeasure:
    pairs: np.ndarray
    weights: np.ndarray

    @classmethod
    def from_pairs(cls, pairs, weights=None, cfg: Settings | None = None, merge: bool = True) -> "AtomicMeasure":
        cfg = cfg or get_settings()
        pairs = normalize_pairs(np.asarray(pairs, dtype=complex).reshape(-1, 2))
        if weights is None:
            weights = np.full(len(pairs), 1.0 / max(len(pairs), 1))
        weights = np.asarray(weights, dtype=float).ravel()
        if len(weights) != len(pairs):
            raise ValueError("one weight per atom")
        keep = weights > 0
        if np.any(weights < 0):
            raise ValueError("weights must be nonnegative")
        pairs, weights = pairs[keep], weights[keep]
        if merge:
            pairs, weights = _merge(pairs, weights, cfg.tau_pt)
        pairs.setflags(write=False)
        weights.setflags(write=False)
        return cls(pairs, weights)

    @classmethod
    def from_points(cls, points: Sequence[SpherePoint], weights=None, cfg: Settings | None = None) -> "AtomicMeasure":
        return cls.from_pairs(points_to_pairs(points), weights, cfg)

    @classmethod
    def dirac(cls, point: SpherePoint, weight: float = 1.0) -> "AtomicMeasure":
        return cls.from_pairs(point.pair()[None, :], [weight])

    @classmethod
    def empty(cls) -> "AtomicMeasure":
        return cls(np.zeros((0, 2), dtype=complex), np.zeros(0))

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def __len__(self) -> int:
        return len(self.weights)

    def points(self) -> list[SpherePoint]:
        return [SpherePoint(z, w) for z, w in self.pairs]

    def scaled(self, factor: float) -> "AtomicMeasure":
        return AtomicMeasure(self.pairs, self.weights * factor)

    def normalized(self) -> "AtomicMeasure":
        return self.scaled(1.0 / self.mass)

    def plus(self, other: "AtomicMeasure", cfg: Settings | None = None) -> "AtomicMeasure":
        if len(other) == 0:
            return self
        if len(self) == 0:
            return other
        return AtomicMeasure.from_pairs(
            np.concatenate([self.pairs, other.pairs]), np.concatenate([self.weights, other.weights]), cfg
        )

    def mass_near(self, point: SpherePoint, tol: float) -> float:
        if len(self) == 0:
            return 0.0
        return float(self.weights[chordal_pairs(self.pairs, point.pair()[None, :]) < tol].sum())

    def max_atom(self) -> tuple[SpherePoint | None, float]:
        if len(self) == 0:
            return None, 0.0
        i = int(np.argmax(self.weights))
        return SpherePoint.from_pair(self.pairs[i]), float(self.weights[i])


def uniform_circle(n: int, radius: float = 1.0, center: complex = 0.0) -> AtomicMeasure:
    theta = 2 * np.pi * (np.arange(n) + 0.5) / n
    values = center + radius * np.exp(1j * theta)
    return AtomicMeasure.from_pairs(np.stack([values, np.ones_like(values)], axis=-1))


def resample(mu: AtomicMeasure, cap: int, rng: np.random.Generator) -> AtomicMeasure:
    """Weighted resampling down to ``cap`` equal atoms; no-op under the cap."""
    if len(mu) <= cap:
        return mu
    picks = rng.choice(len(mu), size=cap, replace=True, p=mu.weights / mu.mass)
    return AtomicMeasure.from_pairs(mu.pairs[picks], np.full(cap, mu.mass / cap))


# --- push-forward ---

def push_forward(a: Union[MoebiusMap, ProjectiveRatMap], mu: AtomicMeasure, cfg: Settings | None = None) -> AtomicMeasure:
    cfg = cfg or get_settings()
    if len(mu) == 0:
        return mu
    if isinstance(a, MoebiusMap):
        if a.degenerate:
            if mu.mass_near(a.hole, cfg.tau_pt) > 0:
                raise HoleMass("measure charges the hole of a degenerate Möbius map", hole=repr(a.hole))
            return AtomicMeasure.dirac(a.reduction, mu.mass)
        return AtomicMeasure.from_pairs(a.apply_pairs(mu.pairs), mu.weights, cfg)
    return AtomicMeasure.from_pairs(a.evaluate_pairs(mu.pairs, cfg), mu.weights, cfg)


# --- depth measures and pull-back ---

def _as_reduced(g: MapLike, cfg: Settings) -> ReducedForm:
    return g if isinstance(g, ReducedForm) else reduce(g, cfg)


def depth_measure(g: MapLike, cfg: Settings | None = None) -> AtomicMeasure:
    """η_g = Σ d_h(g) δ_h."""
    cfg = cfg or get_settings()
    red = _as_reduced(g, cfg)
    if not red.is_degenerate:
        raise NotDegenerate("depth measure of a nondegenerate map")
    return AtomicMeasure.from_points([h.point for h in red.holes], [h.depth for h in red.holes], cfg)


def _pull_back_step(f: ProjectiveRatMap, mu: AtomicMeasure, cfg: Settings) -> AtomicMeasure:
    forms = mu.pairs[:, 1:2] * f.num_f[None, :] - mu.pairs[:, 0:1] * f.den_f[None, :]
    roots = form_roots_batch(forms, cfg)
    weights = np.repeat(mu.weights, f.degree)
    return AtomicMeasure.from_pairs(roots.reshape(-1, 2), weights, cfg)


def pull_back(
    g: MapLike,
    mu: AtomicMeasure,
    cfg: Settings | None = None,
    cap: int | None = None,
    rng: np.random.Generator | None = None,
) -> AtomicMeasure:
    """g*μ; the mass is multiplied by deg g exactly.

    Composite reductions are pulled back one chain step at a time; with
    ``cap`` set, each step is resampled down to ``cap`` atoms.
    """
    cfg = cfg or get_settings()
    red = _as_reduced(g, cfg)
    if len(mu) == 0:
        return mu
    if red.reduction.is_constant:
        c = red.reduction.constant_value()
        if red.is_degenerate and mu.mass_near(c, cfg.tau_pt) > 0:
            raise ExceptionalMass("measure charges the exceptional point of a degenerate map", point=repr(c))
        return depth_measure(red, cfg).scaled(mu.mass)
    out = mu
    for step in reversed(red.steps()):
        out = _pull_back_step(step, out, cfg)
        if cap is not None:
            out = resample(out, cap, rng or np.random.default_rng(cfg.seed))
    if red.is_degenerate:
        out = out.plus(depth_measure(red, cfg).scaled(mu.mass), cfg)
    return out


def push_forward_function(f: ProjectiveRatMap, values_fn, pairs: np.ndarray, cfg: Settings | None = None) -> np.ndarray:
    """(f_*φ)(w) = Σ_{f(z)=w} φ(z) at each row of ``pairs``; φ maps (N,2) pairs to (N, K)."""
    cfg = cfg or get_settings()
    pairs = np.asarray(pairs, dtype=complex).reshape(-1, 2)
    forms = pairs[:, 1:2] * f.num_f[None, :] - pairs[:, 0:1] * f.den_f[None, :]
    roots = form_roots_batch(forms, cfg)
    vals = np.asarray(values_fn(roots.reshape(-1, 2)))
    return vals.reshape(len(pairs), f.degree, -1).sum(axis=1)


# --- weak-* comparison ---

def harmonic_moments(mu: AtomicMeasure, cfg: Settings | None = None) -> np.ndarray:
    cfg = cfg or get_settings()
    if len(mu) == 0:
        return np.zeros((cfg.harmonic_cutoff + 1) ** 2)
    return mu.weights @ dictionary(mu.pairs, cfg.harmonic_cutoff)


def weakstar_distance(mu: AtomicMeasure, nu: AtomicMeasure, cfg: Settings | None = None) -> float:
    """max over the dictionary of |∫φ dμ − ∫φ dν|."""
    cfg = cfg or get_settings()
    return float(np.max(np.abs(harmonic_moments(mu, cfg) - harmonic_moments(nu, cfg))))


# --- exceptional checks ---

def exceptional_points(g: MapLike, cfg: Settings | None = None) -> list[SpherePoint]:
    cfg = cfg or get_settings()
    if isinstance(g, ReducedForm):
        if g.is_degenerate:
            return [g.reduction.constant_value()] if g.reduction.is_constant else []
        return exceptional_set(g.reduction, cfg)
    return exceptional_set(g, cfg)


def is_nonexceptional(mu: AtomicMeasure, maps: Iterable[MapLike], cfg: Settings | None = None) -> bool:
    cfg = cfg or get_settings()
    for g in maps:
        for p in exceptional_points(g, cfg):
            if mu.mass_near(p, cfg.tau_root_merge) > 0:
                logger.info("measure charges the exceptional point %r", p)
                return False
    return True
