"""
Conformal barycenter and barycentered measure classes.

Hyperbolic 3-space is the open unit ball. A ball point b corresponds to the
positive Hermitian matrix X(b) of determinant 1, the origin to the identity,
and a Möbius matrix M acts by X ↦ M X M* / |det M|. Boundary points match the
stereographic embedding used for measures, so the action on the ball extends
the action on atoms.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np
from scipy.optimize import minimize
from scipy.spatial.transform import Rotation

from ratlimits.config import Settings, get_settings
from ratlimits.core.harmonics import power_spectrum, real_harmonics
from ratlimits.core.measures import AtomicMeasure, push_forward
from ratlimits.core.moebius import MoebiusMap, fit_moebius, random_rotation, rotation_from_vector
from ratlimits.core.parallel_executor import parallel_map
from ratlimits.core.sphere import SpherePoint, from_stereographic, pairs_to_xyz
from ratlimits.errors import NoConvergence, NotInM1o

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class HPoint:
    x: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float).reshape(3)
        if np.linalg.norm(x) >= 1.0:
            raise ValueError("ball points have norm < 1")
        object.__setattr__(self, "x", x)

    @classmethod
    def origin(cls) -> "HPoint":
        return cls(np.zeros(3))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.x))


# --- ball model ---

def ball_to_hermitian(b: HPoint) -> np.ndarray:
    r2 = float(b.x @ b.x)
    x0 = (1 + r2) / (1 - r2)
    x1, x2, x3 = 2 * b.x / (1 - r2)
    return np.array([[x0 + x3, x1 + 1j * x2], [x1 - 1j * x2, x0 - x3]])


def hermitian_to_ball(m: np.ndarray) -> HPoint:
    m = (m + m.conj().T) / 2
    m = m / math.sqrt(max(np.linalg.det(m).real, 1e-300))
    x0 = float(np.trace(m).real) / 2
    x3 = float((m[0, 0] - m[1, 1]).real) / 2
    x1, x2 = float(m[0, 1].real), float(m[0, 1].imag)
    v = np.array([x1, x2, x3]) / (1 + x0)
    n = np.linalg.norm(v)
    if n >= 1.0:
        v = v * (1 - 1e-16) / n
    return HPoint(v)


def act_on_ball(a: MoebiusMap, b: HPoint) -> HPoint:
    """Poincaré extension of a nondegenerate Möbius map."""
    m = a.matrix / np.sqrt(np.linalg.det(a.matrix))
    return hermitian_to_ball(m @ ball_to_hermitian(b) @ m.conj().T)


def hyperbolic_distance(p: HPoint, q: HPoint) -> float:
    diff = float(np.sum((p.x - q.x) ** 2))
    den = (1 - p.norm ** 2) * (1 - q.norm ** 2)
    return float(np.arccosh(1 + 2 * diff / den))


def translation_to_origin(p: HPoint) -> MoebiusMap:
    """The hyperbolic translation (pure boost) carrying p to the origin."""
    vals, vecs = np.linalg.eigh(ball_to_hermitian(p))
    inv_sqrt = vecs @ np.diag(vals ** -0.5) @ vecs.conj().T
    return MoebiusMap.from_matrix(inv_sqrt)


# --- moments and heavy atoms ---

def euclidean_moment(mu: AtomicMeasure) -> np.ndarray:
    if len(mu) == 0:
        return np.zeros(3)
    return mu.weights @ pairs_to_xyz(mu.pairs)


def heavy_atom_check(mu: AtomicMeasure, cfg: Settings | None = None) -> tuple[SpherePoint, float] | None:
    """First atom of weight ≥ 1/2 − τ_atom (relative to the total mass), if any."""
    cfg = cfg or get_settings()
    if len(mu) == 0:
        return None
    rel = mu.weights / mu.mass
    hits = np.flatnonzero(rel >= 0.5 - cfg.tau_atom)
    if hits.size == 0:
        return None
    i = int(hits[0])
    if rel[i] < 0.5:
        logger.warning("atom of weight %.12f lies in the guard band below 1/2; treated as heavy", rel[i])
    return SpherePoint.from_pair(mu.pairs[i]), float(rel[i])


@dataclass(frozen=True, eq=False)
class BarycenterResult:
    center: HPoint
    translation: MoebiusMap
    iterations: int
    moment_norm: float
    contraction: float


def conformal_barycenter(mu: AtomicMeasure, cfg: Settings | None = None) -> BarycenterResult:
    """Damped fixed-point iteration for the point whose translate to the origin balances μ."""
    cfg = cfg or get_settings()
    heavy = heavy_atom_check(mu, cfg)
    if heavy is not None:
        raise NotInM1o("measure has an atom of weight at least 1/2", atom=repr(heavy[0]), weight=heavy[1])
    mu = mu.normalized()
    center = HPoint.origin()
    previous = None
    contraction = 0.0
    for it in range(cfg.barycenter_max_iter):
        t = translation_to_origin(center)
        m = euclidean_moment(push_forward(t, mu, cfg))
        norm = float(np.linalg.norm(m))
        if previous:
            contraction = norm / previous
        if norm < cfg.tau_bc:
            return BarycenterResult(center, t, it, norm, contraction)
        previous = norm
        step = HPoint(cfg.barycenter_damping * m)
        center = act_on_ball(t.inverse(), step)
    raise NoConvergence("barycenter iteration did not converge", moment_norm=previous)


def barycentered_normalize(mu: AtomicMeasure, cfg: Settings | None = None) -> tuple[MoebiusMap, AtomicMeasure]:
    cfg = cfg or get_settings()
    res = conformal_barycenter(mu, cfg)
    return res.translation, push_forward(res.translation, mu, cfg)


# --- classes modulo rotations ---

@dataclass(frozen=True, eq=False)
class DmClass:
    infinity: bool
    representative: AtomicMeasure | None = None
    features: np.ndarray | None = field(default=None)

    @classmethod
    def at_infinity(cls) -> "DmClass":
        return cls(True)


def spectrum(mu: AtomicMeasure, cfg: Settings | None = None) -> np.ndarray:
    cfg = cfg or get_settings()
    coeffs = mu.weights @ real_harmonics(mu.pairs, cfg.harmonic_cutoff)
    return power_spectrum(coeffs, cfg.harmonic_cutoff)


def dm_class(mu: AtomicMeasure, cfg: Settings | None = None) -> DmClass:
    cfg = cfg or get_settings()
    mu = mu.normalized()
    if heavy_atom_check(mu, cfg) is not None:
        return DmClass.at_infinity()
    _, nu = barycentered_normalize(mu, cfg)
    return DmClass(False, nu, spectrum(nu, cfg))


def _infinity_spectrum(cfg: Settings) -> np.ndarray:
    pair = AtomicMeasure.from_points([SpherePoint(0, 1), SpherePoint.infinity()], [0.5, 0.5], cfg)
    return spectrum(pair, cfg)


def feature_distance(c1: DmClass, c2: DmClass, cfg: Settings | None = None) -> float:
    """Euclidean distance of power spectra; [∞] is represented by the spectrum of an antipodal pair."""
    cfg = cfg or get_settings()
    if c1.infinity and c2.infinity:
        return 0.0
    s1 = _infinity_spectrum(cfg) if c1.infinity else c1.features
    s2 = _infinity_spectrum(cfg) if c2.infinity else c2.features
    return float(np.linalg.norm(s1 - s2))


def _coefficients(mu: AtomicMeasure, cfg: Settings) -> np.ndarray:
    return mu.weights @ real_harmonics(mu.pairs, cfg.harmonic_cutoff)


_AXES = np.eye(3)


def rotation_from_matrix(r: np.ndarray, cfg: Settings | None = None) -> MoebiusMap:
    """Möbius map acting on the sphere as the 3×3 rotation r (stereographic coordinates)."""
    src = [from_stereographic(e) for e in _AXES]
    dst = [from_stereographic(np.asarray(r) @ e) for e in _AXES]
    return fit_moebius(src, dst, cfg)


def _heavy_directions(mu: AtomicMeasure, count: int) -> np.ndarray:
    order = np.argsort(-mu.weights, kind="stable")[:count]
    return pairs_to_xyz(mu.pairs[order])


def _matched_starts(nu1: AtomicMeasure, nu2: AtomicMeasure, cfg: Settings) -> list[MoebiusMap]:
    """Rotations taking an ordered pair of heavy atoms of ν₁ onto one of ν₂."""
    a, b = _heavy_directions(nu1, 3), _heavy_directions(nu2, 3)
    starts = []
    for i, j in permutations(range(len(a)), 2):
        if np.linalg.norm(np.cross(a[i], a[j])) < 1e-6:
            continue
        for p, q in permutations(range(len(b)), 2):
            if np.linalg.norm(np.cross(b[p], b[q])) < 1e-6:
                continue
            rot, _ = Rotation.align_vectors(b[[p, q]], a[[i, j]], weights=[1.0, 0.5])
            starts.append(rotation_from_matrix(rot.as_matrix(), cfg))
    return starts


def _directed_search(nu1: AtomicMeasure, nu2: AtomicMeasure, cfg: Settings, seed: int) -> float:
    """Smallest coefficient distance found between rotations of ν₁ and ν₂."""
    target = _coefficients(nu2, cfg)

    def gap(rot: MoebiusMap) -> float:
        return float(np.sum((_coefficients(push_forward(rot, nu1, cfg), cfg) - target) ** 2))

    rng = np.random.default_rng(seed)
    candidates = [MoebiusMap.identity()] + _matched_starts(nu1, nu2, cfg)
    candidates += [random_rotation(rng) for _ in range(cfg.so3_restarts)]
    ranked = sorted(candidates, key=gap)[: cfg.so3_restarts]
    simplex = np.vstack([np.zeros(3), 0.5 * np.eye(3)])

    def descend(r0: MoebiusMap) -> float:
        res = minimize(lambda v: gap(rotation_from_vector(v).compose(r0)), np.zeros(3), method="Nelder-Mead",
                       options={"initial_simplex": simplex, "xatol": 1e-10, "fatol": 1e-16, "maxiter": 2000})
        return float(res.fun)

    best = min(parallel_map(descend, ranked, cfg.resolved_threads()))
    return math.sqrt(max(best, 0.0))


def aligned_distance(nu1: AtomicMeasure, nu2: AtomicMeasure, cfg: Settings | None = None, seed: int | None = None) -> float:
    """
    Rotation-aligned distance of orthonormal harmonic coefficients.

    The search runs from ν₁ to ν₂ and back and keeps the smaller value, so the
    result is symmetric. Every value is attained by some rotation, hence it
    bounds the quotient distance from above and the spectral distance from below.
    """
    cfg = cfg or get_settings()
    seed = cfg.seed if seed is None else seed
    return min(_directed_search(nu1, nu2, cfg, seed), _directed_search(nu2, nu1, cfg, seed))


def dm_distance(c1: DmClass, c2: DmClass, cfg: Settings | None = None, refine: bool = False) -> float:
    """
    Distance of two barycentered classes.

    The default is the spectral pseudo-metric. With refine=True and two finite
    classes the aligned coefficient distance is returned instead: an upper
    bound on the quotient distance that dominates the spectral one.
    """
    cfg = cfg or get_settings()
    feat = feature_distance(c1, c2, cfg)
    if not refine or c1.infinity or c2.infinity or feat == 0.0:
        return feat
    return max(feat, aligned_distance(c1.representative, c2.representative, cfg))
