"""
Degenerating families and their scaling schemes.

A family f_t is sampled along a schedule t_k. Level n of a scheme carries
post-scalings A_{n,k} with A_{n,k}∘f_k^n converging to a map φ_n whose
reduction is not constant. Level 0 is the identity, and each level is found
from the previous one: A_{n,k} sends f_k(A_{n-1,k}⁻¹(z_i)) to (0, 1, ∞) for a
reference triple z_i, so that the transition samples
T_{n,k} = A_{n,k}∘f_k∘A_{n-1,k}⁻¹ converge to φ_{n-1,n}. Then
φ_n = φ_{n-1,n}∘φ_{n-1} is assembled on reduced forms.

Everything touching A_{n,k} is computed in mpmath and rounded only after
renormalization.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterator, Sequence

import numpy as np
from sympy import QQ_I

from ratlimits.config import Settings, get_settings
from ratlimits.core import exact
from ratlimits.core import precision as mpx
from ratlimits.core.limits import CauchyCertificate, cauchy_certificate, projective_distance, snap_vanishing
from ratlimits.core.measures import AtomicMeasure, is_nonexceptional, pull_back, weakstar_distance
from ratlimits.core.mme import mme_sample, quasi_random_points
from ratlimits.core.moebius import MoebiusLimit, MoebiusMap, moebius_limit_classify
from ratlimits.core.ratmap import (
    ProjectiveRatMap,
    ReducedForm,
    compose,
    compose_reduced,
    moebius_reduced,
    reduce,
)
from ratlimits.core.sphere import SpherePoint, chordal_distance
from ratlimits.errors import (
    CaseUndetermined,
    DegenerateTriple,
    ExceptionalMass,
    HypothesisUnmet,
    NonMonotone,
    NotCauchy,
    ScalingFailed,
    SpecializationDegenerate,
)

logger = logging.getLogger(__name__)


# --- families ---

def _exact_value(c: Any):
    if isinstance(c, complex):
        return exact.gaussian(Fraction(c.real), Fraction(c.imag))
    if isinstance(c, (tuple, list)) and len(c) == 2:
        return exact.gaussian(c[0], c[1])
    return exact.gaussian(c)


@dataclass(frozen=True)
class TCoefficient:
    """A rational function of t: Σ num_j t^j / Σ den_j t^j (low to high)."""

    num: tuple = (0,)
    den: tuple = (1,)

    @classmethod
    def of(cls, value: Any) -> "TCoefficient":
        if isinstance(value, TCoefficient):
            return value
        if isinstance(value, dict):
            return cls(tuple(value.get("num", (0,))), tuple(value.get("den", (1,))))
        return cls((value,), (1,))

    def eval_mp(self, t):
        num = mpx.poly_eval([mpx.to_mpc(c) for c in self.num], t)
        den = mpx.poly_eval([mpx.to_mpc(c) for c in self.den], t)
        if den == 0:
            raise SpecializationDegenerate("coefficient denominator vanishes", t=str(t))
        return num / den

    def eval_exact(self, t):
        def ev(coeffs):
            acc = QQ_I.zero
            for c in reversed(coeffs):
                acc = acc * t + _exact_value(c)
            return acc

        den = ev(self.den)
        if den == QQ_I.zero:
            raise SpecializationDegenerate("coefficient denominator vanishes")
        return ev(self.num) / den


MatrixSpec = tuple  # ((TCoefficient, TCoefficient), (TCoefficient, TCoefficient))


@dataclass(frozen=True, eq=False)
class FamilySpec:
    degree: int
    numerator: tuple[TCoefficient, ...]
    denominator: tuple[TCoefficient, ...]
    schedule: tuple[Any, ...]
    scalings: dict[int, MatrixSpec] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self) -> None:
        d = self.degree
        if len(self.numerator) != d + 1 or len(self.denominator) != d + 1:
            raise ValueError(f"a degree {d} family needs {d + 1} coefficients per form")
        if not self.schedule:
            raise ValueError("empty schedule")

    @classmethod
    def build(cls, degree: int, numerator: Sequence, denominator: Sequence, schedule: Sequence,
              scalings: dict | None = None, name: str = "") -> "FamilySpec":
        scal = {}
        for level, m in (scalings or {}).items():
            scal[int(level)] = tuple(tuple(TCoefficient.of(x) for x in row) for row in m)
        return cls(
            degree,
            tuple(TCoefficient.of(c) for c in numerator),
            tuple(TCoefficient.of(c) for c in denominator),
            tuple(schedule),
            scal,
            name,
        )

    def mp_forms(self, t) -> tuple[list, list]:
        num = [c.eval_mp(t) for c in self.numerator]
        den = [c.eval_mp(t) for c in self.denominator]
        vec = mpx.normalize(num + den)
        return vec[: self.degree + 1], vec[self.degree + 1 :]

    def scaling_matrix(self, level: int, t) -> list:
        m = self.scalings[level]
        return [[m[0][0].eval_mp(t), m[0][1].eval_mp(t)], [m[1][0].eval_mp(t), m[1][1].eval_mp(t)]]


def geometric_schedule(start: Any, ratio: Any, count: int) -> tuple:
    """t_k = start·ratio^k, exact when start and ratio are decimal literals."""
    s = Fraction(str(start)) if not isinstance(start, complex) else start
    r = Fraction(str(ratio)) if not isinstance(ratio, complex) else ratio
    return tuple(s * r ** k for k in range(count))


def _mp_t(t):
    return mpx.to_mpc(t)


def sample_family(F: FamilySpec, t: Any, backend: str = "float", bits: int | None = None,
                  cfg: Settings | None = None) -> ProjectiveRatMap:
    """f_t with normalized coefficients; exact backend needs a rational t."""
    cfg = cfg or get_settings()
    d = F.degree
    if backend == "exact":
        tq = _exact_value(t)
        num = [c.eval_exact(tq) for c in F.numerator]
        den = [c.eval_exact(tq) for c in F.denominator]
        f = ProjectiveRatMap(d, num, den, "exact")
        if d >= 1 and exact.exact_resultant(f.numerator, f.denominator) == QQ_I.zero:
            raise SpecializationDegenerate("specialized map is degenerate", t=str(t))
        return f
    bits = bits or mpx.working_bits(d, 1, [t], cfg)
    with mpx.workprec(bits):
        num, den = F.mp_forms(_mp_t(t))
        if d >= 1 and abs(mpx.sylvester_det(num, den)) < mpx.mpf(2) ** (-(bits // 2)):
            raise SpecializationDegenerate("specialized map is degenerate", t=str(t))
        vec = mpx.to_numpy(num + den)
    return ProjectiveRatMap(d, vec[: d + 1], vec[d + 1 :], "float")


# --- scaling levels ---

class _TripleRejected(Exception):
    pass


def reference_triples() -> Iterator[tuple[SpherePoint, SpherePoint, SpherePoint]]:
    """Cube roots of unity, then consecutive unscrambled Halton points."""
    yield tuple(SpherePoint.from_complex(np.exp(2j * np.pi * j / 3)) for j in range(3))
    stream = quasi_random_points(3 * 64)
    for i in range(64):
        yield tuple(SpherePoint.from_pair(p) for p in stream[3 * i : 3 * i + 3])


@dataclass(frozen=True, eq=False)
class TransitionLimit:
    level: int
    limit: ProjectiveRatMap
    reduced: ReducedForm
    certificate: CauchyCertificate
    samples: np.ndarray
    triple: tuple[SpherePoint, ...] | None
    redraws: int = 0


def _limit_map(vectors: np.ndarray, d: int, cfg: Settings, label: str) -> tuple[ProjectiveRatMap, CauchyCertificate]:
    cert = cauchy_certificate(vectors, cfg, label=label)
    vec = snap_vanishing(vectors, cfg)
    return ProjectiveRatMap(d, vec[: d + 1], vec[d + 1 :]), cert


def _fit_level(
    maps_mp: Sequence[tuple[list, list]],
    prev: Sequence[list],
    triple: tuple[SpherePoint, ...] | None,
    analytic: Sequence[list] | None,
    bits: int,
    level: int,
    cfg: Settings,
) -> tuple[list, TransitionLimit]:
    d = len(maps_mp[0][0]) - 1
    floor = mpx.mpf(2) ** (-(bits // 2))
    scalings, samples = [], []
    for k, (f, a_prev) in enumerate(zip(maps_mp, prev)):
        inv = mpx.moebius_forms(mpx.adjugate(a_prev))
        if analytic is not None:
            a = mpx.normalize_matrix(analytic[k])
        else:
            src = [mpx.from_pair(p.pair()) for p in triple]
            imgs = [mpx.apply_map(f, mpx.apply_moebius(mpx.adjugate(a_prev), z)) for z in src]
            sep = min(mpx.chordal(imgs[i], imgs[j]) for i, j in ((0, 1), (0, 2), (1, 2)))
            if sep < floor:
                raise _TripleRejected(f"image separation {mpx.mpf(sep)} at sample {k}")
            a = mpx.normalize_matrix(mpx.triple_matrix(imgs[0], imgs[2], imgs[1]))
        t_num, t_den = mpx.compose(mpx.moebius_forms(a), mpx.compose(f, inv))
        scalings.append(a)
        samples.append(mpx.to_numpy(t_num + t_den))
    vectors = np.array(samples)
    try:
        limit, cert = _limit_map(vectors, d, cfg, f"transition {level}")
    except NotCauchy as e:
        if analytic is not None:
            raise NotCauchy(f"transition {level} is not Cauchy", level=level, **e.details) from e
        raise _TripleRejected(f"transition not Cauchy: {e.message}") from e
    reduced = reduce(limit, cfg)
    if reduced.reduction.is_constant:
        if analytic is not None:
            raise ScalingFailed("analytic scaling gives a constant transition limit", level=level)
        raise _TripleRejected("transition limit has constant reduction")
    return scalings, TransitionLimit(level, limit, reduced, cert, vectors, triple)


def _fit_with_redraws(maps_mp, prev, bits, level, cfg) -> tuple[list, TransitionLimit]:
    reasons = []
    for attempt, triple in enumerate(reference_triples()):
        if attempt > cfg.max_triple_redraws:
            break
        seps = [chordal_distance(triple[i], triple[j]) for i, j in ((0, 1), (0, 2), (1, 2))]
        if min(seps) < cfg.tau_sep:
            reasons.append("reference triple not separated")
            continue
        try:
            scalings, tr = _fit_level(maps_mp, prev, triple, None, bits, level, cfg)
        except (_TripleRejected, DegenerateTriple) as e:
            reasons.append(str(e))
            logger.warning("level %d: reference triple %d rejected (%s)", level, attempt, e)
            continue
        return scalings, TransitionLimit(tr.level, tr.limit, tr.reduced, tr.certificate, tr.samples, triple, attempt)
    raise ScalingFailed("no reference triple gives a nonconstant Cauchy limit", level=level, reasons=reasons)


@dataclass(frozen=True, eq=False)
class PostScaling:
    scalings: list[MoebiusMap]
    transition: TransitionLimit


def post_scaling_find(maps: Sequence[ProjectiveRatMap], cfg: Settings | None = None) -> PostScaling:
    """Möbius A_k with A_k∘f_k converging to a map with nonconstant reduction."""
    cfg = cfg or get_settings()
    bits = cfg.scheme_min_bits
    with mpx.workprec(bits):
        maps_mp = [([mpx.to_mpc(c) for c in f.num_f], [mpx.to_mpc(c) for c in f.den_f]) for f in maps]
        prev = [mpx.identity() for _ in maps]
        scalings, tr = _fit_with_redraws(maps_mp, prev, bits, 1, cfg)
        mats = [MoebiusMap.sample(mpx.matrix_to_numpy(a)) for a in scalings]
    return PostScaling(mats, tr)


def scalings_differ_by_convergent(first: Sequence[MoebiusMap], second: Sequence[MoebiusMap],
                                  cfg: Settings | None = None) -> MoebiusLimit:
    """Limit of B_k = second_k ∘ first_k⁻¹; nondegenerate when both are valid post-scalings."""
    cfg = cfg or get_settings()
    return moebius_limit_classify([b.matrix @ np.linalg.inv(a.matrix) for a, b in zip(first, second)], cfg)


# --- schemes ---

@dataclass(eq=False)
class ScalingScheme:
    family: FamilySpec
    levels: int
    bits: dict[int, int] = field(default_factory=dict)
    scalings_mp: dict[int, list] = field(default_factory=dict)
    transitions: dict[int, TransitionLimit] = field(default_factory=dict)
    phis: dict[int, ReducedForm] = field(default_factory=dict)
    direct_levels: dict[int, tuple[ProjectiveRatMap, CauchyCertificate]] = field(default_factory=dict)
    decomposition_residuals: dict[int, float] = field(default_factory=dict)
    decomposition_tolerances: dict[int, float] = field(default_factory=dict)
    inverse_limits: dict[int, MoebiusLimit] = field(default_factory=dict)
    fully_ramified: dict[int, bool] = field(default_factory=dict)

    @property
    def degree(self) -> int:
        return self.family.degree

    @property
    def schedule(self) -> tuple:
        return self.family.schedule

    def scaling_maps(self, level: int, cfg: Settings | None = None) -> list[MoebiusMap]:
        return [MoebiusMap.sample(mpx.matrix_to_numpy(a)) for a in self.scalings_mp[level]]

    def transition_samples(self, level: int) -> list[ProjectiveRatMap]:
        d = self.degree
        return [ProjectiveRatMap(d, v[: d + 1], v[d + 1 :]) for v in self.transitions[level].samples]

    def pairwise_samples(self, n: int, m: int, cfg: Settings | None = None) -> list[np.ndarray]:
        """A_{m,k} ∘ A_{n,k}⁻¹ per k, multiplied out before rounding."""
        cfg = cfg or get_settings()
        bits = max(self.bits.get(n, cfg.scheme_min_bits), self.bits.get(m, cfg.scheme_min_bits))
        with mpx.workprec(bits):
            return [
                mpx.matrix_to_numpy(mpx.matmul(am, mpx.adjugate(an)))
                for an, am in zip(self.scalings_mp[n], self.scalings_mp[m])
            ]

    def pairwise_limit(self, n: int, m: int, cfg: Settings | None = None) -> MoebiusLimit:
        """Limit of A_{m,k} ∘ A_{n,k}⁻¹."""
        cfg = cfg or get_settings()
        return moebius_limit_classify(self.pairwise_samples(n, m, cfg), cfg)

    def level_samples(self, level: int, cfg: Settings | None = None) -> list[ProjectiveRatMap]:
        """A_{level,k} ∘ f_k^level, rounded after renormalization."""
        cfg = cfg or get_settings()
        d = self.degree
        out = []
        with mpx.workprec(self.bits.get(level, cfg.scheme_min_bits)):
            for t, a in zip(self.schedule, self.scalings_mp[level]):
                f = self.family.mp_forms(_mp_t(t))
                it = f
                for _ in range(level - 1):
                    it = mpx.compose(f, it)
                num, den = mpx.compose(mpx.moebius_forms(a), it)
                vec = mpx.to_numpy(num + den)
                out.append(ProjectiveRatMap(d ** level, vec[: d ** level + 1], vec[d ** level + 1 :]))
        return out

    def sample(self, k: int, cfg: Settings | None = None) -> ProjectiveRatMap:
        return sample_family(self.family, self.schedule[k], cfg=cfg)


def _iterate_mp(f, n):
    it = f
    for _ in range(n - 1):
        it = mpx.compose(f, it)
    return it


def _sample_error(cert: CauchyCertificate) -> float:
    """Distance from the last sample to the limit, as far as the certificate can tell."""
    if math.isfinite(cert.tail_bound):
        return max(cert.last_step, cert.tail_bound)
    return cert.last_step


def _decomposition_tolerance(degree: int, certs: Sequence[CauchyCertificate], cfg: Settings) -> float:
    """Each limit is a last sample; composing them can miss the direct limit by their errors, amplified by the degree."""
    return max(cfg.tau_proj, 2.0 * degree * sum(_sample_error(c) for c in certs))


def left_class_limits(F: FamilySpec, levels: int, cfg: Settings | None = None) -> ScalingScheme:
    cfg = cfg or get_settings()
    d = F.degree
    ts = F.schedule
    if len(ts) < 3:
        raise HypothesisUnmet("schedule too short for Cauchy tests", length=len(ts))
    scheme = ScalingScheme(F, levels)
    scheme.phis[0] = ReducedForm(1, ProjectiveRatMap(1, [0, 1], [1, 0]), ())
    scheme.scalings_mp[0] = [mpx.identity() for _ in ts]
    scheme.bits[0] = cfg.scheme_min_bits
    for n in range(1, levels + 1):
        bits = mpx.working_bits(d, n, ts, cfg)
        scheme.bits[n] = bits
        logger.info("level %d: working precision %d bits", n, bits)
        with mpx.workprec(bits):
            maps_mp = [F.mp_forms(_mp_t(t)) for t in ts]
            prev = scheme.scalings_mp[n - 1]
            if n in F.scalings:
                analytic = [F.scaling_matrix(n, _mp_t(t)) for t in ts]
                scal, tr = _fit_level(maps_mp, prev, None, analytic, bits, n, cfg)
            else:
                scal, tr = _fit_with_redraws(maps_mp, prev, bits, n, cfg)
            scheme.scalings_mp[n] = scal
            scheme.transitions[n] = tr
            inv = [mpx.matrix_to_numpy(mpx.adjugate(a)) for a in scal]
            if d ** n <= cfg.direct_check_max_degree:
                vectors = []
                for f, a in zip(maps_mp, scal):
                    num, den = mpx.compose(mpx.moebius_forms(a), _iterate_mp(f, n))
                    vectors.append(mpx.to_numpy(num + den))
                scheme.direct_levels[n] = _limit_map(np.array(vectors), d ** n, cfg, f"level {n}")
        scheme.inverse_limits[n] = moebius_limit_classify(inv, cfg)
        scheme.phis[n] = compose_reduced(tr.reduced, scheme.phis[n - 1], cfg)
        scheme.fully_ramified[n] = (not tr.reduced.is_degenerate) and tr.reduced.reduction_degree == d
        if n in scheme.direct_levels and (n - 1) in scheme.direct_levels:
            lhs = compose(tr.limit, scheme.direct_levels[n - 1][0], cfg)
            res = projective_distance(lhs.coefficient_vector(), scheme.direct_levels[n][0].coefficient_vector())
            certs = (tr.certificate, scheme.direct_levels[n - 1][1], scheme.direct_levels[n][1])
            tol = _decomposition_tolerance(d ** n, certs, cfg)
            scheme.decomposition_residuals[n] = res
            scheme.decomposition_tolerances[n] = tol
            if res > tol:
                raise NotCauchy("decomposition identity fails", level=n, residual=res, tolerance=tol)
    return scheme


def limit_inverse_scalings(scheme: ScalingScheme, level: int) -> MoebiusLimit:
    """B_n = lim A_{n,k}⁻¹; its hole is where the level-n sphere sits in the original coordinate."""
    return scheme.inverse_limits[level]


def fully_ramified_times(scheme: ScalingScheme) -> list[tuple[int, bool]]:
    """Flag per target level n of the transition φ_{n-1,n}."""
    return sorted(scheme.fully_ramified.items())


# --- iterate limits ---

@dataclass(frozen=True, eq=False)
class IterateLimit:
    level: int
    reduced: ReducedForm
    certificate: CauchyCertificate
    direct: ProjectiveRatMap | None = None
    direct_reduced: ReducedForm | None = None


def _same_holes(a: ReducedForm, b: ReducedForm, tol: float) -> bool:
    if a.hole_mass != b.hole_mass or a.reduction_degree != b.reduction_degree:
        return False
    return all(b.depth_at(h.point, tol) == h.depth for h in a.holes)


def iterate_limits(scheme: ScalingScheme, cfg: Settings | None = None) -> list[IterateLimit]:
    """g_n = lim f_k^n for n ≤ N, as B_n ∘ φ_n with B_n = lim A_{n,k}⁻¹."""
    cfg = cfg or get_settings()
    d = scheme.degree
    out = []
    for n in range(1, scheme.levels + 1):
        b = scheme.inverse_limits[n]
        g = compose_reduced(moebius_reduced(b.limit), scheme.phis[n], cfg)
        cert = b.certificate
        direct = direct_red = None
        if d ** n <= cfg.direct_check_max_degree:
            with mpx.workprec(scheme.bits[n]):
                vectors = []
                for t in scheme.schedule:
                    num, den = _iterate_mp(scheme.family.mp_forms(_mp_t(t)), n)
                    vectors.append(mpx.to_numpy(num + den))
            direct, cert = _limit_map(np.array(vectors), d ** n, cfg, f"iterate {n}")
            if d ** n <= cfg.direct_reduce_max_degree:
                direct_red = reduce(direct, cfg)
                if not _same_holes(direct_red, g, cfg.tau_root_merge):
                    logger.warning("iterate %d: direct reduction and composed reduction disagree", n)
        out.append(IterateLimit(n, g, cert, direct, direct_red))
    return out


# --- depth profiles ---

@dataclass(frozen=True, eq=False)
class DepthProfile:
    measure: AtomicMeasure
    points: tuple[SpherePoint, ...]
    ratios: tuple[tuple[float, ...], ...]
    errors: tuple[float, ...]


def depth_profile_limit(scheme: ScalingScheme, cfg: Settings | None = None) -> DepthProfile:
    """Limit of η_{φ_n}/dⁿ with a geometric tail estimate per atom."""
    cfg = cfg or get_settings()
    n_levels = scheme.levels
    if n_levels < 3:
        raise HypothesisUnmet("depth profile needs at least 3 levels", levels=n_levels)
    d = scheme.degree
    tol = cfg.tau_root_merge
    points: list[SpherePoint] = []
    table: list[list[float]] = []
    for n in range(1, n_levels + 1):
        for h in scheme.phis[n].holes:
            if not any(chordal_distance(p, h.point) < tol for p in points):
                points.append(h.point)
    for p in points:
        table.append([scheme.phis[n].depth_at(p, tol) / d ** n for n in range(1, n_levels + 1)])
    weights, errors = [], []
    for p, row in zip(points, table):
        diffs = np.diff(row)
        if np.any(diffs < -1e-12):
            raise NonMonotone("depth ratio decreases", point=repr(p), ratios=row)
        last = row[-1]
        tail = 0.0
        if len(diffs) >= 2 and diffs[-1] > 0:
            q = diffs[-1] / diffs[-2] if diffs[-2] > 0 else 1.0
            tail = diffs[-1] * q / (1 - q) if q < 1 else 1.0 - last
        weights.append(min(1.0, last + tail))
        errors.append(abs(tail))
    measure = AtomicMeasure.from_points(points, weights, cfg) if points else AtomicMeasure.empty()
    return DepthProfile(measure, tuple(points), tuple(tuple(r) for r in table), tuple(errors))


# --- limit of pulled-back measures ---

CASE_SMALL = "small-growth"
CASE_POTENTIAL = "potential-good-reduction"
CASE_LARGE = "large-growth"
CASE_NONDEGENERATE = "nondegenerate"


@dataclass(frozen=True, eq=False)
class LimitReport:
    case: str
    limit: AtomicMeasure
    estimates: tuple[AtomicMeasure, ...]
    distance_to_limit: float
    cauchy_steps: tuple[float, ...]
    degree_ratios: tuple[float, ...]
    sampler_distance: float | None = None
    notes: tuple[str, ...] = ()


def _classify_case(scheme: ScalingScheme, limits: Sequence[IterateLimit], ratios: Sequence[float]) -> str:
    d = scheme.degree
    if not any(L.reduced.is_degenerate for L in limits):
        return CASE_NONDEGENERATE
    if len(ratios) < 3:
        raise CaseUndetermined("need at least 3 levels to classify", ratios=list(ratios))
    tail = ratios[-3:]
    if tail[0] > 0 and all(abs(r - tail[0]) <= 1e-12 for r in tail):
        last = limits[-1].reduced
        if len(last.holes) == 1 and last.reduction.is_constant and last.holes[0].depth == d ** limits[-1].level:
            return CASE_POTENTIAL
        return CASE_LARGE
    if all(b <= a / d + 1e-15 for a, b in zip(tail, tail[1:])):
        return CASE_SMALL
    raise CaseUndetermined("degree ratio has not stabilized", ratios=list(ratios))


def pullback_limit(
    F: FamilySpec,
    mu: AtomicMeasure,
    levels: int,
    cfg: Settings | None = None,
    scheme: ScalingScheme | None = None,
    sampler_samples: int = 0,
    sampler_steps: int = 30,
) -> LimitReport:
    """(1/dⁿ)(g_n)*μ for n ≤ N together with its identified limit."""
    cfg = cfg or get_settings()
    scheme = scheme or left_class_limits(F, levels, cfg)
    d = scheme.degree
    limits = iterate_limits(scheme, cfg)
    gs = [L.reduced for L in limits]
    if not is_nonexceptional(mu, gs, cfg):
        raise ExceptionalMass("measure charges an exceptional point of some g_n")
    rng = np.random.default_rng(cfg.seed)
    estimates = [pull_back(g, mu, cfg, cap=cfg.resample_cap, rng=rng).scaled(1.0 / d ** L.level)
                 for g, L in zip(gs, limits)]
    steps = tuple(weakstar_distance(a, b, cfg) for a, b in zip(estimates, estimates[1:]))
    ratios = tuple(scheme.phis[n].reduction_degree / d ** n for n in range(1, scheme.levels + 1))
    case = _classify_case(scheme, limits, ratios)
    notes: list[str] = []
    last = limits[-1]
    if case == CASE_SMALL:
        limit = depth_profile_limit(scheme, cfg).measure
    elif case == CASE_POTENTIAL:
        limit = AtomicMeasure.dirac(last.reduced.holes[0].point)
    elif case == CASE_LARGE:
        b = scheme.inverse_limits[last.level].limit
        if b.degenerate:
            limit = pull_back(scheme.phis[last.level], AtomicMeasure.dirac(b.hole), cfg,
                              cap=cfg.resample_cap, rng=rng).scaled(1.0 / d ** last.level)
        else:
            limit = estimates[-1]
            notes.append("inverse scaling limit is not degenerate; using the last estimate")
    else:
        g1 = limits[0].direct or scheme.sample(len(scheme.schedule) - 1, cfg)
        limit = mme_sample(g1, max(sampler_samples, 2000), sampler_steps, cfg.seed, cfg)
    sampler_distance = None
    if sampler_samples:
        f_last = scheme.sample(len(scheme.schedule) - 1, cfg)
        sampler_distance = weakstar_distance(mme_sample(f_last, sampler_samples, sampler_steps, cfg.seed, cfg), limit, cfg)
    return LimitReport(
        case,
        limit,
        tuple(estimates),
        weakstar_distance(estimates[-1], limit, cfg),
        steps,
        ratios,
        sampler_distance,
        tuple(notes),
    )


@dataclass(frozen=True)
class DepthRatioTable:
    levels: tuple[int, ...]
    points: tuple[SpherePoint, ...]
    ratios: tuple[tuple[float, ...], ...]
    constant: bool


def depth_ratio_stability(scheme: ScalingScheme, m: int, cfg: Settings | None = None,
                          limits: Sequence[IterateLimit] | None = None) -> DepthRatioTable:
    """d_z(g_n)/dⁿ for n > m once five consecutive fully ramified times follow m."""
    cfg = cfg or get_settings()
    window = range(m + 1, m + 6)
    if not all(scheme.fully_ramified.get(n, False) for n in window):
        raise HypothesisUnmet("fewer than 5 consecutive fully ramified times after m", m=m,
                              flags={str(k): v for k, v in scheme.fully_ramified.items()})
    limits = limits or iterate_limits(scheme, cfg)
    d = scheme.degree
    tol = cfg.tau_root_merge
    rows = [L for L in limits if L.level > m]
    points: list[SpherePoint] = []
    for L in rows:
        for h in L.reduced.holes:
            if not any(chordal_distance(p, h.point) < tol for p in points):
                points.append(h.point)
    table = tuple(tuple(L.reduced.depth_at(p, tol) / d ** L.level for p in points) for L in rows)
    constant = all(max((abs(a - b) for a, b in zip(row, table[0])), default=0.0) <= 1e-9 for row in table)
    return DepthRatioTable(tuple(L.level for L in rows), tuple(points), table, constant)
