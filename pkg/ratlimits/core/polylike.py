"""
Polynomial-like restrictions of degenerating sequences.

A pair of scalings B₀, B₁ with B₁∘h_k∘B₀⁻¹ → φ nondegenerate and B₁∘B₀⁻¹
degenerate (hole a ∈ C̄₀, reduction b ∈ C̄₁) gives a polynomial-like
restriction of h_k when φ has local degree d at a and φ(a) ≠ b. The
certificate is built in charts where a = 0 on the source sphere and
φ(a) = 0, b = ∞ on the target sphere:

    T = N₁∘B₁∘h∘B₀⁻¹∘N₀⁻¹,   C = N₀∘B₀∘B₁⁻¹∘N₁⁻¹,   H = C∘T.

With D a small disk around 0, D′ = T⁻¹(D) and C(D) ⋐ D′, the map h is
polynomial-like of degree d from the complement of D′ onto the complement
of C(D) (both pulled back to the original coordinate by N₀∘B₀).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from ratlimits.config import Settings, get_settings
from ratlimits.core.limits import cauchy_certificate, snap_vanishing
from ratlimits.core.mme import mme_sample
from ratlimits.core.moebius import MoebiusMap, moebius_limit_classify
from ratlimits.core.parallel_executor import parallel_map
from ratlimits.core.ratmap import (
    ProjectiveRatMap,
    compose,
    iterate,
    local_degree,
    moebius_as_map,
    reduce,
)
from ratlimits.core.rescaling import FamilySpec, ScalingScheme, left_class_limits
from ratlimits.core.roots import form_roots, form_roots_batch
from ratlimits.core.sphere import SpherePoint, chart_values, chordal_distance, chordal_pairs, complex_to_pairs
from ratlimits.errors import (
    ContainmentFailed,
    DegreeMismatch,
    HypothesisUnmet,
    NotCauchy,
    NotConverging,
    NotIndependent,
    RatLimitsError,
)

logger = logging.getLogger(__name__)


# --- scaling pairs ---

@dataclass(frozen=True, eq=False)
class PairSamples:
    maps: Sequence[ProjectiveRatMap]          # h_k
    source: Sequence[MoebiusMap]              # B₀_k
    target: Sequence[MoebiusMap]              # B₁_k
    transitions: Sequence[ProjectiveRatMap]   # B₁_k ∘ h_k ∘ B₀_k⁻¹
    switch: Sequence[np.ndarray]              # B₁_k ∘ B₀_k⁻¹

    @classmethod
    def from_maps(cls, maps: Sequence[ProjectiveRatMap], b0: Sequence[MoebiusMap], b1: Sequence[MoebiusMap],
                  cfg: Settings | None = None) -> "PairSamples":
        cfg = cfg or get_settings()
        transitions = [
            compose(moebius_as_map(q), compose(h, moebius_as_map(p.inverse()), cfg), cfg)
            for h, p, q in zip(maps, b0, b1)
        ]
        switch = [q.matrix @ np.linalg.inv(p.matrix) for p, q in zip(b0, b1)]
        return cls(list(maps), list(b0), list(b1), transitions, switch)

    @classmethod
    def from_scheme(cls, scheme: ScalingScheme, level: int, cfg: Settings | None = None) -> "PairSamples":
        """B₀ = A_level, B₁ = A_{level+1}, h = f_k; samples come from the multiprecision scheme."""
        cfg = cfg or get_settings()
        maps = [scheme.sample(k, cfg) for k in range(len(scheme.schedule))]
        return cls(
            maps,
            scheme.scaling_maps(level, cfg),
            scheme.scaling_maps(level + 1, cfg),
            scheme.transition_samples(level + 1),
            scheme.pairwise_samples(level, level + 1, cfg),
        )


@dataclass(frozen=True, eq=False)
class JuliaHypotheses:
    a: SpherePoint
    b: SpherePoint
    phi: ProjectiveRatMap
    local_degree: int
    phi_a: SpherePoint
    passed: bool
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "a": repr(self.a),
            "b": repr(self.b),
            "local_degree": self.local_degree,
            "phi_a": repr(self.phi_a),
            "passed": self.passed,
            "reason": self.reason,
        }


def check_julia_hypotheses(pair: PairSamples, cfg: Settings | None = None) -> JuliaHypotheses:
    cfg = cfg or get_settings()
    d = pair.maps[0].degree
    vectors = np.array([t.coefficient_vector() for t in pair.transitions])
    try:
        cauchy_certificate(vectors, cfg, label="B1 h B0^-1")
    except NotCauchy as e:
        raise NotConverging("conjugated maps do not converge", **e.details) from e
    vec = snap_vanishing(vectors, cfg)
    phi = ProjectiveRatMap(d, vec[: d + 1], vec[d + 1 :])
    if reduce(phi, cfg).is_degenerate:
        raise HypothesisUnmet("limit of the conjugated maps is degenerate")
    lim = moebius_limit_classify(pair.switch, cfg)
    if not lim.degenerate:
        raise NotIndependent("the two scalings converge to a Möbius map")
    a, b = lim.limit.hole, lim.limit.reduction
    deg = local_degree(phi, a, cfg)
    phi_a = phi.evaluate(a, cfg)
    reasons = []
    if deg != d:
        reasons.append(f"local degree at a is {deg}, not {d}")
    if chordal_distance(phi_a, b) < cfg.tau_sep:
        reasons.append("phi(a) coincides with b")
    return JuliaHypotheses(a, b, phi, deg, phi_a, not reasons, "; ".join(reasons))


# --- curve helpers ---

def winding_number(values: np.ndarray, center: complex) -> float:
    """Winding of the closed polyline through ``values`` around ``center``."""
    v = np.append(values, values[0]) - center
    ang = np.unwrap(np.angle(v))
    return float((ang[-1] - ang[0]) / (2 * math.pi))


def preimage_curves(f: ProjectiveRatMap, targets: np.ndarray, cfg: Settings | None = None) -> list[np.ndarray]:
    """Closed curves f⁻¹(γ) for a closed curve γ sampled at ``targets`` (chart values).

    Roots are continued from sample to sample by optimal matching and the
    monodromy of the loop stitches the tracks into closed curves.
    """
    cfg = cfg or get_settings()
    pencils = f.num_f[None, :] - targets[:, None] * f.den_f[None, :]
    vals = chart_values(form_roots_batch(pencils, cfg))
    if not np.all(np.isfinite(vals)):
        raise ContainmentFailed("preimage curve passes through infinity")
    tracks = [vals[0]]
    for row in vals[1:]:
        _, cols = linear_sum_assignment(np.abs(tracks[-1][:, None] - row[None, :]))
        tracks.append(row[cols])
    tracks = np.array(tracks)
    _, perm = linear_sum_assignment(np.abs(tracks[-1][:, None] - tracks[0][None, :]))
    curves, seen = [], set()
    for start in range(tracks.shape[1]):
        i, pieces = start, []
        while i not in seen:
            seen.add(i)
            pieces.append(tracks[:, i])
            i = int(perm[i])
        if pieces:
            curves.append(np.concatenate(pieces))
    return curves


def _circle(center: complex, radius: float, n: int) -> np.ndarray:
    return center + radius * np.exp(2j * np.pi * np.arange(n) / n)


def _to_pairs(chart: MoebiusMap, values: np.ndarray) -> np.ndarray:
    return chart.inverse().apply_pairs(complex_to_pairs(values))


def periodic_points(h: ProjectiveRatMap, max_period: int = 3, cfg: Settings | None = None) -> list[SpherePoint]:
    """Points of period ≤ max_period, each listed once."""
    cfg = cfg or get_settings()
    out: list[SpherePoint] = []
    for p in range(1, max_period + 1):
        hp = iterate(h, p, cfg) if p > 1 else h.to_float()
        form = np.concatenate([[0], hp.den_f]) - np.concatenate([hp.num_f, [0]])
        for c in form_roots(form, cfg, radius=cfg.tau_root_merge).clusters:
            if all(chordal_distance(c.point, q) >= cfg.tau_root_merge for q in out):
                out.append(c.point)
    return out


# --- certificates ---

@dataclass(frozen=True, eq=False)
class PolyLikeCertificate:
    degree: int
    inner_boundary: tuple[np.ndarray, ...]     # ∂U′ as pairs, original coordinate
    outer_boundary: tuple[np.ndarray, ...]     # ∂U
    modulus: float
    winding: float
    separation: float
    chart: MoebiusMap
    test_map: ProjectiveRatMap
    test_radius: float
    inner_is_small: bool
    periodic: tuple[SpherePoint, ...] = ()
    basin_points: tuple[SpherePoint, ...] = ()
    basin_seed: SpherePoint | None = None
    index: int | None = None
    halvings: int = 0

    def in_inner(self, p: SpherePoint) -> bool:
        """Membership in U′."""
        v = self.test_map.evaluate(self.chart.apply(p))
        small = (not v.is_infinity) and abs(v.to_complex()) < self.test_radius
        return small if self.inner_is_small else not small

    def to_dict(self) -> dict:
        def curves(cs):
            return [[[float(x.real), float(x.imag)] for x in chart_values(c)] for c in cs]

        return {
            "degree": self.degree,
            "modulus_lower_bound": self.modulus,
            "winding": self.winding,
            "separation": self.separation,
            "inner_boundary": curves(self.inner_boundary),
            "outer_boundary": curves(self.outer_boundary),
            "periodic_points": [repr(p) for p in self.periodic],
            "basin_points": [repr(p) for p in self.basin_points],
            "k": self.index,
            "halvings": self.halvings,
        }


def _split_periodic(points: Sequence[SpherePoint], member: Callable[[SpherePoint], bool], cfg: Settings):
    inside = [p for p in points if member(p)]
    basin = [p for p in points if not member(p)]
    if basin and max(chordal_distance(p, basin[0]) for p in basin) >= cfg.tau_root_merge:
        raise ContainmentFailed("periodic points outside U′ do not reduce to one attracting point",
                                outside=[repr(p) for p in basin])
    return tuple(inside), tuple(basin)


def _chart_sending(p: SpherePoint) -> MoebiusMap:
    """A rotation of the sphere sending p to 0."""
    return MoebiusMap.sample([[p.w, -p.z], [np.conj(p.z), np.conj(p.w)]])


def _chart_pair(zero: SpherePoint, pole: SpherePoint) -> MoebiusMap:
    return MoebiusMap.sample([[zero.w, -zero.z], [pole.w, -pole.z]])


def extract_polynomial_like(
    pair: PairSamples,
    k: int,
    cfg: Settings | None = None,
    hypotheses: JuliaHypotheses | None = None,
    seed_radius: float | None = None,
) -> PolyLikeCertificate:
    cfg = cfg or get_settings()
    hyp = hypotheses or check_julia_hypotheses(pair, cfg)
    if not hyp.passed:
        raise HypothesisUnmet("hypotheses for a polynomial-like restriction fail", reason=hyp.reason)
    d = hyp.phi.degree
    h = pair.maps[k]
    n0 = _chart_sending(hyp.a)
    n1 = _chart_pair(hyp.phi_a, hyp.b)
    chart = MoebiusMap.sample(n0.matrix @ pair.source[k].matrix)
    t_map = compose(moebius_as_map(n1), compose(pair.transitions[k], moebius_as_map(n0.inverse()), cfg), cfg)
    c_map = MoebiusMap.sample(n0.matrix @ np.linalg.inv(pair.switch[k]) @ np.linalg.inv(n1.matrix))
    h_map = compose(moebius_as_map(c_map), t_map, cfg)
    center = complex(chart_values(c_map.apply_pairs(np.array([[0, 1]], dtype=complex)))[0])
    r = seed_radius or cfg.seed_disk_radius
    rho = r / math.sqrt(1 - r * r)
    n = cfg.boundary_samples
    last_error: RatLimitsError | None = None
    for halving in range(cfg.max_disk_halvings + 1):
        if halving:
            logger.warning("k=%d: shrinking the seed disk to chart radius %.3g", k, rho)
        circle = _circle(0, rho, n)
        try:
            dprime = preimage_curves(t_map, circle, cfg)
        except ContainmentFailed as e:
            last_error = e
            rho /= 2
            continue
        inner_vals = chart_values(c_map.apply_pairs(complex_to_pairs(circle)))
        images = chart_values(t_map.evaluate_pairs(complex_to_pairs(inner_vals), cfg))
        d_pairs = complex_to_pairs(np.concatenate(dprime))
        sep = float(np.min(chordal_pairs(complex_to_pairs(inner_vals)[:, None], d_pairs[None])))
        if not (np.all(np.abs(images) < rho) and sep >= cfg.tau_ann):
            last_error = ContainmentFailed("image disk is not compactly inside its preimage", k=k, separation=sep)
            rho /= 2
            continue
        winding = sum(winding_number(chart_values(h_map.evaluate_pairs(complex_to_pairs(c), cfg)), center) for c in dprime)
        degree = int(round(winding))
        if degree != d:
            raise DegreeMismatch("argument principle degree differs from d", k=k, winding=winding, degree=d)
        all_d = np.concatenate(dprime)
        r1 = float(np.max(np.abs(inner_vals - center)))
        r2 = float(np.min(np.abs(all_d - center)))
        modulus = math.log(r2 / r1) / (2 * math.pi) if r2 > r1 else 0.0
        cert = PolyLikeCertificate(
            degree=d,
            inner_boundary=tuple(_to_pairs(chart, c) for c in dprime),
            outer_boundary=(_to_pairs(chart, inner_vals),),
            modulus=modulus,
            winding=winding,
            separation=sep,
            chart=chart,
            test_map=t_map,
            test_radius=rho,
            inner_is_small=False,
            basin_seed=SpherePoint.from_pair(_to_pairs(chart, np.array([0.5 * r2 + center]))[0]),
            index=k,
            halvings=halving,
        )
        inside, basin = _split_periodic(periodic_points(h, 3, cfg), cert.in_inner, cfg)
        return replace(cert, periodic=inside, basin_points=basin)
    raise last_error or ContainmentFailed("no seed disk gives a certificate", k=k)


def round_disk_certificate(h: ProjectiveRatMap, radius: float, cfg: Settings | None = None) -> PolyLikeCertificate:
    """U = {|z| < R}, U′ = h⁻¹(U) for a single map escaping on |z| = R."""
    cfg = cfg or get_settings()
    d = h.degree
    n = cfg.boundary_samples
    boundary = _circle(0, radius, n)
    on_boundary = chart_values(h.evaluate_pairs(complex_to_pairs(boundary), cfg))
    if not np.all(np.abs(on_boundary) > radius):
        raise ContainmentFailed("map does not escape on the circle", radius=radius)
    curves = preimage_curves(h, boundary, cfg)
    all_c = np.concatenate(curves)
    sep = float(np.min(chordal_pairs(complex_to_pairs(all_c)[:, None], complex_to_pairs(boundary)[None])))
    if not (np.all(np.abs(all_c) < radius) and sep >= cfg.tau_ann):
        raise ContainmentFailed("preimage of the disk is not compactly inside it", separation=sep)
    winding = winding_number(on_boundary, 0)
    if int(round(winding)) != d:
        raise DegreeMismatch("argument principle degree differs from d", winding=winding, degree=d)
    r1 = float(np.max(np.abs(all_c)))
    ident = MoebiusMap.identity()
    cert = PolyLikeCertificate(
        degree=d,
        inner_boundary=tuple(complex_to_pairs(c) for c in curves),
        outer_boundary=(complex_to_pairs(boundary),),
        modulus=math.log(radius / r1) / (2 * math.pi),
        winding=winding,
        separation=sep,
        chart=ident,
        test_map=h.to_float(),
        test_radius=radius,
        inner_is_small=True,
        basin_seed=SpherePoint.from_complex(2 * radius),
    )
    inside, basin = _split_periodic(periodic_points(h, 3, cfg), cert.in_inner, cfg)
    return replace(cert, periodic=inside, basin_points=basin)


# --- localization ---

@dataclass(frozen=True)
class LocalizationReport:
    support_inside: bool
    outside_atoms: int
    orbit_converges: bool
    passed: bool


def julia_localization_check(
    h: ProjectiveRatMap,
    cert: PolyLikeCertificate,
    n_samples: int = 2000,
    n_steps: int = 30,
    seed: int | None = None,
    cfg: Settings | None = None,
    region: Callable[[SpherePoint], bool] | None = None,
) -> LocalizationReport:
    """Sampled Julia set inside U′ and an orbit from the basin side settling down."""
    cfg = cfg or get_settings()
    member = region or cert.in_inner
    mu = mme_sample(h, n_samples, n_steps, seed, cfg)
    outside = sum(1 for p in mu.points() if not member(p))
    orbit = [cert.basin_seed]
    for _ in range(60):
        orbit.append(h.evaluate(orbit[-1], cfg))
    stays = not any(cert.in_inner(p) for p in orbit)
    settles = chordal_distance(orbit[-1], orbit[-2]) < 1e-8
    return LocalizationReport(outside == 0, outside, stays and settles, outside == 0 and stays and settles)


# --- driver over a family ---

@dataclass(frozen=True, eq=False)
class PolyLikeSearch:
    window: int
    run: tuple[int, ...]
    experimental: bool
    level: int | None
    hypotheses: tuple[JuliaHypotheses, ...]
    certificates: tuple[PolyLikeCertificate, ...]
    failures: tuple[tuple[int, str], ...] = field(default_factory=tuple)


def _ramified_run(flags: dict[int, bool], window: int) -> tuple[int, ...]:
    levels = sorted(flags)
    run: list[int] = []
    for n in levels:
        if flags[n] and (not run or n == run[-1] + 1):
            run.append(n)
        elif flags[n]:
            run = [n]
        else:
            run = []
        if len(run) >= window:
            return tuple(run)
    return ()


def polynomial_like_search(
    F: FamilySpec,
    levels: int,
    window: int = 5,
    cfg: Settings | None = None,
    scheme: ScalingScheme | None = None,
    indices: Sequence[int] | None = None,
) -> PolyLikeSearch:
    """Certificates for a family with ``window`` consecutive fully ramified times."""
    cfg = cfg or get_settings()
    if window < 5:
        logger.warning("window %d below 5: results are experimental", window)
    scheme = scheme or left_class_limits(F, levels, cfg)
    run = _ramified_run(scheme.fully_ramified, window)
    if not run:
        raise HypothesisUnmet(
            "not enough consecutive fully ramified times",
            window=window,
            flags={str(n): v for n, v in scheme.fully_ramified.items()},
        )
    tried: list[JuliaHypotheses] = []
    for n in run:
        pair = PairSamples.from_scheme(scheme, n - 1, cfg)
        hyp = check_julia_hypotheses(pair, cfg)
        tried.append(hyp)
        if not hyp.passed:
            continue
        ks = list(indices) if indices is not None else list(range(len(scheme.schedule)))

        def attempt(k: int) -> PolyLikeCertificate | tuple[int, str]:
            try:
                return extract_polynomial_like(pair, k, cfg, hypotheses=hyp)
            except (ContainmentFailed, DegreeMismatch) as e:
                return (k, e.message)

        results = parallel_map(attempt, ks, cfg.resolved_threads())
        certs = [r for r in results if isinstance(r, PolyLikeCertificate)]
        failures = [r for r in results if not isinstance(r, PolyLikeCertificate)]
        logger.info("level pair (%d, %d): %d certificates, %d failures", n - 1, n, len(certs), len(failures))
        return PolyLikeSearch(window, run, window < 5, n - 1, tuple(tried), tuple(certs), tuple(failures))
    return PolyLikeSearch(window, run, window < 5, None, tuple(tried), ())
