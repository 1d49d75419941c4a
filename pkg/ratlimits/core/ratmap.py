"""
Possibly degenerate rational maps of the Riemann sphere.

A map of intended degree d is the projective class of a coefficient pair
(a_0..a_d; b_0..b_d) with a_i the coefficient of z^i w^(d-i). When P and Q
share a factor H the map is degenerate: it acts as its reduction [P/H : Q/H]
away from the roots of H (its holes), and the multiplicity of a root is its
depth. Two backends: "exact" (sympy Gaussian rationals, the oracle) and
"float" (numpy, normalized to sup-norm 1 with the largest coefficient real
positive).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Literal, Sequence

import numpy as np
from sympy import QQ_I

from ratlimits.config import Settings, get_settings
from ratlimits.core import exact
from ratlimits.core.limits import projective_distance as _pd
from ratlimits.core.moebius import MoebiusMap
from ratlimits.core.roots import RootCluster, cluster_pairs, form_roots, form_roots_batch
from ratlimits.core.sphere import SpherePoint, chordal_distance, chordal_pairs, normalize_pairs, points_to_pairs
from ratlimits.errors import HoleEvaluation, Indeterminate, InconclusiveK, RankAmbiguity

logger = logging.getLogger(__name__)

Backend = Literal["float", "exact"]
Stability = Literal["stable", "semistable-only", "unstable"]


def _normalize_float(v: np.ndarray) -> np.ndarray:
    sup_idx = int(np.argmax(np.abs(v)))
    lead = v[sup_idx]
    if lead == 0 or not np.all(np.isfinite(v)):
        raise ValueError("coefficients must be finite and not all zero")
    return v * (abs(lead) / lead) / abs(lead)


@dataclass(frozen=True, eq=False)
class ProjectiveRatMap:
    degree: int
    numerator: Any
    denominator: Any
    backend: Backend = "float"

    def __post_init__(self) -> None:
        d = int(self.degree)
        if d < 0:
            raise ValueError("degree must be nonnegative")
        if len(self.numerator) != d + 1 or len(self.denominator) != d + 1:
            raise ValueError(f"a degree {d} map needs {d + 1} coefficients per form")
        if self.backend == "float":
            v = np.concatenate([np.asarray(self.numerator, dtype=complex), np.asarray(self.denominator, dtype=complex)])
            v = _normalize_float(v)
            v.setflags(write=False)
            object.__setattr__(self, "numerator", v[: d + 1])
            object.__setattr__(self, "denominator", v[d + 1 :])
        elif self.backend == "exact":
            coeffs = [QQ_I.convert(c) for c in list(self.numerator) + list(self.denominator)]
            lead = next((c for c in coeffs if c != QQ_I.zero), None)
            if lead is None:
                raise ValueError("coefficients must not all vanish")
            coeffs = [c / lead for c in coeffs]
            object.__setattr__(self, "numerator", tuple(coeffs[: d + 1]))
            object.__setattr__(self, "denominator", tuple(coeffs[d + 1 :]))
        else:
            raise ValueError(f"unknown backend {self.backend!r}")
        object.__setattr__(self, "degree", d)

    # --- constructors ---
    @classmethod
    def from_lists(cls, numerator: Sequence, denominator: Sequence, backend: Backend = "float") -> "ProjectiveRatMap":
        d = max(len(numerator), len(denominator)) - 1
        num = list(numerator) + [0] * (d + 1 - len(numerator))
        den = list(denominator) + [0] * (d + 1 - len(denominator))
        if backend == "exact":
            num = [_as_gaussian(c) for c in num]
            den = [_as_gaussian(c) for c in den]
        return cls(d, num, den, backend)

    @classmethod
    def polynomial(cls, coeffs: Sequence, backend: Backend = "float") -> "ProjectiveRatMap":
        """z ↦ Σ c_i z^i, as a map of degree len(coeffs) - 1."""
        d = len(coeffs) - 1
        return cls.from_lists(list(coeffs), [1] + [0] * d, backend)

    @classmethod
    def constant(cls, value: SpherePoint) -> "ProjectiveRatMap":
        return cls(0, [value.z], [value.w], "float")

    # --- views ---
    @property
    def num_f(self) -> np.ndarray:
        if self.backend == "float":
            return self.numerator
        return np.array([exact.gaussian_to_complex(c) for c in self.numerator], dtype=complex)

    @property
    def den_f(self) -> np.ndarray:
        if self.backend == "float":
            return self.denominator
        return np.array([exact.gaussian_to_complex(c) for c in self.denominator], dtype=complex)

    def coefficient_vector(self) -> np.ndarray:
        return np.concatenate([self.num_f, self.den_f])

    def to_float(self) -> "ProjectiveRatMap":
        if self.backend == "float":
            return self
        return ProjectiveRatMap(self.degree, self.num_f, self.den_f, "float")

    def to_exact(self, max_denominator: int = 10**12) -> "ProjectiveRatMap":
        if self.backend == "exact":
            return self

        def conv(c: complex):
            return exact.gaussian(
                Fraction(c.real).limit_denominator(max_denominator),
                Fraction(c.imag).limit_denominator(max_denominator),
            )

        return ProjectiveRatMap(self.degree, [conv(c) for c in self.numerator], [conv(c) for c in self.denominator], "exact")

    @property
    def is_constant(self) -> bool:
        return self.degree == 0

    def constant_value(self) -> SpherePoint:
        if self.degree != 0:
            raise ValueError("not a constant map")
        return SpherePoint(self.num_f[0], self.den_f[0])

    def pencil(self, point: SpherePoint) -> np.ndarray:
        """Form p_w·P − p_z·Q whose roots are the preimages of ``point``."""
        return point.w * self.num_f - point.z * self.den_f

    def evaluate_forms(self, pairs: np.ndarray) -> np.ndarray:
        """(P(z,w), Q(z,w)) for every row of ``pairs``, not normalized."""
        pairs = np.asarray(pairs, dtype=complex).reshape(-1, 2)
        d = self.degree
        i = np.arange(d + 1)
        mono = pairs[:, :1] ** i[None, :] * pairs[:, 1:] ** (d - i)[None, :]
        return np.stack([mono @ self.num_f, mono @ self.den_f], axis=-1)

    def evaluate_pairs(self, pairs: np.ndarray, cfg: Settings | None = None) -> np.ndarray:
        cfg = cfg or get_settings()
        pairs = normalize_pairs(np.asarray(pairs, dtype=complex).reshape(-1, 2))
        vals = self.evaluate_forms(pairs)
        scale = float(np.sum(np.abs(self.coefficient_vector())))
        bad = np.max(np.abs(vals), axis=1) <= cfg.tau_pt * scale
        if np.any(bad):
            raise HoleEvaluation("evaluation at a hole of the map", count=int(bad.sum()))
        return normalize_pairs(vals)

    def evaluate(self, p: SpherePoint, cfg: Settings | None = None) -> SpherePoint:
        return SpherePoint.from_pair(self.evaluate_pairs(p.pair()[None, :], cfg)[0])

    def __repr__(self) -> str:
        return f"ProjectiveRatMap(degree={self.degree}, backend={self.backend!r})"


def _as_gaussian(c):
    if isinstance(c, (tuple, list)) and len(c) == 2:
        return exact.gaussian(c[0], c[1])
    if isinstance(c, complex):
        return exact.gaussian(c.real, c.imag)
    try:
        return QQ_I.convert(c)
    except Exception:
        return exact.gaussian(c)


def moebius_as_map(a: MoebiusMap) -> ProjectiveRatMap:
    (p, q), (r, s) = a.matrix
    return ProjectiveRatMap(1, [q, p], [s, r], "float")


def projective_distance(f: ProjectiveRatMap, g: ProjectiveRatMap) -> float:
    if f.degree != g.degree:
        raise ValueError("maps of different degrees")
    return _pd(f.coefficient_vector(), g.coefficient_vector())


# --- resultant ---

def sylvester_float(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    d = len(num) - 1
    m = np.zeros((2 * d, 2 * d), dtype=complex)
    a, b = num[::-1], den[::-1]
    for i in range(d):
        m[i, i : i + d + 1] = a
        m[d + i, i : i + d + 1] = b
    return m


def resultant(f: ProjectiveRatMap):
    """Resultant of (P, Q): a QQ_I element on the exact backend, a complex number otherwise."""
    if f.degree == 0:
        raise ValueError("constant maps have no resultant")
    if f.backend == "exact":
        return exact.exact_resultant(f.numerator, f.denominator)
    return complex(np.linalg.det(sylvester_float(f.num_f, f.den_f)))


def resultant_vanishes(f: ProjectiveRatMap, cfg: Settings | None = None) -> bool:
    cfg = cfg or get_settings()
    res = resultant(f)
    if f.backend == "exact":
        return res == QQ_I.zero
    return abs(res) < cfg.tau_res


# --- reduced forms ---

@dataclass(frozen=True)
class Hole:
    point: SpherePoint
    depth: int


@dataclass(frozen=True, eq=False)
class ReducedForm:
    degree: int
    reduction: ProjectiveRatMap
    holes: tuple[Hole, ...]
    residual: float = 0.0
    confidence: str = "exact"
    gcd_factor: Any = None
    chain: tuple[ProjectiveRatMap, ...] = field(default=())

    @property
    def reduction_degree(self) -> int:
        return self.reduction.degree

    @property
    def is_degenerate(self) -> bool:
        return bool(self.holes)

    @property
    def hole_mass(self) -> int:
        return sum(h.depth for h in self.holes)

    def steps(self) -> tuple[ProjectiveRatMap, ...]:
        """Maps whose composition (first applied first) is the reduction."""
        return self.chain or (self.reduction,)

    def depth_at(self, p: SpherePoint, tol: float = 1e-6) -> int:
        return sum(h.depth for h in self.holes if chordal_distance(h.point, p) < tol)

    def apply_reduction(self, p: SpherePoint, cfg: Settings | None = None) -> SpherePoint:
        """Value of the reduction at p (defined everywhere, holes included)."""
        if self.reduction.is_constant:
            return self.reduction.constant_value()
        for step in self.steps():
            p = step.evaluate(p, cfg) if not step.is_constant else step.constant_value()
        return p

    def gcd_coefficients(self) -> np.ndarray:
        if self.gcd_factor is not None:
            return np.asarray([exact.gaussian_to_complex(c) for c in self.gcd_factor]) if isinstance(
                self.gcd_factor, tuple
            ) else np.asarray(self.gcd_factor)
        return hole_form(self.holes)


def hole_form(holes: Iterable[Hole]) -> np.ndarray:
    """Product of L_h^depth with L_h = h_w·z − h_z·w."""
    form = np.array([1.0 + 0j])
    for h in holes:
        lin = np.array([-h.point.z, h.point.w], dtype=complex)
        for _ in range(h.depth):
            form = np.convolve(form, lin)
    return form


def _constant_reduction(value: SpherePoint) -> ProjectiveRatMap:
    return ProjectiveRatMap.constant(value)


def reduce(f: ProjectiveRatMap, cfg: Settings | None = None) -> ReducedForm:
    cfg = cfg or get_settings()
    if f.degree == 0:
        return ReducedForm(0, f.to_float(), (), 0.0, "exact")
    if f.backend == "exact":
        return _reduce_exact(f, cfg)
    return _reduce_float(f, cfg)


def _reduce_exact(f: ProjectiveRatMap, cfg: Settings) -> ReducedForm:
    d = f.degree
    p = exact.form_to_poly(f.numerator)
    q = exact.form_to_poly(f.denominator)
    m_inf = d - max(exact.poly_degree(p), exact.poly_degree(q))
    g = p.gcd(q)
    pt, qt = p.exquo(g), q.exquo(g)
    deg_g = exact.poly_degree(g)
    e = d - deg_g - m_inf
    holes: list[Hole] = []
    if deg_g > 0:
        _, factors = g.sqf_list()
        for factor, mult in factors:
            fdeg = exact.poly_degree(factor)
            form = np.array([exact.gaussian_to_complex(c) for c in exact.poly_to_form(factor, fdeg)], dtype=complex)
            for cluster in form_roots(form, cfg).clusters:
                holes.append(Hole(cluster.point, int(mult) * cluster.multiplicity))
    if m_inf > 0:
        holes.append(Hole(SpherePoint.infinity(), m_inf))
    if e == 0:
        value = SpherePoint(
            exact.gaussian_to_complex(exact.poly_to_form(pt, 0)[0]),
            exact.gaussian_to_complex(exact.poly_to_form(qt, 0)[0]),
        )
        reduction = _constant_reduction(value)
    else:
        reduction = ProjectiveRatMap(e, exact.poly_to_form(pt, e), exact.poly_to_form(qt, e), "exact")
    gcd_factor = exact.poly_to_form(g, deg_g + m_inf)
    return ReducedForm(d, reduction, tuple(holes), 0.0, "exact", gcd_factor)


def _match_clusters(a: Sequence[RootCluster], b: Sequence[RootCluster], radius: float) -> list[Hole]:
    used: set[int] = set()
    holes: list[Hole] = []
    for ca in a:
        best, best_dist = None, None
        for j, cb in enumerate(b):
            if j in used:
                continue
            dist = chordal_distance(ca.point, cb.point)
            if dist <= radius + ca.spread + cb.spread and (best_dist is None or dist < best_dist):
                best, best_dist = j, dist
        if best is None:
            continue
        used.add(best)
        cb = b[best]
        point = ca.point if ca.multiplicity >= cb.multiplicity else cb.point
        holes.append(Hole(point, min(ca.multiplicity, cb.multiplicity)))
    return holes


def _sylvester_gcd_degree(num: np.ndarray, den: np.ndarray, cfg: Settings) -> int:
    s = np.linalg.svd(sylvester_float(num, den), compute_uv=False)
    if s[0] == 0:
        return len(num) - 1
    rank = int(np.sum(s > cfg.tau_gcd * s[0]))
    return 2 * (len(num) - 1) - rank


def _balanced_gcd_degree(num: np.ndarray, den: np.ndarray, clusters: Sequence[RootCluster], cfg: Settings) -> int:
    """Sylvester gcd degree after rescaling z so the finite roots straddle the unit circle."""
    d = len(num) - 1
    logs, weight = 0.0, 0
    for c in clusters:
        if c.point.is_infinity or c.point.z == 0:
            continue
        logs += c.multiplicity * math.log(abs(c.point.z / c.point.w))
        weight += c.multiplicity
    bound = 100.0 / d * math.log(10.0)
    shift = float(np.clip(logs / weight, -bound, bound)) if weight else 0.0
    powers = np.exp(shift * np.arange(d + 1))
    a, b = num * powers, den * powers
    return _sylvester_gcd_degree(a / np.linalg.norm(a), b / np.linalg.norm(b), cfg)


def _deflate(form: np.ndarray, h: np.ndarray, e: int) -> tuple[np.ndarray, float]:
    """Least-squares X with H·X = form, X of degree e; returns X and the residual."""
    rows = len(form)
    t = np.zeros((rows, e + 1), dtype=complex)
    for j in range(e + 1):
        t[j : j + len(h), j] = h
    x, *_ = np.linalg.lstsq(t, form, rcond=None)
    return x, float(np.max(np.abs(t @ x - form)))


def _reduce_float(f: ProjectiveRatMap, cfg: Settings) -> ReducedForm:
    d = f.degree
    num, den = f.num_f, f.den_f
    if not np.any(num) or not np.any(den):
        zero_num = not np.any(num)
        other = den if zero_num else num
        roots = form_roots(other, cfg, radius=cfg.tau_root_merge)
        holes = tuple(Hole(c.point, c.multiplicity) for c in roots.clusters)
        value = SpherePoint(0, 1) if zero_num else SpherePoint.infinity()
        return ReducedForm(d, _constant_reduction(value), holes, 0.0, roots.confidence, other.copy())

    confidence = "high"
    rp, rq = form_roots(num, cfg), form_roots(den, cfg)
    rank_degree = _balanced_gcd_degree(num, den, [*rp.clusters, *rq.clusters], cfg)
    holes = _match_clusters(rp.clusters, rq.clusters, cfg.tau_cluster)
    if sum(h.depth for h in holes) != rank_degree:
        rp = form_roots(num, cfg, radius=cfg.tau_root_merge)
        rq = form_roots(den, cfg, radius=cfg.tau_root_merge)
        holes = _match_clusters(rp.clusters, rq.clusters, cfg.tau_root_merge)
        confidence = "low"
        if sum(h.depth for h in holes) != rank_degree:
            raise RankAmbiguity(
                "root matching and Sylvester rank disagree on the gcd degree",
                matched=sum(h.depth for h in holes),
                sylvester=rank_degree,
            )
        logger.warning("gcd degree %d recovered only at the coarse clustering radius", rank_degree)
    if "low" in (rp.confidence, rq.confidence):
        confidence = "low"
    if not holes:
        return ReducedForm(d, f, (), 0.0, confidence, np.array([1.0 + 0j]))
    h = hole_form(holes)
    e = d - (len(h) - 1)
    pt, res_p = _deflate(num, h, e)
    qt, res_q = _deflate(den, h, e)
    if e == 0:
        reduction = _constant_reduction(SpherePoint(pt[0], qt[0]))
    else:
        reduction = ProjectiveRatMap(e, pt, qt, "float")
    return ReducedForm(d, reduction, tuple(holes), max(res_p, res_q), confidence, h)


# --- composition ---

def _float_powers(form: np.ndarray, n: int) -> list[np.ndarray]:
    out = [np.array([1.0 + 0j])]
    for _ in range(n):
        out.append(np.convolve(out[-1], form))
    return out


def compose(f: ProjectiveRatMap, g: ProjectiveRatMap, cfg: Settings | None = None) -> ProjectiveRatMap:
    """f ∘ g by formal substitution [P_f(P_g, Q_g) : Q_f(P_g, Q_g)]."""
    cfg = cfg or get_settings()
    d, dg = f.degree, g.degree
    if f.backend == "exact" and g.backend == "exact":
        pp = _exact_powers(g.numerator, d)
        qp = _exact_powers(g.denominator, d)
        size = d * dg + 1
        terms = [exact.convolve(pp[i], qp[d - i]) for i in range(d + 1)]
        num = [QQ_I.zero] * size
        den = [QQ_I.zero] * size
        for i in range(d + 1):
            a, b = f.numerator[i], f.denominator[i]
            for j, t in enumerate(terms[i]):
                num[j] += a * t
                den[j] += b * t
        if all(c == QQ_I.zero for c in num + den):
            raise Indeterminate("composition lies in the indeterminacy locus")
        exact.check_bits(num + den, cfg.exact_bit_cap)
        return ProjectiveRatMap(d * dg, num, den, "exact")

    pn, pd = g.num_f, g.den_f
    pp, qp = _float_powers(pn, d), _float_powers(pd, d)
    terms = np.array([np.convolve(pp[i], qp[d - i]) for i in range(d + 1)])
    num = f.num_f @ terms
    den = f.den_f @ terms
    scale = float(np.max((np.abs(f.num_f) + np.abs(f.den_f)) @ np.abs(terms)))
    if max(np.max(np.abs(num)), np.max(np.abs(den))) <= cfg.tau_gcd * scale:
        raise Indeterminate("composition lies in the indeterminacy locus")
    return ProjectiveRatMap(d * dg, num, den, "float")


def _exact_powers(form: tuple, n: int) -> list[tuple]:
    out = [(QQ_I.one,)]
    for _ in range(n):
        out.append(exact.convolve(out[-1], form))
    return out


def iterate(f: ProjectiveRatMap, n: int, cfg: Settings | None = None) -> ProjectiveRatMap:
    if n < 1:
        raise ValueError("n must be at least 1")
    out = f
    for _ in range(n - 1):
        out = compose(f, out, cfg)
    return out


def conjugate(f: ProjectiveRatMap, a: MoebiusMap, cfg: Settings | None = None) -> ProjectiveRatMap:
    """A ∘ f ∘ A⁻¹."""
    return compose(compose(moebius_as_map(a), f, cfg), moebius_as_map(a.inverse()), cfg)


# --- preimages and critical points ---

def preimages(f: ProjectiveRatMap, w: SpherePoint, cfg: Settings | None = None, radius: float | None = None) -> list[tuple[SpherePoint, int]]:
    cfg = cfg or get_settings()
    roots = form_roots(f.pencil(w), cfg, radius=radius)
    return [(c.point, c.multiplicity) for c in roots.clusters]


def preimages_through_chain(steps: Sequence[ProjectiveRatMap], w: SpherePoint, cfg: Settings | None = None) -> list[tuple[SpherePoint, int]]:
    """Preimages of w under the composition of ``steps`` (first applied first).

    Each stage pulls back through one map and re-clusters, so multiplicities
    multiply along the chain while each root problem stays of small degree.
    """
    cfg = cfg or get_settings()
    current = [(w, 1)]
    for step in reversed(steps):
        if step.is_constant:
            raise ValueError("constant map in a reduction chain")
        pulled: list[tuple[np.ndarray, int]] = []
        for point, mult in current:
            for pre, m in preimages(step, point, cfg, radius=cfg.tau_root_merge):
                pulled.append((pre.pair(), m * mult))
        pairs = np.array([p for p, _ in pulled])
        weights = np.array([m for _, m in pulled])
        clusters = cluster_pairs(pairs, cfg.tau_root_merge)
        reps = points_to_pairs([c.point for c in clusters])
        nearest = np.argmin(chordal_pairs(pairs[:, None, :], reps[None, :, :]), axis=1)
        current = [(c.point, int(weights[nearest == i].sum())) for i, c in enumerate(clusters)]
    return current


def local_degree(f: ProjectiveRatMap, z: SpherePoint, cfg: Settings | None = None, radius: float = 1e-3) -> int:
    """Local degree of a nondegenerate map at z (0 for constant maps)."""
    cfg = cfg or get_settings()
    if f.is_constant:
        return 0
    w = f.evaluate(z, cfg)
    raw = form_roots_batch(f.pencil(w)[None, :], cfg)[0]
    return max(1, int(np.sum(chordal_pairs(raw, z.pair()[None, :]) <= radius)))


def wronskian(f: ProjectiveRatMap) -> np.ndarray:
    d = f.degree
    a, b = f.num_f, f.den_f
    i = np.arange(d + 1)
    pz, pw = (i * a)[1:], ((d - i) * a)[:-1]
    qz, qw = (i * b)[1:], ((d - i) * b)[:-1]
    return np.convolve(pz, qw) - np.convolve(pw, qz)


def critical_points(f: ProjectiveRatMap, cfg: Settings | None = None) -> list[tuple[SpherePoint, int]]:
    """Critical points with multiplicity (local degree minus one); they add up to 2d − 2."""
    cfg = cfg or get_settings()
    if f.degree < 2:
        return []
    roots = form_roots(wronskian(f), cfg, radius=cfg.tau_root_merge)
    return [(c.point, c.multiplicity) for c in roots.clusters]


def exceptional_set(f: ProjectiveRatMap, cfg: Settings | None = None) -> list[SpherePoint]:
    cfg = cfg or get_settings()
    red = reduce(f, cfg)
    if red.is_degenerate:
        return [red.reduction.constant_value()] if red.reduction.is_constant else []
    d = f.degree
    if d < 2:
        return []
    tol = cfg.tau_root_merge
    candidates = [p for p, m in critical_points(f, cfg) if m == d - 1]
    images = [f.evaluate(p, cfg) for p in candidates]
    out: list[SpherePoint] = []
    for i, p in enumerate(candidates):
        if chordal_distance(images[i], p) < tol:
            out.append(p)
            continue
        for j, q in enumerate(candidates):
            if j != i and chordal_distance(images[i], q) < tol and chordal_distance(images[j], p) < tol:
                out.append(p)
                break
    return out


# --- counting preimages along a sequence ---

@dataclass(frozen=True)
class PreimageCount:
    predicted: int
    counts: tuple[int, ...]
    threshold_index: int
    bound: int | None = None


def _ball_count(f: ProjectiveRatMap, value: SpherePoint, center: SpherePoint, radius: float, cfg: Settings) -> int:
    raw = form_roots_batch(f.pencil(value)[None, :], cfg)[0]
    return int(np.sum(chordal_pairs(raw, center.pair()[None, :]) < radius))


def predicted_preimage_count(g: ReducedForm, w: SpherePoint, z0: SpherePoint, cfg: Settings | None = None) -> int:
    """d_w(g) + deg_w g̃ when g̃(w) = z₀, else d_w(g)."""
    cfg = cfg or get_settings()
    tol = cfg.tau_root_merge
    depth = g.depth_at(w, tol)
    if g.reduction.is_constant:
        return depth
    if chordal_distance(g.apply_reduction(w, cfg), z0) < tol:
        return depth + local_degree(g.reduction, w, cfg)
    return depth


def count_preimages_near(
    maps: Sequence[ProjectiveRatMap],
    g: ProjectiveRatMap | ReducedForm,
    z0: SpherePoint,
    w: SpherePoint,
    radius: float,
    phi: ProjectiveRatMap | ReducedForm | None = None,
    cfg: Settings | None = None,
) -> PreimageCount:
    """Preimages of z₀ under f_k near w, against the limit prediction."""
    cfg = cfg or get_settings()
    g_red = g if isinstance(g, ReducedForm) else reduce(g, cfg)
    predicted = predicted_preimage_count(g_red, w, z0, cfg)
    bound = None
    if phi is not None:
        phi_red = phi if isinstance(phi, ReducedForm) else reduce(phi, cfg)
        bound = phi_red.depth_at(w, cfg.tau_root_merge)
        if not phi_red.reduction.is_constant:
            bound += local_degree(phi_red.reduction, w, cfg)
    counts = tuple(_ball_count(f, z0, w, radius, cfg) for f in maps)
    threshold = len(counts)
    for k in range(len(counts) - 1, -1, -1):
        if counts[k] != predicted:
            break
        threshold = k
    if threshold == len(counts):
        raise InconclusiveK("empirical counts never settle on the prediction", predicted=predicted, counts=list(counts))
    return PreimageCount(predicted, counts, threshold, bound)


# --- GIT stability from depths ---

def git_classify(f: ProjectiveRatMap, cfg: Settings | None = None) -> Stability:
    cfg = cfg or get_settings()
    red = reduce(f, cfg)
    d = f.degree
    fixed = {id(h): chordal_distance(red.apply_reduction(h.point, cfg), h.point) < cfg.tau_root_merge for h in red.holes}

    def passes(depth_cap: float, fix_floor: float) -> bool:
        for h in red.holes:
            if h.depth > depth_cap:
                return False
            if h.depth >= fix_floor and fixed[id(h)]:
                return False
        return True

    if passes(d / 2, (d - 1) / 2):
        return "stable"
    if passes((d + 1) / 2, d / 2):
        return "semistable-only"
    return "unstable"


# --- reduced-form calculus ---

def moebius_reduced(a: MoebiusMap) -> ReducedForm:
    if a.degenerate:
        return ReducedForm(1, _constant_reduction(a.reduction), (Hole(a.hole, 1),), 0.0, "high")
    m = moebius_as_map(a)
    return ReducedForm(1, m, (), 0.0, "high", chain=(m,))


def _merge_holes(entries: list[tuple[SpherePoint, int]], tol: float) -> tuple[Hole, ...]:
    merged: list[list] = []
    for point, depth in entries:
        for slot in merged:
            if chordal_distance(slot[0], point) < tol:
                slot[1] += depth
                break
        else:
            merged.append([point, depth])
    return tuple(Hole(p, int(dep)) for p, dep in merged if dep > 0)


def compose_reduced(outer: ReducedForm, inner: ReducedForm, cfg: Settings | None = None) -> ReducedForm:
    """Reduced form of outer ∘ inner from the two reduced forms.

    Holes come from the composition law
        d_h(F∘G) = d_h(G)·deg F + deg_h(G̃)·d_{G̃(h)}(F),
    the reduction is F̃ ∘ G̃ kept as a chain of small-degree maps.
    """
    cfg = cfg or get_settings()
    tol = cfg.tau_root_merge
    d = outer.degree * inner.degree
    entries: list[tuple[SpherePoint, int]] = [(h.point, h.depth * outer.degree) for h in inner.holes]
    if inner.reduction.is_constant:
        c = inner.reduction.constant_value()
        if outer.depth_at(c, tol):
            raise Indeterminate("inner map is constant at a hole of the outer map", point=repr(c))
        value = outer.apply_reduction(c, cfg)
        return ReducedForm(d, _constant_reduction(value), _merge_holes(entries, tol), 0.0, "high")
    for h in outer.holes:
        for pre, mult in preimages_through_chain(inner.steps(), h.point, cfg):
            entries.append((pre, mult * h.depth))
    holes = _merge_holes(entries, tol)
    if outer.reduction.is_constant:
        reduction = outer.reduction
        chain: tuple[ProjectiveRatMap, ...] = ()
    else:
        chain = inner.steps() + outer.steps()
        reduction = compose(outer.reduction, inner.reduction, cfg)
    confidence = "high" if "low" not in (outer.confidence, inner.confidence) else "low"
    out = ReducedForm(d, reduction, holes, 0.0, confidence, chain=chain)
    if out.hole_mass + out.reduction_degree != d:
        raise RankAmbiguity(
            "hole depths and reduction degree do not add up to the degree",
            hole_mass=out.hole_mass,
            reduction_degree=out.reduction_degree,
            degree=d,
        )
    return out
