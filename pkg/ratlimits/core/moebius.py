"""
Möbius maps, including the degenerate (rank one) ones.

A MoebiusMap wraps a projectively normalized 2×2 complex matrix. When
|det M| / ‖M‖² drops below τ_moeb the matrix is snapped to the nearest rank
one matrix: its column space is the reduction point and its kernel the hole.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import polar

from ratlimits.config import Settings, get_settings
from ratlimits.core.limits import CauchyCertificate, cauchy_certificate, limit_vanishes, normalize_vectors
from ratlimits.core.sphere import SpherePoint, chordal_distance, chordal_pairs, normalize_pairs
from ratlimits.errors import DegenerateTriple, HoleEvaluation

logger = logging.getLogger(__name__)


def _normalize_matrix(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex).reshape(2, 2)
    norm = np.linalg.norm(m)
    if norm == 0 or not np.isfinite(norm):
        raise ValueError("Möbius matrix must be finite and nonzero")
    m = m / norm
    lead = m.flat[int(np.argmax(np.abs(m)))]
    return m * (abs(lead) / lead)


@dataclass(frozen=True, eq=False)
class MoebiusMap:
    matrix: np.ndarray
    degenerate: bool
    reduction: SpherePoint | None = None
    hole: SpherePoint | None = None

    @classmethod
    def from_matrix(cls, m, cfg: Settings | None = None, force_degenerate: bool = False) -> "MoebiusMap":
        cfg = cfg or get_settings()
        m = _normalize_matrix(m)
        if not force_degenerate and abs(np.linalg.det(m)) >= cfg.tau_moeb:
            return cls(matrix=m, degenerate=False)
        u, s, vh = np.linalg.svd(m)
        snapped = _normalize_matrix(s[0] * np.outer(u[:, 0], vh[0, :]))
        kernel = np.conj(vh[1, :])
        return cls(
            matrix=snapped,
            degenerate=True,
            reduction=SpherePoint(u[0, 0], u[1, 0]),
            hole=SpherePoint(kernel[0], kernel[1]),
        )

    @classmethod
    def sample(cls, m) -> "MoebiusMap":
        """A member of a scaling sequence: kept invertible however small its determinant."""
        m = _normalize_matrix(np.asarray(m, dtype=complex))
        if np.linalg.det(m) == 0:
            raise ValueError("singular matrix")
        return cls(matrix=m, degenerate=False)

    @classmethod
    def from_coefficients(cls, a, b, c, d, cfg: Settings | None = None) -> "MoebiusMap":
        """z ↦ (a z + b) / (c z + d)."""
        return cls.from_matrix([[a, b], [c, d]], cfg)

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls.from_matrix(np.eye(2))

    @classmethod
    def constant(cls, value: SpherePoint, hole: SpherePoint) -> "MoebiusMap":
        """Degenerate map with the given reduction and hole."""
        # kernel spanned by hole: rows orthogonal to (h_z, h_w)
        row = np.array([-hole.w, hole.z], dtype=complex)
        return cls.from_matrix(np.outer(value.pair(), row), force_degenerate=True)

    @property
    def determinant_ratio(self) -> float:
        return float(abs(np.linalg.det(self.matrix)) / np.linalg.norm(self.matrix) ** 2)

    def inverse(self) -> "MoebiusMap":
        if self.degenerate:
            raise ValueError("degenerate Möbius maps have no inverse")
        (a, b), (c, d) = self.matrix
        return MoebiusMap.sample([[d, -b], [-c, a]])

    def compose(self, other: "MoebiusMap", cfg: Settings | None = None) -> "MoebiusMap":
        """self ∘ other."""
        return MoebiusMap.from_matrix(self.matrix @ other.matrix, cfg)

    def apply(self, p: SpherePoint, cfg: Settings | None = None) -> SpherePoint:
        return moebius_apply(self, p, cfg)

    def apply_pairs(self, pairs: np.ndarray) -> np.ndarray:
        """Matrix action on (N, 2) pairs; degenerate maps send everything to the reduction."""
        pairs = np.asarray(pairs, dtype=complex)
        return normalize_pairs(pairs @ self.matrix.T)


def moebius_apply(a: MoebiusMap, p: SpherePoint, cfg: Settings | None = None) -> SpherePoint:
    cfg = cfg or get_settings()
    if a.degenerate:
        if chordal_distance(p, a.hole) < cfg.tau_pt:
            raise HoleEvaluation("point lies on the hole of a degenerate Möbius map", point=repr(p))
        return a.reduction
    img = a.matrix @ p.pair()
    return SpherePoint(img[0], img[1])


@dataclass(frozen=True, eq=False)
class MoebiusLimit:
    limit: MoebiusMap
    certificate: CauchyCertificate

    @property
    def degenerate(self) -> bool:
        return self.limit.degenerate


def moebius_limit_classify(sequence, cfg: Settings | None = None) -> MoebiusLimit:
    """Classify the limit of a projectively Cauchy sequence of Möbius maps (or 2×2 matrices)."""
    cfg = cfg or get_settings()
    mats = [s.matrix if isinstance(s, MoebiusMap) else _normalize_matrix(s) for s in sequence]
    if not mats:
        raise ValueError("empty sequence")
    vectors = normalize_vectors(np.array([m.ravel() for m in mats]))
    cert = cauchy_certificate(vectors, cfg, label="Möbius sequence")
    ratios = np.array([abs(np.linalg.det(v.reshape(2, 2))) for v in vectors])
    degenerate = limit_vanishes(ratios, cfg)
    limit = MoebiusMap.from_matrix(vectors[-1].reshape(2, 2), cfg, force_degenerate=degenerate)
    return MoebiusLimit(limit=limit, certificate=cert)


def _triple_matrix(p: list[SpherePoint]) -> np.ndarray:
    """Matrix sending p1, p2, p3 to 0, ∞, 1 (cross-ratio form)."""
    def wedge(x: SpherePoint, y: SpherePoint) -> complex:
        return x.z * y.w - x.w * y.z

    p1, p2, p3 = p
    s1 = wedge(p3, p2)
    s2 = wedge(p3, p1)
    # rows: linear forms vanishing at p1 and at p2, scaled so p3 ↦ 1
    return np.array([[s1 * p1.w, -s1 * p1.z], [s2 * p2.w, -s2 * p2.z]], dtype=complex)


def fit_moebius(src, dst, cfg: Settings | None = None) -> MoebiusMap:
    """The Möbius map sending src[i] to dst[i], i = 1, 2, 3."""
    cfg = cfg or get_settings()
    for name, triple in (("source", src), ("target", dst)):
        seps = [chordal_distance(triple[i], triple[j]) for i, j in ((0, 1), (0, 2), (1, 2))]
        if min(seps) < cfg.tau_sep:
            raise DegenerateTriple(f"{name} triple is not separated", separation=min(seps))
    s_src = _triple_matrix(list(src))
    s_dst = _triple_matrix(list(dst))
    (a, b), (c, d) = s_dst
    inv = np.array([[d, -b], [-c, a]])
    return MoebiusMap.from_matrix(inv @ s_src, cfg)


def fit_residual(a: MoebiusMap, src, dst) -> float:
    imgs = a.apply_pairs(np.array([[p.z, p.w] for p in src]))
    tgt = np.array([[q.z, q.w] for q in dst])
    return float(np.max(chordal_pairs(imgs, tgt)))


def is_rotation(a: MoebiusMap, cfg: Settings | None = None) -> tuple[bool, MoebiusMap]:
    """Whether a is unitary up to scale, together with its unitary polar factor."""
    cfg = cfg or get_settings()
    if a.degenerate:
        raise ValueError("rotation test needs a nondegenerate map")
    m = a.matrix
    n = m / np.sqrt(abs(np.linalg.det(m)))
    deviation = float(np.linalg.norm(n.conj().T @ n - np.eye(2)))
    unitary, _ = polar(m)
    return deviation < cfg.tau_rot, MoebiusMap.from_matrix(unitary, cfg)


def rotation_from_vector(v: np.ndarray) -> MoebiusMap:
    """SU(2) element exp(-i/2 v·σ); turns the sphere by |v| about v."""
    v = np.asarray(v, dtype=float)
    angle = float(np.linalg.norm(v))
    if angle == 0:
        return MoebiusMap.identity()
    nx, ny, nz = v / angle
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    m = np.array([[c - 1j * s * nz, -1j * s * (nx - 1j * ny)], [-1j * s * (nx + 1j * ny), c + 1j * s * nz]])
    return MoebiusMap.from_matrix(m)


def random_rotation(rng: np.random.Generator) -> MoebiusMap:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    a = complex(q[0], q[1])
    b = complex(q[2], q[3])
    return MoebiusMap.from_matrix([[a, -np.conj(b)], [b, np.conj(a)]])
