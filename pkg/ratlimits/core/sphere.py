"""
Points of the Riemann sphere in homogeneous coordinates.

A point is a pair (z, w), not both zero, standing for z/w. Pairs are kept
normalized: the entry of largest modulus is replaced by exactly 1, so
0 = (0, 1), ∞ = (1, 0), and equality up to τ_pt is a chordal-distance test.
Batch helpers work on (N, 2) complex arrays with the same convention.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ratlimits.config import Settings, get_settings


@dataclass(frozen=True)
class SpherePoint:
    z: complex
    w: complex

    def __post_init__(self) -> None:
        z, w = complex(self.z), complex(self.w)
        if not (math.isfinite(abs(z)) and math.isfinite(abs(w))):
            raise ValueError("homogeneous coordinates must be finite")
        if z == 0 and w == 0:
            raise ValueError("(0, 0) is not a point of the sphere")
        if abs(z) >= abs(w):
            z, w = 1.0 + 0j, w / z
        else:
            z, w = z / w, 1.0 + 0j
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "w", w)

    @classmethod
    def from_complex(cls, value: complex) -> "SpherePoint":
        return cls(complex(value), 1.0)

    @classmethod
    def infinity(cls) -> "SpherePoint":
        return cls(1.0, 0.0)

    @classmethod
    def from_pair(cls, pair) -> "SpherePoint":
        return cls(complex(pair[0]), complex(pair[1]))

    @property
    def is_infinity(self) -> bool:
        return self.w == 0

    def to_complex(self) -> complex:
        if self.is_infinity:
            raise ValueError("∞ has no affine coordinate")
        return self.z / self.w

    def pair(self) -> np.ndarray:
        return np.array([self.z, self.w], dtype=complex)

    def antipode(self) -> "SpherePoint":
        # z ↦ -1/conj(z)
        return SpherePoint(-np.conj(self.w), np.conj(self.z))

    def __repr__(self) -> str:
        if self.is_infinity:
            return "SpherePoint(∞)"
        return f"SpherePoint({self.to_complex():.12g})"


def chordal_distance(p: SpherePoint, q: SpherePoint) -> float:
    """Chordal distance rescaled to diameter 1."""
    num = abs(p.z * q.w - p.w * q.z)
    den = math.hypot(abs(p.z), abs(p.w)) * math.hypot(abs(q.z), abs(q.w))
    return min(1.0, num / den)


def same_point(p: SpherePoint, q: SpherePoint, cfg: Settings | None = None, tol: float | None = None) -> bool:
    cfg = cfg or get_settings()
    return chordal_distance(p, q) < (cfg.tau_pt if tol is None else tol)


def stereographic(p: SpherePoint) -> np.ndarray:
    """Unit vector of p in R³; 0 is the south pole and ∞ the north pole."""
    return pairs_to_xyz(p.pair()[None, :])[0]


def from_stereographic(x: np.ndarray) -> SpherePoint:
    return SpherePoint.from_pair(xyz_to_pairs(np.asarray(x, dtype=float)[None, :])[0])


# --- batch helpers on (N, 2) homogeneous arrays ---

def normalize_pairs(pairs: np.ndarray) -> np.ndarray:
    pairs = np.asarray(pairs, dtype=complex)
    a, b = pairs[..., 0], pairs[..., 1]
    z_lead = np.abs(a) >= np.abs(b)
    out = np.empty_like(pairs)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[..., 0] = np.where(z_lead, 1.0, a / b)
        out[..., 1] = np.where(z_lead, b / a, 1.0)
    return out


def points_to_pairs(points) -> np.ndarray:
    if len(points) == 0:
        return np.zeros((0, 2), dtype=complex)
    return np.array([[p.z, p.w] for p in points], dtype=complex)


def pairs_to_points(pairs: np.ndarray) -> list[SpherePoint]:
    return [SpherePoint(complex(z), complex(w)) for z, w in np.asarray(pairs)]


def complex_to_pairs(values) -> np.ndarray:
    values = np.asarray(values, dtype=complex).ravel()
    return normalize_pairs(np.stack([values, np.ones_like(values)], axis=-1))


def pairs_to_xyz(pairs: np.ndarray) -> np.ndarray:
    pairs = np.asarray(pairs, dtype=complex)
    a, b = pairs[..., 0], pairs[..., 1]
    na, nb = np.abs(a) ** 2, np.abs(b) ** 2
    den = na + nb
    s = 2.0 * a * np.conj(b) / den
    return np.stack([s.real, s.imag, (na - nb) / den], axis=-1)


def xyz_to_pairs(xyz: np.ndarray) -> np.ndarray:
    xyz = np.asarray(xyz, dtype=float)
    norm = np.linalg.norm(xyz, axis=-1, keepdims=True)
    x1, x2, x3 = np.moveaxis(xyz / norm, -1, 0)
    south = x3 <= 0
    z = np.where(south, x1 + 1j * x2, 1.0 + x3)
    w = np.where(south, 1.0 - x3, x1 - 1j * x2)
    return normalize_pairs(np.stack([z, w], axis=-1))


def chordal_pairs(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Elementwise chordal distance between broadcastable pair arrays."""
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    num = np.abs(p[..., 0] * q[..., 1] - p[..., 1] * q[..., 0])
    den = np.linalg.norm(p, axis=-1) * np.linalg.norm(q, axis=-1)
    return np.minimum(1.0, num / den)


def fibonacci_pairs(n: int) -> np.ndarray:
    """n nearly uniform points on the sphere (golden-angle spiral), as pairs."""
    i = np.arange(n, dtype=float) + 0.5
    x3 = 1.0 - 2.0 * i / n
    r = np.sqrt(np.clip(1.0 - x3 * x3, 0.0, None))
    theta = np.pi * (3.0 - np.sqrt(5.0)) * i
    return xyz_to_pairs(np.stack([r * np.cos(theta), r * np.sin(theta), x3], axis=-1))


def chart_values(pairs: np.ndarray) -> np.ndarray:
    """Affine coordinate z/w of each pair (inf at ∞)."""
    pairs = np.asarray(pairs, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = pairs[..., 0] / pairs[..., 1]
    return np.where(pairs[..., 1] == 0, complex(np.inf, 0), vals)
