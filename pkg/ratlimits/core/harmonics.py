"""
Real spherical harmonics on the Riemann sphere.

Points are taken through the stereographic embedding (0 = south pole,
∞ = north pole). Two normalizations are offered: orthonormal (for
rotation-invariant power spectra) and sup-normalized (the weak-* test
dictionary, every function bounded by 1).
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import sph_harm_y

from ratlimits.core.sphere import pairs_to_xyz


def dictionary_size(cutoff: int) -> int:
    return (cutoff + 1) ** 2


def degree_index(cutoff: int) -> np.ndarray:
    """Degree l of every column returned by :func:`real_harmonics`."""
    return np.concatenate([np.full(2 * l + 1, l) for l in range(cutoff + 1)])


def _angles(xyz: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    polar = np.arccos(np.clip(xyz[:, 2], -1.0, 1.0))
    azimuth = np.arctan2(xyz[:, 1], xyz[:, 0])
    return polar, azimuth


def real_harmonics(pairs: np.ndarray, cutoff: int) -> np.ndarray:
    """Orthonormal real harmonics Y_lm, l ≤ cutoff, at every point: (N, (L+1)²)."""
    xyz = pairs_to_xyz(np.asarray(pairs, dtype=complex).reshape(-1, 2))
    polar, azimuth = _angles(xyz)
    cols = []
    for l in range(cutoff + 1):
        for m in range(-l, l + 1):
            y = sph_harm_y(l, abs(m), polar, azimuth)
            if m > 0:
                cols.append(math.sqrt(2.0) * (-1) ** m * y.real)
            elif m < 0:
                cols.append(math.sqrt(2.0) * (-1) ** m * y.imag)
            else:
                cols.append(y.real)
    return np.stack(cols, axis=-1)


def sup_bounds(cutoff: int) -> np.ndarray:
    """Upper bounds for |Y_lm| matching :func:`real_harmonics`."""
    out = []
    for l in range(cutoff + 1):
        base = math.sqrt((2 * l + 1) / (4.0 * math.pi))
        out.extend(base * (math.sqrt(2.0) if m else 1.0) for m in range(-l, l + 1))
    return np.array(out)


def dictionary(pairs: np.ndarray, cutoff: int) -> np.ndarray:
    """Weak-* test functions: real harmonics scaled so that each is bounded by 1."""
    return real_harmonics(pairs, cutoff) / sup_bounds(cutoff)[None, :]


def power_spectrum(coeffs: np.ndarray, cutoff: int) -> np.ndarray:
    """Per-degree norms of orthonormal harmonic coefficients (rotation invariant)."""
    idx = degree_index(cutoff)
    return np.sqrt(np.bincount(idx, weights=np.asarray(coeffs) ** 2, minlength=cutoff + 1))
