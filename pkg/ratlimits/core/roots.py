"""
Roots of binary forms.

A binary form of degree d is stored as its coefficients c_0..c_d (c_i of
z^i w^(d-i)); its d roots are returned as homogeneous pairs so that roots at
∞ need no special case. Exact zero coefficients at the low (high) end are
roots at 0 (∞). The rest go through batched companion eigenvalues followed by
simultaneous Aberth-Ehrlich polishing; each root keeps whichever of seed and
polished value has the smaller backward error.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from ratlimits.config import Settings, get_settings
from ratlimits.core.sphere import SpherePoint, normalize_pairs, pairs_to_xyz, xyz_to_pairs
from ratlimits.errors import RootFindingDiverged

logger = logging.getLogger(__name__)


def _horner(coeffs_hi: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Evaluate rows of high-to-low coefficients at rows of x."""
    val = np.broadcast_to(coeffs_hi[:, :1], x.shape).astype(complex)
    for j in range(1, coeffs_hi.shape[1]):
        val = val * x + coeffs_hi[:, j : j + 1]
    return val


def _backward_error(coeffs_hi: np.ndarray, x: np.ndarray) -> np.ndarray:
    absval = _horner(np.abs(coeffs_hi), np.abs(x)).real
    with np.errstate(divide="ignore", invalid="ignore"):
        err = np.abs(_horner(coeffs_hi, x)) / absval
    return np.where(np.isfinite(err), err, np.inf)


def aberth_polish(coeffs: np.ndarray, seeds: np.ndarray, cfg: Settings | None = None) -> np.ndarray:
    """Simultaneous Aberth-Ehrlich sweeps on a batch of monic-free polynomials.

    coeffs: (B, m+1) low-to-high with nonzero leading entry; seeds: (B, m).
    """
    cfg = cfg or get_settings()
    hi = coeffs[:, ::-1]
    m = hi.shape[1] - 1
    dhi = hi[:, :-1] * np.arange(m, 0, -1)[None, :]
    x = seeds.astype(complex).copy()
    if m == 1:
        return x
    eye = np.eye(m, dtype=bool)
    for _ in range(cfg.aberth_max_iter):
        pv = _horner(hi, x)
        dpv = _horner(dhi, x)
        diff = x[:, :, None] - x[:, None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.where(eye[None, :, :], 0.0, 1.0 / diff)
            inv = np.where(np.isfinite(inv), inv, 0.0)
            ratio = pv / dpv
            delta = ratio / (1.0 - ratio * inv.sum(axis=2))
        delta = np.where(np.isfinite(delta), delta, 0.0)
        x = x - delta
        if np.all(np.abs(delta) <= cfg.aberth_tol * (1.0 + np.abs(x))):
            break
    return x


def _companion_seeds(core: np.ndarray) -> np.ndarray:
    b, n1 = core.shape
    m = n1 - 1
    comp = np.zeros((b, m, m), dtype=complex)
    if m > 1:
        comp[:, 1:, :-1] = np.eye(m - 1)
    comp[:, :, -1] = -core[:, :m] / core[:, m : m + 1]
    return np.linalg.eigvals(comp)


def _polynomial_roots(core: np.ndarray, cfg: Settings) -> np.ndarray:
    """Roots of rows with nonzero constant and leading terms, as (B, m, 2) pairs."""
    b, n1 = core.shape
    m = n1 - 1
    out = np.empty((b, m, 2), dtype=complex)
    # roots of large modulus are found in the chart w/z
    flip = np.abs(core[:, 0]) > np.abs(core[:, -1])
    for flipped in (False, True):
        idx = np.flatnonzero(flip == flipped)
        if idx.size == 0:
            continue
        rows = core[idx, ::-1] if flipped else core[idx]
        rows = rows / np.max(np.abs(rows), axis=1, keepdims=True)
        seeds = _companion_seeds(rows)
        polished = aberth_polish(rows, seeds, cfg)
        hi = rows[:, ::-1]
        keep = _backward_error(hi, polished) <= _backward_error(hi, seeds)
        x = np.where(keep, polished, seeds)
        if not np.all(np.isfinite(x)):
            raise RootFindingDiverged("non-finite root estimates")
        worst = float(np.max(_backward_error(hi, x)))
        if worst > cfg.root_backward_tol:
            raise RootFindingDiverged("root estimates fail the backward-error check", backward_error=worst)
        ones = np.ones_like(x)
        out[idx] = np.stack([ones, x], axis=-1) if flipped else np.stack([x, ones], axis=-1)
    return out


def form_roots_batch(forms: np.ndarray, cfg: Settings | None = None) -> np.ndarray:
    """Roots of a batch of binary forms of equal degree: (B, d+1) -> (B, d, 2)."""
    cfg = cfg or get_settings()
    forms = np.asarray(forms, dtype=complex)
    if forms.ndim != 2:
        raise ValueError("forms must be a 2-d array")
    b, n1 = forms.shape
    d = n1 - 1
    nz = forms != 0
    if not np.all(nz.any(axis=1)):
        raise ValueError("the zero form has no roots")
    low = np.argmax(nz, axis=1)
    high = d - np.argmax(nz[:, ::-1], axis=1)
    out = np.empty((b, d, 2), dtype=complex)
    keys = low * (d + 1) + high
    for key in np.unique(keys):
        idx = np.flatnonzero(keys == key)
        lo, hi = divmod(int(key), d + 1)
        parts = [np.tile(np.array([0.0, 1.0], dtype=complex), (idx.size, lo, 1))]
        if hi > lo:
            parts.append(_polynomial_roots(forms[idx, lo : hi + 1], cfg))
        parts.append(np.tile(np.array([1.0, 0.0], dtype=complex), (idx.size, d - hi, 1)))
        out[idx] = np.concatenate(parts, axis=1)
    return normalize_pairs(out)


@dataclass(frozen=True)
class RootCluster:
    point: SpherePoint
    multiplicity: int
    spread: float


def cluster_labels(pairs: np.ndarray, radius: float) -> np.ndarray:
    """Single-linkage component label of every point at chordal radius ``radius``."""
    pairs = np.asarray(pairs, dtype=complex).reshape(-1, 2)
    n = len(pairs)
    if n == 0:
        return np.zeros(0, dtype=int)
    xyz = pairs_to_xyz(pairs)
    links = np.array(sorted(cKDTree(xyz).query_pairs(2.0 * radius)), dtype=int).reshape(-1, 2)
    graph = coo_matrix((np.ones(len(links)), (links[:, 0], links[:, 1])), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    return labels


def cluster_pairs(pairs: np.ndarray, radius: float) -> list[RootCluster]:
    """Single-linkage clusters of sphere points at chordal radius ``radius``.

    Clusters are ordered by their first member; the representative is the
    normalized centroid of the members in R³.
    """
    pairs = np.asarray(pairs, dtype=complex).reshape(-1, 2)
    n = len(pairs)
    if n == 0:
        return []
    xyz = pairs_to_xyz(pairs)
    labels = cluster_labels(pairs, radius)
    clusters: list[RootCluster] = []
    seen: dict[int, int] = {}
    for i in range(n):
        lab = int(labels[i])
        if lab in seen:
            continue
        seen[lab] = len(clusters)
        members = xyz[labels == lab]
        centroid = members.mean(axis=0)
        spread = float(np.max(np.linalg.norm(members - centroid, axis=1))) / 2.0
        rep = pairs[i] if len(members) == 1 else xyz_to_pairs(centroid[None, :])[0]
        clusters.append(RootCluster(SpherePoint.from_pair(rep), len(members), spread))
    return clusters


@dataclass(frozen=True)
class FormRoots:
    clusters: tuple[RootCluster, ...]
    raw: np.ndarray
    confidence: str

    @property
    def total(self) -> int:
        return sum(c.multiplicity for c in self.clusters)


def form_roots(form, cfg: Settings | None = None, radius: float | None = None) -> FormRoots:
    """Roots of one binary form, clustered into points with multiplicities."""
    cfg = cfg or get_settings()
    raw = form_roots_batch(np.asarray(form, dtype=complex)[None, :], cfg)[0]
    radius = cfg.tau_cluster if radius is None else radius
    clusters = cluster_pairs(raw, radius)
    confidence = "high"
    if len(clusters) > 1:
        reps = np.array([[c.point.z, c.point.w] for c in clusters])
        coarse = cluster_pairs(reps, cfg.tau_root_merge)
        if len(coarse) < len(clusters):
            confidence = "low"
            logger.warning("distinct roots closer than %.1e; multiplicities are uncertain", cfg.tau_root_merge)
    return FormRoots(tuple(clusters), raw, confidence)
