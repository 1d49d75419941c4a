"""
Trees of spheres from independent scalings.

Each index n carries a sphere C̄_n with chart A_{n,k}. For n ≠ m the limit of
A_{m,k}∘A_{n,k}⁻¹ is a degenerate Möbius map; its hole is the point a_{m,n}
of C̄_n where C̄_m sits, its reduction the point a_{n,m} of C̄_m where C̄_n
sits. a_{n,m} ∈ C̄_m is glued to a_{m,n} ∈ C̄_n when the two spheres sit at
the same point of every other sphere.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ratlimits.config import Settings, get_settings
from ratlimits.core.moebius import MoebiusLimit, MoebiusMap, moebius_limit_classify
from ratlimits.core.ratmap import (
    ProjectiveRatMap,
    count_preimages_near,
    critical_points,
    predicted_preimage_count,
    reduce,
)
from ratlimits.core.rescaling import ScalingScheme
from ratlimits.core.sphere import SpherePoint, chordal_distance, chordal_pairs, fibonacci_pairs
from ratlimits.errors import ContinuityFailure, CriticalCountMismatch, NotATree, NotIndependent

logger = logging.getLogger(__name__)

_CANONICAL = (SpherePoint(0, 1), SpherePoint(1, 1), SpherePoint.infinity())


def snap_canonical(p: SpherePoint, tol: float) -> SpherePoint:
    for c in _CANONICAL:
        if chordal_distance(p, c) < tol:
            return c
    return p


@dataclass(frozen=True)
class Junction:
    """A gluing class: the (sphere, point) pairs identified to one point of S."""

    members: tuple[tuple[int, SpherePoint], ...]

    @property
    def spheres(self) -> tuple[int, ...]:
        return tuple(n for n, _ in self.members)


@dataclass(frozen=True, eq=False)
class SphereTree:
    index: tuple[int, ...]
    points: dict[tuple[int, int], SpherePoint]   # (n, m) -> a_{n,m} ∈ C̄_m
    raw_points: dict[tuple[int, int], SpherePoint]
    junctions: tuple[Junction, ...]
    scalings: Mapping[int, Sequence[MoebiusMap]] = field(default_factory=dict)

    def a(self, n: int, m: int) -> SpherePoint:
        return self.points[(n, m)]

    def edges(self) -> list[tuple[int, int]]:
        """Sphere pairs sharing a junction."""
        out = []
        for j in self.junctions:
            s = sorted(j.spheres)
            out += [(x, y) for i, x in enumerate(s) for y in s[i + 1 :]]
        return out

    def retraction(self, n: int, m: int, z: SpherePoint) -> SpherePoint:
        """ρ_n of the point z ∈ C̄_m."""
        return z if m == n else self.points[(m, n)]

    def to_dot(self) -> str:
        lines = ["graph spheres {"]
        for n in self.index:
            lines.append(f'  s{n} [label="C{n}"];')
        for i, j in enumerate(self.junctions):
            lines.append(f'  j{i} [shape=point];')
            for n, p in j.members:
                lines.append(f'  s{n} -- j{i} [label="{p!r}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _find(parent: dict, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def _glue(index: Sequence[int], points: Mapping[tuple[int, int], SpherePoint], tol: float) -> tuple[Junction, ...]:
    parent: dict = {}
    slots: dict = {}

    def slot(n: int, p: SpherePoint) -> tuple[int, int]:
        for key, q in slots.items():
            if key[0] == n and chordal_distance(p, q) < tol:
                return key
        key = (n, len(slots))
        slots[key] = p
        parent[key] = key
        return key

    for i, n in enumerate(index):
        for m in index[i + 1 :]:
            others = [x for x in index if x not in (n, m)]
            if all(chordal_distance(points[(n, x)], points[(m, x)]) < tol for x in others):
                u, v = slot(m, points[(n, m)]), slot(n, points[(m, n)])
                parent[_find(parent, u)] = _find(parent, v)
    groups: dict = {}
    for key in slots:
        groups.setdefault(_find(parent, key), []).append((key[0], slots[key]))
    return tuple(Junction(tuple(sorted(g, key=lambda e: e[0]))) for g in groups.values())


def _check_tree(index: Sequence[int], junctions: Sequence[Junction]) -> None:
    pos = {n: i for i, n in enumerate(index)}
    rows, cols = [], []
    for j_idx, j in enumerate(junctions):
        for n in set(j.spheres):
            rows.append(pos[n])
            cols.append(len(index) + j_idx)
    size = len(index) + len(junctions)
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(size, size))
    n_comp, _ = connected_components(graph, directed=False)
    if n_comp != 1:
        raise NotATree("gluing graph is disconnected", components=int(n_comp))
    if len(rows) != size - 1:
        raise NotATree("gluing graph has a cycle", edges=len(rows), nodes=size)


def build_tree(
    scalings: Mapping[int, Sequence[MoebiusMap]],
    cfg: Settings | None = None,
    pairwise: Callable[[int, int], MoebiusLimit] | None = None,
) -> SphereTree:
    """Tree of spheres for independent scalings A_{n,k}."""
    cfg = cfg or get_settings()
    index = tuple(sorted(scalings))

    def default_pairwise(n: int, m: int) -> MoebiusLimit:
        seq = [b.matrix @ np.linalg.inv(a.matrix) for a, b in zip(scalings[n], scalings[m])]
        return moebius_limit_classify(seq, cfg)

    pairwise = pairwise or default_pairwise
    points: dict[tuple[int, int], SpherePoint] = {}
    raw: dict[tuple[int, int], SpherePoint] = {}
    for i, n in enumerate(index):
        for m in index[i + 1 :]:
            lim = pairwise(n, m)
            if not lim.degenerate:
                raise NotIndependent("scalings have a nondegenerate pairwise limit", n=n, m=m)
            raw[(n, m)], raw[(m, n)] = lim.limit.reduction, lim.limit.hole
    for key, p in raw.items():
        points[key] = snap_canonical(p, cfg.tau_pt)
    junctions = _glue(index, points, cfg.tau_glue)
    _check_tree(index, junctions)
    logger.info("sphere tree: %d spheres, %d junctions", len(index), len(junctions))
    return SphereTree(index, points, raw, junctions, dict(scalings))


def tree_from_scheme(scheme: ScalingScheme, levels: Sequence[int] | None = None, cfg: Settings | None = None) -> SphereTree:
    cfg = cfg or get_settings()
    levels = tuple(levels if levels is not None else sorted(scheme.scalings_mp))
    scalings = {n: scheme.scaling_maps(n, cfg) for n in levels}
    return build_tree(scalings, cfg, pairwise=lambda n, m: scheme.pairwise_limit(n, m, cfg))


def hausdorff_residual(tree: SphereTree, k: int, cfg: Settings | None = None, grid: int | None = None) -> float:
    """Two-sided Hausdorff distance in C̄^J (max of chordal coordinates) between the k-th embedded sphere and S."""
    cfg = cfg or get_settings()
    base = fibonacci_pairs(grid or cfg.hausdorff_grid)
    index = tree.index
    tree_pts, embedded = [], []
    for n in index:
        coords = np.empty((len(base), len(index), 2), dtype=complex)
        for col, m in enumerate(index):
            coords[:, col] = base if m == n else tree.points[(n, m)].pair()
        tree_pts.append(coords)
        a_n = tree.scalings[n][k]
        xs = a_n.inverse().apply_pairs(base)
        emb = np.stack([tree.scalings[m][k].apply_pairs(xs) for m in index], axis=1)
        embedded.append(emb)
    s = np.concatenate(tree_pts)
    e = np.concatenate(embedded)
    row_min = np.empty(len(e))
    col_min = np.full(len(s), np.inf)
    for start in range(0, len(e), 256):
        block = np.max(chordal_pairs(e[start : start + 256, None], s[None]), axis=-1)
        row_min[start : start + 256] = block.min(axis=1)
        col_min = np.minimum(col_min, block.min(axis=0))
    return float(max(row_min.max(), col_min.max()))


# --- induced maps ---

@dataclass(frozen=True, eq=False)
class CriticalAtom:
    sphere: int | None
    point: SpherePoint
    multiplicity: int
    junction: int | None = None


@dataclass(frozen=True, eq=False)
class TreeMapData:
    source: SphereTree
    target: SphereTree
    tau: dict[int, int]
    transitions: dict[int, ProjectiveRatMap]
    fully_ramified: bool
    critical: tuple[CriticalAtom, ...]
    continuity_residual: float

    @property
    def critical_total(self) -> int:
        return sum(c.multiplicity for c in self.critical)


def _junction_of(tree: SphereTree, n: int, p: SpherePoint, tol: float) -> int | None:
    for i, j in enumerate(tree.junctions):
        for m, q in j.members:
            if m == n and chordal_distance(p, q) < tol:
                return i
    return None


def _track_critical(tree: SphereTree, f: ProjectiveRatMap, cfg: Settings) -> list[CriticalAtom]:
    tol = cfg.tau_glue
    out = []
    for c, mult in critical_points(f, cfg):
        coords = {n: tree.scalings[n][-1].apply(c) for n in tree.index}
        best, best_err = None, np.inf
        for n in tree.index:
            err = max((chordal_distance(coords[m], tree.points[(n, m)]) for m in tree.index if m != n), default=0.0)
            if err < best_err:
                best, best_err = n, err
        junction = _junction_of(tree, best, coords[best], tol)
        out.append(CriticalAtom(best, coords[best], mult, junction))
    return out


def induced_map(
    source: SphereTree,
    target: SphereTree,
    tau: Mapping[int, int],
    transitions: Mapping[int, ProjectiveRatMap],
    f_last: ProjectiveRatMap | None = None,
    cfg: Settings | None = None,
) -> TreeMapData:
    """Map S → S′ given by φ_{n,τ(n)} on each sphere, with its critical bookkeeping."""
    cfg = cfg or get_settings()
    tol = cfg.tau_glue
    worst = 0.0
    for n in source.index:
        phi = transitions[n]
        for m in source.index:
            if m == n or tau[m] == tau[n]:
                continue
            img = phi.evaluate(source.a(m, n), cfg)
            err = chordal_distance(img, target.a(tau[m], tau[n]))
            worst = max(worst, err)
            if err > tol:
                raise ContinuityFailure("transition does not respect the gluing", edge=[m, n], error=err)
    reduced = {n: reduce(phi, cfg) for n, phi in transitions.items()}
    d = next(iter(transitions.values())).degree
    full = all(not r.is_degenerate and r.reduction_degree == d for r in reduced.values())
    critical: list[CriticalAtom] = []
    if f_last is not None:
        critical = _track_critical(source, f_last, cfg)
        total = sum(c.multiplicity for c in critical)
        if full and total != 2 * d - 2:
            raise CriticalCountMismatch("critical multiplicities do not add up to 2d-2", total=total, degree=d)
        if full:
            _check_sphere_counts(source, transitions, f_last, cfg)
    return TreeMapData(source, target, dict(tau), dict(transitions), full, tuple(critical), worst)


def _check_sphere_counts(tree: SphereTree, transitions: Mapping[int, ProjectiveRatMap], f: ProjectiveRatMap, cfg: Settings) -> None:
    """Critical points of φ_{n,τ(n)} against the retracted critical points of f."""
    tol = cfg.tau_glue
    crits = critical_points(f, cfg)
    for n in tree.index:
        retracted = [(tree.scalings[n][-1].apply(c), m) for c, m in crits]
        for x, mult in critical_points(transitions[n], cfg):
            found = sum(m for p, m in retracted if chordal_distance(p, x) < tol)
            if found != mult:
                raise CriticalCountMismatch(
                    "critical multiplicity on a sphere does not match", sphere=n, point=repr(x), expected=mult, found=found
                )


def preimage_count_predict(data: TreeMapData, j: int, z0: SpherePoint, w0: SpherePoint, cfg: Settings | None = None) -> int:
    """#F_k⁻¹(w) near z₀ ∈ C̄_j for w near w₀ ∈ C̄_τ(j)."""
    cfg = cfg or get_settings()
    return predicted_preimage_count(reduce(data.transitions[j], cfg), z0, w0, cfg)


@dataclass(frozen=True)
class PreimageVerification:
    predicted: int
    counts: tuple[int, ...]
    threshold_index: int
    agree: bool


def preimage_count_verify(
    scheme: ScalingScheme,
    j: int,
    z0: SpherePoint,
    w0: SpherePoint,
    radius: float,
    cfg: Settings | None = None,
) -> PreimageVerification:
    """Root counts of the level-j transition samples near z₀ against the prediction."""
    cfg = cfg or get_settings()
    tr = scheme.transitions[j + 1]
    res = count_preimages_near(scheme.transition_samples(j + 1), tr.reduced, w0, z0, radius, cfg=cfg)
    return PreimageVerification(res.predicted, res.counts, res.threshold_index, res.counts[-1] == res.predicted)


def path_fixture(schedule: Sequence[float], size: int) -> dict[int, list[MoebiusMap]]:
    """A_{n,k} = t_k⁻ⁿ z for n < size."""
    return {
        n: [MoebiusMap.sample(np.array([[float(t) ** -n, 0], [0, 1]], dtype=complex)) for t in schedule]
        for n in range(size)
    }


def monomial_tree_pair(schedule: Sequence[float], size: int, d: int) -> tuple[dict, dict, dict]:
    """Scalings for z^d/t with A_{n,k} = t^{(dⁿ−1)/(d−1)} z and the shift τ(n) = n+1."""
    def chart(n: int, t: float) -> MoebiusMap:
        return MoebiusMap.sample(np.array([[t ** ((d ** n - 1) // (d - 1)), 0], [0, 1]], dtype=complex))

    source = {n: [chart(n, float(t)) for t in schedule] for n in range(size)}
    target = {n + 1: [chart(n + 1, float(t)) for t in schedule] for n in range(size)}
    tau = {n: n + 1 for n in range(size)}
    return source, target, tau
