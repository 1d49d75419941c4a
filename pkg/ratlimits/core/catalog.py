"""
Standard degenerating families and random map builders.

The worked families used throughout the suite:

    z² + 1/t        t → 0, with the hand-derived scalings A₁ = z − 1/t and
                    A₂ = t(z − 1/t² − 1/t) when ``analytic`` is set
    t(z + 1/z)      t → ∞
    z²/ε            ε → 0, conjugate to z² (every time fully ramified)
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from ratlimits.core import exact
from ratlimits.core.rescaling import FamilySpec, geometric_schedule
from ratlimits.core.ratmap import ProjectiveRatMap

INV_T = {"num": [1], "den": [0, 1]}


def z2_plus_inverse_t(start: str = "0.01", ratio: str = "0.1", count: int = 6, analytic: bool = True) -> FamilySpec:
    scalings = {}
    if analytic:
        scalings = {
            1: [[1, {"num": [-1], "den": [0, 1]}], [0, 1]],
            2: [[{"num": [0, 1]}, {"num": [-1, -1], "den": [0, 1]}], [0, 1]],
        }
    return FamilySpec.build(
        2,
        [INV_T, 0, 1],
        [1, 0, 0],
        geometric_schedule(start, ratio, count),
        scalings,
        name="z^2+1/t",
    )


def demarco_faber(start: str = "100", ratio: str = "10", count: int = 6) -> FamilySpec:
    t = {"num": [0, 1]}
    return FamilySpec.build(2, [t, 0, t], [0, 1, 0], geometric_schedule(start, ratio, count), name="t(z+1/z)")


def z2_over_eps(start: str = "0.1", ratio: str = "0.1", count: int = 6) -> FamilySpec:
    return FamilySpec.build(2, [0, 0, INV_T], [1, 0, 0], geometric_schedule(start, ratio, count), name="z^2/eps")


def constant_family(f: ProjectiveRatMap, count: int = 5) -> FamilySpec:
    """f_t = f for every t on a schedule 1/2, 1/4, ..."""
    f = f.to_float()
    return FamilySpec.build(
        f.degree,
        [complex(c) for c in f.num_f],
        [complex(c) for c in f.den_f],
        geometric_schedule("0.5", "0.5", count),
        name="constant",
    )


# --- random maps ---

def random_map(rng: np.random.Generator, degree: int) -> ProjectiveRatMap:
    """Nondegenerate with probability one: Gaussian complex coefficients."""
    shape = (2, degree + 1)
    c = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return ProjectiveRatMap(degree, c[0], c[1])


_HOLE_CHOICES = ((0, 1), (1, 0), (1, 1), (-1, 1), (2, 1), (1, 2), ((0, 1), 1))


def _linear(point) -> tuple:
    """L_h = h_w·z − h_z·w as a form (coefficient of w, coefficient of z)."""
    hz, hw = point
    return (-exact.gaussian(*hz) if isinstance(hz, tuple) else exact.gaussian(-hz), exact.gaussian(hw))


def random_degenerate_map(rng: np.random.Generator, degree: int, holes: int | None = None) -> ProjectiveRatMap:
    """Exact map H·(P̃, Q̃) with holes drawn from a few Gaussian-rational points."""
    total = holes if holes is not None else int(rng.integers(1, degree + 1))
    r = degree - total
    while True:
        num = [exact.gaussian(int(x)) for x in rng.integers(-3, 4, size=r + 1)]
        den = [exact.gaussian(int(x)) for x in rng.integers(-3, 4, size=r + 1)]
        zero_num, zero_den = all(x == 0 for x in num), all(x == 0 for x in den)
        if r == 0:
            if not (zero_num and zero_den):
                break
            continue
        if zero_num or zero_den:
            continue
        reduction = ProjectiveRatMap(r, num, den, "exact")
        if exact.exact_resultant(reduction.numerator, reduction.denominator) != 0:
            break
    h: tuple = (exact.gaussian(1),)
    for _ in range(total):
        h = exact.convolve(h, _linear(_HOLE_CHOICES[int(rng.integers(len(_HOLE_CHOICES)))]))
    return ProjectiveRatMap(degree, list(exact.convolve(h, tuple(num))), list(exact.convolve(h, tuple(den))), "exact")


def schedule_floats(F: FamilySpec) -> Sequence[float]:
    return [float(t) for t in F.schedule]
