"""
Multiprecision helpers (mpmath) for degenerating families.

Coefficients of f_k, post-scalings A_{n,k} and transition samples involve
massive cancellation as k grows, so schemes are assembled here at a working
precision chosen from the level and the size of t, and only renormalized
results are rounded to numpy. Forms are lists of mpc (low to high, same
convention as the float backend), Möbius matrices are 2×2 nested lists,
points are (z, w) tuples.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Any, Sequence

import mpmath
import numpy as np
from mpmath import mpc, mpf

from ratlimits.config import Settings, get_settings

MpForm = list
MpMatrix = list
MpPair = tuple


def working_bits(degree: int, level: int, t_values: Sequence[Any], cfg: Settings | None = None) -> int:
    """max(min_bits, 128 + 2·d^(level+1)·(max|log₂ t| + 8)), capped."""
    cfg = cfg or get_settings()
    logs = [abs(math.log2(abs(complex(t)))) for t in t_values if complex(t) != 0] or [0.0]
    bits = 128 + 2 * degree ** (level + 1) * (max(logs) + 8)
    return int(min(cfg.scheme_max_bits, max(cfg.scheme_min_bits, math.ceil(bits))))


def workprec(bits: int):
    return mpmath.workprec(bits)


def to_mpc(value: Any) -> mpc:
    if isinstance(value, mpc):
        return value
    if isinstance(value, Fraction):
        return mpc(mpf(value.numerator) / value.denominator)
    if isinstance(value, str):
        s = value.strip()
        if "/" in s:
            p, q = s.split("/")
            return mpc(mpf(p) / mpf(q))
        return mpc(mpf(s))
    if isinstance(value, (tuple, list)) and len(value) == 2:
        return mpc(to_mpc(value[0]).real, to_mpc(value[1]).real)
    if hasattr(value, "real") and hasattr(value, "imag") and not isinstance(value, (int, float)):
        return mpc(value.real, value.imag)
    return mpc(value)


def poly_eval(coeffs: Sequence[mpc], t: mpc) -> mpc:
    """Σ c_j t^j (coefficients low to high)."""
    acc = mpc(0)
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def sup_norm(vec: Sequence[mpc]) -> mpf:
    return max(abs(v) for v in vec)


def normalize(vec: Sequence[mpc]) -> list:
    s = sup_norm(vec)
    if s == 0:
        raise ValueError("zero vector")
    return [v / s for v in vec]


def to_numpy(vec: Sequence[mpc]) -> np.ndarray:
    """Sup-normalize then round to complex128."""
    return np.array([complex(v) for v in normalize(vec)], dtype=complex)


# --- forms ---

def form_mul(a: MpForm, b: MpForm) -> MpForm:
    out = [mpc(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _powers(form: MpForm, n: int) -> list[MpForm]:
    out = [[mpc(1)]]
    for _ in range(n):
        out.append(form_mul(out[-1], form))
    return out


def compose(f: tuple[MpForm, MpForm], g: tuple[MpForm, MpForm]) -> tuple[MpForm, MpForm]:
    """Formal substitution f ∘ g on (numerator, denominator) forms."""
    fn, fd = f
    gn, gd = g
    d = len(fn) - 1
    pp, qp = _powers(gn, d), _powers(gd, d)
    size = d * (len(gn) - 1) + 1
    num = [mpc(0)] * size
    den = [mpc(0)] * size
    for i in range(d + 1):
        term = form_mul(pp[i], qp[d - i])
        for j, c in enumerate(term):
            num[j] += fn[i] * c
            den[j] += fd[i] * c
    return num, den


def eval_form(coeffs: MpForm, pair: MpPair) -> mpc:
    z, w = pair
    d = len(coeffs) - 1
    return sum((c * z ** i * w ** (d - i) for i, c in enumerate(coeffs)), mpc(0))


def apply_map(f: tuple[MpForm, MpForm], pair: MpPair) -> MpPair:
    return normalize_pair((eval_form(f[0], pair), eval_form(f[1], pair)))


def normalize_pair(pair: MpPair) -> MpPair:
    z, w = pair
    s = max(abs(z), abs(w))
    if s == 0:
        raise ValueError("(0, 0) is not a point")
    return (z / s, w / s)


def chordal(p: MpPair, q: MpPair) -> mpf:
    num = abs(p[0] * q[1] - p[1] * q[0])
    den = mpmath.sqrt(abs(p[0]) ** 2 + abs(p[1]) ** 2) * mpmath.sqrt(abs(q[0]) ** 2 + abs(q[1]) ** 2)
    return num / den


# --- Möbius matrices ---

def matrix(entries) -> MpMatrix:
    return [[to_mpc(entries[0][0]), to_mpc(entries[0][1])], [to_mpc(entries[1][0]), to_mpc(entries[1][1])]]


def identity() -> MpMatrix:
    return [[mpc(1), mpc(0)], [mpc(0), mpc(1)]]


def matmul(a: MpMatrix, b: MpMatrix) -> MpMatrix:
    return [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]


def adjugate(m: MpMatrix) -> MpMatrix:
    """Inverse up to scale."""
    return [[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]]


def normalize_matrix(m: MpMatrix) -> MpMatrix:
    s = max(abs(x) for row in m for x in row)
    return [[x / s for x in row] for row in m]


def matrix_to_numpy(m: MpMatrix) -> np.ndarray:
    m = normalize_matrix(m)
    return np.array([[complex(x) for x in row] for row in m], dtype=complex)


def moebius_forms(m: MpMatrix) -> tuple[MpForm, MpForm]:
    """z ↦ (a z + b w) : (c z + d w) as degree-one forms."""
    return [m[0][1], m[0][0]], [m[1][1], m[1][0]]


def apply_moebius(m: MpMatrix, pair: MpPair) -> MpPair:
    z, w = pair
    return normalize_pair((m[0][0] * z + m[0][1] * w, m[1][0] * z + m[1][1] * w))


def triple_matrix(p1: MpPair, p2: MpPair, p3: MpPair) -> MpMatrix:
    """Matrix sending p1 ↦ 0, p2 ↦ ∞, p3 ↦ 1."""
    def wedge(x, y):
        return x[0] * y[1] - x[1] * y[0]

    s1, s2 = wedge(p3, p2), wedge(p3, p1)
    return [[s1 * p1[1], -s1 * p1[0]], [s2 * p2[1], -s2 * p2[0]]]


def sylvester_det(num: MpForm, den: MpForm) -> mpc:
    d = len(num) - 1
    m = mpmath.matrix(2 * d, 2 * d)
    a, b = list(reversed(num)), list(reversed(den))
    for i in range(d):
        for j in range(d + 1):
            m[i, i + j] = a[j]
            m[d + i, i + j] = b[j]
    return mpmath.det(m)


def from_complex(value: complex) -> MpPair:
    return (mpc(value), mpc(1))


def from_pair(pair) -> MpPair:
    return normalize_pair((mpc(complex(pair[0])), mpc(complex(pair[1]))))


def pair_to_numpy(pair: MpPair) -> np.ndarray:
    z, w = normalize_pair(pair)
    return np.array([complex(z), complex(w)], dtype=complex)
