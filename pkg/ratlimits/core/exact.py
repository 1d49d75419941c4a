"""
Gaussian-rational arithmetic for the exact backend (sympy QQ_I).

Binary forms are handled through their dehomogenization at w = 1: a form of
intended degree d is a Poly in z of degree ≤ d, the missing top degrees being
roots at ∞.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Any, Iterable

import sympy
from sympy import QQ, QQ_I, Poly
from sympy.polys.matrices import DomainMatrix

from ratlimits.errors import CoefficientOverflow

Z = sympy.Symbol("z")


def to_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**12)
    if hasattr(value, "numerator") and hasattr(value, "denominator"):
        return Fraction(int(value.numerator), int(value.denominator))
    raise TypeError(f"cannot read {value!r} as a rational number")


def gaussian(re: Any, im: Any = 0):
    """QQ_I element from two rationals (Fraction, int, 'p/q' strings)."""
    a, b = to_fraction(re), to_fraction(im)
    return QQ_I(QQ(a.numerator, a.denominator), QQ(b.numerator, b.denominator))


def gaussian_parts(x) -> tuple[Fraction, Fraction]:
    return (
        Fraction(int(x.x.numerator), int(x.x.denominator)),
        Fraction(int(x.y.numerator), int(x.y.denominator)),
    )


def gaussian_to_complex(x) -> complex:
    re, im = gaussian_parts(x)
    return complex(float(re), float(im))


def gaussian_bits(x) -> int:
    return max(
        int(x.x.numerator).bit_length(),
        int(x.x.denominator).bit_length(),
        int(x.y.numerator).bit_length(),
        int(x.y.denominator).bit_length(),
    )


def check_bits(coeffs: Iterable, cap: int) -> None:
    worst = max((gaussian_bits(c) for c in coeffs), default=0)
    if worst > cap:
        raise CoefficientOverflow(
            "exact coefficients exceed the bit-size cap; switch to the floating backend",
            bits=worst,
            cap=cap,
        )


def form_to_poly(coeffs) -> Poly:
    """Dehomogenize a form given low-to-high."""
    return Poly(list(reversed(list(coeffs))), Z, domain=QQ_I)


def poly_to_form(p: Poly, degree: int) -> tuple:
    """Coefficients low-to-high of a Poly read as a form of the given degree."""
    if p.is_zero:
        return tuple(QQ_I.zero for _ in range(degree + 1))
    coeffs = [QQ_I.from_sympy(c) for c in reversed(p.all_coeffs())]
    if len(coeffs) > degree + 1:
        raise ValueError("polynomial degree exceeds the intended form degree")
    return tuple(coeffs + [QQ_I.zero] * (degree + 1 - len(coeffs)))


def poly_degree(p: Poly) -> int:
    return -1 if p.is_zero else int(p.degree())


def sylvester_rows(a: list, b: list) -> list[list]:
    """Sylvester matrix of two forms of equal degree d, coefficients high-to-low."""
    d = len(a) - 1
    size = 2 * d
    rows = []
    for src in (a, b):
        for i in range(d):
            row = [QQ_I.zero] * size
            for j, c in enumerate(src):
                row[i + j] = c
            rows.append(row)
    return rows


def exact_resultant(num: tuple, den: tuple):
    d = len(num) - 1
    rows = sylvester_rows(list(reversed(num)), list(reversed(den)))
    return DomainMatrix(rows, (2 * d, 2 * d), QQ_I).det()


def convolve(a: tuple, b: tuple) -> tuple:
    """Product of two forms (low-to-high), exact."""
    out = [QQ_I.zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == QQ_I.zero:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return tuple(out)
