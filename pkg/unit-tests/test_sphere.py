import math

import numpy as np
import pytest

from ratlimits.core.sphere import (
    SpherePoint,
    chart_values,
    chordal_distance,
    chordal_pairs,
    fibonacci_pairs,
    from_stereographic,
    same_point,
    stereographic,
)


def test_normalization_keeps_largest_coordinate_one():
    p = SpherePoint(2, 4)
    q = SpherePoint(4, 2)
    print(f"[INFO] normalized -> p=({p.z}, {p.w}), q=({q.z}, {q.w})")
    assert (p.z, p.w) == (0.5, 1.0)
    assert (q.z, q.w) == (1.0, 0.5)
    assert p.to_complex() == 0.5


def test_zero_pair_is_rejected():
    with pytest.raises(ValueError):
        SpherePoint(0, 0)


def test_repr_of_finite_and_infinite_points():
    assert repr(SpherePoint.infinity()) == "SpherePoint(∞)"
    assert repr(SpherePoint.from_complex(0.5)) == "SpherePoint(0.5+0j)"


@pytest.mark.parametrize(
    "a, b, expected",
    [
        (0, "inf", 1.0),            # poles are a diameter apart
        (1, -1, 1.0),               # antipodal on the equator
        (0, 1, 1 / math.sqrt(2)),
        (1j, 1j, 0.0),
    ],
)
def test_chordal_distance_table(pt, a, b, expected):
    d = chordal_distance(pt(a), pt(b))
    print(f"[INFO] chordal({a}, {b}) = {d}")
    assert d == pytest.approx(expected, abs=1e-15)


def test_antipode_and_stereographic_poles(pt):
    assert pt(0).antipode().is_infinity
    assert np.allclose(stereographic(pt(0)), [0, 0, -1])
    assert np.allclose(stereographic(pt("inf")), [0, 0, 1])
    back = from_stereographic(stereographic(pt(0.3 - 2j)))
    assert same_point(back, pt(0.3 - 2j), tol=1e-12)


def test_batch_helpers_agree_with_scalar_versions(pt):
    pairs = fibonacci_pairs(50)
    assert pairs.shape == (50, 2)
    a, b = pt(2 + 1j), pt(-0.5)
    batch = chordal_pairs(a.pair()[None, :], b.pair()[None, :])[0]
    assert batch == pytest.approx(chordal_distance(a, b), abs=1e-15)
    vals = chart_values(np.array([[1, 0], [2, 1]], dtype=complex))
    assert np.isinf(vals[0].real) and vals[1] == 2
