import math

import numpy as np
import pytest

from ratlimits.core.moebius import (
    MoebiusMap,
    fit_moebius,
    fit_residual,
    is_rotation,
    moebius_limit_classify,
    rotation_from_vector,
)
from ratlimits.core.sphere import SpherePoint, chordal_distance
from ratlimits.errors import DegenerateTriple, HoleEvaluation, NotCauchy


def test_fit_sends_triple_to_triple(pt):
    src = [pt(0), pt(1), pt("inf")]
    dst = [pt(1), pt(2), pt(3)]
    a = fit_moebius(src, dst)
    res = fit_residual(a, src, dst)
    print(f"[INFO] fit residual = {res:.3e}")
    assert res < 1e-12


def test_fit_rejects_close_points(pt):
    with pytest.raises(DegenerateTriple):
        fit_moebius([pt(0), pt(1e-6), pt(1)], [pt(0), pt(1), pt(2)])


def test_degenerate_limit_reads_off_hole_and_value():
    seq = [np.diag([10.0 ** -k, 1.0]) for k in range(1, 9)]
    lim = moebius_limit_classify(seq)
    print(f"[INFO] limit: degenerate={lim.degenerate}, hole={lim.limit.hole!r}, value={lim.limit.reduction!r}")
    assert lim.degenerate
    assert lim.limit.hole.is_infinity
    assert chordal_distance(lim.limit.reduction, SpherePoint.from_complex(0)) < 1e-12


def test_nondegenerate_limit():
    seq = [np.array([[1.0, 10.0 ** -k], [0.0, 1.0]]) for k in range(1, 8)]
    lim = moebius_limit_classify(seq)
    assert not lim.degenerate
    assert lim.certificate.last_step < 1e-6


def test_diverging_sequence_is_not_cauchy():
    seq = [np.array([[1.0, (-1.0) ** k], [0.0, 1.0]]) for k in range(6)]
    with pytest.raises(NotCauchy):
        moebius_limit_classify(seq)


def test_evaluation_at_the_hole_fails(pt):
    c = MoebiusMap.constant(pt(1), pt(0))
    assert c.degenerate
    assert chordal_distance(c.apply(pt(5)), pt(1)) < 1e-12
    with pytest.raises(HoleEvaluation):
        c.apply(pt(0))


def test_sample_keeps_tiny_determinants_invertible():
    m = np.diag([1e-30, 1.0])
    assert not MoebiusMap.sample(m).degenerate
    assert MoebiusMap.from_matrix(m).degenerate


def test_rotations(pt):
    r = rotation_from_vector([0.0, 0.0, math.pi / 2])
    ok, _ = is_rotation(r)
    assert ok
    # a quarter turn about the polar axis sends 1 to ±i
    img = r.apply(pt(1)).to_complex()
    assert abs(abs(img) - 1) < 1e-12 and abs(img.real) < 1e-12
    ok, _ = is_rotation(MoebiusMap.from_matrix(np.diag([2.0, 1.0])))
    assert not ok
