import logging

import numpy as np
import pytest

from ratlimits.core import catalog
from ratlimits.core.moebius import MoebiusMap
from ratlimits.core.polylike import (
    PairSamples,
    check_julia_hypotheses,
    extract_polynomial_like,
    julia_localization_check,
    periodic_points,
    polynomial_like_search,
    round_disk_certificate,
    winding_number,
)
from ratlimits.core.ratmap import ProjectiveRatMap
from ratlimits.core.rescaling import sample_family
from ratlimits.core.sphere import SpherePoint, chordal_distance
from ratlimits.errors import HypothesisUnmet

INF = SpherePoint.infinity()


def _pair(F, target):
    maps = [sample_family(F, t) for t in F.schedule]
    b0 = [MoebiusMap.identity() for _ in maps]
    b1 = [MoebiusMap.sample(target(float(t))) for t in F.schedule]
    return PairSamples.from_maps(maps, b0, b1)


def test_winding_number_of_circles():
    circle = np.exp(2j * np.pi * np.arange(64) / 64)
    assert winding_number(circle, 0) == pytest.approx(1.0)
    assert winding_number(circle ** 2, 0) == pytest.approx(2.0)
    assert winding_number(circle, 3) == pytest.approx(0.0, abs=1e-12)


def test_periodic_points_of_square(pt):
    pts = periodic_points(ProjectiveRatMap.polynomial([0, 0, 1]), 1)
    assert len(pts) == 3
    for target in (pt(0), pt(1), pt("inf")):
        assert any(chordal_distance(p, target) < 1e-6 for p in pts)


def test_round_disk_certificate():
    h = ProjectiveRatMap.polynomial([10, 0, 1])
    cert = round_disk_certificate(h, 8.0)
    print(f"[INFO] winding={cert.winding:.6f} modulus={cert.modulus:.4f} curves={len(cert.inner_boundary)}")
    assert cert.degree == 2
    assert len(cert.inner_boundary) == 2
    assert cert.winding == pytest.approx(2.0)
    assert cert.modulus > 0
    assert all(chordal_distance(p, INF) < 1e-9 for p in cert.basin_points)
    report = julia_localization_check(h, cert, n_samples=300)
    assert report.passed


def test_square_over_epsilon_passes():
    F = catalog.z2_over_eps()
    pair = _pair(F, lambda t: np.diag([t, 1.0]).astype(complex))
    hyp = check_julia_hypotheses(pair)
    print(f"[INFO] hypotheses: {hyp.to_dict()}")
    assert hyp.passed
    assert chordal_distance(hyp.a, INF) < 1e-9
    assert hyp.local_degree == 2
    k = [float(t) for t in F.schedule].index(1e-3)
    cert = extract_polynomial_like(pair, k, hypotheses=hyp)
    assert cert.degree == 2
    assert cert.periodic
    assert cert.to_dict()["k"] == k


def test_local_degree_one_fails():
    pair = _pair(catalog.demarco_faber(), lambda t: np.diag([1.0 / t, 1.0]).astype(complex))
    hyp = check_julia_hypotheses(pair)
    assert not hyp.passed
    assert hyp.local_degree == 1
    with pytest.raises(HypothesisUnmet):
        extract_polynomial_like(pair, 0, hypotheses=hyp)


def test_critical_value_at_the_switch_point_fails():
    pair = _pair(catalog.z2_plus_inverse_t(), lambda t: np.array([[1.0, -1.0 / t], [0.0, 1.0]], dtype=complex))
    hyp = check_julia_hypotheses(pair)
    assert not hyp.passed
    assert "coincides" in hyp.reason


def test_search_needs_fully_ramified_runs(z2_scheme):
    with pytest.raises(HypothesisUnmet):
        polynomial_like_search(z2_scheme.family, 4, scheme=z2_scheme)


def test_short_windows_are_experimental(z2_scheme, caplog):
    with caplog.at_level(logging.WARNING):
        found = polynomial_like_search(z2_scheme.family, 4, window=1, scheme=z2_scheme)
    assert "experimental" in caplog.text
    assert found.experimental
    assert found.run == (1,)
    assert found.certificates == ()
    assert not found.hypotheses[0].passed
