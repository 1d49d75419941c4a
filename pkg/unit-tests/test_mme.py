import logging

import numpy as np
import pytest

from ratlimits.core.measures import AtomicMeasure, uniform_circle, weakstar_distance
from ratlimits.core.mme import (
    fixed_point_check,
    mme_fixed_point_residual,
    mme_sample,
    noise_floor,
    pullback_iterate,
    quasi_random_points,
    random_starts,
    weak_pair_limit_check,
)
from ratlimits.core.moebius import MoebiusMap
from ratlimits.core.ratmap import ProjectiveRatMap
from ratlimits.core.sphere import chart_values, chordal_pairs, pairs_to_xyz
from ratlimits.errors import ExceptionalMass, HypothesisUnmet

SQUARE = ProjectiveRatMap.polynomial([0, 0, 1])


def test_square_measure_lives_on_the_unit_circle():
    mu = mme_sample(SQUARE, 300, 40)
    radii = np.abs(chart_values(mu.pairs))
    print(f"[INFO] {len(mu)} atoms, max | |z| - 1 | = {np.max(np.abs(radii - 1)):.2e}")
    assert mu.mass == pytest.approx(1.0)
    assert np.max(np.abs(radii - 1)) < 1e-6


def test_chebyshev_measure_has_the_arcsine_moments():
    mu = mme_sample(ProjectiveRatMap.polynomial([-2, 0, 1]), 2000, 40)
    z = chart_values(mu.pairs)
    mean = float(np.sum(mu.weights * z.real))
    second = float(np.sum(mu.weights * z.real ** 2))
    print(f"[INFO] mean={mean:.4f} second moment={second:.4f}")
    assert np.max(np.abs(z.imag)) < 1e-6
    assert abs(mean) < 0.15
    assert abs(second - 2.0) < 0.15


def test_sampler_output_does_not_depend_on_threads(make_cfg):
    cfg = make_cfg(chain_block=16)
    one = mme_sample(SQUARE, 40, 20, seed=7, cfg=cfg, threads=1)
    four = mme_sample(SQUARE, 40, 20, seed=7, cfg=cfg, threads=4)
    assert np.array_equal(one.pairs, four.pairs)
    assert np.array_equal(one.weights, four.weights)


def test_seed_changes_the_sample():
    a = mme_sample(SQUARE, 50, 20, seed=1)
    b = mme_sample(SQUARE, 50, 20, seed=2)
    assert not np.array_equal(a.pairs, b.pairs)


def test_sampler_rejects_degree_one():
    with pytest.raises(HypothesisUnmet):
        mme_sample(ProjectiveRatMap.polynomial([1, 2]), 10, 20)


def test_short_chains_are_lengthened(caplog):
    with caplog.at_level(logging.WARNING):
        mme_sample(SQUARE, 10, 2)
    assert "below burn-in" in caplog.text


def test_fixed_point_residual_is_small():
    mu = mme_sample(SQUARE, 1000, 40)
    res = mme_fixed_point_residual(SQUARE, mu)
    print(f"[INFO] fixed-point residual = {res:.4f}")
    assert res < 0.25


def test_pullback_iterate_keeps_the_circle(pt):
    mu = pullback_iterate(SQUARE, uniform_circle(8, radius=2.0), 6, cap=500, seed=3)
    assert mu.mass == pytest.approx(1.0)
    assert len(mu) <= 500
    # radii 2^(1/64) after six square roots
    assert np.allclose(np.abs(chart_values(mu.pairs)), 2 ** (1 / 64), atol=1e-9)
    with pytest.raises(ExceptionalMass):
        pullback_iterate(SQUARE, AtomicMeasure.dirac(pt(0)), 2)


def test_quasi_random_points_cover_the_sphere():
    xyz = pairs_to_xyz(quasi_random_points(400))
    assert np.allclose(np.linalg.norm(xyz, axis=1), 1.0)
    assert abs(float(xyz[:, 2].mean())) < 0.05


def test_weak_pair_check_on_a_constant_sequence():
    report = weak_pair_limit_check([SQUARE] * 3, [MoebiusMap.identity()] * 3, SQUARE, 1000, 30)
    print(f"[INFO] residuals = {report.residuals}, floor = {report.noise_floor:.4f}")
    assert len(report.residuals) == 3
    assert max(report.residuals) < 0.25
    assert report.map_distances == pytest.approx((0.0, 0.0, 0.0), abs=1e-12)
    with pytest.raises(HypothesisUnmet):
        weak_pair_limit_check([SQUARE], [], SQUARE, 10, 10)


@pytest.fixture
def large_constant_family():
    ts = (1e-3, 1e-4, 1e-5)
    maps = [ProjectiveRatMap.polynomial([1 / t, 0, 1]) for t in ts]
    shifts = [MoebiusMap.from_matrix(np.array([[1, -1 / t], [0, 1]], dtype=complex)) for t in ts]
    return maps, shifts


def test_weak_pair_check_along_a_degenerating_family(large_constant_family):
    maps, shifts = large_constant_family
    report = weak_pair_limit_check(maps, shifts, SQUARE, 1000, 30, seed=11)
    print(f"[INFO] residuals = {report.residuals}, distances = {report.map_distances}")
    assert max(report.map_distances) < 1e-9
    assert max(report.residuals) < 0.05
    assert report.converging


def test_weak_pair_check_rejects_the_wrong_limit(large_constant_family):
    maps, shifts = large_constant_family
    wrong = ProjectiveRatMap.polynomial([1, 0, 1])
    with pytest.raises(HypothesisUnmet) as info:
        weak_pair_limit_check(maps, shifts, wrong, 100, 20)
    print(f"[INFO] {info.value.to_report()}")
    assert info.value.details["distances"][-1] > 1e-3


@pytest.mark.parametrize(
    "f",
    [
        ProjectiveRatMap.polynomial([-1, 0, 1]),
        ProjectiveRatMap.polynomial([0, 0.05, 0, 1]),
        ProjectiveRatMap(2, np.array([0.3 + 0.2j, -0.7j, 1.1]), np.array([0.9, 0.4 - 0.3j, -0.6j])),
    ],
    ids=["basilica", "perturbed-cube", "rational"],
)
def test_fixed_point_residual_is_within_the_noise_floor(f):
    report = fixed_point_check(f, 400, 30, replicates=3, seed=5)
    print(f"[INFO] degree {f.degree}: residual {report.residual:.4f}, floor {report.noise_floor:.4f}")
    assert len(report.residuals) == 6
    assert len(report.floors) == 3
    assert report.within_noise


def test_chains_start_away_from_the_exceptional_set(rng, pt):
    bad = [pt(0), pt("inf")]
    starts = random_starts(bad, 500, rng)
    gaps = chordal_pairs(starts[:, None, :], np.array([p.pair() for p in bad])[None, :, :])
    assert starts.shape == (500, 2)
    assert float(gaps.min()) > 1e-3
    assert len(np.unique(np.round(pairs_to_xyz(starts), 6), axis=0)) == 500


def test_sample_is_close_to_the_uniform_circle():
    mu = mme_sample(SQUARE, 2000, 40)
    assert weakstar_distance(mu, uniform_circle(2000)) < 0.2


def test_noise_floor_is_reproducible():
    a = noise_floor(SQUARE, 100, 20, seeds=(1, 2))
    assert a > 0
    assert noise_floor(SQUARE, 100, 20, seeds=(1, 2)) == a
    assert noise_floor(SQUARE, 100, 20, seeds=(5, 5)) == 0.0
