import numpy as np
import pytest

from ratlimits.core.harmonics import dictionary, dictionary_size, power_spectrum, real_harmonics
from ratlimits.core.measures import (
    AtomicMeasure,
    depth_measure,
    harmonic_moments,
    is_nonexceptional,
    pull_back,
    push_forward,
    push_forward_function,
    resample,
    uniform_circle,
    weakstar_distance,
)
from ratlimits.core.moebius import MoebiusMap
from ratlimits.core.ratmap import ProjectiveRatMap
from ratlimits.core.sphere import fibonacci_pairs
from ratlimits.errors import ExceptionalMass, HoleMass, NotDegenerate

SQUARE = ProjectiveRatMap.polynomial([0, 0, 1])


def test_atoms_merge_and_weights_validate(pt):
    mu = AtomicMeasure.from_points([pt(1), pt(1), pt(2)], [0.25, 0.25, 0.5])
    assert len(mu) == 2
    assert mu.mass == pytest.approx(1.0)
    assert mu.mass_near(pt(1), 1e-9) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        AtomicMeasure.from_points([pt(1)], [-1.0])
    with pytest.raises(ValueError):
        AtomicMeasure.from_points([pt(1), pt(2)], [1.0])


def test_push_forward_by_square(pt):
    mu = push_forward(SQUARE, AtomicMeasure.dirac(pt(2)))
    assert mu.mass_near(pt(4), 1e-9) == pytest.approx(1.0)


def test_degenerate_moebius_push_forward(pt):
    c = MoebiusMap.constant(pt(3), pt(0))
    mu = push_forward(c, AtomicMeasure.from_points([pt(1), pt(-1)]))
    assert mu.mass_near(pt(3), 1e-9) == pytest.approx(1.0)
    with pytest.raises(HoleMass):
        push_forward(c, AtomicMeasure.dirac(pt(0)))


def test_depth_measure(make_map, pt):
    eta = depth_measure(make_map([0, 0, 1], [0, 1, 0]))          # [z² : zw]
    assert eta.mass == pytest.approx(1.0)
    assert eta.mass_near(pt(0), 1e-6) == pytest.approx(1.0)
    with pytest.raises(NotDegenerate):
        depth_measure(SQUARE)


def test_pull_back_adds_the_depth_measure(make_map, pt):
    mu = pull_back(make_map([0, 0, 1], [0, 1, 0]), AtomicMeasure.dirac(pt(3)))
    print(f"[INFO] pull-back mass = {mu.mass}")
    assert mu.mass == pytest.approx(2.0)
    assert mu.mass_near(pt(3), 1e-6) == pytest.approx(1.0)
    assert mu.mass_near(pt(0), 1e-6) == pytest.approx(1.0)


def test_pull_back_by_square_splits_atoms(pt):
    mu = pull_back(SQUARE, AtomicMeasure.dirac(pt(4)))
    assert mu.mass_near(pt(2), 1e-6) == pytest.approx(1.0)
    assert mu.mass_near(pt(-2), 1e-6) == pytest.approx(1.0)


def test_pull_back_through_constant_reduction(make_map, pt):
    g = make_map([0, 1], [0, 0])                                  # [z : 0], hole 0, value ∞
    mu = pull_back(g, AtomicMeasure.dirac(pt(1), 0.5))
    assert mu.mass_near(pt(0), 1e-6) == pytest.approx(0.5)
    with pytest.raises(ExceptionalMass):
        pull_back(g, AtomicMeasure.dirac(pt("inf")))


def test_weakstar_distance_between_poles(pt):
    south, north = AtomicMeasure.dirac(pt(0)), AtomicMeasure.dirac(pt("inf"))
    assert weakstar_distance(south, south) == 0.0
    # the normalized zonal harmonic of degree one is -1 at 0 and +1 at ∞
    assert weakstar_distance(south, north) == pytest.approx(2.0, abs=1e-12)


def test_dictionary_is_bounded_and_sized(cfg):
    pairs = fibonacci_pairs(500)
    vals = dictionary(pairs, cfg.harmonic_cutoff)
    assert vals.shape == (500, dictionary_size(cfg.harmonic_cutoff))
    assert np.max(np.abs(vals)) <= 1 + 1e-12
    assert len(harmonic_moments(uniform_circle(64), cfg)) == dictionary_size(cfg.harmonic_cutoff)


def test_power_spectrum_is_rotation_invariant(pt):
    pairs = np.array([p.pair() for p in (pt(0.2), pt(1 + 1j), pt(-3))])
    rotated = MoebiusMap.from_matrix(np.array([[1, 1], [-1, 1]], dtype=complex) / np.sqrt(2)).apply_pairs(pairs)
    spec = power_spectrum(real_harmonics(pairs, 4).mean(axis=0), 4)
    spec_rot = power_spectrum(real_harmonics(rotated, 4).mean(axis=0), 4)
    assert np.allclose(spec, spec_rot, atol=1e-10)


def test_exceptional_detection(pt):
    assert not is_nonexceptional(AtomicMeasure.dirac(pt(0)), [SQUARE])
    assert is_nonexceptional(AtomicMeasure.dirac(pt(1)), [SQUARE])


def test_resample_caps_atoms_and_keeps_mass(rng):
    mu = uniform_circle(50)
    small = resample(mu, 10, rng)
    assert len(small) <= 10
    assert small.mass == pytest.approx(mu.mass)
    assert resample(mu, 100, rng) is mu


def test_push_forward_of_a_function_counts_preimages():
    pairs = fibonacci_pairs(20)
    vals = push_forward_function(SQUARE, lambda p: np.ones((len(p), 1)), pairs)
    assert vals.shape == (20, 1)
    assert np.allclose(vals, 2.0)
