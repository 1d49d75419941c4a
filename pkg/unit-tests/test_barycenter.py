from itertools import permutations

import numpy as np
import pytest

from ratlimits.core.barycenter import (
    DmClass,
    HPoint,
    act_on_ball,
    aligned_distance,
    barycentered_normalize,
    conformal_barycenter,
    dm_class,
    dm_distance,
    euclidean_moment,
    feature_distance,
    heavy_atom_check,
    hyperbolic_distance,
    rotation_from_matrix,
    spectrum,
    translation_to_origin,
)
from ratlimits.core.measures import AtomicMeasure, push_forward, uniform_circle
from ratlimits.core.moebius import MoebiusMap, random_rotation
from ratlimits.core.sphere import SpherePoint, from_stereographic, stereographic
from ratlimits.errors import NotInM1o


@pytest.fixture
def three_atoms(pt):
    return AtomicMeasure.from_points([pt(0.5), pt(2j), pt(-1 - 1j)], [0.3, 0.3, 0.4])


def test_balanced_measure_sits_at_the_origin():
    res = conformal_barycenter(uniform_circle(64))
    assert res.iterations == 0
    assert res.center.norm < 1e-12


def test_normalized_measure_is_balanced():
    t, nu = barycentered_normalize(uniform_circle(32, radius=2.0))
    moment = np.linalg.norm(euclidean_moment(nu))
    print(f"[INFO] moment after normalization = {moment:.2e}")
    assert moment < 1e-8
    again = conformal_barycenter(nu)
    assert again.center.norm < 1e-6


def test_rotation_keeps_the_distance_to_the_origin(three_atoms, rng):
    base = conformal_barycenter(three_atoms).center
    rotated = conformal_barycenter(push_forward(random_rotation(rng), three_atoms)).center
    origin = HPoint.origin()
    assert hyperbolic_distance(base, origin) == pytest.approx(hyperbolic_distance(rotated, origin), abs=1e-6)


def test_translation_carries_the_point_home():
    p = HPoint(np.array([0.2, -0.1, 0.5]))
    home = act_on_ball(translation_to_origin(p), p)
    assert home.norm < 1e-10
    assert hyperbolic_distance(p, HPoint.origin()) == pytest.approx(np.arctanh(p.norm) * 2)


def test_heavy_atoms(pt):
    mu = AtomicMeasure.from_points([pt(0), pt(1)], [0.6, 0.4])
    atom, weight = heavy_atom_check(mu)
    assert atom.to_complex() == 0 and weight == pytest.approx(0.6)
    with pytest.raises(NotInM1o):
        conformal_barycenter(mu)
    assert heavy_atom_check(uniform_circle(8)) is None


def test_antipodal_pair_is_the_infinite_class(pt):
    c = dm_class(AtomicMeasure.from_points([pt(1j), pt(-1j)], [0.5, 0.5]))
    assert c.infinity
    assert feature_distance(c, dm_class(AtomicMeasure.dirac(pt(3)))) == 0.0


def test_classes_ignore_moebius_changes(three_atoms):
    scale = MoebiusMap.from_matrix(np.array([[3.0, 1.0], [0.0, 1.0]], dtype=complex))
    c1 = dm_class(three_atoms)
    c2 = dm_class(push_forward(scale, three_atoms))
    d = dm_distance(c1, c2)
    print(f"[INFO] class distance = {d:.2e}")
    assert not c1.infinity
    assert d < 1e-6


def test_distance_to_the_infinite_class_uses_the_antipodal_spectrum(three_atoms, pt):
    c = dm_class(three_atoms)
    d = feature_distance(c, dm_class(AtomicMeasure.dirac(pt(3))))
    pair = AtomicMeasure.from_points([pt(0), pt("inf")], [0.5, 0.5])
    assert d > 0
    assert d == pytest.approx(float(np.linalg.norm(c.features - spectrum(pair))))


def test_aligned_distance_finds_the_rotation(three_atoms):
    assert aligned_distance(three_atoms, three_atoms) < 1e-8
    spin = MoebiusMap.from_matrix(np.diag([np.exp(0.15j), np.exp(-0.15j)]))
    turned = push_forward(spin, three_atoms)
    d = aligned_distance(turned, three_atoms)
    print(f"[INFO] aligned distance after a 0.3 rad spin = {d:.2e}")
    assert d < 1e-6


def test_aligned_distance_recovers_a_random_rotation(three_atoms, rng):
    turned = push_forward(random_rotation(rng), three_atoms)
    d = aligned_distance(three_atoms, turned)
    print(f"[INFO] aligned distance after a random rotation = {d:.2e}")
    assert d < 1e-6


def test_rotation_from_matrix_moves_the_axes():
    r = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    a = rotation_from_matrix(r)
    for e in [*np.eye(3), np.ones(3) / np.sqrt(3)]:
        assert np.allclose(stereographic(a.apply(from_stereographic(e))), r @ e, atol=1e-9)


def _random_measure(rng, size=3):
    pts = [SpherePoint.from_complex(complex(*rng.normal(size=2))) for _ in range(size)]
    return AtomicMeasure.from_points(pts, rng.uniform(0.25, 0.4, size=size))


def test_aligned_distance_is_symmetric_and_dominates_the_spectrum(rng):
    mu, nu = _random_measure(rng), _random_measure(rng)
    forward, backward = aligned_distance(mu, nu), aligned_distance(nu, mu)
    lower = float(np.linalg.norm(spectrum(mu) - spectrum(nu)))
    print(f"[INFO] aligned {forward:.6f} / {backward:.6f}, spectral {lower:.6f}")
    assert forward == backward
    assert forward >= lower - 1e-9


def test_class_distance_is_a_pseudo_metric(rng):
    classes = [dm_class(_random_measure(rng)) for _ in range(5)]
    classes.append(DmClass.at_infinity())
    worst = 0.0
    for a, b, c in permutations(classes, 3):
        assert dm_distance(a, b) == dm_distance(b, a)
        worst = max(worst, dm_distance(a, c) - dm_distance(a, b) - dm_distance(b, c))
    print(f"[INFO] largest triangle excess = {worst:.2e}")
    assert worst <= 1e-8


def test_refined_distance_is_symmetric(three_atoms, rng):
    c1, c2 = dm_class(three_atoms), dm_class(_random_measure(rng))
    up, down = dm_distance(c1, c2, refine=True), dm_distance(c2, c1, refine=True)
    print(f"[INFO] refined distance = {up:.6f}")
    assert up == down
    assert up >= dm_distance(c1, c2)
    assert dm_distance(c1, c1, refine=True) == 0.0
