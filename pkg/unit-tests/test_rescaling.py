from fractions import Fraction

import pytest
from mpmath import mpc

from ratlimits.core import catalog
from ratlimits.core.limits import CauchyCertificate
from ratlimits.core.measures import AtomicMeasure
from ratlimits.core.rescaling import (
    FamilySpec,
    TCoefficient,
    _decomposition_tolerance,
    depth_profile_limit,
    depth_ratio_stability,
    fully_ramified_times,
    geometric_schedule,
    iterate_limits,
    left_class_limits,
    limit_inverse_scalings,
    post_scaling_find,
    pullback_limit,
    sample_family,
    scalings_differ_by_convergent,
)
from ratlimits.core.sphere import SpherePoint
from ratlimits.errors import HypothesisUnmet, SpecializationDegenerate

INF = SpherePoint.infinity()


def test_geometric_schedule_is_exact():
    assert geometric_schedule("0.01", "0.1", 3) == (Fraction(1, 100), Fraction(1, 1000), Fraction(1, 10000))


def test_t_coefficients():
    c = TCoefficient.of({"num": [-1, -1], "den": [0, 1]})     # -(1 + t)/t
    assert complex(c.eval_mp(mpc(2))) == pytest.approx(-1.5)
    assert TCoefficient.of(3) == TCoefficient((3,), (1,))
    with pytest.raises(SpecializationDegenerate):
        c.eval_mp(mpc(0))


def test_sampling_the_family(pt):
    F = catalog.z2_plus_inverse_t()
    f = sample_family(F, Fraction(1, 100))
    assert f.evaluate(pt(0)).to_complex() == pytest.approx(100)
    assert sample_family(F, Fraction(1, 100), backend="exact").backend == "exact"


def test_degenerate_specialization_is_rejected():
    F = FamilySpec.build(2, [0, 0, {"num": [0, 1]}], [0, 1, 0], geometric_schedule("0.1", "0.1", 3))
    with pytest.raises(SpecializationDegenerate):
        sample_family(F, 0, backend="exact")


def test_short_schedules_are_refused(cfg):
    with pytest.raises(HypothesisUnmet):
        left_class_limits(catalog.z2_plus_inverse_t(count=2), 2, cfg)


def test_square_plus_large_constant_levels(z2_scheme):
    depths = [z2_scheme.phis[n].depth_at(INF, 1e-4) for n in range(1, 5)]
    print(f"[INFO] depths at infinity per level: {depths}")
    assert depths == [0, 2, 6, 14]
    assert fully_ramified_times(z2_scheme) == [(1, True), (2, False), (3, False), (4, False)]
    # A_1 = z - 1/t, so its inverses collapse onto ∞
    b = limit_inverse_scalings(z2_scheme, 1)
    assert b.degenerate and b.limit.hole.is_infinity


def test_decomposition_identity_holds_within_sample_error(z2_scheme, cfg):
    residuals = z2_scheme.decomposition_residuals
    tolerances = z2_scheme.decomposition_tolerances
    print(f"[INFO] decomposition residuals {residuals}, tolerances {tolerances}")
    assert sorted(residuals) == [2, 3, 4]
    for n, res in residuals.items():
        assert tolerances[n] >= cfg.tau_proj
        assert res <= tolerances[n]


def test_decomposition_tolerance_follows_the_certificates(cfg):
    tight = CauchyCertificate("a", (1e-12,), 0.0, 1e-12)
    loose = CauchyCertificate("b", (1e-3, 1e-4), 0.1, 1e-5)
    assert _decomposition_tolerance(16, (tight, tight, tight), cfg) == cfg.tau_proj
    assert _decomposition_tolerance(16, (tight, loose, tight), cfg) == pytest.approx(2 * 16 * (1e-4 + 2e-12))


def test_iterate_limits_collapse_to_infinity(z2_scheme):
    for limit in iterate_limits(z2_scheme):
        assert limit.reduced.depth_at(INF, 1e-4) == 2 ** limit.level
        assert limit.reduced.reduction.is_constant


def test_depth_profiles(z2_scheme, antipodal_scheme, pt):
    z2 = depth_profile_limit(z2_scheme)
    assert z2.measure.mass_near(INF, 1e-4) == pytest.approx(1.0, abs=1e-9)
    anti = depth_profile_limit(antipodal_scheme)
    print(f"[INFO] antipodal ratios: {anti.ratios}")
    assert anti.measure.mass_near(pt(1j), 1e-4) == pytest.approx(0.5, abs=1e-9)
    assert anti.measure.mass_near(pt(-1j), 1e-4) == pytest.approx(0.5, abs=1e-9)


def test_pullback_limit_small_growth(z2_scheme, pt):
    mu = AtomicMeasure.dirac(pt(0.3 + 0.2j))
    report = pullback_limit(z2_scheme.family, mu, 4, scheme=z2_scheme)
    print(f"[INFO] case={report.case} distance={report.distance_to_limit:.2e} ratios={report.degree_ratios}")
    assert report.case == "small-growth"
    assert report.degree_ratios == pytest.approx((1, 0.5, 0.25, 0.125))
    assert report.distance_to_limit < 1e-9
    assert report.limit.mass_near(INF, 1e-4) == pytest.approx(1.0, abs=1e-9)


def test_depth_ratio_stability_needs_fully_ramified_times(z2_scheme):
    with pytest.raises(HypothesisUnmet):
        depth_ratio_stability(z2_scheme, 0)


def test_post_scaling_of_square_plus_constant():
    F = catalog.z2_plus_inverse_t()
    maps = [sample_family(F, t) for t in F.schedule]
    ps = post_scaling_find(maps)
    assert ps.transition.reduced.reduction_degree == 2
    assert not ps.transition.reduced.is_degenerate
    same = scalings_differ_by_convergent(ps.scalings, ps.scalings)
    assert not same.degenerate
