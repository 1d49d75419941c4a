import numpy as np
import pytest

from ratlimits.core import catalog
from ratlimits.core.ratmap import (
    Hole,
    ProjectiveRatMap,
    ReducedForm,
    compose,
    compose_reduced,
    conjugate,
    count_preimages_near,
    critical_points,
    exceptional_set,
    git_classify,
    iterate,
    local_degree,
    moebius_as_map,
    predicted_preimage_count,
    preimages,
    projective_distance,
    reduce,
    resultant_vanishes,
)
from ratlimits.core.moebius import MoebiusMap
from ratlimits.core.sphere import SpherePoint, chordal_distance
from ratlimits.errors import InconclusiveK, Indeterminate, RankAmbiguity


def _holes(red):
    return sorted((repr(h.point), h.depth) for h in red.holes)


@pytest.mark.parametrize("backend", ["float", "exact"])
def test_reduce_hole_at_zero(make_map, backend):
    f = make_map([0, 0, 1], [0, 1, 0], backend)          # [z² : zw]
    red = reduce(f)
    print(f"[INFO] {backend}: holes={_holes(red)}, reduction degree={red.reduction_degree}")
    assert red.is_degenerate
    assert red.reduction_degree == 1
    assert red.depth_at(SpherePoint.from_complex(0), 1e-6) == 1
    assert chordal_distance(red.apply_reduction(SpherePoint.from_complex(3)), SpherePoint.from_complex(3)) < 1e-9


@pytest.mark.parametrize("backend", ["float", "exact"])
def test_reduce_hole_at_infinity(make_map, backend):
    f = make_map([0, 1, 0], [1, 0, 0], backend)          # [zw : w²]
    red = reduce(f)
    assert red.depth_at(SpherePoint.infinity()) == 1
    assert red.hole_mass + red.reduction_degree == 2


def test_exact_reduce_multiplicity(make_map):
    red = reduce(make_map([0, 0, 0, 0, 1], [0, 0, 0, 1, 0], "exact"))   # [z⁴ : z³w]
    assert len(red.holes) == 1
    assert red.depth_at(SpherePoint.from_complex(0)) == 3
    assert red.reduction_degree == 1
    assert red.confidence == "exact"


def test_nondegenerate_map_has_no_holes(make_map):
    red = reduce(make_map([1, 0, 1], [1, 0, 0]))
    assert not red.is_degenerate
    assert red.reduction_degree == 2
    assert not resultant_vanishes(make_map([1, 0, 1], [1, 0, 0]))
    assert resultant_vanishes(make_map([0, 0, 1], [0, 1, 0]))


def test_compose_and_iterate_values(make_map):
    sq = ProjectiveRatMap.polynomial([0, 0, 1])
    shift = ProjectiveRatMap.polynomial([1, 1])
    h = compose(sq, shift)
    assert h.degree == 2
    assert h.evaluate(SpherePoint.from_complex(2)).to_complex() == pytest.approx(9)
    it = iterate(sq, 3)
    assert it.degree == 8
    assert it.evaluate(SpherePoint.from_complex(2)).to_complex() == pytest.approx(256)


def test_exact_composition_stays_exact(make_map):
    f = make_map([1, 0, 1], [1, 0, 0], "exact")
    h = iterate(f, 2)
    assert h.backend == "exact"
    # (z²+1)²+1 at z = 1 is 5
    assert h.evaluate(SpherePoint.from_complex(1)).to_complex() == pytest.approx(5)


def test_composition_in_the_indeterminacy_locus(make_map):
    outer = make_map([0, 0, 1], [0, 1, 0])               # hole at 0
    inner = ProjectiveRatMap(0, [0], [1])                # constant 0
    with pytest.raises(Indeterminate):
        compose(outer, inner)
    with pytest.raises(Indeterminate):
        compose_reduced(reduce(outer), reduce(inner))


def test_depth_law_against_direct_reduction(make_map):
    outer = make_map([0, 0, 1], [0, 1, 0])
    inner = ProjectiveRatMap.polynomial([0, 0, 1])
    law = compose_reduced(reduce(outer), reduce(inner))
    direct = reduce(compose(outer, inner))
    print(f"[INFO] law={_holes(law)} direct={_holes(direct)}")
    assert law.depth_at(SpherePoint.from_complex(0), 1e-6) == 2
    assert direct.depth_at(SpherePoint.from_complex(0), 1e-6) == 2
    assert law.reduction_degree == direct.reduction_degree == 2


def test_inconsistent_depths_are_refused(pt):
    inner = reduce(ProjectiveRatMap.polynomial([0, 0, 1]))
    broken = ReducedForm(2, ProjectiveRatMap(1, [0, 1], [1, 0]), (Hole(pt(1), 2),))
    with pytest.raises(RankAmbiguity) as info:
        compose_reduced(broken, inner)
    print(f"[INFO] {info.value.to_report()}")
    assert info.value.details["degree"] == 4
    assert info.value.details["hole_mass"] + info.value.details["reduction_degree"] != 4


def test_depth_law_on_random_exact_pairs(cfg, rng):
    checked = 0
    for _ in range(60):
        f = catalog.random_degenerate_map(rng, int(rng.integers(1, 5)))
        g = catalog.random_degenerate_map(rng, int(rng.integers(1, 5)))
        try:
            law = compose_reduced(reduce(f, cfg), reduce(g, cfg), cfg)
            direct = reduce(compose(f, g, cfg), cfg)
        except Indeterminate:
            continue
        checked += 1
        assert direct.hole_mass == law.hole_mass
        for h in direct.holes:
            assert law.depth_at(h.point, cfg.tau_root_merge) == h.depth
    print(f"[INFO] checked {checked} random pairs")
    assert checked >= 5


@pytest.mark.parametrize("degree", [1, 2, 3, 4])
def test_random_degenerate_maps_have_the_requested_holes(cfg, rng, degree):
    for holes in range(1, degree + 1):
        for _ in range(15):
            f = catalog.random_degenerate_map(rng, degree, holes)
            assert f.degree == degree
            assert f.backend == "exact"
            assert reduce(f, cfg).hole_mass == holes


def test_unbalanced_coefficients_keep_the_sylvester_rank(make_map, cfg):
    for k in (2, 4, 6, 8, 10):
        f = make_map([10.0 ** k, 0, 1], [1, 0, 0])       # z² + 10^k
        red = reduce(f, cfg)
        assert red.holes == ()
        assert red.reduction_degree == 2
        if k <= 6:
            twice = reduce(compose(f, f, cfg), cfg)
            print(f"[INFO] k={k}: second iterate keeps {twice.reduction_degree} of degree 4")
            assert twice.holes == ()


def test_unbalanced_coefficients_with_a_hole(make_map, cfg):
    big = 10.0 ** 6
    f = make_map([0, big, 1], [0, 1, 0])          # z(z + 10^6) / zw
    red = reduce(f, cfg)
    assert red.hole_mass == 1
    assert red.depth_at(SpherePoint.from_complex(0), 1e-6) == 1


def test_preimages_and_local_degree():
    sq = ProjectiveRatMap.polynomial([0, 0, 1])
    pre = preimages(sq, SpherePoint.from_complex(4))
    values = sorted(p.to_complex().real for p, _ in pre)
    assert values == pytest.approx([-2, 2])
    assert [m for _, m in preimages(sq, SpherePoint.from_complex(0))] == [2]
    assert local_degree(sq, SpherePoint.from_complex(0)) == 2
    assert local_degree(sq, SpherePoint.from_complex(1)) == 1


def test_critical_points_add_up(rng):
    for d in (2, 3, 4):
        f = catalog.random_map(rng, d)
        total = sum(m for _, m in critical_points(f))
        print(f"[INFO] degree {d}: critical multiplicity {total}")
        assert total == 2 * d - 2


def test_exceptional_set_of_square():
    ex = exceptional_set(ProjectiveRatMap.polynomial([0, 0, 1]))
    assert len(ex) == 2
    assert any(p.is_infinity for p in ex)
    assert any(chordal_distance(p, SpherePoint.from_complex(0)) < 1e-9 for p in ex)


@pytest.mark.parametrize(
    "w, z0, expected",
    [
        (0, 0, 2),      # hole and the reduction both hit
        (0, 5, 1),      # only the hole
        (3, 3, 1),      # only the reduction
        (3, 7, 0),
    ],
)
def test_predicted_preimage_counts(make_map, w, z0, expected):
    g = reduce(make_map([0, 0, 1], [0, 1, 0]))           # hole 0, reduction z
    got = predicted_preimage_count(g, SpherePoint.from_complex(w), SpherePoint.from_complex(z0))
    assert got == expected


@pytest.mark.parametrize(
    "num, den, expected",
    [
        ([0, 0, 0, 0, 1], [0, 0, 0, 1, 0], "unstable"),     # [z⁴ : z³w]
        ([1, 0, 1], [1, 0, 0], "stable"),                   # z² + 1
        ([0, 0, 1], [0, 1, 0], "unstable"),                 # [z² : zw]
        ([0, 1, 0], [1, 0, 0], "unstable"),                 # [zw : w²], hole fixed by the identity
        ([0, 0, 1, 0], [0, 0, 0, 1], "semistable-only"),    # z²·[w : z], depth 2 sent to ∞
    ],
)
def test_git_classification(make_map, num, den, expected):
    got = git_classify(make_map(num, den, "exact"))
    print(f"[INFO] git({num}, {den}) = {got}")
    assert got == expected


def test_float_and_exact_backends_convert(make_map):
    f = make_map([1, 0, 1], [1, 0, 0], "exact")
    g = f.to_float()
    assert g.backend == "float"
    assert np.allclose(g.coefficient_vector(), [1, 0, 1, 1, 0, 0])
    assert g.to_exact().backend == "exact"


def test_conjugation_and_moebius_maps(pt):
    double = MoebiusMap.from_matrix(np.array([[2, 0], [0, 1]], dtype=complex))
    assert moebius_as_map(double).evaluate(pt(3)).to_complex() == pytest.approx(6)
    half_square = conjugate(ProjectiveRatMap.polynomial([0, 0, 1]), double)    # z²/2
    assert half_square.evaluate(pt(2)).to_complex() == pytest.approx(2)


def test_projective_distance(make_map):
    f = make_map([1, 0, 1], [1, 0, 0])
    assert projective_distance(f, make_map([3, 0, 3], [3, 0, 0])) < 1e-12
    assert projective_distance(f, make_map([0, 0, 1], [1, 0, 0])) > 0.1
    with pytest.raises(ValueError):
        projective_distance(f, make_map([0, 1], [1, 0]))


def test_counting_preimages_near_a_hole(make_map, pt):
    # z²/(z + ε) → [z² : zw]: one preimage of a small value stays near the hole at 0
    maps = [make_map([0, 0, 1], [eps, 1, 0]) for eps in (1e-2, 1e-4, 1e-6, 1e-8)]
    g = make_map([0, 0, 1], [0, 1, 0])
    res = count_preimages_near(maps, g, pt(1e-3), pt(0), 5e-5)
    print(f"[INFO] predicted={res.predicted} counts={res.counts}")
    assert res.predicted == 1
    assert res.counts == (0, 0, 1, 1)
    assert res.threshold_index == 2
    with pytest.raises(InconclusiveK):
        count_preimages_near(maps[:1], g, pt(1e-3), pt(0), 5e-5)
