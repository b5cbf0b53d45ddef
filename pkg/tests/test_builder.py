import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cheese_lab.builder import (BOUNDARY, GRID, MCKISSICK, NEAR_TARGET, CheesePlan, LabeledHole,
                                PlacementError, annulus_distance, build_plan, cover_family,
                                epsilon_budget, excluded_band_length, lambda_arcs,
                                place_mckissick_family, verify_budgets, CoverDisc)
from cheese_lab.geometry import TWO_PI, Disc, distance_to_point


def test_thm14_cover_starts_with_near_target_discs():
    covers = cover_family("thm14", 3, 1.0)
    assert [(c.disc.center, c.disc.radius, c.kind) for c in covers] == [
        (1, 1.0, NEAR_TARGET), (1, 0.5, NEAR_TARGET), (1, 1 / 3, NEAR_TARGET)]


def test_thm14_only_near_target_discs_contain_one():
    for c in cover_family("thm14", 40, 1.0):
        if c.kind != NEAR_TARGET:
            assert abs(c.disc.center - 1) > c.disc.radius


@pytest.mark.parametrize("N", [1, 7, 30])
def test_thm15_covers_boundary_centred_or_inside(N):
    for c in cover_family("thm15", N, 1.0):
        a, r = c.disc.center, c.disc.radius
        assert abs(abs(a) - 1) < 1e-15 or abs(a) + r <= 1


def test_covers_shrink_and_cover_the_disc():
    covers = cover_family("thm14", 400, 1.0)
    rng = np.random.default_rng(0)
    z = np.sqrt(rng.random(2000)) * np.exp(2j * np.pi * rng.random(2000))
    hit = np.zeros(z.shape, bool)
    for c in covers:
        hit |= np.abs(z - c.disc.center) < c.disc.radius
    assert hit.all()


@pytest.mark.parametrize("n,r,delta,expected", [
    (3, 1.0, 0.5, 0.125 * math.exp(-6)),
    (1, 1.0, 1e300, 0.25),
    (2, 0.1, 1.0, 0.0125),
])
def test_epsilon_budget(n, r, delta, expected):
    assert epsilon_budget(n, r, delta) == pytest.approx(expected, rel=1e-15)


def test_epsilon_budget_example_value():
    assert epsilon_budget(3, 1.0, 0.5) == pytest.approx(3.0984e-4, rel=1e-4)


def test_annulus_distance_examples():
    assert annulus_distance(0, 0.5, 0.25, 1) == pytest.approx(0.5)
    assert annulus_distance(1, 1, 0.5, 1) == pytest.approx(0.5)
    d = annulus_distance(0.5j, 0.2, 0.1, 1)
    assert d == pytest.approx(math.sqrt(1.25) - 0.2, abs=1e-15)
    assert d == pytest.approx(0.918034, abs=1e-6)


def test_annulus_distance_by_sampling():
    rr, th = np.meshgrid(np.linspace(0.1, 0.2, 401), np.linspace(0, TWO_PI, 4001))
    z = 0.5j + rr * np.exp(1j * th)
    assert np.min(np.abs(z - 1)) == pytest.approx(annulus_distance(0.5j, 0.2, 0.1, 1), abs=1e-6)


def test_annulus_touching_target_rejected():
    with pytest.raises(PlacementError):
        annulus_distance(0, 1.0, 0.5, 0.75)


def test_mckissick_example():
    discs = place_mckissick_family(0, 1.0, 0.1, 5)
    assert len(discs) == 5
    for d in discs:
        assert d.radius == pytest.approx(0.01)
        assert abs(d.center) == pytest.approx(0.95)
        assert 0.9 < abs(d.center) - d.radius and abs(d.center) + d.radius < 1
    assert math.fsum(d.radius for d in discs) == pytest.approx(0.05)


def test_mckissick_rejects_single_disc():
    with pytest.raises(PlacementError):
        place_mckissick_family(0, 1.0, 0.1, 1)


@given(st.floats(0.05, 1), st.floats(1e-6, 0.49), st.integers(2, 40), st.floats(0, TWO_PI))
def test_mckissick_discs_inside_shell(radius, frac, m, phase):
    eps = frac * radius
    discs = place_mckissick_family(0.3 - 0.2j, radius, eps, m, phase)
    for d in discs:
        dist = abs(d.center - (0.3 - 0.2j))
        assert radius - eps < dist - d.radius + 1e-15
        assert dist + d.radius < radius + 1e-15
    assert math.fsum(d.radius for d in discs) < eps


def test_lambda_single_band_closed_form_and_monte_carlo():
    cover = [CoverDisc(1, Disc(1, 0.5), BOUNDARY)]
    lam = lambda_arcs({1: 0.1}, cover)
    expected = 4 * (math.asin(0.3) - math.asin(0.2))
    assert lam.excluded_length == pytest.approx(expected, rel=1e-14)
    # the quoted decimal 0.413341 is rounded loosely; the closed form gives 0.4133389
    assert expected == pytest.approx(0.413341, abs=5e-6)
    th = np.random.default_rng(0).uniform(0, TWO_PI, 200_000)
    excluded = np.abs(np.abs(np.exp(1j * th) - 1) - 0.5) < 0.1
    assert TWO_PI * excluded.mean() == pytest.approx(expected, abs=5e-3)
    assert excluded_band_length(0.5, 0.1) == pytest.approx(expected)


def test_lambda_bands_add_when_disjoint():
    covers = [CoverDisc(1, Disc(1, 0.3), BOUNDARY), CoverDisc(2, Disc(-1, 0.3), BOUNDARY)]
    lam = lambda_arcs({1: 0.05, 2: 0.05}, covers)
    assert lam.excluded_length == pytest.approx(2 * excluded_band_length(0.3, 0.05))


def test_lambda_rejects_zero_gamma():
    with pytest.raises(ValueError):
        lambda_arcs({1: 0.0}, [CoverDisc(1, Disc(1, 0.5), BOUNDARY)])


def test_build_thm14_small():
    plan = build_plan("thm14", 5, 1.0, 4)
    assert plan.radius_sum < 1
    assert all(distance_to_point(h, 1) > 0 for h in plan.hole_discs)


def test_build_thm15_lambda_length():
    plan = build_plan("thm15", 5, 0.5, 4)
    assert plan.lambda_set.excluded_length < 0.5
    assert TWO_PI - plan.lambda_set.length == pytest.approx(plan.lambda_set.excluded_length, abs=1e-12)


@pytest.mark.parametrize("mode", ["thm14", "thm15"])
def test_build_is_deterministic(mode):
    a = build_plan(mode, 10, 1.0, 3, seed=5)
    b = build_plan(mode, 10, 1.0, 3, seed=5)
    assert a.holes == b.holes and a.families == b.families


def test_plan_invariants(plan14, plan15):
    for plan in (plan14, plan15):
        assert plan.radius_sum < plan.r
        assert all(plan.target_distance(h) > 0 for h in plan.hole_discs)
        for fam in plan.families:
            if fam.status != "placed" or fam.family_type != MCKISSICK:
                continue
            for h in plan.holes:
                if h.family_type == MCKISSICK and h.family_index == fam.index:
                    dist = abs(h.disc.center - fam.center)
                    slack = 8 * math.ulp(abs(fam.center) + fam.radius)
                    assert fam.radius - fam.placed_eps < dist - h.disc.radius + slack
                    assert dist + h.disc.radius < fam.radius + slack
    assert len(plan14.holes) >= 30


def test_lambda_points_avoid_holes(plan15):
    pts = plan15.lambda_set.points(per_arc=200)
    for h in plan15.hole_discs:
        assert np.all(np.abs(pts - h.center) > h.radius)
        assert plan15.lambda_set.distance_to_disc(h) > 0


@pytest.mark.parametrize("nu", [0, 1, 3])
def test_budgets_pass_on_built_plans(plan14, plan15, nu):
    for plan in (plan14, plan15):
        rep = verify_budgets(plan, nu)
        assert rep.ok, rep.violations
        assert all(r.margin > 0 for r in rep.rows)


def test_budget_nu_zero_is_radius_sum(plan14):
    rep = verify_budgets(plan14, 0)
    for row in rep.rows:
        if row.check == "weighted":
            discs = [h.disc for h in plan14.holes
                     if h.family_type == row.family_type and h.family_index == row.index]
            assert row.value == pytest.approx(math.fsum(d.radius for d in discs), rel=1e-15)


def test_oversized_disc_named_in_violation(plan14):
    bad = CheesePlan(**{**plan14.__dict__,
                        "holes": plan14.holes + [LabeledHole(Disc(-0.5, 2.0), MCKISSICK, 99, 1)]})
    rep = verify_budgets(bad, 1)
    assert not rep.ok
    assert any(r.check == "radius-sum" for r in rep.violations)


def test_second_wave_families_follow_grid_covers(plan14):
    grid = [c for c in plan14.covers if c.kind == GRID]
    second = [f for f in plan14.families if f.family_type != MCKISSICK]
    assert len(second) == len(grid)
    assert [f.center for f in second] == [c.disc.center for c in grid]
