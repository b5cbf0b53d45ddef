import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cheese_lab.builder import CheesePlan, LabeledHole, MCKISSICK
from cheese_lab.functions import Constant, RationalFunction, SingularGenerator, Z
from cheese_lab.geometry import AngularInterval, BoundaryArc, Disc, boundary_arcs
from cheese_lab.measures import (CertificationError, ConfigurationError, WeightedBoundaryMeasure,
                                 annihilation_test, contour_integral, deformation_check,
                                 integrate_arc, mu_apply, residue_series_oracle, separation_test,
                                 separation_value, total_variation, truncated_contour, tv_bound)

ANNULUS = boundary_arcs(Disc(0, 1.5), [Disc(0, 0.5)])
UNIT = BoundaryArc(Disc(0, 1), AngularInterval(0, 2 * math.pi), 1)


def test_integrate_arc_examples():
    assert integrate_arc(RationalFunction.from_points([], [0]), UNIT).value == pytest.approx(2j * math.pi, abs=1e-12)
    assert abs(integrate_arc(Z * Z, UNIT).value) < 1e-12
    half = BoundaryArc(Disc(0, 1), AngularInterval(0, math.pi), 1)
    assert integrate_arc(Constant(1.0), half).value == pytest.approx(-2, abs=1e-12)


def test_clockwise_arc_negates():
    cw = BoundaryArc(Disc(0, 1), AngularInterval(0, 2 * math.pi), -1)
    assert integrate_arc(RationalFunction.from_points([], [0]), cw).value == pytest.approx(-2j * math.pi)


def test_contour_integral_examples():
    assert abs(contour_integral(Constant(1.0), ANNULUS).value) < 1e-12
    assert contour_integral(RationalFunction.from_points([], [1.0]), ANNULUS).value == pytest.approx(2j * math.pi)
    assert abs(contour_integral(RationalFunction.from_points([], [0.1j]), ANNULUS).value) < 1e-12


def test_mu_apply_zero_and_linearity():
    mu = WeightedBoundaryMeasure.certified(ANNULUS, 1.0)
    assert mu_apply(mu, Constant(0.0)).value == 0
    f, g = Z * Z, RationalFunction.from_points([], [0.2])
    a, b = 0.3 - 1j, 2.0
    lhs = mu_apply(mu, a * f + b * g).value
    rhs = a * mu_apply(mu, f).value + b * mu_apply(mu, g).value
    assert abs(lhs - rhs) < 2 * mu.tol * 10


def test_mu_annihilates_generator_times_rational():
    mu = WeightedBoundaryMeasure.certified(ANNULUS, 1.5)
    g = RationalFunction.from_points([0.3], [0.1 + 0.2j])
    assert abs(mu_apply(mu, SingularGenerator(1.5) * g).value) < 1e-10


def test_total_variation_unweighted_annulus():
    mu = WeightedBoundaryMeasure(ANNULUS, 0.0)
    assert total_variation(mu).value.real == pytest.approx(4 * math.pi, rel=1e-13)


def test_total_variation_dominates_functionals():
    mu = WeightedBoundaryMeasure.certified(ANNULUS, 0.7)
    tv = total_variation(mu).value.real
    for f in (Z, Z * Z - 0.5, RationalFunction.from_points([], [0.0])):
        pts = np.concatenate([a.circle.point(np.linspace(0, 2 * math.pi, 4001)) for a in ANNULUS.arcs])
        sup = np.max(np.abs(f(pts)))
        assert abs(mu_apply(mu, f).value) <= tv * sup * (1 + 1e-9)


def test_annihilation_examples(plan14):
    hole = next(d for d in plan14.hole_discs[:10] if d.radius > 1e-4)
    res = annihilation_test(plan14, 10, 1.0, RationalFunction.from_points([], [hole.center]))
    assert res.passed
    assert annihilation_test(plan14, 10, 1.0, RationalFunction()).passed
    with pytest.raises(ConfigurationError):
        annihilation_test(plan14, 10, 1.0, RationalFunction.from_points([], [0.0]))


def test_hole_pole_cancellation_by_hand():
    # outer and hole contributions are 2 pi i (p - 1) with opposite signs
    p = 0.0
    g = RationalFunction.from_points([], [p])
    outer = BoundaryArc(Disc(0, 1.5), AngularInterval(0, 2 * math.pi), 1)
    hole = BoundaryArc(Disc(0, 0.5), AngularInterval(0, 2 * math.pi), -1)
    f = g * (Z - 1)
    assert integrate_arc(f, outer).value == pytest.approx(2j * math.pi * (p - 1))
    assert integrate_arc(f, hole).value == pytest.approx(-2j * math.pi * (p - 1))


@pytest.mark.parametrize("rho1,rho2,expected", [
    (0.0, 1.0, 4j * math.pi * math.exp(-1)),
    (1.0, 2.0, 4j * math.pi * math.exp(-1)),
    (0.5, 2.5, 16j * math.pi * math.exp(-2)),
])
def test_separation_values(plan14, rho1, rho2, expected):
    res = separation_test(plan14, 10, rho1, rho2)
    assert res.passed
    assert abs(res.observed - expected) / abs(expected) < 1e-8


def test_separation_example_value():
    assert separation_value(-1.0).imag == pytest.approx(4.622909, abs=1e-6)


def test_separation_rejects_equal_rhos(plan14):
    with pytest.raises(ConfigurationError):
        separation_test(plan14, 10, 1.0, 1.0)


def test_oracle_examples():
    assert residue_series_oracle(-1.0).real == pytest.approx(2 * math.exp(-1), rel=1e-15)
    assert residue_series_oracle(0.0) == 0
    for c in (-0.25, -1.0, -2.0, -3.5):
        assert 2j * math.pi * residue_series_oracle(c) == pytest.approx(separation_value(c), rel=1e-13)


def test_deformation(plan14):
    assert deformation_check(plan14, [5, 10, 20], 0.0, 1.0).passed
    assert deformation_check(plan14, [7], 0.5, 2.5).max_relative_spread == 0


def test_hole_over_one_aborts(plan14):
    bad = CheesePlan(**{**plan14.__dict__,
                        "holes": [LabeledHole(Disc(1.0, 0.01), MCKISSICK, 0, 1)] + plan14.holes})
    with pytest.raises(CertificationError):
        separation_test(bad, 5, 0.0, 1.0)
    with pytest.raises(CertificationError):
        deformation_check(bad, [5, 10], 0.0, 1.0)


@pytest.mark.parametrize("rho2", [0.5, 1.0, 2.0])
def test_tv_bound_with_margin(plan14, plan15, rho2):
    for plan in (plan14, plan15):
        for n in (5, 10, 20):
            mu = WeightedBoundaryMeasure(truncated_contour(plan, n), rho2, plan.target_point())
            assert total_variation(mu).value.real < tv_bound(plan, n, rho2)


def test_thm15_separation_at_lambda_point(plan15):
    res = separation_test(plan15, 10, 0.0, 1.0)
    lam = plan15.target_point()
    assert res.expected == pytest.approx(4j * math.pi * math.exp(-1) * lam ** 2)
    assert res.passed


# ---------------------------------------------------------------- properties

@settings(max_examples=25)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
                min_size=1, max_size=7), st.sampled_from([5, 10, 20]))
def test_closed_contour_exact_for_polynomials(plan14, coeffs, n):
    c = truncated_contour(plan14, n)
    poly = Constant(0.0)
    for k, a in enumerate(coeffs):
        term = Constant(complex(a))
        for _ in range(k):
            term = term * Z
        poly = poly + term
    scale = max(1.0, max(abs(a) for a in coeffs))
    assert abs(contour_integral(poly, c, 1e-10).value) < 10 * 1e-10 * scale * c.length


@settings(max_examples=15)
@given(st.floats(0, 2), st.floats(0.05, 2))
def test_residue_consistency(plan14, rho1, gap):
    res = separation_test(plan14, 10, rho1, rho1 + gap)
    assert abs(res.observed - 2j * math.pi * residue_series_oracle(-gap)) <= 1e-8 * abs(res.observed)


def test_reflection_symmetry():
    holes = [Disc(0.3 + 0.4j, 0.1), Disc(0.3 - 0.4j, 0.1), Disc(-0.5, 0.2)]
    c = boundary_arcs(Disc(0, 1.1), holes)
    mirrored = boundary_arcs(Disc(0, 1.1), [Disc(h.center.conjugate(), h.radius) for h in holes[::-1]])
    f = SingularGenerator(0.4) * RationalFunction.from_points([0.1], [0.3 + 0.4j])
    fc = SingularGenerator(0.4) * RationalFunction.from_points([0.1], [0.3 - 0.4j])
    mu = WeightedBoundaryMeasure(c, 1.3)
    mu_m = WeightedBoundaryMeasure(mirrored, 1.3)
    v = mu_apply(mu, f).value
    # reflection reverses the orientation of dz, so the value maps to minus its conjugate
    assert mu_apply(mu_m, fc).value == pytest.approx(-v.conjugate(), abs=1e-12)
    # a symmetric region and real-symmetric integrand give a purely imaginary value
    sym = mu_apply(mu, SingularGenerator(0.4)).value
    assert abs(sym.real) < 1e-12
