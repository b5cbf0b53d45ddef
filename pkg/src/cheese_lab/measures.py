"""Boundary measures on truncated cheeses and the checks built on them.

``mu_n(f) = contour integral over dK_n of f(z) exp(-rho2 (z+lam)/(z-lam)) dz``.
Applied to ``F_rho2 * g`` the weight cancels and Cauchy's theorem gives 0; applied
to ``F_rho1`` it leaves ``(z-lam) exp(c (z+lam)/(z-lam))``, ``c = rho1 - rho2``, whose
only singularity inside ``K_n`` is at ``lam`` with residue ``2 c^2 lam^2 e^c``.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .builder import CheesePlan, budget_sum
from .functions import BaseFunction, MeasureWeight, RationalFunction, SingularGenerator
from .geometry import BoundaryArc, Contour, arc_integral, boundary_arcs, winding_number
from .quadrature import (DEFAULT_MAX_PANELS, QuadratureResult,
                         adaptive_integrate, fsum_complex)

DEFAULT_TOL = 1e-10
DEFAULT_PASS_RTOL = 1e-8


class ConfigurationError(ValueError):
    """A check was requested outside its preconditions."""


class CertificationError(RuntimeError):
    """The contour failed winding-number certification."""


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("CHEESE_LAB_THREADS", "1")))
    except ValueError:
        return 1


def seed_panels(f: BaseFunction, arc: BoundaryArc) -> int:
    """``max(4, ceil(L (1 + 2 rho / s^2) / 2 pi))`` from the exponent derivative ``2 rho/(z - lam)^2``."""
    n = 4
    length = arc.length
    for lam, rho in f.exponent_strength().items():
        if rho <= 0:
            continue
        s = max(arc.distance_to(lam), 1e-300)
        n = max(n, math.ceil(min(length * (1 + 2 * rho / s ** 2) / (2 * math.pi), 2.0 ** 16)))
    n = max(n, math.ceil(length / (2 * math.pi)))
    return int(min(n, DEFAULT_MAX_PANELS))


def integrate_arc(f: BaseFunction, arc: BoundaryArc, tol: float = DEFAULT_TOL,
                  max_panels: int = DEFAULT_MAX_PANELS) -> QuadratureResult:
    return arc_integral(f, arc, tol, initial_panels=seed_panels(f, arc), max_panels=max_panels)


def contour_integral(f: BaseFunction, c: Contour, tol: float = DEFAULT_TOL) -> QuadratureResult:
    threads = thread_count()
    if threads > 1 and len(c.arcs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda a: integrate_arc(f, a, tol), c.arcs))
    else:
        parts = [integrate_arc(f, a, tol) for a in c.arcs]
    return QuadratureResult(fsum_complex(p.value for p in parts),
                            math.fsum(p.error_estimate for p in parts),
                            sum(p.panels for p in parts))


@dataclass(frozen=True)
class WeightedBoundaryMeasure:
    contour: Contour
    rho2: float
    lam: complex = 1.0
    tol: float = DEFAULT_TOL

    @classmethod
    def certified(cls, contour: Contour, rho2: float, lam: complex = 1.0,
                  tol: float = DEFAULT_TOL) -> "WeightedBoundaryMeasure":
        """Build the measure after checking that ``lam`` has winding number 1."""
        certify_point(contour, lam)
        return cls(contour, rho2, complex(lam), tol)

    @property
    def weight(self) -> MeasureWeight:
        return MeasureWeight(self.rho2, self.lam)


def certify_point(contour: Contour, w: complex, expected: int = 1) -> None:
    try:
        k = winding_number(contour, w)
    except Exception as exc:  # on-boundary or non-integer winding
        raise CertificationError(f"winding certification about {w} failed: {exc}") from exc
    if k != expected:
        raise CertificationError(f"winding number about {w} is {k}, expected {expected}")


def truncated_contour(plan: CheesePlan, n: int) -> Contour:
    outer, holes = plan.truncated(n)
    return boundary_arcs(outer, holes)


def mu_apply(mu: WeightedBoundaryMeasure, f: BaseFunction) -> QuadratureResult:
    return contour_integral(f * mu.weight, mu.contour, mu.tol)


def total_variation(mu: WeightedBoundaryMeasure) -> QuadratureResult:
    """``integral of |weight| |dz|`` over the contour, with ``|weight| = exp(-rho (|z|^2-1)/|z-lam|^2)``."""
    w = mu.weight
    parts = []
    for arc in mu.contour.arcs:
        c, r = arc.circle.center, arc.circle.radius

        def integrand(theta, c=c, r=r):
            return w.modulus(c + r * np.exp(1j * theta)) * r

        parts.append(adaptive_integrate(integrand, arc.interval.theta_start, arc.interval.theta_end,
                                        tol=mu.tol, length_scale=r,
                                        initial_panels=seed_panels(w, arc)))
    return QuadratureResult(complex(math.fsum(p.value.real for p in parts)),
                            math.fsum(p.error_estimate for p in parts),
                            sum(p.panels for p in parts))


def tv_bound(plan: CheesePlan, n: int, rho2: float) -> float:
    """``2 pi (M_n + 2)`` with ``M_n`` the budget sum over the first ``n`` holes."""
    return 2 * math.pi * (budget_sum(plan, rho2, n) + 2)


def contour_samples(c: Contour, per_arc: int = 257) -> np.ndarray:
    return np.concatenate([a.circle.point(np.linspace(a.interval.theta_start, a.interval.theta_end,
                                                      per_arc)) for a in c.arcs])


def poles_off_region(g: RationalFunction, plan: CheesePlan, n: int) -> bool:
    """True iff every pole is strictly inside one of the first ``n`` holes or strictly
    outside the closed disc of radius ``1 + 1/n``."""
    outer, holes = plan.truncated(n)
    for p in g.pole_points:
        if abs(p - outer.center) > outer.radius:
            continue
        if any(abs(p - h.center) < h.radius for h in holes):
            continue
        return False
    return True


@dataclass(frozen=True)
class CheckResult:
    name: str
    observed: complex
    expected: complex
    residual: float
    tolerance: float
    passed: bool
    detail: str = ""


def annihilation_test(plan: CheesePlan, n: int, rho2: float, g: RationalFunction,
                      tol: float = DEFAULT_PASS_RTOL, quad_tol: float = DEFAULT_TOL,
                      lam: complex | None = None) -> CheckResult:
    """``|mu_n(F_rho2 g)|`` against ``tol * (1 + TV * sup |integrand|)``."""
    if not poles_off_region(g, plan, n):
        raise ConfigurationError(f"{g!r} has a pole on K_{n}")
    lam = plan.target_point() if lam is None else complex(lam)
    contour = truncated_contour(plan, n)
    mu = WeightedBoundaryMeasure.certified(contour, rho2, lam, quad_tol)
    f = SingularGenerator(rho2, lam) * g
    val = mu_apply(mu, f).value
    tv = total_variation(mu).value.real
    pts = contour_samples(contour)
    sup = float(np.max(np.abs((f * mu.weight)(pts))))
    thresh = tol * (1 + tv * sup)
    return CheckResult("annihilation", val, 0j, abs(val), thresh, abs(val) < thresh,
                       f"tv={tv:.6g} sup={sup:.6g}")


def separation_value(c: float, lam: complex = 1.0) -> complex:
    """``4 pi i c^2 lam^2 e^c``: the contour integral of ``(z-lam) exp(c (z+lam)/(z-lam))``."""
    return 4j * math.pi * c * c * complex(lam) ** 2 * math.exp(c)


def separation_test(plan: CheesePlan, n: int, rho1: float, rho2: float,
                    tol: float = DEFAULT_PASS_RTOL, quad_tol: float = DEFAULT_TOL,
                    lam: complex | None = None) -> CheckResult:
    if not (0 <= rho1 < rho2):
        raise ConfigurationError(f"need 0 <= rho1 < rho2, got ({rho1}, {rho2})")
    lam = plan.target_point() if lam is None else complex(lam)
    contour = truncated_contour(plan, n)
    mu = WeightedBoundaryMeasure.certified(contour, rho2, lam, quad_tol)
    val = mu_apply(mu, SingularGenerator(rho1, lam)).value
    expected = separation_value(rho1 - rho2, lam)
    rel = abs(val - expected) / abs(expected)
    return CheckResult("separation", val, expected, rel, tol, rel < tol, f"n={n}")


def residue_series_oracle(c: float, max_terms: int = 500) -> complex:
    """Residue at 1 of ``(z-1) exp(c (z+1)/(z-1))`` from truncated power series.

    With ``u = 1/(z-1)`` the function is ``e^c exp(2 c u) / u``; the residue is the
    ``u^2`` coefficient of ``e^c exp(2 c u)``.  Both ``e^c`` and the coefficients are
    summed term by term until the terms stop changing the partial sums.
    """
    ec, term = 0.0, 1.0
    for k in range(1, max_terms):
        new = ec + term
        if new == ec:
            break
        ec = new
        term *= c / k
    coeffs = []
    term = 1.0
    for k in range(max_terms):
        coeffs.append(term)
        if k > 2 and abs(term) <= np.finfo(float).eps * max(abs(x) for x in coeffs):
            break
        term *= 2 * c / (k + 1)
    return complex(ec * coeffs[2])


@dataclass(frozen=True)
class DeformationResult:
    values: dict[int, complex]
    max_relative_spread: float
    tolerance: float
    passed: bool


def deformation_check(plan: CheesePlan, truncations: Sequence[int], rho1: float, rho2: float,
                      tol: float = DEFAULT_PASS_RTOL, quad_tol: float = DEFAULT_TOL,
                      lam: complex | None = None) -> DeformationResult:
    values = {}
    for n in truncations:
        values[n] = separation_test(plan, n, rho1, rho2, tol, quad_tol, lam).observed
    spread = 0.0
    for a, b in combinations(values.values(), 2):
        spread = max(spread, abs(a - b) / max(abs(a), abs(b)))
    return DeformationResult(values, spread, tol, spread < tol)
