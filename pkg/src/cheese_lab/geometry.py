"""Circle geometry for regions of the form "closed disc minus open discs".

Angles are radians measured counterclockwise from the positive real axis.
Boundary arcs never cross angle 0: an interval that would wrap is split in two.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .quadrature import adaptive_integrate, fsum_complex

TWO_PI = 2.0 * math.pi
TANGENCY_RTOL = 1e-12
ANGLE_TOL = 1e-12
WINDING_RESIDUAL_LIMIT = 0.25


class GeometryError(ValueError):
    pass


class OnBoundaryError(GeometryError):
    """The probe point is within tolerance of the contour."""


class WindingError(GeometryError):
    """A numerically computed winding number is not close to an integer."""


def _finite(z: complex) -> bool:
    return math.isfinite(z.real) and math.isfinite(z.imag)


@dataclass(frozen=True)
class Disc:
    center: complex
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not _finite(self.center):
            raise GeometryError(f"non-finite disc center {self.center}")
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise GeometryError(f"disc radius must be positive, got {self.radius}")

    def point(self, theta):
        return self.center + self.radius * np.exp(1j * np.asarray(theta))


def canonical_angle(theta: float) -> float:
    t = math.fmod(theta, TWO_PI)
    if t < 0:
        t += TWO_PI
    if t >= TWO_PI:
        t = 0.0
    return t


@dataclass(frozen=True)
class AngularInterval:
    """Counterclockwise interval ``[start, end]`` with ``0 < end - start <= 2*pi``.

    ``start`` is canonical in ``[0, 2*pi)``; ``end`` may exceed ``2*pi`` when the
    interval wraps through angle 0.
    """

    theta_start: float
    theta_end: float

    def __post_init__(self):
        span = self.theta_end - self.theta_start
        if not (0 < span <= TWO_PI + ANGLE_TOL):
            raise GeometryError(f"invalid angular span {span}")
        start = canonical_angle(self.theta_start)
        object.__setattr__(self, "theta_start", start)
        object.__setattr__(self, "theta_end", start + min(span, TWO_PI))

    @classmethod
    def from_span(cls, start: float, span: float) -> "AngularInterval":
        return cls(start, start + span)

    @property
    def span(self) -> float:
        return self.theta_end - self.theta_start

    @property
    def is_full(self) -> bool:
        return self.span >= TWO_PI - ANGLE_TOL

    def contains(self, theta: float) -> bool:
        t = canonical_angle(theta)
        if t < self.theta_start:
            t += TWO_PI
        return t <= self.theta_end

    def pieces(self) -> list[tuple[float, float]]:
        """Split into sub-intervals of ``[0, 2*pi]``."""
        if self.theta_end <= TWO_PI:
            return [(self.theta_start, self.theta_end)]
        return [(self.theta_start, TWO_PI), (0.0, self.theta_end - TWO_PI)]


@dataclass(frozen=True)
class CoveredInterval:
    """Result of :func:`covered_interval`: empty, full circle, or one interval."""

    interval: AngularInterval | None = None
    full: bool = False

    @property
    def empty(self) -> bool:
        return not self.full and self.interval is None

    def pieces(self) -> list[tuple[float, float]]:
        if self.full:
            return [(0.0, TWO_PI)]
        if self.interval is None:
            return []
        return self.interval.pieces()


@dataclass(frozen=True)
class BoundaryArc:
    circle: Disc
    interval: AngularInterval
    orientation: int  # +1 counterclockwise (outer), -1 clockwise (hole)

    def __post_init__(self):
        if self.orientation not in (1, -1):
            raise GeometryError("orientation must be +1 or -1")

    @property
    def length(self) -> float:
        return self.circle.radius * self.interval.span

    def endpoints(self) -> tuple[complex, complex]:
        c, r = self.circle.center, self.circle.radius
        return (c + r * cmath.exp(1j * self.interval.theta_start),
                c + r * cmath.exp(1j * self.interval.theta_end))

    def distance_to(self, w: complex) -> float:
        c, r = self.circle.center, self.circle.radius
        d = abs(w - c)
        if d == 0 or self.interval.contains(cmath.phase(w - c)):
            return abs(d - r)
        return min(abs(w - p) for p in self.endpoints())


@dataclass(frozen=True)
class Contour:
    arcs: tuple[BoundaryArc, ...]
    outer: Disc
    holes: tuple[Disc, ...] = field(default=())

    @property
    def length(self) -> float:
        return math.fsum(a.length for a in self.arcs)

    def distance_to(self, w: complex) -> float:
        return min((a.distance_to(w) for a in self.arcs), default=math.inf)


def distance_to_point(d: Disc, p: complex) -> float:
    return max(abs(d.center - p) - d.radius, 0.0)


def _tangent(dist: float, target: float, scale: float) -> bool:
    return abs(dist - target) < TANGENCY_RTOL * scale


def circle_intersection_angles(a: Disc, b: Disc) -> tuple[float, float] | None:
    """Angles on circle ``a`` where it meets circle ``b`` (``phi - alpha, phi + alpha``).

    Returns ``None`` for disjoint, nested, concentric and tangent pairs.
    """
    delta = b.center - a.center
    d = abs(delta)
    scale = max(a.radius, b.radius)
    if d == 0:
        return None
    if _tangent(d, a.radius + b.radius, scale) or _tangent(d, abs(a.radius - b.radius), scale):
        return None
    if d > a.radius + b.radius or d < abs(a.radius - b.radius):
        return None
    cos_alpha = (a.radius ** 2 + d ** 2 - b.radius ** 2) / (2.0 * a.radius * d)
    alpha = math.acos(max(-1.0, min(1.0, cos_alpha)))
    phi = cmath.phase(delta)
    return phi - alpha, phi + alpha


def covered_interval(a: Disc, b: Disc) -> CoveredInterval:
    """Part of circle ``a`` lying strictly inside the open disc ``b``."""
    angles = circle_intersection_angles(a, b)
    if angles is not None:
        lo, hi = angles
        return CoveredInterval(AngularInterval(lo, hi))
    d = abs(b.center - a.center)
    # no transversal crossing: circle a is either inside b or outside it
    if d + a.radius <= b.radius * (1 + TANGENCY_RTOL) and a.radius < b.radius:
        return CoveredInterval(full=True)
    return CoveredInterval()


def _merge(intervals: Iterable[tuple[float, float]]) -> list[tuple[float, float]]:
    out: list[list[float]] = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [(lo, hi) for lo, hi in out]


def subtract_intervals(base: Sequence[tuple[float, float]],
                       removed: Iterable[tuple[float, float]]) -> list[tuple[float, float]]:
    result = list(base)
    for rlo, rhi in _merge(removed):
        nxt = []
        for lo, hi in result:
            if rhi <= lo or rlo >= hi:
                nxt.append((lo, hi))
                continue
            if rlo > lo:
                nxt.append((lo, rlo))
            if rhi < hi:
                nxt.append((rhi, hi))
        result = nxt
    return result


def _rejoin(pieces: list[tuple[float, float]]) -> list[AngularInterval]:
    """Turn kept pieces of ``[0, 2*pi]`` into intervals; a piece touching both 0 and 2*pi
    stays split (arcs never cross angle 0)."""
    return [AngularInterval(lo, hi) for lo, hi in pieces if hi - lo > ANGLE_TOL]


def _same_circle(a: Disc, b: Disc) -> bool:
    scale = max(a.radius, b.radius)
    return abs(a.center - b.center) < TANGENCY_RTOL * scale and _tangent(a.radius, b.radius, scale)


def kept_intervals(circle: Disc, inside: Disc | None, outside: Sequence[Disc]) -> list[AngularInterval]:
    """Intervals of ``circle`` inside the closed disc ``inside`` (if given) and outside
    every open disc in ``outside``."""
    if inside is None:
        base = [(0.0, TWO_PI)]
    else:
        cov = covered_interval(circle, inside)
        if cov.full or _same_circle(circle, inside):
            base = [(0.0, TWO_PI)]
        else:
            base = cov.pieces()
    removed = [p for b in outside for p in covered_interval(circle, b).pieces()]
    return _rejoin(subtract_intervals(base, removed))


def boundary_arcs(outer: Disc, holes: Sequence[Disc]) -> Contour:
    holes = tuple(holes)
    for i, h in enumerate(holes):
        if _same_circle(h, outer):
            raise GeometryError(f"hole {i} coincides with the outer circle")
        for j in range(i):
            if _same_circle(h, holes[j]):
                raise GeometryError(f"holes {j} and {i} coincide")
    arcs = [BoundaryArc(outer, iv, +1) for iv in kept_intervals(outer, None, holes)]
    for i, h in enumerate(holes):
        others = holes[:i] + holes[i + 1:]
        arcs.extend(BoundaryArc(h, iv, -1) for iv in kept_intervals(h, outer, others))
    return Contour(tuple(arcs), outer, holes)


def arc_length(a: BoundaryArc) -> float:
    return a.length


def point_in_region(outer: Disc, holes: Sequence[Disc], z: complex) -> bool:
    if abs(z - outer.center) > outer.radius:
        return False
    return all(abs(z - h.center) >= h.radius for h in holes)


def points_in_region(outer: Disc, holes: Sequence[Disc], z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    mask = np.abs(z - outer.center) <= outer.radius
    for h in holes:
        mask &= np.abs(z - h.center) >= h.radius
    return mask


def arc_integral(f, arc: BoundaryArc, tol: float, initial_panels: int = 4,
                 max_panels: int = 2 ** 16):
    """Orientation-signed integral of ``f(z) dz`` along one arc (vectorised ``f``)."""
    c, r = arc.circle.center, arc.circle.radius
    local = getattr(f, "local", None)

    def integrand(theta):
        e = np.exp(1j * theta)
        vals = local(c, r * e) if local is not None else f(c + r * e)
        return vals * (1j * r * e)

    res = adaptive_integrate(integrand, arc.interval.theta_start, arc.interval.theta_end,
                             tol=tol, length_scale=r, initial_panels=initial_panels,
                             max_panels=max_panels)
    if arc.orientation < 0:
        return type(res)(-res.value, res.error_estimate, res.panels)
    return res


class _Cauchy:
    """``1/(z - w)`` with ``z - w`` formed as ``(center - w) + offset``."""

    def __init__(self, w: complex):
        self.w = complex(w)

    def __call__(self, z):
        return 1.0 / (np.asarray(z) - self.w)

    def local(self, center, offset):
        return 1.0 / ((center - self.w) + offset)


def winding_number(c: Contour, w: complex, tol: float = 1e-9) -> int:
    dist = c.distance_to(w)
    if dist <= tol:
        raise OnBoundaryError(f"point {w} lies within {tol} of the contour")
    parts = []
    for arc in c.arcs:
        # resolve the 1/(z-w) peak: panels no wider than the clearance
        n0 = int(min(2 ** 14, max(4, math.ceil(arc.length / max(dist, 1e-300)))))
        parts.append(arc_integral(_Cauchy(w), arc, 1e-10, initial_panels=n0).value)
    val = fsum_complex(parts) / (2j * math.pi)
    k = round(val.real)
    if abs(val - k) > WINDING_RESIDUAL_LIMIT:
        raise WindingError(f"winding number {val} about {w} is not near an integer")
    return int(k)
