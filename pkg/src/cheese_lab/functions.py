"""Evaluable functions on the plane.

Expressions are immutable trees.  Products fuse the exponential factors of
singular generators and measure weights that share a base point, so
``F_rho1 * weight(rho2)`` is evaluated as ``(z - lam) * exp((rho1 - rho2) * w)``
with ``w = (z + lam) / (z - lam)`` instead of as a product of two exponentials
that may individually overflow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.stats import qmc

from .geometry import Disc, boundary_arcs, circle_intersection_angles, points_in_region


class PoleError(ArithmeticError):
    pass


def _as_array(z):
    return np.asarray(z, dtype=complex)


class Loc:
    """Points ``center + offset``; differences ``z - q`` are formed as
    ``(center - q) + offset`` so they stay accurate on tiny circles."""

    __slots__ = ("center", "offset", "z")

    def __init__(self, center, offset):
        self.center = complex(center)
        self.offset = np.asarray(offset, dtype=complex)
        self.z = self.center + self.offset

    @property
    def shape(self):
        return self.offset.shape

    def minus(self, q):
        return (self.center - q) + self.offset


def _coerce(x) -> "BaseFunction":
    if isinstance(x, BaseFunction):
        return x
    if isinstance(x, (int, float, complex, np.number)):
        return Constant(complex(x))
    raise TypeError(f"cannot use {type(x).__name__} as a function")


class BaseFunction:
    """Base class.  Subclasses implement :meth:`parts`."""

    def parts(self, loc: Loc) -> tuple[np.ndarray, dict[complex, np.ndarray]]:
        """Return ``(prefactor, {lam: exponent})`` with value ``prefactor * exp(sum exponents)``."""
        raise NotImplementedError

    def local(self, center, offset) -> np.ndarray:
        """Evaluate at ``center + offset`` (arrays)."""
        loc = Loc(center, np.atleast_1d(offset))
        pre, expo = self.parts(loc)
        val = np.asarray(pre, dtype=complex) * np.ones(loc.shape)
        if expo:
            total = sum(expo.values())
            nz = val != 0
            val = np.where(nz, val * np.exp(np.where(nz, total, 0)), 0)
        return val

    def __call__(self, z):
        arr = _as_array(z)
        val = self.local(0j, arr)
        return complex(val[0]) if arr.ndim == 0 else val.reshape(arr.shape)

    def exponent_strength(self) -> dict[complex, float]:
        """Upper bound on ``|c|`` over fused exponents ``exp(c (z+lam)/(z-lam))`` by base point."""
        return {}

    def __add__(self, other):
        return Sum((self, _coerce(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return Sum((self, Scale(-1.0, _coerce(other))))

    def __rsub__(self, other):
        return Sum((_coerce(other), Scale(-1.0, self)))

    def __neg__(self):
        return Scale(-1.0, self)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return Scale(complex(other), self)
        return Product((self, _coerce(other)))

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return Scale(complex(other), self)
        return Product((_coerce(other), self))


@dataclass(frozen=True, eq=True)
class Constant(BaseFunction):
    value: complex

    def parts(self, loc):
        return np.full(loc.shape, self.value, dtype=complex), {}

    def __repr__(self):
        return f"{self.value}"


@dataclass(frozen=True, eq=True)
class Identity(BaseFunction):
    def parts(self, loc):
        return loc.z, {}

    def __repr__(self):
        return "z"


@dataclass(frozen=True, eq=True)
class RationalFunction(BaseFunction):
    """``scale * prod (z - zero)^m / prod (z - pole)^m``; multiplicities given as pairs."""

    zeros: tuple[tuple[complex, int], ...] = ()
    poles: tuple[tuple[complex, int], ...] = ()
    scale: complex = 1.0

    def __post_init__(self):
        zs = tuple((complex(p), int(m)) for p, m in self.zeros)
        ps = tuple((complex(p), int(m)) for p, m in self.poles)
        object.__setattr__(self, "zeros", zs)
        object.__setattr__(self, "poles", ps)
        object.__setattr__(self, "scale", complex(self.scale))
        zero_pts = {p for p, _ in zs}
        for p, m in ps:
            if m < 1:
                raise ValueError("pole multiplicity must be >= 1")
            if p in zero_pts:
                raise ValueError(f"zero and pole coincide at {p}")
        if any(m < 1 for _, m in zs):
            raise ValueError("zero multiplicity must be >= 1")

    @classmethod
    def from_points(cls, zeros: Sequence[complex] = (), poles: Sequence[complex] = (), scale=1.0):
        return cls(tuple((z, 1) for z in zeros), tuple((p, 1) for p in poles), scale)

    @property
    def pole_points(self) -> list[complex]:
        return [p for p, _ in self.poles]

    def parts(self, loc):
        val = np.full(loc.shape, self.scale, dtype=complex)
        for p, m in self.zeros:
            val = val * loc.minus(p) ** m
        for p, m in self.poles:
            d = loc.minus(p)
            if np.any(d == 0):
                raise PoleError(f"evaluation at pole {p} of {self!r}")
            val = val / d ** m
        return val, {}

    def __repr__(self):
        num = "".join(f"(z-{p})" + (f"^{m}" if m > 1 else "") for p, m in self.zeros)
        den = "".join(f"(z-{p})" + (f"^{m}" if m > 1 else "") for p, m in self.poles)
        return f"{self.scale}*{num or '1'}/{den or '1'}"


def _moebius(loc, lam):
    """``(z + lam) / (z - lam)`` with the point ``lam`` masked to 0."""
    d = loc.minus(lam)
    at = d == 0
    return np.where(at, 0, (loc.z + lam) / np.where(at, 1, d)), at


@dataclass(frozen=True, eq=True)
class SingularGenerator(BaseFunction):
    """``(z - lam) * exp(rho (z + lam)/(z - lam))``, continuously extended by 0 at ``lam``."""

    rho: float
    lam: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "lam", complex(self.lam))
        if self.rho < 0:
            raise ValueError("rho must be >= 0")
        if abs(abs(self.lam) - 1.0) > 1e-12:
            raise ValueError("lam must lie on the unit circle")

    def parts(self, loc):
        w, _ = _moebius(loc, self.lam)
        return loc.minus(self.lam), {self.lam: self.rho * w}

    def exponent_strength(self):
        return {self.lam: self.rho}

    def __repr__(self):
        return f"F[{self.rho},{self.lam}]"


@dataclass(frozen=True, eq=True)
class MeasureWeight(BaseFunction):
    """``exp(-rho (z + lam)/(z - lam))``; undefined at ``lam`` (essential singularity)."""

    rho: float
    lam: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "lam", complex(self.lam))
        if self.rho < 0:
            raise ValueError("rho must be >= 0")

    def parts(self, loc):
        w, at = _moebius(loc, self.lam)
        if self.rho != 0 and np.any(at):
            raise PoleError(f"weight {self!r} evaluated at its essential singularity {self.lam}")
        return np.ones(loc.shape, dtype=complex), {self.lam: -self.rho * w}

    def exponent_strength(self):
        return {self.lam: self.rho}

    def modulus(self, z):
        """``exp(-rho (|z|^2 - 1)/|z - lam|^2)`` for ``|lam| = 1``."""
        z = _as_array(z)
        return np.exp(-self.rho * (np.abs(z) ** 2 - 1.0) / np.abs(z - self.lam) ** 2)

    def __repr__(self):
        return f"W[{self.rho},{self.lam}]"


@dataclass(frozen=True, eq=True)
class Scale(BaseFunction):
    factor: complex
    inner: BaseFunction

    def parts(self, loc):
        pre, expo = self.inner.parts(loc)
        return self.factor * pre, expo

    def exponent_strength(self):
        return self.inner.exponent_strength()

    def __repr__(self):
        return f"{self.factor}*({self.inner!r})"


@dataclass(frozen=True, eq=True)
class Sum(BaseFunction):
    terms: tuple[BaseFunction, ...]

    def parts(self, loc):
        return sum((t.local(loc.center, loc.offset) for t in self.terms),
                   np.zeros(loc.shape, dtype=complex)), {}

    def exponent_strength(self):
        out: dict[complex, float] = {}
        for t in self.terms:
            for lam, s in t.exponent_strength().items():
                out[lam] = max(out.get(lam, 0.0), s)
        return out

    def __repr__(self):
        return " + ".join(repr(t) for t in self.terms)


@dataclass(frozen=True, eq=True)
class Product(BaseFunction):
    factors: tuple[BaseFunction, ...]

    def parts(self, loc):
        pre = np.ones(loc.shape, dtype=complex)
        expo: dict[complex, np.ndarray] = {}
        for f in self.factors:
            p, e = f.parts(loc)
            pre = pre * p
            for lam, v in e.items():
                expo[lam] = expo[lam] + v if lam in expo else v
        return pre, expo

    @cached_property
    def _coefficients(self) -> dict[complex, float]:
        coeff: dict[complex, float] = {}
        for f in self.factors:
            base = f
            sign = 1.0
            if isinstance(f, MeasureWeight):
                sign = -1.0
            if isinstance(base, (SingularGenerator, MeasureWeight)):
                coeff[base.lam] = coeff.get(base.lam, 0.0) + sign * base.rho
        return coeff

    def exponent_strength(self):
        out = {lam: abs(c) for lam, c in self._coefficients.items()}
        for f in self.factors:
            if not isinstance(f, (SingularGenerator, MeasureWeight)):
                for lam, s in f.exponent_strength().items():
                    out[lam] = out.get(lam, 0.0) + s
        return out

    def __repr__(self):
        return "*".join(f"({f!r})" for f in self.factors)


Z = Identity()


def evaluate(f: BaseFunction, z):
    return f(z)


def singular(rho: float, lam: complex = 1.0) -> SingularGenerator:
    return SingularGenerator(rho, lam)


def weight(rho: float, lam: complex = 1.0) -> MeasureWeight:
    return MeasureWeight(rho, lam)


def glue(phi: BaseFunction, h: BaseFunction, f: BaseFunction,
         in_neighborhood: Callable[[np.ndarray], np.ndarray], z):
    """Piecewise combination: ``phi*h + (1 - phi)*f`` on the neighbourhood, ``f`` off it."""
    z = _as_array(z)
    inside = np.asarray(in_neighborhood(z), dtype=bool)
    fz = _as_array(f(z))
    if not np.any(inside):
        return fz
    p = _as_array(phi(z))
    out = np.where(inside, p * _as_array(h(z)) + (1 - p) * fz, fz)
    return complex(out) if out.ndim == 0 else out


def region_samples(outer: Disc, holes: Sequence[Disc], samples: int, seed: int = 0,
                   boundary_points: int = 2048) -> np.ndarray:
    """Deterministic sample of the region: scrambled Halton points inside, plus points
    spaced along every boundary arc."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    pts = []
    want = samples
    halton = qmc.Halton(d=2, scramble=True, seed=seed)
    while want > 0:
        u = halton.random(max(2 * want, 64))
        r = outer.radius * np.sqrt(u[:, 0])
        z = outer.center + r * np.exp(2j * np.pi * u[:, 1])
        z = z[points_in_region(outer, holes, z)]
        pts.append(z[:want])
        want -= len(z[:want])
        if len(pts) > 1000:
            break
    contour = boundary_arcs(outer, holes)
    total_len = max(contour.length, 1e-300)
    for arc in contour.arcs:
        k = max(2, int(math.ceil(boundary_points * arc.length / total_len)))
        th = np.linspace(arc.interval.theta_start, arc.interval.theta_end, k)
        pts.append(arc.circle.point(th))
    return np.concatenate(pts)


def sup_norm_estimate(f: BaseFunction, outer: Disc, holes: Sequence[Disc] = (),
                      samples: int = 4096, seed: int = 0) -> float:
    pts = region_samples(outer, holes, samples, seed)
    return float(np.max(np.abs(f(pts))))


def peak_margin(outer: Disc, holes: Sequence[Disc], neighborhood_radius: float,
                samples: int = 100_000, seed: int = 0, target: complex = 1.0) -> float:
    """``1 - max |(1 + z)/2|`` over region samples with ``|z - target| >= neighborhood_radius``.

    Samples include a dense pass along the circle ``|z - target| = neighborhood_radius``
    intersected with the region, where the maximum is attained on the unit disc.
    """
    pts = region_samples(outer, holes, samples, seed)
    th = np.linspace(0.0, 2 * np.pi, 20001)
    ring = target + neighborhood_radius * np.exp(1j * th)
    ring = ring[points_in_region(outer, holes, ring)]
    # where the ring leaves the region the maximum sits exactly on a boundary circle
    probe = Disc(target, neighborhood_radius)
    corners = []
    for c in [outer, *holes]:
        ang = circle_intersection_angles(probe, c)
        if ang is not None:
            corners.extend(probe.point(np.array(ang)))
    corners = np.array(corners, dtype=complex)
    slack = 1e-12
    keep = np.abs(corners - outer.center) <= outer.radius * (1 + slack)
    for h in holes:
        keep &= np.abs(corners - h.center) >= h.radius * (1 - slack)
    pts = np.concatenate([pts, ring, corners[keep]])
    pts = pts[np.abs(pts - target) >= neighborhood_radius * (1 - 1e-12)]
    return float(1.0 - np.max(np.abs((1 + pts) / 2)))
