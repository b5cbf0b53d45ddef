"""Disc-selection recipes for truncated Swiss cheeses.

Two modes:

``thm14``
    covers include the discs D(1, 1/j); every removed disc stays away from the
    target point 1.
``thm15``
    covers are centred on the unit circle or contained in the open unit disc;
    removed discs stay away from a closed arc set ``Lambda`` on the unit circle.

Each cover ``D(a_n, r_n)`` receives a ring of equal discs (a McKissick family)
inside the shell ``r_n - eps < |z - a_n| < r_n`` with total radius ``eps/2``, where
``eps <= eps_n = min(2^-(n+1) r, 2^-n exp(-n/delta_n))``.  A second wave of
rings is placed inside strong-regularity discs ``B_n`` with the analogous budget.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .geometry import TWO_PI, AngularInterval, Disc, _merge, subtract_intervals

NEAR_TARGET = "near-target"
GRID = "grid"
BOUNDARY = "boundary-centered"
INTERIOR = "interior"

MCKISSICK = "mckissick"
STRONG_REGULARITY = "strong-regularity"

THM14 = "thm14"
THM15 = "thm15"
MODES = (THM14, THM15)

# log of the smallest positive normal double; smaller budgets cannot be realised
_LOG_TINY = math.log(np.finfo(float).tiny)


class PlacementError(ValueError):
    pass


@dataclass(frozen=True)
class CoverDisc:
    index: int
    disc: Disc
    kind: str


@dataclass(frozen=True)
class LabeledHole:
    disc: Disc
    family_type: str
    family_index: int  # cover index n (mckissick) or B index (strong-regularity)
    k: int  # position within the family, 1-based


@dataclass(frozen=True)
class FamilyRecord:
    """Bookkeeping for one ring: where it went and which budget applied."""

    family_type: str
    index: int
    center: complex
    radius: float  # r_n of the cover, or radius of B_n
    working_inner: float  # inner radius of the working annulus
    delta: float  # distance of the working annulus (or closed B_n) to the target
    budget: float  # eps_n or eps~_n
    placed_eps: float  # shell width actually used (<= budget)
    count: int
    status: str  # "placed" | "skipped:<reason>"


@dataclass(frozen=True)
class LambdaSet:
    """Closed arcs of the unit circle; ``arcs`` are sub-intervals of ``[0, 2*pi]``."""

    arcs: tuple[AngularInterval, ...]
    excluded_length: float

    def contains_angle(self, theta: float) -> bool:
        return any(a.contains(theta) for a in self.arcs)

    def points(self, per_arc: int = 16) -> np.ndarray:
        return np.concatenate([np.exp(1j * np.linspace(a.theta_start, a.theta_end, per_arc))
                               for a in self.arcs]) if self.arcs else np.zeros(0, complex)

    def _modulus_range(self, a: complex, arc: AngularInterval) -> tuple[float, float]:
        """Range of ``|e^{it} - a|`` over the arc."""
        cands = [arc.theta_start, arc.theta_end]
        if a != 0:
            phi = math.atan2(a.imag, a.real)
            cands += [t for t in (phi, phi + math.pi) if arc.contains(t)]
        vals = [abs(complex(math.cos(t), math.sin(t)) - a) for t in cands]
        return min(vals), max(vals)

    def distance_to_annulus(self, a: complex, inner: float, outer: float) -> float:
        """Distance from the closed annulus ``inner <= |z - a| <= outer`` to the arcs."""
        best = math.inf
        for arc in self.arcs:
            lo, hi = self._modulus_range(a, arc)
            if hi < inner:
                best = min(best, inner - hi)
            elif lo > outer:
                best = min(best, lo - outer)
            else:
                return 0.0
        return best

    def distance_to_disc(self, d: Disc) -> float:
        return self.distance_to_annulus(d.center, 0.0, d.radius)

    def distance_to_point(self, p: complex) -> float:
        return self.distance_to_annulus(p, 0.0, 0.0)

    @property
    def length(self) -> float:
        return math.fsum(a.span for a in self.arcs)


@dataclass
class CheesePlan:
    mode: str
    N: int
    r: float
    m_per_family: int
    seed: int
    mesh: float
    s_min: float
    rho_max: float
    outer: Disc
    covers: list[CoverDisc]
    holes: list[LabeledHole]
    families: list[FamilyRecord]
    lambda_set: LambdaSet | None = None
    gammas: dict[int, float] = field(default_factory=dict)

    @property
    def hole_discs(self) -> list[Disc]:
        return [h.disc for h in self.holes]

    @property
    def radius_sum(self) -> float:
        return math.fsum(h.disc.radius for h in self.holes)

    def target_distance(self, d: Disc) -> float:
        """``s(D)``: distance to the point 1 (thm14) or to Lambda (thm15)."""
        if self.mode == THM14:
            return max(abs(d.center - 1.0) - d.radius, 0.0)
        return self.lambda_set.distance_to_disc(d)

    def truncated(self, n: int) -> tuple[Disc, list[Disc]]:
        """``K_n``: closed disc of radius ``1 + 1/n`` minus the first ``n`` holes."""
        if n < 1:
            raise ValueError("truncation must be >= 1")
        return Disc(0j, 1.0 + 1.0 / n), self.hole_discs[:n]

    def limit_region(self) -> tuple[Disc, list[Disc]]:
        """The closed unit disc minus all holes."""
        return Disc(0j, 1.0), self.hole_discs

    def target_point(self) -> complex:
        """Base point for singular generators: 1, or the midpoint of the longest Lambda arc."""
        if self.mode == THM14:
            return 1.0 + 0j
        arc = max(self.lambda_set.arcs, key=lambda a: (a.span, -a.theta_start))
        t = 0.5 * (arc.theta_start + arc.theta_end)
        return complex(math.cos(t), math.sin(t))


# ---------------------------------------------------------------- covers

def _grid_level(h: float, radius: float, keep) -> list[complex]:
    k = int(math.ceil((1.0 + radius) / h)) + 1
    pts = []
    for i in range(-k, k + 1):
        for j in range(-k, k + 1):
            a = complex(i * h, j * h)
            if keep(a):
                pts.append(a)
    pts.sort(key=lambda a: (round(abs(a), 12), round(math.atan2(a.imag, a.real) % TWO_PI, 12)))
    return pts


def _thm14_levels(mesh: float) -> Iterator[list[tuple[Disc, str]]]:
    for level in itertools.count(1):
        h = mesh / 2 ** (level - 1)
        r = 0.75 * h
        near = [(Disc(1.0, 1.0 / j), NEAR_TARGET) for j in range(3 * level - 2, 3 * level + 1)]
        grid = _grid_level(h, r, lambda a: abs(a) - r < 1.0 and abs(a - 1.0) >= r + h / 8)
        yield near + [(Disc(a, r), GRID) for a in grid]


def _thm15_levels(mesh: float) -> Iterator[list[tuple[Disc, str]]]:
    for level in itertools.count(1):
        h = mesh / 2 ** (level - 1)
        count = int(math.ceil(TWO_PI / (0.5 * h)))
        boundary = [(Disc(complex(math.cos(TWO_PI * k / count), math.sin(TWO_PI * k / count)), h),
                     BOUNDARY) for k in range(count)]
        r = 0.4 * h
        interior = [(Disc(a, r), INTERIOR)
                    for a in _grid_level(0.5 * h, r, lambda a: abs(a) + r < 1.0)]
        merged = []
        for b, i in itertools.zip_longest(boundary, interior):
            merged.extend(x for x in (b, i) if x is not None)
        yield merged


def cover_family(mode: str, N: int, mesh: float = 1.0) -> list[CoverDisc]:
    """First ``N`` discs of a deterministic covering family that shrinks level by level."""
    if N < 1 or not mesh > 0:
        raise ValueError("need N >= 1 and mesh > 0")
    levels = {THM14: _thm14_levels, THM15: _thm15_levels}[mode](mesh)
    out: list[CoverDisc] = []
    for level in levels:
        for disc, kind in level:
            out.append(CoverDisc(len(out) + 1, disc, kind))
            if len(out) == N:
                return out
    return out


# ---------------------------------------------------------------- budgets

def epsilon_budget(n: int, r: float, delta_n: float) -> float:
    """``min(2^-(n+1) r, 2^-n exp(-n/delta_n))``."""
    if n < 1 or not r > 0 or not delta_n > 0:
        raise ValueError("need n >= 1, r > 0, delta_n > 0")
    return min(r / 2 ** (n + 1), math.exp(-n / delta_n) / 2 ** n)


def log_epsilon_budget(n: int, r: float, delta_n: float) -> float:
    return min(math.log(r) - (n + 1) * math.log(2), -n / delta_n - n * math.log(2))


def annulus_distance(a: complex, r: float, inner: float, target) -> float:
    """Distance from the closed annulus ``inner <= |z - a| <= r`` to a point or a LambdaSet."""
    if isinstance(target, LambdaSet):
        dist = target.distance_to_annulus(complex(a), inner, r)
    else:
        d = abs(complex(target) - complex(a))
        dist = inner - d if d < inner else (d - r if d > r else 0.0)
    if not dist > 0:
        raise PlacementError(f"annulus about {a} (radii {inner}, {r}) touches the target")
    return dist


def place_ring(center: complex, ring_radius: float, disc_radius: float, m: int,
               phase: float = 0.0) -> list[Disc]:
    return [Disc(center + ring_radius * complex(math.cos(t), math.sin(t)), disc_radius)
            for t in (phase + TWO_PI * (k + 0.5) / m for k in range(m))]


def place_mckissick_family(center: complex, radius: float, eps: float, m: int,
                           phase: float = 0.0) -> list[Disc]:
    """``m`` discs of radius ``eps/(2m)`` centred on ``|z - center| = radius - eps/2``.

    Total radius is ``eps/2`` and every disc lies in ``radius - eps < |z - center| < radius``.
    """
    if m < 2:
        raise PlacementError("need m >= 2 discs for the ring to stay inside its shell")
    if not (0 < eps < radius):
        raise PlacementError(f"shell width {eps} must lie in (0, {radius})")
    rho = eps / (2 * m)
    discs = place_ring(center, radius - eps / 2, rho, m, phase)
    # centres carry rounding of a few ulps of |center| + radius
    slack = 8 * math.ulp(abs(center) + radius)
    for d in discs:
        dist = abs(d.center - center)
        if not (radius - eps < dist - rho + slack and dist + rho < radius + slack):
            raise PlacementError(f"disc {d} escapes the shell of width {eps}")
    return discs


# ---------------------------------------------------------------- Lambda

def band_angles(a_angle: float, r: float, gamma: float) -> list[tuple[float, float]]:
    """Angles of the unit circle with ``r - gamma < |e^{it} - e^{i a}| < r + gamma``,
    as pieces of ``[0, 2*pi]``; uses ``|e^{it} - e^{ia}| = 2|sin((t - a)/2)|``."""
    lo = 2 * math.asin(min(1.0, max(0.0, (r - gamma) / 2)))
    hi = 2 * math.asin(min(1.0, max(0.0, (r + gamma) / 2)))
    if hi <= lo:
        return []
    pieces = []
    for s, e in ((a_angle + lo, a_angle + hi), (a_angle - hi, a_angle - lo)):
        iv = AngularInterval(s, e)
        pieces.extend(iv.pieces())
    return pieces


def excluded_band_length(r: float, gamma: float) -> float:
    """Closed-form length of one band (before union with others)."""
    return 4 * (math.asin(min(1.0, (r + gamma) / 2)) - math.asin(min(1.0, max(0.0, (r - gamma) / 2))))


def lambda_arcs(gammas: dict[int, float], covers: Sequence[CoverDisc]) -> LambdaSet:
    """Unit circle minus the open bands of the boundary-centred covers."""
    removed = []
    for c in covers:
        if c.index not in gammas:
            continue
        g = gammas[c.index]
        if not g > 0:
            raise ValueError("gamma_n must be positive")
        ang = math.atan2(c.disc.center.imag, c.disc.center.real)
        removed.extend(band_angles(ang, c.disc.radius, g))
    merged = _merge(removed)
    excluded = math.fsum(hi - lo for lo, hi in merged)
    kept = subtract_intervals([(0.0, TWO_PI)], merged)
    arcs = [AngularInterval(lo, hi) for lo, hi in kept if hi - lo > 1e-12]
    # a kept piece ending at 2*pi and another starting at 0 form one arc
    if len(arcs) > 1 and arcs[0].theta_start == 0.0 and abs(arcs[-1].theta_end - TWO_PI) < 1e-15:
        first, last = arcs[0], arcs[-1]
        arcs = [AngularInterval(last.theta_start, TWO_PI + first.theta_end)] + arcs[1:-1]
    return LambdaSet(tuple(arcs), excluded)


def choose_gammas(covers: Sequence[CoverDisc], r: float) -> dict[int, float]:
    """``gamma_n = r 2^-(n+2)`` (capped at ``r_n``), shrunk until the bands cover less than ``r``."""
    gam = {c.index: min(r * 2.0 ** (-c.index - 2), c.disc.radius)
           for c in covers if c.kind == BOUNDARY}
    for _ in range(200):
        if lambda_arcs(gam, covers).excluded_length < r:
            return gam
        gam = {k: 0.5 * v for k, v in gam.items()}
    raise PlacementError("could not choose gamma_n with excluded length below r")


# ---------------------------------------------------------------- plans

def _strong_regularity_discs(mode: str, covers: Sequence[CoverDisc], N: int) -> list[Disc]:
    if mode == THM14:
        return [c.disc for c in covers if c.kind == GRID]
    return [Disc(0j, 1.0 - 1.0 / (k + 1)) for k in range(1, N + 1)]


def build_plan(mode: str, N: int, r: float, m_per_family: int, seed: int = 0,
               mesh: float = 1.0, s_min: float = 0.02, rho_max: float = 3.0) -> CheesePlan:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if N < 1 or not r > 0 or not s_min > 0 or rho_max < 0:
        raise ValueError("need N >= 1, r > 0, s_min > 0, rho_max >= 0")
    if m_per_family < 2:
        raise PlacementError("m_per_family must be >= 2")
    if 2 * rho_max / s_min > 700:
        raise ValueError("exp(2 rho_max / s_min) would overflow; raise s_min or lower rho_max")
    rng = np.random.default_rng(seed)
    covers = cover_family(mode, N, mesh)
    gammas: dict[int, float] = {}
    lam = None
    target = 1.0 + 0j
    if mode == THM15:
        gammas = choose_gammas(covers, r)
        lam = lambda_arcs(gammas, covers)
        target = lam

    families: list[FamilyRecord] = []
    by_index: dict[tuple[str, int], list[LabeledHole]] = {}

    for c in covers:
        a, rn = c.disc.center, c.disc.radius
        if mode == THM15 and c.kind == BOUNDARY:
            inner = rn - gammas[c.index] / 2
        else:
            inner = rn / 2
        phase = float(rng.uniform(0, TWO_PI))
        delta = annulus_distance(a, rn, inner, target)
        fam = _place(MCKISSICK, c.index, a, rn, inner, delta, r, m_per_family, s_min, phase)
        families.append(fam[0])
        by_index[(MCKISSICK, c.index)] = fam[1]

    for k, b in enumerate(_strong_regularity_discs(mode, covers, N), start=1):
        phase = float(rng.uniform(0, TWO_PI))
        if mode == THM14:
            alpha = abs(b.center - 1.0) - b.radius
        else:
            alpha = lam.distance_to_disc(b)
        if not alpha > 0:
            raise PlacementError(f"strong-regularity disc {k} touches the target")
        rec, holes = _place_second_wave(k, b, alpha, r, m_per_family, s_min, phase)
        families.append(rec)
        by_index[(STRONG_REGULARITY, k)] = holes

    holes: list[LabeledHole] = []
    top = max([i for _, i in by_index] or [0])
    for i in range(1, top + 1):
        for t in (MCKISSICK, STRONG_REGULARITY):
            holes.extend(by_index.get((t, i), []))

    plan = CheesePlan(mode, N, r, m_per_family, seed, mesh, s_min, rho_max, Disc(0j, 1.0),
                      covers, holes, families, lam, gammas)
    if not plan.radius_sum < r:
        raise PlacementError(f"radius sum {plan.radius_sum} is not below r={r}")
    for h in holes:
        if not plan.target_distance(h.disc) > 0:
            raise PlacementError(f"hole {h} touches the target")
    return plan


def _skip(ftype, idx, center, radius, inner, delta, budget, reason) -> tuple[FamilyRecord, list]:
    return FamilyRecord(ftype, idx, center, radius, inner, delta, budget, 0.0, 0,
                        f"skipped:{reason}"), []


def _place(ftype, n, a, rn, inner, delta, r, m, s_min, phase):
    if delta < s_min:
        return _skip(ftype, n, a, rn, inner, delta, 0.0, "s_min")
    log_eps = log_epsilon_budget(n, r, delta)
    eps_n = math.exp(log_eps)
    eps = min(eps_n, rn - inner)
    if log_eps - math.log(2 * m) < _LOG_TINY or eps / (2 * m) < np.finfo(float).tiny:
        return _skip(ftype, n, a, rn, inner, delta, eps_n, "underflow")
    # the shell must be strictly narrower than the working annulus
    if eps >= rn - inner:
        eps = 0.5 * (rn - inner)
    discs = place_mckissick_family(a, rn, eps, m, phase)
    rec = FamilyRecord(ftype, n, a, rn, inner, delta, eps_n, eps, m, "placed")
    return rec, [LabeledHole(d, ftype, n, k) for k, d in enumerate(discs, start=1)]


def _place_second_wave(k, b: Disc, alpha, r, m, s_min, phase):
    ftype = STRONG_REGULARITY
    if alpha < s_min:
        return _skip(ftype, k, b.center, b.radius, 0.0, alpha, 0.0, "s_min")
    log_eps = log_epsilon_budget(k, r, alpha)
    eps_n = math.exp(log_eps)
    rho = min(eps_n, b.radius) / (2 * m)
    if log_eps - math.log(2 * m) < _LOG_TINY or rho < np.finfo(float).tiny:
        return _skip(ftype, k, b.center, b.radius, 0.0, alpha, eps_n, "underflow")
    discs = place_ring(b.center, b.radius / 2, rho, m, phase)
    rec = FamilyRecord(ftype, k, b.center, b.radius, 0.0, alpha, eps_n, 2 * m * rho, m, "placed")
    return rec, [LabeledHole(d, ftype, k, j) for j, d in enumerate(discs, start=1)]


# ---------------------------------------------------------------- verification

@dataclass(frozen=True)
class BudgetRow:
    check: str  # "radius-sum" | "weighted" | "tail"
    family_type: str
    index: int
    value: float
    bound: float

    @property
    def margin(self) -> float:
        return self.bound - self.value

    @property
    def relative_margin(self) -> float:
        return 1.0 - self.value / self.bound if self.bound > 0 else -math.inf

    @property
    def ok(self) -> bool:
        return self.value < self.bound


@dataclass(frozen=True)
class BudgetReport:
    nu: float
    rows: tuple[BudgetRow, ...]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    @property
    def violations(self) -> list[BudgetRow]:
        return [r for r in self.rows if not r.ok]


def verify_budgets(plan: CheesePlan, nu: float) -> BudgetReport:
    """(i) total radius below ``r``; (ii) per-family ``sum r exp(nu/s) < eps_n exp(nu/delta_n)``;
    (iii) for ``n > nu``, the same sum below ``2^-n``."""
    if nu < 0:
        raise ValueError("nu must be >= 0")
    rows = [BudgetRow("radius-sum", "all", 0, plan.radius_sum, plan.r)]
    groups: dict[tuple[str, int], list[Disc]] = {}
    for h in plan.holes:
        groups.setdefault((h.family_type, h.family_index), []).append(h.disc)
    for fam in plan.families:
        discs = groups.get((fam.family_type, fam.index), [])
        if not discs:
            continue
        weighted = math.fsum(d.radius * _exp_over(nu, plan.target_distance(d)) for d in discs)
        rows.append(BudgetRow("weighted", fam.family_type, fam.index, weighted,
                              fam.budget * math.exp(nu / fam.delta)))
        if fam.index > nu:
            rows.append(BudgetRow("tail", fam.family_type, fam.index, weighted, 2.0 ** (-fam.index)))
    return BudgetReport(nu, tuple(rows))


def budget_sum(plan: CheesePlan, rho2: float, n: int | None = None) -> float:
    """``M = sum r(D_k) exp(2 rho2 / s(D_k))`` over the first ``n`` holes (all if ``None``)."""
    discs = plan.hole_discs if n is None else plan.hole_discs[:n]
    return math.fsum(d.radius * _exp_over(2 * rho2, plan.target_distance(d)) for d in discs)


def _exp_over(a: float, s: float) -> float:
    """``exp(a / s)``; infinite for a hole touching the target or on overflow."""
    if s <= 0:
        return math.inf if a > 0 else 1.0
    try:
        return math.exp(a / s)
    except OverflowError:
        return math.inf
