"""Verification suites that fill a :class:`Ledger` in canonical order."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from . import cole
from .builder import THM14, CheesePlan, verify_budgets
from .config import RunConfig
from .functions import Identity, RationalFunction, SingularGenerator
from .geometry import Disc, OnBoundaryError, WindingError, boundary_arcs, winding_number
from .ledger import Ledger, format_params
from .measures import (CertificationError, ConfigurationError, WeightedBoundaryMeasure,
                       annihilation_test, contour_integral, deformation_check, residue_series_oracle,
                       separation_test, separation_value, total_variation, truncated_contour, tv_bound)
from .quadrature import QuadratureError

NUMERIC_ERRORS = (CertificationError, ConfigurationError, QuadratureError, OnBoundaryError,
                  WindingError, ArithmeticError)


# ---------------------------------------------------------------- random inputs

def eligible_pole_holes(plan: CheesePlan, n: int, min_radius: float = 1e-4) -> list[Disc]:
    """Holes among the first ``n`` wide enough that a pole at the centre stays resolvable."""
    return [d for d in plan.hole_discs[:n] if d.radius >= min_radius]


def random_rational(plan: CheesePlan, n: int, rng: np.random.Generator,
                    max_poles: int = 2) -> RationalFunction:
    """Rational ``g`` with poles at hole centres (or outside ``|z| <= 1 + 1/n``) and
    zeros in the unit disc."""
    holes = eligible_pole_holes(plan, n)
    k = int(rng.integers(1, max_poles + 1))
    if holes:
        idx = rng.choice(len(holes), size=min(k, len(holes)), replace=False)
        poles = [holes[int(i)].center for i in sorted(idx)]
    else:
        poles = [(1 + 1 / n) * 1.5 * np.exp(2j * np.pi * rng.random()) for _ in range(k)]
    zeros = [np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
             for _ in range(int(rng.integers(0, 3)))]
    zeros = [z for z in zeros if all(z != p for p in poles)]
    scale = complex(rng.normal(), rng.normal())
    return RationalFunction.from_points(zeros, poles, scale)


# ---------------------------------------------------------------- ideals

def _fail_row(led: Ledger, test_id, suite, params, tol, exc, millis=0):
    led.add(test_id, suite, params + f";error={type(exc).__name__}", 0j, complex(math.nan, 0),
            math.inf, tol, passed=False, millis=millis)


def run_ideal_suites(plan: CheesePlan, cfg: RunConfig, led: Ledger | None = None) -> Ledger:
    led = Ledger(timing=cfg.timing) if led is None else led
    rng = np.random.default_rng(cfg.seed)
    n_main = sorted(cfg.truncations)[len(cfg.truncations) // 2]

    # certification: the base point must have winding number one on each K_n
    lam = plan.target_point()
    for n in cfg.truncations:
        params = format_params(n=n)
        with led.timer() as t:
            try:
                k = winding_number(truncated_contour(plan, n), lam)
                err = None
            except (OnBoundaryError, WindingError) as exc:
                k, err = 0, exc
        if err is not None:
            _fail_row(led, f"winding/n={n}", "winding", params, 0.0, err, t[0])
        else:
            led.add(f"winding/n={n}", "winding", params, 1, k, abs(k - 1), 0.0, millis=t[0])

    for c in (-0.25, -1.0, -2.0):
        closed = separation_value(c)
        oracle = 2j * math.pi * residue_series_oracle(c)
        led.add(f"residue-oracle/c={c}", "residue-oracle", format_params(c=c), closed, oracle,
                abs(oracle - closed) / abs(closed), cfg.exact_tol)

    for rho1, rho2 in cfg.rho_pairs:
        for n in cfg.truncations:
            tid = f"separation/rho=({rho1},{rho2})/n={n}"
            params = format_params(rho1=rho1, rho2=rho2, n=n)
            with led.timer() as t:
                try:
                    res = separation_test(plan, n, rho1, rho2, cfg.pass_tol, cfg.tol)
                    err = None
                except NUMERIC_ERRORS as exc:
                    err = exc
            if err is not None:
                _fail_row(led, tid, "separation", params, cfg.pass_tol, err, t[0])
            else:
                led.add(tid, "separation", params, res.expected, res.observed, res.residual,
                        cfg.pass_tol, res.passed, t[0])

    for rho1, rho2 in cfg.rho_pairs:
        tid = f"deformation/rho=({rho1},{rho2})"
        params = format_params(rho1=rho1, rho2=rho2, truncations=list(cfg.truncations))
        with led.timer() as t:
            try:
                d = deformation_check(plan, cfg.truncations, rho1, rho2, cfg.pass_tol, cfg.tol)
                err = None
            except NUMERIC_ERRORS as exc:
                err = exc
        if err is not None:
            _fail_row(led, tid, "deformation", params, cfg.pass_tol, err, t[0])
        else:
            led.add(tid, "deformation", params, 0j, d.max_relative_spread, d.max_relative_spread,
                    cfg.pass_tol, d.passed, t[0])

    rho2_main = cfg.rho_pairs[0][1]
    for i in range(cfg.annihilation_count):
        g = random_rational(plan, n_main, rng)
        tid = f"annihilation/{i}"
        params = format_params(n=n_main, rho2=rho2_main, poles=[str(p) for p in g.pole_points])
        with led.timer() as t:
            try:
                res = annihilation_test(plan, n_main, rho2_main, g, cfg.pass_tol, cfg.tol)
                err = None
            except NUMERIC_ERRORS as exc:
                err = exc
        if err is not None:
            _fail_row(led, tid, "annihilation", params, cfg.pass_tol, err, t[0])
        else:
            led.add(tid, "annihilation", params, 0j, res.observed, res.residual, res.tolerance,
                    res.passed, t[0])

    for rho2 in cfg.tv_rho2:
        for n in cfg.truncations:
            tid = f"tv/rho2={rho2}/n={n}"
            params = format_params(rho2=rho2, n=n)
            with led.timer() as t:
                try:
                    mu = WeightedBoundaryMeasure(truncated_contour(plan, n), rho2, lam, cfg.tol)
                    tv = total_variation(mu).value.real
                    err = None
                except NUMERIC_ERRORS as exc:
                    err = exc
            if err is not None:
                _fail_row(led, tid, "tv-bound", params, 0.0, err, t[0])
                continue
            bound = tv_bound(plan, n, rho2)
            # residual is the (negative) margin; pass iff strictly below the bound
            led.add(tid, "tv-bound", params, bound, tv, tv - bound, 0.0, tv < bound, t[0])

    for nu in cfg.nu:
        rep = verify_budgets(plan, nu)
        for row in rep.rows:
            tid = f"budget/nu={nu}/{row.check}/{row.family_type}/{row.index}"
            led.add(tid, "budget", format_params(nu=nu, check=row.check, family=row.family_type,
                                                 index=row.index),
                    row.bound, row.value, row.value - row.bound, 0.0, row.ok)

    if plan.lambda_set is not None:
        lam_set = plan.lambda_set
        led.add("lambda/excluded-length", "lambda", format_params(r=plan.r), plan.r,
                lam_set.excluded_length, lam_set.excluded_length - plan.r, 0.0,
                lam_set.excluded_length < plan.r)
        worst = min((lam_set.distance_to_disc(h) for h in plan.hole_discs), default=math.inf)
        led.add("lambda/holes-avoid", "lambda", "", 0j, worst, -worst, 0.0, worst > 0)
    return led


# ---------------------------------------------------------------- geometry

def run_geometry_suite(plan: CheesePlan, n: int, probes: int, seed: int,
                       led: Ledger | None = None, tol: float = 1e-9) -> Ledger:
    """Winding numbers at random interior, hole and exterior probes, and closed-contour
    integrals of random polynomials."""
    led = Ledger() if led is None else led
    rng = np.random.default_rng(seed)
    outer, holes = plan.truncated(n)
    contour = boundary_arcs(outer, holes)
    for kind, expected, pts in probe_points(outer, holes, probes, rng, clearance=1e-6):
        bad = 0
        for w in pts:
            try:
                bad += winding_number(contour, w) != expected
            except (OnBoundaryError, WindingError):
                bad += 1
        led.add(f"geometry/winding/{kind}/n={n}", "geometry",
                format_params(n=n, probes=len(pts)), expected, expected if not bad else math.nan,
                bad, 0.0)
    for i in range(5):
        coeffs = rng.normal(size=int(rng.integers(1, 8))) + 1j * rng.normal(size=1)
        f = _Polynomial(tuple(complex(c) for c in coeffs))
        val = contour_integral(f, contour, 1e-12).value
        led.add(f"geometry/poly/{i}", "geometry", format_params(n=n, degree=len(coeffs) - 1),
                0j, val, abs(val), tol)
    return led


class _Polynomial:
    """Minimal vectorised polynomial for contour checks."""

    def __init__(self, coeffs):
        self.coeffs = coeffs

    def __call__(self, z):
        return np.polyval(np.array(self.coeffs), np.asarray(z, dtype=complex))

    def exponent_strength(self):
        return {}


def probe_points(outer: Disc, holes: Sequence[Disc], count: int, rng: np.random.Generator,
                 clearance: float = 1e-6):
    """``count`` interior points (winding 1), points inside holes meeting the outer disc
    (winding 0) and exterior points (winding 0)."""
    from .geometry import points_in_region

    interior = []
    while len(interior) < count:
        u = rng.random((4 * count, 2))
        z = outer.center + outer.radius * np.sqrt(u[:, 0]) * np.exp(2j * np.pi * u[:, 1])
        ok = points_in_region(outer, holes, z)
        ok &= np.abs(z - outer.center) < outer.radius - clearance
        for h in holes:
            ok &= np.abs(z - h.center) > h.radius + clearance
        interior.extend(z[ok][: count - len(interior)])
    inside_holes = []
    # probes sit at half the radius, so the hole must be wide compared to the on-contour tolerance
    usable = [h for h in holes if abs(h.center - outer.center) + h.radius < outer.radius
              and h.radius > 2 * clearance]
    usable = [h for h in usable if all(g is h or abs(h.center - g.center) >= h.radius + g.radius
                                       for g in holes)]
    for j in range(count if usable else 0):
        h = usable[int(rng.integers(len(usable)))]
        z = h.center + 0.5 * h.radius * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
        inside_holes.append(z)
    rad = outer.radius * (1.05 + rng.random(count))
    exterior = list(outer.center + rad * np.exp(2j * np.pi * rng.random(count)))
    return [("interior", 1, interior), ("hole", 0, inside_holes), ("exterior", 0, exterior)]


# ---------------------------------------------------------------- cole

def cole_family(plan: CheesePlan, size: int, rho2: float, lambda_samples: int = 3):
    """``F_rho2 * g_i`` for a rational basis ``g_i``; members vanish on the hull ``E``.

    thm14: ``E = {1}``.  thm15: ``E`` is the base point plus sampled Lambda points, and each
    member carries the factor ``prod (z - lambda_j)``.
    """
    lam = plan.target_point()
    hull = [lam]
    extra_zeros: list[complex] = []
    if plan.mode != THM14 and plan.lambda_set is not None:
        pts = plan.lambda_set.points(per_arc=8)
        pts = [complex(p) for p in pts if abs(p - lam) > 1e-6]
        step = max(1, len(pts) // lambda_samples)
        extra_zeros = pts[::step][:lambda_samples]
        hull += extra_zeros
    F = SingularGenerator(rho2, lam)
    poles = [d.center for d in plan.hole_discs if d.radius >= 1e-4]
    basis: list = []
    for i in range(size):
        if i == 0:
            g = RationalFunction.from_points(extra_zeros, (), 1.0)
        elif i - 1 < len(poles):
            g = RationalFunction.from_points(extra_zeros, (poles[i - 1],), 1.0)
        else:
            g = RationalFunction.from_points(list(extra_zeros) + [0.1 * i], (), 1.0)
        basis.append(F * g)
    return basis, hull


def run_cole_suite(plan: CheesePlan, cfg: RunConfig, led: Ledger | None = None) -> Ledger:
    led = Ledger(timing=cfg.timing) if led is None else led
    rng = np.random.default_rng(cfg.seed)
    rho2 = cfg.rho_pairs[0][1]
    members, hull = cole_family(plan, cfg.cole_family_size, rho2)
    ctx = cole.make_context(members, hull)
    k = ctx.size
    atoms = [Identity()] + [m for m in members[:2]]
    x0 = hull[0]
    samples = _cole_sample_points(plan, rng, 8)
    exact = cfg.exact_tol
    R = cfg.cole_samples

    def rand(c=ctx, terms=3):
        return cole.random_element(c, rng, terms, atoms)

    def exact_row(tid, suite, ok, params=""):
        led.add(tid, suite, params, 0j, 0j if ok else 1, 0.0 if ok else 1.0, 0.0)

    # T o pi* = id and T(pi*(f) p_S) = 0
    fs = [cole.random_base(None, rng, atoms) for _ in range(R)]
    ok = all(cole.T_op(cole.pistar(f, ctx)) == f for f in fs)
    exact_row("cole/T-pistar-identity", "cole-identity", ok, format_params(samples=R))
    ok = all(cole.T_op(cole.monomial(ctx, fs[S % len(fs)], S)).is_zero()
             for S in range(1, 2 ** k))
    exact_row("cole/T-kills-monomials", "cole-identity", ok, format_params(masks=2 ** k - 1))

    # ring axioms on normal forms
    bad_assoc = bad_comm = 0
    for _ in range(R):
        a, b, c = rand(), rand(), rand()
        bad_assoc += cole.mul(cole.mul(a, b), c) != cole.mul(a, cole.mul(b, c))
        bad_comm += cole.mul(a, b) != cole.mul(b, a)
    exact_row("cole/mul-associative", "cole-ring", bad_assoc == 0, format_params(samples=R))
    exact_row("cole/mul-commutative", "cole-ring", bad_comm == 0, format_params(samples=R))
    one = cole.ExtensionElement.one(ctx)
    exact_row("cole/mul-unit", "cole-ring", all(cole.mul(a, one) == a for a in
                                                (rand() for _ in range(R))))

    # evaluation is a homomorphism; fiber averages equal T
    worst = 0.0
    for x in samples:
        for pt in cole.fiber_of(x, ctx)[:4]:
            a, b = rand(), rand()
            lhs = cole.eval_ext(cole.mul(a, b), pt)
            rhs = cole.eval_ext(a, pt) * cole.eval_ext(b, pt)
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    led.add("cole/eval-mul", "cole-eval", format_params(points=len(samples)), 0j, worst, worst, exact)
    worst = 0.0
    for x in samples:
        a = rand()
        avg = cole.fiber_average(a, cole.ExtensionPoint(complex(x)))
        ta = complex(cole.T_op(a)(complex(x)))
        worst = max(worst, abs(avg - ta) / max(1.0, abs(ta)))
    led.add("cole/fiber-average", "cole-eval", format_params(points=len(samples), family=k),
            0j, worst, worst, exact)

    # multiplicativity on the hull
    worst, sym_ok = 0.0, True
    for _ in range(R):
        res = cole.multiplicativity_residual(rand(), rand(), [x0])
        worst = max(worst, res.residual)
        sym_ok &= res.symbolic_ok
    led.add("cole/multiplicativity-at-hull", "cole-hull", format_params(pairs=R), 0j, worst,
            worst, exact)
    exact_row("cole/multiplicativity-symbolic", "cole-hull", sym_ok, format_params(pairs=R))
    fib = cole.fiber_of(x0, ctx)
    led.add("cole/fiber-over-hull", "cole-hull", format_params(x=str(x0)), 1, len(fib),
            abs(len(fib) - 1), 0.0)
    worst = 0.0
    for x in samples:
        a = rand()
        worst = max(worst, 0.0 if cole.norm_contraction_check(a, [x]) else 1.0)
    exact_row("cole/norm-contraction", "cole-eval", worst == 0.0, format_params(points=len(samples)))

    # two-level tower
    tower = cole.tower_start(members, hull)
    base_ctx = tower.contexts[0]
    nxt = [cole.p_root(base_ctx, 0), cole.pistar(members[0], base_ctx) * cole.p_root(base_ctx, 1)
           if k > 1 else cole.pistar(members[0], base_ctx)]
    tower = cole.tower_extend(tower, nxt)
    T02, T01, T12 = cole.tower_T(tower, 0, 2), cole.tower_T(tower, 0, 1), cole.tower_T(tower, 1, 2)
    els = [cole.random_element(tower.contexts[1], rng, 3, atoms) for _ in range(R)]
    exact_row("tower/T02=T01oT12", "cole-tower", all(T02(e) == T01(T12(e)) for e in els),
              format_params(samples=R))
    exact_row("tower/Taa=id", "cole-tower", all(cole.tower_T(tower, 2, 2)(e) == e for e in els))
    P02 = cole.tower_pistar(tower, 0, 2)
    exact_row("tower/T02oP02=id", "cole-tower", all(T02(P02(f)) == f for f in fs))
    fib2 = cole.tower_fiber(tower, x0)
    led.add("tower/fiber-over-hull", "cole-tower", format_params(x=str(x0)), 1, len(fib2),
            abs(len(fib2) - 1), 0.0)

    # square roots
    for i, f in enumerate(base_ctx.family):
        h = cole.square_root_check(tower, 0, f)
        ok = cole.mul(h, h) == cole.pistar(f, base_ctx) and cole.T_op(h).is_zero()
        exact_row(f"sqrt/level0/{i}", "cole-sqrt", ok)
    for i, f in enumerate(tower.contexts[1].family):
        h = cole.square_root_check(tower, 1, f)
        ok = cole.mul(h, h) == cole.ExtensionElement(tower.contexts[1], {0: f})
        exact_row(f"sqrt/level1/{i}", "cole-sqrt", ok and cole.T_op(h).is_zero())
    worst = 0.0
    h = cole.p_root(base_ctx, 0)
    for x in samples:
        fx = complex(base_ctx.family[0](complex(x)))
        for pt in cole.fiber_of(x, base_ctx):
            worst = max(worst, abs(cole.eval_ext(h, pt) ** 2 - fx) / max(1.0, abs(fx)))
    led.add("sqrt/pointwise", "cole-sqrt", format_params(points=len(samples)), 0j, worst, worst, exact)
    return led


def _cole_sample_points(plan: CheesePlan, rng, count: int) -> list[complex]:
    outer, holes = plan.limit_region()
    from .geometry import points_in_region
    out: list[complex] = []
    while len(out) < count:
        z = 0.95 * np.sqrt(rng.random(4 * count)) * np.exp(2j * np.pi * rng.random(4 * count))
        z = z[points_in_region(outer, holes, z)]
        out.extend(complex(v) for v in z[: count - len(out)])
    return out
