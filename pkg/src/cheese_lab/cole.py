"""Finite root extensions.

An ``F``-extension adjoins, for every ``f`` in a finite family ``F``, a function
``p_f`` with ``p_f**2 = f o pi``.  Elements are kept in normal form

    a = sum over subsets S of F of  pi*(a_S) * prod_{f in S} p_f

with subsets encoded as bit masks.  Base coefficients ``a_S`` live in the ring
one level down: :class:`Poly` (polynomials in :class:`BaseFunction` atoms) at the
bottom of a tower, :class:`ExtensionElement` above it.  ``T`` returns the
empty-set coefficient, which equals the average of ``a`` over the ``2^|F|`` sign
vectors of a fiber.
"""
from __future__ import annotations

import cmath
import functools
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Number
from typing import Callable, Iterable, Sequence

import numpy as np

from .functions import BaseFunction, Constant, Product, Scale, Sum

MAX_FAMILY = 12
MAX_DEPTH = 4
HULL_TOL = 1e-12


class ExtensionError(ValueError):
    pass


def principal_sqrt(w: complex) -> complex:
    """Principal root; the negative real axis maps to the positive imaginary axis."""
    w = complex(w)
    if w.imag == 0:
        w = complex(w.real, 0.0)
    return cmath.sqrt(w)


# ---------------------------------------------------------------- Poly

@functools.lru_cache(maxsize=None)
def _atom_key(atom: BaseFunction) -> str:
    return repr(atom)


class Poly:
    """Polynomial with exact numeric coefficients in :class:`BaseFunction` atoms.

    A monomial is a sorted tuple of ``(atom, power)`` pairs; the empty tuple is 1.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms = {m: c for m, c in (terms or {}).items() if c != 0}

    @classmethod
    def const(cls, c) -> "Poly":
        return cls({(): c})

    @classmethod
    def atom(cls, f: BaseFunction, coeff=1) -> "Poly":
        return cls({((f, 1),): coeff})

    @staticmethod
    def zero() -> "Poly":
        return Poly()

    @staticmethod
    def one() -> "Poly":
        return Poly({(): 1})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, Number):
            other = Poly.const(other)
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        other = _poly(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_poly(other))

    def __rsub__(self, other):
        return _poly(other) - self

    def __mul__(self, other):
        if isinstance(other, Number):
            return Poly({m: c * other for m, c in self.terms.items()})
        other = _poly(other)
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def atoms(self) -> set:
        return {a for m in self.terms for a, _ in m}

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        cache = {a: a(z) for a in self.atoms()}
        total = np.zeros(z.shape, dtype=complex)
        for m, c in self.terms.items():
            v = np.full(z.shape, complex(c), dtype=complex)
            for a, p in m:
                v = v * cache[a] ** p
            total = total + v
        return complex(total) if total.ndim == 0 else total

    def evaluate(self, point) -> complex:
        x = point.x if isinstance(point, ExtensionPoint) else point
        return complex(self(complex(x)))

    def to_function(self) -> BaseFunction:
        terms = []
        for m, c in sorted(self.terms.items(), key=lambda t: _mono_repr(t[0])):
            factors = tuple(a for a, p in m for _ in range(p))
            body = Constant(1.0) if not factors else (factors[0] if len(factors) == 1 else Product(factors))
            terms.append(Scale(complex(c), body))
        if not terms:
            return Constant(0j)
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{c}*{_mono_repr(m) or '1'}" for m, c in
                          sorted(self.terms.items(), key=lambda t: _mono_repr(t[0])))


def _poly(x) -> Poly:
    if isinstance(x, Poly):
        return x
    if isinstance(x, Number):
        return Poly.const(x)
    if isinstance(x, BaseFunction):
        return Poly.atom(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to Poly")


def _mono_repr(m) -> str:
    return "*".join(_atom_key(a) + (f"^{p}" if p > 1 else "") for a, p in m)


@functools.lru_cache(maxsize=65536)
def _mono_mul(m1, m2):
    powers: dict = {}
    for a, p in itertools.chain(m1, m2):
        powers[a] = powers.get(a, 0) + p
    return tuple(sorted(powers.items(), key=lambda t: _atom_key(t[0])))


# ---------------------------------------------------------------- points

@dataclass(frozen=True)
class ExtensionPoint:
    """Base point ``x`` plus one sign vector per tower level."""

    x: complex
    sigmas: tuple[tuple[int, ...], ...] = ()

    def truncate(self, level: int) -> "ExtensionPoint":
        return ExtensionPoint(self.x, self.sigmas[:level])

    @property
    def level(self) -> int:
        return len(self.sigmas)


# ---------------------------------------------------------------- contexts

@dataclass(eq=False)
class ExtensionContext:
    """One extension step: the family ``F`` (elements of the ring below) and the hull."""

    family: tuple
    below: "ExtensionContext | None" = None
    hull: tuple[complex, ...] = ()
    _products: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.family:
            raise ExtensionError("family must be nonempty")
        if len(self.family) > MAX_FAMILY:
            raise ExtensionError(f"family size capped at {MAX_FAMILY}")
        if self.level > MAX_DEPTH:
            raise ExtensionError(f"tower depth capped at {MAX_DEPTH}")

    @property
    def level(self) -> int:
        return 1 if self.below is None else self.below.level + 1

    @property
    def size(self) -> int:
        return len(self.family)

    def base_zero(self):
        return Poly.zero() if self.below is None else ExtensionElement(self.below, {})

    def base_one(self):
        return Poly.one() if self.below is None else ExtensionElement.one(self.below)

    def family_product(self, mask: int):
        """``prod_{f in mask} f`` in the ring below (cached)."""
        if mask not in self._products:
            out = self.base_one()
            for i in range(self.size):
                if mask >> i & 1:
                    out = out * self.family[i]
            self._products[mask] = out
        return self._products[mask]

    def family_values(self, point: ExtensionPoint) -> list[complex]:
        below = point.truncate(self.level - 1)
        return [_evaluate(f, below) for f in self.family]


def _evaluate(elem, point: ExtensionPoint) -> complex:
    if isinstance(elem, Poly):
        return complex(elem(complex(point.x)))
    return elem.evaluate(point)


# ---------------------------------------------------------------- elements

class ExtensionElement:
    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: ExtensionContext, coeffs: dict):
        self.ctx = ctx
        self.coeffs = {S: c for S, c in coeffs.items() if not c.is_zero()}

    @classmethod
    def one(cls, ctx: ExtensionContext) -> "ExtensionElement":
        return cls(ctx, {0: ctx.base_one()})

    def is_zero(self) -> bool:
        return not self.coeffs

    def _check(self, other: "ExtensionElement"):
        if not isinstance(other, ExtensionElement) or other.ctx is not self.ctx:
            raise ExtensionError("elements belong to different extension contexts")

    def _lift(self, other):
        if isinstance(other, ExtensionElement) and other.ctx is self.ctx:
            return other
        if isinstance(other, Number):
            return ExtensionElement(self.ctx, {0: self.ctx.base_one() * other})
        if isinstance(other, ExtensionElement) or isinstance(other, Poly):
            # an element of the ring below
            if isinstance(other, Poly) and self.ctx.below is not None:
                raise ExtensionError("context mismatch")
            if isinstance(other, ExtensionElement) and other.ctx is not self.ctx.below:
                raise ExtensionError("context mismatch")
            return ExtensionElement(self.ctx, {0: other})
        raise ExtensionError(f"cannot combine with {type(other).__name__}")

    def __eq__(self, other):
        if not isinstance(other, ExtensionElement) or other.ctx is not self.ctx:
            return False
        return self.coeffs == other.coeffs

    __hash__ = None

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.coeffs)
        for S, c in other.coeffs.items():
            out[S] = out[S] + c if S in out else c
        return ExtensionElement(self.ctx, out)

    __radd__ = __add__

    def __neg__(self):
        return ExtensionElement(self.ctx, {S: -c for S, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __mul__(self, other):
        if isinstance(other, Number):
            return ExtensionElement(self.ctx, {S: c * other for S, c in self.coeffs.items()})
        return mul(self, self._lift(other))

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self * other
        return mul(self._lift(other), self)

    def evaluate(self, point: ExtensionPoint) -> complex:
        return eval_ext(self, point)

    def __repr__(self):
        return "{" + ", ".join(f"{S:b}: {c!r}" for S, c in sorted(self.coeffs.items())) + "}"


def pistar(f, ctx: ExtensionContext) -> ExtensionElement:
    """Embed a base element as ``f o pi`` (single coefficient at the empty set)."""
    if isinstance(f, BaseFunction):
        f = Poly.atom(f)
    return ExtensionElement(ctx, {0: f})


def p_root(ctx: ExtensionContext, i: int) -> ExtensionElement:
    """The adjoined square root ``p_f`` of the ``i``-th family member."""
    if not 0 <= i < ctx.size:
        raise ExtensionError(f"family index {i} out of range")
    return ExtensionElement(ctx, {1 << i: ctx.base_one()})


def monomial(ctx: ExtensionContext, coeff, mask: int) -> ExtensionElement:
    if isinstance(coeff, BaseFunction):
        coeff = Poly.atom(coeff)
    return ExtensionElement(ctx, {mask: coeff})


def mul(a: ExtensionElement, b: ExtensionElement) -> ExtensionElement:
    """Bilinear extension of ``p_S p_T = pi*(prod_{S & T} f) p_{S ^ T}``."""
    a._check(b)
    ctx = a.ctx
    out: dict = {}
    for S, ca in a.coeffs.items():
        for T, cb in b.coeffs.items():
            c = ca * cb
            common = S & T
            if common:
                c = c * ctx.family_product(common)
            key = S ^ T
            out[key] = out[key] + c if key in out else c
    return ExtensionElement(ctx, out)


def T_op(a: ExtensionElement):
    """Projection onto the embedded base ring: the empty-set coefficient."""
    return a.coeffs.get(0, a.ctx.base_zero())


def eval_ext(a: ExtensionElement, point: ExtensionPoint) -> complex:
    ctx = a.ctx
    if point.level < ctx.level:
        raise ExtensionError(f"point of level {point.level} cannot evaluate a level-{ctx.level} element")
    below = point.truncate(ctx.level - 1)
    sigma = point.sigmas[ctx.level - 1]
    roots = [s * principal_sqrt(v) for s, v in zip(sigma, ctx.family_values(point))]
    total = 0j
    for S, c in a.coeffs.items():
        term = _evaluate(c, below)
        for i in range(ctx.size):
            if S >> i & 1:
                term *= roots[i]
        total += term
    return total


def sign_vectors(k: int) -> Iterable[tuple[int, ...]]:
    return itertools.product((1, -1), repeat=k)


def signed_values(a: ExtensionElement, point_below: ExtensionPoint) -> np.ndarray:
    """Values of ``a`` at every sign vector above ``point_below``, in :func:`sign_vectors` order.

    Coefficients and roots are evaluated once; the ``2^|F|`` signed sums are then formed
    with array arithmetic.
    """
    ctx = a.ctx
    k = ctx.size
    below = point_below.truncate(ctx.level - 1)
    roots = np.array([principal_sqrt(_evaluate(f, below)) for f in ctx.family])
    sigma = np.array(list(sign_vectors(k)), dtype=float).reshape(-1, k)
    total = np.zeros(len(sigma), dtype=complex)
    for S, c in a.coeffs.items():
        cols = [i for i in range(k) if S >> i & 1]
        term = np.full(len(sigma), _evaluate(c, below), dtype=complex)
        for i in cols:
            term = term * (sigma[:, i] * roots[i])
        total += term
    return total


def fiber_average(a: ExtensionElement, point_below: ExtensionPoint) -> complex:
    """Average of ``a`` over all ``2^|F|`` sign vectors above a point of the level below."""
    return complex(np.mean(signed_values(a, point_below)))


def fiber_of(x, ctx: ExtensionContext) -> list[ExtensionPoint]:
    """Distinct points over ``x`` (a complex base point or a point one level below)."""
    below_pts = [ExtensionPoint(complex(x))] if not isinstance(x, ExtensionPoint) else [x]
    if ctx.below is not None and not isinstance(x, ExtensionPoint):
        below_pts = fiber_of(x, ctx.below)
    out = []
    for q in below_pts:
        vals = [_evaluate(f, q) for f in ctx.family]
        choices = [(1, -1) if v != 0 else (1,) for v in vals]
        for s in itertools.product(*choices):
            out.append(ExtensionPoint(q.x, q.sigmas + (tuple(s),)))
    return out


# ---------------------------------------------------------------- families and identities

def vanishes_on(f, hull: Sequence[complex], tol: float = HULL_TOL) -> bool:
    return all(abs(_evaluate(f, ExtensionPoint(complex(x)))) <= tol for x in hull) if isinstance(f, Poly) \
        else all(abs(f(complex(x))) <= tol for x in hull)


def make_context(family: Sequence, hull: Sequence[complex] = (), below: ExtensionContext | None = None,
                 check_hull: bool = True) -> ExtensionContext:
    """Family members may be BaseFunctions (wrapped as atoms) or ring elements of the level below."""
    fam = tuple(Poly.atom(f) if isinstance(f, BaseFunction) else f for f in family)
    if below is None and check_hull:
        for f in fam:
            if not vanishes_on(f, hull):
                raise ExtensionError(f"family member {f!r} does not vanish on the hull")
    return ExtensionContext(fam, below, tuple(complex(x) for x in hull))


@dataclass(frozen=True)
class MultiplicativityResult:
    residual: float
    symbolic_ok: bool


def multiplicativity_residual(a: ExtensionElement, b: ExtensionElement,
                              hull: Sequence[complex]) -> MultiplicativityResult:
    """``max_x in E |T(ab)(x) - (Ta)(x)(Tb)(x)|`` plus a structural check: every
    monomial of ``T(ab) - (Ta)(Tb)`` contains a family member (bottom level only)."""
    diff = T_op(mul(a, b)) - T_op(a) * T_op(b)
    res = max((abs(_evaluate(diff, ExtensionPoint(complex(x))) if isinstance(diff, Poly)
                   else abs(diff.evaluate(_hull_point(diff.ctx, x))))
               for x in hull), default=0.0)
    # T(ab) - T(a)T(b) must equal sum over nonempty S of a_S b_S prod_{f in S} f
    ctx = a.ctx
    expected = ctx.base_zero()
    for S, ca in a.coeffs.items():
        if S and S in b.coeffs:
            expected = expected + ca * b.coeffs[S] * ctx.family_product(S)
    symbolic = diff == expected
    return MultiplicativityResult(float(res), symbolic)


def _hull_point(ctx: ExtensionContext, x) -> ExtensionPoint:
    pts = fiber_of(complex(x), ctx)
    return pts[0]


def norm_contraction_check(a: ExtensionElement, xs: Sequence[complex], slack: float = 1e-12) -> bool:
    """``sup |T a| <= sup |a|`` over the sampled base points and their fibers."""
    Ta = T_op(a)
    lhs = rhs = 0.0
    for x in xs:
        below = fiber_of(x, a.ctx.below) if a.ctx.below is not None else [ExtensionPoint(complex(x))]
        for q in below:
            lhs = max(lhs, abs(_evaluate(Ta, q)))
            # repeated sign vectors over vanishing members give repeated values only
            rhs = max(rhs, float(np.max(np.abs(signed_values(a, q)))))
    return lhs <= rhs * (1 + slack) + slack


# ---------------------------------------------------------------- towers

@dataclass
class Tower:
    """Finite system of root extensions; ``contexts[k]`` builds level ``k+1`` from level ``k``."""

    hull: tuple[complex, ...]
    contexts: list[ExtensionContext] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.contexts)

    def context(self, level: int) -> ExtensionContext | None:
        """Context whose elements live at ``level`` (None for the base ring)."""
        return None if level == 0 else self.contexts[level - 1]


def tower_start(family: Sequence, hull: Sequence[complex]) -> Tower:
    ctx = make_context(family, hull)
    return Tower(tuple(complex(x) for x in hull), [ctx])


def tower_extend(t: Tower, family_next: Sequence[ExtensionElement]) -> Tower:
    """Add a level whose family is drawn from the lifted ideal ``T^-1(I)``: the
    level-0 image of each member must vanish on the hull."""
    if t.depth >= MAX_DEPTH:
        raise ExtensionError(f"tower depth capped at {MAX_DEPTH}")
    top = t.contexts[-1]
    to_base = tower_T(t, 0, t.depth)
    for f in family_next:
        if not isinstance(f, ExtensionElement) or f.ctx is not top:
            raise ExtensionError("next family must consist of top-level elements")
        if not vanishes_on(to_base(f), t.hull):
            raise ExtensionError(f"member {f!r} is not in the lifted ideal")
    ctx = ExtensionContext(tuple(family_next), top, t.hull)
    return Tower(t.hull, t.contexts + [ctx])


def tower_T(t: Tower, alpha: int, beta: int) -> Callable:
    if not 0 <= alpha <= beta <= t.depth:
        raise ExtensionError(f"need 0 <= alpha <= beta <= {t.depth}")

    def op(a):
        for _ in range(beta - alpha):
            a = T_op(a)
        return a
    return op


def tower_pistar(t: Tower, alpha: int, beta: int) -> Callable:
    if not 0 <= alpha <= beta <= t.depth:
        raise ExtensionError(f"need 0 <= alpha <= beta <= {t.depth}")

    def op(f):
        if isinstance(f, BaseFunction):
            f = Poly.atom(f)
        for level in range(alpha + 1, beta + 1):
            f = ExtensionElement(t.context(level), {0: f})
        return f
    return op


def tower_fiber(t: Tower, x: complex, level: int | None = None) -> list[ExtensionPoint]:
    level = t.depth if level is None else level
    if level == 0:
        return [ExtensionPoint(complex(x))]
    return fiber_of(complex(x), t.context(level))


def square_root_check(t: Tower, alpha: int, f) -> ExtensionElement:
    """For ``f`` in the level-``alpha`` family, return ``h = p_f`` at level ``alpha+1``
    after checking ``h*h == pi*(f)`` and ``T(h) == 0``."""
    ctx = t.context(alpha + 1)
    if ctx is None:
        raise ExtensionError(f"tower has no level {alpha + 1}")
    try:
        i = next(k for k, g in enumerate(ctx.family) if g == f)
    except StopIteration:
        raise ExtensionError("f is not a member of the family") from None
    h = p_root(ctx, i)
    if mul(h, h) != ExtensionElement(ctx, {0: ctx.family[i]}):
        raise ExtensionError("h*h differs from pi*(f)")
    if not T_op(h).is_zero():
        raise ExtensionError("T(h) is not zero")
    return h


def random_element(ctx: ExtensionContext, rng: np.random.Generator, terms: int = 3,
                   atoms: Sequence[BaseFunction] = (), coeff_range: int = 5) -> ExtensionElement:
    """Random normal form with small integer coefficients (exact arithmetic)."""
    coeffs: dict = {}
    for _ in range(terms):
        mask = int(rng.integers(0, 2 ** ctx.size))
        c = random_base(ctx.below, rng, atoms, coeff_range, terms)
        coeffs[mask] = coeffs[mask] + c if mask in coeffs else c
    return ExtensionElement(ctx, coeffs)


def random_base(below: ExtensionContext | None, rng, atoms, coeff_range=5, terms=3):
    if below is not None:
        return random_element(below, rng, max(1, terms - 1), atoms, coeff_range)
    out = Poly.const(Fraction(int(rng.integers(-coeff_range, coeff_range + 1))))
    for a in atoms:
        k = int(rng.integers(-coeff_range, coeff_range + 1))
        if k and rng.random() < 0.5:
            out = out + Poly.atom(a, Fraction(k))
    if out.is_zero():
        out = Poly.const(Fraction(1))
    return out
