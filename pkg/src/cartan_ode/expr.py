"""Exact expressions: normal forms, zero testing, numeric evaluation, printing.

Expressions are immutable sympy trees over rationals, coordinate symbols,
opaque function applications and their derivatives, ``exp`` and
rational-exponent powers.  Everything here is a pure function.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import lcm
from typing import Mapping, Union

import mpmath
import sympy as sp
from sympy.core.function import AppliedUndef
from sympy.polys.fields import FracField
from sympy.polys.rings import PolyRing
from sympy.polys.orderings import lex
from sympy.printing.str import StrPrinter

from .errors import (
    InvalidRadicandError,
    PoleError,
    SamplingError,
    UnboundGeneratorError,
    ZeroDenominatorError,
)
from .parser import parse
from .symbols import LATEX_NAMES, generator_key

Number = Union[Fraction, float, mpmath.mpf]
ExprLike = Union[sp.Expr, str, int, Fraction]

__all__ = [
    "NormalForm",
    "ZeroTest",
    "as_expr",
    "derivative_marker",
    "differentiate",
    "eval_numeric",
    "is_zero",
    "normalize",
    "sampled_zero_test",
    "simplify",
    "to_latex",
    "to_text",
]


def as_expr(e: ExprLike, **parse_kw) -> sp.Expr:
    """Coerce strings, ints and fractions to expressions."""
    if isinstance(e, str):
        return parse(e, **parse_kw)
    if isinstance(e, Fraction):
        return sp.Rational(e.numerator, e.denominator)
    if isinstance(e, float):
        return sp.Rational(e)
    return sp.sympify(e)


def differentiate(e: ExprLike, s: sp.Symbol, n: int = 1) -> sp.Expr:
    """Exact partial derivative; opaque functions yield derivative markers."""
    return sp.diff(as_expr(e), s, n)


def derivative_marker(name: str, args, multi_index) -> sp.Expr:
    """The derivative of the opaque function ``name(*args)``.

    ``multi_index[k]`` is the number of derivatives in the k-th argument.
    Building through ``diff`` keeps mixed partials in canonical order.
    """
    if len(multi_index) != len(args) or any(n < 0 for n in multi_index):
        raise ValueError("multi-index must be nonnegative, one entry per argument")
    orders = []
    for a, n in zip(args, multi_index):
        orders.extend([a] * n)
    f = sp.Function(name)(*args)
    return sp.diff(f, *orders) if orders else f


# ---------------------------------------------------------------------------
# Normal forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Radical:
    base: sp.Expr
    order: int  # generator is base**(1/order)


@dataclass(frozen=True)
class NormalForm:
    """``numerator/denominator`` over an ordered generator set.

    Generators are sympy atoms: symbols, function applications, derivative
    markers, ``exp(m/L)`` and ``base**(1/L)``.  The denominator is monic in
    lex order, and numerator and denominator are coprime.
    """

    gens: tuple
    numerator: object  # sympy PolyElement
    denominator: object
    radicals: tuple = field(default=(), compare=False)

    @property
    def is_zero(self) -> bool:
        return not self.numerator

    @property
    def has_radicals(self) -> bool:
        return bool(self.radicals)

    def as_expr(self) -> sp.Expr:
        num = self.numerator.as_expr(*self.gens)
        den = self.denominator.as_expr(*self.gens)
        return num / den

    def numerator_expr(self) -> sp.Expr:
        return self.numerator.as_expr(*self.gens)

    def denominator_expr(self) -> sp.Expr:
        return self.denominator.as_expr(*self.gens)

    def key(self) -> tuple:
        return (
            tuple(sp.srepr(g) for g in self.gens),
            tuple(sorted(self.numerator.items())),
            tuple(sorted(self.denominator.items())),
        )

    def __eq__(self, other):
        if not isinstance(other, NormalForm):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __str__(self):
        num, den = to_text(self.numerator_expr()), to_text(self.denominator_expr())
        return num if den == "1" else f"({num})/({den})"


def _split_exp(arg: sp.Expr) -> list[tuple[sp.Rational, sp.Expr]]:
    terms = sp.Add.make_args(sp.expand(arg))
    return [t.as_coeff_Mul() for t in terms]


class _Collector:
    """Walks an expression once, assigning every atom a generator power."""

    def __init__(self):
        self.symbols: set = set()
        self.opaque: set = set()
        self.exp_denoms: dict = {}  # monomial -> lcm of coefficient denominators
        self.rad_denoms: dict = {}  # base -> lcm of exponent denominators

    def visit(self, e):
        if e.is_Rational:
            return
        if e.is_Symbol:
            self.symbols.add(e)
        elif e.is_Add or e.is_Mul:
            for a in e.args:
                self.visit(a)
        elif isinstance(e, sp.exp):
            for c, m in _split_exp(e.args[0]):
                self.exp_denoms[m] = lcm(self.exp_denoms.get(m, 1), int(c.q))
        elif e.is_Pow:
            b, q = e.base, e.exp
            if q.is_Integer:
                self.visit(b)
            elif q.is_Rational:
                self.rad_denoms[b] = lcm(self.rad_denoms.get(b, 1), int(q.q))
                self.visit(b)
            else:
                self.opaque.add(e)
        elif e.is_Float:
            return
        elif e.is_number and not e.free_symbols and e.is_Atom:
            self.opaque.add(e)
        else:
            self.opaque.add(e)


def _float_to_rational(e):
    return e.xreplace({f: sp.Rational(f) for f in e.atoms(sp.Float)})


def _prepare(e: sp.Expr) -> sp.Expr:
    e = _float_to_rational(as_expr(e))
    return sp.expand_power_exp(e)


class _Converter:
    def __init__(self, col: _Collector):
        gens = list(col.symbols) + list(col.opaque)
        self.exp_gen = {}
        for m, L in col.exp_denoms.items():
            g = sp.exp(m / L)
            self.exp_gen[m] = (g, L)
            gens.append(g)
        self.rad_gen = {}
        for b, L in col.rad_denoms.items():
            g = sp.Pow(b, sp.Rational(1, L), evaluate=False)
            self.rad_gen[b] = (g, L)
            gens.append(g)
        gens = sorted(set(gens), key=generator_key)
        if not gens:
            gens = [sp.Symbol("_c")]
        self.gens = tuple(gens)
        self.field = FracField([sp.Dummy() for _ in gens], sp.QQ, lex)
        self.K = self.field
        self.index = {g: k for k, g in enumerate(gens)}
        self.memo: dict = {}
        self.fac_memo: dict = {}

    def gen(self, g):
        return self.K.gens[self.index[g]]

    def conv(self, e):
        hit = self.memo.get(e)
        if hit is not None:
            return hit
        out = self._conv(e)
        self.memo[e] = out
        return out

    def _conv(self, e):
        K = self.K
        if e.is_Rational:
            return K(sp.QQ(int(e.p), int(e.q)))
        if e.is_Add:
            return self._sum([self.conv(a) for a in e.args])
        if e.is_Mul:
            return reduce(lambda a, b: a * b, (self.conv(a) for a in e.args))
        if isinstance(e, sp.exp):
            out = K.one
            for c, m in _split_exp(e.args[0]):
                g, L = self.exp_gen[m]
                k = int(c * L)
                out *= self.gen(g) ** k if k >= 0 else K.one / self.gen(g) ** (-k)
            return out
        if e.is_Pow and e.exp.is_Integer:
            base = self.conv(e.base)
            k = int(e.exp)
            if k >= 0:
                return base**k
            if not base:
                raise ZeroDenominatorError("division by an identically zero expression")
            return K.one / base ** (-k)
        if e.is_Pow and e.exp.is_Rational:
            g, L = self.rad_gen[e.base]
            k = int(e.exp * L)
            return self.gen(g) ** k if k >= 0 else K.one / self.gen(g) ** (-k)
        return self.gen(e)

    def _factors(self, den) -> tuple:
        """``den = c * prod(f**k)`` with monic irreducible ``f``, memoized."""
        hit = self.fac_memo.get(den)
        if hit is None:
            c, fl = den.factor_list()
            fac: dict = {}
            for f, k in fl:
                lc = f.LC
                c *= lc**k
                f = f.quo_ground(lc)
                fac[f] = fac.get(f, 0) + k
            hit = self.fac_memo[den] = (c, fac)
        return hit

    def _sum(self, terms):
        """Sum over the lcm of the factored denominators.

        Pairwise addition takes a multivariate gcd after every step, which
        is slow once numerators grow; here the lcm comes from the factors
        and the final cancellation is trial division by each factor.
        """
        groups: dict = {}
        for t in terms:
            groups[t.denom] = groups.get(t.denom, 0) + t.numer
        if len(groups) == 1:
            (den, num), = groups.items()
            return self.K.new(num, den)
        R = self.K.ring
        top: dict = {}
        parts = []
        for d, n in groups.items():
            c, fac = self._factors(d)
            parts.append((n.quo_ground(c), fac))
            for f, k in fac.items():
                top[f] = max(top.get(f, 0), k)
        num = R.zero
        for n, fac in parts:
            for f, k in top.items():
                if k > fac.get(f, 0):
                    n = n * f ** (k - fac.get(f, 0))
            num += n
        if not num:
            return self.K.zero
        den = R.one
        for f, k in top.items():
            while k:
                q, r = num.div(f)
                if r:
                    break
                num, k = q, k - 1
            den *= f**k
        return self.K.raw_new(num, den)

    def reduce_radicals(self, f):
        """Apply ``g**L -> base`` for each radical generator ``g``."""
        if not self.rad_gen:
            return f
        changed = True
        num, den = f.numer, f.denom
        while changed:
            changed = False
            for b, (g, L) in self.rad_gen.items():
                k = self.index[g]
                base = self.conv(b)
                num2, c1 = self._reduce_poly(num, k, L, base)
                den2, c2 = self._reduce_poly(den, k, L, base)
                if c1 or c2:
                    changed = True
                    q = num2 / den2
                    num, den = q.numer, q.denom
        return self.K.new(num, den)

    def _reduce_poly(self, poly, k, L, base):
        if all(m[k] < L for m in poly.monoms()):
            return self.K(poly), False
        out = self.K.zero
        ring = poly.ring
        for mono, c in poly.terms():
            q, rem = divmod(mono[k], L)
            m2 = list(mono)
            m2[k] = rem
            term = ring({tuple(m2): c})
            out += self.K(term) * base**q
        return out, True


def normalize(e: ExprLike) -> NormalForm:
    """Canonical rational normal form over the generator set of ``e``.

    >>> str(normalize("(p^2 - 1)/(p - 1)"))
    'p + 1'
    """
    e = _prepare(e)
    col = _Collector()
    col.visit(e)
    cv = _Converter(col)
    f = cv.reduce_radicals(cv.conv(e))
    num, den = f.numer, f.denom
    if not den:
        raise ZeroDenominatorError("division by an identically zero expression")
    lc = den.LC
    if lc != 1:
        num, den = num.quo_ground(lc), den.quo_ground(lc)
    used = set()
    for poly in (num, den):
        for mono in poly.monoms():
            used.update(k for k, d in enumerate(mono) if d)
    gens = cv.gens
    if len(used) != len(gens):
        # drop generators that cancelled so equal values give equal keys
        keep = sorted(used)
        gens = tuple(gens[k] for k in keep) or (sp.Symbol("_c"),)
        ring = PolyRing([sp.Dummy() for _ in gens], sp.QQ, lex)

        def shrink(poly):
            return ring({tuple(m[k] for k in keep) or (0,): c for m, c in poly.terms()})

        num, den = shrink(num), shrink(den)
    live = {g.base: g for g in gens if g.is_Pow}
    radicals = tuple(
        _Radical(b, L) for b, (g, L) in cv.rad_gen.items() if b in live
    )
    return NormalForm(gens, num, den, radicals)


def simplify(e: ExprLike) -> sp.Expr:
    """Expression rebuilt from its normal form (numerator/denominator)."""
    return normalize(e).as_expr()


# ---------------------------------------------------------------------------
# Zero testing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZeroTest:
    value: bool
    certainty: str  # "certified" or "probabilistic"
    k: int = 0
    seed: int | None = None
    max_residual: float = 0.0

    def __bool__(self):
        return self.value

    def as_dict(self) -> dict:
        d = {"value": self.value, "certainty": self.certainty}
        if self.certainty == "probabilistic":
            d.update(k=self.k, seed=self.seed, max_residual=self.max_residual)
        return d


BOX = 50
MAX_ATTEMPTS = 200


def random_rational(rng: random.Random, box: int = BOX, lo=None, hi=None) -> Fraction:
    """Random rational with numerator and denominator bounded by ``box``."""
    while True:
        num = rng.randint(-box, box)
        den = rng.randint(1, box)
        v = Fraction(num, den)
        if lo is not None and v <= lo:
            continue
        if hi is not None and v >= hi:
            continue
        return v


def _point_atoms(e: sp.Expr) -> set:
    """Free symbols and opaque function atoms (not their arguments)."""
    opaque = e.atoms(AppliedUndef) | e.atoms(sp.Derivative)
    stripped = e.xreplace({a: sp.Dummy() for a in opaque})
    return {s for s in stripped.free_symbols if not isinstance(s, sp.Dummy)} | opaque


def sample_points(
    exprs,
    k: int,
    seed: int = 0,
    domain: Mapping | None = None,
    box: int = BOX,
    prec: int = 50,
    fixed: Mapping | None = None,
):
    """Yield ``(point, values)`` for ``k`` admissible random rational points.

    ``exprs`` is one expression or a sequence; a point is admissible when
    every expression evaluates without a pole or an invalid radicand.

    Points hitting a pole or an invalid radicand are resampled; after
    ``MAX_ATTEMPTS`` consecutive failures a :class:`SamplingError` is raised.
    """
    rng = random.Random(seed)
    domain = dict(domain or {})
    fixed = dict(fixed or {})
    if isinstance(exprs, sp.Basic):
        exprs = [exprs]
    exprs = [as_expr(e) for e in exprs]
    atoms = sorted(set().union(*(_point_atoms(e) for e in exprs)), key=generator_key)
    atoms = [a for a in atoms if a not in fixed]
    got = 0
    failures = 0
    while got < k:
        pt = dict(fixed)
        for a in atoms:
            lo, hi = domain.get(a, (None, None))
            pt[a] = random_rational(rng, box, lo, hi)
        try:
            vals = [eval_numeric(e, pt, prec=prec) for e in exprs]
            if any(v == 0 for v in vals[1:]):
                raise PoleError("auxiliary expression vanishes")
        except (PoleError, InvalidRadicandError):
            failures += 1
            if failures > MAX_ATTEMPTS:
                raise SamplingError(
                    f"no admissible sample point after {MAX_ATTEMPTS} attempts"
                ) from None
            continue
        failures = 0
        got += 1
        yield pt, vals


def _abs_scale(poly_expr: sp.Expr, pt, prec) -> mpmath.mpf:
    total = mpmath.mpf(0)
    with mpmath.workdps(prec):
        for t in sp.Add.make_args(poly_expr):
            total += abs(_floatify(eval_numeric(t, pt, prec=prec), prec))
    return total


def is_zero(
    e: ExprLike,
    k: int = 8,
    seed: int = 0,
    tol: float = 1e-8,
    domain: Mapping | None = None,
    box: int = BOX,
) -> ZeroTest:
    """Decide ``e == 0``.

    Certified through the normal form when no algebraic relations remain
    among the generators; otherwise the normal-form numerator is sampled at
    ``k`` random rational points and compared against ``tol`` relative to
    the sum of absolute term values.
    """
    nf = normalize(e)
    if nf.is_zero:
        return ZeroTest(True, "certified")
    if not nf.has_radicals:
        return ZeroTest(False, "certified")
    num = nf.numerator_expr()
    den = nf.denominator_expr()
    worst = 0.0
    for pt, (v, _) in sample_points([num, den], k, seed, domain, box):
        v = _floatify(v, 50)
        scale = _abs_scale(num, pt, 50)
        rel = float(abs(v) / scale) if scale else float(abs(v))
        worst = max(worst, rel)
        if rel > tol:
            return ZeroTest(False, "probabilistic", k, seed, rel)
    return ZeroTest(True, "probabilistic", k, seed, worst)


def sampled_zero_test(
    e: ExprLike,
    k: int = 10,
    seed: int = 0,
    tol: float = 1e-8,
    domain: Mapping | None = None,
    box: int = BOX,
    fixed: Mapping | None = None,
) -> ZeroTest:
    """Numeric zero test without normalizing first.

    Meant for expressions too large to normalize.  Each residual is taken
    relative to the sum of absolute values of the top-level terms of ``e``.
    """
    e = as_expr(e)
    terms = sp.Add.make_args(e)
    worst = 0.0
    for pt, (v,) in sample_points([e], k, seed, domain, box, fixed=fixed):
        with mpmath.workdps(50):
            v = abs(_floatify(v, 50))
            scale = sum((abs(_floatify(eval_numeric(t, pt, prec=50), 50)) for t in terms), mpmath.mpf(0))
            rel = float(v / scale) if scale else float(v)
        worst = max(worst, rel)
        if rel > tol:
            return ZeroTest(False, "probabilistic", k, seed, rel)
    return ZeroTest(True, "probabilistic", k, seed, worst)


def nonzero_at_samples(e, k=8, seed=0, domain=None, tol=1e-8):
    """True when ``e`` is numerically nonzero at some admissible sample point."""
    return not is_zero(e, k=k, seed=seed, domain=domain, tol=tol).value


# ---------------------------------------------------------------------------
# Numeric evaluation
# ---------------------------------------------------------------------------


def _lookup(e, pt):
    if e in pt:
        return pt[e]
    name = str(e)
    if name in pt:
        return pt[name]
    raise UnboundGeneratorError(f"no value bound for {to_text(e)}")


def _to_num(v, prec):
    if isinstance(v, (Fraction, int)):
        return Fraction(v)
    if prec is not None:
        return mpmath.mpf(v)
    return float(v)


def _is_exact(v) -> bool:
    return isinstance(v, Fraction)


def _floatify(v, prec):
    if prec is not None:
        if isinstance(v, Fraction):
            return mpmath.mpf(v.numerator) / v.denominator
        return mpmath.mpf(v)
    return float(v)


def eval_numeric(e: ExprLike, pt: Mapping, prec: int | None = None) -> Number:
    """Evaluate ``e`` at ``pt``.

    The result is an exact :class:`Fraction` when every binding is rational
    and every exponent integral; otherwise a float (or an ``mpmath.mpf``
    with ``prec`` decimal digits).
    """
    e = as_expr(e)
    if prec is not None:
        with mpmath.workdps(prec):
            return _eval(e, pt, prec, {})
    return _eval(e, pt, prec, {})


def _eval(e, pt, prec, memo):
    if e in memo:
        return memo[e]
    out = _eval1(e, pt, prec, memo)
    memo[e] = out
    return out


def _eval1(e, pt, prec, memo):
    if e.is_Rational:
        return Fraction(int(e.p), int(e.q))
    if e.is_Float:
        return _floatify(float(e), prec)
    if e.is_Symbol or isinstance(e, (AppliedUndef, sp.Derivative, sp.Subs)):
        return _to_num(_lookup(e, pt), prec)
    if e.is_Add:
        vals = [_eval(a, pt, prec, memo) for a in e.args]
        if all(_is_exact(v) for v in vals):
            return sum(vals, Fraction(0))
        return sum((_floatify(v, prec) for v in vals), _floatify(0, prec))
    if e.is_Mul:
        vals = [_eval(a, pt, prec, memo) for a in e.args]
        if all(_is_exact(v) for v in vals):
            return reduce(lambda a, b: a * b, vals, Fraction(1))
        return reduce(lambda a, b: a * b, (_floatify(v, prec) for v in vals), _floatify(1, prec))
    if isinstance(e, sp.exp):
        v = _floatify(_eval(e.args[0], pt, prec, memo), prec)
        return mpmath.exp(v) if prec is not None else math.exp(v)
    if e.is_Pow:
        b = _eval(e.base, pt, prec, memo)
        q = e.exp
        if q.is_Integer:
            n = int(q)
            if b == 0 and n < 0:
                raise PoleError(f"pole of {to_text(e)}")
            if _is_exact(b):
                return b**n
            return _floatify(b, prec) ** n
        if q.is_Rational:
            if b < 0:
                raise InvalidRadicandError(f"negative base in {to_text(e)}")
            if b == 0 and q < 0:
                raise PoleError(f"pole of {to_text(e)}")
            bf = _floatify(b, prec)
            if prec is not None:
                return mpmath.power(bf, mpmath.mpf(int(q.p)) / int(q.q))
            return bf ** (int(q.p) / int(q.q))
        qv = _floatify(_eval(q, pt, prec, memo), prec)
        if b < 0:
            raise InvalidRadicandError(f"negative base in {to_text(e)}")
        return _floatify(b, prec) ** qv
    raise UnboundGeneratorError(f"cannot evaluate {to_text(e)}")


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------


class _TextPrinter(StrPrinter):
    """Prints in the input grammar so that output re-parses."""

    def _print_Pow(self, expr, rational=False):
        out = super()._print_Pow(expr, rational)
        return out.replace("**", "^")

    def _print_Derivative(self, expr):
        parts = [self._print(expr.expr)]
        for v, n in expr.variable_count:
            parts += [self._print(v), str(n)]
        return "D[%s]" % ", ".join(parts)

    def _print_Function(self, expr):
        return "%s(%s)" % (expr.func.__name__, self.stringify(expr.args, ", "))

    def _print_Exp1(self, expr):
        return "exp(1)"


_TEXT = _TextPrinter({"order": None})


def to_text(e: ExprLike) -> str:
    """Grammar-conformant text for ``e``."""
    return _TEXT.doprint(as_expr(e))


def to_latex(e: ExprLike) -> str:
    e = as_expr(e)
    names = {s: LATEX_NAMES[s.name] for s in e.free_symbols if s.name in LATEX_NAMES}
    return sp.latex(e, symbol_names=names)
