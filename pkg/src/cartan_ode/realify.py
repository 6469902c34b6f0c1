"""From two-symmetry CR structures to point classes of ODEs.

The CR structure is ``lambda = du + f(y) dx``, ``mu = dx + i dy``,
``mubar = dx - i dy`` with ``i`` a nonzero real constant.  Substituting
``x = xb + i yb`` and then ``X = xb``, ``Y = ub + i F(yb)``, ``P = -f(yb)``
(``F' = f``) brings the forms into the shape of an ODE class.
"""

from __future__ import annotations

from dataclasses import dataclass

import sympy as sp

from .errors import DegenerateError, PreconditionError
from .exterior import Chart, DifferentialForm, d, pullback
from .expr import ExprLike, ZeroTest, as_expr, is_zero, sample_points, simplify
from .fefferman import fefferman_metric
from .jet import OdeProblem, w1, w2
from .symbols import P, X, Y, i, p, x, y
from .tensors import MetricField

u = sp.Symbol("u")
ub, xb, yb = sp.symbols("ubar xbar ybar")
CR_CHART = Chart((u, x, y))
BAR_CHART = Chart((ub, xb, yb))
DUAL_CHART = Chart((X, Y, P))
F = sp.Function("F")  # antiderivative of f
finv = sp.Function("finv")  # inverse of f, used when no closed form exists


@dataclass(frozen=True)
class CrTwoSymmetry:
    f: sp.Expr  # expression in y

    def __post_init__(self):
        f = as_expr(self.f)
        if f.free_symbols - {y, sp.Symbol("n")}:  # n: exponent of the power law
            raise ValueError("f must depend on y only")
        if sp.diff(f, y) == 0:
            raise DegenerateError("f must not be constant")
        object.__setattr__(self, "f", f)

    def forms(self) -> tuple[DifferentialForm, DifferentialForm, DifferentialForm]:
        ch = CR_CHART
        return (
            ch.d(u) + self.f * ch.d(x),
            ch.d(x) + i * ch.d(y),
            ch.d(x) - i * ch.d(y),
        )


_T = sp.Dummy("T", positive=True)  # stands for the positive base -P/c


def _inverse(f: sp.Expr) -> tuple[sp.Expr, bool]:
    """``f^{-1}(-P)`` and whether it is a closed form.

    For ``f = c y^e`` the result is ``T^(1/e)`` with a positive dummy ``T``
    that is replaced by ``-P/c`` only after powers have been combined.
    """
    t = sp.Dummy("t")
    c, rest = f.as_coeff_Mul()
    if rest.is_Pow and rest.base == y and not rest.exp.has(y):
        return _T ** (1 / rest.exp), True
    if rest == y:
        return -P / c, True
    try:
        sols = sp.solve(sp.Eq(f.subs(y, t), -P), t)
    except NotImplementedError:
        sols = []
    if len(sols) == 1:
        return sols[0], True
    return finv(-P), False


@dataclass(frozen=True)
class Realification:
    Q: sp.Expr  # right side in (X, Y, P)
    forms: tuple  # (lambda, mu, mubar) on the (X, Y, P) chart, before normalization
    closed_form: bool  # False when an opaque inverse of f was used

    def problem(self) -> OdeProblem:
        return OdeProblem(self.Q.subs({X: x, Y: y, P: p}, simultaneous=True))


def _express_in(form: DifferentialForm, basis: list[DifferentialForm]) -> list:
    """Coefficients of a 1-form in a basis of 1-forms on the same chart."""
    M = sp.Matrix([b.coefficient_vector() for b in basis]).T
    return list(M.LUsolve(sp.Matrix(form.coefficient_vector())))


def _check_monotone(f: sp.Expr, k: int = 8, seed: int = 0) -> None:
    """``f'`` keeps one sign in ``y > 0`` at sampled values of the other symbols."""
    fp = sp.diff(f, y)
    if is_zero(fp).value:
        raise PreconditionError("f is constant")
    others = sorted(fp.free_symbols - {y}, key=lambda s: s.name)
    params = [{}]
    if others:
        params = [pt for pt, _ in sample_points([sp.Add(*others), fp.subs(y, 1)], 4, seed)]
    for fixed in params:
        fixed = {s: fixed[s] for s in others}
        signs = {v > 0 for _, (v,) in sample_points([fp], k, seed, {y: (0, None)}, fixed=fixed)}
        if len(signs) > 1:
            raise PreconditionError("f is not monotone on y > 0")


_fo = sp.Function("f")
_fp = sp.Symbol("fprime")


def realify(cr: CrTwoSymmetry, check_monotone: bool = True) -> Realification:
    """Run the substitution chain and read off ``Y'' = Q(X, Y, Y')``.

    Without a closed-form inverse the chain runs with ``f`` opaque, so that
    ``f(f^-1(-P)) = -P`` is applied structurally; ``f'`` is then evaluated
    at ``finv(-P)``.
    """
    if check_monotone:
        _check_monotone(cr.f)
    yval, closed = _inverse(cr.f)
    if closed:
        return _realify(cr, yval)
    opaque = _realify(CrTwoSymmetry(_fo(y)), None)
    fprime = sp.diff(cr.f, y).subs(y, finv(-P))
    sub = lambda e: simplify(e.subs(_fp, fprime))
    forms = tuple(w.map_coeffs(sub) for w in opaque.forms)
    return Realification(sub(opaque.Q), forms, False)


def _realify(cr: CrTwoSymmetry, yval) -> Realification:
    f = cr.f
    lam, mu, mubar = cr.forms()
    chain = {u: ub, y: yb, x: xb + i * yb}
    lam, mu, mubar = (pullback(chain, w, BAR_CHART) for w in (lam, mu, mubar))

    fb = f.subs(y, yb)
    new = {X: xb, Y: ub + i * F(yb), P: -fb}
    dnew = [d(new[v], BAR_CHART).subs({sp.Derivative(F(yb), yb): fb}) for v in (X, Y, P)]
    # coefficients in dX, dY, dP as functions of (ub, xb, yb)
    lam_c, mu_c, mubar_c = (_express_in(w, dnew) for w in (lam, mu, mubar))

    if yval is None:
        # opaque f: f(yb) = -P and f'(yb) = fprime at yb = finv(-P)
        back = {sp.Derivative(_fo(yb), yb): _fp, _fo(yb): -P}
    else:
        back = {yb: yval, xb: X}
    base_T = -P / f.as_coeff_Mul()[0]

    def combine(e):
        # (T^a)^b = T^(a b) for T > 0 and real exponents
        e = e.replace(
            lambda z: z.is_Pow and z.base.is_Pow and z.base.base == _T,
            lambda z: _T ** sp.expand(z.base.exp * z.exp),
        )
        return sp.powsimp(e).subs(_T, base_T)

    def to_dual(cs):
        out = [simplify(combine(c.subs(back).subs({yb: finv(-P), xb: X}))) for c in cs]
        if any(c.has(ub) for c in out):
            raise AssertionError("coefficients still depend on ubar")
        return DUAL_CHART.one_form(dict(zip((X, Y, P), out)))

    lam_d, mu_d, mubar_d = to_dual(lam_c), to_dual(mu_c), to_dual(mubar_c)
    # lambda must be a multiple of dY - P dX
    a = lam_d.coeff(Y)
    if not (lam_d - a * (DUAL_CHART.d(Y) - P * DUAL_CHART.d(X))).simplify().is_zero():
        raise AssertionError("lambda is not a multiple of dY - P dX")
    base = DUAL_CHART.d(Y) - P * DUAL_CHART.d(X)
    mu_r = (mu_d - mu_d.coeff(Y) * base).simplify()
    A, C = mu_r.coeff(X), mu_r.coeff(P)
    if is_zero(C).value:
        raise DegenerateError("mu has no dP component")
    Q = simplify(-A / C)
    return Realification(Q, (lam_d, mu_d, mubar_d), True)


def power_law_rhs(n: ExprLike) -> sp.Expr:
    """``(n / 2i) (-P)^(1 - 1/n)``, the class of ``f = y^n``."""
    n = as_expr(n)
    return n / (2 * i) * (-P) ** (1 - 1 / n)


# -- h(p) family ---------------------------------------------------------------


def _h(h: ExprLike) -> sp.Expr:
    h = as_expr(h, functions={"h": (p,)})
    if h.free_symbols - {p}:
        stray = h.free_symbols - {p}
        if any(s in (x, y) for s in stray):
            raise ValueError("h must depend on p only")
    return h


def h_family_invariants(h: ExprLike) -> tuple[sp.Expr, sp.Expr]:
    """``(h^2 h'''', h'''')`` for ``y'' = h(y')``."""
    h = _h(h)
    h4 = sp.diff(h, p, 4)
    return simplify(h**2 * h4), simplify(h4)


def h_family_crosscheck(h: ExprLike) -> ZeroTest:
    """Compare the closed forms with the general invariants of ``Q = h``."""
    h = _h(h)
    W1, W2 = h_family_invariants(h)
    prob = OdeProblem(h)
    t1 = is_zero(W1 - w1(prob))
    if not t1.value:
        return t1
    return is_zero(W2 - w2(prob))


def h_family_metric(h: ExprLike, rho: ExprLike = 1, keep_i: bool = False) -> MetricField:
    return fefferman_metric(OdeProblem(_h(h)), as_expr(rho), keep_i)


def bach_family_residual(h: ExprLike, a: ExprLike, b: ExprLike) -> sp.Expr:
    """``h^2 h'''' - (a p + b)``."""
    h = _h(h)
    return simplify(h**2 * sp.diff(h, p, 4) - (as_expr(a) * p + as_expr(b)))


def explicit_n3_metric(keep_i: bool = False) -> MetricField:
    """Conformal representative for ``f = y^(-3)`` on ``(X, Y, P, Phi)``."""
    iv = i if keep_i else sp.Integer(1)
    Phi = sp.Symbol("Phi")
    ch = Chart((X, Y, P, Phi))
    P23 = P ** sp.Rational(2, 3)

    def sym(a, b):
        va, vb = sp.Matrix(a.coefficient_vector()), sp.Matrix(b.coefficient_vector())
        return (va * vb.T + vb * va.T) / 2

    lam = ch.d(Y) - P * ch.d(X)
    g = 2 * sym(iv * P23 * ch.d(P) + sp.Rational(3, 2) * P**2 * ch.d(X), ch.d(X)) - 2 * sym(
        lam,
        sp.Rational(2, 3) * iv**2 * P23 * ch.d(Phi) - sp.Rational(1, 9) * ch.d(Y) - sp.Rational(11, 9) * P * ch.d(X),
    )
    return MetricField((X, Y, P, Phi), g)
