"""Dual equations: the ODE satisfied by the integration constants.

A general solution ``G(x, y, X, Y) = 0`` of ``y'' = Q(x, y, y')`` defines,
for fixed ``(x, y)``, a curve ``Y(X)``.  Those curves solve the dual
equation ``Y'' = q(X, Y, Y')``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import sympy as sp

from .errors import (
    DegenerateError,
    EliminationNotSupported,
    InvalidRadicandError,
    NotASolutionError,
    PoleError,
    PreconditionError,
)
from .expr import (
    ExprLike,
    ZeroTest,
    as_expr,
    eval_numeric,
    is_zero,
    random_rational,
    sampled_zero_test,
    simplify,
)
from .jet import OdeProblem, w1_raw, w2
from .parser import parse_relation
from .symbols import P, X, Y, p, x, y


def _to_jet(q: sp.Expr) -> sp.Expr:
    """Rename ``(X, Y, P)`` to the jet coordinates ``(x, y, p)``."""
    return q.subs({X: x, Y: y, P: p}, simultaneous=True)


def _from_jet(e: sp.Expr) -> sp.Expr:
    return e.subs({x: X, y: Y, p: P}, simultaneous=True)


@dataclass(frozen=True)
class GeneralSolution:
    """Implicit relation ``G(x, y, X, Y) = 0``; ``explicit`` keeps ``y = f`` if given."""

    G: sp.Expr
    explicit: sp.Expr | None = field(default=None, compare=False)

    @classmethod
    def parse(cls, text: str) -> "GeneralSolution":
        lhs, rhs = parse_relation(text)
        if lhs == y and y not in rhs.free_symbols:
            return cls.explicit_solution(rhs)
        return cls(sp.numer(sp.together(lhs - rhs)))

    @classmethod
    def explicit_solution(cls, f: ExprLike) -> "GeneralSolution":
        f = as_expr(f)
        num, den = sp.fraction(sp.together(f))
        return cls(sp.expand(y * den - num), f)

    def derivatives(self) -> dict:
        """Implicit derivatives of ``y`` as rational functions of ``(x, y, X, Y)``."""
        G = self.G
        Gy = sp.diff(G, y)

        def dy(v):
            return -sp.diff(G, v) / Gy

        def total(e, v):
            return sp.diff(e, v) + sp.diff(e, y) * dy(v)

        yx, yX, yY = dy(x), dy(X), dy(Y)
        return {
            "y_x": yx,
            "y_X": yX,
            "y_Y": yY,
            "y_xx": total(yx, x),
            "y_xX": total(yx, X),
            "y_xY": total(yx, Y),
        }


def _reduce_mod(expr: sp.Expr, G: sp.Expr) -> sp.Expr:
    """Numerator of ``expr`` reduced modulo ``G`` as polynomials in ``y``."""
    num = sp.numer(sp.together(expr))
    num = sp.expand(num)
    if sp.degree(G, y) <= 0:
        return num
    try:
        return sp.expand(sp.prem(num, G, y))
    except sp.PolynomialError:
        raise EliminationNotSupported("relation is not polynomial in y") from None


@dataclass(frozen=True)
class SolutionVerdict:
    solves: ZeroTest
    nondegenerate: ZeroTest


def verify_general_solution(prob: OdeProblem, sol: GeneralSolution) -> SolutionVerdict:
    """Check that ``sol`` solves ``prob`` and carries two genuine constants.

    Raises :class:`NotASolutionError` or :class:`DegenerateError`.
    """
    dv = sol.derivatives()
    if is_zero(dv["y_Y"]).value:
        raise DegenerateError("y does not depend on Y")
    residual = dv["y_xx"] - prob.Q.subs(p, dv["y_x"])
    nondeg = dv["y_X"] * dv["y_xY"] - dv["y_Y"] * dv["y_xX"]
    if sol.explicit is not None:
        sub = {y: sol.explicit}
        residual, nondeg = residual.subs(sub), nondeg.subs(sub)
        z_res, z_nd = is_zero(residual), is_zero(nondeg)
    else:
        z_res = is_zero(_reduce_mod(residual, sol.G))
        z_nd = is_zero(_reduce_mod(nondeg, sol.G))
    if not z_res.value:
        raise NotASolutionError("relation does not solve the equation")
    if z_nd.value:
        raise DegenerateError("the two constants are not independent")
    return SolutionVerdict(z_res, ZeroTest(True, z_nd.certainty, z_nd.k, z_nd.seed, z_nd.max_residual))


def dual_from_section(s: ExprLike) -> OdeProblem:
    """Dual equation from ``x = s(X, Y, P)``: ``q = -(s_X + s_Y P)/s_P``."""
    s = as_expr(s)
    sP = sp.diff(s, P)
    if is_zero(sP).value:
        raise DegenerateError("section does not depend on P")
    q = simplify(-(sp.diff(s, X) + sp.diff(s, Y) * P) / sP)
    return OdeProblem(_to_jet(q))


def _sqrt_simplified(disc: sp.Expr) -> sp.Expr:
    """``sqrt(disc)`` with square factors pulled out (taken positive)."""
    c, factors = sp.factor_list(disc)
    outside, inside = sp.Integer(1), sp.Integer(1)
    for f, e in factors:
        outside *= f ** (e // 2)
        inside *= f ** (e % 2)
    return outside * sp.sqrt(c) * sp.sqrt(sp.expand(inside))


@dataclass(frozen=True)
class DualBranch:
    section: sp.Expr  # x = section(X, Y, P)
    q: sp.Expr  # in (X, Y, P)
    sign: int  # +1 / -1 root of a quadratic, 0 for a linear factor

    def problem(self) -> OdeProblem:
        return OdeProblem(_to_jet(self.q))


def dual_eliminate(sol: GeneralSolution, section: ExprLike | None = None) -> list[DualBranch]:
    """All dual equations obtained by eliminating ``(x, y)``.

    Differentiating ``G = 0`` along ``Y(X)`` gives ``G_X + G_Y P = 0``;
    ``y`` is removed with a resultant and the remaining relation is solved
    for ``x``.  Non-polynomial relations need an explicit ``section``.
    """
    if section is not None:
        s = as_expr(section)
        return [DualBranch(s, _from_jet(dual_from_section(s).Q), 0)]
    G = sp.expand(sol.G)
    try:
        sp.Poly(G, x, y)
    except sp.PolynomialError:
        raise EliminationNotSupported(
            "relation is not polynomial in (x, y); supply the section x = s(X, Y, P)"
        ) from None
    G1 = sp.expand(sp.diff(G, X) + sp.diff(G, Y) * P)
    R = sp.resultant(G, G1, y) if G1.has(y) and G.has(y) else G1
    R = sp.numer(sp.together(R))
    branches = []
    for fac, _ in sp.factor_list(R, x)[1]:
        deg = sp.degree(fac, x)
        if deg == 0:
            continue
        if deg > 2:
            raise EliminationNotSupported(f"eliminant has degree {deg} in x")
        cs = sp.Poly(fac, x).all_coeffs()
        if deg == 1:
            roots = [(-cs[1] / cs[0], 0)]
        else:
            A, B, C = cs
            rt = _sqrt_simplified(sp.expand(B**2 - 4 * A * C))
            roots = [((-B + sg * rt) / (2 * A), sg) for sg in (1, -1)]
        for s, sg in roots:
            s = sp.together(s)
            sP = sp.diff(s, P)
            if sP == 0:
                continue
            q = sp.together(-(sp.diff(s, X) + sp.diff(s, Y) * P) / sP)
            branches.append(DualBranch(s, sp.radsimp(q) if sg else simplify(q), sg))
    if not branches:
        raise EliminationNotSupported("no section depending on P was found")
    return branches


def implicit_dual_rhs(sol: GeneralSolution) -> sp.Expr:
    """``Y''`` along the dual curves, ``-(G_XX + 2 G_XY P + G_YY P^2)/G_Y``."""
    G = sol.G
    return -(sp.diff(G, X, 2) + 2 * sp.diff(G, X, Y) * P + sp.diff(G, Y, 2) * P**2) / sp.diff(G, Y)


def _num(v) -> sp.Expr:
    """Exact rationals stay exact; floats become 40-digit sympy Floats."""
    if isinstance(v, Fraction):
        return sp.Rational(v.numerator, v.denominator)
    return sp.Float(mpmath.nstr(v, 40), 40)


def cross_check_branch(
    sol: GeneralSolution,
    branch: DualBranch,
    params: dict | None = None,
    k: int = 10,
    seed: int = 0,
    tol: float = 1e-8,
    domain: dict | None = None,
) -> ZeroTest:
    """Verify numerically that ``branch.q`` is the second derivative of the
    dual curves through points of ``G = 0``.

    Points ``(X, Y, P)`` are sampled, ``x`` comes from the section and ``y``
    from a root of ``G = G_X + G_Y P = 0``.
    """
    import random

    rng = random.Random(seed)
    params = dict(params or {})
    domain = dict(domain or {})
    G = sol.G.subs(params)
    G1 = sp.diff(G, X) + sp.diff(G, Y) * P
    rhs = implicit_dual_rhs(GeneralSolution(G))
    q = branch.q.subs(params)
    s = branch.section.subs(params)
    worst, got, tries = 0.0, 0, 0
    while got < k:
        tries += 1
        if tries > 200 * k:
            raise EliminationNotSupported("could not find sample points on the relation")
        pt = {}
        for v in (X, Y, P):
            lo, hi = domain.get(v, (None, None))
            pt[v] = random_rational(rng, 20, lo, hi)
        try:
            xv = _num(eval_numeric(s, pt, prec=40))
            qv = _num(eval_numeric(q, pt, prec=40))
        except (PoleError, InvalidRadicandError, ZeroDivisionError):
            continue
        gy = sp.Poly(G.subs({X: pt[X], Y: pt[Y], x: xv}), y)
        if gy.degree() < 1:
            continue
        found = None
        for root in gy.nroots(n=30):
            if abs(sp.im(root)) > 1e-20:
                continue
            yv = sp.re(root)
            at = {X: pt[X], Y: pt[Y], P: pt[P], x: xv, y: yv}
            if abs(G1.subs(at).evalf(30)) < 1e-15 * (1 + abs(yv) ** 4):
                found = at
                break
        if found is None:
            continue
        try:
            rv = rhs.subs(found).evalf(30)
        except ZeroDivisionError:
            continue
        with mpmath.workdps(40):
            qm = mpmath.mpf(str(qv.evalf(40)))
            diff = abs(qm - mpmath.mpf(str(rv)))
            rel = float(diff / (abs(qm) + 1))
        worst = max(worst, rel)
        if rel > tol:
            return ZeroTest(False, "probabilistic", k, seed, rel)
        got += 1
    return ZeroTest(True, "probabilistic", k, seed, worst)


@dataclass(frozen=True)
class Prop2Verdict:
    w1_dual_zero: ZeroTest
    w2_dual_nonzero: ZeroTest

    @property
    def holds(self) -> bool:
        return self.w1_dual_zero.value and self.w2_dual_nonzero.value


def prop2_check(
    prob: OdeProblem,
    dual: OdeProblem,
    k: int = 10,
    seed: int = 0,
    tol: float = 1e-8,
    domain: dict | None = None,
) -> Prop2Verdict:
    """For ``w2(prob) = 0`` and ``w1(prob) != 0`` check ``w1(dual) = 0`` and
    ``w2(dual) != 0`` by sampling the dual's invariants."""
    if not is_zero(w2(prob)).value:
        raise PreconditionError("w2 of the original equation must vanish")
    if is_zero(w1_raw(prob)).value:
        raise PreconditionError("w1 of the original equation must not vanish")
    dom = {y: (0, None)} if domain is None else domain
    z1 = sampled_zero_test(w1_raw(dual), k=k, seed=seed, tol=tol, domain=dom)
    z2 = sampled_zero_test(sp.diff(dual.Q, p, 4), k=k, seed=seed, tol=tol, domain=dom)
    nz = ZeroTest(not z2.value, z2.certainty, z2.k, z2.seed, z2.max_residual)
    return Prop2Verdict(z1, nz)
