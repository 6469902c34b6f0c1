"""Second-order ODEs on the first jet space: contact coframe and invariants."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import sympy as sp
from sympy.core.function import AppliedUndef

from .errors import DegenerateError
from .exterior import Chart, DifferentialForm, wedge, wedge_all
from .expr import ExprLike, ZeroTest, as_expr, is_zero, simplify
from .symbols import JET_COORDS, p, x, y

JET_CHART = Chart(JET_COORDS)


@dataclass(frozen=True)
class OdeProblem:
    """The equation ``y'' = Q(x, y, p)`` with ``p = y'``.

    Symbols in ``Q`` other than ``x, y, p`` are constant parameters.  They
    are inferred unless ``params`` is given, in which case anything else is
    rejected.
    """

    Q: sp.Expr
    params: tuple = field(default=None)

    def __post_init__(self):
        Q = as_expr(self.Q, functions={"Q": JET_COORDS})
        object.__setattr__(self, "Q", Q)
        stripped = Q.xreplace({a: sp.Dummy() for a in Q.atoms(AppliedUndef)})
        extra = {s for s in stripped.free_symbols if not isinstance(s, sp.Dummy)} - set(JET_COORDS)
        for f in Q.atoms(AppliedUndef):
            if not set(f.free_symbols) <= set(JET_COORDS) | extra:
                raise ValueError(f"function {f} depends on symbols outside the jet chart")
        if self.params is None:
            params = tuple(sorted(extra, key=lambda s: s.name))
        else:
            params = tuple(as_expr(s) for s in self.params)
            unknown = extra - set(params)
            if unknown:
                names = ", ".join(sorted(s.name for s in unknown))
                raise ValueError(f"Q contains undeclared symbols: {names}")
        object.__setattr__(self, "params", params)

    @classmethod
    def generic(cls) -> "OdeProblem":
        """The ODE with an opaque right-hand side ``Q(x, y, p)``."""
        return cls(sp.Function("Q")(*JET_COORDS))

    @property
    def chart(self) -> Chart:
        return JET_CHART

    def pin(self, **values) -> "OdeProblem":
        """Bind constant parameters to numbers."""
        sub = {sp.Symbol(k): as_expr(v) for k, v in values.items()}
        return OdeProblem(self.Q.subs(sub))

    def Qd(self, *vars) -> sp.Expr:
        """Partial derivative of Q, e.g. ``Qd(p, p)`` for ``Q_pp``."""
        return sp.diff(self.Q, *vars) if vars else self.Q

    def D(self, e: ExprLike) -> sp.Expr:
        return total_derivative(self, e)


@dataclass(frozen=True)
class ContactCoframe:
    omega1: DifferentialForm
    omega2: DifferentialForm
    omega3: DifferentialForm

    def volume(self) -> DifferentialForm:
        return wedge_all(self.omega1, self.omega2, self.omega3)


def contact_coframe(prob: OdeProblem) -> ContactCoframe:
    ch = JET_CHART
    return ContactCoframe(
        ch.d(y) - p * ch.d(x),
        ch.d(p) - prob.Q * ch.d(x),
        ch.d(x),
    )


def total_derivative(prob: OdeProblem, e: ExprLike) -> sp.Expr:
    """``D e = e_x + p e_y + Q e_p``."""
    e = as_expr(e)
    return sp.diff(e, x) + p * sp.diff(e, y) + prob.Q * sp.diff(e, p)


class _Calc:
    """Derivatives of ``Q`` either on sympy trees or, for polynomial ``Q``,
    in a sparse polynomial ring (much faster on dense polynomials)."""

    def __init__(self, prob: OdeProblem):
        self.ring = None
        gens = JET_COORDS + tuple(s for s in prob.params if isinstance(s, sp.Symbol))
        try:
            R = sp.polys.rings.ring(gens, sp.QQ)[0]
            self.Q = R.from_expr(prob.Q)
            self.ring = R
            self.x, self.y, self.p = R.gens[:3]
        except (sp.polys.polyerrors.PolynomialError, ValueError, TypeError, AttributeError):
            self.Q = prob.Q
            self.x, self.y, self.p = x, y, p

    def diff(self, e, v, n: int = 1):
        if self.ring is None:
            return sp.diff(e, v, n)
        for _ in range(n):
            e = e.diff(v)
        return e

    def D(self, e):
        return self.diff(e, self.x) + self.p * self.diff(e, self.y) + self.Q * self.diff(e, self.p)

    def expr(self, e) -> sp.Expr:
        return e.as_expr() if self.ring is not None else e


def _w1_in(c: _Calc):
    Q, dif, D = c.Q, c.diff, c.D
    yv, pv = c.y, c.p
    Qp, Qy = dif(Q, pv), dif(Q, yv)
    Qpp, Qpy, Qyy = dif(Q, pv, 2), dif(Qp, yv), dif(Q, yv, 2)
    return D(D(Qpp)) - 4 * D(Qpy) - D(Qpp) * Qp + 4 * Qp * Qpy - 3 * Qpp * Qy + 6 * Qyy


def w1_raw(prob: OdeProblem) -> sp.Expr:
    c = _Calc(prob)
    return c.expr(_w1_in(c))


def w1(prob: OdeProblem) -> sp.Expr:
    """First relative point invariant (vanishes iff the Fefferman metric is
    anti-self-dual)."""
    return simplify(w1_raw(prob))


def w2(prob: OdeProblem) -> sp.Expr:
    """Second relative point invariant, ``Q_pppp``."""
    return simplify(sp.diff(prob.Q, p, 4))


def identity_to1_residual(prob: OdeProblem) -> sp.Expr:
    """``w1_pp - (D^2 + 3 Q_p D + 2 D Q_p + 2 Q_p^2 - Q_y) w2``, normalized."""
    c = _Calc(prob)
    Q, dif, D = c.Q, c.diff, c.D
    Qp, Qy = dif(Q, c.p), dif(Q, c.y)
    W2 = dif(Q, c.p, 4)
    rhs = D(D(W2)) + 3 * Qp * D(W2) + (2 * D(Qp) + 2 * Qp**2 - Qy) * W2
    return simplify(c.expr(dif(_w1_in(c), c.p, 2) - rhs))


class Branch(str, Enum):
    I = "i"  # w1 = 0, w2 = 0
    II = "ii"  # w1 = 0, w2 != 0
    II_PRIME = "ii'"  # w1 != 0, w2 = 0
    III = "iii"  # w1 != 0, w2 != 0


@dataclass(frozen=True)
class BranchVerdict:
    branch: Branch
    w1_zero: ZeroTest
    w2_zero: ZeroTest

    @property
    def certainty(self) -> str:
        tags = {self.w1_zero.certainty, self.w2_zero.certainty}
        return "certified" if tags == {"certified"} else "probabilistic"


def branch_classify(prob: OdeProblem, **zero_kw) -> BranchVerdict:
    z1 = is_zero(w1(prob), **zero_kw)
    z2 = is_zero(w2(prob), **zero_kw)
    table = {
        (True, True): Branch.I,
        (True, False): Branch.II,
        (False, True): Branch.II_PRIME,
        (False, False): Branch.III,
    }
    return BranchVerdict(table[z1.value, z2.value], z1, z2)


@dataclass(frozen=True)
class TresseForms:
    I1: DifferentialForm
    I2: DifferentialForm
    I3: DifferentialForm
    I4: DifferentialForm


def tresse_forms(prob: OdeProblem, **zero_kw) -> TresseForms:
    """Forms built from ``w1``, ``w2`` that are point invariant up to sign.

    Raises :class:`DegenerateError` when ``w1 * w2`` vanishes.
    """
    W1, W2 = w1(prob), w2(prob)
    if is_zero(W1 * W2, **zero_kw).value:
        raise DegenerateError("Tresse forms need w1*w2 != 0")
    cf = contact_coframe(prob)
    prod = simplify(W1 * W2)
    R = sp.Rational
    return TresseForms(
        sp.Pow(prod, R(1, 4)) * cf.omega1,
        sp.Pow(prod, R(1, 2)) * cf.volume(),
        sp.Pow(W1, R(1, 8)) * sp.Pow(W2, R(5, 8)) * wedge(cf.omega1, cf.omega2),
        sp.Pow(W1, R(5, 8)) * sp.Pow(W2, R(1, 8)) * wedge(cf.omega1, cf.omega3),
    )
