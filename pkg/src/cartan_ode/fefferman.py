"""Fefferman metric of a second-order ODE and its conformal curvature.

The metric lives on ``(x, y, p, phi)``.  The formal constant ``i`` is bound
to 1 unless ``keep_i`` is set; rescaling ``phi`` absorbs any other value.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import sympy as sp

from .errors import PatternViolation
from .exterior import Chart, DifferentialForm
from .expr import ZeroTest, is_zero, sample_points, sampled_zero_test, simplify
from .jet import OdeProblem, w1, w2
from .symbols import FEFFERMAN_COORDS, i, p, phi, x, y
from .tensors import CurvatureBundle, MetricField, all_zero, signature

FEFFERMAN_CHART = Chart(FEFFERMAN_COORDS)
HALF = sp.Rational(1, 2)


def _sym_product(a: DifferentialForm, b: DifferentialForm) -> sp.Matrix:
    """Matrix of the symmetric product ``ab = (a (x) b + b (x) a)/2``."""
    va, vb = sp.Matrix(a.coefficient_vector()), sp.Matrix(b.coefficient_vector())
    return HALF * (va * vb.T + vb * va.T)


@dataclass(frozen=True)
class NullCoframe4:
    theta1: DifferentialForm
    theta2: DifferentialForm
    theta3: DifferentialForm
    theta4: DifferentialForm

    def forms(self) -> tuple:
        return (self.theta1, self.theta2, self.theta3, self.theta4)

    def matrix(self) -> sp.Matrix:
        return sp.Matrix([t.coefficient_vector() for t in self.forms()])

    def metric(self, scale34: int = 2) -> sp.Matrix:
        """``2 theta1 theta2 + scale34 * theta3 theta4``."""
        return 2 * _sym_product(self.theta1, self.theta2) + scale34 * _sym_product(self.theta3, self.theta4)


def _i_value(keep_i: bool):
    return i if keep_i else sp.Integer(1)


def null_coframe(prob: OdeProblem, rho=1, keep_i: bool = False) -> NullCoframe4:
    ch = FEFFERMAN_CHART
    iv = _i_value(keep_i)
    rho = sp.sympify(rho)
    Q = prob.Q
    Qp, Qpp = sp.diff(Q, p), sp.diff(Q, p, 2)
    lam = ch.d(y) - p * ch.d(x)
    return NullCoframe4(
        rho * (ch.d(p) - Q * ch.d(x)),
        rho * ch.d(x),
        -(rho**2) * lam,
        sp.Rational(2, 3) * iv * ch.d(phi) + sp.Rational(2, 3) * Qp * ch.d(x) + sp.Rational(1, 6) * Qpp * lam,
    )


def fefferman_metric(prob: OdeProblem, rho=1, keep_i: bool = False) -> MetricField:
    """``2 rho^2 [(dp - Q dx) dx - (dy - p dx)(2/3 i dphi + 2/3 Q_p dx + 1/6 Q_pp (dy - p dx))]``."""
    ch = FEFFERMAN_CHART
    iv = _i_value(keep_i)
    rho = sp.sympify(rho)
    Q = prob.Q
    Qp, Qpp = sp.diff(Q, p), sp.diff(Q, p, 2)
    lam = ch.d(y) - p * ch.d(x)
    bracket = _sym_product(ch.d(p) - Q * ch.d(x), ch.d(x)) - _sym_product(
        lam,
        sp.Rational(2, 3) * iv * ch.d(phi) + sp.Rational(2, 3) * Qp * ch.d(x) + sp.Rational(1, 6) * Qpp * lam,
    )
    return MetricField(FEFFERMAN_COORDS, 2 * rho**2 * bracket, conformal_factor=rho**2)


def signature_at_samples(g: MetricField, k: int = 10, seed: int = 0, domain=None) -> list:
    """Signature ``(pos, neg)`` at ``k`` sample points where ``det g != 0``."""
    det = g.det()
    # weighted sum carries every coordinate and pole of g; only det must not vanish
    probe = sum((n * e for n, e in enumerate(g.g, 1)), sp.Integer(0))
    out = []
    for pt, _ in sample_points([probe, det], k, seed, domain):
        out.append(signature(g, pt))
    return out


# -- frame components and the duality split ----------------------------------

_ETA = sp.Matrix([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])


def _levi_civita(idx) -> int:
    return sp.LeviCivita(*idx)


def _star_pair(F: dict, s: int) -> dict:
    """Hodge dual of a frame 2-form ``F[(A, B)]`` for ``eps_1234 = s``."""
    out = {}
    for A, B in product(range(4), repeat=2):
        v = 0
        for C, D in product(range(4), repeat=2):
            # raise both indices with the constant frame metric
            Cu, Du = [k for k in range(4) if _ETA[C, k]][0], [k for k in range(4) if _ETA[D, k]][0]
            e = _levi_civita((A, B, C, D))
            if e:
                v += HALF * s * e * F.get((Cu, Du), 0)
        out[A, B] = v
    return out


def self_dual_sign() -> int:
    """Orientation sign making ``theta3 ^ theta2`` self-dual.

    With this choice the self-dual half carries ``w1``."""
    F = {(2, 1): 1, (1, 2): -1}
    for s in (1, -1):
        star = _star_pair(F, s)
        if all(star[k] == F.get(k, 0) for k in star):
            return s
    raise AssertionError("theta3^theta2 is not an eigenform of the Hodge star")


@dataclass
class WeylSplit:
    frame_weyl: dict  # (A, B, C, D) -> expression, indices 0..3 for theta1..theta4
    plus: dict
    minus: dict
    orientation: int

    def is_zero(self, part: str, **kw) -> ZeroTest:
        comps = self.plus if part == "+" else self.minus
        return all_zero(comps.values(), **kw)


def frame_weyl(cb: CurvatureBundle, cf: NullCoframe4) -> dict:
    """Weyl components in the null frame dual to ``cf``."""
    Einv = cf.matrix().inv(method="LU").applyfunc(simplify)
    C = cb.weyl
    nz = {k: v for k, v in C.items() if v != 0}
    out = {}
    for A, B, Cc, D in product(range(4), repeat=4):
        if A >= B or Cc >= D:
            continue
        v = 0
        for (a, b, c, d), val in nz.items():
            f = Einv[a, A] * Einv[b, B] * Einv[c, Cc] * Einv[d, D]
            if f != 0:
                v += f * val
        v = simplify(v)
        out[A, B, Cc, D] = v
        out[B, A, Cc, D] = -v
        out[A, B, D, Cc] = -v
        out[B, A, D, Cc] = v
    for A, B, Cc, D in product(range(4), repeat=4):
        out.setdefault((A, B, Cc, D), sp.Integer(0))
    return out


def weyl_split(cb: CurvatureBundle, cf: NullCoframe4) -> WeylSplit:
    """Split the Weyl tensor into self-dual and anti-self-dual halves,
    ``C(+-) = (C +- *C)/2`` with the star acting on the second index pair."""
    s = self_dual_sign()
    Cf = frame_weyl(cb, cf)
    plus, minus = {}, {}
    for A, B in product(range(4), repeat=2):
        F = {(Cc, D): Cf[A, B, Cc, D] for Cc, D in product(range(4), repeat=2)}
        sF = _star_pair(F, s)
        for Cc, D in product(range(4), repeat=2):
            plus[A, B, Cc, D] = simplify(HALF * (F[Cc, D] + sF[Cc, D]))
            minus[A, B, Cc, D] = simplify(HALF * (F[Cc, D] - sF[Cc, D]))
    return WeylSplit(Cf, plus, minus, s)


# Frame index pairs carrying the single nonzero block of each half (0-based).
PLUS_BLOCK = (2, 1)  # theta3 ^ theta2
MINUS_BLOCK = (2, 0)  # theta3 ^ theta1


@dataclass
class PetrovReport:
    w1: sp.Expr
    w2: sp.Expr
    plus_zero: ZeroTest
    minus_zero: ZeroTest
    k_plus: sp.Expr | None
    k_minus: sp.Expr | None
    pattern_ok: bool

    @property
    def petrov_type(self) -> str:
        if self.plus_zero.value and self.minus_zero.value:
            return "O"
        if self.plus_zero.value:
            return "O x N'"
        if self.minus_zero.value:
            return "N x O"
        return "N x N'"


def _block_pattern(comps: dict, block) -> tuple[sp.Expr, bool]:
    """Scalar of ``comps`` on ``block (x) block`` and whether nothing else survives."""
    A, B = block
    lead = comps[A, B, A, B]
    allowed = {(A, B), (B, A)}
    ok = all(
        is_zero(v).value
        for (a, b, c, d), v in comps.items()
        if not ((a, b) in allowed and (c, d) in allowed)
    )
    return lead, ok


def petrov_NN_check(prob: OdeProblem, rho=1, keep_i: bool = False, cb: CurvatureBundle | None = None) -> PetrovReport:
    """Check that each duality half of the Weyl tensor is a single block
    proportional to ``w1`` (self-dual) or ``w2`` (anti-self-dual).

    The proportionality factors are read off the computed tensor.
    """
    g = fefferman_metric(prob, rho, keep_i)
    cb = cb or CurvatureBundle(g)
    cf = null_coframe(prob, rho, keep_i)
    split = weyl_split(cb, cf)
    W1, W2 = w1(prob), w2(prob)
    plus_lead, plus_ok = _block_pattern(split.plus, PLUS_BLOCK)
    minus_lead, minus_ok = _block_pattern(split.minus, MINUS_BLOCK)
    zp, zm = split.is_zero("+"), split.is_zero("-")
    z1, z2 = is_zero(W1), is_zero(W2)
    kp = None if z1.value else simplify(plus_lead / W1)
    km = None if z2.value else simplify(minus_lead / W2)
    ok = plus_ok and minus_ok and zp.value == z1.value and zm.value == z2.value
    for k in (kp, km):
        if k is not None and k.free_symbols & {x, y, p}:
            ok = False
    if not ok:
        raise PatternViolation("Weyl halves are not of the expected single-block form", (kp, km))
    return PetrovReport(W1, W2, zp, zm, kp, km, ok)


# -- Bach --------------------------------------------------------------------


@dataclass
class BachVerdict:
    w1_pp: sp.Expr
    criterion_zero: ZeroTest
    bach_zero: ZeroTest | None
    bach: sp.Matrix | None

    @property
    def consistent(self) -> bool | None:
        if self.bach_zero is None:
            return None
        return self.bach_zero.value == self.criterion_zero.value


def bach_condition(prob: OdeProblem, compute_tensor: bool = True, rho=1, keep_i: bool = False) -> BachVerdict:
    """``w1_pp`` and, optionally, the Bach tensor of the Fefferman metric."""
    W1pp = simplify(sp.diff(w1(prob), p, 2))
    crit = is_zero(W1pp)
    if not compute_tensor:
        return BachVerdict(W1pp, crit, None, None)
    cb = CurvatureBundle(fefferman_metric(prob, rho, keep_i))
    B = cb.bach
    return BachVerdict(W1pp, crit, all_zero(B), B)


def bach_zero_by_sampling(g: MetricField, k: int = 10, seed: int = 0, tol: float = 1e-8, domain=None) -> ZeroTest:
    """Bach-flatness of ``g`` judged numerically at ``k`` sample points.

    Each residual is taken relative to the summed term magnitudes of the
    expanded component at the same point.
    """
    B = CurvatureBundle(g).bach
    worst = 0.0
    for e in B:
        t = sampled_zero_test(sp.expand(e), k=k, seed=seed, tol=tol, domain=domain)
        if not t.value:
            return t
        worst = max(worst, t.max_residual)
    return ZeroTest(True, "probabilistic", k, seed, worst)


@dataclass
class BastonMasonReport:
    w1: sp.Expr
    w2: sp.Expr
    w1_pp_zero: ZeroTest
    product_zero: ZeroTest

    @property
    def holds(self) -> bool:
        return self.product_zero.value

    @property
    def forced_by_w2(self) -> bool:
        """``w2 = 0`` forces ``w1_pp = 0`` through the identity relating them."""
        return is_zero(self.w2).value


def baston_mason_report(prob: OdeProblem) -> BastonMasonReport:
    """The pair of conditions ``w1_pp = 0`` and ``w1 * w2 = 0``; both hold
    exactly when ``w1 = 0`` or ``w2 = 0``."""
    W1, W2 = w1(prob), w2(prob)
    return BastonMasonReport(W1, W2, is_zero(sp.diff(W1, p, 2)), is_zero(W1 * W2))
