"""Fefferman metrics conformal to Einstein metrics."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import sympy as sp

from .expr import ExprLike, ZeroTest, as_expr, is_zero, simplify
from .fefferman import fefferman_metric
from .jet import OdeProblem, w1, w2
from .symbols import i, p, phi, x, y
from .tensors import CurvatureBundle, MetricField, all_zero, conformal_ricci

_XY = {"a": (x, y), "b": (x, y), "c": (x, y)}


def _xy_expr(e: ExprLike) -> sp.Expr:
    e = as_expr(e, functions=_XY)
    if e.free_symbols & {p, phi}:
        raise ValueError("family data must depend on x and y only")
    return e


@dataclass(frozen=True)
class CaseTwoFamily:
    """Data ``a, b, c`` of a family with ``w2 = 0``; ``c`` is unused by family 2."""

    a: sp.Expr
    b: sp.Expr
    c: sp.Expr = sp.Integer(0)
    family: int = 1

    def __post_init__(self):
        if self.family not in (1, 2):
            raise ValueError("family must be 1 or 2")
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, _xy_expr(getattr(self, name)))


def case2_build(fam: CaseTwoFamily, keep_i: bool = False) -> tuple[sp.Expr, OdeProblem]:
    """``(rho, Q)`` for the family."""
    a, b, c = fam.a, fam.b, fam.c
    ax, ay = sp.diff(a, x), sp.diff(a, y)
    bx, by = sp.diff(b, x), sp.diff(b, y)
    iv = i if keep_i else sp.Integer(1)
    phase = sp.exp(-2 * a / 3) * sp.exp(-iv * phi / 3)
    if fam.family == 1:
        Q = (
            p**3 * c
            + p**2 * (6 * b * c - 2 * ay)
            + p * (12 * b**2 * c - 3 * by - 6 * b * ay - ax)
            + 8 * b**3 * c
            - 2 * b * by
            - 4 * b**2 * ay
            - 2 * bx
            - 2 * b * ax
        )
        rho = phase / (p + 2 * b)
    else:
        Q = p**2 * ay + 2 * p * ax + b
        rho = phase
    return rho, OdeProblem(sp.expand(Q))


def einstein_residual(g: MetricField, Lambda: ExprLike = 0, cb: CurvatureBundle | None = None) -> sp.Matrix:
    """``Ric(g) - Lambda g`` with normalized entries."""
    cb = cb or CurvatureBundle(g)
    L = as_expr(Lambda)
    return (cb.ricci - L * g.g).applyfunc(simplify)


def family_ricci(fam: CaseTwoFamily) -> sp.Matrix:
    """Ricci tensor of the family's metric.

    The metric is ``rho^2 g0`` with ``g0`` the ``rho = 1`` metric, and
    ``log rho`` has rational derivatives, so the rescaling formula keeps
    every intermediate expression free of exponentials.
    """
    rho, prob = case2_build(fam)
    cb = CurvatureBundle(fefferman_metric(prob, 1))
    sigma = sp.expand_log(sp.log(rho), force=True)
    return conformal_ricci(cb, sigma)


def family_ricci_test(fam: CaseTwoFamily, k: int = 10, seed: int = 0, tol: float = 1e-8) -> ZeroTest:
    """Ricci-flatness of the family's metric (certified when possible)."""
    return all_zero(family_ricci(fam), k=k, seed=seed, tol=tol)


def random_family(rng, family: int, degree: int = 2, box: int = 3) -> CaseTwoFamily:
    """Random polynomial ``a, b, c`` of total degree at most ``degree``."""

    def poly():
        return sum(
            rng.randint(-box, box) * x**m * y**n
            for m in range(degree + 1)
            for n in range(degree + 1 - m)
        )

    return CaseTwoFamily(poly(), poly(), poly(), family)


def case3_residual(a: ExprLike, Q: ExprLike) -> sp.Expr:
    """``36 (Da)^2 + 6a(-3 D^2 a + Q_p Da) + a^2 (6 D Q_p - 18 Q_y - 4 Q_p^2)``."""
    prob = OdeProblem(Q)
    a = _xy_expr(a) if not isinstance(a, sp.Expr) else a
    D = prob.D
    Qp, Qy = sp.diff(prob.Q, p), sp.diff(prob.Q, y)
    Da = D(a)
    return simplify(36 * Da**2 + 6 * a * (-3 * D(Da) + Qp * Da) + a**2 * (6 * D(Qp) - 18 * Qy - 4 * Qp**2))


class EinsteinCase(str, Enum):
    FLAT = "flat"  # w1 = w2 = 0
    HALF_W1 = "w2=0"  # rho = A exp(-i phi/3)
    HALF_W2 = "w1=0"  # rho = A exp(+i phi/3)
    INCOMPATIBLE = "incompatible"


@dataclass(frozen=True)
class CaseVerdict:
    case: EinsteinCase
    w1_zero: ZeroTest
    w2_zero: ZeroTest
    rho_ok: bool | None  # None when rho was not supplied

    @property
    def compatible(self) -> bool:
        return self.case is not EinsteinCase.INCOMPATIBLE and self.rho_ok is not False


def classify_conformal_einstein(prob: OdeProblem, rho: ExprLike | None = None, keep_i: bool = False) -> CaseVerdict:
    """Sort ``prob`` into the three conformal-Einstein cases.

    A supplied ``rho`` is tested against ``(3 rho_phi - i rho) w2 = 0`` and
    ``(3 rho_phi + i rho) w1 = 0``.
    """
    W1, W2 = w1(prob), w2(prob)
    z1, z2 = is_zero(W1), is_zero(W2)
    if z1.value and z2.value:
        case = EinsteinCase.FLAT
    elif z2.value:
        case = EinsteinCase.HALF_W1
    elif z1.value:
        case = EinsteinCase.HALF_W2
    else:
        case = EinsteinCase.INCOMPATIBLE
    rho_ok = None
    if rho is not None:
        iv = i if keep_i else sp.Integer(1)
        r = as_expr(rho)
        rphi = sp.diff(r, phi)
        rho_ok = is_zero((3 * rphi - iv * r) * W2).value and is_zero((3 * rphi + iv * r) * W1).value
    return CaseVerdict(case, z1, z2, rho_ok)
