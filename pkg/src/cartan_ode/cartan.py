"""The eight-dimensional Cartan coframe of a second-order ODE.

Coordinates on the bundle are ``(x, y, p, rho, phi, gamma, gammabar, r)``.
The imaginary unit is the formal real constant ``i``; ``exp(i*phi)`` is kept
as an exponential generator so that its derivative is ``i*exp(i*phi)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import sympy as sp

from .errors import PatternViolation
from .exterior import Chart, DifferentialForm, ext_d, wedge
from .expr import ZeroTest, is_zero, simplify
from .jet import OdeProblem, w1, w2
from .symbols import BUNDLE_COORDS, gamma, gammabar, i, p, phi, r, rho, x, y

BUNDLE_CHART = Chart(BUNDLE_COORDS)
E = sp.exp(i * phi)

FORM_NAMES = ("theta1", "theta2", "theta3", "Omega2", "Omega2bar", "Omega3", "Omega3bar", "Omega4")

# Coefficient repairs without which the structure equations do not close,
# keyed by the affected form.  ``variant="verbatim"`` omits them.
CORRECTIONS = {
    "Omega4": "theta1 coefficient carries exp(-i*phi), not exp(i*phi)",
    "S": "S = exp(i*phi)*(w1_p + i*gammabar*w1)/(6*i^2*rho^5), i.e. -1/2 times the uncorrected value",
    "Sbar": "Sbar = exp(-i*phi)*(D w2 + (2*Q_p - i*gamma)*w2)/(6*i^2*rho^5), likewise",
}


@dataclass(frozen=True)
class Coframe8:
    theta1: DifferentialForm
    theta2: DifferentialForm
    theta3: DifferentialForm
    Omega2: DifferentialForm
    Omega2bar: DifferentialForm
    Omega3: DifferentialForm
    Omega3bar: DifferentialForm
    Omega4: DifferentialForm
    lam: DifferentialForm
    mu: DifferentialForm
    mubar: DifferentialForm
    variant: str = "corrected"

    def forms(self) -> tuple:
        return tuple(getattr(self, n) for n in FORM_NAMES)

    def matrix(self) -> sp.Matrix:
        """8x8 coefficient matrix, rows are the forms in canonical order."""
        return sp.Matrix([f.coefficient_vector() for f in self.forms()])


def build_coframe(prob: OdeProblem, variant: str = "corrected") -> Coframe8:
    """Construct the coframe.  ``variant`` is ``"corrected"`` or ``"verbatim"``."""
    if variant not in ("corrected", "verbatim"):
        raise ValueError(f"unknown coframe variant {variant!r}")
    ch = BUNDLE_CHART
    dx, dy, dp = ch.d(x), ch.d(y), ch.d(p)
    drho, dphi, dg, dgb, dr = ch.d(rho), ch.d(phi), ch.d(gamma), ch.d(gammabar), ch.d(r)
    Q = prob.Q
    D = prob.D
    Qp, Qy = sp.diff(Q, p), sp.diff(Q, y)
    Qpp, Qpy = sp.diff(Q, p, 2), sp.diff(Q, p, y)
    Qppp, Qppy = sp.diff(Q, p, 3), sp.diff(Q, p, 2, y)
    g, gb = gamma, gammabar
    Ei = 1 / E

    lam = -i * (dy - p * dx)
    mu = dp - Q * dx
    mubar = dx

    th1 = rho * E * (mu + g * lam)
    th2 = rho * Ei * (mubar + gb * lam)
    th3 = rho**2 * lam

    Om2 = (
        i * dphi
        + drho / rho
        + (6 * g * gb * i**2 - 6 * gb * i * Qp - Qpp - 4 * i * r * rho) / (4 * i * rho**2) * th3
        - 2 * i * gb / rho * Ei * th1
        - E / rho * (i * g - Qp) * th2
    )
    Om2b = (
        -i * dphi
        + drho / rho
        - (6 * g * gb * i**2 - 2 * gb * i * Qp - Qpp + 4 * i * r * rho) / (4 * i * rho**2) * th3
        + i * gb / rho * Ei * th1
        + E / rho * (2 * i * g - Qp) * th2
    )
    Om3 = E / rho * (
        dg
        - (
            D(Qpp)
            + 6 * g**2 * gb * i**3
            - 6 * g * gb * i**2 * Qp
            - 3 * g * i * Qpp
            - 4 * Qpy
            - 6 * gb * i * Qy
        )
        / (6 * i**2 * rho**2)
        * th3
        + Ei / (4 * i * rho) * (2 * g * gb * i**2 - 2 * gb * i * Qp - Qpp - 4 * i * r * rho) * th1
        + E / (i * rho) * (g**2 * i**2 - g * i * Qp - Qy) * th2
    )
    Om3b = Ei / rho * (
        dgb
        + (6 * g * gb**2 * i**3 - 6 * gb**2 * i**2 * Qp - 3 * gb * i * Qpp - Qppp)
        / (6 * i**2 * rho**2)
        * th3
        - Ei / rho * gb**2 * i * th1
        - E / (4 * i * rho) * (2 * g * gb * i**2 - 2 * gb * i * Qp - Qpp + 4 * i * r * rho) * th2
    )
    c3 = (
        8 * D(Qppp)
        - 3 * Qpp**2
        + 8 * Qp * Qppp
        - 12 * Qppy
        - 12 * g * i * Qppp
        + gb * (12 * i * D(Qpp) - 24 * i * Qpy)
        - 12 * g * gb * i**2 * Qpp
        + gb**2 * (24 * i**2 * D(Qp) + 12 * i**2 * Qp**2 - 48 * i**2 * Qy)
        - 48 * i**3 * g * gb**2 * Qp
        + 36 * g**2 * gb**2 * i**4
        + 48 * gb * r * rho * i**2 * Qp
        + 48 * i**2 * rho**2 * r**2
    )
    c1 = 6 * g * gb**2 * i**3 - 6 * gb**2 * i**2 * Qp + 3 * gb * i * Qpp - Qppp - 12 * gb * i**2 * r * rho
    c2 = (
        D(Qpp)
        - 4 * Qpy
        - 3 * i * g * Qpp
        + 6 * i * gb * (D(Qp) - 2 * Qy)
        - 6 * i**2 * g * gb * Qp
        + 6 * g**2 * gb * i**3
        + 12 * g * i**2 * r * rho
    )
    phase1 = E if variant == "verbatim" else Ei
    Om4 = (
        -i / (2 * rho**2) * gb * dg
        + (i * g - Qp) / (2 * rho**2) * dgb
        - dr / rho
        - r * drho / rho**2
        + c3 / (48 * i**2 * rho**4) * th3
        - phase1 / (12 * i * rho**3) * c1 * th1
        - E / (12 * i * rho**3) * c2 * th2
    )
    return Coframe8(th1, th2, th3, Om2, Om2b, Om3, Om3b, Om4, lam, mu, mubar, variant)


@dataclass(frozen=True)
class CurvatureScalars:
    R: sp.Expr
    S: sp.Expr
    Rbar: sp.Expr
    Sbar: sp.Expr


def curvature_scalars(prob: OdeProblem, variant: str = "corrected") -> CurvatureScalars:
    """``R``, ``Rbar`` are gauge multiples of ``w1``, ``w2``; ``S``, ``Sbar`` of
    their first derivatives.  The verbatim ``S``, ``Sbar`` are off by ``-2``."""
    W1, W2 = w1(prob), w2(prob)
    k = sp.Integer(-1) / 3 if variant == "verbatim" else sp.Rational(1, 6)
    return CurvatureScalars(
        R=-(E**2) * W1 / (6 * i**2 * rho**4),
        S=k * E * (sp.diff(W1, p) + i * gammabar * W1) / (i**2 * rho**5),
        Rbar=-(E**-2) * W2 / (6 * i**2 * rho**4),
        Sbar=k / E * (prob.D(W2) + (2 * sp.diff(prob.Q, p) - i * gamma) * W2) / (i**2 * rho**5),
    )


def structure_equations(cf: Coframe8, cs: CurvatureScalars) -> dict:
    """Left and right sides of the eight structure equations."""
    t1, t2, t3 = cf.theta1, cf.theta2, cf.theta3
    O2, O2b, O3, O3b, O4 = cf.Omega2, cf.Omega2bar, cf.Omega3, cf.Omega3bar, cf.Omega4
    w = wedge
    rhs = {
        "theta1": w(O2, t1) + w(O3, t3),
        "theta2": w(O2b, t2) + w(O3b, t3),
        "theta3": i * w(t1, t2) + w(O2 + O2b, t3),
        "Omega2": 2 * i * w(t1, O3b) + i * w(t2, O3) + w(O4, t3),
        "Omega2bar": -2 * i * w(t2, O3) - i * w(t1, O3b) + w(O4, t3),
        "Omega3": w(O4, t1) + w(O3, O2b) + cs.R * w(t2, t3),
        "Omega3bar": w(O4, t2) + w(O3b, O2) + cs.Rbar * w(t1, t3),
        "Omega4": i * w(O3, O3b) + w(O4, O2 + O2b) + cs.Sbar * w(t1, t3) + cs.S * w(t2, t3),
    }
    return {name: (ext_d(getattr(cf, name)), rhs[name]) for name in FORM_NAMES}


def structure_residuals(prob: OdeProblem, variant: str = "corrected") -> dict:
    """``d(form) - rhs`` for each structure equation, coefficients normalized."""
    cf = build_coframe(prob, variant)
    cs = curvature_scalars(prob, variant)
    return {
        name: (lhs - rhs).simplify()
        for name, (lhs, rhs) in structure_equations(cf, cs).items()
    }


def _solve_in_coframe(cf: Coframe8, form: DifferentialForm) -> list:
    """Coefficients ``c`` with ``form = sum c_k * cf.forms()[k]``."""
    M = cf.matrix().T
    b = sp.Matrix(form.coefficient_vector())
    sol = M.LUsolve(b)
    return [simplify(c) for c in sol]


@dataclass(frozen=True)
class ScalarExpansion:
    """Coefficients of ``d(scalar)`` in the coframe basis."""

    scalar: str
    coeffs: dict  # form name -> Expression
    checks: dict  # description -> ZeroTest

    @property
    def ok(self) -> bool:
        return all(t.value for t in self.checks.values())


def expand_scalar_in_coframe(prob: OdeProblem, scalar: str = "R", variant: str = "corrected") -> ScalarExpansion:
    """Expand ``dR`` or ``dS`` in the coframe and check the expected structure.

    For ``R``: Omega2 coefficient ``-R``, Omega2bar ``-3R``, theta1 ``-S``
    and no Omega3, Omega3bar, Omega4 terms.  For ``S``: Omega2 ``-2S``,
    Omega2bar ``-3S``, Omega3bar ``-i R``, and the theta1 coefficient of
    ``dS`` equals the theta2 coefficient of ``dSbar``.
    """
    cf = build_coframe(prob, variant)
    cs = curvature_scalars(prob, variant)
    ch = BUNDLE_CHART

    def expand(f):
        return dict(zip(FORM_NAMES, _solve_in_coframe(cf, ext_d(ch.function(f)))))

    checks = {}
    if scalar == "R":
        co = expand(cs.R)
        expected = {
            "Omega2": -cs.R,
            "Omega2bar": -3 * cs.R,
            "theta1": -cs.S,
            "Omega3": 0,
            "Omega3bar": 0,
            "Omega4": 0,
        }
    elif scalar == "S":
        co = expand(cs.S)
        expected = {
            "Omega2": -2 * cs.S,
            "Omega2bar": -3 * cs.S,
            "Omega3": 0,
            "Omega3bar": -i * cs.R,
            "Omega4": 0,
        }
        cob = expand(cs.Sbar)
        checks["S1 == S1bar"] = is_zero(co["theta1"] - cob["theta2"])
    else:
        raise ValueError("scalar must be 'R' or 'S'")
    for name, val in expected.items():
        checks[f"{name} coefficient"] = is_zero(co[name] - val)
    return ScalarExpansion(scalar, co, checks)


@dataclass(frozen=True)
class ConnectionMatrix:
    omega: list  # 3x3 nested list of 1-forms
    curvature: list  # 3x3 nested list of 2-forms

    def trace(self) -> DifferentialForm:
        return (self.omega[0][0] + self.omega[1][1] + self.omega[2][2]).simplify()


def connection_and_curvature(prob: OdeProblem, variant: str = "corrected", check: bool = True) -> ConnectionMatrix:
    """Assemble the sl(3)-valued connection and its curvature ``dw + w^w``.

    With ``check`` set, entries are compared against the expected pattern
    and :class:`PatternViolation` names the first entry that disagrees.
    """
    cf = build_coframe(prob, variant)
    t1, t2, t3 = cf.theta1, cf.theta2, cf.theta3
    O2, O2b, O3, O3b, O4 = cf.Omega2, cf.Omega2bar, cf.Omega3, cf.Omega3bar, cf.Omega4
    third = sp.Rational(1, 3)
    half = sp.Rational(1, 2)
    om = [
        [third * (2 * O2 + O2b), i * O3b, -half * O4],
        [t1, third * (O2b - O2), -half * O3],
        [2 * t3, 2 * i * t2, -third * (2 * O2b + O2)],
    ]
    curv = []
    for a in range(3):
        row = []
        for b in range(3):
            F = ext_d(om[a][b])
            for c in range(3):
                F = F + wedge(om[a][c], om[c][b])
            row.append(F.simplify())
        curv.append(row)
    conn = ConnectionMatrix(om, curv)
    if check:
        cs = curvature_scalars(prob, variant)
        expected = expected_curvature(cf, cs)
        for a in range(3):
            for b in range(3):
                if not (curv[a][b] - expected[a][b]).zero_test().value:
                    raise PatternViolation(
                        f"curvature entry ({a + 1},{b + 1}) does not match", (a + 1, b + 1)
                    )
    return conn


def expected_curvature(cf: Coframe8, cs: CurvatureScalars) -> list:
    z = BUNDLE_CHART.zero(2)
    t13 = wedge(cf.theta1, cf.theta3)
    t23 = wedge(cf.theta2, cf.theta3)
    half = sp.Rational(1, 2)
    return [
        [z, i * cs.Rbar * t13, -half * cs.Sbar * t13 - half * cs.S * t23],
        [z, z, -half * cs.R * t23],
        [z, z, z],
    ]


def at_section(e, values: Mapping | None = None):
    """Evaluate a bundle expression or form on the section
    ``rho=1, phi=0, gamma=gammabar=r=0`` (overridable)."""
    sec = {rho: 1, phi: 0, gamma: 0, gammabar: 0, r: 0}
    sec.update(values or {})
    if isinstance(e, DifferentialForm):
        return e.subs(sec).simplify()
    return simplify(sp.sympify(e).subs(sec))


def residual_report(res: Mapping) -> dict:
    """JSON-ready residual map: form -> {basis label: expression text}."""
    return {name: form.as_json() for name, form in res.items()}


def residual_zero_tests(res: Mapping, **kw) -> dict:
    return {name: form.zero_test(**kw) for name, form in res.items()}


__all__ = [
    "BUNDLE_CHART",
    "CORRECTIONS",
    "Coframe8",
    "ConnectionMatrix",
    "CurvatureScalars",
    "E",
    "FORM_NAMES",
    "ScalarExpansion",
    "ZeroTest",
    "at_section",
    "build_coframe",
    "connection_and_curvature",
    "curvature_scalars",
    "expand_scalar_in_coframe",
    "expected_curvature",
    "residual_report",
    "residual_zero_tests",
    "structure_equations",
    "structure_residuals",
]
