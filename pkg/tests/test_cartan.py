import json

import pytest
import sympy as sp

from cartan_ode.cartan import (
    BUNDLE_CHART,
    FORM_NAMES,
    at_section,
    build_coframe,
    connection_and_curvature,
    curvature_scalars,
    expand_scalar_in_coframe,
    residual_report,
    structure_equations,
    structure_residuals,
)
from cartan_ode.errors import PatternViolation
from cartan_ode.exterior import wedge
from cartan_ode.expr import is_zero
from cartan_ode.jet import OdeProblem, w1, w2
from cartan_ode.symbols import gamma

FAMILY = ["0", "p^4", "y^2", "a/y^3", "p^3 + x*p"]


@pytest.fixture(scope="module", params=FAMILY)
def prob(request):
    return OdeProblem(request.param)


def test_structure_equations_close(prob):
    res = structure_residuals(prob)
    assert set(res) == set(FORM_NAMES)
    for name, form in res.items():
        z = form.zero_test()
        assert z.value and z.certainty == "certified", name


def test_structure_equations_close_for_opaque_q():
    res = structure_residuals(OdeProblem.generic())
    assert all(form.is_zero() for form in res.values())


def test_uncorrected_coframe_does_not_close():
    res = structure_residuals(OdeProblem("p^4"), variant="verbatim")
    assert not all(form.is_zero() for form in res.values())


def test_missing_curvature_term_shows_up():
    prob = OdeProblem("p^4")
    cf = build_coframe(prob)
    cs = curvature_scalars(prob)
    lhs, rhs = structure_equations(cf, cs)["Omega3"]
    rhs_without = rhs - cs.R * wedge(cf.theta2, cf.theta3)
    assert ((lhs - rhs_without) - cs.R * wedge(cf.theta2, cf.theta3)).is_zero()
    assert not (lhs - rhs_without).is_zero()


def test_omega3_at_section_flat():
    cf = build_coframe(OdeProblem("0"))
    assert at_section(cf.Omega3) == BUNDLE_CHART.d(gamma)


def test_flat_curvature_scalars():
    cs = curvature_scalars(OdeProblem("0"))
    assert (cs.R, cs.S, cs.Rbar, cs.Sbar) == (0, 0, 0, 0)


def test_scalar_expansions(prob):
    for scalar in ("R", "S"):
        ex = expand_scalar_in_coframe(prob, scalar)
        assert ex.ok, (scalar, {k: v for k, v in ex.checks.items() if not v.value})


def test_flat_expansion_is_zero():
    ex = expand_scalar_in_coframe(OdeProblem("0"), "R")
    assert all(c == 0 for c in ex.coeffs.values())


def test_vanishing_R_forces_vanishing_S(prob):
    cs = curvature_scalars(prob)
    if is_zero(cs.R).value:
        assert is_zero(cs.S).value
    if is_zero(cs.Rbar).value:
        assert is_zero(cs.Sbar).value


def test_connection_flat_iff_invariants_vanish(prob):
    conn = connection_and_curvature(prob)
    flat = all(F.is_zero() for row in conn.curvature for F in row)
    assert flat == (is_zero(w1(prob)).value and is_zero(w2(prob)).value)
    assert conn.trace().is_zero()


def test_half_flat_curvature_pattern():
    conn = connection_and_curvature(OdeProblem("a/y^3"))
    nonzero = {(a + 1, b + 1) for a in range(3) for b in range(3) if not conn.curvature[a][b].is_zero()}
    assert nonzero == {(1, 3), (2, 3)}


def test_pattern_violation_names_entry():
    with pytest.raises(PatternViolation) as exc:
        connection_and_curvature(OdeProblem("p^4"), variant="verbatim")
    assert isinstance(exc.value.entry, tuple)


def test_residual_report_is_json():
    rep = residual_report(structure_residuals(OdeProblem("y^2")))
    assert json.loads(json.dumps(rep)) == {name: {} for name in FORM_NAMES}
