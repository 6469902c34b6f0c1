import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from cartan_ode.exterior import Chart, DifferentialForm, basis_forms, d, ext_d, pullback, wedge
from cartan_ode.symbols import i, p, x, y

from helpers import polynomials, rational_functions

CH = Chart((x, y, p))
xb, yb, t = sp.symbols("xbar ybar t")


@st.composite
def forms(draw, degree=None, chart=CH, coeffs=None):
    k = draw(st.integers(0, 2)) if degree is None else degree
    coeffs = rational_functions((x, y, p), max_deg=2) if coeffs is None else coeffs
    comps = {}
    for b in basis_forms(chart, k):
        (idx,) = b.comps
        comps[idx] = draw(coeffs)
    return DifferentialForm(chart, k, comps)


def test_dx_wedge_dx():
    assert wedge(CH.d(x), CH.d(x)).is_zero()


def test_contact_wedge_dx():
    lam = CH.d(y) - p * CH.d(x)
    w = wedge(lam, CH.d(x))
    assert w.coeff(y, x) == 1
    assert w.coeff(x, y) == -1


def test_d_of_contact_form():
    lam = CH.d(y) - p * CH.d(x)
    assert ext_d(lam) == wedge(CH.d(x), CH.d(p))


def test_d_of_x_dy():
    assert ext_d(x * CH.d(y)) == wedge(CH.d(x), CH.d(y))


def test_dd_opaque_function():
    f = sp.Function("f")(x, y)
    assert ext_d(d(f, CH)).is_zero()


def test_pullback_complex_chart():
    target = Chart((xb, yb))
    got = pullback({x: xb + i * yb}, Chart((x,)).d(x), target)
    assert got == target.d(xb) + i * target.d(yb)


def test_pullback_identity():
    w = x * CH.d(y) + p**2 * CH.d(p)
    assert pullback({x: x, y: y, p: p}, w, CH) == w


def test_chart_mismatch():
    other = Chart((x, y))
    with pytest.raises(ValueError):
        CH.d(x) + other.d(x)


@settings(max_examples=50, deadline=None)
@given(forms())
def test_d_squared_is_zero(a):
    z = ext_d(ext_d(a)).zero_test()
    assert z.value and z.certainty == "certified"


@settings(max_examples=20, deadline=None)
@given(forms(), forms())
def test_leibniz(a, b):
    lhs = ext_d(wedge(a, b))
    rhs = wedge(ext_d(a), b) + (-1) ** a.degree * wedge(a, ext_d(b))
    z = (lhs - rhs).zero_test()
    assert z.value and z.certainty == "certified"


@settings(max_examples=20, deadline=None)
@given(forms(), forms())
def test_graded_commutativity(a, b):
    assert (wedge(a, b) - (-1) ** (a.degree * b.degree) * wedge(b, a)).zero_test().value


@settings(max_examples=10, deadline=None)
@given(forms(coeffs=polynomials((x, y, p), 3, 2)), polynomials((xb, yb, t), 2, 2), polynomials((xb, yb, t), 2, 2), polynomials((xb, yb, t), 2, 2))
def test_pullback_commutes_with_d(a, f1, f2, f3):
    target = Chart((xb, yb, t))
    phi = {x: f1, y: f2, p: f3}
    lhs = pullback(phi, ext_d(a), target)
    rhs = ext_d(pullback(phi, a, target))
    assert (lhs - rhs).zero_test().value


def test_text_and_json():
    w = CH.d(y) - p * CH.d(x)
    assert w.as_json() == {"dx": "-p", "dy": "1"}
    assert "dx" in w.to_latex()
