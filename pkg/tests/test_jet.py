import random

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from cartan_ode.errors import DegenerateError
from cartan_ode.expr import is_zero
from cartan_ode.jet import (
    JET_CHART,
    Branch,
    OdeProblem,
    branch_classify,
    contact_coframe,
    identity_to1_residual,
    tresse_forms,
    w1,
    w2,
)
from cartan_ode.symbols import p, x, y

from helpers import a, random_poly

VOLUME = JET_CHART.d(x) ^ JET_CHART.d(y) ^ JET_CHART.d(p)


def test_w1_examples():
    assert is_zero(w1(OdeProblem("a/y^3")) - 72 * a / y**5).value
    assert w1(OdeProblem("0")) == 0
    assert w1(OdeProblem("p^4")) == 24 * p**8
    assert w1(OdeProblem("y^2")) == 12


def test_w2_examples():
    assert w2(OdeProblem("p^4")) == 24
    assert w2(OdeProblem("a/y^3")) == 0
    assert w2(OdeProblem("x*p^3 + y*p^2 + p + x*y")) == 0


def test_parameters_inferred_and_pinned():
    prob = OdeProblem("a/y^3")
    assert prob.params == (a,)
    assert prob.pin(a=2).Q == 2 / y**3
    with pytest.raises(ValueError):
        OdeProblem("a/y^3 + b", params=("a",))


def test_identity_residual_generic():
    assert identity_to1_residual(OdeProblem.generic()) == 0
    assert identity_to1_residual(OdeProblem("0")) == 0


def test_identity_residual_random_polynomials():
    rng = random.Random(11)
    for _ in range(5):
        Q = random_poly(rng, (x, y, p), 3)
        assert identity_to1_residual(OdeProblem(Q)) == 0


@st.composite
def cubic_in_p(draw):
    rng = random.Random(draw(st.integers(0, 10**6)))
    return sum(random_poly(rng, (x, y), 2) * p**k for k in range(4))


@settings(max_examples=15, deadline=None)
@given(cubic_in_p())
def test_w2_vanishes_for_cubics(Q):
    assert is_zero(w2(OdeProblem(Q))).value


@settings(max_examples=15, deadline=None)
@given(cubic_in_p(), st.integers(1, 5), st.sampled_from([p**4, p**5, 1 / (1 + p**2), sp.exp(p)]))
def test_w2_nonzero_beyond_cubics(Q, c, extra):
    assert not is_zero(w2(OdeProblem(Q + c * extra))).value


@settings(max_examples=10, deadline=None)
@given(cubic_in_p())
def test_contact_coframe_volume(Q):
    vol = contact_coframe(OdeProblem(Q)).volume()
    assert vol == VOLUME or vol == -1 * VOLUME


def test_branches():
    assert branch_classify(OdeProblem("0")).branch is Branch.I
    assert branch_classify(OdeProblem("a/y^3")).branch is Branch.II_PRIME
    assert branch_classify(OdeProblem("p^4")).branch is Branch.III


def test_flat_instances():
    # point images of y'' = 0 have w1 = w2 = 0
    for Q in ["-2*p/x", "p^2/y", "-p^3", "2*p^2/(1+y)"]:
        v = branch_classify(OdeProblem(Q))
        assert v.branch is Branch.I, Q
        assert v.certainty == "certified"


def test_tresse_p4():
    tf = tresse_forms(OdeProblem("p^4"))
    om1 = contact_coframe(OdeProblem("p^4")).omega1
    ratio = tf.I1.coeff(y) / om1.coeff(y)
    assert is_zero(ratio**4 - 576 * p**8).value


def test_tresse_degenerate():
    with pytest.raises(DegenerateError):
        tresse_forms(OdeProblem("0"))
    with pytest.raises(DegenerateError):
        tresse_forms(OdeProblem("a/y^3"))
