import random

import pytest
import sympy as sp

from cartan_ode.einstein import (
    CaseTwoFamily,
    EinsteinCase,
    case2_build,
    case3_residual,
    classify_conformal_einstein,
    einstein_residual,
    family_ricci,
    family_ricci_test,
    random_family,
)
from cartan_ode.expr import is_zero
from cartan_ode.fefferman import fefferman_metric
from cartan_ode.jet import OdeProblem, w1, w2
from cartan_ode.symbols import p, phi, x, y

from helpers import a


def test_case2_trivial():
    rho, prob = case2_build(CaseTwoFamily(0, 0, 0, family=2))
    assert prob.Q == 0
    assert rho == sp.exp(-phi / 3)


def test_case2_second_family_is_b():
    b = sp.Function("b")(x, y)
    _, prob = case2_build(CaseTwoFamily(0, "b", 0, family=2))
    assert prob.Q == b


def test_case2_first_family_cubic():
    rho, prob = case2_build(CaseTwoFamily(0, 0, 1, family=1))
    assert prob.Q == p**3
    assert sp.simplify(rho - sp.exp(-phi / 3) / p) == 0


def test_family_data_must_not_depend_on_p():
    with pytest.raises(ValueError):
        CaseTwoFamily("p", 0)
    with pytest.raises(ValueError):
        CaseTwoFamily(0, 0, family=3)


@pytest.mark.parametrize("fam", [CaseTwoFamily(0, "x", 0, 2), CaseTwoFamily(0, 0, 1, 1)])
def test_direct_einstein_residual(fam):
    rho, prob = case2_build(fam)
    assert einstein_residual(fefferman_metric(prob, rho)) == sp.zeros(4)


def test_p4_is_not_einstein():
    assert einstein_residual(fefferman_metric(OdeProblem("p^4"))) != sp.zeros(4)


def test_rescaling_formula_matches_direct_curvature():
    fam = CaseTwoFamily("x*y", "x", 0, 2)
    rho, prob = case2_build(fam)
    direct = einstein_residual(fefferman_metric(prob, rho))
    assert all(is_zero(v).value for v in direct - family_ricci(fam))


def test_opaque_family_data():
    z = family_ricci_test(CaseTwoFamily("a", "b", 0, family=2))
    assert z.value


@pytest.mark.parametrize("family", [1, 2])
def test_random_families_ricci_flat(family):
    rng = random.Random(100 + family)
    for _ in range(2):
        fam = random_family(rng, family, degree=1)
        _, prob = case2_build(fam)
        assert is_zero(w2(prob)).value
        assert family_ricci_test(fam).value


def test_cosmological_constant_forced_to_vanish():
    lam = sp.Symbol("Lambda")
    fam = CaseTwoFamily("x + y^2", "x*y", "1 + x", family=1)
    rho, prob = case2_build(fam)
    g = fefferman_metric(prob, rho).g
    res = family_ricci(fam) - lam * g
    sols = sp.solve([e for e in res if e != 0], lam, dict=True)
    assert sols == [{lam: 0}]


def test_case3_examples():
    assert case3_residual(5, 0) == 0
    assert case3_residual(a, 0) == 0
    assert case3_residual("x", 0) == 36


def test_case3_constant_q():
    c = sp.Symbol("c")
    assert case3_residual(a, c) == 0
    # the integrability condition w1 = 0 holds for these Q
    assert w1(OdeProblem(c)) == 0


def test_classification():
    assert classify_conformal_einstein(OdeProblem("0")).case is EinsteinCase.FLAT
    v = classify_conformal_einstein(OdeProblem("a/y^3"))
    assert v.case is EinsteinCase.HALF_W1 and v.compatible
    assert classify_conformal_einstein(OdeProblem("p^4")).case is EinsteinCase.INCOMPATIBLE
    assert not classify_conformal_einstein(OdeProblem("p^4")).compatible


def test_rho_compatibility():
    prob = OdeProblem("a/y^3")
    assert classify_conformal_einstein(prob, sp.exp(-phi / 3)).rho_ok
    assert not classify_conformal_einstein(prob, sp.exp(phi / 3)).rho_ok
