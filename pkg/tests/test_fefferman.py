import pytest
import sympy as sp

from cartan_ode.errors import DegenerateError
from cartan_ode.expr import is_zero, sampled_zero_test
from cartan_ode.fefferman import (
    FEFFERMAN_CHART,
    MINUS_BLOCK,
    PLUS_BLOCK,
    _star_pair,
    bach_condition,
    baston_mason_report,
    fefferman_metric,
    null_coframe,
    petrov_NN_check,
    self_dual_sign,
    signature_at_samples,
)
from cartan_ode.jet import OdeProblem, w1, w2
from cartan_ode.symbols import i, p, phi, x, y
from cartan_ode.tensors import CurvatureBundle, MetricField, all_zero

from helpers import a

FAMILY = ["0", "p^4", "y^2", "a/y^3", "p^3 + y^2"]
rho = sp.Symbol("rho", positive=True)
h = sp.Function("h")(p)


def sym(u, v):
    """Matrix of the symmetric product of two covector lists."""
    u, v = sp.Matrix(u), sp.Matrix(v)
    return (u * v.T + v * u.T) / 2


# covectors on (x, y, p, phi)
DX, DY, DP, DPHI = ([int(k == j) for k in range(4)] for j in range(4))
LAM = [-p, 1, 0, 0]


def vec(*terms):
    out = sp.zeros(4, 1)
    for c, v in terms:
        out += c * sp.Matrix(v)
    return list(out)


@pytest.fixture(scope="module")
def bundles():
    return {Q: CurvatureBundle(fefferman_metric(OdeProblem(Q))) for Q in FAMILY}


def test_metric_matches_half_flat_display():
    g = fefferman_metric(OdeProblem("a/y^3"), rho, keep_i=True)
    want = 2 * rho**2 * (sym(vec((1, DP), (-a / y**3, DX)), DX) - sp.Rational(2, 3) * i * sym(LAM, DPHI))
    assert (g.g - want).applyfunc(sp.simplify) == sp.zeros(4)


def test_metric_matches_h_family_display():
    g = fefferman_metric(OdeProblem(h), rho, keep_i=True)
    hp, hpp = sp.diff(h, p), sp.diff(h, p, 2)
    third = vec((sp.Rational(2, 3) * i, DPHI), (sp.Rational(2, 3) * hp, DX), (sp.Rational(1, 6) * hpp, LAM))
    want = 2 * rho**2 * (sym(vec((1, DP), (-h, DX)), DX) - sym(LAM, third))
    assert (g.g - want).applyfunc(sp.simplify) == sp.zeros(4)


def test_metric_is_null_coframe_product():
    prob = OdeProblem("p^4")
    cf = null_coframe(prob, rho, keep_i=True)
    g = fefferman_metric(prob, rho, keep_i=True)
    assert (cf.metric() - g.g).applyfunc(sp.simplify) == sp.zeros(4)


@pytest.mark.parametrize("Q", FAMILY)
def test_split_signature(Q):
    sigs = signature_at_samples(fefferman_metric(OdeProblem(Q)), k=10, seed=3)
    assert len(sigs) == 10 and set(sigs) == {(2, 2)}


def test_flat_split_metric_has_no_curvature():
    u, v, w, z = sp.symbols("u v w z")
    g = MetricField((u, v, w, z), sp.Matrix([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]))
    cb = CurvatureBundle(g)
    assert all(c == 0 for c in cb.riemann.values())
    assert cb.bach == sp.zeros(4)


def test_degenerate_metric_rejected():
    g = MetricField((x, y, p, phi), sp.diag(1, 1, 1, 0))
    with pytest.raises(DegenerateError):
        CurvatureBundle(g)


@pytest.mark.parametrize("Q", FAMILY)
def test_curvature_identities(bundles, Q):
    cb = bundles[Q]
    assert all_zero(cb.bianchi_residuals()).certainty == "certified"
    assert all_zero(cb.bianchi_residuals()).value
    assert all_zero(cb.ricci_asymmetry()).value
    assert all_zero(cb.weyl_traces()).value
    assert all_zero(cb.bach_asymmetry()).value
    assert is_zero(cb.bach_trace()).value


def test_flat_equation_metric():
    cb = CurvatureBundle(fefferman_metric(OdeProblem("0")))
    assert all(c == 0 for c in cb.weyl.values())
    # rho = 1 is conformally flat but carries Ricci curvature along phi
    want = sp.zeros(4)
    want[3, 3] = sp.Rational(-2, 9)
    assert cb.ricci == want


def test_flat_equation_metric_symbolic_i():
    cb = CurvatureBundle(fefferman_metric(OdeProblem("0"), keep_i=True))
    assert is_zero(cb.ricci[3, 3] + 2 * i**2 / 9).value


def test_flat_equation_einstein_scale():
    cb = CurvatureBundle(fefferman_metric(OdeProblem("0"), sp.exp(-phi / 3)))
    assert cb.ricci == sp.zeros(4)


def test_orientation_makes_plus_block_self_dual():
    s = self_dual_sign()
    A, B = PLUS_BLOCK
    F = {(A, B): 1, (B, A): -1}
    assert _star_pair(F, s) == {k: F.get(k, 0) for k in _star_pair(F, s)}
    A, B = MINUS_BLOCK
    G = {(A, B): 1, (B, A): -1}
    assert _star_pair(G, s) == {k: -G.get(k, 0) for k in _star_pair(G, s)}


@pytest.mark.parametrize("Q", FAMILY)
def test_weyl_halves_follow_invariants(bundles, Q):
    prob = OdeProblem(Q)
    rep = petrov_NN_check(prob, cb=bundles[Q])
    assert rep.plus_zero.value == is_zero(w1(prob)).value
    assert rep.minus_zero.value == is_zero(w2(prob)).value
    for k in (rep.k_plus, rep.k_minus):
        assert k is None or k == sp.Rational(1, 6)


def test_petrov_types(bundles):
    types = {Q: petrov_NN_check(OdeProblem(Q), cb=bundles[Q]).petrov_type for Q in FAMILY}
    assert types == {"0": "O", "p^4": "N x N'", "y^2": "N x O", "a/y^3": "N x O", "p^3 + y^2": "N x O"}


def test_weyl_scale_with_rho():
    r = sp.Symbol("r", positive=True) * sp.exp(-phi / 3)
    rep = petrov_NN_check(OdeProblem("p^4"), rho=r)
    assert is_zero(rep.k_plus - sp.exp(4 * phi / 3) / (6 * sp.Symbol("r", positive=True) ** 4)).value


@pytest.mark.parametrize("Q", ["0", "a/y^3", "p^3 + y^2", "y^2"])
def test_bach_flat_when_criterion_holds(Q):
    v = bach_condition(OdeProblem(Q))
    assert v.criterion_zero.value and v.bach_zero.value and v.consistent


def test_bach_p4():
    v = bach_condition(OdeProblem("p^4"))
    assert not v.criterion_zero.value and not v.bach_zero.value and v.consistent
    assert v.bach[0, 0] == 448 * p**8
    assert v.bach[0, 1] == -448 * p**7
    assert v.bach[1, 1] == 448 * p**6


def test_bach_conformal_weight():
    omega = 1 + x**2
    for Q in ["p^4", "a/y^3"]:
        g = fefferman_metric(OdeProblem(Q))
        B = CurvatureBundle(g).bach
        B2 = CurvatureBundle(g.scaled(omega**2)).bach
        for a_ in range(4):
            for b_ in range(a_, 4):
                assert sampled_zero_test(B2[a_, b_] - B[a_, b_] / omega**2, k=10, seed=5, tol=1e-8).value
        assert all_zero(B2).value == all_zero(B).value


def test_baston_mason():
    assert baston_mason_report(OdeProblem("a/y^3")).holds
    assert baston_mason_report(OdeProblem("a/y^3")).forced_by_w2
    assert baston_mason_report(OdeProblem("0")).holds
    rep = baston_mason_report(OdeProblem("p^4"))
    assert not rep.holds
    assert rep.w1 * rep.w2 == 576 * p**8
