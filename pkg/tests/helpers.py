"""Shared generators for the test suites."""

import random

import sympy as sp
from hypothesis import strategies as st

from cartan_ode.symbols import p, x, y

a = sp.Symbol("a")
ATOMS = (x, y, p, a)


def small_int(lo=-4, hi=4):
    return st.integers(lo, hi)


@st.composite
def polynomials(draw, atoms=ATOMS, max_terms=4, max_deg=3):
    """Sums of ``c * monomial`` with small integer coefficients."""
    n = draw(st.integers(1, max_terms))
    out = sp.Integer(0)
    for _ in range(n):
        c = draw(small_int())
        mono = sp.Integer(1)
        for v in atoms:
            mono *= v ** draw(st.integers(0, max_deg))
        out += c * mono
    return out


@st.composite
def rational_functions(draw, atoms=ATOMS, max_deg=3):
    """``num / (den^2 + 1)``: never identically singular."""
    num = draw(polynomials(atoms, max_deg=max_deg))
    den = draw(polynomials(atoms, max_terms=2, max_deg=min(2, max_deg)))
    return num / (den**2 + 1)


def random_poly(rng: random.Random, vars_, degree: int, box: int = 3) -> sp.Expr:
    """Random polynomial of degree at most ``degree`` in each variable."""
    terms = [sp.Integer(1)]
    for v in vars_:
        terms = [t * v**k for t in terms for k in range(degree + 1)]
    return sum(rng.randint(-box, box) * t for t in terms)
