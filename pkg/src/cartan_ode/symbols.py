"""Named coordinate symbols and the canonical generator ordering."""

from __future__ import annotations

import sympy as sp

x, y, p = sp.symbols("x y p")
rho, phi, gamma, gammabar, r = sp.symbols("rho phi gamma gammabar r")
X, Y, P = sp.symbols("X Y P")
i = sp.Symbol("i")  # formal nonzero real constant, never sympy.I

JET_COORDS = (x, y, p)
BUNDLE_COORDS = (x, y, p, rho, phi, gamma, gammabar, r)
FEFFERMAN_COORDS = (x, y, p, phi)
DUAL_COORDS = (X, Y, P)

CANONICAL_ORDER = (x, y, p, rho, phi, gamma, gammabar, r, X, Y, P, i)
_RANK = {s: k for k, s in enumerate(CANONICAL_ORDER)}

# LaTeX names for printing only; the text form stays ASCII so it re-parses.
LATEX_NAMES = {
    "rho": r"\rho",
    "phi": r"\phi",
    "gamma": r"\gamma",
    "gammabar": r"\bar{\gamma}",
    "Phi": r"\Phi",
    "Lambda": r"\Lambda",
}


def sym(name: str) -> sp.Symbol:
    """Return the (assumption-free) symbol with the given name."""
    return sp.Symbol(name)


def symbol_key(s: sp.Symbol) -> tuple:
    if s in _RANK:
        return (0, _RANK[s], "")
    return (1, 0, s.name)


def generator_key(g: sp.Expr) -> tuple:
    """Total order on normal-form generators.

    Coordinate symbols come first in the fixed order, then user symbols
    lexicographically, then function atoms, exponentials and radicals.
    """
    if isinstance(g, sp.Symbol):
        return (0,) + symbol_key(g)
    if isinstance(g, sp.exp):
        cat = 3
    elif isinstance(g, sp.Pow):
        cat = 4
    else:
        cat = 2
    return (cat, 0, sp.srepr(g))
