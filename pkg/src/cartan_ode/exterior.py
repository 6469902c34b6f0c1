"""Differential forms over an ordered coordinate chart."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Mapping

import sympy as sp

from .errors import ChartMismatchError
from .expr import ZeroTest, as_expr, is_zero, simplify, to_latex, to_text


@dataclass(frozen=True)
class Chart:
    coords: tuple

    def __post_init__(self):
        coords = tuple(as_expr(c) if isinstance(c, str) else c for c in self.coords)
        object.__setattr__(self, "coords", coords)
        if len(set(coords)) != len(coords):
            raise ValueError("chart coordinates must be distinct")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def index(self, s) -> int:
        return self.coords.index(s)

    def d(self, s) -> "DifferentialForm":
        """The coordinate differential ``ds``."""
        return DifferentialForm(self, 1, {(self.index(s),): sp.Integer(1)})

    def zero(self, degree: int) -> "DifferentialForm":
        return DifferentialForm(self, degree, {})

    def function(self, f) -> "DifferentialForm":
        return DifferentialForm(self, 0, {(): as_expr(f)})

    def one_form(self, coeffs: Mapping) -> "DifferentialForm":
        """Build ``sum c_s ds`` from ``{s: c_s}``."""
        return DifferentialForm(self, 1, {(self.index(s),): as_expr(c) for s, c in coeffs.items()})

    def __str__(self):
        return "(" + ", ".join(map(str, self.coords)) + ")"


def _sort_sign(idx: tuple) -> tuple[int, tuple]:
    """Sign of the permutation sorting ``idx`` (0 if an index repeats)."""
    if len(set(idx)) != len(idx):
        return 0, ()
    lst = list(idx)
    sign = 1
    for a in range(len(lst)):
        for b in range(len(lst) - 1 - a):
            if lst[b] > lst[b + 1]:
                lst[b], lst[b + 1] = lst[b + 1], lst[b]
                sign = -sign
    return sign, tuple(lst)


class DifferentialForm:
    """A k-form ``sum_I c_I dx^I`` with strictly increasing index tuples.

    Instances are treated as immutable.  Structurally zero coefficients are
    pruned on construction; :meth:`simplify` also removes coefficients that
    are zero only after normalization.
    """

    __slots__ = ("chart", "degree", "comps")

    def __init__(self, chart: Chart, degree: int, comps: Mapping | None = None):
        self.chart = chart
        self.degree = degree
        clean = {}
        for idx, c in (comps or {}).items():
            idx = tuple(idx)
            if len(idx) != degree:
                raise ValueError(f"index {idx} does not match degree {degree}")
            sign, key = _sort_sign(idx)
            if sign == 0:
                continue
            c = as_expr(c)
            if sign < 0:
                c = -c
            if key in clean:
                c = clean[key] + c
            clean[key] = c
        self.comps = {k: v for k, v in clean.items() if v != 0}

    # -- algebra -----------------------------------------------------------
    def _check(self, other):
        if not isinstance(other, DifferentialForm):
            raise TypeError("expected a DifferentialForm")
        if other.chart != self.chart:
            raise ChartMismatchError(f"charts differ: {self.chart} vs {other.chart}")

    def __add__(self, other):
        if not isinstance(other, DifferentialForm) and other == 0:
            return self
        self._check(other)
        if other.degree != self.degree:
            raise ValueError("cannot add forms of different degree")
        comps = dict(self.comps)
        for k, v in other.comps.items():
            comps[k] = comps.get(k, 0) + v
        return DifferentialForm(self.chart, self.degree, comps)

    __radd__ = __add__

    def __neg__(self):
        return DifferentialForm(self.chart, self.degree, {k: -v for k, v in self.comps.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, f):
        if isinstance(f, DifferentialForm):
            return wedge(self, f)
        f = as_expr(f)
        return DifferentialForm(self.chart, self.degree, {k: f * v for k, v in self.comps.items()})

    def __rmul__(self, f):
        return self.__mul__(f)

    def __truediv__(self, f):
        return self * (1 / as_expr(f))

    def __xor__(self, other):
        return wedge(self, other)

    # -- inspection --------------------------------------------------------
    def coeff(self, *coords) -> sp.Expr:
        """Coefficient of ``d c1 ^ d c2 ^ ...`` (antisymmetry respected)."""
        idx = tuple(self.chart.index(c) for c in coords)
        sign, key = _sort_sign(idx)
        if sign == 0:
            return sp.Integer(0)
        return sign * self.comps.get(key, sp.Integer(0))

    def coefficient_vector(self) -> list:
        """Coefficients of a 1-form in chart order."""
        if self.degree != 1:
            raise ValueError("coefficient_vector needs a 1-form")
        return [self.comps.get((k,), sp.Integer(0)) for k in range(self.chart.dim)]

    def map_coeffs(self, fn: Callable) -> "DifferentialForm":
        return DifferentialForm(self.chart, self.degree, {k: fn(v) for k, v in self.comps.items()})

    def simplify(self) -> "DifferentialForm":
        return self.map_coeffs(simplify)

    def subs(self, mapping) -> "DifferentialForm":
        """Substitute into coefficients only (no pullback of differentials)."""
        return self.map_coeffs(lambda c: c.subs(mapping))

    def restrict(self, values: Mapping) -> "DifferentialForm":
        """Set coordinates to constants and drop their differentials."""
        drop = {self.chart.index(s) for s in values}
        comps = {k: v.subs(values) for k, v in self.comps.items() if not drop & set(k)}
        return DifferentialForm(self.chart, self.degree, comps)

    def zero_test(self, **kw) -> ZeroTest:
        """Aggregate zero test over all coefficients."""
        certainty = "certified"
        worst = 0.0
        for c in self.comps.values():
            t = is_zero(c, **kw)
            if not t.value:
                return t
            if t.certainty != "certified":
                certainty = "probabilistic"
                worst = max(worst, t.max_residual)
        if certainty == "certified":
            return ZeroTest(True, "certified")
        return ZeroTest(True, "probabilistic", kw.get("k", 8), kw.get("seed", 0), worst)

    def is_zero(self, **kw) -> bool:
        return self.zero_test(**kw).value

    def __eq__(self, other):
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        return self.chart == other.chart and self.degree == other.degree and self.comps == other.comps

    __hash__ = None

    def items(self):
        return sorted(self.comps.items())

    def basis_label(self, idx) -> str:
        return "^".join("d" + str(self.chart.coords[k]) for k in idx)

    def to_text(self) -> str:
        if not self.comps:
            return "0"
        parts = []
        for idx, c in self.items():
            if not idx:
                parts.append(to_text(c))
            else:
                parts.append(f"({to_text(c)})*{self.basis_label(idx)}")
        return " + ".join(parts)

    def to_latex(self) -> str:
        if not self.comps:
            return "0"
        parts = []
        for idx, c in self.items():
            basis = r" \wedge ".join(r"d" + to_latex(self.chart.coords[k]) for k in idx)
            parts.append(rf"\left({to_latex(c)}\right) {basis}")
        return " + ".join(parts)

    def as_json(self) -> dict:
        return {self.basis_label(idx) or "1": to_text(c) for idx, c in self.items()}

    def __repr__(self):
        return f"DifferentialForm(deg={self.degree}, {self.to_text()})"


def wedge(a: DifferentialForm, b: DifferentialForm) -> DifferentialForm:
    """Graded wedge product."""
    a._check(b)
    comps: dict = {}
    for I, f in a.comps.items():
        for J, g in b.comps.items():
            sign, key = _sort_sign(I + J)
            if sign == 0:
                continue
            comps[key] = comps.get(key, 0) + sign * f * g
    return DifferentialForm(a.chart, a.degree + b.degree, comps)


def wedge_all(*forms: DifferentialForm) -> DifferentialForm:
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def ext_d(a: DifferentialForm) -> DifferentialForm:
    """Exterior derivative."""
    comps: dict = {}
    coords = a.chart.coords
    for I, c in a.comps.items():
        for k, s in enumerate(coords):
            if k in I:
                continue
            dc = sp.diff(c, s)
            if dc == 0:
                continue
            sign, key = _sort_sign((k,) + I)
            comps[key] = comps.get(key, 0) + sign * dc
    return DifferentialForm(a.chart, a.degree + 1, comps)


def d(f, chart: Chart) -> DifferentialForm:
    """Differential of a scalar expression on ``chart``."""
    return ext_d(chart.function(f))


def pullback(mapping: Mapping, a: DifferentialForm, target: Chart) -> DifferentialForm:
    """Pull ``a`` back along ``source_coord = mapping[source_coord](target)``.

    Every coordinate of ``a``'s chart must be bound.
    """
    source = a.chart
    missing = [s for s in source.coords if s not in mapping]
    if missing:
        raise KeyError(f"unbound source coordinate(s): {', '.join(map(str, missing))}")
    sub = {s: as_expr(mapping[s]) for s in source.coords}
    dphi = [d(sub[s], target) for s in source.coords]
    out = target.zero(a.degree)
    for I, c in a.comps.items():
        c2 = c.subs(sub, simultaneous=True)
        if I:
            out = out + wedge_all(*[dphi[k] for k in I]) * c2
        else:
            out = out + target.function(c2)
    return out


def basis_forms(chart: Chart, degree: int):
    """All ``dx^I`` of the given degree, in lexicographic index order."""
    for I in combinations(range(chart.dim), degree):
        yield DifferentialForm(chart, degree, {I: 1})
