"""Levi-Civita curvature of a metric given in coordinates.

Conventions::

    Gamma^a_{bc} = 1/2 g^{ad} (g_{db,c} + g_{dc,b} - g_{bc,d})
    R^a_{bcd}   = d_c Gamma^a_{bd} - d_d Gamma^a_{bc}
                  + Gamma^a_{ce} Gamma^e_{bd} - Gamma^a_{de} Gamma^e_{bc}
    Ric_{bd}    = R^a_{bad}
    B_{ab}      = nabla^c nabla^d C_{acbd} + 1/2 Ric^{cd} C_{acbd}
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Callable

import sympy as sp

from .errors import DegenerateError
from .expr import ZeroTest, is_zero, simplify


@dataclass(frozen=True)
class MetricField:
    """A symmetric ``n x n`` metric over ``coords``."""

    coords: tuple
    g: sp.Matrix
    conformal_factor: sp.Expr | None = field(default=None, compare=False)

    def __post_init__(self):
        g = sp.Matrix(self.g)
        if g.shape != (len(self.coords),) * 2:
            raise ValueError("metric shape does not match the chart")
        if g != g.T:
            raise ValueError("metric must be symmetric")
        object.__setattr__(self, "g", g.applyfunc(simplify))
        object.__setattr__(self, "coords", tuple(self.coords))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def det(self) -> sp.Expr:
        return simplify(self.g.det(method="berkowitz"))

    def scaled(self, factor) -> "MetricField":
        """The conformally related metric ``factor * g``."""
        return MetricField(self.coords, self.g * factor)

    def subs(self, mapping) -> "MetricField":
        return MetricField(self.coords, self.g.subs(mapping))

    def as_json(self) -> dict:
        from .expr import to_text

        n = self.dim
        return {f"{a},{b}": to_text(self.g[a, b]) for a in range(n) for b in range(a, n) if self.g[a, b] != 0}


def signature(g: MetricField, point) -> tuple[int, int]:
    """``(positive, negative)`` eigenvalue counts of ``g`` at a numeric point."""
    import numpy as np

    from .expr import eval_numeric

    vals = [[float(eval_numeric(g.g[a, b], point)) for b in range(g.dim)] for a in range(g.dim)]
    ev = np.linalg.eigvalsh(np.array(vals))
    scale = max(1.0, float(np.max(np.abs(ev))))
    pos = int(np.sum(ev > 1e-12 * scale))
    neg = int(np.sum(ev < -1e-12 * scale))
    return pos, neg


class CurvatureBundle:
    """Lazily computed curvature tensors of a metric.

    Every component is passed through ``simplifier`` (the exact normal form
    by default), so zero tests on components are exact.
    """

    def __init__(self, metric: MetricField, simplifier: Callable = simplify):
        self.metric = metric
        self.simp = simplifier
        self.n = metric.dim
        self.X = metric.coords
        self.g = metric.g
        if is_zero(metric.det()).value:
            raise DegenerateError("metric is degenerate")

    @cached_property
    def ginv(self) -> sp.Matrix:
        return self.g.inv(method="LU").applyfunc(self.simp)

    @cached_property
    def christoffel(self) -> list:
        n, X, g, gi, s = self.n, self.X, self.g, self.ginv, self.simp
        dg = [[[sp.diff(g[a, b], X[c]) for c in range(n)] for b in range(n)] for a in range(n)]
        G = [[[None] * n for _ in range(n)] for _ in range(n)]
        for a in range(n):
            for b in range(n):
                for c in range(b, n):
                    v = sum(gi[a, d] * (dg[d][b][c] + dg[d][c][b] - dg[b][c][d]) for d in range(n) if gi[a, d] != 0)
                    G[a][b][c] = G[a][c][b] = s(sp.Rational(1, 2) * v)
        return G

    @cached_property
    def riemann(self) -> dict:
        """``R^a_{bcd}`` keyed by ``(a, b, c, d)``."""
        n, X, G, s = self.n, self.X, self.christoffel, self.simp
        R = {}
        for a, b, c, d in product(range(n), repeat=4):
            if c == d:
                R[a, b, c, d] = sp.Integer(0)
            elif c < d:
                v = sp.diff(G[a][b][d], X[c]) - sp.diff(G[a][b][c], X[d])
                v += sum(G[a][c][e] * G[e][b][d] - G[a][d][e] * G[e][b][c] for e in range(n))
                R[a, b, c, d] = s(v)
                R[a, b, d, c] = -R[a, b, c, d]
        return R

    @cached_property
    def riemann_lower(self) -> dict:
        n, g, R, s = self.n, self.g, self.riemann, self.simp
        return {
            (a, b, c, d): s(sum(g[a, e] * R[e, b, c, d] for e in range(n) if g[a, e] != 0))
            for a, b, c, d in product(range(n), repeat=4)
        }

    @cached_property
    def ricci(self) -> sp.Matrix:
        n, R, s = self.n, self.riemann, self.simp
        return sp.Matrix(n, n, lambda b, d: s(sum(R[a, b, a, d] for a in range(n))))

    @cached_property
    def ricci_scalar(self) -> sp.Expr:
        n, gi, Ric = self.n, self.ginv, self.ricci
        return self.simp(sum(gi[a, b] * Ric[a, b] for a in range(n) for b in range(n)))

    @cached_property
    def ricci_upper(self) -> sp.Matrix:
        return (self.ginv * self.ricci * self.ginv).applyfunc(self.simp)

    @cached_property
    def weyl(self) -> dict:
        """``C_{abcd}`` (all indices down); valid in dimension 4."""
        n, g, Ric, Rs, Rl, s = self.n, self.g, self.ricci, self.ricci_scalar, self.riemann_lower, self.simp
        if n != 4:
            raise ValueError("Weyl tensor is implemented for dimension 4")
        C = {}
        for a, b, c, d in product(range(n), repeat=4):
            v = (
                Rl[a, b, c, d]
                - sp.Rational(1, 2) * (g[a, c] * Ric[b, d] - g[a, d] * Ric[b, c] - g[b, c] * Ric[a, d] + g[b, d] * Ric[a, c])
                + Rs / 6 * (g[a, c] * g[b, d] - g[a, d] * g[b, c])
            )
            C[a, b, c, d] = s(v)
        return C

    def _nabla(self, T: dict, rank: int) -> dict:
        """Covariant derivative of a covariant tensor; the new index is last."""
        n, X, G = self.n, self.X, self.christoffel
        out = {}
        for idx in product(range(n), repeat=rank):
            for e in range(n):
                v = sp.diff(T[idx], X[e])
                for slot in range(rank):
                    for f in range(n):
                        Gf = G[f][e][idx[slot]]
                        if Gf == 0:
                            continue
                        j = idx[:slot] + (f,) + idx[slot + 1:]
                        v -= Gf * T[j]
                out[idx + (e,)] = v
        return out

    @cached_property
    def weyl_divergence(self) -> dict:
        """``nabla^d C_{acbd}`` keyed by ``(a, c, b)``."""
        n, gi, s = self.n, self.ginv, self.simp
        DC = self._nabla(self.weyl, 4)
        return {
            (a, c, b): s(sum(gi[d, e] * DC[a, c, b, d, e] for d in range(n) for e in range(n) if gi[d, e] != 0))
            for a, c, b in product(range(n), repeat=3)
        }

    @cached_property
    def _weyl_dd(self) -> dict:
        return self._nabla(self.weyl_divergence, 3)

    def _bach_entry(self, a: int, b: int) -> sp.Expr:
        n, gi, C, DDv, Ru = self.n, self.ginv, self.weyl, self._weyl_dd, self.ricci_upper
        v = sum(gi[c, f] * DDv[a, c, b, f] for c in range(n) for f in range(n) if gi[c, f] != 0)
        v += sp.Rational(1, 2) * sum(Ru[c, d] * C[a, c, b, d] for c in range(n) for d in range(n))
        return self.simp(v)

    @cached_property
    def bach(self) -> sp.Matrix:
        """Upper triangle computed; symmetry is checked by :meth:`bach_asymmetry`."""
        n = self.n
        B = sp.zeros(n)
        for a, b in product(range(n), repeat=2):
            if b >= a:
                B[a, b] = B[b, a] = self._bach_entry(a, b)
        return B

    # -- identity checks ---------------------------------------------------
    def bianchi_residuals(self) -> list:
        R, n = self.riemann, self.n
        return [
            self.simp(R[a, b, c, d] + R[a, c, d, b] + R[a, d, b, c])
            for a, b, c, d in product(range(n), repeat=4)
            if b < c < d
        ]

    def ricci_asymmetry(self) -> list:
        Ric, n = self.ricci, self.n
        return [self.simp(Ric[a, b] - Ric[b, a]) for a in range(n) for b in range(a + 1, n)]

    def weyl_traces(self) -> list:
        n, gi, C = self.n, self.ginv, self.weyl
        return [
            self.simp(sum(gi[a, c] * C[a, b, c, d] for a in range(n) for c in range(n) if gi[a, c] != 0))
            for b, d in product(range(n), repeat=2)
        ]

    def bach_asymmetry(self) -> list:
        """``B_ba - B_ab`` with ``B_ba`` evaluated independently."""
        B, n = self.bach, self.n
        return [self.simp(self._bach_entry(b, a) - B[a, b]) for a in range(n) for b in range(a + 1, n)]

    def bach_trace(self) -> sp.Expr:
        n, gi, B = self.n, self.ginv, self.bach
        return self.simp(sum(gi[a, b] * B[a, b] for a in range(n) for b in range(n)))


def conformal_ricci(cb: CurvatureBundle, sigma: sp.Expr) -> sp.Matrix:
    """Ricci tensor of ``exp(2 sigma) g`` from the curvature of ``g``.

    Only derivatives of ``sigma`` enter, so a logarithmic ``sigma`` keeps
    everything rational::

        Ric' = Ric - (n-2)(nabla d sigma - d sigma d sigma)
               - (Laplacian sigma + (n-2)|d sigma|^2) g
    """
    n, X, G, g, gi, s = cb.n, cb.X, cb.christoffel, cb.g, cb.ginv, cb.simp
    ds = [s(sp.diff(sigma, c)) for c in X]
    hess = sp.Matrix(
        n, n, lambda a, b: sp.diff(ds[a], X[b]) - sum(G[c][a][b] * ds[c] for c in range(n))
    )
    lap = sum(gi[a, b] * hess[a, b] for a in range(n) for b in range(n))
    grad2 = sum(gi[a, b] * ds[a] * ds[b] for a in range(n) for b in range(n))
    out = cb.ricci - (n - 2) * (hess - sp.Matrix(n, n, lambda a, b: ds[a] * ds[b])) - (lap + (n - 2) * grad2) * g
    return out.applyfunc(s)


def all_zero(exprs, **kw) -> ZeroTest:
    """Aggregate zero test over an iterable of expressions."""
    worst = 0.0
    certified = True
    for e in exprs:
        t = is_zero(e, **kw)
        if not t.value:
            return t
        if t.certainty != "certified":
            certified = False
            worst = max(worst, t.max_residual)
    if certified:
        return ZeroTest(True, "certified")
    return ZeroTest(True, "probabilistic", kw.get("k", 8), kw.get("seed", 0), worst)


def curvature_stack(metric: MetricField, simplifier: Callable = simplify) -> CurvatureBundle:
    return CurvatureBundle(metric, simplifier)
