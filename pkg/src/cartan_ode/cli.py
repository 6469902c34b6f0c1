"""Command-line interface.

Exit codes: 0 success, 1 a mathematical verdict came out negative or a
computation hit a degenerate input, 2 usage error.
"""

from __future__ import annotations

import functools
import sys
import time

import click
import sympy as sp

from . import cartan, duality, einstein, fefferman, jet
from .errors import CartanOdeError, ParseError, PatternViolation
from .expr import as_expr, is_zero, simplify
from .realify import CrTwoSymmetry, Realification, realify
from .report import Report, RunConfig
from .symbols import P, X, Y, i, x, y

_PETROV = {"i": "O", "ii": "O x N'", "ii'": "N x O", "iii": "N x N'"}


class Negative(Exception):
    """Raised inside a command body to stop with exit code 1."""


def _common(fn):
    """Options shared by every subcommand."""

    @click.option("--format", "fmt", type=click.Choice(["json", "latex", "text"]), default="json", show_default=True)
    @click.option("--seed", type=int, default=0, show_default=True, help="Seed for sample points.")
    @click.option("--k", type=click.IntRange(min=1), default=10, show_default=True, help="Number of sample points.")
    @click.option("--tol", type=float, default=1e-8, show_default=True, help="Relative tolerance for sampled zero tests.")
    @click.option("--keep-i", is_flag=True, help="Keep i symbolic instead of binding it to 1.")
    @click.option("--no-timing", is_flag=True, help="Omit elapsed time so reports are byte-stable.")
    @functools.wraps(fn)
    def wrapper(fmt, seed, k, tol, keep_i, no_timing, **kw):
        if not tol > 0:
            raise click.BadParameter("must be positive", param_hint="--tol")
        cfg = RunConfig(k=k, tol=tol, keep_i=keep_i, fmt=fmt, seed=seed, timing=not no_timing)
        return fn(cfg, **kw)

    return wrapper


def _parse(text: str, hint: str, **kw):
    try:
        return as_expr(text, **kw)
    except ParseError as exc:
        raise click.BadParameter(str(exc), param_hint=hint) from None


def _problem(text: str) -> jet.OdeProblem:
    try:
        return jet.OdeProblem(text)
    except (ParseError, ValueError) as exc:
        raise click.BadParameter(str(exc), param_hint="--Q") from None


def _run(name: str, inputs: dict, cfg: RunConfig, body) -> None:
    """Run ``body(report)``, print the report and exit with the verdict code."""
    rep = Report(name, inputs, cfg)
    t0 = time.perf_counter()
    code = 0
    try:
        body(rep)
    except Negative:
        rep.negative = True
    except (PatternViolation, CartanOdeError) as exc:
        if isinstance(exc, ParseError):
            raise click.BadParameter(str(exc)) from None
        rep.add("error", "label", f"{type(exc).__name__}: {exc}")
        rep.negative = True
    rep.elapsed_ms = round((time.perf_counter() - t0) * 1000, 1)
    if rep.negative:
        code = 1
    click.echo(rep.render())
    sys.exit(code)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def main():
    """Point invariants, Cartan coframe and Fefferman metrics of y'' = Q(x, y, p)."""


@main.command()
@click.option("--Q", "q", required=True, help="Right-hand side Q(x, y, p).")
@_common
def invariants(cfg, q):
    """Relative invariants w1, w2 and the branch they select."""
    prob = _problem(q)

    def body(rep):
        rep.add("w1", "expression", jet.w1(prob), anchor="relative invariant w1")
        rep.add("w2", "expression", jet.w2(prob), anchor="relative invariant w2")
        bv = jet.branch_classify(prob, **cfg.zero_kw())
        rep.add("branch", "label", bv.branch.value, bv.certainty, "branch of the equivalence problem")

    _run("invariants", {"Q": prob.Q}, cfg, body)


@main.command()
@click.option("--Q", "q", required=True)
@_common
def classify(cfg, q):
    """Branch, expected Petrov type and conformal-Einstein case."""
    prob = _problem(q)

    def body(rep):
        bv = jet.branch_classify(prob, **cfg.zero_kw())
        rep.verdict("w1 == 0", bv.w1_zero)
        rep.verdict("w2 == 0", bv.w2_zero)
        rep.add("branch", "label", bv.branch.value, bv.certainty, "branch of the equivalence problem")
        rep.add("petrov_type", "label", _PETROV[bv.branch.value], bv.certainty, "Weyl tensor type")
        cv = einstein.classify_conformal_einstein(prob, keep_i=cfg.keep_i)
        rep.add("einstein_case", "label", cv.case.value, bv.certainty, "conformal Einstein cases")
        bm = fefferman.baston_mason_report(prob)
        rep.verdict("w1_pp == 0", bm.w1_pp_zero, "Bach-flatness criterion")

    _run("classify", {"Q": prob.Q}, cfg, body)


@main.command("coframe-check")
@click.option("--Q", "q", required=True)
@click.option("--variant", type=click.Choice(["corrected", "verbatim"]), default="corrected", show_default=True)
@_common
def coframe_check(cfg, q, variant):
    """Residuals of the eight structure equations of the Cartan coframe."""
    prob = _problem(q)

    def body(rep):
        res = cartan.structure_residuals(prob, variant)
        for name, form in res.items():
            rep.add(f"residual {name}", "form", form, anchor=f"structure equation d{name}")
            rep.verdict(f"d{name} closes", form.zero_test(**cfg.zero_kw()), f"structure equation d{name}", expect=True)
        if variant == "corrected":
            rep.add("corrections", "label", dict(cartan.CORRECTIONS), anchor="coefficient repairs")

    _run("coframe-check", {"Q": prob.Q, "variant": variant}, cfg, body)


def _rho(text):
    return _parse(text, "--rho") if text is not None else sp.Integer(1)


@main.command("fefferman")
@click.option("--Q", "q", required=True)
@click.option("--rho", default=None, help="Conformal scale rho(x, y, p, phi); default 1.")
@_common
def fefferman_cmd(cfg, q, rho):
    """Fefferman metric and its signature at sample points."""
    prob = _problem(q)
    r = _rho(rho)

    def body(rep):
        g = fefferman.fefferman_metric(prob, r, cfg.keep_i)
        rep.add("metric", "tensor", g.g, anchor="Fefferman metric")
        sigs = fefferman.signature_at_samples(g, cfg.k, cfg.seed)
        ok = all(s == (2, 2) for s in sigs)
        rep.add(
            "signature (2,2)", "verdict", ok, "probabilistic", "split signature",
            {"k": cfg.k, "seed": cfg.seed, "observed": sorted({f"{a},{b}" for a, b in sigs})},
        )
        if not ok:
            raise Negative

    _run("fefferman", {"Q": prob.Q, "rho": r}, cfg, body)


@main.command()
@click.option("--Q", "q", required=True)
@click.option("--rho", default=None)
@_common
def weyl(cfg, q, rho):
    """Self-dual and anti-self-dual Weyl curvature of the Fefferman metric."""
    prob = _problem(q)
    r = _rho(rho)

    def body(rep):
        pr = fefferman.petrov_NN_check(prob, r, cfg.keep_i)
        rep.add("w1", "expression", pr.w1)
        rep.add("w2", "expression", pr.w2)
        rep.verdict("C+ == 0", pr.plus_zero, "self-dual Weyl half")
        rep.verdict("C- == 0", pr.minus_zero, "anti-self-dual Weyl half")
        if pr.k_plus is not None:
            rep.add("C+ / w1", "expression", pr.k_plus, anchor="self-dual Weyl half")
        if pr.k_minus is not None:
            rep.add("C- / w2", "expression", pr.k_minus, anchor="anti-self-dual Weyl half")
        rep.add("petrov_type", "label", pr.petrov_type, anchor="Weyl tensor type")

    _run("weyl", {"Q": prob.Q, "rho": r}, cfg, body)


@main.command()
@click.option("--Q", "q", required=True)
@click.option("--tensor/--no-tensor", default=True, show_default=True, help="Also compute the Bach tensor.")
@_common
def bach(cfg, q, tensor):
    """Bach tensor of the Fefferman metric against the criterion w1_pp = 0."""
    prob = _problem(q)

    def body(rep):
        bv = fefferman.bach_condition(prob, tensor, keep_i=cfg.keep_i)
        rep.add("w1_pp", "expression", bv.w1_pp, anchor="Bach-flatness criterion")
        rep.verdict("w1_pp == 0", bv.criterion_zero, "Bach-flatness criterion")
        if tensor:
            rep.add("bach", "tensor", bv.bach, anchor="Bach tensor")
            rep.verdict("bach == 0", bv.bach_zero, "Bach tensor")
            rep.add("consistent", "verdict", bv.consistent, anchor="Bach-flatness criterion")
            if not bv.consistent:
                raise Negative

    _run("bach", {"Q": prob.Q}, cfg, body)


@main.command("einstein-check")
@click.option("--case", type=click.IntRange(1, 3), required=True, help="1: w1=w2=0, 2: w2=0, 3: w1=0.")
@click.option("--family", type=click.IntRange(1, 2), default=1, show_default=True)
@click.option("--a", default="0")
@click.option("--b", default="0")
@click.option("--c", default="0")
@click.option("--Q", "q", default="0")
@_common
def einstein_check(cfg, case, family, a, b, c, q):
    """Conformal-Einstein families and the case-3 equation."""
    kw = cfg.zero_kw()
    if case == 2:
        try:
            fam = einstein.CaseTwoFamily(a, b, c, family)
        except (ParseError, ValueError) as exc:
            raise click.BadParameter(str(exc)) from None

        def body(rep):
            rho, prob = einstein.case2_build(fam, cfg.keep_i)
            rep.add("Q", "expression", prob.Q, anchor="case 2 family")
            rep.add("rho", "expression", rho, anchor="case 2 family")
            rep.verdict("w2 == 0", is_zero(jet.w2(prob)), "case 2 family", expect=True)
            if cfg.keep_i:
                rep.add("ricci", "label", "skipped: Ricci is computed with i = 1")
                return
            rep.verdict("ricci == 0", einstein.family_ricci_test(fam, **kw), "Ricci-flat family", expect=True)

        _run("einstein-check", {"case": case, "family": family, "a": fam.a, "b": fam.b, "c": fam.c}, cfg, body)
    elif case == 3:
        av = _parse(a, "--a", functions={"a": (x, y)})
        prob = _problem(q)

        def body(rep):
            res = einstein.case3_residual(av, prob.Q)
            rep.add("residual", "expression", res, anchor="case 3 equation")
            rep.verdict("residual == 0", is_zero(res, **kw), "case 3 equation", expect=True)

        _run("einstein-check", {"case": case, "a": av, "Q": prob.Q}, cfg, body)
    else:
        prob = _problem(q)

        def body(rep):
            cv = einstein.classify_conformal_einstein(prob, keep_i=cfg.keep_i)
            rep.verdict("w1 == 0", cv.w1_zero, "case 1", expect=True)
            rep.verdict("w2 == 0", cv.w2_zero, "case 1", expect=True)
            rep.add("einstein_case", "label", cv.case.value, anchor="conformal Einstein cases")

        _run("einstein-check", {"case": case, "Q": prob.Q}, cfg, body)


@main.command()
@click.option("--Q", "q", default=None, help="Original equation; enables the solution and duality checks.")
@click.option("--solution", default=None, help='Implicit general solution, e.g. "y^2 = Y*(x-X)^2 + a/Y".')
@click.option("--section", default=None, help="Section x = s(X, Y, P).")
@click.option("--param", "params", multiple=True, help="NAME=VALUE for the numeric cross-check; unset constants are 1.")
@_common
def dual(cfg, q, solution, section, params):
    """Dual equation from a general solution or a section."""
    if solution is None and section is None:
        raise click.UsageError("give --solution or --section")
    prob = _problem(q) if q is not None else None
    sol = None
    if solution is not None:
        try:
            sol = duality.GeneralSolution.parse(solution)
        except ParseError as exc:
            raise click.BadParameter(str(exc), param_hint="--solution") from None
    sec = _parse(section, "--section") if section is not None else None
    bound = {}
    for item in params:
        name, sep, val = item.partition("=")
        if not sep or not name.strip().isidentifier():
            raise click.BadParameter(f"expected NAME=VALUE, got {item!r}", param_hint="--param")
        bound[sp.Symbol(name.strip())] = _parse(val, "--param")

    def body(rep):
        if prob is not None and sol is not None:
            sv = duality.verify_general_solution(prob, sol)
            rep.verdict("solves", sv.solves, "general solution", expect=True)
        if sol is None:
            branches = [duality.DualBranch(sec, duality._from_jet(duality.dual_from_section(sec).Q), 0)]
        else:
            branches = duality.dual_eliminate(sol, sec)
        for n, br in enumerate(branches):
            tag = f"branch {n} (sign {br.sign:+d})" if br.sign else f"branch {n}"
            rep.add(f"{tag} section", "expression", br.section, anchor="dual section")
            rep.add(f"{tag} q", "expression", br.q, anchor="dual equation")
            if sol is not None:
                free = (sol.G.free_symbols | br.q.free_symbols) - {x, y, X, Y, P}
                vals = {s: bound.get(s, sp.Integer(1)) for s in free}
                rep.verdict(
                    f"{tag} cross-check", duality.cross_check_branch(sol, br, vals, **cfg.zero_kw()), "dual equation", expect=True
                )
            if prob is not None and is_zero(jet.w2(prob)).value and not is_zero(jet.w1_raw(prob)).value:
                v = duality.prop2_check(prob, br.problem(), **cfg.zero_kw())
                rep.verdict(f"{tag} w1(dual) == 0", v.w1_dual_zero, "duality swaps invariants", expect=True)
                rep.verdict(f"{tag} w2(dual) != 0", v.w2_dual_nonzero, "duality swaps invariants", expect=True)

    inputs = {"Q": prob.Q if prob else None, "solution": sol.G if sol else None, "section": sec}
    _run("dual", {k: v for k, v in inputs.items() if v is not None}, cfg, body)


@main.command("cr-realify")
@click.option("--f", "f", required=True, help="Profile f(y) of the CR structure.")
@click.option("--n", default=None, help="Value substituted for n in f.")
@click.option("--i", "ival", default="symbolic", show_default=True, help='Value of i for the metric, or "symbolic".')
@_common
def cr_realify(cfg, f, n, ival):
    """ODE class of a CR structure with two symmetries, its invariants and metric."""
    fe = _parse(f, "--f")
    if n is not None:
        fe = fe.subs(sp.Symbol("n"), _parse(n, "--n"))
    iv = None if ival == "symbolic" else _parse(ival, "--i")
    if iv is not None and is_zero(iv).value:
        raise click.BadParameter("i must be nonzero", param_hint="--i")

    def body(rep):
        try:
            cr = CrTwoSymmetry(fe)
        except ValueError as exc:
            raise click.BadParameter(str(exc), param_hint="--f") from None
        rf = realify(cr)
        Q = rf.Q if iv is None else simplify(rf.Q.subs(i, iv))
        rep.add("Q", "expression", Q, anchor="realified equation")
        if not rf.closed_form:
            rep.add("inverse", "label", "opaque: f has no closed-form inverse, monotonicity only sampled")
            return
        prob = Realification(Q, rf.forms, True).problem()
        rep.add("w1", "expression", jet.w1(prob), anchor="relative invariant w1")
        rep.add("w2", "expression", jet.w2(prob), anchor="relative invariant w2")
        keep = cfg.keep_i or iv is None
        rep.add("metric", "tensor", fefferman.fefferman_metric(prob, 1, keep).g, anchor="Fefferman metric")

    _run("cr-realify", {"f": fe, "i": iv if iv is not None else "symbolic"}, cfg, body)


@main.command()
@click.option("--Q", "q", required=True)
@_common
def tresse(cfg, q):
    """Invariant forms built from w1 and w2 (needs w1 * w2 != 0)."""
    prob = _problem(q)

    def body(rep):
        tf = jet.tresse_forms(prob, **cfg.zero_kw())
        for name in ("I1", "I2", "I3", "I4"):
            rep.add(name, "form", getattr(tf, name), anchor="invariant forms")

    _run("tresse", {"Q": prob.Q}, cfg, body)


if __name__ == "__main__":
    main()
