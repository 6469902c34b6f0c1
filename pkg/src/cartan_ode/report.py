"""Run configuration and report serialization (json, text, latex)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import sympy as sp

from .expr import ZeroTest, to_latex, to_text
from .exterior import DifferentialForm


@dataclass(frozen=True)
class RunConfig:
    k: int = 10
    tol: float = 1e-8
    keep_i: bool = False
    fmt: str = "json"
    seed: int = 0
    timing: bool = True

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.fmt not in ("json", "latex", "text"):
            raise ValueError(f"unknown format {self.fmt!r}")

    def zero_kw(self) -> dict:
        return {"k": self.k, "seed": self.seed, "tol": self.tol}


@dataclass
class Result:
    name: str
    kind: str  # expression | form | tensor | verdict | label | number
    value: Any
    certainty: str = "exact"
    anchor: str = ""
    sampling: dict | None = None

    def as_json(self) -> dict:
        out = {
            "name": self.name,
            "kind": self.kind,
            "value": _json_value(self.value),
            "certainty": self.certainty,
            "paper_anchor": self.anchor,
        }
        if self.sampling:
            out["sampling"] = self.sampling
        return out


def _json_value(v):
    if isinstance(v, DifferentialForm):
        return v.as_json()
    if isinstance(v, sp.MatrixBase):
        return {f"{a},{b}": to_text(v[a, b]) for a in range(v.rows) for b in range(v.cols) if v[a, b] != 0}
    if isinstance(v, sp.Basic):
        return to_text(v)
    if isinstance(v, dict):
        return {str(k): _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


def _latex_value(v) -> str:
    if isinstance(v, DifferentialForm):
        return v.to_latex()
    if isinstance(v, sp.MatrixBase):
        return sp.latex(v)
    if isinstance(v, sp.Basic):
        return to_latex(v)
    if isinstance(v, dict):
        return r",\ ".join(rf"{k}: {_latex_value(x)}" for k, x in v.items())
    if isinstance(v, (list, tuple)):
        return r",\ ".join(_latex_value(x) for x in v)
    if isinstance(v, bool):
        return r"\mathrm{" + str(v).lower() + "}"
    return r"\text{" + str(v).replace("_", r"\_") + "}" if isinstance(v, str) else str(v)


def _text_value(v) -> str:
    if isinstance(v, DifferentialForm):
        return v.to_text()
    j = _json_value(v)
    if isinstance(j, dict):
        return "{" + ", ".join(f"{k}: {x}" for k, x in j.items()) + "}"
    if isinstance(j, list):
        return "[" + ", ".join(str(x) for x in j) + "]"
    return str(j).lower() if isinstance(j, bool) else str(j)


@dataclass
class Report:
    command: str
    inputs: dict
    config: RunConfig
    results: list = field(default_factory=list)
    elapsed_ms: float | None = None
    negative: bool = False  # a verdict contradicted the expected outcome

    def add(self, name, kind, value, certainty="exact", anchor="", sampling=None) -> Result:
        r = Result(name, kind, value, certainty, anchor, sampling)
        self.results.append(r)
        return r

    def verdict(self, name: str, test: ZeroTest, anchor: str = "", expect: bool | None = None, negate=False) -> bool:
        """Record a zero test; ``negate`` reports ``!= 0`` instead of ``== 0``.
        A mismatch with ``expect`` marks the report negative."""
        value = (not test.value) if negate else test.value
        sampling = None
        if test.certainty == "probabilistic":
            sampling = {"k": test.k, "seed": test.seed, "max_residual": test.max_residual}
        self.add(name, "verdict", value, test.certainty, anchor, sampling)
        if expect is not None and value != expect:
            self.negative = True
        return value

    def as_json(self) -> dict:
        return {
            "command": self.command,
            "inputs": {k: _json_value(v) for k, v in self.inputs.items()},
            "results": [r.as_json() for r in self.results],
            "seed": self.config.seed,
            "elapsed_ms": self.elapsed_ms if self.config.timing else None,
        }

    def render(self) -> str:
        fmt = self.config.fmt
        if fmt == "json":
            return json.dumps(self.as_json(), indent=2, sort_keys=False)
        if fmt == "text":
            lines = [f"{self.command}: " + ", ".join(f"{k}={_text_value(v)}" for k, v in self.inputs.items())]
            for r in self.results:
                tag = "" if r.certainty == "exact" else f" [{r.certainty}]"
                lines.append(f"  {r.name} = {_text_value(r.value)}{tag}")
            lines.append(f"  seed = {self.config.seed}")
            if self.config.timing and self.elapsed_ms is not None:
                lines.append(f"  elapsed_ms = {self.elapsed_ms:.1f}")
            return "\n".join(lines)
        rows = [r"\begin{align*}"]
        for r in self.results:
            name = r.name.replace("_", r"\_").replace("!=", r"$\neq$").replace("==", "$=$")
            rows.append(rf"\text{{{name}}} &= {_latex_value(r.value)} \\")
        rows.append(r"\end{align*}")
        return "\n".join(rows)
