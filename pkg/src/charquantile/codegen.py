"""Source emission for symmetric central series in nested Horner form.

The C target is a freestanding function

    double name(double u)
    {
        double v = 2.0 * u - 1.0;
        double w = v * v;
        return v*(a0 + w*(a1 + w*(...)));
    }

with no includes.  ``parse_expression`` reads the returned expression back
through Python's ``ast`` (the C subset used is also valid Python) and
evaluates it without ``eval``.
"""

from __future__ import annotations

import ast
import json
import math
import operator
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import mpmath
import numpy as np

from .errors import ShapeError, ValidationError
from .series import CentralSeries, horner_coeffs

FORMAT = "charquantile-series"


@dataclass(frozen=True)
class GeneratedCode:
    lang: str  # "c" | "expr" | "json"
    text: str
    meta: dict = field(default_factory=dict)

    def write(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.text)


def format_coeff(x, digits: int = 17) -> str:
    """Decimal literal with ``digits`` significant figures.

    At 17 or more digits a double prints as its shortest round-trip form;
    more than 17 digits need an mpmath value to say anything new.
    """
    if isinstance(x, mpmath.mpf) and digits > 17:
        with mpmath.workdps(digits + 5):
            s = mpmath.nstr(x, digits, min_fixed=-4, max_fixed=digits)
        return s if any(c in s for c in ".e") else s + ".0"
    x = float(x)
    if not math.isfinite(x):
        raise ValidationError(f"cannot emit non-finite coefficient {x}")
    s = repr(x) if digits >= 17 else f"{x:.{digits}g}"
    return s if any(c in s for c in ".en") else s + ".0"


def horner_expression(coeffs, digits: int = 17) -> str:
    lits = [format_coeff(c, digits) for c in coeffs]
    inner = lits[-1]
    for lit in reversed(lits[:-1]):
        inner = f"({lit} + w*{inner})"
    return f"v*{inner}"


def _coeffs(cs: CentralSeries, digits: int):
    if not cs.symmetric:
        raise ShapeError("Horner emission needs a symmetric series (odd powers of v = 2u - 1)")
    return horner_coeffs(cs, mp=digits > 17 and cs.mp_qcoeffs is not None)


def _describe(cs: CentralSeries) -> str:
    d = dict(cs.dist)
    name = d.pop("dist", "custom")
    args = ", ".join(f"{k}={v}" for k, v in d.items())
    return f"{name}({args})" if args else name


def emit_horner_c(cs: CentralSeries, digits: int = 17, name: str = "charquantile_w") -> GeneratedCode:
    if not name.isidentifier():
        raise ValidationError(f"{name!r} is not a valid C identifier")
    if digits < 1:
        raise ValidationError("digits must be positive")
    a = _coeffs(cs, digits)
    expr = horner_expression(a, digits)
    text = (
        f"/* quantile of {_describe(cs)}, {len(a)} odd orders, v = 2u - 1, w = v*v */\n"
        f"double {name}(double u)\n"
        "{\n"
        "    double v = 2.0 * u - 1.0;\n"
        "    double w = v * v;\n"
        f"    return {expr};\n"
        "}\n"
    )
    return GeneratedCode("c", text, {"terms": len(a), "digits": digits, "dist": dict(cs.dist)})


def emit_expression(cs: CentralSeries, digits: int = 17) -> GeneratedCode:
    """Bare nested expression in ``v`` and ``w`` (``v = 2u - 1``, ``w = v^2``)."""
    a = _coeffs(cs, digits)
    return GeneratedCode("expr", horner_expression(a, digits) + "\n",
                         {"terms": len(a), "digits": digits, "dist": dict(cs.dist)})


def emit_coeff_json(cs: CentralSeries) -> GeneratedCode:
    doc = {
        "format": FORMAT,
        "version": 1,
        "u0": cs.u0,
        "wdash": cs.wdash,
        "qcoeffs": list(cs.qcoeffs),
        "symmetric": cs.symmetric,
        "dist": dict(cs.dist),
    }
    if cs.symmetric:
        doc["horner"] = list(horner_coeffs(cs))
    return GeneratedCode("json", json.dumps(doc, indent=1) + "\n",
                         {"terms": cs.nterms, "digits": 17, "dist": dict(cs.dist)})


def load_coeff_json(source: Union[str, Path, dict]) -> CentralSeries:
    if isinstance(source, dict):
        doc = source
    elif isinstance(source, str) and source.lstrip().startswith("{"):
        doc = json.loads(source)
    else:
        doc = json.loads(Path(source).read_text())
    if doc.get("format") != FORMAT:
        raise ValidationError(f"not a {FORMAT} document")
    return CentralSeries(float(doc["u0"]), float(doc["wdash"]), tuple(float(q) for q in doc["qcoeffs"]),
                         bool(doc["symmetric"]), dict(doc.get("dist", {})))


# ---------------------------------------------------------------------------
# parse-back

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def _walk(node, env):
    if isinstance(node, ast.Expression):
        return _walk(node.body, env)
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_walk(node.left, env), _walk(node.right, env))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
        return _UNOPS[type(node.op)](_walk(node.operand, env))
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name):
        try:
            return env[node.id]
        except KeyError:
            raise ValidationError(f"unbound name {node.id!r} in expression") from None
    raise ValidationError(f"unsupported syntax in expression: {ast.dump(node)[:60]}")


def parse_expression(text: str):
    """Compile an arithmetic expression into ``f(**names)``."""
    tree = ast.parse(text.strip(), mode="eval")
    return lambda **env: _walk(tree, env)


def c_return_expression(code: Union[GeneratedCode, str]) -> str:
    text = code.text if isinstance(code, GeneratedCode) else code
    start = text.index("return ") + len("return ")
    return text[start:text.index(";", start)]


def evaluate_generated(code: GeneratedCode, u):
    """Evaluate emitted C or expression code at ``u`` the way the C would."""
    expr = c_return_expression(code) if code.lang == "c" else code.text
    fn = parse_expression(expr)
    u = np.asarray(u, dtype=float)
    v = 2.0 * u - 1.0
    out = fn(v=v, w=v * v)
    return out if np.ndim(out) else float(out)
