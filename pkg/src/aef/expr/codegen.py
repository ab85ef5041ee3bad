"""Compile expression lists into straight-line Python functions over floats.

Structurally equal subtrees are computed once (common-subexpression elimination),
which matters for the derivative-heavy right-hand sides of the Hamiltonian flow.
"""
from __future__ import annotations

import math
from typing import Callable, Sequence

from .nodes import Add, Call, Const, Coord, Expr, Func, Mul, Param, Pow

_MATH = {"exp": "exp", "log": "log", "sin": "sin", "cos": "cos", "sinh": "sinh", "cosh": "cosh", "atan": "atan"}


def compile_exprs(exprs: Sequence[Expr], args: Sequence[Expr], name: str = "compiled") -> Callable:
    names: dict[Expr, str] = {}
    for k, a in enumerate(args):
        names[a] = f"x{k}"
    lines: list[str] = []
    counter = [0]

    def emit(node: Expr) -> str:
        hit = names.get(node)
        if hit is not None:
            return hit
        if isinstance(node, Const):
            v = float(node.value)
            return repr(v) if v >= 0 else f"({v!r})"
        if isinstance(node, (Coord, Param, Func)):
            raise KeyError(f"{node} is not among the compiled arguments")
        if isinstance(node, Add):
            code = " + ".join(emit(t) for t in node.terms)
        elif isinstance(node, Mul):
            code = " * ".join(emit(f) for f in node.factors)
        elif isinstance(node, Pow):
            b = emit(node.base)
            ex = node.exponent
            if isinstance(ex, Const) and ex.value.denominator == 1:
                k = int(ex.value)
                code = f"{b} ** {k}" if k > 0 else f"1.0 / {b} ** {-k}"
            else:
                code = f"{b} ** {emit(ex)}"
        elif isinstance(node, Call):
            code = f"{_MATH[node.fn]}({emit(node.arg)})"
        else:
            raise TypeError(type(node).__name__)
        counter[0] += 1
        var = f"t{counter[0]}"
        lines.append(f"    {var} = {code}")
        names[node] = var
        return var

    outs = [emit(e) for e in exprs]
    src = [f"def {name}({', '.join(f'x{k}' for k in range(len(args)))}):"]
    src += lines
    src.append(f"    return ({', '.join(outs)}{',' if len(outs) == 1 else ''})")
    namespace = {k: getattr(math, k) for k in _MATH.values()}
    exec(compile("\n".join(src), f"<{name}>", "exec"), namespace)
    fn = namespace[name]
    fn.source = "\n".join(src)
    return fn
