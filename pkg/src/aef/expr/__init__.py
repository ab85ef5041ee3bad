"""Minimal computer-algebra kernel."""
from .calculus import differentiate, gradient, substitute, substitute_function, transform
from .codegen import compile_exprs
from .evaluate import evaluate, evaluate_batch
from .nodes import (ELEMENTARY, MINUS_ONE, ONE, ZERO, Add, Call, Const, Coord, Expr, Func, Mul,
                    Param, Pow, add, as_expr, atan, atoms, call, cos, cosh, depends_on, div, exp,
                    is_const, log, mul, neg, power, sin, sinh, sub)
from .parser import parse, render
from .simplify import normalize, tidy
from .symbols import DEFAULT_DOMAIN, SIGNS, STANDARD_COORDINATES, Domain, SymbolTable
from .zero import (ZeroTestConfig, ZeroTestResult, configure, current_config, find_witness,
                   is_zero, sample_points, set_seed, zero_test, zero_test_settings)
