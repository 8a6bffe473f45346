"""A small arithmetic grammar for curve coordinates and constants.

Accepted: numbers, one free variable, ``pi``, ``e``, the operators
``+ - * / **`` (``^`` is read as ``**``), and the functions
``sin cos tan sec sqrt exp``. Powers must be integer constants or ``0.5``.
Expressions evaluate on plain floats or on :class:`~rectify_nd.jets.Jet`.
"""

from __future__ import annotations

import ast
import math

from .errors import SchemaError
from .jets import Jet, jet_cos, jet_exp, jet_sec, jet_sin, jet_sqrt, jet_tan

_FUNCS = {
    "sin": (math.sin, jet_sin),
    "cos": (math.cos, jet_cos),
    "tan": (math.tan, jet_tan),
    "sec": (lambda x: 1.0 / math.cos(x), jet_sec),
    "sqrt": (math.sqrt, jet_sqrt),
    "exp": (math.exp, jet_exp),
}
_CONSTS = {"pi": math.pi, "e": math.e}


class Expression:
    """Parsed expression in at most one variable."""

    def __init__(self, source: str, variable: str = "t") -> None:
        self.source = source
        self.variable = variable
        try:
            tree = ast.parse(source.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise SchemaError(f"cannot parse expression {source!r}: {exc.msg}") from None
        self._check(tree.body)
        self._tree = tree.body

    def _check(self, node) -> None:
        if isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
                raise SchemaError(f"unsupported literal in {self.source!r}")
        elif isinstance(node, ast.Name):
            if node.id != self.variable and node.id not in _CONSTS:
                raise SchemaError(f"unknown name {node.id!r} in {self.source!r}")
        elif isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
            self._check(node.operand)
        elif isinstance(node, ast.BinOp) and isinstance(
            node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)
        ):
            self._check(node.left)
            self._check(node.right)
            if isinstance(node.op, ast.Pow):
                k = self._const_exponent(node.right)
                if k != 0.5 and k != int(k):
                    raise SchemaError(f"only integer or 0.5 powers allowed in {self.source!r}")
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
                raise SchemaError(f"unknown function in {self.source!r}")
            if len(node.args) != 1 or node.keywords:
                raise SchemaError(f"functions take exactly one argument in {self.source!r}")
            self._check(node.args[0])
        else:
            raise SchemaError(f"unsupported syntax in {self.source!r}")

    def _const_exponent(self, node) -> float:
        try:
            return float(Expression._eval(self, node, None))
        except (SchemaError, TypeError):
            raise SchemaError(f"exponent must be a constant in {self.source!r}") from None

    @property
    def is_constant(self) -> bool:
        return not any(
            isinstance(n, ast.Name) and n.id == self.variable for n in ast.walk(self._tree)
        )

    def __call__(self, x):
        return self._eval(self._tree, x)

    def _eval(self, node, x):
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id == self.variable:
                if x is None:
                    raise TypeError("expression is not constant")
                return x
            return _CONSTS[node.id]
        if isinstance(node, ast.UnaryOp):
            v = self._eval(node.operand, x)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            a = self._eval(node.left, x)
            b = self._eval(node.right, x)
            op = node.op
            if isinstance(op, ast.Add):
                return a + b
            if isinstance(op, ast.Sub):
                return a - b
            if isinstance(op, ast.Mult):
                return a * b
            if isinstance(op, ast.Div):
                return a / b
            k = float(b)
            if isinstance(a, Jet):
                return jet_sqrt(a) if k == 0.5 else a ** int(k)
            return a**k
        fn_float, fn_jet = _FUNCS[node.func.id]
        arg = self._eval(node.args[0], x)
        return fn_jet(arg) if isinstance(arg, Jet) else fn_float(arg)


def number(value) -> float:
    """Accept a JSON number or a constant expression string such as ``"sqrt(0.5)"``."""
    if isinstance(value, bool):
        raise SchemaError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        e = Expression(value)
        if not e.is_constant:
            raise SchemaError(f"expected a constant, got {value!r}")
        return float(e(None))
    raise SchemaError(f"expected a number, got {value!r}")
