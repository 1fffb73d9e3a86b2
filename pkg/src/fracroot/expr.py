"""Expression language for the nonlinear systems.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?        # right-associative, exponent must fold to a real constant
    atom   := NUMBER | 'pi' | 'e' | VAR | FUNC '(' expr ')' | '(' expr ')'

Variables are ``x1 .. xn``; plain ``x`` is accepted when ``n == 1``.
Functions are ``sin``, ``cos``, ``exp``, ``sinh`` and ``cosh``.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

from .errors import ArityError, DivByZeroError, ExprSyntaxError
from .specfun import principal_pow

__all__ = [
    "Expr", "Const", "Var", "Neg", "Add", "Sub", "Mul", "Div", "Pow", "Call",
    "FUNCTIONS", "SystemF", "parse", "parse_expr", "to_text", "diff",
    "evaluate", "compile_expr", "is_constant", "variables_in",
]

FUNCTIONS: dict[str, Callable[[complex], complex]] = {
    "sin": cmath.sin,
    "cos": cmath.cos,
    "exp": cmath.exp,
    "sinh": cmath.sinh,
    "cosh": cmath.cosh,
}


class Expr:
    """Base class of the immutable expression tree."""

    __slots__ = ()


@dataclass(frozen=True)
class Const(Expr):
    value: complex
    text: str | None = None  # source spelling, kept for printing

    def __eq__(self, other):
        return isinstance(other, Const) and self.value == other.value

    def __hash__(self):
        return hash(("Const", self.value))


@dataclass(frozen=True)
class Var(Expr):
    index: int  # 1-based
    name: str = field(default="", compare=False)


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: float
    text: str | None = None

    def __eq__(self, other):
        return (isinstance(other, Pow) and self.base == other.base
                and self.exponent == other.exponent)

    def __hash__(self):
        return hash(("Pow", self.base, self.exponent))


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr


ZERO = Const(0j, "0")
ONE = Const(1 + 0j, "1")


# --------------------------------------------------------------------------
# tokenizer / parser

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(src, pos)
        if m is None or m.end() == pos:
            bad = pos + len(src[pos:]) - len(src[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {src[bad]!r}", bad)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str, n: int):
        self.src = src
        self.n = n
        self.tokens = _tokenize(src)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def _take(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def _expect(self, value: str):
        kind, text, pos = self.tok
        if text != value or kind != "op":
            found = "end of input" if kind == "end" else repr(text)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", pos)
        self.i += 1

    def parse(self) -> Expr:
        node = self.expr()
        kind, text, pos = self.tok
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {text!r}", pos)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self._take()[1]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self._take()[1]
            rhs = self.unary()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def unary(self) -> Expr:
        kind, text, _ = self.tok
        if kind == "op" and text in "+-":
            self._take()
            arg = self.unary()
            if text == "+":
                return arg
            if isinstance(arg, Const) and arg.text is not None and not arg.text.startswith("-") \
                    and arg.text not in ("pi", "e"):
                return Const(-arg.value, "-" + arg.text)
            return Neg(arg)
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok[0] == "op" and self.tok[1] == "^":
            _, _, pos = self._take()
            start = self.tok[2]
            exp_node = self.unary()
            end = self.tok[2]
            if not is_constant(exp_node):
                raise ExprSyntaxError("exponent must be a real constant", pos)
            value = evaluate(exp_node, ())
            if value.imag != 0 or not math.isfinite(value.real):
                raise ExprSyntaxError("exponent must be a real constant", pos)
            text = self.src[start:end].strip()
            return Pow(base, value.real, text)
        return base

    def atom(self) -> Expr:
        kind, text, pos = self._take()
        if kind == "num":
            return Const(complex(float(text)), text)
        if kind == "name":
            if text == "pi":
                return Const(complex(math.pi), "pi")
            if text == "e":
                return Const(complex(math.e), "e")
            if text in FUNCTIONS:
                self._expect("(")
                arg = self.expr()
                self._expect(")")
                return Call(text, arg)
            m = re.fullmatch(r"x(\d*)", text)
            if m:
                if m.group(1) == "":
                    if self.n != 1:
                        raise ArityError("bare 'x' is only allowed for n = 1", pos)
                    return Var(1, "x")
                idx = int(m.group(1))
                if not 1 <= idx <= self.n:
                    raise ArityError(f"variable {text} outside x1..x{self.n}", pos)
                return Var(idx, text)
            if self.tok[1] == "(":
                raise ArityError(f"unknown function {text!r}", pos)
            raise ArityError(f"unknown identifier {text!r}", pos)
        if kind == "op" and text == "(":
            node = self.expr()
            self._expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ExprSyntaxError(f"unexpected {found}", pos)


def parse_expr(source: str, n: int) -> Expr:
    """Parse a single expression over ``n`` variables."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return _Parser(source, n).parse()


# --------------------------------------------------------------------------
# printing

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}
_ATOM = 5


def _prec(node: Expr) -> int:
    if isinstance(node, Const):
        txt = _const_text(node)
        return 3 if txt.startswith("-") else _ATOM
    return _PREC.get(type(node), _ATOM)


def _const_text(node: Const) -> str:
    if node.text is not None:
        return node.text
    v = node.value
    if v.imag == 0:
        r = v.real
        return str(int(r)) if r.is_integer() and abs(r) < 1e15 else repr(r)
    return f"({v.real!r}{v.imag:+}j)"


def _wrap(node: Expr, need: bool) -> str:
    s = to_text(node)
    return f"({s})" if need else s


def to_text(node: Expr) -> str:
    """Render ``node`` back to grammar text with minimal parentheses."""
    if isinstance(node, Const):
        return _const_text(node)
    if isinstance(node, Var):
        return node.name or f"x{node.index}"
    if isinstance(node, Neg):
        return "-" + _wrap(node.arg, _prec(node.arg) < 3)
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Pow):
        if node.text is not None:
            etext = node.text
        else:
            e = node.exponent
            etext = str(int(e)) if e.is_integer() and abs(e) < 1e15 else repr(e)
        return _wrap(node.base, _prec(node.base) < _ATOM) + "^" + etext
    p = _PREC[type(node)]
    left = _wrap(node.left, _prec(node.left) < p)
    right = _wrap(node.right, _prec(node.right) <= p)
    if isinstance(node, Add):
        return f"{left} + {right}"
    if isinstance(node, Sub):
        return f"{left} - {right}"
    if isinstance(node, Mul):
        return f"{left}*{right}"
    return f"{left}/{right}"


# --------------------------------------------------------------------------
# evaluation

def is_constant(node: Expr) -> bool:
    if isinstance(node, Var):
        return False
    if isinstance(node, (Const,)):
        return True
    if isinstance(node, (Neg, Call)):
        return is_constant(node.arg)
    if isinstance(node, Pow):
        return is_constant(node.base)
    return is_constant(node.left) and is_constant(node.right)


def variables_in(node: Expr) -> frozenset[int]:
    """Indices of the variables occurring in ``node``."""
    if isinstance(node, Var):
        return frozenset((node.index,))
    if isinstance(node, Const):
        return frozenset()
    if isinstance(node, (Neg, Call)):
        return variables_in(node.arg)
    if isinstance(node, Pow):
        return variables_in(node.base)
    return variables_in(node.left) | variables_in(node.right)


def _int_pow(b: complex, k: int) -> complex:
    acc = b
    for _ in range(k - 1):
        acc = acc * b
    return acc


def _pow(b: complex, p: float) -> complex:
    if p.is_integer() and abs(p) <= 64:
        k = int(p)
        if k == 0:
            return 1 + 0j
        if k > 0:
            return _int_pow(b, k)
        if b == 0:
            raise DivByZeroError("zero raised to a negative power")
        return 1 / _int_pow(b, -k)
    return principal_pow(b, p)


def _div(a: complex, b: complex) -> complex:
    if b == 0:
        raise DivByZeroError("division by zero")
    return a / b


class _CodeGen:
    """Emit one Python expression for a tree; constants go into a namespace."""

    def __init__(self):
        self.ns: dict[str, object] = {
            "_div": _div, "_pow": _pow, "_ipow": _int_pow,
            **{f"_{name}": fn for name, fn in FUNCTIONS.items()},
        }

    def const(self, value) -> str:
        name = f"_c{len(self.ns)}"
        self.ns[name] = value
        return name

    def emit(self, node: Expr) -> str:
        if isinstance(node, Const):
            return self.const(complex(node.value))
        if isinstance(node, Var):
            return f"x[{node.index - 1}]"
        if isinstance(node, Neg):
            return f"(-{self.emit(node.arg)})"
        if isinstance(node, Call):
            return f"_{node.func}({self.emit(node.arg)})"
        if isinstance(node, Pow):
            base = self.emit(node.base)
            p = float(node.exponent)
            if p.is_integer() and 1 <= p <= 64:
                k = int(p)
                if isinstance(node.base, Var):
                    return "(" + "*".join([base] * k) + ")"
                return f"_ipow({base}, {k})"
            return f"_pow({base}, {self.const(p)})"
        lhs, rhs = self.emit(node.left), self.emit(node.right)
        if isinstance(node, Add):
            return f"({lhs} + {rhs})"
        if isinstance(node, Sub):
            return f"({lhs} - {rhs})"
        if isinstance(node, Mul):
            return f"({lhs} * {rhs})"
        if isinstance(node, Div):
            return f"_div({lhs}, {rhs})"
        raise TypeError(f"not an expression node: {node!r}")


def compile_expr(node: Expr) -> Callable[[Sequence[complex]], complex]:
    """Compile a tree into a function ``x -> value`` (``x`` indexed from 0).

    Integer powers become repeated multiplication, so real inputs of
    real-coefficient trees produce exactly real outputs.
    """
    gen = _CodeGen()
    body = gen.emit(node)
    return eval(f"lambda x: {body}", gen.ns)


def evaluate(node: Expr, x: Sequence[complex]) -> complex:
    return compile_expr(node)(tuple(complex(v) for v in x))


# --------------------------------------------------------------------------
# symbolic differentiation

def _is_zero(n: Expr) -> bool:
    return isinstance(n, Const) and n.value == 0


def _is_one(n: Expr) -> bool:
    return isinstance(n, Const) and n.value == 1


def _add(a: Expr, b: Expr) -> Expr:
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    return Add(a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if _is_zero(b):
        return a
    if _is_zero(a):
        return _neg(b)
    return Sub(a, b)


def _neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _mul(a: Expr, b: Expr) -> Expr:
    if _is_zero(a) or _is_zero(b):
        return ZERO
    if _is_one(a):
        return b
    if _is_one(b):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    return Mul(a, b)


def diff(node: Expr, j: int) -> Expr:
    """Partial derivative of ``node`` with respect to ``x_j`` (1-based)."""
    if isinstance(node, Const):
        return ZERO
    if isinstance(node, Var):
        return ONE if node.index == j else ZERO
    if isinstance(node, Neg):
        return _neg(diff(node.arg, j))
    if isinstance(node, Add):
        return _add(diff(node.left, j), diff(node.right, j))
    if isinstance(node, Sub):
        return _sub(diff(node.left, j), diff(node.right, j))
    if isinstance(node, Mul):
        u, v = node.left, node.right
        return _add(_mul(diff(u, j), v), _mul(u, diff(v, j)))
    if isinstance(node, Div):
        u, v = node.left, node.right
        du, dv = diff(u, j), diff(v, j)
        first = ZERO if _is_zero(du) else Div(du, v)
        second = ZERO if _is_zero(dv) else Div(_mul(u, dv), Pow(v, 2.0))
        return _sub(first, second)
    if isinstance(node, Pow):
        db = diff(node.base, j)
        if _is_zero(db):
            return ZERO
        p = node.exponent
        if p == 0:
            return ZERO
        if p == 1:
            return db
        inner = node.base if p == 2 else Pow(node.base, p - 1.0)
        return _mul(_mul(Const(complex(p)), inner), db)
    if isinstance(node, Call):
        da = diff(node.arg, j)
        if _is_zero(da):
            return ZERO
        u = node.arg
        outer = {
            "sin": lambda: Call("cos", u),
            "cos": lambda: Neg(Call("sin", u)),
            "exp": lambda: node,
            "sinh": lambda: Call("cosh", u),
            "cosh": lambda: Call("sinh", u),
        }[node.func]()
        return _mul(outer, da)
    raise TypeError(f"not an expression node: {node!r}")


# --------------------------------------------------------------------------
# systems

@dataclass(frozen=True)
class SystemF:
    """A square system ``f: C^n -> C^n`` given by ``n`` component trees."""

    n: int
    components: tuple[Expr, ...]

    def __post_init__(self):
        if self.n < 1 or len(self.components) != self.n:
            raise ArityError(
                f"system of dimension {self.n} needs {self.n} equations, "
                f"got {len(self.components)}")

    # compiled closures and derived caches live in __dict__; never pickle them
    def __getstate__(self):
        return (self.n, self.components)

    def __setstate__(self, state):
        object.__setattr__(self, "n", state[0])
        object.__setattr__(self, "components", state[1])

    @cached_property
    def variables(self) -> tuple[frozenset[int], ...]:
        return tuple(variables_in(c) for c in self.components)

    @cached_property
    def cache(self) -> dict:
        """Scratch space for derived data keyed by the caller."""
        return {}

    @cached_property
    def _funcs(self):
        return tuple(compile_expr(c) for c in self.components)

    @cached_property
    def _jac_funcs(self):
        return tuple(
            tuple(compile_expr(diff(c, j)) for j in range(1, self.n + 1))
            for c in self.components)

    def _point(self, x) -> tuple[complex, ...]:
        pt = tuple(complex(v) for v in x)
        if len(pt) != self.n:
            raise ValueError(f"expected a point of dimension {self.n}, got {len(pt)}")
        return pt

    def eval(self, x) -> list[complex]:
        pt = self._point(x)
        out = []
        for k, fn in enumerate(self._funcs):
            try:
                out.append(fn(pt))
            except DivByZeroError as exc:
                raise DivByZeroError(str(exc), k) from None
        return out

    __call__ = eval

    def jacobian(self, x) -> list[list[complex]]:
        """Jacobian from exact symbolic partials, evaluated at ``x``."""
        pt = self._point(x)
        rows = []
        for k, row in enumerate(self._jac_funcs):
            try:
                rows.append([fn(pt) for fn in row])
            except DivByZeroError as exc:
                raise DivByZeroError(str(exc), k) from None
        return rows

    def to_text(self) -> list[str]:
        return [to_text(c) for c in self.components]


def parse(source: str | Sequence[str], n: int) -> SystemF:
    """Parse ``n`` equations.

    ``source`` is either a sequence of strings or one string with equations
    separated by newlines or ``;``.
    """
    if isinstance(source, str):
        parts = [p for p in re.split(r"[;\n]", source) if p.strip()]
    else:
        parts = list(source)
    if len(parts) != n:
        raise ArityError(f"expected {n} equations, got {len(parts)}")
    return SystemF(n, tuple(parse_expr(p, n) for p in parts))


def classic_jacobian(f: SystemF, x) -> list[list[complex]]:
    return f.jacobian(x)


def eval_system(f: SystemF, x) -> list[complex]:
    return f.eval(x)
