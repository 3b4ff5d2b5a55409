"""Holomorphic rational expressions in ``z1``, ``z2``.

Grammar (whitespace-insensitive)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | '+' unary | primary
    primary := NUMBER | 'i' | 'z1' | 'z2' | NAME
             | 'conj' '(' expr ')' | '(' expr ')'

``NAME`` is looked up in a caller-supplied constant table. Complex literals
are written ``re``, ``im*i`` or ``re+im*i``.

Evaluation works elementwise on numpy arrays, so a compiled expression can
be applied to a whole batch of points at once.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union
from collections.abc import Callable, Mapping

import numpy as np

from .errors import ExprError, LexError, PoleError, SyntaxParseError, UnboundIdentifierError

POLE_TOL = 1e-15


@dataclass(frozen=True)
class Const:
    value: complex
    name: str | None = None
    pos: int = field(default=-1, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))


@dataclass(frozen=True)
class Var:
    index: int
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Conj:
    arg: "Expr"
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Neg:
    arg: "Expr"
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Div:
    left: "Expr"
    right: "Expr"
    pos: int = field(default=-1, compare=False)


Expr = Union[Const, Var, Conj, Neg, Add, Sub, Mul, Div]
_BINARY = (Add, Sub, Mul, Div)

# ---------------------------------------------------------------------------
# lexing / parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/()])
    """,
    re.VERBOSE,
)
_RESERVED = {"i", "z1", "z2", "conj"}


def _tokenize(src: str):
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise LexError(f"unexpected character {src[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str, constants: Mapping[str, complex]):
        self.tokens = _tokenize(src)
        self.i = 0
        self.constants = constants

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, val, pos = self.take()
        if val != text or kind == "end":
            found = "end of input" if kind == "end" else repr(val)
            raise SyntaxParseError(f"expected {text!r}, found {found}", pos)

    def parse(self) -> Expr:
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise SyntaxParseError(f"expected operator or end of input, found {val!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, pos = self.take()
            rhs = self.term()
            node = Add(node, rhs, pos) if op == "+" else Sub(node, rhs, pos)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, pos = self.take()
            rhs = self.unary()
            node = Mul(node, rhs, pos) if op == "*" else Div(node, rhs, pos)
        return node

    def unary(self):
        kind, val, pos = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Neg(self.unary(), pos)
        if kind == "op" and val == "+":
            self.take()
            return self.unary()
        return self.primary()

    def primary(self):
        kind, val, pos = self.take()
        if kind == "num":
            return Const(complex(float(val)), None, pos)
        if kind == "ident":
            if val == "z1":
                return Var(1, pos)
            if val == "z2":
                return Var(2, pos)
            if val == "i":
                return Const(1j, "i", pos)
            if val == "conj":
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Conj(arg, pos)
            if val not in self.constants:
                raise UnboundIdentifierError(val, pos)
            return Const(complex(self.constants[val]), val, pos)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(val)
        raise SyntaxParseError(f"expected a number, identifier or '(', found {found}", pos)


def parse(src: str, constants: Mapping[str, complex] | None = None) -> Expr:
    """Parse ``src`` into an expression tree.

    Raises :class:`LexError`, :class:`SyntaxParseError` or
    :class:`UnboundIdentifierError`, each carrying the offending position.
    """
    constants = dict(constants or {})
    clash = _RESERVED.intersection(constants)
    if clash:
        raise ExprError(f"constant names {sorted(clash)} are reserved")
    return _Parser(src, constants).parse()


# ---------------------------------------------------------------------------
# structure

def children(node: Expr):
    if isinstance(node, _BINARY):
        return (node.left, node.right)
    if isinstance(node, (Conj, Neg)):
        return (node.arg,)
    return ()


def has_var(node: Expr) -> bool:
    if isinstance(node, Var):
        return True
    return any(has_var(c) for c in children(node))


@dataclass
class HolomorphyReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def validate_holomorphic(node: Expr) -> HolomorphyReport:
    """Every ``conj`` must wrap a variable-free subtree."""
    report = HolomorphyReport()

    def walk(n):
        if isinstance(n, Conj) and has_var(n.arg):
            report.violations.append((n.pos, pretty_print(n)))
        for c in children(n):
            walk(c)

    walk(node)
    return report


def _const_value(node: Expr) -> complex:
    return complex(compile_expr(node)(0j, 0j))


def normalize(node: Expr) -> Expr:
    """Fold every variable-free subtree into a single unnamed constant.

    Constant subtrees that hit a pole or overflow are kept as trees (with
    normalized children) so the result stays comparable.
    """
    if not has_var(node):
        try:
            value = _const_value(node)
        except (PoleError, OverflowError, ZeroDivisionError):
            value = None
        if value is not None and np.isfinite(value):
            return Const(value)
    if isinstance(node, Const):
        return Const(node.value)
    if isinstance(node, Var):
        return Var(node.index)
    if isinstance(node, (Conj, Neg)):
        return type(node)(normalize(node.arg))
    return type(node)(normalize(node.left), normalize(node.right))


_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3}
_SYMBOL = {Add: "+", Sub: "-", Mul: "*", Div: "/"}


def _format_const(node: Const) -> tuple[str, int]:
    if node.name is not None:
        return node.name, 4
    re_, im = node.value.real, node.value.imag
    if im == 0.0:
        text = repr(re_)
        return (f"({text})" if text.startswith("-") else text), 4
    if re_ == 0.0:
        return f"({im!r}*i)", 4
    sign = "-" if im < 0 else "+"
    return f"({re_!r}{sign}{abs(im)!r}*i)", 4


def _pp(node: Expr) -> tuple[str, int]:
    if isinstance(node, Const):
        return _format_const(node)
    if isinstance(node, Var):
        return f"z{node.index}", 4
    if isinstance(node, Conj):
        return f"conj({_pp(node.arg)[0]})", 4
    if isinstance(node, Neg):
        text, prec = _pp(node.arg)
        return ("-" + (text if prec >= 3 else f"({text})")), 3
    prec = _PREC[type(node)]
    lt, lp = _pp(node.left)
    rt, rp = _pp(node.right)
    if lp < prec:
        lt = f"({lt})"
    if rp <= prec:
        rt = f"({rt})"
    return f"{lt}{_SYMBOL[type(node)]}{rt}", prec


def pretty_print(node: Expr) -> str:
    return _pp(node)[0]


# ---------------------------------------------------------------------------
# evaluation

def _check_den(den, z1, z2):
    mod = np.abs(den)
    if np.ndim(mod) == 0:
        if mod < POLE_TOL:
            raise PoleError((complex(z1), complex(z2)), float(mod))
        return
    bad = mod < POLE_TOL
    if np.any(bad):
        k = int(np.argmax(bad))
        p1 = np.broadcast_to(z1, mod.shape).flat[k]
        p2 = np.broadcast_to(z2, mod.shape).flat[k]
        raise PoleError((complex(p1), complex(p2)), float(mod.flat[k]))


def compile_expr(node: Expr) -> Callable:
    """Turn a tree into a closure ``f(z1, z2)``; works on scalars or arrays."""
    if isinstance(node, Const):
        v = node.value
        return lambda z1, z2: v
    if isinstance(node, Var):
        return (lambda z1, z2: z1) if node.index == 1 else (lambda z1, z2: z2)
    if isinstance(node, Conj):
        f = compile_expr(node.arg)
        return lambda z1, z2: np.conj(f(z1, z2))
    if isinstance(node, Neg):
        f = compile_expr(node.arg)
        return lambda z1, z2: -f(z1, z2)
    fl, fr = compile_expr(node.left), compile_expr(node.right)
    if isinstance(node, Add):
        return lambda z1, z2: fl(z1, z2) + fr(z1, z2)
    if isinstance(node, Sub):
        return lambda z1, z2: fl(z1, z2) - fr(z1, z2)
    if isinstance(node, Mul):
        return lambda z1, z2: fl(z1, z2) * fr(z1, z2)

    def div(z1, z2):
        den = fr(z1, z2)
        _check_den(den, z1, z2)
        return fl(z1, z2) / den

    return div


def evaluate(node: Expr, z) -> complex:
    """Value of ``node`` at the point ``z = (z1, z2)``."""
    value = compile_expr(node)(complex(z[0]), complex(z[1]))
    return complex(value)


# ---------------------------------------------------------------------------
# differentiation

_ZERO = Const(0j)
_ONE = Const(1 + 0j)


def _is(node, value):
    return isinstance(node, Const) and node.name is None and node.value == value


def _add(a, b):
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    return Add(a, b)


def _sub(a, b):
    if _is(b, 0):
        return a
    if _is(a, 0):
        return Neg(b)
    return Sub(a, b)


def _mul(a, b):
    if _is(a, 0) or _is(b, 0):
        return _ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    return Mul(a, b)


def d_dz(node: Expr, j: int) -> Expr:
    """Formal partial derivative with respect to ``z_j``."""
    if j not in (1, 2):
        raise ExprError(f"variable index must be 1 or 2, got {j}")
    if isinstance(node, Const):
        return _ZERO
    if isinstance(node, Var):
        return _ONE if node.index == j else _ZERO
    if isinstance(node, Conj):
        if has_var(node.arg):
            raise ExprError("cannot differentiate conj of a variable expression")
        return _ZERO
    if isinstance(node, Neg):
        d = d_dz(node.arg, j)
        return _ZERO if _is(d, 0) else Neg(d)
    u, v = node.left, node.right
    du, dv = d_dz(u, j), d_dz(v, j)
    if isinstance(node, Add):
        return _add(du, dv)
    if isinstance(node, Sub):
        return _sub(du, dv)
    if isinstance(node, Mul):
        return _add(_mul(du, v), _mul(u, dv))
    # quotient rule
    if _is(dv, 0):
        return _ZERO if _is(du, 0) else Div(du, v)
    return Div(_sub(_mul(du, v), _mul(u, dv)), Mul(v, v))
