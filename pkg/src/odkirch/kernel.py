"""A small expression language for Kirchhoff coefficients M(s, t).

Kernels are written over the two variables s (the solution norm) and t (the
gradient norm).  Grammar, in EBNF:

    expr   = term { ("+" | "-") term } ;
    term   = unary { ("*" | "/") unary } ;
    unary  = "-" unary | power ;
    power  = atom [ "^" unary ] ;
    atom   = NUMBER | "s" | "t" | NAME "(" expr { "," expr } ")" | "(" expr ")" ;

"^" is right-associative and binds tighter than unary minus, so -s^2 means
-(s^2) and 2^3^2 means 2^(3^2).  Available functions: exp, log, sqrt, abs
(one argument), min, max (two arguments).

Evaluation is vectorized over numpy arrays and checks every intermediate node
for finiteness, so division by zero, log of a non-positive value or overflow
surface as KernelEvalError naming the offending subexpression and point
instead of silently propagating nan through a root scan.
"""

import re
from dataclasses import dataclass

import numpy as np

from .errors import KernelEvalError, KernelSyntaxError


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple


FUNCTIONS = {"exp": 1, "log": 1, "sqrt": 1, "abs": 1, "min": 2, "max": 2}
VARIABLES = ("s", "t")

_TOKEN_RE = re.compile(r"""
    (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
  | (?P<ws>\s+)
""", re.VERBOSE)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise KernelSyntaxError(
                f"unrecognized character {text[pos]!r}", pos, "a token"
            )
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, text, pos = self.peek()
        if kind == "op" and text == op:
            return self.advance()
        raise KernelSyntaxError(f"found {text or 'end of input'!r}", pos, f"'{op}'")

    def parse(self):
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise KernelSyntaxError(f"trailing input {text!r}", pos, "end of expression")
        return node

    def expr(self):
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                node = BinOp(text, node, self.term())
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                node = BinOp(text, node, self.unary())
            else:
                return node

    def unary(self):
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            # Exponent may itself carry a sign or another power: s^-t^2.
            return BinOp("^", node, self.unary())
        return node

    def atom(self):
        kind, text, pos = self.advance()
        if kind == "num":
            value = float(text)
            if not np.isfinite(value):
                raise KernelSyntaxError(f"numeric literal {text!r} overflows",
                                        pos, "a representable number")
            return Num(value)
        if kind == "name":
            if text in VARIABLES:
                return Var(text)
            if text in FUNCTIONS:
                self.expect_op("(")
                args = [self.expr()]
                while True:
                    k, t, _ = self.peek()
                    if k == "op" and t == ",":
                        self.advance()
                        args.append(self.expr())
                    else:
                        break
                self.expect_op(")")
                if len(args) != FUNCTIONS[text]:
                    raise KernelSyntaxError(
                        f"{text} takes {FUNCTIONS[text]} argument(s), got {len(args)}",
                        pos, f"{FUNCTIONS[text]} argument(s)"
                    )
                return Call(text, tuple(args))
            raise KernelSyntaxError(
                f"unknown identifier {text!r}", pos,
                f"one of {', '.join(VARIABLES)} or a function name"
            )
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise KernelSyntaxError(
            f"found {text or 'end of input'!r}", pos, "a number, variable or '('"
        )


def parse_kernel(text: str):
    """Parse a kernel expression into its syntax tree."""
    if not isinstance(text, str) or not text.strip():
        raise KernelSyntaxError("empty kernel expression", 0, "an expression")
    return _Parser(text).parse()


# Node precedence for the printer; higher binds tighter.
_PREC_ADD = 1.0
_PREC_MUL = 2.0
_PREC_NEG = 2.5
_PREC_POW = 3.0
_PREC_ATOM = 4.0


def _prec(node) -> float:
    if isinstance(node, (Num, Var, Call)):
        return _PREC_ATOM
    if isinstance(node, Neg):
        return _PREC_NEG
    return {"+": _PREC_ADD, "-": _PREC_ADD,
            "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}[node.op]


def _render(node, min_prec: float) -> str:
    if isinstance(node, Num):
        out = repr(node.value)
    elif isinstance(node, Var):
        out = node.name
    elif isinstance(node, Call):
        out = f"{node.fn}({', '.join(_render(a, 0.0) for a in node.args)})"
    elif isinstance(node, Neg):
        out = "-" + _render(node.arg, _PREC_POW)
    else:
        op = node.op
        if op in "+-":
            out = (_render(node.left, _PREC_ADD) + f" {op} "
                   + _render(node.right, _PREC_MUL))
        elif op in "*/":
            out = (_render(node.left, _PREC_MUL) + f"{op}"
                   + _render(node.right, _PREC_NEG))
        else:
            out = (_render(node.left, _PREC_ATOM) + "^"
                   + _render(node.right, _PREC_NEG))
    if _prec(node) < min_prec:
        return f"({out})"
    return out


def kernel_to_string(node) -> str:
    """Render a syntax tree with minimal parentheses.

    Re-parsing the rendered text reproduces the tree exactly (the printer and
    the grammar agree on precedence and associativity).
    """
    return _render(node, 0.0)


def _first_bad(values, s, t):
    flat_bad = np.nonzero(~np.isfinite(np.broadcast_to(values, s.shape).ravel()))[0]
    i = int(flat_bad[0])
    return (float(s.ravel()[i]), float(t.ravel()[i]))


def _eval(node, s, t):
    if isinstance(node, Num):
        v = np.float64(node.value)
    elif isinstance(node, Var):
        v = s if node.name == "s" else t
    elif isinstance(node, Neg):
        v = -_eval(node.arg, s, t)
    elif isinstance(node, Call):
        args = [_eval(a, s, t) for a in node.args]
        fn = {"exp": np.exp, "log": np.log, "sqrt": np.sqrt, "abs": np.abs,
              "min": np.minimum, "max": np.maximum}[node.fn]
        v = fn(*args)
    else:
        left = _eval(node.left, s, t)
        right = _eval(node.right, s, t)
        if node.op == "+":
            v = left + right
        elif node.op == "-":
            v = left - right
        elif node.op == "*":
            v = left * right
        elif node.op == "/":
            v = np.divide(left, right)
        else:
            v = np.power(left, right)
    if not np.all(np.isfinite(v)):
        raise KernelEvalError("non-finite value", kernel_to_string(node),
                              _first_bad(v, s, t))
    return v


def eval_kernel(node, s, t):
    """Evaluate a kernel tree at (s, t); scalars in, float out; arrays vectorize.

    Scalars and arrays may be mixed; broadcasting follows numpy rules.  Any
    non-finite intermediate raises KernelEvalError identifying the faulting
    subexpression and the first offending point.
    """
    s_arr = np.asarray(s, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    scalar = s_arr.ndim == 0 and t_arr.ndim == 0
    s_b, t_b = np.broadcast_arrays(np.atleast_1d(s_arr), np.atleast_1d(t_arr))
    with np.errstate(all="ignore"):
        out = _eval(node, s_b, t_b)
    out = np.broadcast_to(out, s_b.shape)
    if scalar:
        return float(out[0])
    shape = np.broadcast_shapes(s_arr.shape, t_arr.shape)
    return np.array(out, dtype=float).reshape(shape)


def positivity_screen(node, s_lo: float, s_hi: float, rho: float,
                      n_samples: int = 512):
    """Sample M(s, rho*s) on a log-spaced grid and report the first s with M <= 0.

    Returns None when every sample is strictly positive.  This is a screen,
    not a proof: a sign dip between samples can escape it.
    """
    if not (0.0 < s_lo < s_hi):
        raise KernelSyntaxError("bad screen range", 0, "0 < s_lo < s_hi")
    svals = np.geomspace(s_lo, s_hi, n_samples)
    mvals = eval_kernel(node, svals, rho * svals)
    bad = np.nonzero(~(mvals > 0.0))[0]
    if bad.size == 0:
        return None
    return float(svals[bad[0]])
