"""Closed-form expressions over x, y, k with exact and vectorized evaluation.

The grammar (whitespace-insensitive):

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := atom ['^' integer]
    atom   := integer | 'x' | 'y' | 'k' | 'pi' | '(-1)^k'
            | '(' expr ')' | 'abs(' expr ')' | '-' factor

ASTs are tagged tuples.  The printer emits text that reparses to the identical
AST, which is what keeps the table files honest under export/import cycles.
"""

from fractions import Fraction
import math

NUM = "num"
VAR = "var"
PI = "pi"
NEGPOW = "negpow"  # (-1)^k
ADD = "add"
SUB = "sub"
MUL = "mul"
DIV = "div"
POW = "pow"
NEG = "neg"
ABS = "abs"

_VARS = ("x", "y", "k")


class ExprSyntaxError(ValueError):
    pass


def _tokens(text):
    out = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if text.startswith("(-1)^k", i):
            out.append(("negpow", None))
            i += 6
            continue
        if text.startswith("abs(", i):
            out.append(("abs", None))
            i += 4
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            out.append(("int", int(text[i:j])))
            i = j
            continue
        if text.startswith("pi", i) and not (
            i + 2 < n and text[i + 2].isalnum()
        ):
            out.append(("pi", None))
            i += 2
            continue
        if c in _VARS and not (i + 1 < n and text[i + 1].isalnum()):
            out.append(("var", c))
            i += 1
            continue
        if c in "+-*/^()":
            out.append((c, None))
            i += 1
            continue
        raise ExprSyntaxError("bad character %r at %d in %r" % (c, i, text))
    out.append(("end", None))
    return out


class _Parser:
    def __init__(self, text):
        self.toks = _tokens(text)
        self.pos = 0
        self.text = text

    def peek(self):
        return self.toks[self.pos][0]

    def take(self, kind=None):
        t = self.toks[self.pos]
        if kind is not None and t[0] != kind:
            raise ExprSyntaxError(
                "expected %s, got %s in %r" % (kind, t[0], self.text)
            )
        self.pos += 1
        return t

    def expr(self):
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()[0]
            rhs = self.term()
            node = (ADD if op == "+" else SUB, node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.peek() in ("*", "/"):
            op = self.take()[0]
            rhs = self.factor()
            node = (MUL if op == "*" else DIV, node, rhs)
        return node

    def factor(self):
        node = self.atom()
        if self.peek() == "^":
            self.take()
            tok = self.take("int")
            if tok[1] < 1:
                raise ExprSyntaxError("exponent must be >= 1")
            node = (POW, node, tok[1])
        return node

    def atom(self):
        kind, val = self.toks[self.pos]
        if kind == "int":
            self.take()
            return (NUM, Fraction(val))
        if kind == "var":
            self.take()
            return (VAR, val)
        if kind == "pi":
            self.take()
            return (PI,)
        if kind == "negpow":
            self.take()
            return (NEGPOW,)
        if kind == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        if kind == "abs":
            self.take()
            node = self.expr()
            self.take(")")
            return (ABS, node)
        if kind == "-":
            self.take()
            return (NEG, self.factor())
        raise ExprSyntaxError("unexpected %s in %r" % (kind, self.text))


def parse(text):
    p = _Parser(text)
    node = p.expr()
    p.take("end")
    return node


_PREC = {ADD: 1, SUB: 1, MUL: 2, DIV: 2, NEG: 1, POW: 3}
_ATOM_PREC = 4


def _prec(node):
    return _PREC.get(node[0], _ATOM_PREC)


def to_text(node):
    tag = node[0]
    if tag == NUM:
        v = node[1]
        if v.denominator != 1 or v < 0:
            # parser-domain ASTs carry only nonnegative integer literals;
            # rationals are DIV nodes and signs are NEG nodes
            raise ValueError("non-canonical numeric literal %r" % (v,))
        return str(v.numerator)
    if tag == VAR:
        return node[1]
    if tag == PI:
        return "pi"
    if tag == NEGPOW:
        return "(-1)^k"
    if tag == ABS:
        return "abs(%s)" % to_text(node[1])
    if tag == NEG:
        # parsed unary minus binds at factor level, above * and /
        inner = to_text(node[1])
        if _prec(node[1]) < _PREC[POW] and node[1][0] != NEG:
            inner = "(%s)" % inner
        return "-%s" % inner
    if tag == POW:
        base = to_text(node[1])
        if _prec(node[1]) < _ATOM_PREC:
            base = "(%s)" % base
        return "%s^%d" % (base, node[2])
    if tag in (ADD, SUB, MUL, DIV):
        lv = _PREC[tag]
        left = to_text(node[1])
        if _prec(node[1]) < lv:
            left = "(%s)" % left
        right = to_text(node[2])
        # parenthesize equal precedence on the right so the reparse rebuilds
        # this exact tree (the parser associates leftward)
        if _prec(node[2]) <= lv:
            right = "(%s)" % right
        op = {ADD: "+", SUB: "-", MUL: "*", DIV: "/"}[tag]
        return "%s%s%s" % (left, op, right)
    raise ValueError("unknown node %r" % (tag,))


def variables(node):
    tag = node[0]
    if tag == VAR:
        return {node[1]}
    if tag == NEGPOW:
        return {"k"}
    out = set()
    if tag in (ADD, SUB, MUL, DIV):
        out |= variables(node[1]) | variables(node[2])
    elif tag in (NEG, ABS):
        out |= variables(node[1])
    elif tag == POW:
        out |= variables(node[1])
    return out


def has_pi(node):
    tag = node[0]
    if tag == PI:
        return True
    if tag in (ADD, SUB, MUL, DIV):
        return has_pi(node[1]) or has_pi(node[2])
    if tag in (NEG, ABS):
        return has_pi(node[1])
    if tag == POW:
        return has_pi(node[1])
    return False


def eval_exact(node, x=None, y=None, k=None, pi_value=None):
    """Fraction evaluation; pi needs pi_value, (-1)^k needs integer k."""

    def ev(n):
        tag = n[0]
        if tag == NUM:
            return n[1]
        if tag == VAR:
            v = {"x": x, "y": y, "k": k}[n[1]]
            if v is None:
                raise ValueError("unbound variable %s" % n[1])
            return Fraction(v)
        if tag == PI:
            if pi_value is None:
                raise ValueError("pi in exact evaluation without pi_value")
            return Fraction(pi_value)
        if tag == NEGPOW:
            if k is None or Fraction(k).denominator != 1:
                raise ValueError("(-1)^k needs an integer k")
            return Fraction(1 if Fraction(k).numerator % 2 == 0 else -1)
        if tag == ADD:
            return ev(n[1]) + ev(n[2])
        if tag == SUB:
            return ev(n[1]) - ev(n[2])
        if tag == MUL:
            return ev(n[1]) * ev(n[2])
        if tag == DIV:
            return ev(n[1]) / ev(n[2])
        if tag == POW:
            return ev(n[1]) ** n[2]
        if tag == NEG:
            return -ev(n[1])
        if tag == ABS:
            return abs(ev(n[1]))
        raise ValueError("unknown node %r" % (tag,))

    return ev(node)


def eval_float(node, x=None, y=None, k=None):
    def ev(n):
        tag = n[0]
        if tag == NUM:
            return float(n[1])
        if tag == VAR:
            v = {"x": x, "y": y, "k": k}[n[1]]
            if v is None:
                raise ValueError("unbound variable %s" % n[1])
            return float(v)
        if tag == PI:
            return math.pi
        if tag == NEGPOW:
            if k is None:
                raise ValueError("(-1)^k needs k")
            return 1.0 if int(round(k)) % 2 == 0 else -1.0
        if tag == ADD:
            return ev(n[1]) + ev(n[2])
        if tag == SUB:
            return ev(n[1]) - ev(n[2])
        if tag == MUL:
            return ev(n[1]) * ev(n[2])
        if tag == DIV:
            return ev(n[1]) / ev(n[2])
        if tag == POW:
            return ev(n[1]) ** n[2]
        if tag == NEG:
            return -ev(n[1])
        if tag == ABS:
            return abs(ev(n[1]))
        raise ValueError("unknown node %r" % (tag,))

    return ev(node)


def eval_numpy(node, x=None, y=None, k=None):
    """Vectorized evaluation; any of x, y, k may be numpy arrays."""
    import numpy as np

    def ev(n):
        tag = n[0]
        if tag == NUM:
            return float(n[1])
        if tag == VAR:
            v = {"x": x, "y": y, "k": k}[n[1]]
            if v is None:
                raise ValueError("unbound variable %s" % n[1])
            return np.asarray(v, dtype=float)
        if tag == PI:
            return np.pi
        if tag == NEGPOW:
            if k is None:
                raise ValueError("(-1)^k needs k")
            kk = np.asarray(k)
            return np.where(np.mod(np.rint(kk), 2) == 0, 1.0, -1.0)
        if tag == ADD:
            return ev(n[1]) + ev(n[2])
        if tag == SUB:
            return ev(n[1]) - ev(n[2])
        if tag == MUL:
            return ev(n[1]) * ev(n[2])
        if tag == DIV:
            return ev(n[1]) / ev(n[2])
        if tag == POW:
            return ev(n[1]) ** n[2]
        if tag == NEG:
            return -ev(n[1])
        if tag == ABS:
            return np.abs(ev(n[1]))
        raise ValueError("unknown node %r" % (tag,))

    return ev(node)


def fix_parity(node, even):
    """Replace (-1)^k by its value on one parity class; the result can then
    be evaluated at non-integer k (continuous tail estimates)."""
    tag = node[0]
    if tag == NEGPOW:
        return (NUM, Fraction(1)) if even else (NEG, (NUM, Fraction(1)))
    if tag in (ADD, SUB, MUL, DIV):
        return (tag, fix_parity(node[1], even), fix_parity(node[2], even))
    if tag in (NEG, ABS):
        return (tag, fix_parity(node[1], even))
    if tag == POW:
        return (tag, fix_parity(node[1], even), node[2])
    return node


def compile_float(node, args=("x", "y")):
    """Compile a node to a fast float callable of the given positional args.

    Computes exactly what eval_float computes (same operations in the same
    order, so results agree bit for bit) at a fraction of the per-call cost;
    meant for quadrature and orbit loops.  Variables outside `args` must not
    occur in the expression, and (-1)^k requires "k" among the args.
    """
    for name in args:
        if name not in _VARS:
            raise ValueError("unknown argument %s" % name)

    def emit(n):
        tag = n[0]
        if tag == NUM:
            return repr(float(n[1]))
        if tag == VAR:
            if n[1] not in args:
                raise ValueError("unbound variable %s" % n[1])
            return n[1]
        if tag == PI:
            return "math.pi"
        if tag == NEGPOW:
            if "k" not in args:
                raise ValueError("(-1)^k needs k")
            return "(1.0 if int(round(k)) % 2 == 0 else -1.0)"
        if tag == ADD:
            return "(%s + %s)" % (emit(n[1]), emit(n[2]))
        if tag == SUB:
            return "(%s - %s)" % (emit(n[1]), emit(n[2]))
        if tag == MUL:
            return "(%s * %s)" % (emit(n[1]), emit(n[2]))
        if tag == DIV:
            return "(%s / %s)" % (emit(n[1]), emit(n[2]))
        if tag == POW:
            return "(%s ** %d)" % (emit(n[1]), n[2])
        if tag == NEG:
            return "(-%s)" % emit(n[1])
        if tag == ABS:
            return "abs(%s)" % emit(n[1])
        raise ValueError("unknown node %r" % (tag,))

    source = "lambda %s: %s" % (", ".join(args), emit(node))
    scope = {
        "math": math,
        "abs": abs,
        "int": int,
        "round": round,
        "__builtins__": {},
    }
    return eval(source, scope)


class ClosedForm:
    """A parsed expression plus its canonical text."""

    __slots__ = ("ast", "text")

    def __init__(self, source):
        if isinstance(source, str):
            self.ast = parse(source)
        else:
            self.ast = source
        self.text = to_text(self.ast)

    def __repr__(self):
        return "ClosedForm(%r)" % (self.text,)

    def __str__(self):
        return self.text

    def __eq__(self, other):
        return isinstance(other, ClosedForm) and self.ast == other.ast

    def __hash__(self):
        return hash(self.text)

    def variables(self):
        return variables(self.ast)

    def eval_exact(self, **kw):
        return eval_exact(self.ast, **kw)

    def eval_float(self, **kw):
        return eval_float(self.ast, **kw)

    def eval_numpy(self, **kw):
        return eval_numpy(self.ast, **kw)

    def compile_float(self, args=("x", "y")):
        return compile_float(self.ast, args)
