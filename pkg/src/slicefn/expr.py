"""Expression language for star polynomials and semiregular forms.

Grammar (``*`` is the star product, which is left associative)::

    sum     := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ("^" ["•"] ["-"] INT)?
    atom    := NUMBER | UNIT | "x" | "(" sum ")" | FUNC "(" sum ")"
    UNIT    := 1 | i | j | k | l | li | lj | lk
    FUNC    := conj | N | recip

In the octonions a product chain with three or more non-real constant factors
and no parentheses is rejected, since the grouping changes the value.
"""

from dataclasses import dataclass
from fractions import Fraction
import re

from .cayley_dickson import UNIT_NAMES, Element
from .errors import AmbiguousConstantProduct, ParseError
from .star_poly import SemiregularForm, StarPolynomial, _one_poly

FUNCTIONS = ("conj", "N", "recip")

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)"
                    r"|(?P<op>\^•|\^|[-+*/()•·]))")


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    text: str


@dataclass(frozen=True)
class Unit:
    name: str


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


# ---------------------------------------------------------------------------
# tokenizer and parser


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[:1]!r}",
                             len(text) - len(text[pos:].lstrip()))
        start = m.start(m.lastgroup)
        kind = m.lastgroup
        value = m.group(kind)
        if value in ("•", "·"):
            value = "*"
        tokens.append((kind, value, start))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


def _has_var(node):
    if isinstance(node, Var):
        return True
    if isinstance(node, BinOp):
        return _has_var(node.left) or _has_var(node.right)
    if isinstance(node, (Neg, Call)):
        return _has_var(node.arg)
    if isinstance(node, Pow):
        return _has_var(node.base)
    return False


def _has_unit(node):
    if isinstance(node, Unit):
        return node.name != "1"
    if isinstance(node, BinOp):
        return _has_unit(node.left) or _has_unit(node.right)
    if isinstance(node, (Neg, Call)):
        return _has_unit(node.arg)
    if isinstance(node, Pow):
        return _has_unit(node.base)
    return False


class _Parser:
    def __init__(self, text, level):
        self.tokens = _tokenize(text)
        self.i = 0
        self.level = level

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, v, pos = self.take()
        if v != value:
            raise ParseError(f"expected {value!r}", pos)

    def parse(self):
        node = self.sum()
        kind, v, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {v!r}", pos)
        return node

    def sum(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        start = self.peek()[2]
        node = self.unary()
        ambiguous = int(self._plain_constant(node))
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            ambiguous += self._plain_constant(rhs)
            node = BinOp(op, node, rhs)
        if self.level == 3 and ambiguous >= 3:
            raise AmbiguousConstantProduct(
                "three or more octonion constants in one product need parentheses", start)
        return node

    def _plain_constant(self, node):
        return not _has_var(node) and _has_unit(node)

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] in ("^", "^•"):
            self.take()
            sign = 1
            if self.peek()[1] == "-":
                self.take()
                sign = -1
            kind, v, pos = self.take()
            if kind != "num" or not v.isdigit():
                raise ParseError("exponent must be an integer", pos)
            return Pow(base, sign * int(v))
        return base

    def atom(self):
        kind, v, pos = self.take()
        if kind == "num":
            if v == "1":
                return Unit("1")
            return Num(v)
        if kind == "name":
            if v == "x":
                return Var()
            if v in FUNCTIONS:
                self.expect("(")
                arg = self.sum()
                self.expect(")")
                return Call(v, arg)
            if v in UNIT_NAMES:
                idx = UNIT_NAMES.index(v)
                if idx >= (1 << self.level):
                    raise ParseError(f"unit {v!r} is not in this algebra", pos)
                return Unit(v)
            raise ParseError(f"unknown name {v!r}", pos)
        if v == "(":
            node = self.sum()
            self.expect(")")
            return node
        raise ParseError("unexpected end of input" if kind == "end" else f"unexpected {v!r}", pos)


def parse(text, level=3):
    """Parse an expression into an AST; raises ``ParseError`` with a position."""
    return _Parser(text, level).parse()


# ---------------------------------------------------------------------------
# serializer


def _atomic(node):
    return isinstance(node, (Num, Unit, Var, Call))


def serialize(node):
    """Text that parses back to the same AST."""
    if isinstance(node, Num):
        return node.text
    if isinstance(node, Unit):
        return node.name
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Call):
        return f"{node.func}({serialize(node.arg)})"
    if isinstance(node, Neg):
        inner = serialize(node.arg)
        return f"-{inner}" if _atomic(node.arg) else f"-({inner})"
    if isinstance(node, Pow):
        base = serialize(node.base)
        if not _atomic(node.base):
            base = f"({base})"
        return f"{base}^{node.exponent}"
    if isinstance(node, BinOp):
        left = serialize(node.left)
        right = serialize(node.right)
        if node.op in "+-":
            if isinstance(node.right, BinOp) and node.right.op in "+-" or isinstance(node.right, Neg):
                right = f"({right})"
            return f"{left} {node.op} {right}"
        chain = isinstance(node.left, BinOp) and node.left.op in "*/" and not _has_unit(node.left)
        if not (_atomic(node.left) or isinstance(node.left, Pow) or chain):
            left = f"({left})"
        if not (_atomic(node.right) or isinstance(node.right, Pow)):
            right = f"({right})"
        return f"{left}*{right}" if node.op == "*" else f"{left}/{right}"
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# building functions


def _scalar(text, exact):
    return Fraction(text) if exact else float(text)


def _as_form(f):
    if isinstance(f, SemiregularForm):
        return f
    return SemiregularForm(f, _one_poly(f.level))


def _build(node, level, exact):
    if isinstance(node, Num):
        return StarPolynomial([Element.real(_scalar(node.text, exact), level)], level)
    if isinstance(node, Unit):
        e = Element.unit(UNIT_NAMES.index(node.name), level, exact=exact)
        return StarPolynomial([e], level)
    if isinstance(node, Var):
        one = Fraction(1) if exact else 1.0
        zero = Fraction(0) if exact else 0.0
        return StarPolynomial([Element.real(zero, level), Element.real(one, level)], level)
    if isinstance(node, Neg):
        return -_build(node.arg, level, exact)
    if isinstance(node, Call):
        arg = _build(node.arg, level, exact)
        if node.func == "conj":
            return arg.conj()
        if node.func == "N":
            return arg.normal()
        return _as_form(arg).reciprocal()
    if isinstance(node, Pow):
        base = _build(node.base, level, exact)
        if node.exponent < 0:
            base = _as_form(base).reciprocal()
        out = _one_poly(level) if isinstance(base, StarPolynomial) else _as_form(_one_poly(level))
        for _ in range(abs(node.exponent)):
            out = out.star(base)
        return out
    left = _build(node.left, level, exact)
    right = _build(node.right, level, exact)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        if isinstance(left, SemiregularForm) or isinstance(right, SemiregularForm):
            return _as_form(left).star(_as_form(right))
        return left.star(right)
    # division by a real-coefficient expression
    right = _as_form(right)
    if not (right.num.has_real_coeffs()):
        raise ParseError("only real-coefficient divisors are allowed")
    den = right.num
    return _as_form(left).star(SemiregularForm(right.den, den))


def build(node, level=3, exact=True):
    """Turn an AST into a ``StarPolynomial`` or ``SemiregularForm``.

    Quotients whose denominator is a nonzero constant come back as polynomials.
    """
    f = _build(node, level, exact)
    if isinstance(f, SemiregularForm) and f.den.degree == 0:
        f = f.num * (1 / f.den.real_coeffs()[0])
    return f


def parse_function(text, level=3, exact=True):
    return build(parse(text, level), level, exact)


def parse_element(text, level=3, exact=True):
    """A constant expression evaluated to an algebra element."""
    node = parse(text, level)
    if _has_var(node):
        raise ParseError("a point may not contain the variable x", 0)
    f = build(node, level, exact)
    if not isinstance(f, StarPolynomial):
        raise ParseError("constant expression did not reduce to an element", 0)
    if f.degree < 0:
        return Element.zero(level, exact=exact)
    return f.coeffs[0] if exact else f.coeffs[0].to_double()


# ---------------------------------------------------------------------------
# rendering functions back into the expression language


def _format_poly(p):
    from .cayley_dickson import format_element

    terms = []
    for n, c in enumerate(p.coeffs):
        if c.is_zero():
            continue
        coeff = format_element(c)
        if n == 0:
            terms.append(f"({coeff})")
        else:
            power = "x" if n == 1 else f"x^{n}"
            terms.append(power if coeff == "1" else f"{power}*({coeff})")
    return " + ".join(terms) if terms else "0"


def format_function(f):
    """Parseable text for a ``StarPolynomial`` or ``SemiregularForm``."""
    if isinstance(f, SemiregularForm):
        return f"({_format_poly(f.num)})/({_format_poly(f.den)})"
    if isinstance(f, StarPolynomial):
        return _format_poly(f)
    return repr(f)
