"""
Field descriptions: parsing of field expressions, canonical Field values,
pointwise evaluation and the planar (u, v) expansion.
"""

import cmath
import logging
import math
import re
from dataclasses import dataclass, field as dc_field
from enum import Enum
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as P

from .config import AnalysisConfig
from .cpoly import MAX_DEGREE, CPoly, harmonic_pair, roots
from .error_handler import (DegenerateField, ExprSyntaxError, NotRecognizedForm,
                            PoleEvaluation, UnsupportedKind)

logger = logging.getLogger(__name__)

ESSENTIAL_PARAMS = {(1, 2), (2, 3), (3, 4)}


class FieldKind(str, Enum):
    POLYNOMIAL = 'polynomial'
    INVERSE = 'inverse'
    CONJUGATE = 'conjugate'
    MOEBIUS = 'moebius'
    ESSENTIAL = 'essential'


@dataclass(frozen=True)
class Field:
    """Tagged description of a vector field z' = f(z)"""

    kind: FieldKind
    poly: Optional[CPoly] = None
    moebius_params: Optional[Tuple[complex, complex, complex, complex]] = None
    demo_params: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        if self.kind in (FieldKind.POLYNOMIAL, FieldKind.INVERSE, FieldKind.CONJUGATE):
            if self.poly is None or self.poly.degree < 1:
                raise DegenerateField(f"{self.kind.value} field needs a polynomial of degree >= 1")
            if self.poly.degree > MAX_DEGREE:
                raise NotRecognizedForm(f"degree {self.poly.degree} exceeds {MAX_DEGREE}")
        elif self.kind is FieldKind.MOEBIUS:
            A, B, C, D = self.moebius_params
            det = A * D - B * C
            if abs(det) <= 1e-9 * max(abs(A * D), abs(B * C), 1e-300):
                raise DegenerateField("Moebius field needs AD - BC != 0")
        elif self.kind is FieldKind.ESSENTIAL:
            if tuple(self.demo_params) not in ESSENTIAL_PARAMS:
                raise NotRecognizedForm(f"essential({self.demo_params}) is not one of "
                                        f"{sorted(ESSENTIAL_PARAMS)}")

    # constructors

    @classmethod
    def polynomial(cls, p: Union[CPoly, Sequence[complex]]) -> 'Field':
        return cls(FieldKind.POLYNOMIAL, poly=p if isinstance(p, CPoly) else CPoly(p))

    @classmethod
    def inverse(cls, p: Union[CPoly, Sequence[complex]]) -> 'Field':
        return cls(FieldKind.INVERSE, poly=p if isinstance(p, CPoly) else CPoly(p))

    @classmethod
    def conjugate(cls, p: Union[CPoly, Sequence[complex]]) -> 'Field':
        return cls(FieldKind.CONJUGATE, poly=p if isinstance(p, CPoly) else CPoly(p))

    @classmethod
    def moebius(cls, A: complex, B: complex, C: complex, D: complex) -> 'Field':
        return cls(FieldKind.MOEBIUS, moebius_params=(complex(A), complex(B),
                                                      complex(C), complex(D)))

    @classmethod
    def essential(cls, n: int, m: int) -> 'Field':
        return cls(FieldKind.ESSENTIAL, demo_params=(int(n), int(m)))

    # derived data

    @cached_property
    def poles(self) -> List[Tuple[complex, int]]:
        """Poles of f with their orders; the essential singularity reports order 0"""
        if self.kind is FieldKind.INVERSE:
            return list(roots(self.poly).roots)
        if self.kind is FieldKind.MOEBIUS:
            A, B, C, D = self.moebius_params
            return [(-D / C, 1)] if C != 0 else []
        if self.kind is FieldKind.ESSENTIAL:
            return [(0j, 0)]
        return []

    def rational_parts(self) -> Tuple[CPoly, CPoly]:
        """(N, D) with f = N/D for the holomorphic rational kinds"""
        if self.kind is FieldKind.POLYNOMIAL:
            return self.poly, CPoly([1])
        if self.kind is FieldKind.INVERSE:
            return CPoly([1]), self.poly
        if self.kind is FieldKind.MOEBIUS:
            A, B, C, D = self.moebius_params
            return CPoly([B, A]), CPoly([D, C])
        raise UnsupportedKind(f"{self.kind.value} field is not a holomorphic rational field")

    def scaled(self, c: complex) -> 'Field':
        """The field c·f"""
        c = complex(c)
        if self.kind is FieldKind.POLYNOMIAL:
            return Field.polynomial(self.poly * c)
        if self.kind is FieldKind.INVERSE:
            return Field.inverse(self.poly * (1 / c))
        if self.kind is FieldKind.CONJUGATE:
            return Field.conjugate(self.poly * c.conjugate())
        if self.kind is FieldKind.MOEBIUS:
            A, B, C, D = self.moebius_params
            return Field.moebius(A * c, B * c, C, D)
        raise UnsupportedKind("essential demo fields cannot be rescaled")

    @property
    def degree(self) -> Optional[int]:
        return self.poly.degree if self.poly is not None else None


# Planar expansion

class BivariatePoly:
    """Real polynomial sum c[i, j] x^i y^j"""

    __slots__ = ('coeffs',)

    def __init__(self, coeffs: np.ndarray):
        c = np.array(coeffs, dtype=float, ndmin=2)
        self.coeffs = c

    @classmethod
    def zeros(cls, degree: int) -> 'BivariatePoly':
        return cls(np.zeros((degree + 1, degree + 1)))

    def __call__(self, x, y):
        return P.polyval2d(x, y, self.coeffs)

    def partial(self, var: str) -> 'BivariatePoly':
        axis = {'x': 0, 'y': 1}[var]
        if self.coeffs.shape[axis] == 1:
            return BivariatePoly(np.zeros((1, 1)))
        return BivariatePoly(P.polyder(self.coeffs, axis=axis))

    def __add__(self, other: 'BivariatePoly') -> 'BivariatePoly':
        rows = max(self.coeffs.shape[0], other.coeffs.shape[0])
        cols = max(self.coeffs.shape[1], other.coeffs.shape[1])
        out = np.zeros((rows, cols))
        out[:self.coeffs.shape[0], :self.coeffs.shape[1]] += self.coeffs
        out[:other.coeffs.shape[0], :other.coeffs.shape[1]] += other.coeffs
        return BivariatePoly(out)

    def __neg__(self) -> 'BivariatePoly':
        return BivariatePoly(-self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, BivariatePoly):
            return NotImplemented
        diff = self + (-other)
        return not np.any(diff.coeffs)

    def terms(self) -> Dict[Tuple[int, int], float]:
        return {(i, j): float(c) for (i, j), c in np.ndenumerate(self.coeffs) if c != 0}

    def __repr__(self):
        parts = []
        for (i, j), c in sorted(self.terms().items(), key=lambda t: (-(t[0][0] + t[0][1]), -t[0][0])):
            mono = ''.join(v if e == 1 else f"{v}^{e}" for v, e in (('x', i), ('y', j)) if e)
            parts.append(f"{c:+g}{'*' + mono if mono else ''}")
        return ' '.join(parts) or '0'


@dataclass(frozen=True)
class PlanarExpansion:
    """Real components of the field: x' = u(x, y), y' = v(x, y)"""

    u: BivariatePoly = dc_field(compare=False)
    v: BivariatePoly = dc_field(compare=False)

    def __call__(self, x, y) -> Tuple[float, float]:
        return self.u(x, y), self.v(x, y)

    def divergence(self) -> BivariatePoly:
        return self.u.partial('x') + self.v.partial('y')


def to_planar(fld: Field) -> PlanarExpansion:
    """u + iv built from the harmonic rows p_k, q_k"""
    if fld.kind not in (FieldKind.POLYNOMIAL, FieldKind.CONJUGATE):
        raise UnsupportedKind(f"no polynomial planar form for {fld.kind.value} fields")
    p = fld.poly
    n = p.degree
    u = np.zeros((n + 1, n + 1))
    v = np.zeros((n + 1, n + 1))
    u[0, 0] = p.coeffs[0].real
    v[0, 0] = p.coeffs[0].imag
    for k in range(1, n + 1):
        a, b = p.coeffs[k].real, p.coeffs[k].imag
        pair = harmonic_pair(k)
        for j in range(k + 1):
            pk, qk = pair.p_row[j], pair.q_row[j]
            u[k - j, j] += a * pk - b * qk
            v[k - j, j] += b * pk + a * qk
    if fld.kind is FieldKind.CONJUGATE:
        v = -v
    return PlanarExpansion(BivariatePoly(u), BivariatePoly(v))


# Evaluation

def _check_pole(z: complex, pole: complex, config: AnalysisConfig):
    if abs(z - pole) <= config.tau_pole * (1 + abs(z)):
        raise PoleEvaluation(f"{z} is within the pole tolerance of {pole}", pole)


def eval_field(fld: Field, z: complex, config: Optional[AnalysisConfig] = None) -> complex:
    """f(z); the planar vector at (x, y) is (Re, Im) of the result"""
    config = config or AnalysisConfig()
    kind = fld.kind
    if kind is FieldKind.POLYNOMIAL:
        return fld.poly(z)
    if kind is FieldKind.CONJUGATE:
        return fld.poly(z).conjugate()
    if kind is FieldKind.INVERSE:
        for pole, _ in fld.poles:
            _check_pole(z, pole, config)
        value = fld.poly(z)
        if value == 0:
            raise PoleEvaluation(f"{z} is a pole", z)
        return 1 / value
    if kind is FieldKind.MOEBIUS:
        A, B, C, D = fld.moebius_params
        for pole, _ in fld.poles:
            _check_pole(z, pole, config)
        return (A * z + B) / (C * z + D)
    n, m = fld.demo_params
    _check_pole(z, 0j, config)
    try:
        return z ** m * cmath.exp(1 / z ** n)
    except OverflowError:
        raise PoleEvaluation(f"f({z}) overflows next to the essential singularity", 0j)


# Expression parsing

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<ratimag>\d+(?:\.\d*)?/\d+(?:\.\d*)?i(?![A-Za-y_0-9]))
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)(?P<isuffix>i(?![A-Za-y_0-9]))?
  | (?P<name>conj|moebius|essential)
  | (?P<letter>[iz])
  | (?P<op>\*\*|[-+*/^();])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int
    value: Any = None


def tokenize(text: str) -> List[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup if m.lastgroup != 'isuffix' else 'number'
        if kind == 'ratimag':
            num, den = m.group('ratimag')[:-1].split('/')
            if float(den) == 0:
                raise ExprSyntaxError("zero denominator in literal", text, pos)
            tokens.append(Token('const', m.group(0), pos, complex(0, float(num) / float(den))))
        elif kind == 'number':
            value = float(m.group('number'))
            if m.group('isuffix'):
                tokens.append(Token('const', m.group(0), pos, complex(0, value)))
            else:
                tokens.append(Token('const', m.group(0), pos, complex(value)))
        elif kind == 'letter':
            if m.group(0) == 'i':
                tokens.append(Token('const', 'i', pos, 1j))
            else:
                tokens.append(Token('z', 'z', pos))
        elif kind in ('name', 'op'):
            tokens.append(Token(m.group(0), m.group(0), pos))
        pos = m.end()
    tokens.append(Token('end', '', len(text)))
    return tokens


# AST

@dataclass(frozen=True)
class Const:
    value: complex


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class BinOp:
    op: str
    left: Any
    right: Any


@dataclass(frozen=True)
class Neg:
    operand: Any


@dataclass(frozen=True)
class Pow:
    base: Any
    exponent: int


@dataclass(frozen=True)
class Conj:
    operand: Any


@dataclass(frozen=True)
class MoebiusCall:
    args: Tuple[Any, Any, Any, Any]


@dataclass(frozen=True)
class EssentialCall:
    n: int
    m: int


_ATOM_START = {'const', 'z', '(', 'conj', 'moebius', 'essential'}


class ExpressionParser:
    """Recursive-descent parser for the field grammar

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary | power)*      juxtaposition multiplies
    unary  := ('-' | '+') unary | power
    power  := atom (('^' | '**') integer)?
    atom   := literal | 'i' | 'z' | '(' expr ')' | conj(expr)
            | moebius(expr; expr; expr; expr) | essential(int; int)
    """

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        tok = self.tokens[self.index]
        self.index += 1
        return tok

    def expect(self, kind: str) -> Token:
        if self.current.kind != kind:
            raise ExprSyntaxError(f"unexpected {self.current.text or 'end of input'!r}",
                                  self.text, self.current.pos, expected=repr(kind))
        return self.advance()

    def parse(self):
        if self.current.kind == 'end':
            raise ExprSyntaxError("empty expression", self.text, 0, expected="an expression")
        node = self.expr()
        if self.current.kind != 'end':
            raise ExprSyntaxError(f"unexpected {self.current.text!r}", self.text,
                                  self.current.pos, expected="an operator or end of input")
        return node

    def expr(self):
        node = self.term()
        while self.current.kind in ('+', '-'):
            op = self.advance().kind
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while True:
            if self.current.kind in ('*', '/'):
                op = self.advance().kind
                node = BinOp(op, node, self.unary())
            elif self.current.kind in _ATOM_START:
                node = BinOp('*', node, self.power())
            else:
                return node

    def unary(self):
        if self.current.kind == '-':
            self.advance()
            return Neg(self.unary())
        if self.current.kind == '+':
            self.advance()
            return self.unary()
        return self.power()

    def power(self):
        node = self.atom()
        if self.current.kind in ('^', '**'):
            self.advance()
            node = Pow(node, self.integer())
        return node

    def integer(self) -> int:
        tok = self.current
        if tok.kind == '+':
            self.advance()
            tok = self.current
        if tok.kind != 'const' or tok.value.imag != 0 or not tok.value.real.is_integer() \
                or not tok.text.isdigit():
            raise ExprSyntaxError("bad exponent", self.text, tok.pos,
                                  expected="a non-negative integer")
        self.advance()
        return int(tok.value.real)

    def atom(self):
        tok = self.current
        if tok.kind == 'const':
            self.advance()
            return Const(tok.value)
        if tok.kind == 'z':
            self.advance()
            return Var()
        if tok.kind == '(':
            self.advance()
            node = self.expr()
            self.expect(')')
            return node
        if tok.kind == 'conj':
            self.advance()
            self.expect('(')
            node = self.expr()
            self.expect(')')
            return Conj(node)
        if tok.kind == 'moebius':
            self.advance()
            self.expect('(')
            args = [self.expr()]
            for _ in range(3):
                self.expect(';')
                args.append(self.expr())
            self.expect(')')
            return MoebiusCall(tuple(args))
        if tok.kind == 'essential':
            self.advance()
            self.expect('(')
            n = self.integer()
            self.expect(';')
            m = self.integer()
            self.expect(')')
            return EssentialCall(n, m)
        raise ExprSyntaxError(f"unexpected {tok.text or 'end of input'!r}", self.text, tok.pos,
                              expected="a number, z, '(' or a function")


# Normalization to a rational function N/D

@dataclass(frozen=True)
class _Rational:
    num: CPoly
    den: CPoly

    def check(self) -> '_Rational':
        if max(self.num.degree, self.den.degree) > MAX_DEGREE:
            raise NotRecognizedForm(f"expression degree exceeds {MAX_DEGREE}")
        return self

    @property
    def is_constant(self) -> bool:
        return self.num.degree == 0 and self.den.degree == 0

    @property
    def constant(self) -> complex:
        return self.num.coeffs[0] / self.den.coeffs[0]


def _rational(node) -> _Rational:
    one = CPoly([1])
    if isinstance(node, Const):
        return _Rational(CPoly([node.value]), one)
    if isinstance(node, Var):
        return _Rational(CPoly([0, 1]), one)
    if isinstance(node, Neg):
        r = _rational(node.operand)
        return _Rational(-r.num, r.den)
    if isinstance(node, Pow):
        r = _rational(node.base)
        if max(r.num.degree, r.den.degree) * node.exponent > MAX_DEGREE:
            raise NotRecognizedForm(f"expression degree exceeds {MAX_DEGREE}")
        return _Rational(r.num ** node.exponent, r.den ** node.exponent)
    if isinstance(node, Conj):
        r = _rational(node.operand)
        if not r.is_constant:
            raise NotRecognizedForm("conj(...) is only allowed around the whole field")
        return _Rational(CPoly([r.constant.conjugate()]), one)
    if isinstance(node, (MoebiusCall, EssentialCall)):
        raise NotRecognizedForm("moebius(...) and essential(...) must stand alone")
    if isinstance(node, BinOp):
        a, b = _rational(node.left), _rational(node.right)
        if node.op in ('+', '-'):
            sign = 1 if node.op == '+' else -1
            if a.den == b.den:
                return _Rational(a.num + sign * b.num, a.den).check()
            return _Rational(a.num * b.den + sign * (b.num * a.den), a.den * b.den).check()
        if node.op == '*':
            return _Rational(a.num * b.num, a.den * b.den).check()
        if b.num.is_zero:
            raise DegenerateField("division by zero")
        return _Rational(a.num * b.den, a.den * b.num).check()
    raise NotRecognizedForm(f"unsupported expression node {node!r}")


def _constant_of(node, what: str) -> complex:
    r = _rational(node)
    if not r.is_constant:
        raise NotRecognizedForm(f"{what} must be a constant")
    return complex(r.constant)


def _field_from_rational(r: _Rational) -> Field:
    num, den = r.num, r.den
    if num.is_zero:
        raise DegenerateField("the field is identically zero")
    if den.degree == 0:
        p = num * (1 / den.coeffs[0])
        if p.degree == 0:
            raise DegenerateField("constant field has no equilibria")
        return Field.polynomial(p)
    if num.degree == 0:
        return Field.inverse(den * (1 / num.coeffs[0]))
    if num.degree == 1 and den.degree == 1:
        return Field.moebius(num.coeffs[1], num.coeffs[0], den.coeffs[1], den.coeffs[0])
    raise NotRecognizedForm(f"rational field of degrees {num.degree}/{den.degree} is not "
                            f"polynomial, inverse polynomial or Moebius")


def normalize(node) -> Field:
    """Reduce an expression tree to one of the five field kinds"""
    if isinstance(node, MoebiusCall):
        A, B, C, D = (_constant_of(a, "moebius argument") for a in node.args)
        return Field.moebius(A, B, C, D)
    if isinstance(node, EssentialCall):
        return Field.essential(node.n, node.m)
    if isinstance(node, Conj):
        r = _rational(node.operand)
        if r.den.degree != 0:
            raise NotRecognizedForm("conj(...) must wrap a polynomial")
        if r.num.is_zero:
            raise DegenerateField("the field is identically zero")
        p = r.num * (1 / r.den.coeffs[0])
        if p.degree == 0:
            raise DegenerateField("constant field has no equilibria")
        return Field.conjugate(p)
    return _field_from_rational(_rational(node))


def parse_field(text: str) -> Field:
    """Parse a field expression into its canonical Field"""
    fld = normalize(ExpressionParser(text).parse())
    logger.debug(f"Parsed {text!r} as {fld.kind.value} field")
    return fld


# Printing and JSON

def _literal(c: complex) -> str:
    re_part, im_part = float(c.real), float(c.imag)
    sign = '-' if math.copysign(1.0, im_part) < 0 else '+'
    return f"({re_part!r}{sign}{abs(im_part)!r}i)"


def _poly_text(p: CPoly) -> str:
    terms = []
    for k, a in enumerate(p.coeffs):
        if a == 0:
            continue
        terms.append(_literal(a) if k == 0 else f"{_literal(a)}*z^{k}")
    return ' + '.join(terms)


def print_field(fld: Field) -> str:
    """Canonical text that parse_field maps back to the same Field"""
    if fld.kind is FieldKind.POLYNOMIAL:
        return _poly_text(fld.poly)
    if fld.kind is FieldKind.INVERSE:
        return f"1/({_poly_text(fld.poly)})"
    if fld.kind is FieldKind.CONJUGATE:
        return f"conj({_poly_text(fld.poly)})"
    if fld.kind is FieldKind.MOEBIUS:
        return "moebius(" + ';'.join(_literal(c) for c in fld.moebius_params) + ")"
    n, m = fld.demo_params
    return f"essential({n};{m})"


def field_to_json(fld: Field) -> Dict[str, Any]:
    if fld.kind is FieldKind.MOEBIUS:
        data = {'kind': fld.kind.value}
        for name, c in zip('ABCD', fld.moebius_params):
            data[name] = [c.real, c.imag]
        return data
    if fld.kind is FieldKind.ESSENTIAL:
        n, m = fld.demo_params
        return {'kind': fld.kind.value, 'n': n, 'm': m}
    return {'kind': fld.kind.value, 'coeffs': fld.poly.to_json()}


def field_from_json(data: Dict[str, Any]) -> Field:
    kind = FieldKind(data['kind'])
    if kind is FieldKind.MOEBIUS:
        return Field.moebius(*(complex(*data[name]) for name in 'ABCD'))
    if kind is FieldKind.ESSENTIAL:
        return Field.essential(data['n'], data['m'])
    return Field(kind, poly=CPoly.from_json(data['coeffs']))
