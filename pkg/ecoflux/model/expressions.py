#####################################################################
#                                                                   #
# /model/expressions.py                                             #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Arithmetic expressions used for intensities, inputs and outputs in model files.

The language is small: numeric literals, identifiers, unary minus, the binary operators
``+ - * / ^`` and calls to registered one-argument functions. ``^`` binds tighter than
unary minus, which binds tighter than ``* /``, which bind tighter than ``+ -``. All binary
operators are left-associative except ``^``, which is right-associative, so ``2^3^2`` is
512 and ``-2^2`` is -4.

Expressions are parsed by :func:`parse_expr` into a tree of immutable nodes. Each node
can be evaluated against a mapping of identifier values, and printed back to text that
re-parses to an identical tree.
"""
import math
import re
from dataclasses import dataclass
from functools import cached_property

from labscript_utils import dedent

from ..errors import ModelSyntaxError, EvaluationError

FUNCTIONS = {}


def register_function(name, function=None):
    """Add a one-argument function to the table of functions callable from model
    expressions. Can be used as a decorator, in which case `name` is the only argument.

    Args:
        name (str): Name by which expressions call the function.
        function (callable, optional): Function of one float returning a float.
    """
    if function is None:
        return lambda f: register_function(name, f)
    if not name.isidentifier():
        raise ValueError(f"function name {name!r} is not a valid identifier")
    FUNCTIONS[name] = function
    return function


for _name in ['exp', 'sin', 'cos', 'sqrt']:
    register_function(_name, getattr(math, _name))
register_function('abs', abs)


# Binding strength of each node type when printed, higher binds tighter:
_ADDITIVE, _MULTIPLICATIVE, _UNARY, _POWER, _ATOM = range(1, 6)
_PRECEDENCE = {'+': _ADDITIVE, '-': _ADDITIVE, '*': _MULTIPLICATIVE, '/': _MULTIPLICATIVE}

# Limits on brackets, signs and powers nested inside one another, and on the height of
# the parsed tree. Deeper expressions are syntax errors.
MAX_NESTING = 64
MAX_HEIGHT = 256


class Expr:
    """Base class of expression tree nodes"""

    precedence = _ATOM

    def evaluate(self, env):
        """Evaluate with identifier values taken from the mapping `env`. Raises
        EvaluationError for unknown identifiers, division by zero, fractional powers of
        negative numbers and math domain errors."""
        return self.compiled(env)

    @cached_property
    def compiled(self):
        return self._compile()

    def symbols(self):
        """Set of identifier names referenced by this expression"""
        return set(self._walk(Symbol))

    def functions(self):
        """Set of function names called by this expression"""
        return set(node.function for node in self._nodes() if isinstance(node, Call))

    def is_zero(self):
        """Whether the expression is the literal 0, i.e. structurally absent"""
        return isinstance(self, Number) and self.value == 0

    def _walk(self, cls):
        for node in self._nodes():
            if isinstance(node, cls):
                yield node.name

    @cached_property
    def height(self):
        """Number of nodes on the longest path from this node to a leaf"""
        return 1 + max((child.height for child in self._children()), default=0)

    def _children(self):
        return ()

    def _nodes(self):
        yield self


@dataclass(frozen=True, eq=True)
class Number(Expr):
    value: float

    def __str__(self):
        return repr(float(self.value))

    def _compile(self):
        value = float(self.value)
        return lambda env: value


@dataclass(frozen=True, eq=True)
class Symbol(Expr):
    name: str

    def __str__(self):
        return self.name

    def _compile(self):
        name = self.name

        def lookup(env):
            try:
                return env[name]
            except KeyError:
                raise EvaluationError(f"unknown identifier {name!r}") from None

        return lookup


@dataclass(frozen=True, eq=True)
class Negate(Expr):
    operand: Expr
    precedence = _UNARY

    def __str__(self):
        return '-' + _wrap(self.operand, self.operand.precedence < _UNARY)

    def _children(self):
        return (self.operand,)

    def _nodes(self):
        yield self
        yield from self.operand._nodes()

    def _compile(self):
        operand = self.operand.compiled
        return lambda env: -operand(env)


@dataclass(frozen=True, eq=True)
class BinaryOp(Expr):
    op: str
    left: Expr
    right: Expr

    @property
    def precedence(self):
        return _POWER if self.op == '^' else _PRECEDENCE[self.op]

    def __str__(self):
        p = self.precedence
        if self.op == '^':
            left = _wrap(self.left, self.left.precedence <= _POWER)
            right = _wrap(self.right, self.right.precedence < _UNARY)
        else:
            left = _wrap(self.left, self.left.precedence < p)
            right = _wrap(self.right, self.right.precedence <= p)
        return f"{left} {self.op} {right}"

    def _children(self):
        return (self.left, self.right)

    def _nodes(self):
        yield self
        yield from self.left._nodes()
        yield from self.right._nodes()

    def _compile(self):
        left = self.left.compiled
        right = self.right.compiled
        if self.op == '+':
            return lambda env: left(env) + right(env)
        elif self.op == '-':
            return lambda env: left(env) - right(env)
        elif self.op == '*':
            return lambda env: left(env) * right(env)
        elif self.op == '/':
            return lambda env: _divide(left(env), right(env))
        return lambda env: _power(left(env), right(env))


@dataclass(frozen=True, eq=True)
class Call(Expr):
    function: str
    argument: Expr

    def __str__(self):
        return f"{self.function}({self.argument})"

    def _children(self):
        return (self.argument,)

    def _nodes(self):
        yield self
        yield from self.argument._nodes()

    def _compile(self):
        name = self.function
        argument = self.argument.compiled

        def call(env):
            try:
                function = FUNCTIONS[name]
            except KeyError:
                raise EvaluationError(f"unknown function {name!r}") from None
            value = argument(env)
            try:
                return float(function(value))
            except (ValueError, OverflowError) as e:
                msg = f"{name}({value!r}) is undefined: {e}"
                raise EvaluationError(msg) from None

        return call


def _wrap(node, parenthesise):
    text = str(node)
    return f"({text})" if parenthesise else text


def _divide(a, b):
    if b == 0:
        raise EvaluationError(f"division by zero ({a!r} / {b!r})")
    return a / b


def _power(a, b):
    if a < 0 and not float(b).is_integer():
        msg = f"fractional power {b!r} of negative number {a!r}"
        raise EvaluationError(msg)
    if a == 0 and b < 0:
        raise EvaluationError(f"zero raised to negative power {b!r}")
    try:
        return float(a) ** b
    except OverflowError:
        raise EvaluationError(f"overflow in {a!r} ^ {b!r}") from None


_TOKEN = re.compile(
    r"""
    (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
    |(?P<name>[^\W\d]\w*)
    |(?P<op>[-+*/^(),])
    |(?P<space>\s+)
    """,
    re.VERBOSE,
)


class _Token(object):
    def __init__(self, kind, text, column):
        self.kind = kind
        self.text = text
        self.column = column

    def __repr__(self):
        return f"({self.kind}, {self.text!r})"


def tokenize(src, line=1, column=1):
    """Split `src` into tokens, raising ModelSyntaxError at the first character that
    cannot start a token. `line` and `column` give the position of `src` within a
    larger document, for error messages."""
    tokens = []
    pos = 0
    while pos < len(src):
        match = _TOKEN.match(src, pos)
        if match is None:
            msg = f"unexpected character {src[pos]!r}"
            raise ModelSyntaxError(msg, line, column + pos)
        kind = match.lastgroup
        if kind != 'space':
            tokens.append(_Token(kind, match.group(), column + pos))
        pos = match.end()
    tokens.append(_Token('eof', '', column + len(src)))
    return tokens


class _Parser(object):
    """Recursive descent over the grammar

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' unary)?
    primary := number | name | name '(' expr ')' | '(' expr ')'
    """

    def __init__(self, src, line, column):
        self.tokens = tokenize(src, line, column)
        self.index = 0
        self.line = line
        self.nesting = 0

    @property
    def current(self):
        return self.tokens[self.index]

    def error(self, message, token=None):
        token = token or self.current
        raise ModelSyntaxError(message, self.line, token.column)

    def advance(self):
        token = self.current
        self.index += 1
        return token

    def expect(self, text):
        if self.current.text != text:
            found = self.current.text or 'end of expression'
            self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def enter(self, token):
        self.nesting += 1
        if self.nesting > MAX_NESTING:
            msg = f"expression nested more than {MAX_NESTING} levels deep"
            self.error(msg, token)

    def leave(self):
        self.nesting -= 1

    def build(self, node, token):
        if node.height > MAX_HEIGHT:
            msg = f"expression has more than {MAX_HEIGHT} levels of operations"
            self.error(msg, token)
        return node

    def parse(self):
        if self.current.kind == 'eof':
            self.error("empty expression")
        node = self.expr()
        if self.current.kind != 'eof':
            self.error(f"unexpected {self.current.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.current.text in ('+', '-'):
            token = self.advance()
            node = self.build(BinaryOp(token.text, node, self.term()), token)
        return node

    def term(self):
        node = self.unary()
        while self.current.text in ('*', '/'):
            token = self.advance()
            node = self.build(BinaryOp(token.text, node, self.unary()), token)
        return node

    def unary(self):
        if self.current.text == '-':
            token = self.advance()
            self.enter(token)
            node = self.build(Negate(self.unary()), token)
            self.leave()
            return node
        return self.power()

    def power(self):
        base = self.primary()
        if self.current.text == '^':
            token = self.advance()
            self.enter(token)
            node = self.build(BinaryOp('^', base, self.unary()), token)
            self.leave()
            return node
        return base

    def primary(self):
        token = self.current
        if token.kind == 'number':
            value = float(token.text)
            if not math.isfinite(value):
                self.error(f"numeric literal {token.text!r} out of range")
            self.advance()
            return Number(value)
        if token.kind == 'name':
            self.advance()
            if self.current.text != '(':
                return Symbol(token.text)
            if token.text not in FUNCTIONS:
                self.error(f"unknown function {token.text!r}", token)
            self.enter(self.advance())
            argument = self.expr()
            if self.current.text == ',':
                self.error(f"{token.text}() takes exactly one argument")
            self.expect(')')
            self.leave()
            return self.build(Call(token.text, argument), token)
        if token.text == '(':
            self.enter(self.advance())
            node = self.expr()
            self.expect(')')
            self.leave()
            return node
        if token.kind == 'eof':
            self.error("unexpected end of expression")
        self.error(f"unexpected {token.text!r}")


def parse_expr(src, line=1, column=1):
    """Parse expression text into an :class:`Expr` tree.

    Args:
        src (str): Expression text.
        line (int, optional): Line of `src` in its containing document.
        column (int, optional): Column at which `src` starts in that line.

    Raises:
        ModelSyntaxError: On any syntax error or call to an unregistered function.
    """
    if not isinstance(src, str):
        msg = f"""expression source must be a string, not {type(src).__name__}"""
        raise TypeError(dedent(msg))
    return _Parser(src, line, column).parse()
