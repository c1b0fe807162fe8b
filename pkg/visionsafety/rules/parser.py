""" Recursive descent parser for rule source. """

from fractions import Fraction

from visionsafety.rules import DuplicateAssignment, ParseError
from visionsafety.rules.lexer import IDENTIFIER, NUMBER, OPERATOR, UNIT, tokenize
from visionsafety.rules.syntax import (
    COMPARISONS, Assert, Assign, BinOp, Call, Ident, Member, Number, RuleSet)

END = 'end of input'


def _describe(token):
    """ Human readable token description for diagnostics. """
    if token is None:
        return END
    if token.kind in (IDENTIFIER, NUMBER):
        return '{} {}'.format(token.kind, token.lexeme)
    return "'{}'".format(token.lexeme)


class Parser(object):
    """ Parser over one token list. """

    def __init__(self, tokens):
        """ Initialize parser.

        :param tokens: Tokens from `tokenize`.
        """
        self._tokens = list(tokens)
        self._index = 0

    def parse(self):
        """ Parse every statement.

        :returns: RuleSet.
        """
        statements = []
        assigned = set()
        while self._peek() is not None:
            statement = self._statement()
            if isinstance(statement, Assign):
                if statement.name in assigned:
                    raise DuplicateAssignment(statement.name, statement.position)
                assigned.add(statement.name)
            statements.append(statement)
        return RuleSet(tuple(statements))

    def _peek(self):
        if self._index < len(self._tokens):
            return self._tokens[self._index]
        return None

    def _position(self):
        token = self._peek()
        if token is not None:
            return token.position
        if self._tokens:
            return self._tokens[-1].position
        return None

    def _check(self, lexeme):
        token = self._peek()
        return token is not None and token.kind not in (IDENTIFIER, NUMBER) and \
            token.lexeme == lexeme

    def _expect(self, lexeme):
        if not self._check(lexeme):
            raise ParseError(self._position(), ["'{}'".format(lexeme)],
                             _describe(self._peek()))
        token = self._peek()
        self._index += 1
        return token

    def _expect_kind(self, kind):
        token = self._peek()
        if token is None or token.kind != kind:
            raise ParseError(self._position(), [kind], _describe(token))
        self._index += 1
        return token

    def _statement(self):
        start = self._peek()
        first = self._index
        expr = self._expression()
        if self._check('='):
            # the target is a single identifier token, not a parenthesized one
            if not isinstance(expr, Ident) or self._index != first + 1:
                raise ParseError(self._position(), ["';'"], "'=' after a non-identifier")
            self._index += 1
            value = self._expression()
            end = self._expect(';')
            return Assign(expr.name, value, start.position, end.position)
        if not self._check(';'):
            expected = ["';'", 'operator']
            if isinstance(expr, Ident):
                expected.append("'='")
            raise ParseError(self._position(), expected, _describe(self._peek()))
        end = self._expect(';')
        return Assert(expr, start.position, end.position)

    def _binary(self, operand, operators):
        lhs = operand()
        while True:
            token = self._peek()
            if token is None or token.kind != OPERATOR or token.lexeme not in operators:
                return lhs
            self._index += 1
            lhs = BinOp(token.lexeme, lhs, operand(), token.position)

    def _expression(self):
        return self._binary(self._sum, COMPARISONS)

    def _sum(self):
        return self._binary(self._product, ('+', '-'))

    def _product(self):
        return self._binary(self._postfix, ('*', '/'))

    def _postfix(self):
        node = self._primary()
        while self._check('.'):
            self._index += 1
            name = self._expect_kind(IDENTIFIER)
            if self._check('('):
                node = Call(node, name.lexeme, self._arguments(), name.position)
            else:
                node = Member(node, name.lexeme, name.position)
        return node

    def _arguments(self):
        self._expect('(')
        args = []
        if not self._check(')'):
            args.append(self._expression())
            while self._check(','):
                self._index += 1
                args.append(self._expression())
        self._expect(')')
        return tuple(args)

    def _primary(self):
        token = self._peek()
        if token is None:
            raise ParseError(self._position(), ['identifier', 'number', "'('"], END)
        if token.kind == NUMBER:
            self._index += 1
            unit = None
            following = self._peek()
            if following is not None and following.kind == UNIT:
                self._index += 1
                unit = following.lexeme
            return Number(Fraction(token.lexeme), unit, token.position)
        if token.kind == IDENTIFIER:
            self._index += 1
            if self._check('('):
                return Call(None, token.lexeme, self._arguments(), token.position)
            return Ident(token.lexeme, token.position)
        if self._check('('):
            self._index += 1
            expr = self._expression()
            self._expect(')')
            return expr
        raise ParseError(token.position, ['identifier', 'number', "'('"], _describe(token))


def parse(tokens):
    """ Parse a token list into a rule set.

    :param tokens: Tokens from `tokenize`.
    :returns: RuleSet.
    """
    return Parser(tokens).parse()


def parse_source(source):
    """ Tokenize and parse rule text.

    :param source: Rule text.
    :returns: RuleSet.
    """
    return Parser(tokenize(source)).parse()
