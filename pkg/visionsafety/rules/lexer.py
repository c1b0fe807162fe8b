""" Rule source tokenizer. """

import re
from collections import namedtuple

from visionsafety.rules import LexError, Position

IDENTIFIER = 'identifier'
NUMBER = 'number'
UNIT = 'unit-suffix'
OPERATOR = 'operator'
PUNCTUATION = 'punctuation'

PIXEL_UNIT = 'p'

Token = namedtuple('Token', 'kind lexeme position')

_TOKEN_RE = re.compile(r'''
    (?P<space>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<number>[0-9]+(?:\.[0-9]+)?)
  | (?P<identifier>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<operator>>=|<=|==|[-+*/<>])
  | (?P<punctuation>[().,;=])
''', re.VERBOSE)

_IDENTIFIER_CHAR = re.compile(r'[A-Za-z0-9_]')
_UNIT_RE = re.compile(r'p(?![A-Za-z0-9_])')


def tokenize(source):
    """ Split rule source into tokens.

    Whitespace and comments are skipped. A number immediately
    followed by `p` yields a number token and a unit-suffix token.

    :param source: Rule text.
    :returns: List of Token.
    """
    tokens = []
    offset = 0
    line = 1
    line_start = 0
    while offset < len(source):
        match = _TOKEN_RE.match(source, offset)
        if match is None:
            position = Position(line, offset - line_start + 1, offset)
            raise LexError('unexpected character {!r}'.format(source[offset]), position)
        kind = match.lastgroup
        text = match.group()
        if kind not in ('space', 'comment'):
            tokens.append(Token(kind, text, Position(line, offset - line_start + 1, offset)))
        end = match.end()
        if kind == NUMBER and end < len(source) and _IDENTIFIER_CHAR.match(source, end):
            suffix = _UNIT_RE.match(source, end)
            position = Position(line, end - line_start + 1, end)
            if suffix is None:
                raise LexError('number followed by {!r}'.format(source[end]), position)
            tokens.append(Token(UNIT, PIXEL_UNIT, position))
            end += 1
        newlines = text.count('\n')
        if newlines:
            line += newlines
            line_start = offset + text.rfind('\n') + 1
        offset = end
    return tokens
