"""
Copyright (c) Meta Platforms, Inc. and affiliates.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

import logging
from collections import namedtuple
from functools import lru_cache

from pyparsing import (
    Forward,
    Group,
    Keyword as K,
    Literal as L,
    Optional as O,
    ParseBaseException,
    ParserElement,
    ParseResults,
    StringEnd,
    Suppress as S,
    Word,
    ZeroOrMore as ZoM,
    alphanums,
    col,
    lineno,
    nums,
    python_style_comment,
)

log = logging.getLogger(__name__)

ParserElement.enable_packrat()

STATEMENT_KEYWORDS = (
    "category",
    "poset",
    "monoid",
    "coverage",
    "presheaf",
    "map",
    "subobject",
    "family",
    "universe",
    "run",
)


class SiteSpecException(Exception):
    """
    A .site diagnostic, positioned at a line and column
    """

    def __init__(self, message, line=0, col=0, expected=()):
        super(SiteSpecException, self).__init__("{}:{}: {}".format(line, col, message))
        self.message = message
        self.line = line
        self.col = col
        self.expected = tuple(expected)


class SiteSpecSyntaxError(SiteSpecException):
    """
    Text does not match the grammar
    """

    pass


class SiteSpecSemanticError(SiteSpecException):
    """
    Text parses but names something unknown or describes an invalid value
    """

    pass


# kind: statement keyword; body: its tokens with groups turned into lists
Statement = namedtuple("Statement", ["kind", "loc", "body"])


class Pairs(tuple):
    """
    A comma separated "a -> b" list.
    """

    pass


def _tupled(expr):
    return expr.copy().set_parse_action(lambda toks: [tuple(toks)])


def _plain(tok):
    if isinstance(tok, ParseResults):
        return [_plain(t) for t in tok]
    return tok


def _located(kind, expr):
    def action(st, loc, toks):
        return [Statement(kind, loc, tuple(_plain(t) for t in toks))]

    return expr.copy().set_parse_action(action)


@lru_cache(maxsize=None)
def site_grammar():
    LBRACE, RBRACE = S("{"), S("}")
    LPAREN, RPAREN = S("("), S(")")
    SEMI, COLON, COMMA = S(";"), S(":"), S(",")
    ARROW, DOT, EQ, LE = S("->"), S("."), S("="), S("<=")

    NAME = Word(alphanums + "_'")
    INT = Word(nums).set_parse_action(lambda toks: [int(toks[0])])
    CMD = Word(alphanums + "-")

    names = _tupled(O(NAME + ZoM(O(COMMA) + NAME)))
    pair = _tupled(NAME + ARROW - NAME)
    pairs = (pair + ZoM(COMMA + pair)).set_parse_action(lambda toks: [Pairs(toks)])
    entry = _located("entry", NAME + COLON - (pairs | names) - SEMI)
    entries = Group(ZoM(entry))

    sexpr = Forward()
    atom = Word(alphanums + "_'=-")
    sexpr <<= atom | _tupled(S(L("(")) + ZoM(sexpr) + S(L(")")))

    category_item = (
        _located("objects", K("objects").suppress() - names - SEMI)
        | _located("arrow", K("arrow").suppress() - NAME - COLON - NAME - ARROW - NAME - SEMI)
        | _located("compose", K("compose").suppress() - NAME - DOT - NAME - EQ - NAME - SEMI)
    )
    category = _located("category", K("category").suppress() - LBRACE - Group(ZoM(category_item)) - RBRACE)

    chain = _located("chain", _tupled(NAME + ZoM(LE - NAME)) + O(SEMI))
    poset = _located("poset", K("poset").suppress() - LBRACE - Group(ZoM(chain)) - RBRACE)

    product = _located("product", NAME + DOT - NAME - EQ - NAME - SEMI)
    monoid = _located(
        "monoid",
        K("monoid").suppress() - LBRACE - K("elements").suppress() - names - SEMI - Group(ZoM(product)) - RBRACE,
    )

    sieve = LBRACE + names + RBRACE
    covering = _located("covering", NAME + COLON - _tupled(sieve + ZoM(COMMA + sieve)) - SEMI)
    coverage = _located(
        "coverage-named", K("coverage").suppress() + (K("trivial") | K("dense") | K("all")) - SEMI
    ) | _located("coverage", K("coverage").suppress() - LBRACE - Group(ZoM(covering)) - RBRACE)

    presheaf = _located("presheaf", K("presheaf").suppress() - NAME - LBRACE - entries - RBRACE)
    nat_map = _located(
        "map",
        K("map").suppress() - NAME - COLON - NAME - ARROW - NAME - LBRACE - entries - RBRACE,
    )
    subobject = _located(
        "subobject",
        K("subobject").suppress() - NAME - K("of").suppress() - NAME - LBRACE - entries - RBRACE,
    )
    family = _located("family-all", K("family").suppress() + K("all").suppress() - SEMI) | _located(
        "family", K("family").suppress() - LBRACE - names - RBRACE - O(SEMI)
    )
    universe = _located(
        "universe-auto", K("universe").suppress() + K("auto").suppress() - LPAREN - INT - RPAREN - SEMI
    ) | _located("universe", K("universe").suppress() - LBRACE - names - RBRACE - O(SEMI))
    command = _located("run", K("run").suppress() - CMD - _tupled(ZoM(sexpr)) - SEMI)

    statement = category | poset | monoid | coverage | presheaf | nat_map | subobject | family | universe | command
    site = ZoM(statement) + StringEnd()
    site.ignore(python_style_comment)
    return site


def parse_statements(text):
    """
    @return list of Statement in source order
    @raise SiteSpecSyntaxError with the position and the expected token
    """
    try:
        result = site_grammar().parse_string(text, parse_all=True)
    except ParseBaseException as e:
        element = getattr(e, "parser_element", None)
        if element is None or isinstance(element, StringEnd):
            expected = STATEMENT_KEYWORDS
        else:
            expected = (str(element),)
        raise SiteSpecSyntaxError(e.msg, e.lineno, e.col, expected)
    statements = list(result)
    log.debug("parsed %d statements", len(statements))
    return statements


def position(text, loc):
    return lineno(loc, text), col(loc, text)
