"""Concrete syntax of formulas.

EBNF (see ``docs/grammar.md`` for the full description)::

    formula    ::= quantifier* core
    quantifier ::= ("forall" | "exists") NAME ":" NAME "."
    core       ::= impl
    impl       ::= disj ("->" impl)?
    disj       ::= conj ("|" conj)*
    conj       ::= until ("&" until)*
    until      ::= unary ("U" until)?
    unary      ::= ("!" | "X" | "F" | "G" | "Y" | "O" | "H") unary | primary
    primary    ::= "true" | NAME ["^G"] "(" [NAME ("," NAME)*] ")" | "(" core ")"
"""

import logging
import re
import pyparsing as pp

from ftlearn import exceptions
from ftlearn.data.preprocess import GOAL_SUFFIX
from ftlearn.logic.ftl import (
    Atom,
    Binary,
    Connector,
    Formula,
    Not,
    QuantifiedVariable,
    Quantifier,
    Top,
    Unary,
    check_against_domain,
)

logger = logging.getLogger(__name__)

# Formulas from the literature on the shipped Childsnack and Spanner domains.
KNOWN_FORMULAS = {
    "all_children_served": "forall x:child. F served(x)",
    "sandwich_until_on_tray": (
        "forall x:sandwich. exists y:tray. notexist(x) U X ontray(x,y)"
    ),
    "tray_returns_to_kitchen": (
        "forall x:kitchen. exists y:tray. F (at(y,x) & O !at(y,x))"
    ),
    "allergic_served_last": (
        "forall y:child. exists x:child. not_allergic_gluten(x) & (!served(y) U served(x))"
    ),
    "spanner_kept_forever": "forall x:spanner. exists y:man. F G carrying(y,x)",
    "spanner_moved": "forall x:spanner. exists y:location. at(x,y) & F !at(x,y)",
    "spanner_carried_unary": "forall x:spanner. F carrying_2(x)",
}

_QUANTIFIER_KEYWORD = re.compile(r"\b(forall|exists)\b")
_PREFIX = re.compile(r"^\s*(?:(?:forall|exists)\s+[^\s:]+\s*:\s*[^\s.]+\s*\.\s*)*")


def _fold(tokens, right):
    items = list(tokens)
    if right:
        node = items[-1]
        for idx in range(len(items) - 2, 0, -2):
            node = Binary(Connector.from_symbol(items[idx]), items[idx - 1], node)
        return node
    node = items[0]
    for idx in range(1, len(items), 2):
        node = Binary(Connector.from_symbol(items[idx]), node, items[idx + 1])
    return node


def _unary(tokens):
    items = list(tokens[0])
    node = items[-1]
    for symbol in reversed(items[:-1]):
        op = Connector.from_symbol(symbol)
        node = Not(node) if op is Connector.NOT else Unary(op, node)
    return node


class FormulaGrammar:
    """pyparsing grammar turning formula text into :class:`Formula` objects."""

    def __init__(self):
        name = pp.Word(pp.alphas + "_", pp.alphanums + "_-")
        lpar, rpar = pp.Suppress("("), pp.Suppress(")")
        goal = pp.Opt(pp.Literal("^G"))
        atom = name + goal + lpar + pp.Group(pp.Opt(pp.DelimitedList(name))) + rpar
        atom.set_parse_action(self._atom)
        true = pp.Keyword("true").set_parse_action(lambda: Top())
        unary_ops = pp.Literal("!") | pp.MatchFirst(
            [pp.Keyword(op.value) for op in Connector if op.unary and op is not Connector.NOT]
        )
        core = pp.infix_notation(
            true | atom,
            [
                (unary_ops, 1, pp.OpAssoc.RIGHT, _unary),
                (pp.Keyword("U"), 2, pp.OpAssoc.RIGHT, lambda t: _fold(t[0], right=True)),
                (pp.Literal("&"), 2, pp.OpAssoc.LEFT, lambda t: _fold(t[0], right=False)),
                (pp.Literal("|"), 2, pp.OpAssoc.LEFT, lambda t: _fold(t[0], right=False)),
                (pp.Literal("->"), 2, pp.OpAssoc.RIGHT, lambda t: _fold(t[0], right=True)),
            ],
        )
        kind = pp.Keyword("forall") | pp.Keyword("exists")
        quantifier = kind + name + pp.Suppress(":") + name + pp.Suppress(".")
        quantifier.set_parse_action(
            lambda t: QuantifiedVariable(Quantifier(t[0]), t[1], t[2].lower())
        )
        self.formula = pp.Group(pp.ZeroOrMore(quantifier)) + core

    @staticmethod
    def _atom(tokens):
        items = list(tokens)
        predicate = items[0].lower()
        if len(items) == 3:
            predicate += GOAL_SUFFIX
        return Atom(predicate, tuple(items[-1]))

    def parse(self, text):
        remainder = text[_PREFIX.match(text).end():]
        if _QUANTIFIER_KEYWORD.search(remainder):
            raise exceptions.FormulaError(
                f"Quantifiers must form a prenex block at the start: '{text}'."
            )
        try:
            prefix, core = self.formula.parse_string(text, parse_all=True)
        except pp.ParseException as e:
            raise exceptions.FormulaSyntaxError(e.msg, e.lineno, e.col) from None
        return Formula(tuple(prefix), core)


_GRAMMAR = None


def parse_formula(text, domain=None):
    """Parse formula text such as ``forall x:child. F served(x)``.

    Args:
        text (str): the formula
        domain (Domain): if given, predicates, arities and types are checked

    Returns:
        Formula
    """
    global _GRAMMAR
    if _GRAMMAR is None:
        _GRAMMAR = FormulaGrammar()
    formula = _GRAMMAR.parse(text)
    if domain is not None:
        check_against_domain(formula, domain)
    return formula


def _name(predicate, pretty):
    if pretty and predicate.endswith(GOAL_SUFFIX):
        return predicate[: -len(GOAL_SUFFIX)] + "^G"
    return predicate


def node_to_text(node, pretty=False, top=True):
    if isinstance(node, Top):
        return "true"
    if isinstance(node, Atom):
        return f"{_name(node.predicate, pretty)}({','.join(node.args)})"
    if isinstance(node, (Not, Unary)):
        symbol = "!" if isinstance(node, Not) else node.op.value + " "
        inner = node_to_text(node.child, pretty, top=False)
        if isinstance(node.child, Binary):
            inner = f"({node_to_text(node.child, pretty, top=True)})"
        return symbol + inner
    text = (
        f"{node_to_text(node.left, pretty, top=False)} {node.op.value} "
        f"{node_to_text(node.right, pretty, top=False)}"
    )
    return text if top else f"({text})"


def to_text(formula, pretty=False):
    """Canonical text of a formula, parsed back by :func:`parse_formula`.

    Binary sub-formulas are always parenthesized. With ``pretty`` goal
    predicates are written ``p^G``.
    """
    prefix = "".join(f"{q.kind.value} {q.var}:{q.type}. " for q in formula.quantifiers)
    return prefix + node_to_text(formula.core, pretty)
