"""Parser for the ASCII (and Unicode) logical-form DSL."""

import json
import logging
from functools import lru_cache
from typing import Set

from lark import Lark, Token, Transformer
from lark.exceptions import UnexpectedInput, VisitError

from ontosem.logic import (
    ATOMS,
    Arg,
    Be,
    Binding,
    Formula,
    Implies,
    LFSyntaxError,
    Literal,
    LogicError,
    Modify,
    NOO,
    Not,
    Pred,
    Quantified,
    Quantifier,
    StructRel,
    Typ,
    Variable,
    conj,
    constants,
    disj,
    map_args,
    map_children,
)
from ontosem.ontology import Cardinality, ExistenceMode, ROOT, TypeTerm

logger = logging.getLogger(__name__)

LF_GRAMMAR = r"""
?start: formula

?formula: disjunction
        | disjunction ("->" | "⊃") formula       -> implies

?disjunction: conjunction
            | disjunction ("|" | "∨") conjunction  -> or_

?conjunction: unary
            | conjunction ("&" | "∧") unary         -> and_

?unary: ("~" | "¬") unary                           -> not_
      | quantified
      | atom
      | "(" formula ")"

quantified: quant LNAME [":" type] "." formula

quant: "E1"  -> exists_unique
     | "∃¹"  -> exists_unique
     | "E"   -> exists
     | "∃"   -> exists
     | "A"   -> forall
     | "∀"   -> forall

?atom: "be" "(" LNAME "," LNAME ")"                 -> be
     | "NOO" "(" LNAME "," ESCAPED_STRING ")"       -> noo
     | "typ" "(" formula ")"                        -> typ
     | struct_kind "(" args ")"                     -> struct_rel
     | PRED "(" PRED "(" args ")" ")"               -> modify
     | PRED "(" args ")"                            -> pred

!struct_kind: "has" | "in" | "do" | "gt" | "agent" | "theme"

args: arg ("," arg)*

arg: LNAME [":" type]     -> var_arg
   | SIGNED_NUMBER        -> num_arg
   | ESCAPED_STRING       -> str_arg

type: LNAME MODE? card?
card: CARD_MANY | CARD_ONE

MODE: "^a"
CARD_MANY: "^1+"
CARD_ONE: "^1"
PRED: /[A-Z][A-Za-z0-9_]*/
LNAME: /[a-z][A-Za-z0-9_]*/

%import common.SIGNED_NUMBER
%import common.ESCAPED_STRING
%import common.WS
%ignore WS
"""


class _LFTransformer(Transformer):
    """Builds AST nodes bottom-up from the lark parse tree."""

    def implies(self, items):
        return Implies(items[0], items[1])

    def or_(self, items):
        return disj(items[0], items[1])

    def and_(self, items):
        return conj(items[0], items[1])

    def not_(self, items):
        return Not(items[0])

    def exists_unique(self, _):
        return Quantifier.EXISTS_UNIQUE

    def exists(self, _):
        return Quantifier.EXISTS

    def forall(self, _):
        return Quantifier.FORALL

    def quantified(self, items):
        quantifier, name, declared, body = items
        binding = Binding(quantifier, Variable(str(name)), declared or TypeTerm(ROOT))
        return Quantified(binding, body)

    def be(self, items):
        return Be(Variable(str(items[0])), Variable(str(items[1])))

    def noo(self, items):
        return NOO(Variable(str(items[0])), json.loads(items[1]))

    def typ(self, items):
        return Typ(items[0])

    def struct_kind(self, items):
        return str(items[0])

    def struct_rel(self, items):
        return StructRel(items[0], items[1])

    def modify(self, items):
        modifier, inner, args = items
        return Modify(str(modifier), Pred(str(inner), args))

    def pred(self, items):
        return Pred(str(items[0]), items[1])

    def args(self, items):
        return tuple(items)

    def var_arg(self, items):
        return Arg(Variable(str(items[0])), items[1])

    def num_arg(self, items):
        text = str(items[0])
        value = float(text) if any(c in text for c in ".eE") else int(text)
        return Arg(Literal(value))

    def str_arg(self, items):
        return Arg(Literal(json.loads(items[0])))

    def card(self, items):
        return Cardinality.MANY if items[0].type == "CARD_MANY" else Cardinality.ONE

    def type(self, items):
        base = str(items[0])
        mode = ExistenceMode.ACTUAL
        card = Cardinality.UNCONSTRAINED
        for item in items[1:]:
            if isinstance(item, Token) and item.type == "MODE":
                mode = ExistenceMode.ABSTRACT
            elif isinstance(item, Cardinality):
                card = item
        return TypeTerm(base, mode, card)


@lru_cache(maxsize=1)
def get_parser() -> Lark:
    return Lark(LF_GRAMMAR, parser="lalr", maybe_placeholders=True)


def mark_constants(f: Formula, names: Set[str]) -> Formula:
    """Flag the named variables as constants everywhere they occur."""
    if not names:
        return f

    def flag(var: Variable) -> Variable:
        return Variable(var.name, is_constant=True) if var.name in names else var

    def visit(g: Formula) -> Formula:
        if isinstance(g, Quantified):
            binding = Binding(g.binding.quantifier, flag(g.binding.var), g.binding.declared)
            return Quantified(binding, visit(g.body))
        if isinstance(g, ATOMS):
            return map_args(
                g,
                lambda arg: Arg(flag(arg.term), arg.signature)
                if isinstance(arg.term, Variable)
                else arg,
            )
        return map_children(g, visit)

    return visit(f)


def parse_lf(text: str) -> Formula:
    """
    Parse LF DSL text into a Formula.

    Variables named by a NOO atom are flagged as constants. Free variables are
    allowed; callers that need closed formulas check for themselves.

    Args:
        text: LF text in the ASCII DSL (Unicode connectives are accepted too)

    Returns:
        The parsed Formula
    """
    try:
        tree = get_parser().parse(text)
        formula = _LFTransformer().transform(tree)
    except UnexpectedInput as e:
        message = str(e).strip().splitlines()[0] if str(e).strip() else "unexpected input"
        logger.debug(f"LF syntax error in {text!r}: {message}")
        raise LFSyntaxError(message, getattr(e, "line", None), getattr(e, "column", None)) from e
    except VisitError as e:
        if isinstance(e.orig_exc, LogicError):
            raise LFSyntaxError(str(e.orig_exc)) from e
        raise
    return mark_constants(formula, constants(formula))

