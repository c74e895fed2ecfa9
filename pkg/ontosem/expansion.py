"""Concept definitions, condensed-to-expanded rewriting and copula interpretation."""

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

from ontosem.engine import resolve_scope
from ontosem.lf_parser import parse_lf
from ontosem.logic import (
    And,
    Arg,
    Be,
    Binding,
    Formula,
    Implies,
    LogicError,
    Modify,
    NOO,
    Not,
    Or,
    Pred,
    Quantified,
    Quantifier,
    StructRel,
    Term,
    Typ,
    Variable,
    bindings,
    conj,
    disj,
    fresh_name,
    free_vars,
    rename_binder,
    substitute,
    variable_names,
)
from ontosem.ontology import (
    OntologyError,
    TypeHierarchy,
    TypeTerm,
    ancestors,
    parse_type_term,
    subsumes,
)
from ontosem.salience import SalienceRegistry, msr

logger = logging.getLogger(__name__)

ABSTRACT_OBJECT_TYPES = ("activity", "attribute", "state", "process", "property")

COPULA_RELATIONS = {
    "property": "has",
    "attribute": "has",
    "state": "in",
    "process": "gt",
    "activity": "do",
}

MAX_EXPANSION_DEPTH = 16

_DEF_LINE = re.compile(
    r"^(?P<opaque>opaque\s+)?def\s+(?P<head>[A-Z][A-Za-z0-9_]*)\s*\((?P<params>[^)]*)\)\s*:=\s*"
    r"(?P<body>.+?)(?:\s+with\s+(?P<residue>.+))?$"
)


class ExpansionError(Exception):
    """Exception raised for errors while expanding condensed predicates."""
    pass


class MissingDefinitionError(ExpansionError):
    """Exception raised when a predicate needs a definition that is not loaded."""
    pass


class DefinitionShapeError(ExpansionError):
    """Exception raised when a definition does not have the required shape."""
    pass


class DefinitionFormatError(ExpansionError):
    """Exception raised for malformed definition-file lines."""

    def __init__(self, message: str, line: Optional[int] = None, source: str = "<text>"):
        self.line = line
        self.source = source
        location = f"{source}:{line}: " if line is not None else ""
        super().__init__(f"{location}{message}")


class CopulaError(ExpansionError):
    """Exception raised when no copula rule relates subject and complement."""
    pass


@dataclass(frozen=True)
class ConceptDefinition:
    """
    A condensed predicate defined by a body quantifying over an abstract object.

    Opaque definitions are recorded (so the modifier is known) but never expanded.
    """

    head: str
    params: Tuple[Tuple[Variable, TypeTerm], ...]
    body: Formula
    residue: Optional[Formula] = None
    opaque: bool = False

    @property
    def abstract_binding(self) -> Binding:
        return self.body.binding

    def instantiate(self, terms: Sequence[Term], taken: Set[str]) -> Formula:
        """Substitute argument terms for the parameters, freshening body binders."""
        if len(terms) != len(self.params):
            raise ExpansionError(
                f"{self.head} takes {len(self.params)} arguments, got {len(terms)}"
            )
        body = self.body
        used = set(taken) | variable_names(body)
        for binding in bindings(body):
            if binding.var.name in taken:
                new_name = fresh_name(used)
                used.add(new_name)
                body = rename_binder(body, binding.var.name, new_name)
        mapping = {var.name: term for (var, _), term in zip(self.params, terms)}
        return substitute(body, mapping)

    def axiom(self) -> Formula:
        """The definition as a closed biconditional over its parameters."""
        head = Pred(self.head, tuple(Arg(var) for var, _ in self.params))
        formula = conj(Implies(head, self.body), Implies(self.body, head))
        for var, term in reversed(self.params):
            formula = Quantified(Binding(Quantifier.FORALL, var, term), formula)
        return formula


@dataclass
class DefinitionRegistry:
    definitions: Dict[str, ConceptDefinition] = field(default_factory=dict)

    def __contains__(self, head: str) -> bool:
        return head in self.definitions

    def __len__(self) -> int:
        return len(self.definitions)

    def get(self, head: str) -> Optional[ConceptDefinition]:
        return self.definitions.get(head)

    def require(self, head: str) -> ConceptDefinition:
        if head not in self.definitions:
            raise MissingDefinitionError(f"No definition for {head}")
        return self.definitions[head]

    def is_condensed(self, head: str) -> bool:
        defn = self.definitions.get(head)
        return defn is not None and not defn.opaque

    def add(self, defn: ConceptDefinition) -> None:
        if defn.head in self.definitions:
            raise DefinitionFormatError(f"Duplicate definition for {defn.head}")
        self.definitions[defn.head] = defn


def validate_definition(h: TypeHierarchy, defn: ConceptDefinition) -> None:
    """Check parameter types, free variables and the abstract-object quantifier."""
    params = {var.name for var, _ in defn.params}
    for _, term in defn.params:
        h.require(term.base)
    extra = free_vars(defn.body) - params
    if extra:
        raise DefinitionShapeError(f"{defn.head}: free variables {sorted(extra)} in body")
    body = defn.body
    if not isinstance(body, Quantified) or body.binding.quantifier is Quantifier.FORALL:
        raise DefinitionShapeError(f"{defn.head}: body must open with an existential binder")
    categories = [t for t in ABSTRACT_OBJECT_TYPES if t in h]
    if not any(subsumes(h, c, body.binding.declared.base) for c in categories):
        raise DefinitionShapeError(
            f"{defn.head}: body must quantify over an abstract object "
            f"({', '.join(ABSTRACT_OBJECT_TYPES)}), not {body.binding.declared}"
        )
    if defn.residue is not None:
        allowed = params | {body.binding.var.name}
        stray = free_vars(defn.residue) - allowed
        if stray:
            raise DefinitionShapeError(f"{defn.head}: residue mentions {sorted(stray)}")


def _parse_params(text: str) -> Tuple[Tuple[Variable, TypeTerm], ...]:
    params = []
    for chunk in [c.strip() for c in text.split(",") if c.strip()]:
        name, _, type_text = chunk.partition(":")
        params.append((Variable(name.strip()), parse_type_term(type_text or "thing")))
    return tuple(params)


def parse_definitions(
    text: str, h: TypeHierarchy, source: str = "<text>"
) -> DefinitionRegistry:
    """
    Parse a definition file.

    Args:
        text: File content, one ``[opaque ]def HEAD(params) := body [with residue]``
            per line
        h: Hierarchy the parameter and binder types refer to
        source: Name used in error messages

    Returns:
        The validated DefinitionRegistry
    """
    registry = DefinitionRegistry()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        match = _DEF_LINE.match(line)
        if not match:
            raise DefinitionFormatError("Expected 'def HEAD(params) := body'", lineno, source)
        try:
            defn = ConceptDefinition(
                head=match.group("head"),
                params=_parse_params(match.group("params")),
                body=parse_lf(match.group("body")),
                residue=parse_lf(match.group("residue")) if match.group("residue") else None,
                opaque=bool(match.group("opaque")),
            )
            validate_definition(h, defn)
            registry.add(defn)
        except (LogicError, OntologyError, ExpansionError) as e:
            if isinstance(e, DefinitionFormatError) and e.line is not None:
                raise
            raise DefinitionFormatError(str(e), lineno, source) from e
    logger.debug(f"Loaded {len(registry)} definitions from {source}")
    return registry


def load_definitions(path: Union[str, Path], h: TypeHierarchy) -> DefinitionRegistry:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        logger.error(f"Error reading definitions file: {e}")
        raise ExpansionError(f"Cannot read definitions file {path}: {e}") from e
    return parse_definitions(text, h, source=str(path))


def _wrap(binders: List[Binding], body: Formula) -> Formula:
    for binding in reversed(binders):
        body = Quantified(binding, body)
    return body


def _peel_existentials(f: Formula) -> Tuple[Formula, List[Binding]]:
    binders = []
    while isinstance(f, Quantified) and f.binding.quantifier is not Quantifier.FORALL:
        binders.append(f.binding)
        f = f.body
    return f, binders


class _Expander:
    """
    Rewrites condensed predicates in place.

    Existential binders introduced by a definition are hoisted through
    conjunctions to the nearest enclosing scope boundary.
    """

    def __init__(self, defs: DefinitionRegistry, taken: Set[str]):
        self.defs = defs
        self.taken = set(taken)
        self.depth = 0

    def run(self, f: Formula) -> Formula:
        body, hoisted = self.visit(f)
        return _wrap(hoisted, body)

    def _instantiate(self, head: str, args: Sequence[Arg]) -> Formula:
        defn = self.defs.require(head)
        body = defn.instantiate([a.term for a in args], self.taken)
        self.taken |= variable_names(body)
        return body

    def _nested(self, f: Formula) -> Formula:
        self.depth += 1
        if self.depth > MAX_EXPANSION_DEPTH:
            raise ExpansionError("Definitions expand into each other without end")
        try:
            return self.run(f)
        finally:
            self.depth -= 1

    def visit(self, f: Formula) -> Tuple[Formula, List[Binding]]:
        if isinstance(f, Pred) and self.defs.is_condensed(f.name):
            return _peel_existentials(self._nested(self._instantiate(f.name, f.args)))
        if isinstance(f, Modify):
            return _peel_existentials(self._nested(self._modified(f)))
        if isinstance(f, Quantified):
            return Quantified(f.binding, self.run(f.body)), []
        if isinstance(f, And):
            parts, hoisted = [], []
            for conjunct in f.conjuncts:
                part, binders = self.visit(conjunct)
                parts.append(part)
                hoisted.extend(binders)
            return conj(*parts), hoisted
        if isinstance(f, Implies):
            return Implies(self.run(f.antecedent), self.run(f.consequent)), []
        if isinstance(f, Not):
            if isinstance(f.body, Not):
                return self.visit(f.body.body)
            if isinstance(f.body, Pred) and self.defs.is_condensed(f.body.name):
                return expand_negated(self.defs, f, self.taken), []
            return Not(self.run(f.body)), []
        if isinstance(f, Or):
            return disj(*[self.run(d) for d in f.disjuncts]), []
        if isinstance(f, Typ):
            return Typ(self.run(f.body)), []
        return f, []

    def _modified(self, f: Modify) -> Formula:
        """MOD(P(x)) becomes P's body with (MOD(a) | MOD(x)) added for its abstract object."""
        defn = self.defs.get(f.inner.name)
        if defn is None:
            raise MissingDefinitionError(
                f"Modifier {f.modifier} needs a definition for {f.inner.name}"
            )
        body = self._instantiate(f.inner.name, f.inner.args)
        if not isinstance(body, Quantified):
            raise DefinitionShapeError(f"{f.inner.name}: no abstract object to modify")
        abstract = body.binding.var
        subject = f.inner.args[0].term
        modifier = disj(Pred(f.modifier, (Arg(abstract),)), Pred(f.modifier, (Arg(subject),)))
        return Quantified(body.binding, conj(body.body, modifier))


def expand(defs: DefinitionRegistry, f: Formula) -> Formula:
    """
    Replace every condensed predicate by its definition body.

    Negated condensed predicates are rewritten through ``expand_negated``; modifier
    applications conjoin the modifier disjunction inside the abstract-object scope.
    Opaque definitions and undefined predicates are left alone.

    Args:
        defs: Loaded definitions
        f: Formula to expand

    Returns:
        The expanded formula
    """
    expanded = _Expander(defs, variable_names(f)).run(f)
    if expanded != f:
        logger.debug("Expanded condensed predicates")
    return expanded


def expand_negated(
    defs: DefinitionRegistry, f: Formula, taken: Optional[Set[str]] = None
) -> Formula:
    """
    Rewrite ``~P(args)`` for an agent/theme-shaped definition of P.

    ``E a . Q(a) & c1 & ... & cn`` under negation becomes
    ``A a . Q(a) -> ~c1 | ... | ~cn``.
    """
    if not isinstance(f, Not) or not isinstance(f.body, Pred):
        raise ExpansionError("expand_negated needs a negated predicate application")
    atom = f.body
    defn = defs.require(atom.name)
    if defn.opaque:
        raise DefinitionShapeError(f"{atom.name} is opaque and is never expanded")
    if taken is None:
        taken = set()
    body = defn.instantiate([a.term for a in atom.args], taken | _names_of(atom))
    taken |= variable_names(body)
    if not isinstance(body, Quantified) or body.binding.quantifier is not Quantifier.EXISTS:
        raise DefinitionShapeError(f"{atom.name}: negation needs a plain existential body")
    matrix = body.body
    parts = list(matrix.conjuncts) if isinstance(matrix, And) else [matrix]
    kind, rest = parts[0], parts[1:]
    abstract = body.binding.var
    if not (
        isinstance(kind, Pred)
        and len(kind.args) == 1
        and kind.args[0].term == abstract
        and rest
    ):
        raise DefinitionShapeError(
            f"{atom.name}: body is not of the form E a . KIND(a) & role(a, ...) & ..."
        )
    universal = Binding(Quantifier.FORALL, abstract, body.binding.declared)
    return Quantified(universal, Implies(kind, disj(*[Not(c) for c in rest])))


def _names_of(atom: Pred) -> Set[str]:
    return {a.term.name for a in atom.args if isinstance(a.term, Variable)}


@dataclass(frozen=True)
class Complement:
    """The right-hand side of a copula: its type, and a term and/or predicate."""

    type: TypeTerm
    term: Optional[Term] = None
    predicate: Optional[str] = None


def copula_category(h: TypeHierarchy, t: str) -> Optional[str]:
    """Return the abstract-object category (property, state, ...) ``t`` falls under."""
    for level in [h.require(t)] + ancestors(h, t):
        if level in COPULA_RELATIONS:
            return level
    return None


def copula_formula(
    h: TypeHierarchy,
    reg: SalienceRegistry,
    subject: Tuple[Variable, TypeTerm],
    complement: Complement,
    taken: Optional[Set[str]] = None,
) -> Formula:
    """Build the unresolved copula form: a be-link for identity, else a relation."""
    var, subject_type = subject
    complement_type = complement.type
    taken = set(taken or ()) | {var.name}
    prefix: List[Formula] = [NOO(var, var.name)] if var.is_constant else []
    outer = Binding(Quantifier.EXISTS_UNIQUE, var, subject_type)

    if isinstance(complement.term, Variable) and complement.term.name == var.name:
        return Quantified(outer, conj(*prefix, Be(var, var)))

    if isinstance(complement.term, Variable):
        other = complement.term
    else:
        other = Variable(fresh_name(taken))
    literal = [] if complement.term is None or isinstance(complement.term, Variable) else [
        Arg(complement.term)
    ]

    identity = subsumes(h, subject_type.base, complement_type.base) or subsumes(
        h, complement_type.base, subject_type.base
    )
    if identity:
        content: List[Formula] = []
        if complement.predicate:
            content.append(
                Pred(complement.predicate, (Arg(other, complement_type), *literal))
            )
        content.append(Be(var, other))
        inner = Quantified(Binding(Quantifier.EXISTS_UNIQUE, other, complement_type), conj(*content))
        return Quantified(outer, conj(*prefix, inner))

    category = copula_category(h, complement_type.base)
    if category is None:
        logger.error(f"No copula rule for {subject_type} and {complement_type}")
        raise CopulaError(
            f"'{subject_type}' is not '{complement_type}' and '{complement_type}' is not "
            f"a property, attribute, state, process or activity"
        )
    link = _copula_link(h, reg, category, var, subject_type, other, complement_type)
    content = []
    if complement.predicate:
        content.append(Pred(complement.predicate, (Arg(other), *literal)))
    inner = Quantified(
        Binding(Quantifier.EXISTS_UNIQUE, other, complement_type), conj(*content, link)
    )
    return Quantified(outer, conj(*prefix, inner))


def _copula_link(
    h: TypeHierarchy,
    reg: SalienceRegistry,
    category: str,
    subject: Variable,
    subject_type: TypeTerm,
    obj: Variable,
    obj_type: TypeTerm,
) -> Formula:
    if category == "activity":
        relation = msr(reg, h, obj_type, subject_type)
        if relation:
            return Pred(relation, (Arg(obj), Arg(subject)))
        relation = msr(reg, h, subject_type, obj_type)
        if relation:
            return Pred(relation, (Arg(subject), Arg(obj)))
    return StructRel(COPULA_RELATIONS[category], (Arg(subject), Arg(obj)))


def interpret_copula(
    h: TypeHierarchy,
    reg: SalienceRegistry,
    subject: Tuple[Variable, TypeTerm],
    complement: Complement,
) -> Formula:
    """
    Interpret ``subject is complement``.

    Identity when one type subsumes the other (the two variables merge); otherwise
    the complement's category picks the structural relation: has for properties and
    attributes, in for states, gt for processes, and for activities the salient
    relation when one is declared, else do.

    Args:
        h: Type hierarchy
        reg: Salience registry
        subject: Subject variable with its type
        complement: Complement type with its term and/or predicate

    Returns:
        The resolved formula
    """
    resolved, _ = resolve_scope(h, reg, copula_formula(h, reg, subject, complement))
    return resolved
