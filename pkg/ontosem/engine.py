"""Unification engine: scope resolution, bridging, anaphora and modus ponens."""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, List, Optional, Set, Tuple

from ontosem.logic import (
    ATOMS,
    And,
    Arg,
    Be,
    Binding,
    Formula,
    Implies,
    Modify,
    NOO,
    Pred,
    Quantified,
    Quantifier,
    StructRel,
    Variable,
    alpha_normalize,
    atom_args,
    binding_of,
    bindings,
    conj,
    conjoin_innermost,
    constants,
    fresh_name,
    iter_args,
    iter_atoms,
    map_args,
    map_children,
    merge_variables,
    rename_binder,
    remove_atoms,
    serialize,
    substitute,
    substitute_constant,
    unbind,
    uniquify,
    variable_names,
)
from ontosem.ontology import (
    Bridged,
    Cardinality,
    ExistenceMode,
    Failure,
    Single,
    TypeHierarchy,
    TypeTerm,
    cardinality_meet,
    subsumes,
    unify,
)
from ontosem.salience import SalienceRegistry

logger = logging.getLogger(__name__)

RULES = (
    "const-subst",
    "copula",
    "unify-subsume",
    "unify-mode",
    "retract",
    "bridge",
    "anaphor-bind",
    "expand",
    "modus-ponens",
)


class EngineError(Exception):
    """Exception raised for errors in the unification engine."""
    pass


class UnificationError(EngineError):
    """Exception raised when a variable's types neither unify nor bridge."""

    def __init__(self, var: str, declared: TypeTerm, demand: TypeTerm, meet: Optional[str] = None):
        self.var = var
        self.declared = declared
        self.demand = demand
        self.meet = meet
        hint = f" (they only meet at '{meet}')" if meet else ""
        super().__init__(
            f"Cannot unify {var}: {declared} with demanded {demand}; "
            f"no subsumption and no salient relation{hint}"
        )


class AnaphoraError(EngineError):
    """Exception raised when a pronoun cannot be resolved."""
    pass


class NoAntecedentError(AnaphoraError):
    pass


class AmbiguousAntecedentError(AnaphoraError):
    pass


class ModusPonensError(EngineError):
    """Exception raised when a rule is not a universally closed implication."""
    pass


@dataclass(frozen=True)
class TraceStep:
    rule: str
    before: Formula
    after: Formula
    note: str = ""

    def render(self, ascii: bool = False, normalize: bool = False) -> str:
        before, after = self.before, self.after
        if normalize:
            before, after = alpha_normalize(before), alpha_normalize(after)
        arrow = "=>" if ascii else "⇒"
        line = f"[{self.rule}] {serialize(before, ascii)} {arrow} {serialize(after, ascii)}"
        return f"{line}  -- {self.note}" if self.note else line


@dataclass
class DerivationTrace:
    """A chain of rewrite steps; each step's ``before`` is the previous ``after``."""

    start: Formula
    steps: List[TraceStep] = field(default_factory=list)

    @property
    def final(self) -> Formula:
        return self.steps[-1].after if self.steps else self.start

    def add(self, rule: str, after: Formula, note: str = "") -> None:
        if rule not in RULES:
            raise EngineError(f"Unknown rule label: {rule}")
        self.steps.append(TraceStep(rule, self.final, after, note))

    def extend(self, other: "DerivationTrace") -> None:
        if other.start != self.final:
            raise EngineError("Trace does not continue from the current final formula")
        self.steps.extend(other.steps)

    def is_chained(self) -> bool:
        current = self.start
        for step in self.steps:
            if step.before != current:
                return False
            current = step.after
        return True

    def rules(self) -> List[str]:
        return [step.rule for step in self.steps]

    def render(self, ascii: bool = False, verbosity: str = "steps", normalize: bool = False) -> str:
        final = alpha_normalize(self.final) if normalize else self.final
        final_line = f"final: {serialize(final, ascii)}"
        if verbosity == "final":
            return final_line
        lines = [step.render(ascii, normalize) for step in self.steps]
        return "\n".join(lines + [final_line])


@dataclass(frozen=True)
class PronounSlot:
    """A pronoun's bound variable, its position constraint and its sentence."""

    var: Variable
    constraint: TypeTerm
    sentence: int
    word: str = "it"


@dataclass
class Discourse:
    sentences: List[Formula]
    pronoun_slots: List[PronounSlot] = field(default_factory=list)
    deictics: FrozenSet[str] = frozenset()


@dataclass
class _Side:
    var: Variable
    term: TypeTerm


# Scope resolution


def _constant_names(f: Formula) -> Set[str]:
    names = set(constants(f))
    names |= {b.var.name for b in bindings(f) if b.var.is_constant}
    for atom in iter_atoms(f):
        names |= {
            a.term.name
            for a in atom_args(atom)
            if isinstance(a.term, Variable) and a.term.is_constant
        }
    return names


def _first_be(f: Formula) -> Optional[Be]:
    for atom in iter_atoms(f):
        if (
            isinstance(atom, Be)
            and isinstance(atom.left, Variable)
            and isinstance(atom.right, Variable)
            and atom.left.name != atom.right.name
        ):
            return atom
    return None


def _resolve_be(f: Formula, be: Be) -> Tuple[Formula, str, str]:
    consts = _constant_names(f)
    left, right = be.left, be.right
    if left.name in consts or right.name in consts:
        keep, drop = (left, right) if left.name in consts else (right, left)
        note = f"{drop.name} := {keep.name}"
        return substitute_constant(f, drop, Variable(keep.name, is_constant=True)), "const-subst", note

    order = [b.var.name for b in bindings(f)]
    if left.name not in order or right.name not in order:
        raise EngineError(f"be({left},{right}) links an unbound variable")
    keep, drop = (left, right) if order.index(left.name) < order.index(right.name) else (right, left)
    keep = binding_of(f, keep.name).var
    logger.debug(f"Copula merges {drop.name} into {keep.name}")
    return merge_variables(f, drop, keep), "copula", f"{drop.name} := {keep.name}"


def _next_demand(f: Formula, name: str) -> Optional[TypeTerm]:
    for arg in iter_args(f):
        if isinstance(arg.term, Variable) and arg.term.name == name and arg.signature is not None:
            return arg.signature
    return None


def _consume_occurrence(f: Formula, name: str, target: Variable) -> Formula:
    """Strip the first signature-bearing occurrence of ``name``, pointing it at ``target``."""
    done = [False]

    def swap(arg: Arg) -> Arg:
        if (
            not done[0]
            and arg.signature is not None
            and isinstance(arg.term, Variable)
            and arg.term.name == name
        ):
            done[0] = True
            return Arg(target)
        return arg

    return map_args(f, swap)


def _retype(f: Formula, name: str, term: TypeTerm) -> Formula:
    if isinstance(f, Quantified):
        body = _retype(f.body, name, term)
        if f.binding.var.name == name:
            return Quantified(Binding(f.binding.quantifier, f.binding.var, term), body)
        return Quantified(f.binding, body)
    return map_children(f, lambda child: _retype(child, name, term))


def _attach(body: Formula, atom: Formula, quantifier: Quantifier) -> Formula:
    if isinstance(body, Quantified):
        return Quantified(body.binding, _attach(body.body, atom, quantifier))
    if quantifier is Quantifier.FORALL:
        if isinstance(body, Implies):
            return Implies(conj(body.antecedent, atom), body.consequent)
        return Implies(atom, body)
    return conj(atom, body)


def _insert_bridge(f: Formula, name: str, fresh: Binding, atom: Formula) -> Formula:
    """Bind ``fresh`` directly inside ``name``'s binder and add the bridging atom."""
    if isinstance(f, Quantified) and f.binding.var.name == name:
        inner = Quantified(fresh, _attach(f.body, atom, f.binding.quantifier))
        return Quantified(f.binding, inner)
    return map_children(f, lambda child: _insert_bridge(child, name, fresh, atom))


def _classify(
    name: str, old: TypeTerm, new: TypeTerm, prior_modes: Dict[str, ExistenceMode]
) -> str:
    if old.mode is new.mode:
        return "unify-subsume"
    if old.is_abstract and prior_modes.get(name) is ExistenceMode.ABSTRACT:
        return "retract"
    return "unify-mode"


def resolve_scope(
    h: TypeHierarchy,
    reg: SalienceRegistry,
    f: Formula,
    prior_modes: Optional[Dict[str, ExistenceMode]] = None,
) -> Tuple[Formula, DerivationTrace]:
    """
    Resolve copula links and type obligations into a signature-free formula.

    be-links are eliminated first (constant substitution, or merging into the outer
    variable). Then every bound variable folds its declared type with each type
    demanded at its argument positions, in textual order: a demand that unifies with
    an existing side specialises it; one that does not is bridged from the original
    variable through a fresh variable and the most salient relation.

    Args:
        h: Type hierarchy
        reg: Salience registry
        f: Closed formula, possibly carrying argument signatures
        prior_modes: Existence modes inferred earlier in the discourse, used to label
            abstract-to-actual revisions as retractions

    Returns:
        The resolved formula and the derivation trace leading to it
    """
    prior_modes = prior_modes or {}
    current = uniquify(f)
    trace = DerivationTrace(start=current)

    be = _first_be(current)
    while be is not None:
        after, rule, note = _resolve_be(current, be)
        trace.add(rule, after, note)
        current = after
        be = _first_be(current)

    for name in [b.var.name for b in bindings(current)]:
        original = binding_of(current, name)
        sides = [_Side(original.var, original.declared)]
        demand = _next_demand(current, name)
        while demand is not None:
            current = _fold_demand(h, reg, current, trace, original, sides, demand, prior_modes)
            demand = _next_demand(current, name)

    return current, trace


def _fold_demand(
    h: TypeHierarchy,
    reg: SalienceRegistry,
    current: Formula,
    trace: DerivationTrace,
    original: Binding,
    sides: List[_Side],
    demand: TypeTerm,
    prior_modes: Dict[str, ExistenceMode],
) -> Formula:
    name = original.var.name
    for side in sides:
        outcome = unify(h, reg, side.term, demand)
        if isinstance(outcome, Single):
            rule = _classify(side.var.name, side.term, outcome.result, prior_modes)
            after = _retype(current, side.var.name, outcome.result)
            after = _consume_occurrence(after, name, side.var)
            note = f"{side.var.name}: {side.term} * {demand} = {outcome.result}"
            trace.add(rule, after, note)
            side.term = outcome.result
            return after

    outcome = unify(h, reg, sides[0].term, demand)
    if isinstance(outcome, Failure):
        logger.error(f"Unification failed for {name}: {sides[0].term} * {demand}")
        raise UnificationError(name, sides[0].term, demand, outcome.meet)

    assert isinstance(outcome, Bridged)
    fresh = Variable(fresh_name(variable_names(current)))
    fresh_binding = Binding(original.quantifier, fresh, demand)
    if outcome.subject_is_right:
        relation = Pred(outcome.relation, (Arg(fresh), Arg(original.var)))
    else:
        relation = Pred(outcome.relation, (Arg(original.var), Arg(fresh)))
    after = _insert_bridge(current, name, fresh_binding, relation)
    after = _consume_occurrence(after, name, fresh)
    note = f"{name}: {sides[0].term} * {demand} bridged by {outcome.relation}"
    if original.quantifier is Quantifier.FORALL:
        note += f"; {fresh.name} keeps the demanded mode"
    logger.debug(note)
    trace.add("bridge", after, note)
    sides.append(_Side(fresh, fresh_binding.declared))
    return after


# Discourse anaphora


def _role_rank(f: Formula, name: str) -> int:
    ranks = [
        i
        for atom in iter_atoms(f)
        if isinstance(atom, (Pred, StructRel, Modify))
        for i, arg in enumerate(atom_args(atom))
        if isinstance(arg.term, Variable) and arg.term.name == name
    ]
    return min(ranks) if ranks else 99


def _coargument_pronouns(f: Formula, name: str, pronouns: Set[str]) -> Set[str]:
    result: Set[str] = set()
    for atom in iter_atoms(f):
        names = {a.term.name for a in atom_args(atom) if isinstance(a.term, Variable)}
        if name in names:
            result |= (names & pronouns) - {name}
    return result


def _merge_repeated_names(sentences: List[Formula]) -> List[Formula]:
    """A constant named again in a later sentence refers to the earlier individual."""
    seen: Set[str] = set()
    merged = []
    for sentence in sentences:
        repeated = constants(sentence) & seen
        for name in sorted(repeated):
            sentence = remove_atoms(
                sentence, lambda atom, n=name: isinstance(atom, NOO) and atom.var.name == n
            )
            sentence = unbind(sentence, name)
        seen |= constants(sentence) | repeated
        merged.append(sentence)
    return merged


def _bind_pronoun(f: Formula, slot: PronounSlot, antecedent: Variable) -> Formula:
    # plural pronouns carry their cardinality to the antecedent's occurrences
    g = unbind(f, slot.var.name)
    plural = slot.constraint.card is Cardinality.MANY

    def swap(arg: Arg) -> Arg:
        if isinstance(arg.term, Variable) and arg.term.name == slot.var.name:
            signature = arg.signature
            if signature is not None and plural:
                signature = signature.with_card(
                    cardinality_meet(signature.card, slot.constraint.card)
                )
            return Arg(antecedent, signature)
        return arg

    return map_args(g, swap)


def _choose_antecedent(
    h: TypeHierarchy,
    reg: SalienceRegistry,
    slot: PronounSlot,
    sentences: List[Formula],
    resolved_types: List[Dict[str, TypeTerm]],
    excluded: Set[str],
) -> Variable:
    ranked = []
    for j in range(slot.sentence - 1, -1, -1):
        for binding in bindings(sentences[j]):
            name = binding.var.name
            if name in excluded:
                continue
            term = resolved_types[j].get(name, binding.declared)
            outcome = unify(h, reg, term, slot.constraint)
            if isinstance(outcome, Failure):
                continue
            bridged = isinstance(outcome, Bridged)
            if not bridged and not term.card.satisfies(slot.constraint.card):
                continue
            key = (bridged, slot.sentence - j, _role_rank(sentences[j], name))
            ranked.append((key, binding.var))

    if not ranked:
        logger.error(f"No antecedent for '{slot.word}' ({slot.constraint})")
        raise NoAntecedentError(
            f"No antecedent for pronoun '{slot.word}' with constraint {slot.constraint}"
        )
    ranked.sort(key=lambda item: item[0])
    best_key, best = ranked[0]
    rivals = [var.name for key, var in ranked[1:] if key == best_key]
    if rivals:
        raise AmbiguousAntecedentError(
            f"Pronoun '{slot.word}' is ambiguous between {best.name} and {', '.join(rivals)}"
        )
    return best


def resolve_discourse(
    h: TypeHierarchy, reg: SalienceRegistry, d: Discourse
) -> Tuple[Formula, DerivationTrace]:
    """
    Bind each pronoun to its antecedent, conjoin the sentences and resolve the result.

    Antecedent types come from resolving every sentence on its own; modes inferred
    there are passed on so later actual-mode demands show up as retractions.
    """
    if not d.sentences:
        raise EngineError("Empty discourse")
    sentences = _merge_repeated_names(d.sentences)
    pronoun_names = {slot.var.name for slot in d.pronoun_slots}

    resolved_types: List[Dict[str, TypeTerm]] = []
    prior_modes: Dict[str, ExistenceMode] = {}
    for sentence in sentences:
        try:
            resolved, _ = resolve_scope(h, reg, sentence)
        except EngineError as e:
            logger.debug(f"Sentence does not resolve on its own ({e}); using declared types")
            resolved = sentence
        types = {b.var.name: b.declared for b in bindings(resolved)}
        resolved_types.append(types)
        for name, term in types.items():
            if name not in pronoun_names:
                prior_modes[name] = term.mode

    merged = sentences[0]
    for sentence in sentences[1:]:
        clash = pronoun_names & {b.var.name for b in bindings(sentence)} & variable_names(merged)
        if clash:
            raise EngineError(
                f"Pronoun variable(s) {', '.join(sorted(clash))} already bound earlier"
            )
        merged = conjoin_innermost(merged, sentence)
    trace = DerivationTrace(start=merged)

    chosen: Dict[str, str] = {}
    for slot in d.pronoun_slots:
        coargs = _coargument_pronouns(sentences[slot.sentence], slot.var.name, pronoun_names)
        excluded = set(d.deictics) | pronoun_names | {chosen[p] for p in coargs if p in chosen}
        antecedent = _choose_antecedent(h, reg, slot, sentences, resolved_types, excluded)
        chosen[slot.var.name] = antecedent.name
        merged = _bind_pronoun(merged, slot, antecedent)
        trace.add("anaphor-bind", merged, f"{slot.word} -> {antecedent.name}")

    resolved, resolution = resolve_scope(h, reg, merged, prior_modes)
    trace.extend(resolution)
    return resolved, trace


# Modus ponens


def _peel(f: Formula, quantifiers: Set[Quantifier]) -> Tuple[List[Binding], Formula]:
    binders = []
    while isinstance(f, Quantified) and f.binding.quantifier in quantifiers:
        binders.append(f.binding)
        f = f.body
    return binders, f


def _conjuncts(f: Formula) -> List[Formula]:
    return list(f.conjuncts) if isinstance(f, And) else [f]


def _flatten_fact(f: Formula) -> Tuple[List[Binding], List[Formula]]:
    binders: List[Binding] = []
    atoms: List[Formula] = []

    def visit(g: Formula) -> None:
        if isinstance(g, Quantified) and g.binding.quantifier is not Quantifier.FORALL:
            binders.append(g.binding)
            visit(g.body)
        elif isinstance(g, And):
            for c in g.conjuncts:
                visit(c)
        else:
            atoms.append(g)

    visit(f)
    return binders, atoms


def _term_key(term) -> Tuple[str, str]:
    if isinstance(term, Variable):
        return ("var", term.name)
    return ("lit", str(term))


def _match_atom(
    pattern: Formula, fact: Formula, sigma: Dict[str, object], rule_vars: Set[str]
) -> Optional[Dict[str, object]]:
    if type(pattern) is not type(fact):
        return None
    if isinstance(pattern, Pred) and pattern.name != fact.name:
        return None
    if isinstance(pattern, StructRel) and pattern.kind != fact.kind:
        return None
    if isinstance(pattern, NOO) and pattern.label != fact.label:
        return None
    if isinstance(pattern, Modify) and (
        pattern.modifier != fact.modifier or pattern.inner.name != fact.inner.name
    ):
        return None
    if not isinstance(pattern, ATOMS):
        return sigma if pattern == fact else None
    p_args, f_args = atom_args(pattern), atom_args(fact)
    if len(p_args) != len(f_args):
        return None
    sigma = dict(sigma)
    for p_arg, f_arg in zip(p_args, f_args):
        p_term, f_term = p_arg.term, f_arg.term
        if isinstance(p_term, Variable) and p_term.name in rule_vars:
            bound = sigma.get(p_term.name)
            if bound is None:
                sigma[p_term.name] = f_term
            elif _term_key(bound) != _term_key(f_term):
                return None
        elif _term_key(p_term) != _term_key(f_term):
            return None
    return sigma


def _matches(
    antecedents: List[Formula],
    facts: List[Formula],
    sigma: Dict[str, object],
    rule_vars: Set[str],
) -> Iterator[Dict[str, object]]:
    if not antecedents:
        yield sigma
        return
    for fact in facts:
        extended = _match_atom(antecedents[0], fact, sigma, rule_vars)
        if extended is not None:
            yield from _matches(antecedents[1:], facts, extended, rule_vars)


def apply_modus_ponens(
    rule: Formula, fact: Formula, h: Optional[TypeHierarchy] = None
) -> Optional[Formula]:
    """
    Instantiate a universally quantified implication against an existential fact.

    Args:
        rule: Formula of the shape ``A x1 ... A xn . antecedent -> consequent``
        fact: Closed existential formula whose atoms may match the antecedent
        h: Hierarchy for checking that matched fact variables fit the rule's binder
            types (skipped when None)

    Returns:
        The instantiated consequent, or None when the antecedent does not match
    """
    binders, matrix = _peel(rule, {Quantifier.FORALL})
    if not isinstance(matrix, Implies):
        raise ModusPonensError(f"Rule is not an implication: {serialize(rule)}")
    rule_types = {b.var.name: b.declared for b in binders}
    antecedents = _conjuncts(matrix.antecedent)
    fact_binders, fact_atoms = _flatten_fact(fact)
    fact_types = {b.var.name: b.declared for b in fact_binders}
    fact_vars = {b.var.name: b.var for b in fact_binders}

    for sigma in _matches(antecedents, fact_atoms, {}, set(rule_types)):
        if set(sigma) != set(rule_types):
            continue
        if h is not None and not all(
            not isinstance(term, Variable)
            or term.name not in fact_types
            or subsumes(h, rule_types[name].base, fact_types[term.name].base)
            for name, term in sigma.items()
        ):
            continue
        mapping = {
            name: fact_vars.get(term.name, term) if isinstance(term, Variable) else term
            for name, term in sigma.items()
        }
        consequent = _freshen(matrix.consequent, variable_names(fact))
        conclusion = substitute(consequent, mapping)
        logger.debug(f"Modus ponens concluded {serialize(conclusion)}")
        return conclusion
    return None


def _freshen(f: Formula, taken: Set[str]) -> Formula:
    """Rename binders of ``f`` that clash with ``taken``."""
    used = set(taken) | variable_names(f)
    result = f
    for binding in bindings(f):
        if binding.var.name in taken:
            new_name = fresh_name(used)
            used.add(new_name)
            result = rename_binder(result, binding.var.name, new_name)
    return result


def close_under(fact: Formula, conclusion: Formula) -> Formula:
    """Place a conclusion inside the scope of the fact whose constants it mentions."""
    return conjoin_innermost(fact, conclusion)

