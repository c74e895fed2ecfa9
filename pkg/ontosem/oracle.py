"""Brute-force finite-model oracle for equivalence and entailment checks."""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from ontosem.logic import (
    And,
    Be,
    Formula,
    Implies,
    Literal,
    Modify,
    NOO,
    Not,
    Or,
    Pred,
    Quantified,
    Quantifier,
    StructRel,
    Typ,
    Variable,
    free_vars,
    iter_atoms,
    walk,
)
from ontosem.ontology import ROOT, ExistenceMode, TypeHierarchy, subsumes
from ontosem.salience import SalienceRegistry

logger = logging.getLogger(__name__)

MAX_DOMAIN = 3
MAX_BITS = 24

Vocabulary = Dict[str, Tuple[str, ...]]
VocabularySpec = Mapping[str, Union[int, Sequence[str]]]


class OracleError(Exception):
    """Exception raised for errors in finite-model evaluation."""
    pass


class ArityError(OracleError):
    """Exception raised when an atom's arity differs from its extension's."""
    pass


class ModelBoundError(OracleError):
    """Exception raised when an enumeration would exceed the size bounds."""
    pass


@dataclass(frozen=True)
class FiniteModel:
    """
    A finite interpretation: typed individuals, existence modes and extensions.

    Individual ``i`` has type ``types[i]`` and mode ``modes[i]``; ``extensions`` maps
    each vocabulary key to the set of tuples it holds of.
    """

    types: Tuple[str, ...]
    modes: Tuple[ExistenceMode, ...]
    extensions: Dict[str, FrozenSet[Tuple[int, ...]]] = field(default_factory=dict)
    arities: Dict[str, int] = field(default_factory=dict)
    hierarchy: Optional[TypeHierarchy] = None

    @property
    def domain(self) -> range:
        return range(len(self.types))

    def is_actual(self, i: int) -> bool:
        return self.modes[i] is ExistenceMode.ACTUAL

    def has_type(self, i: int, type_name: str) -> bool:
        if self.hierarchy is None or type_name == ROOT:
            return True
        return subsumes(self.hierarchy, type_name, self.types[i])

    def holds(self, key: str, values: Tuple[int, ...]) -> bool:
        if key not in self.extensions:
            raise OracleError(f"No extension for '{key}'")
        if len(values) != self.arities[key]:
            raise ArityError(
                f"'{key}' has arity {self.arities[key]}, applied to {len(values)} arguments"
            )
        return values in self.extensions[key]

    def describe(self) -> str:
        individuals = ", ".join(
            f"{i}:{t}{'^a' if m is ExistenceMode.ABSTRACT else ''}"
            for i, (t, m) in enumerate(zip(self.types, self.modes))
        )
        relations = "; ".join(
            f"{key}={sorted(ext)}" for key, ext in sorted(self.extensions.items()) if ext
        )
        return f"[{individuals}] {relations}"


def atom_key(atom: Formula) -> Tuple[str, Tuple[Variable, ...]]:
    """
    Return the vocabulary key of an atom and its variable arguments.

    NOO atoms and literal arguments fold into the key (``NOO:sheba``, ``VALUE:90``)
    so every extension ranges over individuals only.
    """
    if isinstance(atom, NOO):
        return f"NOO:{atom.label}", (atom.var,)
    if isinstance(atom, Modify):
        inner_key, terms = atom_key(atom.inner)
        return f"{atom.modifier}:{inner_key}", terms
    if isinstance(atom, (Pred, StructRel)):
        head = atom.name if isinstance(atom, Pred) else atom.kind
        literals = [a.term.key for a in atom.args if isinstance(a.term, Literal)]
        terms = tuple(a.term for a in atom.args if isinstance(a.term, Variable))
        return ":".join([head] + literals), terms
    raise OracleError(f"No vocabulary key for {type(atom).__name__}")


def _signature_types(
    atom: Formula, registry: Optional[SalienceRegistry], arity: int
) -> Tuple[str, ...]:
    if registry is not None:
        head = atom.inner if isinstance(atom, Modify) else atom
        if isinstance(head, Pred):
            signature = registry.signature(head.name)
            if signature is not None:
                positions = [
                    i for i, a in enumerate(head.args) if isinstance(a.term, Variable)
                ]
                if all(i < len(signature.arg_types) for i in positions):
                    return tuple(signature.arg_types[i].base for i in positions)
    return (ROOT,) * arity


def vocabulary(
    formulas: Iterable[Formula],
    registry: Optional[SalienceRegistry] = None,
    overrides: Optional[VocabularySpec] = None,
) -> Vocabulary:
    """
    Collect the vocabulary of a set of formulas.

    Argument types come from ``overrides`` first, then from the registry's
    signatures; structural relations and undeclared predicates range over ``thing``.
    """
    overrides = normalize_vocabulary(overrides or {})
    vocab: Vocabulary = {}
    for f in formulas:
        for atom in iter_atoms(f):
            if isinstance(atom, Be):
                continue
            key, terms = atom_key(atom)
            types = overrides.get(key) or _signature_types(atom, registry, len(terms))
            if len(types) != len(terms):
                raise ArityError(f"'{key}' is used with {len(terms)} arguments, typed for {len(types)}")
            if key in vocab and len(vocab[key]) != len(types):
                raise ArityError(f"'{key}' is used with arities {len(vocab[key])} and {len(types)}")
            vocab.setdefault(key, types)
    return vocab


def normalize_vocabulary(spec: VocabularySpec) -> Vocabulary:
    """Accept an int arity as shorthand for that many ``thing`` positions."""
    return {
        key: (ROOT,) * value if isinstance(value, int) else tuple(value)
        for key, value in spec.items()
    }


def _tuples(
    types: Tuple[str, ...],
    individual_types: Tuple[str, ...],
    hierarchy: Optional[TypeHierarchy],
) -> List[Tuple[int, ...]]:
    def fits(i: int, t: str) -> bool:
        return hierarchy is None or t == ROOT or subsumes(hierarchy, t, individual_types[i])

    positions = [[i for i in range(len(individual_types)) if fits(i, t)] for t in types]
    return list(itertools.product(*positions))


def enumerate_models(
    vocab: VocabularySpec,
    domain_size: int,
    hierarchy: Optional[TypeHierarchy] = None,
    types: Optional[Sequence[str]] = None,
    vary_modes: bool = False,
) -> Iterator[FiniteModel]:
    """
    Yield every model over the vocabulary with exactly ``domain_size`` individuals.

    Each individual takes every type in ``types`` (default: just ``thing``) and, with
    ``vary_modes``, both existence modes. Extensions only contain tuples whose
    members fit the key's argument types.

    Args:
        vocab: Key to argument types (or arity)
        domain_size: Number of individuals, 1 to 3
        hierarchy: Hierarchy for type checks (None: every individual fits every type)
        types: Candidate individual types
        vary_modes: Also enumerate abstract individuals

    Returns:
        Iterator over FiniteModel
    """
    if not 1 <= domain_size <= MAX_DOMAIN:
        raise ModelBoundError(f"Domain size must be between 1 and {MAX_DOMAIN}, got {domain_size}")
    vocab = normalize_vocabulary(vocab)
    type_choices = list(types or [ROOT])
    mode_choices = (
        [ExistenceMode.ACTUAL, ExistenceMode.ABSTRACT] if vary_modes else [ExistenceMode.ACTUAL]
    )
    arities = {key: len(arg_types) for key, arg_types in vocab.items()}

    for individual_types in itertools.product(type_choices, repeat=domain_size):
        slots = [
            (key, values)
            for key in sorted(vocab)
            for values in _tuples(vocab[key], individual_types, hierarchy)
        ]
        if len(slots) > MAX_BITS:
            raise ModelBoundError(
                f"{len(slots)} extension bits exceed the bound of {MAX_BITS}"
            )
        for modes in itertools.product(mode_choices, repeat=domain_size):
            for mask in range(2 ** len(slots)):
                extensions: Dict[str, set] = {key: set() for key in vocab}
                for bit, (key, values) in enumerate(slots):
                    if mask >> bit & 1:
                        extensions[key].add(values)
                yield FiniteModel(
                    types=individual_types,
                    modes=modes,
                    extensions={k: frozenset(v) for k, v in extensions.items()},
                    arities=arities,
                    hierarchy=hierarchy,
                )


def _range(m: FiniteModel, f: Quantified) -> List[int]:
    declared = f.binding.declared
    return [
        i
        for i in m.domain
        if m.has_type(i, declared.base) and (declared.is_abstract or m.is_actual(i))
    ]


def _evaluate(m: FiniteModel, f: Formula, env: Dict[str, int]) -> bool:
    if isinstance(f, Quantified):
        name = f.binding.var.name
        witnesses = (
            _evaluate(m, f.body, {**env, name: i}) for i in _range(m, f)
        )
        if f.binding.quantifier is Quantifier.FORALL:
            return all(witnesses)
        if f.binding.quantifier is Quantifier.EXISTS:
            return any(witnesses)
        return sum(1 for w in witnesses if w) == 1
    if isinstance(f, And):
        return all(_evaluate(m, c, env) for c in f.conjuncts)
    if isinstance(f, Or):
        return any(_evaluate(m, d, env) for d in f.disjuncts)
    if isinstance(f, Not):
        return not _evaluate(m, f.body, env)
    if isinstance(f, Implies):
        return not _evaluate(m, f.antecedent, env) or _evaluate(m, f.consequent, env)
    if isinstance(f, Typ):
        return _evaluate(m, f.body, env)
    if isinstance(f, Be):
        return env[f.left.name] == env[f.right.name]
    key, terms = atom_key(f)
    return m.holds(key, tuple(env[t.name] for t in terms))


def satisfies(m: FiniteModel, f: Formula) -> bool:
    """
    Classical satisfaction with typed quantifiers.

    A binder ranges over individuals of its type; actual-mode binders see only
    actual individuals. ∃¹ means exactly one witness. ``typ(...)`` is transparent.
    """
    unbound = free_vars(f)
    if unbound:
        raise OracleError(f"Cannot evaluate a formula with free variables {sorted(unbound)}")
    if any(isinstance(node, Typ) for node in walk(f)):
        logger.debug("typ(...) evaluated as transparent")
    return _evaluate(m, f, {})


def _all_models(
    formulas: Sequence[Formula],
    max_domain: int,
    hierarchy: Optional[TypeHierarchy],
    types: Optional[Sequence[str]],
    registry: Optional[SalienceRegistry],
    overrides: Optional[VocabularySpec],
    vary_modes: bool,
) -> Iterator[FiniteModel]:
    vocab = vocabulary(formulas, registry, overrides)
    for size in range(1, max_domain + 1):
        yield from enumerate_models(vocab, size, hierarchy, types, vary_modes)


def find_counterexample(
    premises: Sequence[Formula],
    conclusion: Formula,
    background: Sequence[Formula] = (),
    max_domain: int = MAX_DOMAIN,
    hierarchy: Optional[TypeHierarchy] = None,
    types: Optional[Sequence[str]] = None,
    registry: Optional[SalienceRegistry] = None,
    overrides: Optional[VocabularySpec] = None,
    vary_modes: bool = False,
) -> Optional[FiniteModel]:
    """Return a model of background and premises that falsifies the conclusion."""
    formulas = list(background) + list(premises) + [conclusion]
    for m in _all_models(formulas, max_domain, hierarchy, types, registry, overrides, vary_modes):
        if not all(satisfies(m, b) for b in background):
            continue
        if all(satisfies(m, p) for p in premises) and not satisfies(m, conclusion):
            logger.debug(f"Counterexample: {m.describe()}")
            return m
    return None


def entails(
    premises: Sequence[Formula],
    conclusion: Formula,
    background: Sequence[Formula] = (),
    max_domain: int = MAX_DOMAIN,
    **options,
) -> bool:
    return (
        find_counterexample(premises, conclusion, background, max_domain, **options) is None
    )


def equivalent(
    f: Formula,
    g: Formula,
    background: Sequence[Formula] = (),
    max_domain: int = MAX_DOMAIN,
    hierarchy: Optional[TypeHierarchy] = None,
    types: Optional[Sequence[str]] = None,
    registry: Optional[SalienceRegistry] = None,
    overrides: Optional[VocabularySpec] = None,
    vary_modes: bool = False,
) -> bool:
    """
    Check that ``f`` and ``g`` agree on every model of the background axioms.

    Args:
        f: First closed formula
        g: Second closed formula
        background: Axioms (e.g. definitions) restricting the models considered
        max_domain: Largest domain size tried
        hierarchy: Hierarchy for typed quantifiers and extensions
        types: Candidate individual types
        registry: Source of predicate argument types
        overrides: Argument types that take precedence over the registry
        vary_modes: Also enumerate abstract individuals

    Returns:
        True when no model separates the two formulas
    """
    formulas = list(background) + [f, g]
    for m in _all_models(formulas, max_domain, hierarchy, types, registry, overrides, vary_modes):
        if not all(satisfies(m, b) for b in background):
            continue
        if satisfies(m, f) != satisfies(m, g):
            logger.debug(f"Models disagree: {m.describe()}")
            return False
    return True
