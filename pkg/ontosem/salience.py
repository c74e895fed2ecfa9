"""Salience registry: ordered property and relation applicability lists."""

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple, Union

from ontosem.ontology import (
    ROOT,
    HierarchyFormatError,
    TypeHierarchy,
    TypeTerm,
    ancestors,
    parse_type_term,
)

logger = logging.getLogger(__name__)

WORD_DIRECTIVES = {"noun", "pnoun", "name", "adj", "gerund", "kind", "verb"}

_PRED_NAME = re.compile(r"^[A-Z][A-Za-z0-9_]*$")


class SalienceError(Exception):
    """Exception raised for errors in the salience registry."""
    pass


class LexiconFormatError(SalienceError):
    """Exception raised for malformed lexicon lines."""

    def __init__(self, message: str, line: Optional[int] = None, source: str = "<text>"):
        self.line = line
        self.source = source
        location = f"{source}:{line}: " if line is not None else ""
        super().__init__(f"{location}{message}")


@dataclass(frozen=True)
class PropertySignature:
    prop: str
    applies_to: TypeTerm

    @property
    def arg_types(self) -> Tuple[TypeTerm, ...]:
        return (self.applies_to,)

    def __str__(self) -> str:
        return f"{self.prop}({self.applies_to})"


@dataclass(frozen=True)
class RelationSignature:
    """A binary relation declared between a subject and an object type."""

    rel: str
    subj: TypeTerm
    obj: TypeTerm

    @property
    def arg_types(self) -> Tuple[TypeTerm, ...]:
        return (self.subj, self.obj)

    def __str__(self) -> str:
        return f"⟨{self.rel}, {self.subj.card.suffix or '*'}, {self.obj.card.suffix or '*'}⟩"


Signature = Union[PropertySignature, RelationSignature]


@dataclass(frozen=True)
class RankedRelation:
    depth: int
    position: int
    signature: RelationSignature

    @property
    def relation(self) -> str:
        return self.signature.rel


@dataclass
class SalienceRegistry:
    """
    Per-type ordered lists of applicable properties and relations.

    List order is salience order: position 0 is the most salient entry. The
    ``predicates`` table keeps the first declared signature of every name and is
    what the parser uses to annotate argument slots.
    """

    hierarchy: TypeHierarchy
    props: Dict[str, List[PropertySignature]] = field(default_factory=dict)
    rels: Dict[Tuple[str, str], List[RelationSignature]] = field(default_factory=dict)
    predicates: Dict[str, Signature] = field(default_factory=dict)

    def declare_property(self, sig: PropertySignature) -> None:
        self.hierarchy.require(sig.applies_to.base)
        self.predicates.setdefault(sig.prop, sig)
        if sig.applies_to.base == ROOT:
            logger.warning(f"Property {sig.prop} declared on '{ROOT}'; kept as a signature only")
            return
        entries = self.props.setdefault(sig.applies_to.base, [])
        if sig in entries:
            logger.warning(f"Duplicate property declaration ignored: {sig}")
            return
        entries.append(sig)

    def declare_relation(self, sig: RelationSignature) -> None:
        self.hierarchy.require(sig.subj.base)
        self.hierarchy.require(sig.obj.base)
        self.predicates.setdefault(sig.rel, sig)
        if ROOT in (sig.subj.base, sig.obj.base):
            logger.warning(f"Relation {sig.rel} declared on '{ROOT}'; kept as a signature only")
            return
        entries = self.rels.setdefault((sig.subj.base, sig.obj.base), [])
        if sig in entries:
            logger.warning(f"Duplicate relation declaration ignored: {sig.rel}")
            return
        entries.append(sig)

    def signature(self, name: str) -> Optional[Signature]:
        return self.predicates.get(name)

    def without_relation(self, subj: str, obj: str, rel: str) -> "SalienceRegistry":
        """Return a copy with every ``rel`` entry on ``(subj, obj)`` removed."""
        rels = {key: list(entries) for key, entries in self.rels.items()}
        rels[(subj, obj)] = [s for s in rels.get((subj, obj), []) if s.rel != rel]
        return SalienceRegistry(self.hierarchy, dict(self.props), rels, dict(self.predicates))


def lpap(reg: SalienceRegistry, t: str) -> List[str]:
    """Return the properties declared directly on ``t``, most salient first."""
    reg.hierarchy.require(t)
    return [sig.prop for sig in reg.props.get(t, [])]


def lpap_star(reg: SalienceRegistry, h: TypeHierarchy, t: str) -> List[List[str]]:
    """Return lpap for ``t`` and each proper ancestor below the root."""
    return [lpap(reg, level) for level in [h.require(t)] + ancestors(h, t) if level != ROOT]


def lraps(reg: SalienceRegistry, s: str, t: str) -> List[RelationSignature]:
    reg.hierarchy.require(s)
    reg.hierarchy.require(t)
    return list(reg.rels.get((s, t), []))


def lraps_star(
    reg: SalienceRegistry, h: TypeHierarchy, s: str, t: str
) -> List[List[RelationSignature]]:
    """Return lraps(s, t'), t' climbing from ``t`` to just below the root."""
    h.require(s)
    return [lraps(reg, s, level) for level in [h.require(t)] + ancestors(h, t) if level != ROOT]


def _candidates(
    reg: SalienceRegistry, h: TypeHierarchy, s: TypeTerm, t: TypeTerm
) -> Iterator[RankedRelation]:
    for level, entries in enumerate(lraps_star(reg, h, s.base, t.base)):
        for position, sig in enumerate(entries):
            if sig.subj.card.satisfies(s.card) and sig.obj.card.satisfies(t.card):
                yield RankedRelation(level, position, sig)


def rank_relation(
    reg: SalienceRegistry, h: TypeHierarchy, s: TypeTerm, t: TypeTerm
) -> Optional[RankedRelation]:
    """Return the most salient cardinality-compatible relation with its rank."""
    return next(_candidates(reg, h, s, t), None)


def msr(reg: SalienceRegistry, h: TypeHierarchy, s: TypeTerm, t: TypeTerm) -> Optional[str]:
    """
    Most salient relation between ``s`` and ``t``.

    Walks lraps_star(s, t), dropping entries whose declared cardinalities do not
    admit the queried ones, and returns the first survivor's name.
    """
    ranked = rank_relation(reg, h, s, t)
    return ranked.relation if ranked else None


def msp(reg: SalienceRegistry, h: TypeHierarchy, t: str) -> Optional[str]:
    """Most salient property of ``t``: head of the flattened lpap_star."""
    for level in lpap_star(reg, h, t):
        if level:
            return level[0]
    return None


def _parse_term(text: str, lineno: int, source: str) -> TypeTerm:
    try:
        return parse_type_term(text)
    except HierarchyFormatError as e:
        raise LexiconFormatError(str(e), lineno, source) from e


def parse_registry(text: str, h: TypeHierarchy, source: str = "<text>") -> SalienceRegistry:
    """
    Parse ``prop`` and ``rel`` declarations; word entries are left to the lexicon.

    Args:
        text: Lexicon file content
        h: Hierarchy the declarations refer to
        source: Name used in error messages

    Returns:
        The populated SalienceRegistry
    """
    reg = SalienceRegistry(hierarchy=h)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        directive = parts[0]
        if directive in WORD_DIRECTIVES:
            continue
        if directive not in ("prop", "rel"):
            raise LexiconFormatError(f"Unknown directive {directive!r}", lineno, source)
        expected = 3 if directive == "prop" else 4
        if len(parts) != expected:
            raise LexiconFormatError(f"Malformed '{directive}' declaration", lineno, source)
        if not _PRED_NAME.match(parts[1]):
            raise LexiconFormatError(f"Invalid predicate name {parts[1]!r}", lineno, source)
        terms = [_parse_term(p, lineno, source) for p in parts[2:]]
        for term in terms:
            if term.base not in h:
                raise LexiconFormatError(f"Unknown type '{term.base}'", lineno, source)
        if directive == "prop":
            reg.declare_property(PropertySignature(parts[1], terms[0]))
        else:
            reg.declare_relation(RelationSignature(parts[1], terms[0], terms[1]))
    return reg


def load_registry(path: Union[str, Path], h: TypeHierarchy) -> SalienceRegistry:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        logger.error(f"Error reading lexicon file: {e}")
        raise SalienceError(f"Cannot read lexicon file {path}: {e}") from e
    return parse_registry(text, h, source=str(path))
