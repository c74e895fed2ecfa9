"""Type hierarchy, existence modes and type unification for ontosem."""

import logging
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union, TYPE_CHECKING

if TYPE_CHECKING:
    from ontosem.salience import SalienceRegistry

logger = logging.getLogger(__name__)

ROOT = "thing"

_TYPE_NAME = re.compile(r"^[a-z][A-Za-z0-9_]*$")
_TYPE_TERM = re.compile(
    r"^(?P<base>[a-z][A-Za-z0-9_]*)(?P<mode>\^a)?(?:(?:\^|:)(?P<card>1\+|1))?$"
)


class OntologyError(Exception):
    """Exception raised for errors in the type hierarchy."""
    pass


class UnknownTypeError(OntologyError):
    """Exception raised when a type name is not in the hierarchy."""

    def __init__(self, type_name: str):
        self.type_name = type_name
        super().__init__(f"Unknown type: {type_name}")


class HierarchyError(OntologyError):
    """Exception raised when a declaration would break the tree shape."""
    pass


class HierarchyFormatError(OntologyError):
    """Exception raised for malformed hierarchy or type-term text."""

    def __init__(self, message: str, line: Optional[int] = None, source: str = "<text>"):
        self.line = line
        self.source = source
        location = f"{source}:{line}: " if line is not None else ""
        super().__init__(f"{location}{message}")


class ExistenceMode(str, Enum):
    ACTUAL = "actual"
    ABSTRACT = "abstract"


class Cardinality(str, Enum):
    ONE = "one"
    MANY = "many"
    UNCONSTRAINED = "unconstrained"

    def satisfies(self, query: "Cardinality") -> bool:
        """Check the declared cardinality ``self`` against a query (``self >= query``)."""
        if self is Cardinality.UNCONSTRAINED or query is Cardinality.UNCONSTRAINED:
            return True
        if self is Cardinality.MANY:
            return True
        return query is Cardinality.ONE

    @property
    def suffix(self) -> str:
        return {Cardinality.ONE: "1", Cardinality.MANY: "1+"}.get(self, "")


_CARD_ORDER = {Cardinality.ONE: 0, Cardinality.MANY: 1, Cardinality.UNCONSTRAINED: 2}


def cardinality_meet(a: Cardinality, b: Cardinality) -> Cardinality:
    """Return the more restrictive of two cardinality constraints."""
    return a if _CARD_ORDER[a] <= _CARD_ORDER[b] else b


@dataclass(frozen=True)
class TypeTerm:
    """A type name decorated with an existence mode and a cardinality."""

    base: str
    mode: ExistenceMode = ExistenceMode.ACTUAL
    card: Cardinality = Cardinality.UNCONSTRAINED

    @property
    def is_abstract(self) -> bool:
        return self.mode is ExistenceMode.ABSTRACT

    def with_mode(self, mode: ExistenceMode) -> "TypeTerm":
        return replace(self, mode=mode)

    def with_card(self, card: Cardinality) -> "TypeTerm":
        return replace(self, card=card)

    def render(self, show_card: bool = True) -> str:
        text = self.base
        if self.is_abstract:
            text += "^a"
        if show_card and self.card is not Cardinality.UNCONSTRAINED:
            text += "^" + self.card.suffix
        return text

    def __str__(self) -> str:
        return self.render()


def parse_type_term(text: str) -> TypeTerm:
    """
    Parse a type term such as ``dog^a``, ``human:1+`` or ``car^1``.

    Args:
        text: Type-term text

    Returns:
        The parsed TypeTerm (base not checked against any hierarchy)
    """
    match = _TYPE_TERM.match(text.strip())
    if not match:
        raise HierarchyFormatError(f"Malformed type term: {text!r}")
    mode = ExistenceMode.ABSTRACT if match.group("mode") else ExistenceMode.ACTUAL
    card = {"1": Cardinality.ONE, "1+": Cardinality.MANY}.get(
        match.group("card"), Cardinality.UNCONSTRAINED
    )
    return TypeTerm(match.group("base"), mode, card)


@dataclass(frozen=True)
class TypeHierarchy:
    """
    Single-parent tree of type names rooted at ``thing``.

    The parent map is never mutated; ``add_type`` returns a new hierarchy.
    """

    parents: Dict[str, Optional[str]] = field(default_factory=lambda: {ROOT: None})

    def __contains__(self, name: str) -> bool:
        return name in self.parents

    def __len__(self) -> int:
        return len(self.parents)

    @property
    def nodes(self) -> List[str]:
        return list(self.parents)

    def require(self, name: str) -> str:
        if name not in self.parents:
            raise UnknownTypeError(name)
        return name

    def children(self, name: str) -> List[str]:
        self.require(name)
        return [child for child, parent in self.parents.items() if parent == name]


def add_type(h: TypeHierarchy, child: str, parent: str) -> TypeHierarchy:
    """
    Attach a new type under an existing parent.

    Args:
        h: Hierarchy to extend
        child: New type name
        parent: Existing parent type name

    Returns:
        A new hierarchy containing the child
    """
    if not _TYPE_NAME.match(child):
        raise HierarchyFormatError(f"Invalid type name: {child!r}")
    if child == ROOT:
        raise HierarchyError(f"The root type '{ROOT}' may not gain a parent")
    if child == parent:
        raise HierarchyError(f"Type '{child}' would become its own parent (cycle)")
    if child in h:
        raise HierarchyError(f"Duplicate type: {child}")
    if parent not in h:
        raise HierarchyError(f"Unknown parent '{parent}' for type '{child}'")
    parents = dict(h.parents)
    parents[child] = parent
    return TypeHierarchy(parents)


def sup(h: TypeHierarchy, t: str) -> Optional[str]:
    """Return the parent of ``t``, or None for the root."""
    return h.parents[h.require(t)]


def ancestors(h: TypeHierarchy, t: str) -> List[str]:
    """Return the proper ancestors of ``t``, parent first, ending at the root."""
    chain = []
    current = sup(h, t)
    while current is not None:
        chain.append(current)
        current = h.parents[current]
    return chain


def depth(h: TypeHierarchy, t: str) -> int:
    return len(ancestors(h, t))


def subsumes(h: TypeHierarchy, general: str, specific: str) -> bool:
    """Check ``specific ⊑ general`` (reflexive)."""
    h.require(general)
    if general == h.require(specific):
        return True
    return general in ancestors(h, specific)


def nearest_common_ancestor(h: TypeHierarchy, s: str, t: str) -> str:
    """Return the deepest type subsuming both ``s`` and ``t``."""
    line = [h.require(s)] + ancestors(h, s)
    for candidate in [h.require(t)] + ancestors(h, t):
        if candidate in line:
            return candidate
    return ROOT


def unify_modes(a: ExistenceMode, b: ExistenceMode) -> ExistenceMode:
    """Abstract only when both sides are abstract; actual absorbs."""
    if a is ExistenceMode.ABSTRACT and b is ExistenceMode.ABSTRACT:
        return ExistenceMode.ABSTRACT
    return ExistenceMode.ACTUAL


@dataclass(frozen=True)
class Single:
    """Unification specialised both sides to one type."""

    result: TypeTerm

    def __str__(self) -> str:
        return f"Single({self.result})"


@dataclass(frozen=True)
class Bridged:
    """
    Unification failed under subsumption but a salient relation links the sides.

    ``subject_is_right`` records which side fills the relation's first argument.
    """

    left: TypeTerm
    right: TypeTerm
    relation: str
    subject_is_right: bool = False

    def swapped(self) -> "Bridged":
        return Bridged(self.right, self.left, self.relation, not self.subject_is_right)

    @property
    def subject(self) -> TypeTerm:
        return self.right if self.subject_is_right else self.left

    @property
    def object(self) -> TypeTerm:
        return self.left if self.subject_is_right else self.right

    def __str__(self) -> str:
        return f"Bridged({self.left}, {self.right}, {self.relation})"


@dataclass(frozen=True)
class Failure:
    """Neither subsumption nor a salient relation links the two types."""

    left: TypeTerm
    right: TypeTerm
    meet: str = ROOT

    def __str__(self) -> str:
        return "Failure"


UnifyOutcome = Union[Single, Bridged, Failure]


def unify(h: TypeHierarchy, reg: "SalienceRegistry", a: TypeTerm, b: TypeTerm) -> UnifyOutcome:
    """
    Unify two type terms.

    Under subsumption the result is the more specific base with combined mode and
    cardinality. Otherwise the most salient relation between the two types, tried in
    both directions, bridges them; the direction with the shallower hit wins.
    A bridged outcome carries both terms unchanged, so each side keeps its own
    mode and cardinality; modes are only combined for a Single.

    Args:
        h: Type hierarchy
        reg: Salience registry used for bridging
        a: Left type term
        b: Right type term

    Returns:
        Single, Bridged or Failure
    """
    from ontosem.salience import rank_relation

    h.require(a.base)
    h.require(b.base)
    mode = unify_modes(a.mode, b.mode)
    card = cardinality_meet(a.card, b.card)
    if subsumes(h, a.base, b.base):
        return Single(TypeTerm(b.base, mode, card))
    if subsumes(h, b.base, a.base):
        return Single(TypeTerm(a.base, mode, card))

    options = []
    forward = rank_relation(reg, h, a, b)
    if forward is not None:
        options.append((forward.depth, forward.position, a.base, forward.relation, False))
    backward = rank_relation(reg, h, b, a)
    if backward is not None:
        options.append((backward.depth, backward.position, b.base, backward.relation, True))
    if not options:
        meet = nearest_common_ancestor(h, a.base, b.base)
        logger.debug(f"No salient relation between {a} and {b} (meet: {meet})")
        return Failure(a, b, meet)

    _, _, _, relation, subject_is_right = min(options)
    logger.debug(f"Bridging {a} and {b} through {relation}")
    return Bridged(a, b, relation, subject_is_right)


def parse_hierarchy(text: str, source: str = "<text>") -> TypeHierarchy:
    """
    Parse hierarchy declarations of the form ``type child < parent``.

    Parents may be declared after their children; the second pass attaches
    declarations in dependency order.
    """
    declared: Dict[str, Tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] != "type":
            raise HierarchyFormatError(f"Expected 'type', got {parts[0]!r}", lineno, source)
        if len(parts) == 2 and parts[1] == ROOT:
            continue
        if len(parts) != 4 or parts[2] != "<":
            raise HierarchyFormatError("Expected 'type <child> < <parent>'", lineno, source)
        child, parent = parts[1], parts[3]
        for name in (child, parent):
            if not _TYPE_NAME.match(name):
                raise HierarchyFormatError(f"Invalid type name: {name!r}", lineno, source)
        if child == ROOT:
            raise HierarchyError(f"{source}:{lineno}: the root type '{ROOT}' may not gain a parent")
        if child in declared:
            raise HierarchyError(
                f"{source}:{lineno}: duplicate type '{child}' "
                f"(first declared on line {declared[child][1]})"
            )
        declared[child] = (parent, lineno)

    h = TypeHierarchy()
    pending = dict(declared)
    while pending:
        ready = [child for child, (parent, _) in pending.items() if parent in h]
        if not ready:
            break
        for child in ready:
            parent, _ = pending.pop(child)
            h = add_type(h, child, parent)

    if pending:
        child, (parent, lineno) = min(pending.items(), key=lambda item: item[1][1])
        if parent in declared:
            raise HierarchyError(f"{source}:{lineno}: cycle through type '{child}'")
        raise HierarchyError(f"{source}:{lineno}: unknown parent '{parent}' for type '{child}'")

    logger.debug(f"Loaded hierarchy with {len(h)} types from {source}")
    return h


def load_hierarchy(path: Union[str, Path]) -> TypeHierarchy:
    """
    Load a type hierarchy from a file.

    Args:
        path: Path to the hierarchy file

    Returns:
        The loaded TypeHierarchy
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        logger.error(f"Error reading hierarchy file: {e}")
        raise OntologyError(f"Cannot read hierarchy file {path}: {e}") from e
    return parse_hierarchy(text, source=str(path))
