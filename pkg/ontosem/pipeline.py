"""Interpretation pipeline: parse, resolve, optionally expand and resolve again."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Sequence, Union

from ontosem.engine import Discourse, DerivationTrace, resolve_discourse, resolve_scope
from ontosem.expansion import DefinitionRegistry, expand, load_definitions
from ontosem.fragment import Lexicon, load_lexicon, parse_discourse, parse_sentence
from ontosem.lf_parser import parse_lf
from ontosem.logic import Formula, enumerate_readings
from ontosem.ontology import TypeHierarchy, load_hierarchy
from ontosem.salience import SalienceRegistry, load_registry

logger = logging.getLogger(__name__)


@dataclass
class Interpretation:
    """The derivation of one input and, on request, its separate readings."""

    source: str
    trace: DerivationTrace
    readings: List[Formula] = field(default_factory=list)

    @property
    def final(self) -> Formula:
        return self.trace.final


@dataclass
class Session:
    """Loaded hierarchy, salience registry, lexicon and definitions."""

    hierarchy: TypeHierarchy
    registry: SalienceRegistry
    lexicon: Lexicon
    definitions: DefinitionRegistry

    @classmethod
    def load(
        cls,
        hierarchy_path: Union[str, Path],
        lexicon_path: Union[str, Path],
        defs_path: Union[str, Path],
    ) -> "Session":
        """
        Load and validate all three data files.

        Args:
            hierarchy_path: Type hierarchy file
            lexicon_path: Lexicon file (salience declarations and word entries)
            defs_path: Concept definition file

        Returns:
            A ready Session
        """
        hierarchy = load_hierarchy(hierarchy_path)
        registry = load_registry(lexicon_path, hierarchy)
        lexicon = load_lexicon(lexicon_path, hierarchy, registry)
        definitions = load_definitions(defs_path, hierarchy)
        logger.info(
            f"Session loaded: {len(hierarchy)} types, {len(registry.predicates)} predicates, "
            f"{len(lexicon.entries)} words, {len(definitions)} definitions"
        )
        return cls(hierarchy, registry, lexicon, definitions)

    def resolve(self, parsed: Union[Formula, Discourse], expanded: bool = False) -> DerivationTrace:
        """Resolve a parsed input; in expanded mode expand condensed predicates and resolve again."""
        if isinstance(parsed, Discourse):
            _, trace = resolve_discourse(self.hierarchy, self.registry, parsed)
        else:
            _, trace = resolve_scope(self.hierarchy, self.registry, parsed)
        if not expanded:
            return trace

        result = expand(self.definitions, trace.final)
        if result == trace.final:
            return trace
        trace.add("expand", result)
        _, second = resolve_scope(self.hierarchy, self.registry, result)
        trace.extend(second)
        return trace

    def interpret_text(
        self, text: Union[str, Sequence[str]], expanded: bool = False, readings: bool = False
    ) -> Interpretation:
        """
        Interpret a sentence, or a discourse given as several sentences.

        Args:
            text: One sentence, or the sentences of a discourse in order
            expanded: Expand condensed predicates after resolution
            readings: Split the final form's first disjunction into readings

        Returns:
            The Interpretation
        """
        if isinstance(text, str):
            source = text
            parsed = parse_sentence(self.lexicon, text)
        else:
            source = " / ".join(text)
            parsed = parse_discourse(self.lexicon, list(text))
        trace = self.resolve(parsed, expanded)
        return Interpretation(source, trace, enumerate_readings(trace.final) if readings else [])

    def interpret_lf(
        self, text: str, expanded: bool = False, readings: bool = False
    ) -> Interpretation:
        trace = self.resolve(parse_lf(text), expanded)
        return Interpretation(text, trace, enumerate_readings(trace.final) if readings else [])
