"""Ontology-driven compositional semantics for a controlled English fragment."""

__version__ = "0.1.0"
