"""Tests for the ontology module."""

import random

import pytest

from ontosem.ontology import (
    ROOT,
    Bridged,
    Cardinality,
    ExistenceMode,
    Failure,
    HierarchyError,
    HierarchyFormatError,
    Single,
    TypeHierarchy,
    TypeTerm,
    UnknownTypeError,
    add_type,
    ancestors,
    cardinality_meet,
    depth,
    nearest_common_ancestor,
    parse_hierarchy,
    parse_type_term,
    subsumes,
    sup,
    unify,
    unify_modes,
)
from ontosem.salience import parse_registry

SMALL_HIERARCHY = """
type entity < thing
type physical < entity
type human < physical
type dog < physical
type book < physical
type abstract < thing
type content < abstract
"""


def test_parse_type_term():
    """Test parsing type terms in both cardinality spellings."""
    assert parse_type_term("dog") == TypeTerm("dog")
    assert parse_type_term("dog^a") == TypeTerm("dog", ExistenceMode.ABSTRACT)
    assert parse_type_term("human:1+").card is Cardinality.MANY
    assert parse_type_term("car^1").card is Cardinality.ONE
    assert parse_type_term("human^a^1+") == TypeTerm(
        "human", ExistenceMode.ABSTRACT, Cardinality.MANY
    )

    with pytest.raises(HierarchyFormatError):
        parse_type_term("Dog")


def test_type_term_render():
    """Test rendering type terms."""
    assert str(TypeTerm("trip", ExistenceMode.ABSTRACT)) == "trip^a"
    assert str(TypeTerm("human", card=Cardinality.MANY)) == "human^1+"
    assert TypeTerm("human", card=Cardinality.ONE).render(show_card=False) == "human"


def test_add_type_returns_new_hierarchy():
    """Test that add_type leaves the original hierarchy alone."""
    h = TypeHierarchy()
    h2 = add_type(h, "entity", ROOT)

    assert "entity" in h2
    assert "entity" not in h
    assert sup(h2, "entity") == ROOT


def test_add_type_errors():
    """Test the add_type preconditions."""
    h = add_type(TypeHierarchy(), "entity", ROOT)

    with pytest.raises(HierarchyError):
        add_type(h, "entity", ROOT)
    with pytest.raises(HierarchyError):
        add_type(h, "dog", "animal")
    with pytest.raises(HierarchyError):
        add_type(h, ROOT, "entity")
    with pytest.raises(HierarchyError):
        add_type(h, "self", "self")


def test_sup_of_root_is_none():
    """Test that the root has no parent."""
    assert sup(TypeHierarchy(), ROOT) is None


def test_unknown_type():
    """Test that queries on unknown types raise."""
    h = parse_hierarchy(SMALL_HIERARCHY)

    with pytest.raises(UnknownTypeError):
        sup(h, "unicorn")
    with pytest.raises(UnknownTypeError):
        subsumes(h, "unicorn", "dog")


def test_parse_hierarchy_out_of_order():
    """Test that parents may be declared after their children."""
    h = parse_hierarchy("type dog < animal\ntype animal < thing\n")

    assert ancestors(h, "dog") == ["animal", ROOT]
    assert depth(h, "dog") == 2


def test_parse_hierarchy_errors():
    """Test hierarchy file errors carry line numbers."""
    with pytest.raises(HierarchyError, match="duplicate"):
        parse_hierarchy("type dog < thing\ntype dog < thing\n")
    with pytest.raises(HierarchyError, match="unknown parent"):
        parse_hierarchy("type dog < animal\n")
    with pytest.raises(HierarchyError, match="cycle"):
        parse_hierarchy("type a < b\ntype b < a\n")
    with pytest.raises(HierarchyFormatError) as excinfo:
        parse_hierarchy("type dog < thing\ndog is an animal\n")
    assert excinfo.value.line == 2


def test_subsumes(hierarchy):
    """Test reflexive subsumption along the hierarchy."""
    assert subsumes(hierarchy, "entity", "dog")
    assert subsumes(hierarchy, "dog", "dog")
    assert subsumes(hierarchy, ROOT, "content")
    assert not subsumes(hierarchy, "dog", "entity")
    assert not subsumes(hierarchy, "physical", "content")


def test_nearest_common_ancestor(hierarchy):
    """Test where two types meet."""
    assert nearest_common_ancestor(hierarchy, "dog", "human") == "mammal"
    assert nearest_common_ancestor(hierarchy, "book", "content") == ROOT
    assert nearest_common_ancestor(hierarchy, "car", "sportsCar") == "car"


def test_unify_modes():
    """Test that actual existence absorbs abstract."""
    assert unify_modes(ExistenceMode.ABSTRACT, ExistenceMode.ABSTRACT) is ExistenceMode.ABSTRACT
    assert unify_modes(ExistenceMode.ABSTRACT, ExistenceMode.ACTUAL) is ExistenceMode.ACTUAL


def test_cardinality():
    """Test cardinality satisfaction and meet."""
    assert Cardinality.MANY.satisfies(Cardinality.ONE)
    assert not Cardinality.ONE.satisfies(Cardinality.MANY)
    assert Cardinality.UNCONSTRAINED.satisfies(Cardinality.MANY)
    assert cardinality_meet(Cardinality.UNCONSTRAINED, Cardinality.MANY) is Cardinality.MANY
    assert cardinality_meet(Cardinality.ONE, Cardinality.MANY) is Cardinality.ONE


def test_unify_subsumption(hierarchy, registry):
    """Test unification under subsumption picks the more specific type."""
    dog = parse_type_term("dog^a")
    entity = parse_type_term("entity")

    assert unify(hierarchy, registry, dog, entity) == Single(TypeTerm("dog"))
    assert unify(hierarchy, registry, entity, dog) == Single(TypeTerm("dog"))
    assert unify(hierarchy, registry, dog, parse_type_term("entity^a")) == Single(dog)


def test_unify_bridged(hierarchy, registry):
    """Test that incompatible types are bridged by the salient relation."""
    outcome = unify(hierarchy, registry, TypeTerm("book"), TypeTerm("content"))

    assert isinstance(outcome, Bridged)
    assert outcome.relation == "HAS_CONTENT"
    assert outcome.subject.base == "book"
    assert outcome.object.base == "content"

    backward = unify(hierarchy, registry, TypeTerm("content"), TypeTerm("book"))
    assert isinstance(backward, Bridged)
    assert backward.subject_is_right
    assert backward.subject.base == "book"


def test_unify_bridged_keeps_each_mode(hierarchy, registry):
    """Test a bridged pair does not combine the modes of its sides."""
    book = parse_type_term("book^a")
    content = parse_type_term("content")
    outcome = unify(hierarchy, registry, book, content)

    assert outcome == Bridged(book, content, "HAS_CONTENT")
    assert outcome.subject.mode is ExistenceMode.ABSTRACT
    assert outcome.object.mode is ExistenceMode.ACTUAL


def test_unify_failure(hierarchy, registry):
    """Test that unrelated types fail and report where they meet."""
    outcome = unify(hierarchy, registry, TypeTerm("content"), TypeTerm("rock"))

    assert isinstance(outcome, Failure)
    assert outcome.meet == ROOT
    assert str(outcome) == "Failure"


@pytest.mark.parametrize("seed", range(20))
def test_unify_is_commutative_up_to_direction(seed, hierarchy, registry):
    """Test unify(a, b) and unify(b, a) agree, Bridged up to swapping."""
    rng = random.Random(seed)
    nodes = hierarchy.nodes
    for _ in range(50):
        a = TypeTerm(rng.choice(nodes), rng.choice(list(ExistenceMode)))
        b = TypeTerm(rng.choice(nodes), rng.choice(list(ExistenceMode)))
        left = unify(hierarchy, registry, a, b)
        right = unify(hierarchy, registry, b, a)
        if isinstance(left, Bridged):
            assert isinstance(right, Bridged)
            assert right.swapped() == left
        elif isinstance(left, Failure):
            assert isinstance(right, Failure)
        else:
            assert left == right


@pytest.mark.parametrize("seed", range(20))
def test_unify_single_is_idempotent(seed, hierarchy, registry):
    """Test a Single result unifies with itself to itself."""
    rng = random.Random(seed)
    nodes = hierarchy.nodes
    for _ in range(50):
        a = TypeTerm(rng.choice(nodes))
        b = TypeTerm(rng.choice(nodes))
        outcome = unify(hierarchy, registry, a, b)
        if isinstance(outcome, Single):
            assert unify(hierarchy, registry, outcome.result, outcome.result) == outcome


def random_tree(rng, size):
    """Grow a hierarchy by attaching each new type under a random existing one."""
    h = TypeHierarchy()
    for i in range(size):
        h = add_type(h, f"t{i}", rng.choice(h.nodes))
    return h


def closure(h):
    """Reflexive-transitive closure of the child-to-parent edges, as (specific, general) pairs."""
    below = {(t, t) for t in h.nodes} | {(c, p) for c, p in h.parents.items() if p is not None}
    changed = True
    while changed:
        extra = {(a, d) for a, b in below for c, d in below if b == c} - below
        below |= extra
        changed = bool(extra)
    return below


@pytest.mark.parametrize("seed", range(20))
def test_subsumption_is_a_partial_order(seed):
    """Test subsumption on random trees against the closure of the parent edges."""
    rng = random.Random(seed)
    for _ in range(50):
        h = random_tree(rng, rng.randint(1, 10))
        below = closure(h)
        nodes = h.nodes
        a, b, c = rng.choice(nodes), rng.choice(nodes), rng.choice(nodes)

        assert subsumes(h, b, a) == ((a, b) in below)
        assert subsumes(h, a, a)
        assert subsumes(h, ROOT, a)
        if subsumes(h, a, b) and subsumes(h, b, a):
            assert a == b
        if subsumes(h, a, b) and subsumes(h, b, c):
            assert subsumes(h, a, c)


@pytest.mark.parametrize("seed", range(20))
def test_nearest_common_ancestor_is_deepest_common_subsumer(seed):
    """Test the nearest common ancestor against every common subsumer in the closure."""
    rng = random.Random(seed)
    for _ in range(50):
        h = random_tree(rng, rng.randint(1, 10))
        below = closure(h)
        a, b = rng.choice(h.nodes), rng.choice(h.nodes)
        common = [g for g in h.nodes if (a, g) in below and (b, g) in below]

        meet = nearest_common_ancestor(h, a, b)
        assert meet in common
        assert all((meet, g) in below for g in common)


def test_unify_without_relations():
    """Test that an empty registry never bridges."""
    h = parse_hierarchy(SMALL_HIERARCHY)
    reg = parse_registry("", h)

    assert isinstance(unify(h, reg, TypeTerm("book"), TypeTerm("content")), Failure)
