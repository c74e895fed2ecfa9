"""Tests for the salience module."""

import logging
import random

import pytest

from ontosem.ontology import (
    ROOT,
    Cardinality,
    TypeHierarchy,
    TypeTerm,
    add_type,
    parse_hierarchy,
    parse_type_term,
)
from ontosem.salience import (
    LexiconFormatError,
    PropertySignature,
    RelationSignature,
    SalienceRegistry,
    lpap,
    lpap_star,
    lraps,
    lraps_star,
    msp,
    msr,
    parse_registry,
)

# Vehicle fragment: one driver, a group of riders
VEHICLE_HIERARCHY = """
type entity < thing
type physical < entity
type human < physical
type artifact < physical
type car < artifact
"""

VEHICLE_LEXICON = """
rel DRIVE human:1 car:1
rel RIDE human:1+ car:1
rel MAKE human artifact
prop ARTICULATE human
prop HEAVY physical
noun car = car
"""


@pytest.fixture
def vehicle():
    h = parse_hierarchy(VEHICLE_HIERARCHY)
    return h, parse_registry(VEHICLE_LEXICON, h)


def test_msr_respects_cardinality(vehicle):
    """Test one human drives a car while several ride in it."""
    h, reg = vehicle

    assert msr(reg, h, parse_type_term("human:1"), parse_type_term("car:1")) == "DRIVE"
    assert msr(reg, h, parse_type_term("human:1+"), parse_type_term("car:1")) == "RIDE"
    assert msr(reg, h, TypeTerm("human"), TypeTerm("car")) == "DRIVE"


def test_msr_climbs_object_type(vehicle):
    """Test that relations on an ancestor of the object are found after closer ones."""
    h, reg = vehicle
    levels = lraps_star(reg, h, "human", "car")

    assert [[s.rel for s in level] for level in levels] == [["DRIVE", "RIDE"], ["MAKE"], [], []]


def test_msr_is_positional(vehicle):
    """Test that removing the head relation promotes the next one."""
    h, reg = vehicle
    trimmed = reg.without_relation("human", "car", "DRIVE")

    assert msr(reg, h, parse_type_term("human:1"), parse_type_term("car:1")) == "DRIVE"
    assert msr(trimmed, h, parse_type_term("human:1"), parse_type_term("car:1")) == "RIDE"
    assert msr(trimmed, h, TypeTerm("human"), TypeTerm("car")) == "RIDE"


def test_msr_none_when_unrelated(vehicle):
    """Test msr without any relation."""
    h, reg = vehicle

    assert msr(reg, h, TypeTerm("car"), TypeTerm("human")) is None


def test_msr_shipped_lexicon(hierarchy, registry):
    """Test relations from the shipped lexicon."""
    assert msr(registry, hierarchy, TypeTerm("human"), TypeTerm("hamSandwich")) == "EAT"
    assert msr(registry, hierarchy, TypeTerm("human"), TypeTerm("rock")) == "BURN"
    assert msr(registry, hierarchy, TypeTerm("activity"), TypeTerm("human")) == "AGENT"
    assert msr(registry, hierarchy, TypeTerm("content"), TypeTerm("rock")) is None


def test_lpap_star(hierarchy, registry):
    """Test properties are listed per level from the type upwards."""
    assert lpap(registry, "human")[0] == "ARTICULATE"
    assert lpap_star(registry, hierarchy, "dog") == [
        [],
        ["HUNGRY"],
        [],
        [],
        ["HEAVY", "TYPICAL_AGE"],
        ["OLD"],
    ]


def test_msp(hierarchy, registry):
    """Test the most salient property."""
    assert msp(registry, hierarchy, "human") == "ARTICULATE"
    assert msp(registry, hierarchy, "rock") == "SOLID"
    assert msp(registry, hierarchy, "dog") == "HUNGRY"
    assert msp(registry, hierarchy, "value") is None


def test_lraps_direct_entries(hierarchy, registry):
    """Test lraps returns declared signatures in salience order."""
    entries = lraps(registry, "human", "car")

    assert [s.rel for s in entries] == ["DRIVE", "RIDE"]
    assert entries[0].subj.card is Cardinality.ONE
    assert entries[1].subj.card is Cardinality.MANY


def test_signatures_are_recorded(registry):
    """Test that declarations are available as predicate signatures."""
    assert registry.signature("THIEF") == PropertySignature("THIEF", TypeTerm("human"))
    assert isinstance(registry.signature("READ"), RelationSignature)
    assert registry.signature("NOPE") is None


def test_root_declaration_is_signature_only(hierarchy, caplog):
    """Test that relations on the root are kept as signatures but never ranked."""
    with caplog.at_level(logging.WARNING):
        reg = parse_registry("rel WANT human thing^a\n", hierarchy)

    assert "kept as a signature only" in caplog.text
    assert reg.signature("WANT") is not None
    assert lraps(reg, "human", "thing") == []


def test_duplicate_declaration_warns(hierarchy, caplog):
    """Test that a repeated declaration is ignored with a warning."""
    with caplog.at_level(logging.WARNING):
        reg = parse_registry("prop HEAVY physical\nprop HEAVY physical\n", hierarchy)

    assert "Duplicate" in caplog.text
    assert lpap(reg, "physical") == ["HEAVY"]


def test_word_directives_are_skipped(vehicle):
    """Test that parse_registry leaves word entries to the lexicon loader."""
    _, reg = vehicle

    assert reg.signature("car") is None


@pytest.mark.parametrize(
    "text, line",
    [
        ("prop HEAVY physical\nfrobnicate X y\n", 2),
        ("rel DRIVE human\n", 1),
        ("prop heavy physical\n", 1),
        ("\n\nprop HEAVY unicorn\n", 3),
        ("rel DRIVE human:2 car\n", 1),
    ],
)
def test_registry_format_errors(vehicle, text, line):
    """Test malformed declarations report their line."""
    h, _ = vehicle

    with pytest.raises(LexiconFormatError) as excinfo:
        parse_registry(text, h)
    assert excinfo.value.line == line


PROPS = ["HEAVY", "ARTICULATE", "OLD", "RED"]
RELS = ["OWN", "DRIVE", "RIDE", "MAKE", "READ"]
CARDS = list(Cardinality)


def random_registry(rng):
    """
    Build a random tree with random declarations.

    Returns the hierarchy, the registry and the declarations in the order made,
    as (name, subject, object, subject card, object card) tuples; properties
    have no object.
    """
    h = TypeHierarchy()
    for i in range(rng.randint(1, 8)):
        h = add_type(h, f"t{i}", rng.choice(h.nodes))
    reg = SalienceRegistry(h)
    declared = []
    below_root = [t for t in h.nodes if t != ROOT]
    for _ in range(rng.randint(0, 12)):
        s, t = rng.choice(below_root), rng.choice(below_root)
        if rng.random() < 0.4:
            name = rng.choice(PROPS)
            reg.declare_property(PropertySignature(name, TypeTerm(s)))
            entry = (name, s, None, None, None)
        else:
            name = rng.choice(RELS)
            subj_card, obj_card = rng.choice(CARDS), rng.choice(CARDS)
            reg.declare_relation(
                RelationSignature(name, TypeTerm(s, card=subj_card), TypeTerm(t, card=obj_card))
            )
            entry = (name, s, t, subj_card, obj_card)
        if entry not in declared:
            declared.append(entry)
    return h, reg, declared


def walk_up(h, t):
    """``t`` and its ancestors, stopping below the root."""
    chain = []
    while t != ROOT:
        chain.append(t)
        t = h.parents[t]
    return chain


def expected_lpap_star(h, declared, t):
    return [[d[0] for d in declared if d[2] is None and d[1] == level] for level in walk_up(h, t)]


def expected_lraps_star(h, declared, s, t):
    return [
        [d for d in declared if d[2] is not None and d[1] == s and d[2] == level]
        for level in walk_up(h, t)
    ]


@pytest.mark.parametrize("seed", range(20))
def test_lpap_star_matches_ancestor_walk(seed):
    """Test lpap_star lists each level's properties in declaration order."""
    rng = random.Random(seed)
    for _ in range(50):
        h, reg, declared = random_registry(rng)
        t = rng.choice(h.nodes)

        assert lpap_star(reg, h, t) == expected_lpap_star(h, declared, t)
        flat = [p for level in expected_lpap_star(h, declared, t) for p in level]
        assert msp(reg, h, t) == (flat[0] if flat else None)


@pytest.mark.parametrize("seed", range(20))
def test_lraps_star_matches_ancestor_walk(seed):
    """Test lraps_star climbs the object type only, keeping declaration order per level."""
    rng = random.Random(seed)
    for _ in range(50):
        h, reg, declared = random_registry(rng)
        s, t = rng.choice(h.nodes), rng.choice(h.nodes)
        levels = lraps_star(reg, h, s, t)

        assert [
            [(sig.rel, sig.subj.base, sig.obj.base, sig.subj.card, sig.obj.card) for sig in level]
            for level in levels
        ] == expected_lraps_star(h, declared, s, t)


@pytest.mark.parametrize("seed", range(20))
def test_msr_is_first_compatible_entry(seed):
    """Test msr returns the first entry whose declared cardinalities admit the query."""
    rng = random.Random(seed)
    for _ in range(50):
        h, reg, declared = random_registry(rng)
        s = TypeTerm(rng.choice(h.nodes), card=rng.choice(CARDS))
        t = TypeTerm(rng.choice(h.nodes), card=rng.choice(CARDS))
        compatible = [
            d[0]
            for level in expected_lraps_star(h, declared, s.base, t.base)
            for d in level
            if d[3].satisfies(s.card) and d[4].satisfies(t.card)
        ]

        assert msr(reg, h, s, t) == (compatible[0] if compatible else None)


@pytest.mark.parametrize("seed", range(20))
def test_removing_head_promotes_next_entry(seed):
    """Test removing the head of lraps(s, t) hands msr to the next surviving entry."""
    rng = random.Random(seed)
    checked = 0
    while checked < 50:
        h, reg, _ = random_registry(rng)
        pairs = [pair for pair, entries in reg.rels.items() if entries]
        if not pairs:
            continue
        s, t = rng.choice(pairs)
        head = lraps(reg, s, t)[0].rel
        after = [
            sig.rel
            for level in lraps_star(reg, h, s, t)
            for sig in level
            if not (sig.subj.base == s and sig.obj.base == t and sig.rel == head)
        ]

        assert msr(reg, h, TypeTerm(s), TypeTerm(t)) == head
        assert msr(reg.without_relation(s, t, head), h, TypeTerm(s), TypeTerm(t)) == (
            after[0] if after else None
        )
        checked += 1
