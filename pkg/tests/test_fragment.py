"""Tests for the controlled-English fragment parser."""

import pytest

from ontosem.engine import Discourse, resolve_scope
from ontosem.fragment import (
    UnknownWordError,
    UnmatchedPatternError,
    match_pattern,
    parse_discourse,
    parse_lexicon,
    parse_sentence,
    split_sentences,
    tag,
)
from ontosem.logic import serialize
from ontosem.ontology import Cardinality, TypeTerm
from ontosem.salience import LexiconFormatError


def tags(lexicon, text):
    return [t.tag for t in tag(lexicon, text)]


def test_tag_multiword_entries(lexicon):
    """Test the longest lexicon match wins."""
    tokens = tag(lexicon, "the ham sandwich wants another beer")

    assert [t.tag for t in tokens] == ["DD", "NOUN", "VERB", "DD", "NOUN"]
    assert tokens[1].surface == "ham sandwich"
    assert tokens[1].entry.target == "hamSandwich"
    assert tags(lexicon, "Jon owns Das Kapital") == ["NAME", "VERB", "NAME"]


def test_tag_function_words(lexicon):
    """Test negation, numbers, deictics and the tag question."""
    assert tags(lexicon, "he does not agree with it") == ["PRON", "NEG", "VERB", "PREP", "PRON"]
    assert tags(lexicon, "the temperature is 90") == ["DD", "NOUN", "COP", "NUM"]
    assert tags(lexicon, "pass that car, will you") == ["VERB", "DD", "NOUN", "WILLYOU"]
    assert tags(lexicon, "they are really annoying me") == ["PRON", "COP", "ADV", "VERB", "DEIC"]


def test_tag_her(lexicon):
    """Test 'her' is a pronoun unless a noun phrase follows."""
    assert tags(lexicon, "jon annoying her") == ["NAME", "VERB", "PRON"]
    assert tags(lexicon, "jon painted her own dog")[2] == "POSS"


def test_unknown_word(lexicon):
    """Test a word outside the lexicon is named."""
    with pytest.raises(UnknownWordError) as excinfo:
        tag(lexicon, "jon painted a unicorn")
    assert excinfo.value.word == "unicorn"


def test_nearest_template(lexicon):
    """Test an unmatched sentence names the closest template."""
    with pytest.raises(UnmatchedPatternError) as excinfo:
        match_pattern(tag(lexicon, "sheba is thief"))
    assert excinfo.value.nearest == "PN-is-a-N"


def test_split_sentences():
    """Test splitting on punctuation and 'but'."""
    assert split_sentences("Jon planned the trip. It was lengthy.") == [
        "Jon planned the trip",
        "It was lengthy",
    ]
    assert split_sentences("jon owns das kapital but he does not agree with it") == [
        "jon owns das kapital",
        "he does not agree with it",
    ]


@pytest.mark.parametrize(
    "text, expected",
    [
        (
            "sheba is a thief",
            'E1 sheba:thing . NOO(sheba,"sheba") & E x1:thing . THIEF(x1:human) & be(sheba,x1)',
        ),
        (
            "liz is famous",
            'E1 liz:thing . NOO(liz,"liz") & E x1:thing . FAMOUS(x1:human) & be(liz,x1)',
        ),
        (
            "sheba is an old dancer",
            'E1 sheba:thing . NOO(sheba,"sheba") & E x1:thing . '
            "OLD(DANCER(x1:human)) & be(sheba,x1)",
        ),
        (
            "jon painted a dog",
            'E1 jon:human . NOO(jon,"jon") & E x1:dog^a . PAINT(jon:human,x1:entity^a)',
        ),
        (
            "jon did not paint a dog",
            'E1 jon:human . NOO(jon,"jon") & E x1:dog^a . ~PAINT(jon:human,x1:entity^a)',
        ),
        (
            "jon planned the lengthy trip",
            'E1 jon:human . NOO(jon,"jon") & E1 x1:trip^a . '
            "PLAN(jon:human,x1:event^a) & LENGTHY(x1:event)",
        ),
        (
            "jon painted his own dog",
            'E1 jon:human . NOO(jon,"jon") & E x1:dog^a . '
            "OWN(jon:human,x1:entity) & PAINT(jon:human,x1:entity^a)",
        ),
        (
            "the ham sandwich wants another beer",
            "E1 x1:hamSandwich . E1 x2:beer^a . WANT(x1:human,x2:thing^a)",
        ),
        ("aging is inevitable", "E1 x1:process . AGING(x1) & INEVITABLE(x1:process)"),
        ("fame is desirable", "E1 x1:property . FAME(x1) & DESIRABLE(x1:property)"),
        ("exercising is wise", "A x1:activity . EXERCISING(x1) -> WISE(x1:human)"),
    ],
)
def test_parse_sentence(lexicon, text, expected):
    """Test the condensed form built for each template."""
    f = parse_sentence(lexicon, text)

    assert serialize(f) == expected


def test_copular_name_resolves_by_constant_substitution(lexicon, hierarchy, registry):
    """Test the be-link of a copular sentence is removed by substituting the name."""
    f = parse_sentence(lexicon, "sheba is a thief")

    result, trace = resolve_scope(hierarchy, registry, f)

    assert trace.rules() == ["const-subst", "unify-subsume"]
    assert serialize(result) == 'E1 sheba:human . NOO(sheba,"sheba") & THIEF(sheba)'


def test_parse_sentence_with_pronoun_is_a_discourse(lexicon):
    """Test a sentence with pronouns comes back as a discourse."""
    d = parse_sentence(lexicon, "jon read a book and then he burned it")

    assert isinstance(d, Discourse)
    assert len(d.sentences) == 2
    assert [slot.word for slot in d.pronoun_slots] == ["he", "it"]


def test_pronoun_slots(lexicon):
    """Test pronoun constraints combine the pronoun and its argument positions."""
    d = parse_discourse(lexicon, ["Jon owns Das Kapital", "he does not agree with it"])
    he, it = d.pronoun_slots

    assert he.constraint == TypeTerm("human", card=Cardinality.ONE)
    assert it.constraint == TypeTerm("content", card=Cardinality.ONE)
    assert he.sentence == it.sentence == 1


def test_plural_pronoun_and_deictics(lexicon):
    """Test 'they' asks for several individuals and deictics are recorded."""
    d = parse_discourse(lexicon, ["pass that car, will you", "they are really annoying me"])

    assert serialize(d.sentences[0]) == "E1 you:human . E1 x1:car . PASS(you:human,x1:vehicle)"
    assert d.pronoun_slots[0].constraint.card is Cardinality.MANY
    assert d.deictics == frozenset({"you", "me"})


def test_variables_unique_across_discourse(lexicon):
    """Test later sentences never reuse an earlier variable name."""
    d = parse_discourse(lexicon, ["jon planned the trip", "jon painted a dog"])

    assert "x1" in serialize(d.sentences[0])
    assert "x2" in serialize(d.sentences[1])


def test_empty_input(lexicon):
    """Test nothing to parse."""
    with pytest.raises(UnmatchedPatternError):
        parse_discourse(lexicon, ["  "])


@pytest.mark.parametrize(
    "text, line",
    [
        ("noun unicorn = unicorn\n", 1),
        ("\nverb zaps = ZAP\n", 2),
        ("adj old\n", 1),
        ("verb fames = FAMOUS\n", 1),
        ("noun dog = dog\nnoun dog = dog\n", 2),
        ("name Bob = Bob : human\n", 1),
        ("noun the = dog\n", 1),
    ],
)
def test_lexicon_format_errors(hierarchy, registry, text, line):
    """Test malformed word entries report their line."""
    with pytest.raises(LexiconFormatError) as excinfo:
        parse_lexicon(text, hierarchy, registry)
    assert excinfo.value.line == line
