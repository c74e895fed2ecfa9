"""Tests for concept expansion and the copula."""

import pytest

from ontosem.expansion import (
    Complement,
    CopulaError,
    DefinitionFormatError,
    DefinitionShapeError,
    ExpansionError,
    MissingDefinitionError,
    copula_category,
    copula_formula,
    expand,
    expand_negated,
    interpret_copula,
    parse_definitions,
)
from ontosem.lf_parser import parse_lf
from ontosem.logic import (
    And,
    Implies,
    Literal,
    Quantified,
    Quantifier,
    Variable,
    serialize,
)
from ontosem.ontology import TypeTerm

SHEBA = 'E1 sheba:human . NOO(sheba,"sheba") & '
JON = Variable("jon", is_constant=True)


def test_registry_contents(definitions):
    """Test the shipped definitions load with OLD kept opaque."""
    assert len(definitions) == 8
    assert definitions.is_condensed("DANCER")
    assert "OLD" in definitions
    assert not definitions.is_condensed("OLD")
    assert not definitions.is_condensed("THIEF")
    with pytest.raises(MissingDefinitionError):
        definitions.require("THIEF")


def test_expand_hoists_abstract_object(definitions):
    """Test the definition's binder joins the enclosing scope."""
    f = parse_lf(SHEBA + "DANCER(sheba)")

    assert serialize(expand(definitions, f)) == (
        'E1 sheba:human . E1 a:activity . NOO(sheba,"sheba") & DANCING(a) & typ(do(sheba,a))'
    )


def test_expand_modifier(definitions):
    """Test a modifier applies to the abstract object or to its subject."""
    f = parse_lf(SHEBA + "OLD(DANCER(sheba))")

    assert serialize(expand(definitions, f)) == (
        'E1 sheba:human . E1 a:activity . NOO(sheba,"sheba") & DANCING(a) '
        "& typ(do(sheba,a)) & (OLD(a) | OLD(sheba))"
    )


def test_expand_modifier_needs_definition(definitions):
    """Test a modifier over an undefined predicate."""
    with pytest.raises(MissingDefinitionError):
        expand(definitions, parse_lf("E x:dog . OLD(HUNGRY(x))"))


def test_expand_negated_predicate(definitions):
    """Test a negated event predicate becomes a universal over the activity."""
    f = parse_lf('E1 jon:human . NOO(jon,"jon") & E d:dog^a . ~PAINT(jon,d)')

    assert serialize(expand(definitions, f)) == (
        'E1 jon:human . NOO(jon,"jon") & E d:dog^a . '
        "A a:activity . PAINTING(a) -> ~do(a,jon) | ~theme(a,d)"
    )


def test_expand_double_negation(definitions):
    """Test ~~P expands like P."""
    once = expand(definitions, parse_lf(SHEBA + "DANCER(sheba)"))

    assert expand(definitions, parse_lf(SHEBA + "~~DANCER(sheba)")) == once


def test_expand_inside_consequent(definitions):
    """Test binders from a consequent stay in the consequent."""
    f = parse_lf("A a:activity . EXERCISING(a) -> WISE(a)")

    assert serialize(expand(definitions, f)) == (
        "A a:activity . EXERCISING(a) -> E1 p:property . WISDOM(p) & has(a:human,p)"
    )


def test_expand_renames_clashing_binders(definitions):
    """Test a definition's binder is renamed when the name is taken."""
    f = parse_lf('E1 p:human . NOO(p,"p") & FAMOUS(p)')

    assert serialize(expand(definitions, f)) == (
        'E1 p:human . E1 x1:property . NOO(p,"p") & FAME(x1) & has(p,x1)'
    )


def test_expand_leaves_opaque_and_undefined(definitions):
    """Test opaque and undefined predicates are not rewritten."""
    f = parse_lf("E x:dog . OLD(x) & HUNGRY(x)")

    assert expand(definitions, f) == f


def test_expand_runaway_recursion(hierarchy):
    """Test a self-referential definition stops with an error."""
    defs = parse_definitions("def LOOP(x:human) := E1 p:property . LOOP(x) & has(x,p)\n", hierarchy)

    with pytest.raises(ExpansionError, match="without end"):
        expand(defs, parse_lf(SHEBA + "LOOP(sheba)"))


def test_expand_negated_direct(definitions):
    """Test the negation rewrite on its own."""
    result = expand_negated(definitions, parse_lf("~PAINT(jon,d)"))

    assert result.binding.quantifier is Quantifier.FORALL
    assert serialize(result) == "A a:activity . PAINTING(a) -> ~do(a,jon) | ~theme(a,d)"


def test_expand_negated_errors(definitions):
    """Test the preconditions of the negation rewrite."""
    with pytest.raises(ExpansionError):
        expand_negated(definitions, parse_lf("PAINT(jon,d)"))
    with pytest.raises(DefinitionShapeError):
        expand_negated(definitions, parse_lf("~FAMOUS(liz)"))
    with pytest.raises(DefinitionShapeError):
        expand_negated(definitions, parse_lf("~OLD(liz)"))
    with pytest.raises(MissingDefinitionError):
        expand_negated(definitions, parse_lf("~THIEF(liz)"))


def test_axiom(definitions):
    """Test a definition as a closed biconditional."""
    axiom = definitions.require("WISE").axiom()

    assert isinstance(axiom, Quantified)
    assert axiom.binding.quantifier is Quantifier.FORALL
    assert axiom.binding.declared == TypeTerm("human")
    assert isinstance(axiom.body, And)
    assert all(isinstance(part, Implies) for part in axiom.body.conjuncts)


def test_instantiate_arity(definitions):
    """Test instantiating with the wrong number of arguments."""
    with pytest.raises(ExpansionError, match="takes 2 arguments"):
        definitions.require("PAINT").instantiate([Variable("jon")], set())


@pytest.mark.parametrize(
    "text, line",
    [
        ("def lower(x:human) := E1 p:property . FAME(p) & has(x,p)\n", 1),
        ("def P(x:human) := E1 p:property . FAME(y)\n", 1),
        ("def P(x:human) := A p:property . FAME(p)\n", 1),
        ("def P(x:human) := E1 d:dog . HUNGRY(d)\n", 1),
        ("\ndef P(x:unicorn) := E1 p:property . FAME(p)\n", 2),
        ("def P(x:human) := E1 p:property . FAME(p) &\n", 1),
        (
            "def P(x:human) := E1 p:property . FAME(p)\n"
            "def P(x:human) := E1 p:property . FAME(p)\n",
            2,
        ),
        ("def P(x:human) := E1 p:property . FAME(p) with PHI(x,z)\n", 1),
    ],
)
def test_definition_format_errors(hierarchy, text, line):
    """Test malformed definitions report their line."""
    with pytest.raises(DefinitionFormatError) as excinfo:
        parse_definitions(text, hierarchy)
    assert excinfo.value.line == line


def test_copula_category(hierarchy):
    """Test the abstract-object category of a type."""
    assert copula_category(hierarchy, "physioState") == "state"
    assert copula_category(hierarchy, "property") == "property"
    assert copula_category(hierarchy, "temperature") is None
    assert copula_category(hierarchy, "rock") is None


def test_copula_identity_with_value(hierarchy, registry):
    """Test 'the temperature is 90' merges the copula variables."""
    t = Variable("t")
    complement = Complement(TypeTerm("measure"), Literal(90), "VALUE")
    unresolved = copula_formula(hierarchy, registry, (t, TypeTerm("temperature")), complement)

    assert serialize(unresolved) == (
        "E1 t:temperature . E1 x1:measure . VALUE(x1:measure,90) & be(t,x1)"
    )
    resolved = interpret_copula(hierarchy, registry, (t, TypeTerm("temperature")), complement)
    assert serialize(resolved) == "E1 t:temperature . VALUE(t,90)"


def test_copula_process(hierarchy, registry):
    """Test 'the temperature is rising' relates the subject to a process."""
    complement = Complement(TypeTerm("process"), predicate="RISING")
    resolved = interpret_copula(
        hierarchy, registry, (Variable("t"), TypeTerm("temperature")), complement
    )

    assert serialize(resolved) == "E1 t:temperature . E1 x1:process . RISING(x1) & gt(t,x1)"


@pytest.mark.parametrize(
    "complement, link",
    [
        (Complement(TypeTerm("property"), predicate="WISDOM"), "WISDOM(x1) & has(jon,x1)"),
        (Complement(TypeTerm("physioState"), predicate="DEATH"), "DEATH(x1) & in(jon,x1)"),
        (Complement(TypeTerm("process"), predicate="AGING"), "AGING(x1) & gt(jon,x1)"),
        (
            Complement(TypeTerm("activity"), predicate="EXERCISING"),
            "EXERCISING(x1) & AGENT(x1,jon)",
        ),
    ],
)
def test_copula_categories(hierarchy, registry, complement, link):
    """Test the structural relation chosen for each abstract-object category."""
    resolved = interpret_copula(hierarchy, registry, (JON, TypeTerm("human")), complement)

    assert serialize(resolved) == (
        f'E1 jon:human . NOO(jon,"jon") & E1 x1:{complement.type} . {link}'
    )


def test_copula_self_identity(hierarchy, registry):
    """Test 'x is x' keeps the trivial link."""
    s = Variable("s")
    resolved = interpret_copula(hierarchy, registry, (s, TypeTerm("human")), Complement(TypeTerm("human"), s))

    assert serialize(resolved) == "E1 s:human . be(s,s)"


def test_copula_error(hierarchy, registry):
    """Test an unrelated concrete complement is rejected."""
    with pytest.raises(CopulaError):
        copula_formula(hierarchy, registry, (Variable("x"), TypeTerm("human")), Complement(TypeTerm("rock")))
