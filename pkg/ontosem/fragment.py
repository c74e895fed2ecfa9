"""Controlled-English fragment: lexicon, tagger and sentence templates."""

import difflib
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple, Union

from ontosem.engine import Discourse, PronounSlot
from ontosem.expansion import Complement, copula_formula
from ontosem.logic import (
    Arg,
    Be,
    Binding,
    Formula,
    Implies,
    Literal,
    Modify,
    NOO,
    Not,
    Pred,
    Quantified,
    Quantifier,
    Variable,
    conj,
    fresh_name,
    variable_names,
)
from ontosem.ontology import (
    ROOT,
    Cardinality,
    ExistenceMode,
    OntologyError,
    Single,
    TypeHierarchy,
    TypeTerm,
    parse_type_term,
    subsumes,
    unify,
)
from ontosem.salience import (
    LexiconFormatError,
    PropertySignature,
    RelationSignature,
    SalienceRegistry,
    WORD_DIRECTIVES,
)

logger = logging.getLogger(__name__)

FUNCTION_WORDS: Dict[Tuple[str, ...], str] = {
    ("a",): "DI",
    ("an",): "DI",
    ("the",): "DD",
    ("that",): "DD",
    ("this",): "DD",
    ("another",): "DD",
    ("is",): "COP",
    ("are",): "COP",
    ("was",): "COP",
    ("were",): "COP",
    ("does", "not"): "NEG",
    ("did", "not"): "NEG",
    ("do", "not"): "NEG",
    ("he",): "PRON",
    ("him",): "PRON",
    ("she",): "PRON",
    ("it",): "PRON",
    ("they",): "PRON",
    ("them",): "PRON",
    ("i",): "DEIC",
    ("me",): "DEIC",
    ("you",): "DEIC",
    ("his",): "POSS",
    ("her",): "POSS",
    ("its",): "POSS",
    ("their",): "POSS",
    ("own",): "OWN",
    ("and", "then"): "ANDTHEN",
    ("really",): "ADV",
    ("will", "you"): "WILLYOU",
    ("with",): "PREP",
}

CONTENT_TAGS = {
    "noun": "NOUN",
    "pnoun": "PNOUN",
    "name": "NAME",
    "adj": "ADJ",
    "gerund": "GERUND",
    "kind": "KIND",
    "verb": "VERB",
}

PRONOUN_FORMS = {
    "he": "he",
    "him": "he",
    "she": "she",
    "her": "she",
    "it": "it",
    "they": "they",
    "them": "they",
}

PERSON_TYPE = "human"
POSSESSION_RELATION = "OWN"
VALUE_PREDICATE = "VALUE"

_WORD = re.compile(r"-?\d+(?:\.\d+)?|[a-z]+")
_NUMBER = re.compile(r"^-?\d+(?:\.\d+)?$")
_SENTENCE_BREAK = re.compile(r"[.!?;]+|\bbut\b", re.IGNORECASE)
_CONSTANT_NAME = re.compile(r"^[a-z][A-Za-z0-9_]*$")


class FragmentError(Exception):
    """Exception raised for errors in the English fragment parser."""
    pass


class UnknownWordError(FragmentError):
    """Exception raised when a word is neither a function word nor in the lexicon."""

    def __init__(self, word: str):
        self.word = word
        super().__init__(f"Unknown word: '{word}'")


class UnmatchedPatternError(FragmentError):
    """Exception raised when a sentence fits no template; names the nearest one."""

    def __init__(self, message: str, nearest: Optional[str] = None):
        self.nearest = nearest
        hint = f" (nearest template: {nearest})" if nearest else ""
        super().__init__(f"{message}{hint}")


@dataclass(frozen=True)
class WordEntry:
    kind: str
    surface: Tuple[str, ...]
    target: str
    type: Optional[TypeTerm] = None

    @property
    def tag(self) -> str:
        return CONTENT_TAGS[self.kind]


@dataclass
class Lexicon:
    """Word entries over a hierarchy and the salience registry they refer to."""

    hierarchy: TypeHierarchy
    registry: SalienceRegistry
    entries: Dict[Tuple[str, ...], WordEntry] = field(default_factory=dict)

    @property
    def longest(self) -> int:
        lengths = [len(k) for k in self.entries] + [len(k) for k in FUNCTION_WORDS]
        return max(lengths)

    def add(self, entry: WordEntry) -> None:
        if entry.surface in self.entries or entry.surface in FUNCTION_WORDS:
            raise LexiconFormatError(f"Duplicate word entry '{' '.join(entry.surface)}'")
        self.entries[entry.surface] = entry

    def lookup(self, words: Sequence[str]) -> Optional[WordEntry]:
        return self.entries.get(tuple(words))


def _check_entry(entry: WordEntry, h: TypeHierarchy, reg: SalienceRegistry) -> None:
    if entry.kind == "noun":
        if entry.target not in h:
            raise LexiconFormatError(f"Unknown type '{entry.target}'")
        return
    if entry.kind == "name":
        if not _CONSTANT_NAME.match(entry.target):
            raise LexiconFormatError(f"Invalid constant name '{entry.target}'")
        return
    signature = reg.signature(entry.target)
    if signature is None:
        raise LexiconFormatError(f"Undeclared predicate '{entry.target}'")
    expected = RelationSignature if entry.kind == "verb" else PropertySignature
    if not isinstance(signature, expected):
        raise LexiconFormatError(
            f"'{entry.target}' is not declared as a {'relation' if entry.kind == 'verb' else 'property'}"
        )


def parse_lexicon(
    text: str, h: TypeHierarchy, reg: SalienceRegistry, source: str = "<text>"
) -> Lexicon:
    """
    Parse the word entries of a lexicon file.

    Salience declarations (``prop``/``rel``) are skipped here; they are read by
    ``parse_registry`` from the same file.

    Args:
        text: Lexicon file content
        h: Type hierarchy
        reg: Salience registry the predicate entries must be declared in
        source: Name used in error messages

    Returns:
        The Lexicon
    """
    lexicon = Lexicon(hierarchy=h, registry=reg)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        directive, _, rest = line.partition(" ")
        if directive not in WORD_DIRECTIVES:
            continue
        surface, eq, target = rest.partition("=")
        if not eq or not surface.strip() or not target.strip():
            raise LexiconFormatError(f"Expected '{directive} <words> = <target>'", lineno, source)
        target, _, type_text = target.partition(":")
        try:
            if directive == "noun":
                term = TypeTerm(h.require(target.strip()))
            elif directive == "name":
                term = TypeTerm(h.require(parse_type_term(type_text.strip() or "thing").base))
            else:
                term = None
            entry = WordEntry(
                kind=directive,
                surface=tuple(surface.lower().split()),
                target=target.strip(),
                type=term,
            )
            _check_entry(entry, h, reg)
            lexicon.add(entry)
        except OntologyError as e:
            raise LexiconFormatError(str(e), lineno, source) from e
        except LexiconFormatError as e:
            if e.line is not None:
                raise
            raise LexiconFormatError(str(e), lineno, source) from e
    logger.debug(f"Loaded {len(lexicon.entries)} word entries from {source}")
    return lexicon


def load_lexicon(path: Union[str, Path], h: TypeHierarchy, reg: SalienceRegistry) -> Lexicon:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        logger.error(f"Error reading lexicon file: {e}")
        raise FragmentError(f"Cannot read lexicon file {path}: {e}") from e
    return parse_lexicon(text, h, reg, source=str(path))


@dataclass(frozen=True)
class Token:
    surface: str
    tag: str
    entry: Optional[WordEntry] = None


def split_sentences(text: str) -> List[str]:
    """Split on sentence punctuation and on the coordinator 'but'."""
    return [part.strip() for part in _SENTENCE_BREAK.split(text) if part.strip()]


def tag(lexicon: Lexicon, text: str) -> List[Token]:
    """
    Tag a sentence, preferring the longest multiword match at each position.

    Args:
        lexicon: Word entries
        text: One sentence

    Returns:
        The tokens in order
    """
    words = _WORD.findall(text.lower())
    longest = lexicon.longest
    tokens: List[Token] = []
    i = 0
    while i < len(words):
        if _NUMBER.match(words[i]):
            tokens.append(Token(words[i], "NUM"))
            i += 1
            continue
        for n in range(min(longest, len(words) - i), 0, -1):
            key = tuple(words[i : i + n])
            entry = lexicon.lookup(key)
            if entry is not None:
                tokens.append(Token(" ".join(key), entry.tag, entry))
                break
            if key in FUNCTION_WORDS:
                tokens.append(Token(" ".join(key), FUNCTION_WORDS[key]))
                break
        else:
            raise UnknownWordError(words[i])
        i += n
    return _disambiguate(tokens)


def _disambiguate(tokens: List[Token]) -> List[Token]:
    # "her" is possessive only before a noun phrase
    result = []
    for i, token in enumerate(tokens):
        following = tokens[i + 1].tag if i + 1 < len(tokens) else None
        if token.surface == "her" and following not in ("NOUN", "OWN", "ADJ"):
            token = Token(token.surface, "PRON")
        result.append(token)
    return result


class _Composer:
    """Accumulates the sentences, pronoun slots and deictics of one discourse."""

    def __init__(self, lexicon: Lexicon):
        self.lexicon = lexicon
        self.h = lexicon.hierarchy
        self.reg = lexicon.registry
        self.taken: Set[str] = set()
        self.sentences: List[Formula] = []
        self.slots: List[PronounSlot] = []
        self.deictics: Set[str] = set()

    def emit(self, f: Formula) -> None:
        self.taken |= variable_names(f)
        self.sentences.append(f)

    def fresh(self, hint: str = "x") -> Variable:
        name = hint if hint != "x" and hint not in self.taken else fresh_name(self.taken, hint)
        self.taken.add(name)
        return Variable(name)

    def slot(self, predicate: str, index: int) -> TypeTerm:
        signature = self.reg.signature(predicate)
        if signature is None:
            raise FragmentError(f"Undeclared predicate '{predicate}'")
        return signature.arg_types[index]

    def atom(self, predicate: str, *terms: Variable) -> Pred:
        return Pred(
            predicate,
            tuple(Arg(term, self.slot(predicate, i)) for i, term in enumerate(terms)),
        )

    def name(self, token: Token, declared: Optional[TypeTerm] = None) -> Tuple[Binding, NOO]:
        var = Variable(token.entry.target, is_constant=True)
        self.taken.add(var.name)
        term = declared or token.entry.type
        return Binding(Quantifier.EXISTS_UNIQUE, var, term), NOO(var, var.name)

    def predication(self, token: Token, claim: Callable[[Variable], Formula]) -> None:
        """``NAME is ...``: the name bound at the root type, be-linked to what the claim is about."""
        subject, noo = self.name(token, TypeTerm(ROOT))
        var = self.fresh()
        body = conj(claim(var), Be(subject.var, var))
        self.emit(Quantified(subject, conj(noo, Quantified(Binding(Quantifier.EXISTS, var), body))))

    def noun_phrase(self, det: Token, noun: Token, slots: Sequence[TypeTerm]) -> Binding:
        term = noun.entry.type
        if any(s.is_abstract for s in slots):
            term = term.with_mode(ExistenceMode.ABSTRACT)
        quantifier = Quantifier.EXISTS if det.tag == "DI" else Quantifier.EXISTS_UNIQUE
        return Binding(quantifier, self.fresh(), term)

    def pronoun(self, token: Token, demands: Sequence[TypeTerm]) -> Binding:
        form = PRONOUN_FORMS[token.surface]
        if form == "they":
            quantifier = Quantifier.EXISTS
            declared = TypeTerm("thing", card=Cardinality.MANY)
        else:
            quantifier = Quantifier.EXISTS_UNIQUE
            declared = TypeTerm(PERSON_TYPE if form in ("he", "she") else "thing")
        constraint = declared.with_card(
            Cardinality.MANY if form == "they" else Cardinality.ONE
        )
        for demand in demands:
            outcome = unify(self.h, self.reg, constraint, demand)
            if isinstance(outcome, Single):
                constraint = outcome.result
        var = self.fresh()
        self.slots.append(PronounSlot(var, constraint, len(self.sentences), token.surface))
        return Binding(quantifier, var, declared)

    def deictic(self, token: Token) -> Binding:
        var = self.fresh("you" if token.surface == "you" else "me")
        self.deictics.add(var.name)
        return Binding(Quantifier.EXISTS_UNIQUE, var, TypeTerm(PERSON_TYPE))

    def participant(self, token: Token, demands: Sequence[TypeTerm]) -> Binding:
        if token.tag == "DEIC":
            return self.deictic(token)
        return self.pronoun(token, demands)

    def copula(self, subject: Binding, complement: Complement) -> Formula:
        f = copula_formula(self.h, self.reg, (subject.var, subject.declared), complement, self.taken)
        self.taken |= variable_names(f)
        return f


def _first(tokens: Sequence[Token], *tags: str) -> Token:
    return next(t for t in tokens if t.tag in tags)


def _all(tokens: Sequence[Token], tag_name: str) -> List[Token]:
    return [t for t in tokens if t.tag == tag_name]


def _negated(tokens: Sequence[Token], f: Formula) -> Formula:
    return Not(f) if any(t.tag == "NEG" for t in tokens) else f


def _pn_is_a_n(c: _Composer, tokens: List[Token]) -> None:
    noun = _first(tokens, "PNOUN").entry.target
    c.predication(_first(tokens, "NAME"), lambda var: c.atom(noun, var))


def _pn_is_adj_n(c: _Composer, tokens: List[Token]) -> None:
    noun = _first(tokens, "PNOUN").entry.target
    modifier = _first(tokens, "ADJ").entry.target
    c.predication(_first(tokens, "NAME"), lambda var: Modify(modifier, c.atom(noun, var)))


def _pn_is_a_type(c: _Composer, tokens: List[Token]) -> None:
    subject, _ = c.name(_first(tokens, "NAME"))
    noun = _first(tokens, "NOUN")
    c.emit(c.copula(subject, Complement(noun.entry.type)))


def _pn_is_adj(c: _Composer, tokens: List[Token]) -> None:
    adjective = _first(tokens, "ADJ").entry.target
    c.predication(_first(tokens, "NAME"), lambda var: c.atom(adjective, var))


def _pn_is_gerund(c: _Composer, tokens: List[Token]) -> None:
    subject, _ = c.name(_first(tokens, "NAME"))
    gerund = _first(tokens, "GERUND").entry.target
    c.emit(c.copula(subject, Complement(c.slot(gerund, 0), predicate=gerund)))


def _object_phrase(
    c: _Composer, tokens: List[Token], subject: Variable, verb: str
) -> Formula:
    det = _first(tokens, "DI", "DD")
    adjectives = [t.entry.target for t in tokens[tokens.index(det) :] if t.tag == "ADJ"]
    slots = [c.slot(verb, 1)] + [c.slot(a, 0) for a in adjectives]
    obj = c.noun_phrase(det, _first(tokens, "NOUN"), slots)
    body = _negated(tokens, c.atom(verb, subject, obj.var))
    return Quantified(obj, conj(body, *[c.atom(a, obj.var) for a in adjectives]))


def _pn_v_det_n(c: _Composer, tokens: List[Token]) -> None:
    subject, noo = c.name(_first(tokens, "NAME"))
    verb = _first(tokens, "VERB").entry.target
    c.emit(Quantified(subject, conj(noo, _object_phrase(c, tokens, subject.var, verb))))


def _pn_v_pn(c: _Composer, tokens: List[Token]) -> None:
    names = _all(tokens, "NAME")
    subject, subject_noo = c.name(names[0])
    obj, obj_noo = c.name(names[1])
    verb = _first(tokens, "VERB").entry.target
    body = _negated(tokens, c.atom(verb, subject.var, obj.var))
    c.emit(Quantified(subject, conj(subject_noo, Quantified(obj, conj(obj_noo, body)))))


def _pn_v_poss_n(c: _Composer, tokens: List[Token]) -> None:
    subject, noo = c.name(_first(tokens, "NAME"))
    verb = _first(tokens, "VERB").entry.target
    adjectives = [t.entry.target for t in _all(tokens, "ADJ")]
    slots = [c.slot(POSSESSION_RELATION, 1), c.slot(verb, 1)] + [c.slot(a, 0) for a in adjectives]
    obj = c.noun_phrase(Token("a", "DI"), _first(tokens, "NOUN"), slots)
    body = conj(
        c.atom(POSSESSION_RELATION, subject.var, obj.var),
        _negated(tokens, c.atom(verb, subject.var, obj.var)),
        *[c.atom(a, obj.var) for a in adjectives],
    )
    c.emit(Quantified(subject, conj(noo, Quantified(obj, body))))


def _det_n_v_det_n(c: _Composer, tokens: List[Token]) -> None:
    verb_at = next(i for i, t in enumerate(tokens) if t.tag == "VERB")
    verb = tokens[verb_at].entry.target
    left, right = tokens[:verb_at], tokens[verb_at + 1 :]
    left_adjectives = [t.entry.target for t in _all(left, "ADJ")]
    right_adjectives = [t.entry.target for t in _all(right, "ADJ")]
    subject = c.noun_phrase(
        _first(left, "DI", "DD"),
        _first(left, "NOUN"),
        [c.slot(verb, 0)] + [c.slot(a, 0) for a in left_adjectives],
    )
    obj = c.noun_phrase(
        _first(right, "DI", "DD"),
        _first(right, "NOUN"),
        [c.slot(verb, 1)] + [c.slot(a, 0) for a in right_adjectives],
    )
    body = conj(
        _negated(tokens, c.atom(verb, subject.var, obj.var)),
        *[c.atom(a, subject.var) for a in left_adjectives],
        *[c.atom(a, obj.var) for a in right_adjectives],
    )
    c.emit(Quantified(subject, Quantified(obj, body)))


def _gerund_is_adj(c: _Composer, tokens: List[Token]) -> None:
    head = _first(tokens, "GERUND", "KIND").entry.target
    adjective = _first(tokens, "ADJ").entry.target
    head_type = c.slot(head, 0)
    var = c.fresh()
    restrictor = Pred(head, (Arg(var),))
    claim = c.atom(adjective, var)
    if "activity" in c.h and subsumes(c.h, "activity", head_type.base):
        # a generic claim about every instance of the activity
        c.emit(Quantified(Binding(Quantifier.FORALL, var, head_type), Implies(restrictor, claim)))
    else:
        c.emit(Quantified(Binding(Quantifier.EXISTS_UNIQUE, var, head_type), conj(restrictor, claim)))


def _definite_subject(c: _Composer, tokens: List[Token]) -> Binding:
    return Binding(Quantifier.EXISTS_UNIQUE, c.fresh(), _first(tokens, "NOUN").entry.type)


def _the_n_is_value(c: _Composer, tokens: List[Token]) -> None:
    subject = _definite_subject(c, tokens)
    text = _first(tokens, "NUM").surface
    value = Literal(float(text) if "." in text else int(text))
    complement = Complement(c.slot(VALUE_PREDICATE, 0), value, VALUE_PREDICATE)
    c.emit(c.copula(subject, complement))


def _the_n_is_gerund(c: _Composer, tokens: List[Token]) -> None:
    subject = _definite_subject(c, tokens)
    gerund = _first(tokens, "GERUND").entry.target
    c.emit(c.copula(subject, Complement(c.slot(gerund, 0), predicate=gerund)))


def _the_n_is_adj(c: _Composer, tokens: List[Token]) -> None:
    adjectives = [t.entry.target for t in _all(tokens, "ADJ")]
    subject = c.noun_phrase(
        _first(tokens, "DD"), _first(tokens, "NOUN"), [c.slot(a, 0) for a in adjectives]
    )
    c.emit(Quantified(subject, conj(*[c.atom(a, subject.var) for a in adjectives])))


def _pron_is_adj(c: _Composer, tokens: List[Token]) -> None:
    adjective = _first(tokens, "ADJ").entry.target
    subject = c.pronoun(_first(tokens, "PRON"), [c.slot(adjective, 0)])
    c.emit(Quantified(subject, c.atom(adjective, subject.var)))


def _pron_v_pron(c: _Composer, tokens: List[Token]) -> None:
    verb = _first(tokens, "VERB").entry.target
    subject = c.participant(tokens[0], [c.slot(verb, 0)])
    obj = c.participant(tokens[-1], [c.slot(verb, 1)])
    body = _negated(tokens, c.atom(verb, subject.var, obj.var))
    c.emit(Quantified(subject, Quantified(obj, body)))


def _and_then(c: _Composer, tokens: List[Token]) -> None:
    split = next(i for i, t in enumerate(tokens) if t.tag == "ANDTHEN")
    _pn_v_det_n(c, tokens[:split])
    _pron_v_pron(c, tokens[split + 1 :])


def _imperative(c: _Composer, tokens: List[Token]) -> None:
    addressee = c.deictic(Token("you", "DEIC"))
    verb = _first(tokens, "VERB").entry.target
    c.emit(Quantified(addressee, _object_phrase(c, tokens, addressee.var, verb)))


@dataclass(frozen=True)
class SentencePattern:
    """A template: a regular expression over the tag sequence and its LF builder."""

    name: str
    shape: str
    example: str
    build: Callable[[_Composer, List[Token]], None]

    def matches(self, tags: Sequence[str]) -> bool:
        return re.fullmatch(self.shape, " ".join(tags)) is not None


_NP = r"(DI|DD) (ADJ )*NOUN"

PATTERNS: Tuple[SentencePattern, ...] = (
    SentencePattern("PN-is-a-N", r"NAME COP DI PNOUN", "NAME COP DI PNOUN", _pn_is_a_n),
    SentencePattern("PN-is-Adj-N", r"NAME COP DI ADJ PNOUN", "NAME COP DI ADJ PNOUN", _pn_is_adj_n),
    SentencePattern("PN-is-a-Type", r"NAME COP DI NOUN", "NAME COP DI NOUN", _pn_is_a_type),
    SentencePattern("PN-is-Adj", r"NAME COP (ADV )?ADJ", "NAME COP ADJ", _pn_is_adj),
    SentencePattern("PN-is-Gerund", r"NAME COP GERUND", "NAME COP GERUND", _pn_is_gerund),
    SentencePattern(
        "PN-V-Det-N", rf"NAME (NEG )?VERB (PREP )?{_NP}", "NAME VERB DI NOUN", _pn_v_det_n
    ),
    SentencePattern("PN-V-PN", r"NAME (NEG )?VERB (PREP )?NAME", "NAME VERB NAME", _pn_v_pn),
    SentencePattern(
        "PN-V-PossPron-N",
        r"NAME (NEG )?VERB POSS (OWN )?(ADJ )*NOUN",
        "NAME VERB POSS OWN NOUN",
        _pn_v_poss_n,
    ),
    SentencePattern(
        "Det-N-V-Det-N",
        rf"{_NP} (NEG )?VERB (PREP )?{_NP}",
        "DD NOUN VERB DI NOUN",
        _det_n_v_det_n,
    ),
    SentencePattern(
        "Gerund-is-Adj", r"(GERUND|KIND) COP (ADV )?ADJ", "GERUND COP ADJ", _gerund_is_adj
    ),
    SentencePattern("The-N-is-Value", r"DD NOUN COP NUM", "DD NOUN COP NUM", _the_n_is_value),
    SentencePattern(
        "The-N-is-Gerund", r"DD NOUN COP GERUND", "DD NOUN COP GERUND", _the_n_is_gerund
    ),
    SentencePattern("The-N-is-Adj", r"DD (ADJ )*NOUN COP (ADV )?ADJ", "DD NOUN COP ADJ", _the_n_is_adj),
    SentencePattern(
        "PN-V-Det-N-and-then-Pron-V-Pron",
        rf"NAME VERB (PREP )?{_NP} ANDTHEN PRON (NEG )?VERB (PREP )?(PRON|DEIC)",
        "NAME VERB DI NOUN ANDTHEN PRON VERB PRON",
        _and_then,
    ),
    SentencePattern("Pron-is-Adj", r"PRON COP (ADV )?ADJ", "PRON COP ADJ", _pron_is_adj),
    SentencePattern(
        "Pron-V-Pron",
        r"(PRON|DEIC) (COP )?(ADV )?(NEG )?VERB (PREP )?(PRON|DEIC)",
        "PRON VERB PRON",
        _pron_v_pron,
    ),
    SentencePattern("Imperative", rf"VERB {_NP}( WILLYOU)?", "VERB DD NOUN WILLYOU", _imperative),
)


def match_pattern(tokens: Sequence[Token]) -> SentencePattern:
    """Return the template the tag sequence fits, or raise naming the nearest one."""
    tags = [t.tag for t in tokens]
    for pattern in PATTERNS:
        if pattern.matches(tags):
            logger.debug(f"Matched template {pattern.name}: {' '.join(tags)}")
            return pattern
    nearest = max(
        PATTERNS,
        key=lambda p: difflib.SequenceMatcher(None, tags, p.example.split()).ratio(),
    )
    raise UnmatchedPatternError(f"No template for '{' '.join(tags)}'", nearest.name)


def parse_discourse(lexicon: Lexicon, sentences: Sequence[str]) -> Discourse:
    """
    Parse a sequence of sentences into one discourse.

    Each text may itself contain several sentences (split on punctuation and
    'but'). Variable names are unique across the whole discourse.

    Args:
        lexicon: Word entries with their hierarchy and registry
        sentences: Sentence texts in discourse order

    Returns:
        The Discourse with its pronoun slots and deictic variables
    """
    composer = _Composer(lexicon)
    for text in sentences:
        for part in split_sentences(text):
            tokens = tag(lexicon, part)
            match_pattern(tokens).build(composer, tokens)
    if not composer.sentences:
        logger.error("Nothing to parse")
        raise UnmatchedPatternError("Empty input")
    return Discourse(composer.sentences, composer.slots, frozenset(composer.deictics))


def parse_sentence(lexicon: Lexicon, text: str) -> Union[Formula, Discourse]:
    """
    Parse one input text into its condensed logical form.

    Proper nouns get an ∃¹ binder with a NOO atom, definites ∃¹ and indefinites ∃;
    argument positions carry the signature types of their predicates.

    Args:
        lexicon: Word entries with their hierarchy and registry
        text: The sentence (or a short discourse joined by punctuation or 'but')

    Returns:
        A Formula for a single pronoun-free sentence, otherwise a Discourse
    """
    discourse = parse_discourse(lexicon, [text])
    if len(discourse.sentences) == 1 and not discourse.pronoun_slots:
        return discourse.sentences[0]
    return discourse
