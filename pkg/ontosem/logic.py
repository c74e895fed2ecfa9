"""Logical-form AST, structural utilities and the serializer."""

import json
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, Iterator, List, Optional, Set, Tuple, Union

from ontosem.ontology import Cardinality, ROOT, TypeTerm

logger = logging.getLogger(__name__)

STRUCT_KINDS = ("has", "in", "do", "gt", "agent", "theme")


class LogicError(Exception):
    """Exception raised for malformed or ill-scoped logical forms."""
    pass


class LFSyntaxError(LogicError):
    """Exception raised when LF text does not parse."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        location = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(f"{location}{message}")


class SubstitutionError(LogicError):
    """Exception raised when a substitution precondition does not hold."""
    pass


class Quantifier(str, Enum):
    EXISTS = "E"
    EXISTS_UNIQUE = "E1"
    FORALL = "A"

    @property
    def symbol(self) -> str:
        return {"E": "∃", "E1": "∃¹", "A": "∀"}[self.value]


@dataclass(frozen=True)
class Variable:
    name: str
    is_constant: bool = field(default=False, compare=False)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Literal:
    """A number or quoted string standing in an argument position."""

    value: Union[int, float, str]

    @property
    def key(self) -> str:
        return str(self.value)

    def __str__(self) -> str:
        if isinstance(self.value, str):
            return json.dumps(self.value, ensure_ascii=False)
        return str(self.value)


Term = Union[Variable, Literal]


@dataclass(frozen=True)
class Arg:
    """An argument slot: a term plus the type demanded at this position, if any."""

    term: Term
    signature: Optional[TypeTerm] = None

    def render(self) -> str:
        if self.signature is None:
            return str(self.term)
        return f"{self.term}:{self.signature}"


@dataclass(frozen=True)
class Binding:
    """Quantifier, bound variable and declared type; ∃¹ implies cardinality one."""

    quantifier: Quantifier
    var: Variable
    declared: TypeTerm = TypeTerm(ROOT)

    def __post_init__(self):
        if (
            self.quantifier is Quantifier.EXISTS_UNIQUE
            and self.declared.card is Cardinality.UNCONSTRAINED
        ):
            object.__setattr__(self, "declared", self.declared.with_card(Cardinality.ONE))

    def render(self, ascii: bool = True) -> str:
        implied = (
            self.quantifier is Quantifier.EXISTS_UNIQUE and self.declared.card is Cardinality.ONE
        )
        declared = self.declared.render(show_card=not implied)
        if ascii:
            return f"{self.quantifier.value} {self.var.name}:{declared}"
        return f"{self.quantifier.symbol}{self.var.name}:{declared}"


class Formula:
    """Base class of every LF node."""

    def __str__(self) -> str:
        return serialize(self)


@dataclass(frozen=True)
class Quantified(Formula):
    binding: Binding
    body: Formula


@dataclass(frozen=True)
class Pred(Formula):
    name: str
    args: Tuple[Arg, ...]


@dataclass(frozen=True)
class Modify(Formula):
    """A predicate modifier applied to a condensed predicate, e.g. OLD(DANCER(x))."""

    modifier: str
    inner: Pred


@dataclass(frozen=True)
class NOO(Formula):
    var: Variable
    label: str


@dataclass(frozen=True)
class Be(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class StructRel(Formula):
    kind: str
    args: Tuple[Arg, ...]


@dataclass(frozen=True)
class Typ(Formula):
    body: Formula


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    conjuncts: Tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    disjuncts: Tuple[Formula, ...]


@dataclass(frozen=True)
class Implies(Formula):
    antecedent: Formula
    consequent: Formula


ATOMS = (Pred, Modify, NOO, Be, StructRel)


@dataclass(frozen=True)
class TypeObligation:
    """The declared type of a bound variable plus every type demanded of it."""

    var: Variable
    declared: TypeTerm
    demands: Tuple[TypeTerm, ...]


def conj(*parts: Formula) -> Formula:
    """Build a flattened conjunction."""
    flat: List[Formula] = []
    for part in parts:
        if isinstance(part, And):
            flat.extend(part.conjuncts)
        else:
            flat.append(part)
    if not flat:
        raise LogicError("Empty conjunction")
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def disj(*parts: Formula) -> Formula:
    flat: List[Formula] = []
    for part in parts:
        if isinstance(part, Or):
            flat.extend(part.disjuncts)
        else:
            flat.append(part)
    if not flat:
        raise LogicError("Empty disjunction")
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def pred(name: str, *terms: Union[Term, Arg]) -> Pred:
    return Pred(name, tuple(t if isinstance(t, Arg) else Arg(t) for t in terms))


def struct(kind: str, *terms: Union[Term, Arg]) -> StructRel:
    if kind not in STRUCT_KINDS:
        raise LogicError(f"Unknown structural relation: {kind}")
    return StructRel(kind, tuple(t if isinstance(t, Arg) else Arg(t) for t in terms))


def map_children(f: Formula, fn: Callable[[Formula], Formula]) -> Formula:
    """Rebuild ``f`` with ``fn`` applied to each immediate subformula."""
    if isinstance(f, Quantified):
        return Quantified(f.binding, fn(f.body))
    if isinstance(f, Not):
        return Not(fn(f.body))
    if isinstance(f, Typ):
        return Typ(fn(f.body))
    if isinstance(f, And):
        return conj(*[fn(c) for c in f.conjuncts])
    if isinstance(f, Or):
        return disj(*[fn(d) for d in f.disjuncts])
    if isinstance(f, Implies):
        return Implies(fn(f.antecedent), fn(f.consequent))
    return f


def children(f: Formula) -> Tuple[Formula, ...]:
    if isinstance(f, (Quantified, Not, Typ)):
        return (f.body,)
    if isinstance(f, And):
        return f.conjuncts
    if isinstance(f, Or):
        return f.disjuncts
    if isinstance(f, Implies):
        return (f.antecedent, f.consequent)
    return ()


def walk(f: Formula) -> Iterator[Formula]:
    """Pre-order traversal in textual order."""
    yield f
    for child in children(f):
        yield from walk(child)


def iter_atoms(f: Formula) -> Iterator[Formula]:
    return (node for node in walk(f) if isinstance(node, ATOMS))


def atom_args(atom: Formula) -> Tuple[Arg, ...]:
    if isinstance(atom, (Pred, StructRel)):
        return atom.args
    if isinstance(atom, Modify):
        return atom.inner.args
    if isinstance(atom, NOO):
        return (Arg(atom.var),)
    if isinstance(atom, Be):
        return (Arg(atom.left), Arg(atom.right))
    return ()


def iter_args(f: Formula) -> Iterator[Arg]:
    """Yield signature-capable argument slots (predicates and structural relations)."""
    for atom in iter_atoms(f):
        if isinstance(atom, (Pred, StructRel, Modify)):
            yield from atom_args(atom)


def bindings(f: Formula) -> List[Binding]:
    return [node.binding for node in walk(f) if isinstance(node, Quantified)]


def binding_of(f: Formula, name: str) -> Optional[Binding]:
    for binding in bindings(f):
        if binding.var.name == name:
            return binding
    return None


def free_vars(f: Formula, bound: Optional[Set[str]] = None) -> Set[str]:
    bound = bound or set()
    if isinstance(f, Quantified):
        return free_vars(f.body, bound | {f.binding.var.name})
    if isinstance(f, ATOMS):
        return {
            arg.term.name
            for arg in atom_args(f)
            if isinstance(arg.term, Variable) and arg.term.name not in bound
        }
    result: Set[str] = set()
    for child in children(f):
        result |= free_vars(child, bound)
    return result


def variable_names(f: Formula) -> Set[str]:
    names = {b.var.name for b in bindings(f)}
    for atom in iter_atoms(f):
        names |= {a.term.name for a in atom_args(atom) if isinstance(a.term, Variable)}
    return names


def constants(f: Formula) -> Set[str]:
    """Names that appear as the first argument of a NOO atom."""
    return {atom.var.name for atom in iter_atoms(f) if isinstance(atom, NOO)}


def fresh_name(taken: Set[str], prefix: str = "x") -> str:
    n = 1
    while f"{prefix}{n}" in taken:
        n += 1
    return f"{prefix}{n}"


def _map_atom_terms(atom: Formula, fn: Callable[[Arg], Arg]) -> Formula:
    if isinstance(atom, Pred):
        return Pred(atom.name, tuple(fn(a) for a in atom.args))
    if isinstance(atom, StructRel):
        return StructRel(atom.kind, tuple(fn(a) for a in atom.args))
    if isinstance(atom, Modify):
        return Modify(atom.modifier, _map_atom_terms(atom.inner, fn))
    if isinstance(atom, NOO):
        term = fn(Arg(atom.var)).term
        if not isinstance(term, Variable):
            raise SubstitutionError(f"NOO needs a variable, got {term}")
        return NOO(term, atom.label)
    if isinstance(atom, Be):
        return Be(fn(Arg(atom.left)).term, fn(Arg(atom.right)).term)
    return atom


def map_args(f: Formula, fn: Callable[[Arg], Arg]) -> Formula:
    """Apply ``fn`` to every argument slot, ignoring scope."""
    if isinstance(f, ATOMS):
        return _map_atom_terms(f, fn)
    return map_children(f, lambda child: map_args(child, fn))


def substitute(f: Formula, mapping: Dict[str, Term]) -> Formula:
    """Replace free occurrences of the named variables; signatures are kept."""
    if not mapping:
        return f
    if isinstance(f, Quantified):
        inner = {k: v for k, v in mapping.items() if k != f.binding.var.name}
        return Quantified(f.binding, substitute(f.body, inner))
    if isinstance(f, ATOMS):

        def swap(arg: Arg) -> Arg:
            if isinstance(arg.term, Variable) and arg.term.name in mapping:
                return Arg(mapping[arg.term.name], arg.signature)
            return arg

        return _map_atom_terms(f, swap)
    return map_children(f, lambda child: substitute(child, mapping))


def strip_signatures(f: Formula) -> Formula:
    return map_args(f, lambda arg: Arg(arg.term))


def collect_obligations(f: Formula) -> List[TypeObligation]:
    """
    List each bound variable once, in binder order, with its declared type and the
    signature types demanded at its argument positions (textual order).
    """
    obligations = []
    for binding in bindings(f):
        demands = tuple(
            arg.signature
            for arg in _scoped_args(f, binding)
            if arg.signature is not None
        )
        obligations.append(TypeObligation(binding.var, binding.declared, demands))
    return obligations


def _scoped_args(f: Formula, binding: Binding) -> List[Arg]:
    """Argument slots bound by the given binder occurrence."""
    for node in walk(f):
        if isinstance(node, Quantified) and node.binding is binding:
            return list(_free_args(node.body, binding.var.name))
    return []


def _free_args(f: Formula, name: str) -> Iterator[Arg]:
    if isinstance(f, Quantified):
        if f.binding.var.name == name:
            return
        yield from _free_args(f.body, name)
        return
    if isinstance(f, (Pred, StructRel, Modify)):
        for arg in atom_args(f):
            if isinstance(arg.term, Variable) and arg.term.name == name:
                yield arg
        return
    for child in children(f):
        yield from _free_args(child, name)


def uniquify(f: Formula) -> Formula:
    """Rename binders so that no name is bound twice or shadows a free variable."""
    taken = set(free_vars(f)) | variable_names(f)
    seen: Set[str] = set(free_vars(f))

    def visit(g: Formula) -> Formula:
        if isinstance(g, Quantified):
            var = g.binding.var
            body = g.body
            if var.name in seen:
                new_name = fresh_name(taken | seen)
                taken.add(new_name)
                new_var = Variable(new_name, var.is_constant)
                body = substitute(body, {var.name: new_var})
                var = new_var
            seen.add(var.name)
            return Quantified(replace(g.binding, var=var), visit(body))
        return map_children(g, visit)

    return visit(f)


def alpha_normalize(f: Formula) -> Formula:
    """
    Rename non-constant bound variables to x1, x2, ... in binder pre-order.

    Constants (names carried by a NOO atom) and free variables keep their names.
    """
    keep = constants(f) | free_vars(f)
    counter = [0]

    def next_name() -> str:
        while True:
            counter[0] += 1
            name = f"x{counter[0]}"
            if name not in keep:
                return name

    def visit(g: Formula, env: Dict[str, Variable]) -> Formula:
        if isinstance(g, Quantified):
            var = g.binding.var
            new_var = var if var.name in keep else Variable(next_name())
            inner = dict(env)
            inner[var.name] = new_var
            return Quantified(replace(g.binding, var=new_var), visit(g.body, inner))
        if isinstance(g, ATOMS):

            def rename(arg: Arg) -> Arg:
                if isinstance(arg.term, Variable) and arg.term.name in env:
                    return Arg(env[arg.term.name], arg.signature)
                return arg

            return _map_atom_terms(g, rename)
        return map_children(g, lambda child: visit(child, env))

    return visit(f, {})


def alpha_equivalent(f: Formula, g: Formula) -> bool:
    return alpha_normalize(f) == alpha_normalize(g)


def unbind(f: Formula, name: str) -> Formula:
    """Drop the binder of ``name``; its body takes the binder's place."""
    if isinstance(f, Quantified):
        body = unbind(f.body, name)
        if f.binding.var.name == name:
            return body
        return Quantified(f.binding, body)
    return map_children(f, lambda child: unbind(child, name))


def remove_atoms(f: Formula, doomed: Callable[[Formula], bool]) -> Formula:
    """Remove matching atoms from conjunctions."""

    def visit(g: Formula) -> Optional[Formula]:
        if isinstance(g, ATOMS):
            return None if doomed(g) else g
        if isinstance(g, And):
            kept = [r for r in (visit(c) for c in g.conjuncts) if r is not None]
            return conj(*kept) if kept else None

        def required(child: Formula) -> Formula:
            result = visit(child)
            if result is None:
                raise SubstitutionError(f"Removing an atom would leave {g} without content")
            return result

        return map_children(g, required)

    result = visit(f)
    if result is None:
        raise SubstitutionError("Removing atoms would leave an empty formula")
    return result


def merge_variables(f: Formula, drop: Variable, keep: Variable) -> Formula:
    """
    Identify ``drop`` with ``keep``: the binder of ``drop`` and every be-link
    between the two disappear and remaining occurrences of ``drop`` become ``keep``.
    """
    names = {drop.name, keep.name}

    def linking(atom: Formula) -> bool:
        return (
            isinstance(atom, Be)
            and isinstance(atom.left, Variable)
            and isinstance(atom.right, Variable)
            and {atom.left.name, atom.right.name} == names
        )

    g = remove_atoms(f, linking)
    g = unbind(g, drop.name)
    return substitute(g, {drop.name: keep})


def substitute_constant(f: Formula, v: Variable, c: Variable) -> Formula:
    """
    Replace the bound variable ``v`` by the constant ``c`` it is be-linked to.

    Args:
        f: Formula containing ``be(v, c)`` or ``be(c, v)``
        v: Bound variable to eliminate
        c: Constant (a NOO-named variable or one flagged as constant)

    Returns:
        The formula without ``v``'s binder or the be-link
    """
    if v.name == c.name:
        return f
    if not (c.is_constant or c.name in constants(f)):
        raise SubstitutionError(f"{c.name} is not a constant")
    if binding_of(f, v.name) is None:
        raise SubstitutionError(f"{v.name} is not bound")
    linked = any(
        isinstance(atom, Be)
        and {getattr(atom.left, "name", None), getattr(atom.right, "name", None)}
        == {v.name, c.name}
        for atom in iter_atoms(f)
    )
    if not linked:
        raise SubstitutionError(f"No be-link between {v.name} and {c.name}")
    return merge_variables(f, v, Variable(c.name, is_constant=True))


def generalize_constant(f: Formula, c: Variable) -> Formula:
    """Existentially generalize a constant: drop its NOO atom and rename it."""
    if c.name not in constants(f):
        raise SubstitutionError(f"{c.name} is not a constant of the formula")
    g = remove_atoms(f, lambda atom: isinstance(atom, NOO) and atom.var.name == c.name)
    new_var = Variable(fresh_name(variable_names(g)))

    def visit(h: Formula) -> Formula:
        if isinstance(h, Quantified) and h.binding.var.name == c.name:
            declared = h.binding.declared.with_card(Cardinality.UNCONSTRAINED)
            binding = Binding(Quantifier.EXISTS, new_var, declared)
            return Quantified(binding, substitute(h.body, {c.name: new_var}))
        return map_children(h, visit)

    return visit(g)


def conjoin_innermost(f: Formula, g: Formula) -> Formula:
    """Conjoin ``g`` inside the innermost scope of ``f`` so f's binders cover it."""
    clash = {b.var.name for b in bindings(g)} & variable_names(f)
    if clash:
        taken = variable_names(f) | variable_names(g)
        for name in sorted(clash):
            new_name = fresh_name(taken)
            taken.add(new_name)
            g = rename_binder(g, name, new_name)

    def visit(h: Formula) -> Formula:
        if isinstance(h, Quantified):
            return Quantified(h.binding, visit(h.body))
        if isinstance(h, And) and isinstance(h.conjuncts[-1], Quantified):
            return conj(*h.conjuncts[:-1], visit(h.conjuncts[-1]))
        return conj(h, g)

    return visit(f)


def rename_binder(f: Formula, old: str, new: str) -> Formula:
    if isinstance(f, Quantified) and f.binding.var.name == old:
        var = Variable(new, f.binding.var.is_constant)
        return Quantified(replace(f.binding, var=var), substitute(f.body, {old: var}))
    return map_children(f, lambda child: rename_binder(child, old, new))


def enumerate_readings(f: Formula) -> List[Formula]:
    """Split the first disjunction (pre-order) into one formula per disjunct."""

    def split(g: Formula) -> Optional[List[Formula]]:
        if isinstance(g, Or):
            return list(g.disjuncts)
        kids = children(g)
        for i, child in enumerate(kids):
            options = split(child)
            if options is not None:
                return [_replace_child(g, i, option) for option in options]
        return None

    return split(f) or [f]


def _replace_child(f: Formula, index: int, new: Formula) -> Formula:
    position = iter(range(len(children(f))))
    return map_children(f, lambda child: new if next(position) == index else child)


# Serializer

_PREC_IMPLIES, _PREC_OR, _PREC_AND, _PREC_UNARY = 1, 2, 3, 4

_SYMBOLS = {
    True: {"and": " & ", "or": " | ", "implies": " -> ", "not": "~"},
    False: {"and": " ∧ ", "or": " ∨ ", "implies": " ⊃ ", "not": "¬"},
}


def serialize(f: Formula, ascii: bool = True) -> str:
    """
    Render a formula as LF text.

    The ASCII form is the LF DSL accepted by ``parse_lf``; the Unicode form is used
    in traces. Parentheses appear only where precedence or an open quantifier body
    requires them.
    """
    return _render(f, 0, True, ascii)


def _render(f: Formula, min_prec: int, tail: bool, ascii: bool) -> str:
    sym = _SYMBOLS[ascii]
    if isinstance(f, Quantified):
        text = f"{f.binding.render(ascii)} . {_render(f.body, 0, True, ascii)}"
        return text if tail else f"({text})"
    if isinstance(f, Implies):
        wrap = _PREC_IMPLIES < min_prec
        open_tail = True if wrap else tail
        text = (
            _render(f.antecedent, _PREC_OR, False, ascii)
            + sym["implies"]
            + _render(f.consequent, _PREC_IMPLIES, open_tail, ascii)
        )
        return f"({text})" if wrap else text
    if isinstance(f, (And, Or)):
        prec = _PREC_AND if isinstance(f, And) else _PREC_OR
        parts = f.conjuncts if isinstance(f, And) else f.disjuncts
        wrap = prec < min_prec
        open_tail = True if wrap else tail
        rendered = [
            _render(part, prec + 1, open_tail if i == len(parts) - 1 else False, ascii)
            for i, part in enumerate(parts)
        ]
        text = (sym["and"] if isinstance(f, And) else sym["or"]).join(rendered)
        return f"({text})" if wrap else text
    if isinstance(f, Not):
        return sym["not"] + _render(f.body, _PREC_UNARY, tail, ascii)
    if isinstance(f, Typ):
        return f"typ({_render(f.body, 0, True, ascii)})"
    if isinstance(f, Pred):
        return f"{f.name}({','.join(a.render() for a in f.args)})"
    if isinstance(f, StructRel):
        return f"{f.kind}({','.join(a.render() for a in f.args)})"
    if isinstance(f, Modify):
        return f"{f.modifier}({_render(f.inner, 0, True, ascii)})"
    if isinstance(f, NOO):
        return f"NOO({f.var.name},{json.dumps(f.label, ensure_ascii=False)})"
    if isinstance(f, Be):
        return f"be({f.left},{f.right})"
    raise LogicError(f"Cannot serialize {type(f).__name__}")
