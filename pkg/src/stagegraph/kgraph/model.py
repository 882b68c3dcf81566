"""Graph substrate: IRI/blank/literal terms, quads, and triple patterns."""

from __future__ import annotations

from dataclasses import dataclass, field

from stagegraph.errors import InvalidQuadError, InvalidTermError
from stagegraph.namespaces import XSD_BOOLEAN, XSD_DECIMAL, XSD_INTEGER

IRI_KIND = "iri"
BLANK_KIND = "blank"
LITERAL_KIND = "literal"


@dataclass(frozen=True, slots=True)
class Term:
    """One node of the graph: an IRI, a blank node, or a literal.

    Literals may carry either a datatype IRI or a language tag, never both.
    IRI values must be absolute (contain a scheme separator).
    """

    kind: str
    value: str
    datatype: str | None = None
    language: str | None = None

    def __post_init__(self):
        if self.kind == IRI_KIND:
            if ":" not in self.value:
                raise InvalidTermError(f"not an absolute IRI: {self.value!r}")
            if self.datatype or self.language:
                raise InvalidTermError("IRIs carry no datatype or language")
        elif self.kind == BLANK_KIND:
            if not self.value:
                raise InvalidTermError("blank node needs an identifier")
            if self.datatype or self.language:
                raise InvalidTermError("blank nodes carry no datatype or language")
        elif self.kind == LITERAL_KIND:
            if self.datatype is not None and self.language is not None:
                raise InvalidTermError("a literal never has both datatype and language")
        else:
            raise InvalidTermError(f"unknown term kind {self.kind!r}")

    @property
    def is_iri(self) -> bool:
        return self.kind == IRI_KIND

    @property
    def is_blank(self) -> bool:
        return self.kind == BLANK_KIND

    @property
    def is_literal(self) -> bool:
        return self.kind == LITERAL_KIND

    def sort_key(self) -> tuple:
        return (self.kind, self.value, self.datatype or "", self.language or "")

    def __repr__(self):
        if self.kind == IRI_KIND:
            return f"<{self.value}>"
        if self.kind == BLANK_KIND:
            return f"_:{self.value}"
        suffix = ""
        if self.datatype:
            suffix = f"^^<{self.datatype}>"
        elif self.language:
            suffix = f"@{self.language}"
        return f'"{self.value}"{suffix}'


def iri(value: str) -> Term:
    return Term(IRI_KIND, value)


def blank(value: str) -> Term:
    return Term(BLANK_KIND, value)


def literal(value: str, datatype: str | None = None, language: str | None = None) -> Term:
    return Term(LITERAL_KIND, value, datatype, language)


def typed_literal(value) -> Term:
    """Literal from a native Python value, choosing the matching XSD datatype."""
    if isinstance(value, bool):
        return literal("true" if value else "false", datatype=XSD_BOOLEAN)
    if isinstance(value, int):
        return literal(str(value), datatype=XSD_INTEGER)
    if isinstance(value, float):
        text = repr(value)
        if "e" in text or "E" in text:
            text = f"{value:f}"
        if "." not in text:
            text += ".0"
        return literal(text, datatype=XSD_DECIMAL)
    return literal(str(value))


@dataclass(frozen=True, slots=True)
class Quad:
    """A triple in a named graph. Predicate and graph are IRIs; subject is never a literal."""

    subject: Term
    predicate: Term
    object: Term
    graph: Term

    def __post_init__(self):
        if self.subject.is_literal:
            raise InvalidQuadError(f"literal subject: {self.subject!r}")
        if not self.predicate.is_iri:
            raise InvalidQuadError(f"non-IRI predicate: {self.predicate!r}")
        if not self.graph.is_iri:
            raise InvalidQuadError(f"non-IRI graph: {self.graph!r}")

    def triple(self) -> tuple[Term, Term, Term]:
        return (self.subject, self.predicate, self.object)

    def sort_key(self) -> tuple:
        return (
            self.graph.sort_key(),
            self.subject.sort_key(),
            self.predicate.sort_key(),
            self.object.sort_key(),
        )


@dataclass(frozen=True, slots=True)
class Variable:
    """Named placeholder in a triple pattern."""

    name: str

    def __repr__(self):
        return f"?{self.name}"


PatternPart = Term | Variable


@dataclass(frozen=True, slots=True)
class TriplePattern:
    """Subject/predicate/object pattern; each position is a Term or a Variable.

    All-constant patterns are legal and act as existence checks.
    """

    subject: PatternPart
    predicate: PatternPart
    object: PatternPart

    def variables(self) -> set[str]:
        return {p.name for p in (self.subject, self.predicate, self.object) if isinstance(p, Variable)}

    def substitute(self, binding: "Binding") -> "TriplePattern":
        def fill(part: PatternPart) -> PatternPart:
            if isinstance(part, Variable) and part.name in binding:
                return binding[part.name]
            return part

        return TriplePattern(fill(self.subject), fill(self.predicate), fill(self.object))


Binding = dict[str, Term]


def binding_sort_key(binding: Binding) -> tuple:
    """Canonical ordering of solutions: lexicographic over (name, term) pairs."""
    return tuple((name, *binding[name].sort_key()) for name in sorted(binding))


@dataclass
class BlankFactory:
    """Mints blank identifiers unique within one store or parse scope."""

    prefix: str = "b"
    counter: int = field(default=0)

    def fresh(self) -> Term:
        self.counter += 1
        return blank(f"{self.prefix}{self.counter}")
