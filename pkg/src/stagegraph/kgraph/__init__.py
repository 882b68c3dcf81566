"""In-memory quad store with named graphs, nanopublications, pattern matching, and a Turtle subset."""

from stagegraph.kgraph.model import (
    Binding,
    Quad,
    Term,
    TriplePattern,
    Variable,
    blank,
    iri,
    literal,
    typed_literal,
)
from stagegraph.kgraph.store import Nanopublication, QuadStore
from stagegraph.kgraph.turtle import parse_turtle, serialize_turtle

__all__ = [
    "Binding",
    "Nanopublication",
    "Quad",
    "QuadStore",
    "Term",
    "TriplePattern",
    "Variable",
    "blank",
    "iri",
    "literal",
    "parse_turtle",
    "serialize_turtle",
    "typed_literal",
]
