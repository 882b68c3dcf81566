import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import isomorphic
from stagegraph.errors import TurtleParseError
from stagegraph.kgraph import Quad, blank, iri, literal, parse_turtle, serialize_turtle
from stagegraph.kgraph.io import dump_store, load_store
from stagegraph.kgraph.store import QuadStore
from stagegraph.kgraph.turtle import DEFAULT_GRAPH
from stagegraph.namespaces import (
    CST,
    OWL_CLASS,
    OWL_INTERSECTION_OF,
    RDF_FIRST,
    RDF_NIL,
    RDF_REST,
    RDF_TYPE,
    RDFS_SUBCLASSOF,
    XSD_DECIMAL,
    XSD_INTEGER,
)

AXIOM_TEXT = """
@prefix cst: <https://stagegraph.example/cst#> .
[] a owl:Class; rdfs:subClassOf cst:AJCC7_Stage_IA;
    owl:intersectionOf ( cst:T1 cst:N0 cst:M0 ).
"""


def test_parse_anonymous_intersection_axiom():
    quads = parse_turtle(AXIOM_TEXT)
    by_pred = {}
    for q in quads:
        by_pred.setdefault(q.predicate.value, []).append(q)
    class_nodes = [q.subject for q in by_pred[RDF_TYPE] if q.object == iri(OWL_CLASS)]
    assert len(class_nodes) == 1
    node = class_nodes[0]
    assert node.is_blank
    assert any(
        q.subject == node and q.object == iri(CST + "AJCC7_Stage_IA")
        for q in by_pred[RDFS_SUBCLASSOF]
    )
    # walk the collection
    head = next(q.object for q in by_pred[OWL_INTERSECTION_OF] if q.subject == node)
    items = []
    first = {q.subject: q.object for q in by_pred[RDF_FIRST]}
    rest = {q.subject: q.object for q in by_pred[RDF_REST]}
    cursor = head
    while cursor != iri(RDF_NIL):
        items.append(first[cursor])
        cursor = rest[cursor]
    assert items == [iri(CST + "T1"), iri(CST + "N0"), iri(CST + "M0")]


def test_serialize_empty_graph_is_prefix_free_document():
    assert serialize_turtle([]).strip() == ""


def test_round_trip_axiom_isomorphic():
    quads = parse_turtle(AXIOM_TEXT)
    text = serialize_turtle(quads)
    again = parse_turtle(text)
    assert isomorphic(quads, again)


def test_parse_error_carries_position():
    with pytest.raises(TurtleParseError) as exc:
        parse_turtle("@prefix cst: <https://stagegraph.example/cst#> .\ncst:a cst:b %%% .")
    assert exc.value.line == 2
    assert exc.value.column > 0


def test_unknown_prefix_is_an_error():
    with pytest.raises(TurtleParseError):
        parse_turtle("zzz:a zzz:b zzz:c .")


def test_numeric_boolean_and_tagged_literals():
    text = 'cst:p cst:size 15 ; cst:ratio 0.5 ; cst:flag true ; cst:name "Eve"@en .'
    quads = parse_turtle(text)
    objects = {q.object for q in quads}
    assert literal("15", datatype=XSD_INTEGER) in objects
    assert literal("0.5", datatype=XSD_DECIMAL) in objects
    assert literal("Eve", language="en") in objects
    again = parse_turtle(serialize_turtle(quads))
    assert isomorphic(quads, again)


def test_noncanonical_numeric_lexical_forms_survive():
    # "4 2" is not a valid bare token, so it must stay quoted with its datatype
    quads = parse_turtle('cst:p cst:size "4 2"^^xsd:integer .')
    text = serialize_turtle(quads)
    assert '"4 2"' in text
    assert isomorphic(quads, parse_turtle(text))


def _random_term(draw, blanks):
    choice = draw(st.integers(0, 3))
    if choice == 0:
        return iri(CST + draw(st.sampled_from("ABCDE")))
    if choice == 1:
        return blank(draw(st.sampled_from(blanks)))
    if choice == 2:
        return literal(draw(st.text(alphabet="ab \n\"\\", max_size=6)))
    return literal(str(draw(st.integers(0, 99))), datatype=XSD_INTEGER)


@st.composite
def random_graphs(draw):
    blanks = ["x1", "x2", "x3"]
    preds = [iri(CST + p) for p in ("p", "q", "r")]
    n = draw(st.integers(0, 25))
    quads = set()
    for _ in range(n):
        subject = draw(st.one_of(st.just(iri(CST + draw(st.sampled_from("ABCDE")))), st.just(blank(draw(st.sampled_from(blanks))))))
        quads.add(
            Quad(subject, draw(st.sampled_from(preds)), _random_term(draw, blanks), iri(DEFAULT_GRAPH))
        )
    return quads


@settings(max_examples=120, deadline=None)
@given(random_graphs())
def test_round_trip_random_graphs(quads):
    text = serialize_turtle(quads)
    again = parse_turtle(text)
    assert isomorphic(quads, again)


def test_round_trip_collection_heavy_graph():
    text = """
cst:Combo cst:uses ( cst:T1 cst:N0 cst:M0 cst:Grade1 cst:HER2_Neg cst:ER_Neg cst:PR_Pos ) .
cst:Other cst:uses ( ) .
"""
    quads = parse_turtle(text)
    assert isomorphic(quads, parse_turtle(serialize_turtle(quads)))


def test_blank_cycle_round_trips():
    text = "_:a cst:p _:b . _:b cst:p _:a ."
    quads = parse_turtle(text)
    assert isomorphic(quads, parse_turtle(serialize_turtle(quads)))


def test_store_dump_and_load_round_trip(tmp_path):
    store = QuadStore()
    g1 = "https://stagegraph.example/graph/one"
    store.insert_all(parse_turtle(AXIOM_TEXT, graph=g1, blanks=store.blanks))
    store.new_nanopub(
        [(iri(CST + "pat"), iri(RDF_TYPE), iri(CST + "Patient"))],
        np_id="https://stagegraph.example/np/p1",
    )
    dump_store(store, tmp_path)
    loaded = load_store(tmp_path)
    assert loaded.graphs() == store.graphs()
    for graph in store.graphs():
        assert isomorphic(store.graph_quads(graph), loaded.graph_quads(graph))
    assert [r.id for r in loaded.nanopubs()] == [r.id for r in store.nanopubs()]
    # dump again: byte-identical
    first = (tmp_path / "store.ttl").read_text()
    dump_store(loaded, tmp_path)
    assert (tmp_path / "store.ttl").read_text() == first
