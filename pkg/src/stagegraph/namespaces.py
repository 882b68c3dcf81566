"""IRI namespaces and well-known terms used throughout the knowledge graph."""

RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
OWL = "http://www.w3.org/2002/07/owl#"
XSD = "http://www.w3.org/2001/XMLSchema#"
PROV = "http://www.w3.org/ns/prov#"
SIO = "http://semanticscience.org/resource/"

# Cancer staging terms: feature classes, stage classes, and staging properties.
CST = "https://stagegraph.example/cst#"

# Minting bases for ingested entities and derived nanopublications.
DATA = "https://stagegraph.example/data/"
NP = "https://stagegraph.example/np/"

# External vocabularies carried as opaque identifiers from the codebooks.
NCIT = "http://purl.obolibrary.org/obo/NCIT_"
EFO = "http://www.ebi.ac.uk/efo/EFO_"
DOID = "http://purl.obolibrary.org/obo/DOID_"

PREFIXES = {
    "rdf": RDF,
    "rdfs": RDFS,
    "owl": OWL,
    "xsd": XSD,
    "prov": PROV,
    "sio": SIO,
    "cst": CST,
    "data": DATA,
    "np": NP,
    "ncit": NCIT,
    "efo": EFO,
    "doid": DOID,
}

RDF_TYPE = RDF + "type"
RDF_FIRST = RDF + "first"
RDF_REST = RDF + "rest"
RDF_NIL = RDF + "nil"

RDFS_LABEL = RDFS + "label"
RDFS_COMMENT = RDFS + "comment"
RDFS_SUBCLASSOF = RDFS + "subClassOf"
RDFS_SUBPROPERTYOF = RDFS + "subPropertyOf"

OWL_CLASS = OWL + "Class"
OWL_OBJECT_PROPERTY = OWL + "ObjectProperty"
OWL_EQUIVALENT_CLASS = OWL + "equivalentClass"
OWL_INVERSE_OF = OWL + "inverseOf"
OWL_INTERSECTION_OF = OWL + "intersectionOf"

PROV_USED = PROV + "used"
PROV_WAS_DERIVED_FROM = PROV + "wasDerivedFrom"
PROV_WAS_ATTRIBUTED_TO = PROV + "wasAttributedTo"
PROV_VALUE = PROV + "value"

SIO_ATTRIBUTE_OF = SIO + "attributeOf"
SIO_HAS_VALUE = SIO + "hasValue"
SIO_EXISTS_AT = SIO + "existsAt"
SIO_IN_RELATION_TO = SIO + "inRelationTo"

XSD_STRING = XSD + "string"
XSD_INTEGER = XSD + "integer"
XSD_DECIMAL = XSD + "decimal"
XSD_BOOLEAN = XSD + "boolean"


def expand(qname: str) -> str:
    """Expand a prefixed name like ``cst:T1`` against the built-in prefix table.

    Absolute IRIs (or anything whose prefix is unknown) pass through unchanged.
    """
    if ":" not in qname:
        return qname
    prefix, local = qname.split(":", 1)
    base = PREFIXES.get(prefix)
    if base is None or local.startswith("//"):
        return qname
    return base + local


def shrink(iri: str) -> str:
    """Compact an IRI to prefixed form when a built-in prefix matches."""
    best = None
    for prefix, base in PREFIXES.items():
        if iri.startswith(base) and (best is None or len(base) > len(PREFIXES[best])):
            best = prefix
    if best is None:
        return iri
    return best + ":" + iri[len(PREFIXES[best]):]


def local_name(iri: str) -> str:
    """Last path/fragment segment of an IRI, used as a label fallback."""
    for sep in ("#", "/", ":"):
        if sep in iri:
            tail = iri.rsplit(sep, 1)[1]
            if tail:
                return tail
    return iri
