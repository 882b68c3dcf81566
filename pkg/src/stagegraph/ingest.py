"""Semantic-dictionary-driven conversion of tabular records into nanopublications.

A dictionary maps table columns to attribute classes and entities (virtual
entities are declared with a ``??`` prefix); a codebook normalizes enumerated
cell values onto ontology terms. Each table row becomes one nanopublication
whose assertion graph carries one typed attribute node per mapped column.
"""

from __future__ import annotations

import csv
import io
import random
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from stagegraph.errors import CodebookError, IncompleteProfileError, SddError, UnknownResourceError
from stagegraph.kgraph.model import Term, iri, literal, typed_literal
from stagegraph.kgraph.store import Nanopublication, QuadStore
from stagegraph.namespaces import (
    DATA,
    NP,
    PROV_WAS_ATTRIBUTED_TO,
    PROV_WAS_DERIVED_FROM,
    RDF_TYPE,
    RDFS_LABEL,
    SIO_ATTRIBUTE_OF,
    SIO_EXISTS_AT,
    SIO_HAS_VALUE,
    SIO_IN_RELATION_TO,
    expand,
    local_name,
)
from stagegraph.ontology import TumorProfile, cst

_INT = re.compile(r"^[+-]?\d+$")
_DECIMAL = re.compile(r"^[+-]?\d+\.\d+$")


@dataclass(frozen=True, slots=True)
class SddRow:
    column: str
    attribute_class: str
    attribute_of: str | None = None
    in_relation_to: str | None = None
    was_derived_from: str | None = None
    exists_at: str | None = None

    @property
    def is_virtual(self) -> bool:
        return self.column.startswith("??")


@dataclass(frozen=True)
class DictionaryMapping:
    rows: tuple[SddRow, ...]

    def virtual_entities(self) -> list[SddRow]:
        return [r for r in self.rows if r.is_virtual]

    def mapped_columns(self) -> list[SddRow]:
        return [r for r in self.rows if not r.is_virtual]


@dataclass(frozen=True)
class Codebook:
    entries: dict[tuple[str, str], str]

    def columns(self) -> set[str]:
        return {column for column, _ in self.entries}

    def lookup(self, column: str, value: str) -> str | None:
        return self.entries.get((column, value))


def load_sdd(dict_text: str, codebook_text: str) -> tuple[DictionaryMapping, Codebook]:
    rows: list[SddRow] = []
    seen: set[str] = set()
    for record in csv.DictReader(io.StringIO(dict_text)):
        column = record["Column"].strip()
        if not column:
            continue
        if column in seen:
            raise SddError(f"duplicate column {column!r} in dictionary")
        seen.add(column)
        rows.append(
            SddRow(
                column,
                expand(record["Attribute"].strip()),
                record.get("attributeOf", "").strip() or None,
                record.get("inRelationTo", "").strip() or None,
                expand(record["wasDerivedFrom"].strip()) if record.get("wasDerivedFrom", "").strip() else None,
                record.get("existsAt", "").strip() or None,
            )
        )
    mapping = DictionaryMapping(tuple(rows))
    for row in rows:
        for ref in (row.attribute_of, row.in_relation_to, row.exists_at):
            if ref is not None and ref not in seen:
                raise SddError(f"column {row.column!r} references undeclared {ref!r}")

    entries: dict[tuple[str, str], str] = {}
    for record in csv.DictReader(io.StringIO(codebook_text)):
        column = record["Column"].strip()
        value = record["Value"].strip()
        if not column:
            continue
        entries[(column, value)] = expand(record["Target"].strip())
    return mapping, Codebook(entries)


def load_sdd_files(dict_path: str | Path, codebook_path: str | Path) -> tuple[DictionaryMapping, Codebook]:
    return load_sdd(
        Path(dict_path).read_text(encoding="utf-8"),
        Path(codebook_path).read_text(encoding="utf-8"),
    )


# -- synthetic names ----------------------------------------------------------


@dataclass(frozen=True)
class NameAssignment:
    assignments: dict[str, str]
    seed: int

    def __getitem__(self, row_id: str) -> str:
        return self.assignments[row_id]


def default_name_corpus() -> list[str]:
    text = resources.files("stagegraph").joinpath("data", "names.txt").read_text(encoding="utf-8")
    return [line.strip() for line in text.splitlines() if line.strip()]


def assign_names(row_ids, seed: int, corpus: list[str] | None = None) -> NameAssignment:
    """Deterministic synthetic names; suffix indexes keep them unique past exhaustion."""
    names = list(corpus) if corpus is not None else default_name_corpus()
    if not names:
        raise SddError("name corpus is empty")
    rng = random.Random(seed)
    shuffled = sorted(names)
    rng.shuffle(shuffled)
    assignments: dict[str, str] = {}
    for index, row_id in enumerate(sorted(row_ids)):
        name = shuffled[index % len(shuffled)]
        round_number = index // len(shuffled)
        if round_number:
            name = f"{name} {round_number + 1}"
        assignments[row_id] = name
    return NameAssignment(assignments, seed)


# -- table ingestion ----------------------------------------------------------


Triple = tuple[Term, Term, Term]


@dataclass
class IngestResult:
    nanopubs: list[Nanopublication] = field(default_factory=list)
    skipped: list[tuple[str, str]] = field(default_factory=list)  # (row id, reason)


def _slug(value: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "-", value.strip())


def _cell_terms(column: str, raw: str, codebook: Codebook, row_id: str) -> tuple[Term, Term | None]:
    """(raw literal, optional codebook-mapped term) for one cell."""
    mapped = codebook.lookup(column, raw)
    if mapped is None and column in codebook.columns():
        raise CodebookError(column, raw, row_id)
    if _INT.match(raw):
        value = typed_literal(int(raw))
    elif _DECIMAL.match(raw):
        value = literal(raw, datatype="http://www.w3.org/2001/XMLSchema#decimal")
    else:
        value = literal(raw)
    return value, iri(mapped) if mapped is not None else None


def row_to_content(
    row: dict[str, str],
    mapping: DictionaryMapping,
    codebook: Codebook,
    dataset_id: str,
    row_id: str,
    name: str | None = None,
) -> tuple[list[Triple], list[Triple], list[Triple]]:
    """Assertion/provenance/pubinfo triples for one table row."""
    base = f"{DATA}{dataset_id}/{_slug(row_id)}"
    np_id = nanopub_id(dataset_id, row_id)
    assertion_graph = iri(np_id + "#assertion")

    entity_nodes: dict[str, Term] = {}
    for entity in mapping.virtual_entities():
        entity_nodes[entity.column] = iri(f"{base}/{entity.column.lstrip('?')}")

    assertion: list[Triple] = []
    provenance: list[Triple] = []
    rdf_type = iri(RDF_TYPE)
    attribute_of = iri(SIO_ATTRIBUTE_OF)

    for entity in mapping.virtual_entities():
        node = entity_nodes[entity.column]
        assertion.append((node, rdf_type, iri(entity.attribute_class)))
        if entity.attribute_of:
            assertion.append((node, attribute_of, entity_nodes[entity.attribute_of]))
        if entity.was_derived_from:
            provenance.append((node, iri(PROV_WAS_DERIVED_FROM), iri(entity.was_derived_from)))
    if name is not None:
        if "??patient" in entity_nodes:
            assertion.append((entity_nodes["??patient"], iri(RDFS_LABEL), literal(name)))
        if "??tumor" in entity_nodes:
            assertion.append((entity_nodes["??tumor"], iri(RDFS_LABEL), literal(f"{name}'s tumor")))

    for sdd_row in mapping.mapped_columns():
        raw = (row.get(sdd_row.column) or "").strip()
        if not raw:
            continue
        attr = iri(f"{base}/attr/{_slug(sdd_row.column)}")
        assertion.append((attr, rdf_type, iri(sdd_row.attribute_class)))
        if sdd_row.attribute_of:
            assertion.append((attr, attribute_of, entity_nodes[sdd_row.attribute_of]))
        value, mapped = _cell_terms(sdd_row.column, raw, codebook, row_id)
        assertion.append((attr, iri(SIO_HAS_VALUE), value))
        if mapped is not None:
            assertion.append((attr, iri(cst("hasMappedTerm")), mapped))
        if sdd_row.in_relation_to:
            assertion.append((attr, iri(SIO_IN_RELATION_TO), entity_nodes[sdd_row.in_relation_to]))
        if sdd_row.exists_at:
            assertion.append((attr, iri(SIO_EXISTS_AT), entity_nodes[sdd_row.exists_at]))
        if sdd_row.was_derived_from:
            provenance.append((attr, iri(PROV_WAS_DERIVED_FROM), iri(sdd_row.was_derived_from)))

    sources = sorted({t[2].value for t in provenance if t[1].value == PROV_WAS_DERIVED_FROM})
    for source in sources:
        provenance.append((assertion_graph, iri(PROV_WAS_DERIVED_FROM), iri(source)))
    pubinfo: list[Triple] = [
        (iri(np_id), iri(PROV_WAS_ATTRIBUTED_TO), literal("stagegraph-ingest")),
        (iri(np_id), iri(cst("fromDataset")), literal(dataset_id)),
    ]
    return assertion, provenance, pubinfo


def nanopub_id(dataset_id: str, row_id: str) -> str:
    return f"{NP}{dataset_id}/{_slug(row_id)}"


def ingest_table(
    rows: list[dict[str, str]],
    mapping: DictionaryMapping,
    codebook: Codebook,
    store: QuadStore,
    dataset_id: str,
    id_column: str,
    names: NameAssignment | None = None,
    strict: bool = True,
) -> IngestResult:
    """One nanopublication per row. In strict mode an unmapped enumerated value
    aborts the run; in lenient mode the row is skipped and reported."""
    result = IngestResult()
    for index, row in enumerate(rows):
        row_id = (row.get(id_column) or "").strip()
        if not row_id:
            raise SddError(f"row {index} lacks the identifier column {id_column!r}")
        name = names[row_id] if names is not None and row_id in names.assignments else None
        try:
            assertion, provenance, pubinfo = row_to_content(
                row, mapping, codebook, dataset_id, row_id, name
            )
        except CodebookError as error:
            if strict:
                raise
            result.skipped.append((row_id, str(error)))
            continue
        result.nanopubs.append(
            store.new_nanopub(assertion, provenance, pubinfo, np_id=nanopub_id(dataset_id, row_id))
        )
    return result


# -- reading tumor profiles back from the graph --------------------------------


_BOOL_ATTRS = {
    cst("InSituStatus"): "in_situ",
    cst("MicrometastasisStatus"): "micrometastasis_only",
    cst("MetastasisStatus"): "metastasized",
    cst("ChestWallStatus"): "chest_wall_or_skin",
}

_RECEPTOR_ATTRS = {
    cst("HER2Status"): "her2",
    cst("ERStatus"): "er",
    cst("PRStatus"): "pr",
}


def _as_bool(term: Term | None, raw: Term | None) -> bool:
    if term is not None and term.is_iri:
        return term.value == cst("Yes")
    if raw is not None:
        return raw.value.strip().lower() in ("true", "yes", "1")
    return False


def profile_from_graph(store: QuadStore, np_id: str) -> TumorProfile:
    """Rebuild the raw TumorProfile from an ingested patient nanopublication."""
    record = store.live_nanopub(np_id)
    if record is None:
        raise UnknownResourceError(f"no live nanopublication {np_id}")
    scope = {record.assertion}
    tumors = store.find(None, iri(RDF_TYPE), iri(cst("Tumor")), graph_scope=scope)
    if not tumors:
        raise IncompleteProfileError("T", f"{np_id} has no tumor entity")
    tumor = tumors[0].subject

    fields: dict[str, object] = {"tumor_id": tumor.value}
    seen_mandatory: set[str] = set()
    for attr_quad in store.find(None, iri(SIO_ATTRIBUTE_OF), tumor, graph_scope=scope):
        attr = attr_quad.subject
        types = [q.object.value for q in store.find(attr, iri(RDF_TYPE), graph_scope=scope)]
        values = [q.object for q in store.find(attr, iri(SIO_HAS_VALUE), graph_scope=scope)]
        mapped_terms = [
            q.object for q in store.find(attr, iri(cst("hasMappedTerm")), graph_scope=scope)
        ]
        if not types or not values:
            continue
        attr_class, value = types[0], values[0]
        mapped = mapped_terms[0] if mapped_terms else None
        if attr_class == cst("TumorSize"):
            fields["t_size_mm"] = float(value.value)
        elif attr_class == cst("PositiveNodeCount"):
            fields["positive_nodes"] = int(value.value)
        elif attr_class in _BOOL_ATTRS:
            fields[_BOOL_ATTRS[attr_class]] = _as_bool(mapped, value)
            seen_mandatory.add(attr_class)
        elif attr_class == cst("GradeStatus") and mapped is not None:
            name = local_name(mapped.value)
            if name.startswith("Grade"):
                fields["grade"] = int(name.removeprefix("Grade"))
        elif attr_class in _RECEPTOR_ATTRS and mapped is not None:
            name = local_name(mapped.value)
            if name.endswith("_Pos"):
                fields[_RECEPTOR_ATTRS[attr_class]] = "Pos"
            elif name.endswith("_Neg"):
                fields[_RECEPTOR_ATTRS[attr_class]] = "Neg"
            # indeterminate values leave the receptor unset

    for mandatory, axis in ((cst("InSituStatus"), "T"), (cst("MetastasisStatus"), "M")):
        if mandatory not in seen_mandatory:
            raise IncompleteProfileError(axis, f"{np_id} lacks {local_name(mandatory)}")
    return TumorProfile(**fields)  # type: ignore[arg-type]


def read_table(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))
