import pytest

from stagegraph.errors import CodebookError, IncompleteProfileError, SddError
from stagegraph.ingest import (
    assign_names,
    ingest_table,
    load_sdd_files,
    nanopub_id,
    profile_from_graph,
    read_table,
    row_to_content,
)
from stagegraph.kgraph import QuadStore, iri
from stagegraph.namespaces import (
    PROV_WAS_DERIVED_FROM,
    RDF_TYPE,
    RDFS_LABEL,
    SIO,
    SIO_ATTRIBUTE_OF,
    SIO_EXISTS_AT,
    SIO_HAS_VALUE,
)
from stagegraph.ontology import TumorProfile, build_cst, classify_available, cst, load_thresholds

from conftest import data_path


@pytest.fixture(scope="module")
def seer_sdd():
    return load_sdd_files(data_path("sdd/seer_dictionary.csv"), data_path("sdd/seer_codebook.csv"))


@pytest.fixture(scope="module")
def civic_sdd():
    return load_sdd_files(data_path("sdd/civic_dictionary.csv"), data_path("sdd/civic_codebook.csv"))


@pytest.fixture(scope="module")
def seer_rows():
    return read_table(data_path("tables/seer_synthetic.csv"))


def test_seer_dictionary_maps_29_features(seer_sdd):
    mapping, _ = seer_sdd
    assert len(mapping.mapped_columns()) == 29


def test_civic_dictionary_maps_14_features(civic_sdd):
    mapping, _ = civic_sdd
    assert len(mapping.mapped_columns()) == 14


def test_dangling_attribute_of_rejected():
    from stagegraph.ingest import load_sdd

    with pytest.raises(SddError):
        load_sdd("Column,Attribute,attributeOf,inRelationTo,wasDerivedFrom,existsAt\nAge,sio:Age,??ghost,,,\n", "Column,Value,Target\n")


def test_duplicate_column_rejected():
    from stagegraph.ingest import load_sdd

    text = (
        "Column,Attribute,attributeOf,inRelationTo,wasDerivedFrom,existsAt\n"
        "Age,sio:Age,,,,\nAge,sio:Age,,,,\n"
    )
    with pytest.raises(SddError):
        load_sdd(text, "Column,Value,Target\n")


def test_age_attribute_shape(seer_sdd, seer_rows):
    mapping, codebook = seer_sdd
    store = QuadStore()
    row = seer_rows[0]
    result = ingest_table([row], mapping, codebook, store, "seer", "PatientID")
    assert len(result.nanopubs) == 1
    record = result.nanopubs[0]
    scope = {record.assertion}
    age_attrs = store.find(None, iri(RDF_TYPE), iri(SIO + "Age"), graph_scope=scope)
    assert len(age_attrs) == 1
    age = age_attrs[0].subject
    owners = store.find(age, iri(SIO_ATTRIBUTE_OF), graph_scope=scope)
    assert len(owners) == 1
    assert owners[0].object.value.endswith("/patient")
    values = store.find(age, iri(SIO_HAS_VALUE), graph_scope=scope)
    assert values[0].object.value == row["Age"]
    assert store.find(age, iri(SIO_EXISTS_AT), graph_scope=scope)


def test_empty_table_yields_no_nanopubs(seer_sdd):
    mapping, codebook = seer_sdd
    result = ingest_table([], mapping, codebook, QuadStore(), "seer", "PatientID")
    assert result.nanopubs == []


def test_codebook_miss_is_error_in_strict_mode(seer_sdd):
    mapping, codebook = seer_sdd
    row = {"PatientID": "PX", "Sex": "Unknown", "InSitu": "No", "Metastasis": "No"}
    with pytest.raises(CodebookError):
        ingest_table([row], mapping, codebook, QuadStore(), "seer", "PatientID")


def test_codebook_miss_skips_row_in_lenient_mode(seer_sdd):
    mapping, codebook = seer_sdd
    row = {"PatientID": "PX", "Sex": "Unknown", "InSitu": "No", "Metastasis": "No"}
    result = ingest_table([row], mapping, codebook, QuadStore(), "seer", "PatientID", strict=False)
    assert result.nanopubs == []
    assert result.skipped[0][0] == "PX"


def test_every_attribute_node_has_one_type_and_one_owner(seer_sdd, seer_rows):
    mapping, codebook = seer_sdd
    store = QuadStore()
    result = ingest_table(seer_rows[:25], mapping, codebook, store, "seer", "PatientID")
    for record in result.nanopubs:
        scope = {record.assertion}
        attrs = {
            q.subject
            for q in store.find(None, iri(SIO_ATTRIBUTE_OF), None, graph_scope=scope)
            if "/attr/" in q.subject.value
        }
        for attr in attrs:
            assert len(store.find(attr, iri(RDF_TYPE), graph_scope=scope)) == 1
            assert len(store.find(attr, iri(SIO_ATTRIBUTE_OF), graph_scope=scope)) == 1


def test_cohort_ingestion_round_trip(seer_sdd, seer_rows):
    mapping, codebook = seer_sdd
    store = QuadStore()
    names = assign_names([r["PatientID"] for r in seer_rows], seed=11)
    result = ingest_table(seer_rows, mapping, codebook, store, "seer", "PatientID", names=names)
    assert len(result.nanopubs) == 250
    thresholds = load_thresholds("AJCC8")
    for row in seer_rows[:60]:
        profile = profile_from_graph(store, nanopub_id("seer", row["PatientID"]))
        assert profile == _expected_profile(row)
        if row["TumorSizeMM"] or row["InSitu"] == "Yes":
            classify_available(profile, thresholds)


def _expected_profile(row):
    def bool_cell(col):
        return row[col] == "Yes"

    receptors = {}
    for col, key in (("HER2Status", "her2"), ("ERStatus", "er"), ("PRStatus", "pr")):
        receptors[key] = {"Positive": "Pos", "Negative": "Neg"}.get(row[col])
    grade_map = {
        "Well differentiated (G1)": 1,
        "Moderately differentiated (G2)": 2,
        "Poorly differentiated (G3)": 3,
    }
    return TumorProfile(
        tumor_id=f"https://stagegraph.example/data/seer/{row['PatientID']}/tumor",
        t_size_mm=float(row["TumorSizeMM"]) if row["TumorSizeMM"] else None,
        in_situ=bool_cell("InSitu"),
        chest_wall_or_skin=bool_cell("ChestWallInvolvement"),
        positive_nodes=int(row["PositiveNodes"]) if row["PositiveNodes"] else None,
        micrometastasis_only=bool_cell("Micrometastasis"),
        metastasized=bool_cell("Metastasis"),
        grade=grade_map.get(row["Grade"]),
        **receptors,
    )


def test_patient_and_tumor_labels_from_names(seer_sdd, seer_rows):
    mapping, codebook = seer_sdd
    store = QuadStore()
    names = assign_names([seer_rows[0]["PatientID"]], seed=3)
    result = ingest_table(seer_rows[:1], mapping, codebook, store, "seer", "PatientID", names=names)
    scope = {result.nanopubs[0].assertion}
    labels = {q.object.value for q in store.find(None, iri(RDFS_LABEL), None, graph_scope=scope)}
    name = names[seer_rows[0]["PatientID"]]
    assert name in labels
    assert f"{name}'s tumor" in labels


def test_provenance_records_source(seer_sdd, seer_rows):
    mapping, codebook = seer_sdd
    store = QuadStore()
    result = ingest_table(seer_rows[:1], mapping, codebook, store, "seer", "PatientID")
    record = result.nanopubs[0]
    prov = store.find(None, iri(PROV_WAS_DERIVED_FROM), None, graph_scope={record.provenance})
    assert prov
    assert all(q.object.value.startswith("https://stagegraph.example/source/") for q in prov)


def test_profile_errors_when_metastasis_attr_missing(seer_sdd):
    mapping, codebook = seer_sdd
    store = QuadStore()
    row = {"PatientID": "PY", "TumorSizeMM": "12", "InSitu": "No"}
    ingest_table([row], mapping, codebook, store, "seer", "PatientID")
    with pytest.raises(IncompleteProfileError) as exc:
        profile_from_graph(store, nanopub_id("seer", "PY"))
    assert exc.value.axis == "M"


def test_metastasized_profile_reads_back_metastasized(seer_sdd, seer_rows):
    mapping, codebook = seer_sdd
    store = QuadStore()
    mets_row = next(r for r in seer_rows if r["Metastasis"] == "Yes")
    ingest_table([mets_row], mapping, codebook, store, "seer", "PatientID")
    profile = profile_from_graph(store, nanopub_id("seer", mets_row["PatientID"]))
    assert profile.metastasized is True


def test_evidence_ingestion(civic_sdd):
    mapping, codebook = civic_sdd
    rows = read_table(data_path("tables/civic_synthetic.csv"))
    store = QuadStore()
    result = ingest_table(rows, mapping, codebook, store, "civic", "EvidenceID")
    assert len(result.nanopubs) == len(rows) == 20
    her2_evidence = store.find(
        None, iri(cst("hasMappedTerm")), iri(cst("HER2_Positive_Breast_Cancer"))
    )
    assert her2_evidence
    # the raw disease string is kept as the attribute's literal value
    raw = store.find(her2_evidence[0].subject, iri(SIO_HAS_VALUE))
    assert raw[0].object.value == "Her2-receptor Positive Breast Cancer"


def test_assign_names_deterministic_and_collision_handled():
    ids = [f"R{k}" for k in range(100)]
    first = assign_names(ids, seed=5)
    second = assign_names(list(reversed(ids)), seed=5)
    assert first.assignments == second.assignments
    other_seed = assign_names(ids, seed=6)
    assert first.assignments != other_seed.assignments

    small_corpus = ["Ada", "Bo", "Cy"]
    crowded = assign_names([f"R{k}" for k in range(8)], seed=1, corpus=small_corpus)
    values = list(crowded.assignments.values())
    assert len(set(values)) == 8
    assert any(" 2" in v for v in values)
