"""End-to-end orchestration: configuration, knowledge-graph construction,
patient classification, inference, and re-staging. The CLI and the HTTP
service are both thin layers over the steps defined here.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from stagegraph.analytics import RestageResult, TransitionMatrix, build_matrix, restage_cohort
from stagegraph.errors import StagegraphError
from stagegraph.inference import (
    FixpointReport,
    InferenceEngine,
    builtin_rules,
    staging_rule_to_inference_rule,
)
from stagegraph.ingest import (
    assign_names,
    ingest_table,
    load_sdd_files,
    profile_from_graph,
    read_table,
)
from stagegraph.kgraph.io import dump_store, load_store
from stagegraph.kgraph.model import iri, literal
from stagegraph.kgraph.store import QuadStore
from stagegraph.mapcompiler import (
    AxiomSet,
    CountReport,
    MapFile,
    StagingRule,
    compile_edition,
    default_maps_dir,
)
from stagegraph.namespaces import (
    PROV_WAS_ATTRIBUTED_TO,
    PROV_WAS_DERIVED_FROM,
    RDF_TYPE,
    SIO_ATTRIBUTE_OF,
)
from stagegraph.ontology import (
    CstOntology,
    ThresholdTable,
    build_cst,
    classify_available,
    cst,
    default_threshold_path,
)

CONFIG_ENV = "STAGEGRAPH_CONFIG"
CLASSIFIER_NAME = "profile-classification"

_PKG_DATA = Path(__file__).parent / "data"


@dataclass(frozen=True)
class ServiceConfig:
    maps_ajcc7: Path = _PKG_DATA / "maps" / "ajcc7"
    maps_ajcc8: Path = _PKG_DATA / "maps" / "ajcc8"
    thresholds_ajcc7: Path = _PKG_DATA / "thresholds" / "ajcc7.csv"
    thresholds_ajcc8: Path = _PKG_DATA / "thresholds" / "ajcc8.csv"
    patients_table: Path = _PKG_DATA / "tables" / "seer_synthetic.csv"
    evidence_table: Path = _PKG_DATA / "tables" / "civic_synthetic.csv"
    patients_sdd: Path = _PKG_DATA / "sdd" / "seer_dictionary.csv"
    patients_codebook: Path = _PKG_DATA / "sdd" / "seer_codebook.csv"
    evidence_sdd: Path = _PKG_DATA / "sdd" / "civic_dictionary.csv"
    evidence_codebook: Path = _PKG_DATA / "sdd" / "civic_codebook.csv"
    patients_dataset: str = "seer"
    evidence_dataset: str = "civic"
    patients_id_column: str = "PatientID"
    evidence_id_column: str = "EvidenceID"
    store_dir: Path = Path("stagegraph-store")
    names_seed: int = 42
    strict_codebook: bool = True
    max_iterations: int = 100
    port: int = 8000

    def validated(self) -> "ServiceConfig":
        for name in (
            "maps_ajcc7", "maps_ajcc8", "thresholds_ajcc7", "thresholds_ajcc8",
            "patients_table", "evidence_table", "patients_sdd", "patients_codebook",
            "evidence_sdd", "evidence_codebook",
        ):
            path = getattr(self, name)
            if not Path(path).exists():
                raise StagegraphError(f"configured path for {name} does not exist: {path}")
        return self


def load_config(overrides: dict | None = None, config_path: str | None = None) -> ServiceConfig:
    """Defaults <- optional JSON config (STAGEGRAPH_CONFIG) <- explicit overrides."""
    config = ServiceConfig()
    path = config_path or os.environ.get(CONFIG_ENV)
    if path:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        config = _apply(config, payload)
    if overrides:
        config = _apply(config, {k: v for k, v in overrides.items() if v is not None})
    return config


def _apply(config: ServiceConfig, payload: dict) -> ServiceConfig:
    known = {f.name: f.type for f in fields(ServiceConfig)}
    updates = {}
    for key, value in payload.items():
        if key not in known:
            raise StagegraphError(f"unknown config key {key!r}")
        current = getattr(config, key)
        updates[key] = Path(value) if isinstance(current, Path) else type(current)(value)
    return replace(config, **updates)


@dataclass
class World:
    """A loaded knowledge graph plus everything needed to query it."""

    config: ServiceConfig
    store: QuadStore
    ontology: CstOntology
    rules_by_name: dict[str, StagingRule]
    inference_rules: list
    thresholds: ThresholdTable
    count_reports: dict[str, CountReport] = field(default_factory=dict)
    map_files: dict[str, list[MapFile]] = field(default_factory=dict)
    axioms: dict[str, AxiomSet] = field(default_factory=dict)


def compile_rules(config: ServiceConfig, ontology: CstOntology) -> World:
    store = QuadStore()
    store.insert_all(ontology.quads())
    world = World(
        config,
        store,
        ontology,
        {},
        [],
        load_thresholds_checked(config),
    )
    all_rules = builtin_rules()
    for edition, directory in (("AJCC7", config.maps_ajcc7), ("AJCC8", config.maps_ajcc8)):
        files, axioms, rules, report = compile_edition(directory, ontology)
        world.map_files[edition] = files
        world.axioms[edition] = axioms
        world.count_reports[edition] = report
        for rule in rules:
            world.rules_by_name[rule.name] = rule
        all_rules.extend(staging_rule_to_inference_rule(r) for r in rules)
    world.inference_rules = all_rules
    return world


def load_thresholds_checked(config: ServiceConfig) -> ThresholdTable:
    """Single classification pass requires both editions' threshold tables to agree."""
    t7 = Path(config.thresholds_ajcc7).read_text(encoding="utf-8")
    t8 = Path(config.thresholds_ajcc8).read_text(encoding="utf-8")
    if t7 != t8:
        raise StagegraphError(
            "per-edition threshold tables diverge; single-pass feature "
            "classification requires identical tables"
        )
    return ThresholdTable.from_csv(config.thresholds_ajcc7)


def ingest_step(world: World) -> dict[str, int]:
    """Load both fixture tables into the store as nanopublications."""
    config = world.config
    mapping, codebook = load_sdd_files(config.patients_sdd, config.patients_codebook)
    rows = read_table(config.patients_table)
    names = assign_names([r[config.patients_id_column] for r in rows], config.names_seed)
    patients = ingest_table(
        rows, mapping, codebook, world.store, config.patients_dataset,
        config.patients_id_column, names=names, strict=config.strict_codebook,
    )
    ev_mapping, ev_codebook = load_sdd_files(config.evidence_sdd, config.evidence_codebook)
    ev_rows = read_table(config.evidence_table)
    evidence = ingest_table(
        ev_rows, ev_mapping, ev_codebook, world.store, config.evidence_dataset,
        config.evidence_id_column, strict=config.strict_codebook,
    )
    return {
        "patients": len(patients.nanopubs),
        "patients_skipped": len(patients.skipped),
        "evidence": len(evidence.nanopubs),
        "evidence_skipped": len(evidence.skipped),
    }


def patient_nanopub_ids(store: QuadStore) -> list[str]:
    """Live nanopublications whose assertion graph holds a tumor entity."""
    ids = []
    for record in store.live_nanopubs():
        if store.find(None, iri(RDF_TYPE), iri(cst("Tumor")), graph_scope={record.assertion}):
            ids.append(record.id)
    return sorted(ids)


def classify_step(world: World) -> int:
    """Derive categorical feature classes for every patient and publish them as
    classification nanopublications citing the patient assertion graph."""
    classified = 0
    for np_id in patient_nanopub_ids(world.store):
        if np_id.endswith("/classification"):
            continue
        profile = profile_from_graph(world.store, np_id)
        classes = classify_available(profile, world.thresholds)
        if not classes:
            continue
        tumor = iri(profile.tumor_id)
        class_np = np_id + "/classification"
        assertion = []
        for axis in sorted(classes):
            node = iri(f"{profile.tumor_id}/feature/{axis}")
            assertion.append((node, iri(RDF_TYPE), iri(classes[axis])))
            assertion.append((node, iri(SIO_ATTRIBUTE_OF), tumor))
        assertion_graph = iri(class_np + "#assertion")
        provenance = [
            (assertion_graph, iri(PROV_WAS_DERIVED_FROM), iri(np_id + "#assertion")),
            (assertion_graph, iri(cst("inferredBy")), literal(CLASSIFIER_NAME)),
        ]
        pubinfo = [(iri(class_np), iri(PROV_WAS_ATTRIBUTED_TO), literal("stagegraph-classifier"))]
        world.store.new_nanopub(assertion, provenance, pubinfo, np_id=class_np)
        classified += 1
    return classified


def infer_step(world: World) -> FixpointReport:
    engine = InferenceEngine(
        world.store,
        world.inference_rules,
        world.ontology,
        max_iterations=world.config.max_iterations,
    )
    return engine.run()


def restage_step(world: World, from_edition: str, to_edition: str) -> tuple[RestageResult, TransitionMatrix]:
    patients = [
        np_id
        for np_id in patient_nanopub_ids(world.store)
        if not np_id.endswith("/classification")
    ]
    result = restage_cohort(
        world.store, patients, from_edition, to_edition, world.rules_by_name, world.ontology
    )
    matrix = build_matrix(
        result.changes, tuple(result.exclusions), from_edition, to_edition
    )
    return result, matrix


def save_world(world: World) -> None:
    dump_store(world.store, world.config.store_dir)


def load_world(config: ServiceConfig) -> World:
    world = compile_rules(config, build_cst())
    store_dir = Path(config.store_dir)
    if not (store_dir / "store.ttl").exists():
        raise StagegraphError(
            f"no knowledge graph at {store_dir}; run the ingest and infer steps first"
        )
    world.store = load_store(store_dir)
    return world


def bootstrap_world(config: ServiceConfig, persist: bool = False) -> World:
    """Full pipeline in memory: compile, ingest, classify, infer."""
    world = compile_rules(config, build_cst())
    ingest_step(world)
    classify_step(world)
    infer_step(world)
    if persist:
        save_world(world)
    return world
