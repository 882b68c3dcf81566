"""Assembly of the four-section patient report from the knowledge graph."""

from __future__ import annotations

from stagegraph.analytics import direction_of
from stagegraph.errors import UnknownResourceError
from stagegraph.inference import link_treatments, stage
from stagegraph.ingest import nanopub_id, profile_from_graph
from stagegraph.kgraph.model import iri
from stagegraph.namespaces import (
    PROV_USED,
    PROV_VALUE,
    RDF_TYPE,
    RDFS_LABEL,
    SIO_ATTRIBUTE_OF,
    SIO_HAS_VALUE,
    local_name,
)
from stagegraph.ontology import AXIS_NAMES, classify_available, cst, stage_code
from stagegraph.pipeline import World
from stagegraph.service import schemas

BADGES = {"up": "up-staged", "down": "down-staged", "none": "no change"}

_DEMOGRAPHIC_ATTRS = {
    "Age": "age",
    "BiologicalSex": "sex",
    "Race": "race",
    "Ethnicity": "ethnicity",
    "MaritalStatus": "marital_status",
    "Year": "year_of_diagnosis",
    "VitalStatus": "vital_status",
    "SurvivalMonths": "survival_months",
}

_EVIDENCE_FIELDS = {
    "Drug": "drug",
    "EvidenceLevel": "evidence_level",
    "TrustRating": "trust_rating",
    "SourceReference": "source",
    "EvidenceStatus": "status",
    "Rating": "rating",
}


def edition_token(value: str) -> str:
    token = value.strip().upper()
    if token in ("AJCC7", "AJCC8"):
        return token
    raise UnknownResourceError(value)


def list_patients(world: World) -> list[schemas.PatientSummary]:
    out = []
    dataset_prefix = f"/{world.config.patients_dataset}/"
    for record in world.store.live_nanopubs():
        if record.id.endswith("/classification") or dataset_prefix not in record.id:
            continue
        scope = {record.assertion}
        patients = world.store.find(None, iri(RDF_TYPE), iri(cst("Patient")), graph_scope=scope)
        if not patients:
            continue
        labels = world.store.find(patients[0].subject, iri(RDFS_LABEL), graph_scope=scope)
        out.append(
            schemas.PatientSummary(
                id=local_name(record.id),
                name=labels[0].object.value if labels else None,
            )
        )
    return sorted(out, key=lambda p: p.id)


def _stage_info(world: World, stage_iri: str) -> schemas.StageInfo:
    klass = world.ontology.stages[stage_iri]
    return schemas.StageInfo(
        edition=klass.edition,
        code=klass.code,
        iri=stage_iri,
        label=world.ontology.lookup_label(stage_iri),
    )


def _demographics(world: World, record, scope) -> tuple[str | None, dict[str, str]]:
    patients = world.store.find(None, iri(RDF_TYPE), iri(cst("Patient")), graph_scope=scope)
    if not patients:
        return None, {}
    patient = patients[0].subject
    labels = world.store.find(patient, iri(RDFS_LABEL), graph_scope=scope)
    name = labels[0].object.value if labels else None
    demographics: dict[str, str] = {}
    for attr_quad in world.store.find(None, iri(SIO_ATTRIBUTE_OF), patient, graph_scope=scope):
        attr = attr_quad.subject
        types = world.store.find(attr, iri(RDF_TYPE), graph_scope=scope)
        values = world.store.find(attr, iri(SIO_HAS_VALUE), graph_scope=scope)
        if not types or not values:
            continue
        key = _DEMOGRAPHIC_ATTRS.get(local_name(types[0].object.value))
        if key:
            demographics[key] = values[0].object.value
    return name, demographics


def _stage_explanation(world: World, tumor: str, stage_iri: str) -> tuple[str | None, str | None]:
    quads = world.store.find(iri(tumor), iri(cst("hasAJCCStage")), iri(stage_iri))
    if not quads:
        return None, None
    assertion_graph = quads[0].graph.value
    np_id = assertion_graph.removesuffix("#assertion")
    prov_scope = {np_id + "#provenance"}
    for used in world.store.find(iri(assertion_graph), iri(PROV_USED), graph_scope=prov_scope):
        for value in world.store.find(used.object, iri(PROV_VALUE), graph_scope=prov_scope):
            return value.object.value, assertion_graph
    return None, assertion_graph


def _no_stage_reason(world: World, profile, edition: str) -> str:
    classes = classify_available(profile, world.thresholds)
    required = ("T", "N", "M") if edition == "AJCC7" else AXIS_NAMES
    missing = [axis for axis in required if axis not in classes]
    if missing:
        return f"no rule matched: profile is missing {', '.join(missing)}"
    return "no rule matched: the derived feature combination is outside the guideline table"


def _suggested_drugs(world: World, stage_iri: str | None, derived: dict[str, str]) -> list[schemas.SuggestedDrug]:
    seen: dict[str, schemas.SuggestedDrug] = {}
    targets = []
    if stage_iri:
        targets.append(stage_iri)
    targets.extend(derived[axis] for axis in sorted(derived))
    for target in targets:
        for link in link_treatments(world.store, target, world.ontology):
            if link.evidence_id in seen:
                continue
            fields = {
                schema_key: link.attributes.get(attr_key)
                for attr_key, schema_key in _EVIDENCE_FIELDS.items()
            }
            drug = fields.pop("drug", None) or "(unnamed therapy)"
            seen[link.evidence_id] = schemas.SuggestedDrug(
                drug=drug,
                disease=world.ontology.describe(link.disease),
                evidence_id=link.evidence_id,
                explanation=link.explanation,
                **fields,
            )
    return [seen[key] for key in sorted(seen)]


def build_patient_report(world: World, patient_id: str, edition: str) -> schemas.PatientReport:
    edition = edition_token(edition)
    other = "AJCC8" if edition == "AJCC7" else "AJCC7"
    np_id = nanopub_id(world.config.patients_dataset, patient_id)
    record = world.store.live_nanopub(np_id)
    if record is None:
        raise UnknownResourceError(f"unknown patient {patient_id}")
    scope = {record.assertion}

    profile = profile_from_graph(world.store, np_id)
    name, demographics = _demographics(world, record, scope)
    derived = classify_available(profile, world.thresholds)

    stage_by_edition: dict[str, str | None] = {}
    for target in (edition, other):
        stage_by_edition[target] = stage(
            world.store, profile.tumor_id, target, world.rules_by_name, world.ontology
        )
    selected = stage_by_edition[edition]
    other_stage = stage_by_edition[other]

    direction = None
    if selected and other_stage:
        code7 = stage_code(selected if edition == "AJCC7" else other_stage)
        code8 = stage_code(selected if edition == "AJCC8" else other_stage)
        direction = BADGES[direction_of(code7, code8)]

    explanation = assertion = None
    if selected:
        explanation, assertion = _stage_explanation(world, profile.tumor_id, selected)

    care: list[schemas.CareOption] = []
    if selected:
        stage_class = world.ontology.stages[selected]
        for kind, options in (
            ("recommended_test", stage_class.recommended_tests),
            ("treatment_option", stage_class.treatment_options),
        ):
            for option in options:
                care.append(
                    schemas.CareOption(
                        label=world.ontology.lookup_label(option), kind=kind, iri=option
                    )
                )

    return schemas.PatientReport(
        patient=schemas.PatientDetails(id=patient_id, name=name, demographics=demographics),
        biomarkers_and_staging=schemas.BiomarkersAndStaging(
            raw=schemas.RawTumorValues(
                t_size_mm=profile.t_size_mm,
                in_situ=profile.in_situ,
                chest_wall_or_skin=profile.chest_wall_or_skin,
                positive_nodes=profile.positive_nodes,
                micrometastasis_only=profile.micrometastasis_only,
                metastasized=profile.metastasized,
                grade=profile.grade,
                her2=profile.her2,
                er=profile.er,
                pr=profile.pr,
            ),
            derived_classes=[
                schemas.DerivedClass(
                    axis=axis,
                    iri=derived[axis],
                    label=world.ontology.lookup_label(derived[axis]),
                )
                for axis in AXIS_NAMES
                if axis in derived
            ],
            stage=_stage_info(world, selected) if selected else None,
            no_stage_reason=None if selected else _no_stage_reason(world, profile, edition),
            other_edition_stage=_stage_info(world, other_stage) if other_stage else None,
            change_direction=direction,
            explanation=explanation,
            explanation_assertion=assertion,
        ),
        treatment_plan=care,
        suggested_drugs=_suggested_drugs(world, selected, derived),
    )


def explanation_for_assertion(world: World, assertion_graph: str) -> schemas.ExplanationResponse:
    np_id = assertion_graph.removesuffix("#assertion")
    prov_scope = {np_id + "#provenance"}
    rule = None
    for quad in world.store.find(iri(assertion_graph), iri(cst("inferredBy")), graph_scope=prov_scope):
        rule = quad.object.value
    for used in world.store.find(iri(assertion_graph), iri(PROV_USED), graph_scope=prov_scope):
        for value in world.store.find(used.object, iri(PROV_VALUE), graph_scope=prov_scope):
            return schemas.ExplanationResponse(assertion=assertion_graph, rule=rule, text=value.object.value)
    raise UnknownResourceError(f"no explanation recorded for {assertion_graph}")
