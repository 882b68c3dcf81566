"""Request/response models for the HTTP API. The report mirrors the four
physician-facing sections: patient details, biomarkers and staging, treatment
plan, suggested drugs."""

from __future__ import annotations

from pydantic import BaseModel, Field


class PatientSummary(BaseModel):
    id: str
    name: str | None = None


class StageInfo(BaseModel):
    edition: str
    code: str
    iri: str
    label: str


class DerivedClass(BaseModel):
    axis: str
    iri: str
    label: str


class RawTumorValues(BaseModel):
    t_size_mm: float | None = None
    in_situ: bool = False
    chest_wall_or_skin: bool = False
    positive_nodes: int | None = None
    micrometastasis_only: bool = False
    metastasized: bool = False
    grade: int | None = None
    her2: str | None = None
    er: str | None = None
    pr: str | None = None


class PatientDetails(BaseModel):
    id: str
    name: str | None = None
    demographics: dict[str, str] = Field(default_factory=dict)


class BiomarkersAndStaging(BaseModel):
    raw: RawTumorValues
    derived_classes: list[DerivedClass]
    stage: StageInfo | None = None
    no_stage_reason: str | None = None
    other_edition_stage: StageInfo | None = None
    change_direction: str | None = None  # up-staged | down-staged | no change
    explanation: str | None = None
    explanation_assertion: str | None = None


class CareOption(BaseModel):
    label: str
    kind: str  # recommended_test | treatment_option
    iri: str


class SuggestedDrug(BaseModel):
    drug: str
    disease: str
    evidence_id: str
    evidence_level: str | None = None
    trust_rating: str | None = None
    source: str | None = None
    status: str | None = None
    rating: str | None = None
    explanation: str


class PatientReport(BaseModel):
    patient: PatientDetails
    biomarkers_and_staging: BiomarkersAndStaging
    treatment_plan: list[CareOption]
    suggested_drugs: list[SuggestedDrug]


class MatrixResponse(BaseModel):
    from_edition: str
    to_edition: str
    stage_order: list[str]
    counts: list[list[int]]
    row_percent: list[list[str | None]]
    row_percent_value: list[list[float | None]]
    unstaged: int
    exclusions: list[dict[str, str]]


class RestageRequest(BaseModel):
    from_edition: str = "ajcc7"
    to_edition: str = "ajcc8"


class TransitionEntry(BaseModel):
    patient: str
    from_stage: str
    to_stage: str
    direction: str


class TransitionsResponse(BaseModel):
    from_edition: str
    to_edition: str
    changes: list[TransitionEntry]
    exclusions: list[dict[str, str]]


class ExplanationResponse(BaseModel):
    assertion: str
    rule: str | None = None
    text: str


class FixpointSummary(BaseModel):
    iterations: int
    inferred_quad_count: int
    nanopubs_created: int
