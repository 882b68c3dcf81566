"""Cancer staging terms: feature-class hierarchies, per-edition stage classes,
and derivation of categorical feature classes from raw tumor measurements.

The numeric cutoffs used to derive T and N classes are data, not code: they
ship as editable threshold tables (one per edition) and default to the
standard anatomic definitions (20/50 mm; 1-3/4-9/10+ nodes).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

from stagegraph.errors import IncompleteProfileError, StagegraphError, UnknownResourceError
from stagegraph.kgraph.model import Quad, Term, iri, literal
from stagegraph.namespaces import (
    CST,
    DOID,
    EFO,
    NCIT,
    OWL_CLASS,
    OWL_EQUIVALENT_CLASS,
    OWL_INVERSE_OF,
    OWL_OBJECT_PROPERTY,
    RDF_TYPE,
    RDFS_COMMENT,
    RDFS_LABEL,
    RDFS_SUBCLASSOF,
    RDFS_SUBPROPERTYOF,
    local_name,
)

CST_GRAPH = "https://stagegraph.example/graph/cst"

EDITIONS = ("AJCC7", "AJCC8")
STAGE_ORDER = ("0", "IA", "IB", "IIA", "IIB", "IIIA", "IIIB", "IIIC", "IV")
AXIS_NAMES = ("T", "N", "M", "Grade", "HER2", "ER", "PR")

AXIS_PHRASES = {
    "T": "Primary Tumor size",
    "N": "Degree of spread to lymph nodes",
    "M": "Presence of distant metastasis",
    "Grade": "Tumor Grade",
    "HER2": "Human Epidermal growth factor Receptor 2 (HER2)",
    "ER": "Estrogen Receptor (ER)",
    "PR": "Progesterone Receptor (PR)",
}

AXIS_VALUES = {
    "T": ("Tis", "T0", "T1", "T2", "T3", "T4"),
    "N": ("N0", "N1", "N2", "N3"),
    "M": ("M0", "M1"),
    "Grade": ("Grade1", "Grade2", "Grade3"),
    "HER2": ("HER2_Neg", "HER2_Pos"),
    "ER": ("ER_Neg", "ER_Pos"),
    "PR": ("PR_Neg", "PR_Pos"),
}

# SEER-style refinements of the broad classes; each has exactly one broad parent.
SUBVARIANTS = {
    "T1_as": "T1",
    "T1_am": "T1",
    "T1NOS": "T1",
    "T2_s": "T2",
    "T3_s": "T3",
    "T4_s": "T4",
    "TisNOS": "Tis",
    "T0NOS": "T0",
    "N1mi": "N1",
}

# Opaque external identifiers carried from the codebooks (never dereferenced).
EQUIVALENTS = {
    "Tis": (NCIT + "C48738",),
    "T0": (NCIT + "C48719",),
    "T1": (NCIT + "C48720",),
    "T2": (NCIT + "C48724",),
    "T3": (NCIT + "C48728",),
    "T4": (NCIT + "C48732",),
    "N0": (NCIT + "C48705",),
    "N1": (NCIT + "C48706",),
    "N2": (NCIT + "C48786",),
    "N3": (NCIT + "C48714",),
    "M0": (NCIT + "C48699",),
    "M1": (NCIT + "C48700",),
    "Grade1": (NCIT + "C28077",),
    "Grade2": (NCIT + "C28078",),
    "Grade3": (NCIT + "C28079",),
    "HER2_Positive_Breast_Cancer": (EFO + "1000294", DOID + "0060079", NCIT + "C53556"),
}

STAGE_GROUP = {
    "0": "Stage_0",
    "IA": "Stage_I",
    "IB": "Stage_I",
    "IIA": "Stage_II",
    "IIB": "Stage_II",
    "IIIA": "Stage_III",
    "IIIB": "Stage_III",
    "IIIC": "Stage_III",
    "IV": "Stage_IV",
}

_GROUP_TESTS = {
    "Stage_0": ("Mammography", "BreastMRI"),
    "Stage_I": ("Mammography", "SentinelNodeBiopsy"),
    "Stage_II": ("Mammography", "SentinelNodeBiopsy", "CTScan"),
    "Stage_III": ("CTScan", "BoneScan"),
    "Stage_IV": ("CTScan", "BoneScan", "PETScan"),
}

_GROUP_TREATMENTS = {
    "Stage_0": ("Lumpectomy", "Surveillance"),
    "Stage_I": ("Lumpectomy", "RadiationTherapy", "HormoneTherapy"),
    "Stage_II": ("Mastectomy", "Chemotherapy", "RadiationTherapy"),
    "Stage_III": ("NeoadjuvantChemotherapy", "Mastectomy", "RadiationTherapy"),
    "Stage_IV": ("SystemicTherapy", "PalliativeCare"),
}

# Attribute classes referenced by the semantic data dictionaries. They stay
# parentless on purpose: type-propagation closure has nothing to add for them.
ATTRIBUTE_CLASSES = {
    "TumorSize": "Tumor size (mm)",
    "PositiveNodeCount": "Positive lymph nodes",
    "NodesExamined": "Lymph nodes examined",
    "MetastasisStatus": "Distant metastasis present",
    "MicrometastasisStatus": "Nodal micrometastasis only",
    "InSituStatus": "Carcinoma in situ",
    "ChestWallStatus": "Chest wall or skin involvement",
    "GradeStatus": "Tumor grade",
    "HER2Status": "HER2 receptor status",
    "ERStatus": "ER receptor status",
    "PRStatus": "PR receptor status",
    "HistoricalStage": "Historical AJCC 6th edition stage",
    "SurgeryStatus": "Surgery performed",
    "RadiationStatus": "Radiation performed",
    "ChemotherapyStatus": "Chemotherapy given",
    "SurvivalMonths": "Survival months",
    "VitalStatus": "Vital status",
    "CauseOfDeath": "Cause of death",
    "HistologicType": "Histologic type",
    "BehaviorCode": "Behavior",
    "Laterality": "Laterality",
    "PrimarySite": "Primary site",
    "MaritalStatus": "Marital status",
    "Ethnicity": "Ethnicity",
    "Race": "Race",
    "EvidenceLevel": "Evidence level",
    "EvidenceStatus": "Evidence status",
    "TrustRating": "Trust rating",
    "EvidenceType": "Evidence type",
    "ClinicalSignificance": "Clinical significance",
    "VariantOrigin": "Variant origin",
    "SourceReference": "Source",
    "PubMedReference": "PubMed reference",
    "Rating": "Rating",
    "Variant": "Variant",
}

# Concepts codebooks normalize raw cell values onto.
VALUE_CONCEPTS = {
    "Yes": "Yes",
    "No": "No",
    "Indeterminate": "Indeterminate or equivocal finding",
}

_CARE_LABELS = {
    "Mammography": "Mammography",
    "BreastMRI": "Breast MRI",
    "SentinelNodeBiopsy": "Sentinel lymph node biopsy",
    "CTScan": "CT scan",
    "BoneScan": "Bone scan",
    "PETScan": "PET scan",
    "Lumpectomy": "Breast-conserving surgery (lumpectomy)",
    "Surveillance": "Active surveillance",
    "RadiationTherapy": "Radiation therapy",
    "HormoneTherapy": "Hormone therapy",
    "Mastectomy": "Mastectomy",
    "Chemotherapy": "Chemotherapy",
    "NeoadjuvantChemotherapy": "Neoadjuvant chemotherapy",
    "SystemicTherapy": "Systemic therapy",
    "PalliativeCare": "Palliative and supportive care",
}


def cst(name: str) -> str:
    return CST + name


def stage_iri(edition: str, code: str) -> str:
    if edition not in EDITIONS:
        raise StagegraphError(f"unknown edition {edition!r}")
    if code not in STAGE_ORDER:
        raise StagegraphError(f"unknown stage code {code!r}")
    return cst(f"{edition}_Stage_{code}")


def stage_code(stage: str) -> str:
    name = local_name(stage)
    for edition in EDITIONS:
        prefix = f"{edition}_Stage_"
        if name.startswith(prefix):
            return name[len(prefix):]
    raise StagegraphError(f"not a stage IRI: {stage}")


def stage_index(code: str) -> int:
    return STAGE_ORDER.index(code)


@dataclass(frozen=True, slots=True)
class OntClass:
    iri: str
    label: str
    comment: str | None = None
    parents: tuple[str, ...] = ()
    equivalents: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class FeatureAxis:
    name: str
    classes: tuple[str, ...]  # broad class IRIs in severity order
    subvariants: dict[str, tuple[str, ...]]


@dataclass(frozen=True, slots=True)
class StageClass:
    iri: str
    edition: str
    code: str
    recommended_tests: tuple[str, ...]
    treatment_options: tuple[str, ...]


class CstOntology:
    """The built cancer staging terms graph plus fast label/axis lookups."""

    def __init__(self):
        self.classes: dict[str, OntClass] = {}
        self.axes: dict[str, FeatureAxis] = {}
        self.stages: dict[str, StageClass] = {}
        self._axis_of: dict[str, str] = {}
        self._property_quads: list[tuple[str, str, str]] = []

    # -- construction ------------------------------------------------------

    def _add(self, klass: OntClass):
        self.classes[klass.iri] = klass

    def _build_axes(self):
        for axis in AXIS_NAMES:
            phrase = AXIS_PHRASES[axis]
            root = cst(axis)
            self._add(
                OntClass(
                    root,
                    phrase,
                    f"Feature axis for {phrase}; its subclasses are the categorical "
                    f"values a tumor can take on this axis under the staging guidelines.",
                    parents=(cst("TumorFeature"),),
                )
            )
            members = []
            for code in AXIS_VALUES[axis]:
                value_phrase = code
                label = code
                if axis in ("HER2", "ER", "PR"):
                    status = "Positive" if code.endswith("Pos") else "Negative"
                    label = f"{axis} {status}"
                    value_phrase = status
                comment = f"{phrase} is {value_phrase}"
                self._add(
                    OntClass(
                        cst(code),
                        label,
                        comment,
                        parents=(root,),
                        equivalents=EQUIVALENTS.get(code, ()),
                    )
                )
                self._axis_of[cst(code)] = axis
                members.append(cst(code))
            subvariants: dict[str, list[str]] = {}
            for sub, broad in SUBVARIANTS.items():
                if cst(broad) in members:
                    comment = f"{phrase} is {sub}"
                    self._add(
                        OntClass(
                            cst(sub),
                            sub,
                            comment,
                            parents=(cst(broad),),
                        )
                    )
                    self._axis_of[cst(sub)] = axis
                    subvariants.setdefault(cst(broad), []).append(cst(sub))
            self.axes[axis] = FeatureAxis(
                axis,
                tuple(members),
                {k: tuple(sorted(v)) for k, v in subvariants.items()},
            )
        self._add(
            OntClass(
                cst("TumorFeature"),
                "Tumor feature",
                "Root of the categorical tumor feature classes derived from raw measurements "
                "recorded as attributes of the tumor in the knowledge graph.",
            )
        )

    def _build_stages(self):
        self._add(
            OntClass(
                cst("BreastCancer"),
                "Breast cancer",
                "Breast cancer as a disease concept; broad stage groupings and "
                "guideline-specific stage classes specialize it.",
            )
        )
        for group in dict.fromkeys(STAGE_GROUP.values()):
            roman = group.split("_")[1]
            self._add(
                OntClass(
                    cst(group),
                    f"Stage {roman} breast cancer",
                    f"Breast cancer at broad stage {roman}, independent of the guideline "
                    f"edition used to assign it; evidence sources often target this level.",
                    parents=(cst("BreastCancer"),),
                )
            )
        for edition in EDITIONS:
            ordinal = "7th" if edition == "AJCC7" else "8th"
            basis = (
                "anatomic T/N/M criteria"
                if edition == "AJCC7"
                else "clinical prognostic criteria combining T/N/M with Grade, HER2, ER, and PR"
            )
            for code in STAGE_ORDER:
                s = stage_iri(edition, code)
                group = STAGE_GROUP[code]
                self._add(
                    OntClass(
                        s,
                        f"{edition} Stage {code}",
                        f"Breast cancer stage {code} as defined by the AJCC {ordinal} edition {basis}.",
                        parents=(cst(group),),
                    )
                )
                self.stages[s] = StageClass(
                    s,
                    edition,
                    code,
                    tuple(cst(t) for t in _GROUP_TESTS[group]),
                    tuple(cst(t) for t in _GROUP_TREATMENTS[group]),
                )

    def _build_support(self):
        for name, label in _CARE_LABELS.items():
            self._add(OntClass(cst(name), label, None, parents=(cst("CareOption"),)))
        self._add(
            OntClass(
                cst("CareOption"),
                "Care option",
                "A recommended test, treatment, or monitoring option attached to a stage class.",
            )
        )
        for name, label, comment in (
            ("Patient", "Patient", "A person whose tumor attributes are recorded in the knowledge graph."),
            ("Tumor", "Tumor", "A primary breast tumor; raw measurements attach to it as attributes."),
            ("Evidence", "Evidence item", "A drug-disease evidence record ingested from a curated source."),
            ("Explanation", "Explanation", "Natural-language justification attached to an inferred assertion."),
        ):
            self._add(OntClass(cst(name), label, comment))
        for name, label in ATTRIBUTE_CLASSES.items():
            self._add(OntClass(cst(name), label))
        for name, label in VALUE_CONCEPTS.items():
            self._add(OntClass(cst(name), label))
        self._add(
            OntClass(
                cst("HER2_Positive_Breast_Cancer"),
                "HER2-receptor positive breast cancer",
                "Breast cancer characterized by a positive HER2 receptor status.",
                parents=(cst("BreastCancer"),),
                equivalents=EQUIVALENTS["HER2_Positive_Breast_Cancer"],
            )
        )
        self._property_quads = [
            (cst("hasAJCCStage"), RDFS_LABEL, "has AJCC stage"),
            (cst("hasRecommendedTest"), RDFS_LABEL, "has recommended test"),
            (cst("hasTreatmentOption"), RDFS_LABEL, "has treatment option"),
            (cst("hasCareOption"), RDFS_LABEL, "has care option"),
            (cst("aboutFeature"), RDFS_LABEL, "about feature"),
            (cst("treatmentOptionFor"), RDFS_LABEL, "treatment option for"),
            (cst("hasMappedTerm"), RDFS_LABEL, "has mapped term"),
        ]

    # -- lookups -----------------------------------------------------------

    def lookup_label(self, class_iri: str) -> str:
        if class_iri not in self.classes:
            raise UnknownResourceError(f"unknown CST class {class_iri}")
        return self.classes[class_iri].label

    def lookup_comment(self, class_iri: str) -> str | None:
        if class_iri not in self.classes:
            raise UnknownResourceError(f"unknown CST class {class_iri}")
        return self.classes[class_iri].comment

    def describe(self, class_iri: str) -> str:
        """Preferred human-readable description: comment when short, else label, else local name."""
        klass = self.classes.get(class_iri)
        if klass is None:
            return local_name(class_iri)
        if klass.comment and len(klass.comment) < 80:
            return klass.comment
        return klass.label

    def axis_of(self, class_iri: str) -> str | None:
        return self._axis_of.get(class_iri)

    def broad_parent(self, class_iri: str) -> str:
        """The broad axis value for a subvariant; identity for broad classes."""
        name = local_name(class_iri)
        if name in SUBVARIANTS:
            return cst(SUBVARIANTS[name])
        return class_iri

    def is_subclass(self, narrow: str, broad: str) -> bool:
        """Reflexive-transitive subclass check over the declared parent DAG."""
        if narrow == broad:
            return True
        seen = set()
        frontier = [narrow]
        while frontier:
            current = frontier.pop()
            if current in seen:
                continue
            seen.add(current)
            for parent in self.classes.get(current, OntClass(current, "")).parents:
                if parent == broad:
                    return True
                frontier.append(parent)
        return False

    def assert_acyclic(self):
        state: dict[str, int] = {}

        def visit(node: str):
            if state.get(node) == 1:
                raise StagegraphError(f"cycle in class hierarchy at {node}")
            if state.get(node) == 2:
                return
            state[node] = 1
            for parent in self.classes.get(node, OntClass(node, "")).parents:
                visit(parent)
            state[node] = 2

        for node in self.classes:
            visit(node)

    # -- graph emission ----------------------------------------------------

    def quads(self) -> list[Quad]:
        g = iri(CST_GRAPH)
        out: list[Quad] = []

        def add(s: Term, p: str, o: Term):
            out.append(Quad(s, iri(p), o, g))

        for klass in self.classes.values():
            subject = iri(klass.iri)
            add(subject, RDF_TYPE, iri(OWL_CLASS))
            add(subject, RDFS_LABEL, literal(klass.label))
            if klass.comment:
                add(subject, RDFS_COMMENT, literal(klass.comment))
            for parent in klass.parents:
                add(subject, RDFS_SUBCLASSOF, iri(parent))
            for eq in klass.equivalents:
                add(subject, OWL_EQUIVALENT_CLASS, iri(eq))
        for stage in self.stages.values():
            subject = iri(stage.iri)
            for test in stage.recommended_tests:
                add(subject, cst("hasRecommendedTest"), iri(test))
            for option in stage.treatment_options:
                add(subject, cst("hasTreatmentOption"), iri(option))
        for prop, pred, value in self._property_quads:
            add(iri(prop), RDF_TYPE, iri(OWL_OBJECT_PROPERTY))
            add(iri(prop), pred, literal(value))
        add(iri(cst("hasRecommendedTest")), RDFS_SUBPROPERTYOF, iri(cst("hasCareOption")))
        add(iri(cst("hasTreatmentOption")), RDFS_SUBPROPERTYOF, iri(cst("hasCareOption")))
        add(iri(cst("treatmentOptionFor")), OWL_INVERSE_OF, iri(cst("hasTreatmentOption")))
        add(iri(cst("HER2_Positive_Breast_Cancer")), cst("aboutFeature"), iri(cst("HER2_Pos")))
        return out


@lru_cache(maxsize=1)
def build_cst() -> CstOntology:
    ontology = CstOntology()
    ontology._build_axes()
    ontology._build_stages()
    ontology._build_support()
    ontology.assert_acyclic()
    return ontology


# -- tumor profiles and classification --------------------------------------


@dataclass(frozen=True, slots=True)
class TumorProfile:
    """Raw tumor attributes; categorical classes are derived, never stored here."""

    tumor_id: str
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

    def __post_init__(self):
        if self.micrometastasis_only and (self.positive_nodes or 0) < 1:
            raise StagegraphError(
                "micrometastasis_only requires at least one positive node"
            )
        if self.t_size_mm is not None and self.t_size_mm < 0:
            raise StagegraphError("tumor size must be non-negative")
        if self.positive_nodes is not None and self.positive_nodes < 0:
            raise StagegraphError("positive node count must be non-negative")
        for attr in ("her2", "er", "pr"):
            value = getattr(self, attr)
            if value is not None and value not in ("Pos", "Neg"):
                raise StagegraphError(f"{attr} must be Pos or Neg, got {value!r}")
        if self.grade is not None and self.grade not in (1, 2, 3):
            raise StagegraphError(f"grade must be 1, 2, or 3, got {self.grade!r}")


@dataclass(frozen=True, slots=True)
class ThresholdRow:
    axis: str
    cls: str
    min_inclusive: float | None
    max_exclusive: float | None
    flag: str | None


class ThresholdTable:
    """Ordered classification bands; flag rows fire on profile booleans, numeric
    rows on half-open ranges [min, max); min == max matches that exact value."""

    def __init__(self, rows: list[ThresholdRow]):
        self.rows = rows

    @classmethod
    def from_csv(cls, path: str | Path) -> "ThresholdTable":
        rows = []
        with open(path, newline="", encoding="utf-8") as handle:
            for record in csv.DictReader(_strip_comments(handle)):
                rows.append(
                    ThresholdRow(
                        record["axis"].strip(),
                        record["class"].strip(),
                        float(record["min_inclusive"]) if record["min_inclusive"].strip() else None,
                        float(record["max_exclusive"]) if record["max_exclusive"].strip() else None,
                        record["flag"].strip() or None,
                    )
                )
        return cls(rows)

    def classify(self, axis: str, value: float | None, flags: dict[str, bool]) -> str | None:
        for row in self.rows:
            if row.axis != axis:
                continue
            if row.flag:
                if flags.get(row.flag):
                    return row.cls
                continue
            if row.min_inclusive is None and row.max_exclusive is None:
                return row.cls  # default row
            if value is None:
                continue
            if (
                row.min_inclusive is not None
                and row.min_inclusive == row.max_exclusive
            ):
                if value == row.min_inclusive:
                    return row.cls
                continue
            if row.min_inclusive is not None and value < row.min_inclusive:
                continue
            if row.max_exclusive is not None and value >= row.max_exclusive:
                continue
            return row.cls
        return None


def _strip_comments(handle):
    for line in handle:
        if line.lstrip().startswith("#"):
            continue
        yield line


def default_threshold_path(edition: str) -> Path:
    name = edition.lower() + ".csv"
    return Path(str(resources.files("stagegraph").joinpath("data", "thresholds", name)))


@lru_cache(maxsize=4)
def load_thresholds(edition: str) -> ThresholdTable:
    return ThresholdTable.from_csv(default_threshold_path(edition))


def classify_t(profile: TumorProfile, table: ThresholdTable) -> str:
    if not profile.in_situ and not profile.chest_wall_or_skin and profile.t_size_mm is None:
        raise IncompleteProfileError("T", "neither in_situ nor tumor size present")
    cls = table.classify(
        "T",
        profile.t_size_mm,
        {"in_situ": profile.in_situ, "chest_wall_or_skin": profile.chest_wall_or_skin},
    )
    if cls is None:
        raise IncompleteProfileError("T", f"no band for size {profile.t_size_mm}")
    return cst(cls)


def classify_n(profile: TumorProfile, table: ThresholdTable) -> str:
    if profile.positive_nodes is None:
        raise IncompleteProfileError("N", "positive node count missing")
    cls = table.classify(
        "N",
        float(profile.positive_nodes),
        {"micrometastasis_only": profile.micrometastasis_only},
    )
    if cls is None:
        raise IncompleteProfileError("N", f"no band for {profile.positive_nodes} nodes")
    return cst(cls)


def classify_m(profile: TumorProfile, table: ThresholdTable) -> str:
    cls = table.classify("M", None, {"metastasized": profile.metastasized})
    if cls is None:
        raise IncompleteProfileError("M")
    return cst(cls)


def classify_biomarkers(profile: TumorProfile) -> dict[str, str]:
    """Grade/HER2/ER/PR class IRIs; raises naming the first missing axis."""
    out = {}
    if profile.grade is None:
        raise IncompleteProfileError("Grade")
    out["Grade"] = cst(f"Grade{profile.grade}")
    for axis, value in (("HER2", profile.her2), ("ER", profile.er), ("PR", profile.pr)):
        if value is None:
            raise IncompleteProfileError(axis)
        out[axis] = cst(f"{axis}_{value}")
    return out


def classify_available(profile: TumorProfile, table: ThresholdTable) -> dict[str, str]:
    """Classes for every axis whose raw fields are present; absent axes are skipped."""
    out: dict[str, str] = {}
    for axis, fn in (("T", classify_t), ("N", classify_n), ("M", classify_m)):
        try:
            out[axis] = fn(profile, table)
        except IncompleteProfileError:
            pass
    if profile.grade is not None:
        out["Grade"] = cst(f"Grade{profile.grade}")
    for axis, value in (("HER2", profile.her2), ("ER", profile.er), ("PR", profile.pr)):
        if value is not None:
            out[axis] = cst(f"{axis}_{value}")
    return out
