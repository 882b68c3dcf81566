"""Guideline map files: parsing, combination-count validation, and compilation
into intersection-class axioms and executable staging rules.

Concrete syntax (one file per edition/stage pair):

    # optional comments
    edition=AJCC8 stage=IIIA
    T=T3,N=N3,M=M0,Grade=Grade1,HER2=Pos,ER=Pos,PR=Pos

Axes absent from a line mean "any value". Within a stage the lines are a
disjunction; the compiler enforces no exclusivity across stages.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from stagegraph.errors import MapFileError
from stagegraph.kgraph.model import Quad, TriplePattern, Variable, blank, iri
from stagegraph.namespaces import (
    CST,
    OWL_CLASS,
    OWL_INTERSECTION_OF,
    RDF_FIRST,
    RDF_NIL,
    RDF_REST,
    RDF_TYPE,
    RDFS_SUBCLASSOF,
    SIO_ATTRIBUTE_OF,
    local_name,
)
from stagegraph.ontology import (
    AXIS_NAMES,
    EDITIONS,
    STAGE_ORDER,
    CstOntology,
    cst,
    stage_iri,
)

AXIOM_GRAPH = {
    "AJCC7": "https://stagegraph.example/graph/axioms/ajcc7",
    "AJCC8": "https://stagegraph.example/graph/axioms/ajcc8",
}

# Per-stage combination counts pinned from the guideline extraction.
EXPECTED_COUNTS = {
    "AJCC7": {"0": 1, "IA": 1, "IB": 2, "IIA": 3, "IIB": 2, "IIIA": 5, "IIIB": 3, "IIIC": 1, "IV": 1},
    "AJCC8": {"0": 1, "IA": 57, "IB": 33, "IIA": 77, "IIB": 39, "IIIA": 82, "IIIB": 92, "IIIC": 25, "IV": 1},
}

RECEPTOR_AXES = ("HER2", "ER", "PR")


@dataclass(frozen=True, slots=True)
class MapFile:
    edition: str
    stage_code: str
    combinations: tuple[dict[str, str], ...]  # axis -> class IRI, omitted axes mean any
    source_path: str = ""

    @property
    def stage(self) -> str:
        return stage_iri(self.edition, self.stage_code)


@dataclass(frozen=True, slots=True)
class StagingRule:
    """Executable form of one map-file line."""

    name: str
    edition: str
    stage: str
    constraints: dict[str, str]
    explanation_template: str

    def resource_var(self) -> str:
        return "Tumor"

    def where(self) -> list[TriplePattern]:
        tumor = Variable("Tumor")
        patterns = [TriplePattern(tumor, iri(RDF_TYPE), iri(cst("Tumor")))]
        for axis in AXIS_NAMES:
            if axis not in self.constraints:
                continue
            var = Variable(axis)
            patterns.append(TriplePattern(var, iri(SIO_ATTRIBUTE_OF), tumor))
            patterns.append(TriplePattern(var, iri(RDF_TYPE), iri(self.constraints[axis])))
        return patterns

    def construct(self) -> list[TriplePattern]:
        return [
            TriplePattern(Variable("Tumor"), iri(cst("hasAJCCStage")), iri(self.stage))
        ]


@dataclass(frozen=True, slots=True)
class AxiomSet:
    edition: str
    quads: tuple[Quad, ...]


@dataclass
class CountReport:
    edition: str
    passed: bool
    mismatches: list[tuple[str, int, int]] = field(default_factory=list)  # stage, expected, actual
    totals: tuple[int, int] = (0, 0)

    def summary(self) -> str:
        if self.passed:
            return f"{self.edition}: all stage combination counts match ({self.totals[0]} total)"
        lines = [f"{self.edition}: combination count mismatch"]
        for stage, expected, actual in self.mismatches:
            lines.append(f"  stage {stage}: expected {expected}, found {actual}")
        lines.append(f"  total: expected {self.totals[0]}, found {self.totals[1]}")
        return "\n".join(lines)


def _parse_header(line: str, lineno: int) -> tuple[str, str]:
    fields = dict()
    for token in line.split():
        if "=" not in token:
            raise MapFileError(f"malformed header token {token!r}", lineno)
        key, value = token.split("=", 1)
        fields[key.strip()] = value.strip()
    edition = fields.get("edition")
    stage = fields.get("stage")
    if edition not in EDITIONS:
        raise MapFileError(f"unknown or missing edition {edition!r}", lineno)
    if stage not in STAGE_ORDER:
        raise MapFileError(f"unknown or missing stage {stage!r}", lineno)
    return edition, stage


def _class_for(axis: str, value: str, ontology: CstOntology, lineno: int) -> str:
    if axis in RECEPTOR_AXES and value in ("Pos", "Neg"):
        value = f"{axis}_{value}"
    class_iri = cst(value)
    if ontology.axis_of(class_iri) != axis:
        raise MapFileError(f"unknown class {value!r} for axis {axis}", lineno)
    return class_iri


def parse_map_file(text: str, ontology: CstOntology, source_path: str = "") -> MapFile:
    edition = stage = None
    combinations: list[dict[str, str]] = []
    seen: set[tuple] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if edition is None:
            edition, stage = _parse_header(line, lineno)
            continue
        constraints: dict[str, str] = {}
        for token in line.split(","):
            token = token.strip()
            if not token:
                continue
            if "=" not in token:
                raise MapFileError(f"malformed constraint {token!r}", lineno)
            axis, value = (part.strip() for part in token.split("=", 1))
            if axis not in AXIS_NAMES:
                raise MapFileError(f"unknown axis {axis!r}", lineno)
            if axis in constraints:
                raise MapFileError(f"duplicate axis {axis} in one combination", lineno)
            constraints[axis] = _class_for(axis, value, ontology, lineno)
        if not constraints:
            raise MapFileError("empty combination line", lineno)
        if edition == "AJCC7" and set(constraints) - {"T", "N", "M"}:
            raise MapFileError("AJCC7 combinations constrain only T, N, M", lineno)
        key = tuple(sorted(constraints.items()))
        if key in seen:
            continue  # deduplicated per the map-file contract
        seen.add(key)
        combinations.append(constraints)
    if edition is None:
        raise MapFileError("missing header line (edition=... stage=...)")
    return MapFile(edition, stage, tuple(combinations), source_path)


def serialize_map_file(map_file: MapFile) -> str:
    lines = [f"edition={map_file.edition} stage={map_file.stage_code}"]
    for constraints in map_file.combinations:
        parts = []
        for axis in AXIS_NAMES:
            if axis in constraints:
                value = local_name(constraints[axis])
                if axis in RECEPTOR_AXES:
                    value = value.removeprefix(f"{axis}_")
                parts.append(f"{axis}={value}")
        lines.append(",".join(parts))
    return "\n".join(lines) + "\n"


def default_maps_dir(edition: str) -> Path:
    return Path(str(resources.files("stagegraph").joinpath("data", "maps", edition.lower())))


def load_map_dir(directory: str | Path, ontology: CstOntology) -> list[MapFile]:
    directory = Path(directory)
    files = []
    for path in sorted(directory.glob("*.map")):
        files.append(parse_map_file(path.read_text(encoding="utf-8"), ontology, str(path)))
    if not files:
        raise MapFileError(f"no .map files under {directory}")
    files.sort(key=lambda f: STAGE_ORDER.index(f.stage_code))
    return files


def validate_counts(files: list[MapFile], expected: dict[str, int] | None = None) -> CountReport:
    editions = {f.edition for f in files}
    if len(editions) != 1:
        raise MapFileError(f"map files span multiple editions: {sorted(editions)}")
    edition = editions.pop()
    expected = expected or EXPECTED_COUNTS[edition]
    actual = {f.stage_code: len(f.combinations) for f in files}
    mismatches = []
    for stage in STAGE_ORDER:
        want = expected.get(stage, 0)
        have = actual.get(stage, 0)
        if want != have:
            mismatches.append((stage, want, have))
    totals = (sum(expected.values()), sum(actual.values()))
    return CountReport(edition, not mismatches, mismatches, totals)


def compile_to_axioms(map_file: MapFile) -> AxiomSet:
    """One anonymous intersection class per combination, subclass of the stage class.

    The intersection lists only the constrained classes, in the canonical axis
    order T, N, M, Grade, HER2, ER, PR; omitted axes are excluded entirely.
    """
    graph = iri(AXIOM_GRAPH[map_file.edition])
    stage = iri(map_file.stage)
    quads: list[Quad] = []
    counter = 0

    def fresh():
        nonlocal counter
        counter += 1
        return blank(f"ax_{map_file.edition}_{map_file.stage_code}_{counter}")

    for constraints in map_file.combinations:
        node = fresh()
        quads.append(Quad(node, iri(RDF_TYPE), iri(OWL_CLASS), graph))
        quads.append(Quad(node, iri(RDFS_SUBCLASSOF), stage, graph))
        members = [iri(constraints[axis]) for axis in AXIS_NAMES if axis in constraints]
        cursor = fresh()
        quads.append(Quad(node, iri(OWL_INTERSECTION_OF), cursor, graph))
        for index, member in enumerate(members):
            quads.append(Quad(cursor, iri(RDF_FIRST), member, graph))
            if index == len(members) - 1:
                quads.append(Quad(cursor, iri(RDF_REST), iri(RDF_NIL), graph))
            else:
                nxt = fresh()
                quads.append(Quad(cursor, iri(RDF_REST), nxt, graph))
                cursor = nxt
    return AxiomSet(map_file.edition, tuple(quads))


def _explanation_template(map_file: MapFile, constraints: dict[str, str], ontology: CstOntology) -> str:
    stage_label = ontology.lookup_label(map_file.stage)
    lines = [f"{{{{Tumor}}}} was found to be {stage_label} since the following are true:"]
    for axis in AXIS_NAMES:
        if axis in constraints:
            lines.append(f"- {ontology.describe(constraints[axis])}.")
    return "\n".join(lines)


def compile_to_rules(map_file: MapFile, ontology: CstOntology) -> list["StagingRule"]:
    """One rule per combination; names are stable across runs."""
    if not map_file.combinations:
        raise MapFileError(
            f"stage {map_file.stage_code} ({map_file.edition}) has no combinations"
        )
    rules = []
    for index, constraints in enumerate(map_file.combinations, start=1):
        name = f"{map_file.edition} Stage {map_file.stage_code} #{index}"
        rules.append(
            StagingRule(
                name,
                map_file.edition,
                map_file.stage,
                dict(constraints),
                _explanation_template(map_file, constraints, ontology),
            )
        )
    return rules


def compile_edition(
    directory: str | Path, ontology: CstOntology
) -> tuple[list[MapFile], AxiomSet, list[StagingRule], CountReport]:
    """Parse, validate, and compile one edition's map directory."""
    files = load_map_dir(directory, ontology)
    report = validate_counts(files)
    all_quads: list[Quad] = []
    rules: list[StagingRule] = []
    for map_file in files:
        all_quads.extend(compile_to_axioms(map_file).quads)
        rules.extend(compile_to_rules(map_file, ontology))
    return files, AxiomSet(files[0].edition, tuple(all_quads)), rules, report
