"""Cohort re-staging: per-patient stage changes between editions and the
stage-transition matrix with exact (rational) row percentages."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from stagegraph.errors import StagegraphError
from stagegraph.inference import stage
from stagegraph.kgraph.model import iri
from stagegraph.kgraph.store import QuadStore
from stagegraph.mapcompiler import StagingRule
from stagegraph.namespaces import RDF_TYPE
from stagegraph.ontology import STAGE_ORDER, CstOntology, cst, stage_code, stage_index


@dataclass(frozen=True, slots=True)
class StageChange:
    patient: str
    from_stage: str  # stage code, e.g. "IIIA"
    to_stage: str
    direction: str  # up | down | none


@dataclass
class RestageResult:
    changes: list[StageChange] = field(default_factory=list)
    exclusions: list[tuple[str, str]] = field(default_factory=list)  # (patient, reason)


def direction_of(from_code: str, to_code: str) -> str:
    delta = stage_index(to_code) - stage_index(from_code)
    if delta > 0:
        return "up"
    if delta < 0:
        return "down"
    return "none"


def tumor_of(store: QuadStore, patient_np_id: str) -> str | None:
    scope = {patient_np_id + "#assertion"}
    tumors = store.find(None, iri(RDF_TYPE), iri(cst("Tumor")), graph_scope=scope)
    return tumors[0].subject.value if tumors else None


def restage_cohort(
    store: QuadStore,
    patient_np_ids: list[str],
    from_edition: str,
    to_edition: str,
    staging_rules: dict[str, StagingRule],
    ontology: CstOntology,
) -> RestageResult:
    """One StageChange per dually-staged patient; the rest become exclusions
    with an explicit reason, never silently dropped."""
    result = RestageResult()
    for np_id in patient_np_ids:
        tumor = tumor_of(store, np_id)
        if tumor is None:
            result.exclusions.append((np_id, "no tumor entity"))
            continue
        stages = {}
        for edition in (from_edition, to_edition):
            stages[edition] = stage(store, tumor, edition, staging_rules, ontology)
        missing = [e for e in (from_edition, to_edition) if stages[e] is None]
        if missing:
            result.exclusions.append(
                (np_id, " and ".join(f"no {e} stage" for e in missing))
            )
            continue
        from_code = stage_code(stages[from_edition])
        to_code = stage_code(stages[to_edition])
        result.changes.append(
            StageChange(np_id, from_code, to_code, direction_of(from_code, to_code))
        )
    return result


@dataclass
class TransitionMatrix:
    from_edition: str
    to_edition: str
    counts: list[list[int]]
    row_percent: list[list[Fraction | None]]  # None marks an undefined (empty) row
    unstaged: int = 0
    exclusions: tuple[tuple[str, str], ...] = ()

    def row_total(self, index: int) -> int:
        return sum(self.counts[index])

    def total(self) -> int:
        return sum(self.row_total(k) for k in range(len(STAGE_ORDER)))


def build_matrix(
    changes: list[StageChange],
    exclusions: tuple[tuple[str, str], ...] = (),
    from_edition: str = "AJCC7",
    to_edition: str = "AJCC8",
) -> TransitionMatrix:
    n = len(STAGE_ORDER)
    counts = [[0] * n for _ in range(n)]
    for change in changes:
        counts[stage_index(change.from_stage)][stage_index(change.to_stage)] += 1
    row_percent: list[list[Fraction | None]] = []
    for row in counts:
        total = sum(row)
        if total == 0:
            row_percent.append([None] * n)
        else:
            row_percent.append([Fraction(cell, total) for cell in row])
    return TransitionMatrix(
        from_edition, to_edition, counts, row_percent, len(exclusions), tuple(exclusions)
    )


def export_matrix(matrix: TransitionMatrix, fmt: str) -> str:
    if fmt == "csv":
        lines = ["from/to," + ",".join(STAGE_ORDER)]
        for code, row in zip(STAGE_ORDER, matrix.counts):
            lines.append(code + "," + ",".join(str(c) for c in row))
        return "\n".join(lines) + "\n"
    if fmt == "json":
        payload = {
            "from_edition": matrix.from_edition,
            "to_edition": matrix.to_edition,
            "stage_order": list(STAGE_ORDER),
            "counts": matrix.counts,
            "row_percent": [
                [str(cell) if cell is not None else None for cell in row]
                for row in matrix.row_percent
            ],
            "row_percent_value": [
                [float(cell) if cell is not None else None for cell in row]
                for row in matrix.row_percent
            ],
            "unstaged": matrix.unstaged,
            "exclusions": [
                {"patient": patient, "reason": reason}
                for patient, reason in matrix.exclusions
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    raise StagegraphError(f"unknown matrix export format {fmt!r}")


def parse_matrix(text: str) -> TransitionMatrix:
    payload = json.loads(text)
    if payload.get("stage_order") != list(STAGE_ORDER):
        raise StagegraphError("matrix JSON has an unexpected stage order")
    row_percent = [
        [Fraction(cell) if cell is not None else None for cell in row]
        for row in payload["row_percent"]
    ]
    return TransitionMatrix(
        payload["from_edition"],
        payload["to_edition"],
        [list(map(int, row)) for row in payload["counts"]],
        row_percent,
        int(payload["unstaged"]),
        tuple((e["patient"], e["reason"]) for e in payload["exclusions"]),
    )
