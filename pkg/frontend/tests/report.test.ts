import assert from "node:assert/strict";
import { test } from "node:test";

import { JSDOM } from "jsdom";

import type { PatientReport } from "../src/api.js";
import { renderReport } from "../src/report.js";

const dom = new JSDOM("<!doctype html><body><div id='root'></div></body>");
(globalThis as any).document = dom.window.document;

function fixtureReport(edition: "AJCC7" | "AJCC8"): PatientReport {
  // mirrors the scripted down-staging scenario as the API serves it
  const seventh = { edition: "AJCC7", code: "IIIA", iri: "urn:s7", label: "AJCC7 Stage IIIA" };
  const eighth = { edition: "AJCC8", code: "IIB", iri: "urn:s8", label: "AJCC8 Stage IIB" };
  const selected = edition === "AJCC7" ? seventh : eighth;
  const other = edition === "AJCC7" ? eighth : seventh;
  return {
    patient: { id: "P0007", name: "Ewan", demographics: { age: "61", sex: "Female" } },
    biomarkers_and_staging: {
      raw: {
        t_size_mm: 60,
        in_situ: false,
        chest_wall_or_skin: false,
        positive_nodes: 2,
        micrometastasis_only: false,
        metastasized: false,
        grade: 1,
        her2: "Pos",
        er: "Pos",
        pr: "Neg",
      },
      derived_classes: [{ axis: "T", iri: "urn:t", label: "T3" }],
      stage: selected,
      no_stage_reason: null,
      other_edition_stage: other,
      change_direction: "down-staged",
      explanation: "Ewan's tumor was found to be ... since the following are true:\n- ...",
      explanation_assertion: "urn:assertion",
    },
    treatment_plan: [
      { label: "CT scan", kind: "recommended_test", iri: "urn:ct" },
      { label: "Mastectomy", kind: "treatment_option", iri: "urn:mx" },
    ],
    suggested_drugs: [
      {
        drug: "Tamoxifen",
        disease: "Stage II breast cancer",
        evidence_id: "urn:e1",
        evidence_level: "A",
        trust_rating: "4.0",
        source: "Registry curation",
        status: "accepted",
        rating: "4",
        explanation: "targets the broader stage",
      },
    ],
  };
}

test("report renders all four sections", () => {
  const root = dom.window.document.getElementById("root")!;
  renderReport(root as unknown as HTMLElement, fixtureReport("AJCC8"));
  for (const id of ["section-patient", "section-staging", "section-treatment", "section-drugs"]) {
    assert.ok(root.querySelector(`#${id}`), `missing section ${id}`);
  }
});

test("edition toggle flips the stage label and keeps the down-staged badge", () => {
  const root = dom.window.document.getElementById("root")!;
  renderReport(root as unknown as HTMLElement, fixtureReport("AJCC7"));
  assert.match(root.querySelector(".stage-label")!.textContent!, /IIIA/);
  assert.equal(root.querySelector(".badge")!.textContent, "down-staged");
  assert.ok(root.querySelector(".badge")!.className.includes("badge-down"));

  renderReport(root as unknown as HTMLElement, fixtureReport("AJCC8"));
  assert.match(root.querySelector(".stage-label")!.textContent!, /IIB/);
  assert.equal(root.querySelector(".badge")!.textContent, "down-staged");
});

test("edition toggle is idempotent: same data renders identical markup", () => {
  const root = dom.window.document.getElementById("root")!;
  renderReport(root as unknown as HTMLElement, fixtureReport("AJCC8"));
  const first = root.innerHTML;
  renderReport(root as unknown as HTMLElement, fixtureReport("AJCC7"));
  renderReport(root as unknown as HTMLElement, fixtureReport("AJCC8"));
  assert.equal(root.innerHTML, first);
});

test("absent stage renders the explicit no-stage reason", () => {
  const report = fixtureReport("AJCC8");
  report.biomarkers_and_staging.stage = null;
  report.biomarkers_and_staging.change_direction = null;
  report.biomarkers_and_staging.explanation = null;
  report.biomarkers_and_staging.no_stage_reason = "no rule matched: profile is missing HER2";
  report.treatment_plan = [];
  const root = dom.window.document.getElementById("root")!;
  renderReport(root as unknown as HTMLElement, report);
  assert.match(root.querySelector(".stage-label")!.textContent!, /No stage/);
  assert.match(root.querySelector(".no-stage-reason")!.textContent!, /missing HER2/);
  // the four sections are still all present
  assert.equal(root.querySelectorAll("section.panel").length, 4);
});

test("explanation panel shows the line-per-criterion text", () => {
  const report = fixtureReport("AJCC8");
  report.biomarkers_and_staging.explanation =
    "Header:\n- Primary Tumor size is T3.\n- Degree of spread to lymph nodes is N3.";
  const root = dom.window.document.getElementById("root")!;
  renderReport(root as unknown as HTMLElement, report);
  const pre = root.querySelector("details.explanation pre")!;
  assert.equal(pre.textContent!.split("\n").filter((l) => l.startsWith("- ")).length, 2);
});
