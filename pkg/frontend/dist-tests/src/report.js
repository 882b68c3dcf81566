/** Renders the four-section patient report. */
import { badgeClass, rawValueRows } from "./viewmodel.js";
function el(tag, className, text) {
    const node = document.createElement(tag);
    if (className) {
        node.className = className;
    }
    if (text !== undefined) {
        node.textContent = text;
    }
    return node;
}
function section(title, id) {
    const panel = el("section", "panel");
    panel.id = id;
    panel.appendChild(el("h2", undefined, title));
    return panel;
}
function keyValueTable(rows) {
    const table = el("table", "kv");
    for (const [key, value] of rows) {
        const tr = el("tr");
        tr.appendChild(el("th", undefined, key));
        tr.appendChild(el("td", undefined, value));
        table.appendChild(tr);
    }
    return table;
}
function patientSection(report) {
    const panel = section("Patient details", "section-patient");
    const d = report.patient.demographics;
    panel.appendChild(el("p", "patient-name", report.patient.name ?? report.patient.id));
    panel.appendChild(keyValueTable([
        ["Record", report.patient.id],
        ["Age at diagnosis", d.age ?? "–"],
        ["Sex", d.sex ?? "–"],
        ["Race", d.race ?? "–"],
        ["Ethnicity", d.ethnicity ?? "–"],
        ["Marital status", d.marital_status ?? "–"],
        ["Year of diagnosis", d.year_of_diagnosis ?? "–"],
        ["Vital status", d.vital_status ?? "–"],
        ["Survival (months)", d.survival_months ?? "–"],
    ]));
    return panel;
}
function stagingSection(report) {
    const staging = report.biomarkers_and_staging;
    const panel = section("Biomarkers and staging", "section-staging");
    const stageLine = el("div", "stage-line");
    if (staging.stage) {
        stageLine.appendChild(el("span", "stage-label", staging.stage.label));
        if (staging.change_direction) {
            stageLine.appendChild(el("span", badgeClass(staging.change_direction), staging.change_direction));
        }
        if (staging.other_edition_stage) {
            stageLine.appendChild(el("span", "other-stage", `(${staging.other_edition_stage.label} under the other edition)`));
        }
    }
    else {
        stageLine.appendChild(el("span", "stage-label no-stage", "No stage"));
        stageLine.appendChild(el("span", "no-stage-reason", staging.no_stage_reason ?? ""));
    }
    panel.appendChild(stageLine);
    panel.appendChild(el("h3", undefined, "Recorded values"));
    panel.appendChild(keyValueTable(rawValueRows(staging.raw)));
    if (staging.derived_classes.length) {
        panel.appendChild(el("h3", undefined, "Derived classes"));
        const chips = el("div", "chips");
        for (const derived of staging.derived_classes) {
            chips.appendChild(el("span", "chip", `${derived.axis}: ${derived.label}`));
        }
        panel.appendChild(chips);
    }
    if (staging.explanation) {
        const details = el("details", "explanation");
        details.open = true;
        details.appendChild(el("summary", undefined, "Why this stage?"));
        details.appendChild(el("pre", undefined, staging.explanation));
        panel.appendChild(details);
    }
    return panel;
}
function treatmentSection(report) {
    const panel = section("Treatment plan", "section-treatment");
    if (!report.treatment_plan.length) {
        panel.appendChild(el("p", "empty", "No stage, so no plan entries."));
        return panel;
    }
    for (const kind of ["recommended_test", "treatment_option"]) {
        const items = report.treatment_plan.filter((option) => option.kind === kind);
        if (!items.length) {
            continue;
        }
        panel.appendChild(el("h3", undefined, kind === "recommended_test" ? "Recommended tests" : "Treatment options"));
        const list = el("ul");
        for (const option of items) {
            list.appendChild(el("li", undefined, option.label));
        }
        panel.appendChild(list);
    }
    return panel;
}
function drugsSection(report) {
    const panel = section("Suggested drugs", "section-drugs");
    if (!report.suggested_drugs.length) {
        panel.appendChild(el("p", "empty", "No matching evidence."));
        return panel;
    }
    const table = el("table", "drugs");
    const head = el("tr");
    for (const column of ["Drug", "Targets", "Level", "Trust", "Source", "Why"]) {
        head.appendChild(el("th", undefined, column));
    }
    table.appendChild(head);
    for (const drug of report.suggested_drugs) {
        const tr = el("tr");
        tr.appendChild(el("td", "drug-name", drug.drug));
        tr.appendChild(el("td", undefined, drug.disease));
        tr.appendChild(el("td", undefined, drug.evidence_level ?? "–"));
        tr.appendChild(el("td", undefined, drug.trust_rating ?? "–"));
        tr.appendChild(el("td", undefined, drug.source ?? "–"));
        const why = el("td", "drug-why");
        why.title = drug.explanation;
        why.textContent = drug.explanation;
        tr.appendChild(why);
        table.appendChild(tr);
    }
    panel.appendChild(table);
    return panel;
}
export function renderReport(container, report) {
    container.replaceChildren(patientSection(report), stagingSection(report), treatmentSection(report), drugsSection(report));
}
export function renderReportError(container, message) {
    const panel = el("section", "panel error");
    panel.appendChild(el("h2", undefined, "Report unavailable"));
    panel.appendChild(el("p", undefined, message));
    container.replaceChildren(panel);
}
