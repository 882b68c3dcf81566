/** Wires the patient picker, guideline switcher, report view, and cohort view. */
import { ApiClient } from "./api.js";
import { renderMatrix } from "./matrix.js";
import { renderReport, renderReportError } from "./report.js";
import { SelectionGate } from "./viewmodel.js";
const api = new ApiClient("");
const gate = new SelectionGate();
const state = { patient: null, edition: "ajcc8", view: "report" };
function byId(id) {
    const node = document.getElementById(id);
    if (!node) {
        throw new Error(`missing #${id}`);
    }
    return node;
}
async function loadReport() {
    if (!state.patient) {
        return;
    }
    const token = gate.next();
    const container = byId("report");
    try {
        const report = await api.report(state.patient, state.edition);
        if (!gate.isCurrent(token)) {
            return; // a newer selection superseded this response
        }
        renderReport(container, report);
    }
    catch (error) {
        if (gate.isCurrent(token)) {
            renderReportError(container, error.message);
        }
    }
}
async function loadCohort() {
    const token = gate.next();
    const container = byId("cohort");
    const [matrix, transitions] = await Promise.all([
        api.matrix("ajcc7", "ajcc8"),
        api.transitions("ajcc7", "ajcc8"),
    ]);
    if (gate.isCurrent(token)) {
        renderMatrix(container, matrix, transitions);
    }
}
function switchView(view) {
    state.view = view;
    byId("report-view").hidden = view !== "report";
    byId("cohort-view").hidden = view !== "cohort";
    byId("tab-report").classList.toggle("active", view === "report");
    byId("tab-cohort").classList.toggle("active", view === "cohort");
    if (view === "cohort") {
        void loadCohort();
    }
}
async function boot() {
    const picker = byId("patient-picker");
    const patients = await api.listPatients();
    for (const patient of patients) {
        const option = document.createElement("option");
        option.value = patient.id;
        option.textContent = patient.name ? `${patient.name} (${patient.id})` : patient.id;
        picker.appendChild(option);
    }
    picker.addEventListener("change", () => {
        state.patient = picker.value;
        void loadReport();
    });
    for (const edition of ["ajcc7", "ajcc8"]) {
        const radio = byId(`edition-${edition}`);
        radio.addEventListener("change", () => {
            if (radio.checked) {
                state.edition = edition;
                void loadReport();
            }
        });
    }
    byId("tab-report").addEventListener("click", () => switchView("report"));
    byId("tab-cohort").addEventListener("click", () => switchView("cohort"));
    if (patients.length) {
        state.patient = patients[0].id;
        picker.value = patients[0].id;
        await loadReport();
    }
}
void boot();
