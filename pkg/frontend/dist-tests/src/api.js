/** Typed client for the stagegraph JSON API. All staging knowledge arrives as
 * data; nothing in the UI computes a stage or knows the guideline tables. */
export class ApiClient {
    constructor(base = "") {
        this.base = base;
    }
    async get(path) {
        const response = await fetch(this.base + path);
        if (!response.ok) {
            const body = await response.json().catch(() => ({ detail: response.statusText }));
            throw new Error(body.detail ?? `request failed: ${response.status}`);
        }
        return (await response.json());
    }
    listPatients() {
        return this.get("/api/patients");
    }
    report(patientId, edition) {
        return this.get(`/api/patients/${encodeURIComponent(patientId)}/report?edition=${edition}`);
    }
    matrix(from, to) {
        return this.get(`/api/matrix?from_edition=${from}&to_edition=${to}`);
    }
    transitions(from, to) {
        return this.get(`/api/transitions?from_edition=${from}&to_edition=${to}`);
    }
}
