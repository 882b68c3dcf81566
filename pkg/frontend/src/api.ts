/** Typed client for the stagegraph JSON API. All staging knowledge arrives as
 * data; nothing in the UI computes a stage or knows the guideline tables. */

export type Edition = "ajcc7" | "ajcc8";

export interface PatientSummary {
  id: string;
  name: string | null;
}

export interface StageInfo {
  edition: string;
  code: string;
  iri: string;
  label: string;
}

export interface DerivedClass {
  axis: string;
  iri: string;
  label: string;
}

export interface RawTumorValues {
  t_size_mm: number | null;
  in_situ: boolean;
  chest_wall_or_skin: boolean;
  positive_nodes: number | null;
  micrometastasis_only: boolean;
  metastasized: boolean;
  grade: number | null;
  her2: string | null;
  er: string | null;
  pr: string | null;
}

export interface BiomarkersAndStaging {
  raw: RawTumorValues;
  derived_classes: DerivedClass[];
  stage: StageInfo | null;
  no_stage_reason: string | null;
  other_edition_stage: StageInfo | null;
  change_direction: string | null;
  explanation: string | null;
  explanation_assertion: string | null;
}

export interface CareOption {
  label: string;
  kind: "recommended_test" | "treatment_option";
  iri: string;
}

export interface SuggestedDrug {
  drug: string;
  disease: string;
  evidence_id: string;
  evidence_level: string | null;
  trust_rating: string | null;
  source: string | null;
  status: string | null;
  rating: string | null;
  explanation: string;
}

export interface PatientReport {
  patient: {
    id: string;
    name: string | null;
    demographics: Record<string, string>;
  };
  biomarkers_and_staging: BiomarkersAndStaging;
  treatment_plan: CareOption[];
  suggested_drugs: SuggestedDrug[];
}

export interface MatrixResponse {
  from_edition: string;
  to_edition: string;
  stage_order: string[];
  counts: number[][];
  row_percent: (string | null)[][];
  row_percent_value: (number | null)[][];
  unstaged: number;
  exclusions: { patient: string; reason: string }[];
}

export interface TransitionEntry {
  patient: string;
  from_stage: string;
  to_stage: string;
  direction: string;
}

export interface TransitionsResponse {
  from_edition: string;
  to_edition: string;
  changes: TransitionEntry[];
  exclusions: { patient: string; reason: string }[];
}

export class ApiClient {
  constructor(private base: string = "") {}

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(this.base + path);
    if (!response.ok) {
      const body = await response.json().catch(() => ({ detail: response.statusText }));
      throw new Error(body.detail ?? `request failed: ${response.status}`);
    }
    return (await response.json()) as T;
  }

  listPatients(): Promise<PatientSummary[]> {
    return this.get("/api/patients");
  }

  report(patientId: string, edition: Edition): Promise<PatientReport> {
    return this.get(`/api/patients/${encodeURIComponent(patientId)}/report?edition=${edition}`);
  }

  matrix(from: Edition, to: Edition): Promise<MatrixResponse> {
    return this.get(`/api/matrix?from_edition=${from}&to_edition=${to}`);
  }

  transitions(from: Edition, to: Edition): Promise<TransitionsResponse> {
    return this.get(`/api/transitions?from_edition=${from}&to_edition=${to}`);
  }
}
