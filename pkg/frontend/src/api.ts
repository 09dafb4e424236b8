/** Typed client for the answer-engine HTTP API. */

export interface PolicySummary {
  id: string;
  title: string;
  n_segments: number;
}

export interface PolicyDetail {
  id: string;
  title: string;
  segments: string[];
}

export interface ParaphraseView {
  text: string;
  method: string;
  provenance: string;
}

export interface BestSpan {
  start: number;
  end: number;
  text: string;
  answerable: boolean;
}

export interface SummaryEntry {
  rank: number;
  segment_index: number;
  segment_text: string;
  score: number;
  winning_paraphrase: string;
  winning_method: string;
  best_span: BestSpan | null;
}

export interface AnswerPayload {
  query: string;
  paraphrases: ParaphraseView[];
  summary: SummaryEntry[];
  timing_ms: number;
}

export interface HealthPayload {
  status: string;
  backend: string;
  n_policies: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  let detail = resp.statusText || `HTTP ${resp.status}`;
  try {
    const body = await resp.json();
    if (body && body.detail) {
      detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(resp.status, detail);
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  private async getJson<T>(path: string): Promise<T> {
    const resp = await fetch(this.baseUrl + path);
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  async listPolicies(): Promise<PolicySummary[]> {
    const body = await this.getJson<{ policies: PolicySummary[] }>("/policies");
    return body.policies;
  }

  async getPolicy(id: string): Promise<PolicyDetail> {
    return this.getJson<PolicyDetail>(`/policies/${encodeURIComponent(id)}`);
  }

  async health(): Promise<HealthPayload> {
    return this.getJson<HealthPayload>("/health");
  }

  async ask(
    policyId: string,
    question: string,
    k: number,
    order: "rank" | "document",
    signal?: AbortSignal,
  ): Promise<AnswerPayload> {
    const resp = await fetch(this.baseUrl + "/query", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        policy_id: policyId,
        question,
        k,
        presentation_order: order,
      }),
      signal,
    });
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as AnswerPayload;
  }
}
