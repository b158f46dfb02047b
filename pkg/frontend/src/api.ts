// Typed client for the /v1 JSON API. Every number the UI displays comes
// straight from these response payloads; nothing is recomputed locally.

export interface ScoreFields {
  away: number;
  towards: number;
  sim: number;
  fluency?: number;
  aux?: Record<string, number>;
}

export interface Candidate {
  text: string;
  scores: ScoreFields;
  rank: number;
}

export interface TransferRequest {
  source_text: string;
  target_exemplars?: string[];
  exemplar_set_id?: string;
  lam?: number;
  rerank_k?: number;
  seed?: number;
  top_p?: number;
  tau?: number;
}

export interface TransferResponse {
  output_text: string;
  scores: ScoreFields;
  candidates: Candidate[];
  timing_ms: number;
  model_id: string;
}

export interface ExemplarSetInfo {
  id: string;
  size: number;
  preview: string[];
}

export interface SweepRow {
  lam: number;
  output_text: string;
  sim: number;
  towards: number;
}

export interface HealthInfo {
  status: string;
  model_id: string;
  config_hash: string;
}

export interface FieldError {
  field: string;
  message: string;
}

export class ApiError extends Error {
  readonly status: number;
  readonly fieldErrors: FieldError[];

  constructor(status: number, fieldErrors: FieldError[], message: string) {
    super(message);
    this.status = status;
    this.fieldErrors = fieldErrors;
  }
}

async function post<T>(base: string, path: string, body: unknown): Promise<T> {
  let res: Response;
  try {
    res = await fetch(`${base}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  } catch (err) {
    throw new ApiError(0, [], `service unreachable: ${String(err)}`);
  }
  if (!res.ok) {
    let errors: FieldError[] = [];
    let detail = `${res.status}`;
    try {
      const payload = await res.json();
      errors = payload.errors ?? [];
      detail = JSON.stringify(payload);
    } catch {
      /* non-JSON error body; keep the status text */
    }
    throw new ApiError(res.status, errors, `request failed: ${detail}`);
  }
  return res.json() as Promise<T>;
}

export class ApiClient {
  constructor(readonly base: string = "") {}

  async health(): Promise<HealthInfo> {
    const res = await fetch(`${this.base}/v1/health`);
    if (!res.ok) throw new ApiError(res.status, [], "health check failed");
    return res.json();
  }

  async exemplarSets(): Promise<ExemplarSetInfo[]> {
    const res = await fetch(`${this.base}/v1/exemplar-sets`);
    if (!res.ok) throw new ApiError(res.status, [], "exemplar listing failed");
    const payload = await res.json();
    return payload.sets;
  }

  transfer(req: TransferRequest): Promise<TransferResponse> {
    return post<TransferResponse>(this.base, "/v1/transfer", req);
  }

  async sweep(req: {
    source_text: string;
    target_exemplars?: string[];
    exemplar_set_id?: string;
    lam_grid: number[];
    seed?: number;
  }): Promise<SweepRow[]> {
    const payload = await post<{ rows: SweepRow[] }>(this.base, "/v1/sweep", req);
    return payload.rows;
  }
}
