// Client-side session state. History entries are frozen once appended;
// replaying an entry's request against the same model_id reproduces its
// response text because the service is stateless and seed-determined.

import type { TransferRequest, TransferResponse } from "./api.js";

export interface HistoryEntry {
  readonly request: TransferRequest;
  readonly response: TransferResponse;
  readonly at: string;
}

export interface SessionSnapshot {
  sourceText: string;
  exemplarSetId: string | null;
  pastedExemplars: string[];
  lam: number;
  rerankK: number;
  seed: number;
  history: HistoryEntry[];
}

export class SessionState {
  sourceText = "";
  exemplarSetId: string | null = null;
  pastedExemplars: string[] = [];
  lam = 1.0;
  rerankK = 1;
  seed = 0;
  private readonly entries: HistoryEntry[] = [];

  get history(): readonly HistoryEntry[] {
    return this.entries;
  }

  buildRequest(): TransferRequest {
    const req: TransferRequest = {
      source_text: this.sourceText,
      lam: this.lam,
      rerank_k: this.rerankK,
      seed: this.seed,
    };
    if (this.exemplarSetId !== null) {
      req.exemplar_set_id = this.exemplarSetId;
    } else {
      req.target_exemplars = [...this.pastedExemplars];
    }
    return req;
  }

  record(request: TransferRequest, response: TransferResponse): HistoryEntry {
    const entry: HistoryEntry = Object.freeze({
      request: Object.freeze(structuredClone(request)),
      response: Object.freeze(structuredClone(response)),
      at: new Date().toISOString(),
    });
    this.entries.push(entry);
    return entry;
  }

  bumpSeed(): number {
    this.seed += 1;
    return this.seed;
  }

  /** Load a candidate back into the editor: the human iteration loop. */
  promoteDraft(text: string): void {
    this.sourceText = text;
  }

  export(): string {
    const snapshot: SessionSnapshot = {
      sourceText: this.sourceText,
      exemplarSetId: this.exemplarSetId,
      pastedExemplars: [...this.pastedExemplars],
      lam: this.lam,
      rerankK: this.rerankK,
      seed: this.seed,
      history: [...this.entries],
    };
    return JSON.stringify(snapshot, null, 2);
  }

  static import(json: string): SessionState {
    const snapshot = JSON.parse(json) as SessionSnapshot;
    const state = new SessionState();
    state.sourceText = snapshot.sourceText;
    state.exemplarSetId = snapshot.exemplarSetId;
    state.pastedExemplars = snapshot.pastedExemplars ?? [];
    state.lam = snapshot.lam;
    state.rerankK = snapshot.rerankK;
    state.seed = snapshot.seed;
    for (const entry of snapshot.history ?? []) {
      state.record(entry.request, entry.response);
    }
    return state;
  }
}
