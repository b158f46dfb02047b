import { describe, expect, it } from "vitest";

import { SessionState } from "../src/state.js";
import { makeTransferResponse } from "./fake_service.js";

function populated(): SessionState {
  const state = new SessionState();
  state.sourceText = "THE CAT RUNS!!!";
  state.exemplarSetId = "calm";
  state.lam = 0.75;
  state.rerankK = 5;
  state.seed = 42;
  return state;
}

describe("SessionState.buildRequest", () => {
  it("uses the exemplar set id when selected", () => {
    const req = populated().buildRequest();
    expect(req).toEqual({
      source_text: "THE CAT RUNS!!!",
      lam: 0.75,
      rerank_k: 5,
      seed: 42,
      exemplar_set_id: "calm",
    });
  });

  it("falls back to pasted exemplars", () => {
    const state = populated();
    state.exemplarSetId = null;
    state.pastedExemplars = ["a...", "b..."];
    const req = state.buildRequest();
    expect(req.target_exemplars).toEqual(["a...", "b..."]);
    expect(req.exemplar_set_id).toBeUndefined();
  });
});

describe("history", () => {
  it("entries are immutable once appended", () => {
    const state = populated();
    const req = state.buildRequest();
    const entry = state.record(req, makeTransferResponse(req));
    expect(Object.isFrozen(entry)).toBe(true);
    expect(Object.isFrozen(entry.request)).toBe(true);
    expect(() => {
      (entry.response as any).output_text = "tampered";
    }).toThrow();
    expect(state.history).toHaveLength(1);
  });

  it("records are snapshots, not live references", () => {
    const state = populated();
    const req = state.buildRequest();
    state.record(req, makeTransferResponse(req));
    state.sourceText = "edited afterwards";
    expect(state.history[0]!.request.source_text).toBe("THE CAT RUNS!!!");
  });
});

describe("session export/import", () => {
  it("round-trips settings and history", () => {
    const state = populated();
    const req = state.buildRequest();
    state.record(req, makeTransferResponse(req));
    const json = state.export();
    const restored = SessionState.import(json);
    expect(restored.sourceText).toBe(state.sourceText);
    expect(restored.lam).toBe(0.75);
    expect(restored.rerankK).toBe(5);
    expect(restored.seed).toBe(42);
    expect(restored.history).toHaveLength(1);
    expect(restored.history[0]!.response.output_text).toBe(
      state.history[0]!.response.output_text,
    );
  });
});

describe("draft iteration", () => {
  it("promoteDraft loads a candidate as the next source", () => {
    const state = populated();
    state.promoteDraft("chosen candidate text");
    expect(state.sourceText).toBe("chosen candidate text");
  });

  it("bumpSeed increments for regeneration", () => {
    const state = populated();
    expect(state.bumpSeed()).toBe(43);
    expect(state.buildRequest().seed).toBe(43);
  });
});
