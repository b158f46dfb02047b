import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { installFakeService } from "./fake_service.js";

afterEach(() => vi.unstubAllGlobals());

describe("ApiClient.transfer", () => {
  it("posts the request body to /v1/transfer", async () => {
    const { calls } = installFakeService();
    const client = new ApiClient("");
    const response = await client.transfer({
      source_text: "x", exemplar_set_id: "calm", rerank_k: 5, seed: 1, lam: 1,
    });
    expect(calls[0]!.path).toBe("/v1/transfer");
    expect(calls[0]!.body.rerank_k).toBe(5);
    expect(response.candidates).toHaveLength(5);
    expect(response.candidates[0]!.rank).toBe(1);
  });

  it("maps 422 bodies to field errors", async () => {
    installFakeService();
    const client = new ApiClient("");
    const err = await client
      .transfer({ source_text: "x", exemplar_set_id: "calm", lam: 2 })
      .catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(422);
    expect(err.fieldErrors[0]!.field).toBe("lam");
  });

  it("maps network failures to status 0", async () => {
    installFakeService({ unreachable: true });
    const client = new ApiClient("");
    const err = await client
      .transfer({ source_text: "x", exemplar_set_id: "calm" })
      .catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(0);
  });
});

describe("ApiClient.sweep", () => {
  it("returns one row per grid point", async () => {
    installFakeService();
    const client = new ApiClient("");
    const rows = await client.sweep({
      source_text: "x", exemplar_set_id: "calm",
      lam_grid: [0, 0.5, 1],
    });
    expect(rows.map((r) => r.lam)).toEqual([0, 0.5, 1]);
  });
});

describe("ApiClient.health and exemplarSets", () => {
  it("reads health fields", async () => {
    installFakeService();
    const health = await new ApiClient("").health();
    expect(health.model_id).toBe("fake-model-001");
  });

  it("lists exemplar sets", async () => {
    installFakeService();
    const sets = await new ApiClient("").exemplarSets();
    expect(sets.map((s) => s.id)).toEqual(["calm", "loud"]);
  });
});
