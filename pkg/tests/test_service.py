"""HTTP service contract tests over a tiny checkpoint (direct calls)."""

import pytest
from fastapi.testclient import TestClient

from restyle.config import PipelineConfig
from restyle.model import CharTokenizer, Checkpoint, ModelConfig
from restyle.pipeline import TransferSystem
from restyle.service import create_app, load_exemplar_sets
from restyle.style_space import default_style_embedder


@pytest.fixture(scope="module")
def client():
    texts = ["THE CAT RUNS!!!", "the cat runs...", "THE DOG SITS!!!",
             "the dog sits...", "abcdefghijklmnopqrstuvwxyz"]
    tok = CharTokenizer.train(texts)
    cfg = ModelConfig(vocab_size=tok.vocab_size, hidden_dim=16, embed_dim=768,
                      n_layers_enc=1, n_layers_dec=1, n_heads=2, max_len=20,
                      dropout=0.0, ffn_dim=32, seed=0)
    ckpt = Checkpoint.fresh(cfg, tok)
    ckpt.metadata["stage"] = "distilled"
    system = TransferSystem(ckpt, default_style_embedder(), mode="distilled")
    config = PipelineConfig()
    app = create_app(system, config, {
        "calm": ["the cat runs...", "the dog sits..."],
        "loud": ["THE CAT RUNS!!!", "THE DOG SITS!!!"],
    })
    return TestClient(app, raise_server_exceptions=False)


def post_transfer(client, **overrides):
    body = {"source_text": "THE CAT RUNS!!!",
            "target_exemplars": ["the dog sits...", "the cat runs..."],
            "rerank_k": 2, "seed": 7}
    body.update(overrides)
    return client.post("/v1/transfer", json=body)


class TestHealth:
    def test_health_fields(self, client):
        r = client.get("/v1/health")
        assert r.status_code == 200
        body = r.json()
        assert body["status"] == "ok"
        assert len(body["config_hash"]) == 12
        assert body["model_id"]

    def test_config_hash_stable_across_identical_configs(self):
        a, b = PipelineConfig(), PipelineConfig()
        assert a.config_hash() == b.config_hash()


class TestTransferEndpoint:
    def test_response_shape(self, client):
        r = post_transfer(client)
        assert r.status_code == 200
        body = r.json()
        assert set(body) == {"output_text", "scores", "candidates",
                             "timing_ms", "model_id"}
        assert len(body["candidates"]) == 2
        assert body["candidates"][0]["text"] == body["output_text"]
        ranks = [c["rank"] for c in body["candidates"]]
        assert ranks == [1, 2]

    def test_rerank_k5_returns_five_candidates(self, client):
        r = post_transfer(client, rerank_k=5)
        assert len(r.json()["candidates"]) == 5

    def test_candidates_sorted_by_rerank_score(self, client):
        from restyle.metrics import ScoreVector, rerank_score
        body = post_transfer(client, rerank_k=5).json()
        scores = [rerank_score(ScoreVector.from_dict(c["scores"]))
                  for c in body["candidates"]]
        assert scores == sorted(scores, reverse=True)

    def test_identical_request_identical_response(self, client):
        a = post_transfer(client).json()
        b = post_transfer(client).json()
        a.pop("timing_ms"), b.pop("timing_ms")
        assert a == b

    def test_exemplar_set_reference(self, client):
        r = post_transfer(client, target_exemplars=None, exemplar_set_id="calm")
        assert r.status_code == 200

    def test_unknown_exemplar_set_is_422(self, client):
        r = post_transfer(client, target_exemplars=None, exemplar_set_id="nope")
        assert r.status_code == 422
        assert r.json()["errors"][0]["field"] == "exemplar_set_id"

    def test_lam_out_of_range_is_422_with_field(self, client):
        r = post_transfer(client, lam=1.2)
        assert r.status_code == 422
        assert r.json()["errors"][0]["field"] == "lam"

    def test_empty_exemplars_is_422(self, client):
        r = post_transfer(client, target_exemplars=[])
        assert r.status_code == 422
        assert r.json()["errors"][0]["field"] == "target_exemplars"

    def test_both_exemplar_sources_is_422(self, client):
        r = post_transfer(client, exemplar_set_id="calm")
        assert r.status_code == 422

    def test_schema_violation_is_400_with_field(self, client):
        r = client.post("/v1/transfer", json={"target_exemplars": ["x"]})
        assert r.status_code == 400
        fields = [e["field"] for e in r.json()["errors"]]
        assert "source_text" in fields

    def test_rerank_k_and_tau_validation(self, client):
        assert post_transfer(client, rerank_k=0).status_code == 422
        assert post_transfer(client, tau=0.0).status_code == 422
        assert post_transfer(client, top_p=0.0).status_code == 422


class TestEmbedEndpoint:
    def test_embed_shape(self, client):
        r = client.post("/v1/embed", json={"text": "some words"})
        assert r.status_code == 200
        body = r.json()
        assert body["dimension"] == 768
        assert len(body["values"]) == 768
        assert body["embedder_id"] == "stylo-768-v1"

    def test_empty_text_schema_error(self, client):
        assert client.post("/v1/embed", json={"text": ""}).status_code == 400


class TestExemplarSets:
    def test_listing(self, client):
        r = client.get("/v1/exemplar-sets")
        sets = {s["id"]: s for s in r.json()["sets"]}
        assert set(sets) == {"calm", "loud"}
        assert sets["calm"]["size"] == 2
        assert len(sets["calm"]["preview"]) <= 3

    def test_load_exemplar_sets_from_dir(self, tmp_path):
        (tmp_path / "a.jsonl").write_text('{"text": "one"}\n"two"\n')
        (tmp_path / "b.jsonl").write_text('{"text": "three"}\n')
        sets = load_exemplar_sets(tmp_path)
        assert sets == {"a": ["one", "two"], "b": ["three"]}


class TestSweepEndpoint:
    def test_rows_per_lam(self, client):
        r = client.post("/v1/sweep", json={
            "source_text": "THE CAT RUNS!!!",
            "exemplar_set_id": "calm",
            "lam_grid": [0.0, 0.5, 1.0], "seed": 3})
        assert r.status_code == 200
        rows = r.json()["rows"]
        assert [row["lam"] for row in rows] == [0.0, 0.5, 1.0]
        for row in rows:
            assert set(row) == {"lam", "output_text", "sim", "towards"}

    def test_bad_grid_is_422(self, client):
        r = client.post("/v1/sweep", json={
            "source_text": "x", "exemplar_set_id": "calm",
            "lam_grid": [0.0, 2.0]})
        assert r.status_code == 422


class TestServeWiring:
    def test_env_vars_override_bind_and_checkpoint(self, tmp_path, monkeypatch):
        texts = ["ab cd", "ef gh"]
        tok = CharTokenizer.train(texts)
        cfg = ModelConfig(vocab_size=tok.vocab_size, hidden_dim=16,
                          embed_dim=768, n_layers_enc=1, n_layers_dec=1,
                          n_heads=2, max_len=12, dropout=0.0, ffn_dim=32)
        Checkpoint.fresh(cfg, tok).save(tmp_path / "envck")

        captured = {}

        def fake_run(app, host, port, **kw):
            captured.update(host=host, port=port)

        import uvicorn
        monkeypatch.setattr(uvicorn, "run", fake_run)
        monkeypatch.setenv("RESTYLE_CHECKPOINT", str(tmp_path / "envck"))
        monkeypatch.setenv("RESTYLE_BIND", "0.0.0.0:9101")

        from restyle.service import serve
        serve(PipelineConfig(), tmp_path / "does-not-exist")
        assert captured == {"host": "0.0.0.0", "port": 9101}


class TestConcurrency:
    def test_concurrent_identical_requests_identical_outputs(self, client):
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=4) as pool:
            futures = [pool.submit(post_transfer, client) for _ in range(4)]
            bodies = [f.result().json() for f in futures]
        for body in bodies:
            body.pop("timing_ms")
        assert all(body == bodies[0] for body in bodies[1:])


class TestErrorOpacity:
    def test_internal_errors_never_leak_traces(self):
        class ExplodingSystem:
            model_id = "boom"
            embedder = default_style_embedder()

            def transfer(self, *a, **k):
                raise RuntimeError("secret internals: /etc/passwd")

        app = create_app(ExplodingSystem(), PipelineConfig(), {"s": ["x"]})
        client = TestClient(app, raise_server_exceptions=False)
        r = client.post("/v1/transfer", json={
            "source_text": "hello", "exemplar_set_id": "s"})
        assert r.status_code == 500
        assert r.json() == {"error": "internal error"}
        assert "secret" not in r.text and "Traceback" not in r.text
