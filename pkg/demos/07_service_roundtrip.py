"""The HTTP service exercised in-process: transfer, embed, sweep, health.

The same app object serves the browser studio; here it is driven through
the test client so the demo needs no open port.
"""

from common import demo_corpus, ensure_recon_checkpoint
from fastapi.testclient import TestClient

from restyle import PipelineConfig, TransferSystem, default_style_embedder
from restyle.service import create_app

ckpt = ensure_recon_checkpoint()
_, _, test = demo_corpus()
shout = [a for a in test.author_ids if a.startswith("shout")]
mellow = [a for a in test.author_ids if a.startswith("mellow")]

system = TransferSystem(ckpt, default_style_embedder(), mode="recon")
config = PipelineConfig()
app = create_app(system, config, {
    "shouting": test.texts_for(shout[0]),
    "mellow": test.texts_for(mellow[0]),
})
client = TestClient(app)

print("GET /v1/health ->", client.get("/v1/health").json())

sets = client.get("/v1/exemplar-sets").json()["sets"]
print("\nexemplar sets:", [(s["id"], s["size"]) for s in sets])

source = test.texts_for(mellow[0])[0]
body = {"source_text": source, "exemplar_set_id": "shouting",
        "rerank_k": 3, "seed": 9}
response = client.post("/v1/transfer", json=body).json()
print(f"\nPOST /v1/transfer  (source: {source})")
for cand in response["candidates"]:
    scores = {k: round(v, 3) for k, v in cand["scores"].items() if k != "aux"}
    print(f"  rank {cand['rank']}: {cand['text']}  {scores}")

# The API is stateless: replaying the same request reproduces the output.
replay = client.post("/v1/transfer", json=body).json()
print("\nreplay reproduces output:",
      replay["output_text"] == response["output_text"])

rows = client.post("/v1/sweep", json={
    "source_text": source, "exemplar_set_id": "shouting",
    "lam_grid": [0.0, 0.5, 1.0], "seed": 9}).json()["rows"]
print("\nPOST /v1/sweep:")
for row in rows:
    print(f"  lam={row['lam']:4.2f} towards={row['towards']:.3f} "
          f"sim={row['sim']:.3f}  {row['output_text']}")

# Constraint violations come back as 422 with the offending field.
bad = client.post("/v1/transfer", json={"source_text": "x",
                                        "exemplar_set_id": "shouting",
                                        "lam": 1.5})
print("\nlam=1.5 ->", bad.status_code, bad.json())
