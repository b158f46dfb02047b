"""Local HTTP inference service over a loaded checkpoint.

Stateless JSON API: every request carries (or defaults) its own seed, so
any response can be reproduced by replaying the request against the same
model. Schema violations return 400 with field-level messages; constraint
violations (ranges, empty exemplars) return 422; unexpected errors return
a bare 500 with no stack trace in the body.
"""

from __future__ import annotations

import json
import logging
import time
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .config import PipelineConfig
from .pipeline import TransferSystem

logger = logging.getLogger(__name__)


class TransferRequest(BaseModel):
    source_text: str = Field(min_length=1)
    target_exemplars: list[str] | None = None
    exemplar_set_id: str | None = None
    lam: float | None = None
    rerank_k: int | None = None
    seed: int | None = None
    top_p: float | None = None
    tau: float | None = None


class SweepRequest(BaseModel):
    source_text: str = Field(min_length=1)
    target_exemplars: list[str] | None = None
    exemplar_set_id: str | None = None
    lam_grid: list[float] = Field(default=(0.0, 0.25, 0.5, 0.75, 1.0))
    rerank_k: int | None = None
    seed: int | None = None


class EmbedRequest(BaseModel):
    text: str = Field(min_length=1)


def _constraint_error(field: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=422,
                        content={"errors": [{"field": field, "message": message}]})


def load_exemplar_sets(directory) -> dict[str, list[str]]:
    """Load named exemplar collections from a directory of JSONL files.

    Each ``<name>.jsonl`` file becomes one set; lines may be bare strings
    or objects with a ``text`` field.
    """
    sets: dict[str, list[str]] = {}
    directory = Path(directory)
    for path in sorted(directory.glob("*.jsonl")):
        texts = []
        with path.open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                texts.append(obj if isinstance(obj, str) else obj["text"])
        if texts:
            sets[path.stem] = texts
    return sets


def create_app(system: TransferSystem, config: PipelineConfig,
               exemplar_sets: dict[str, list[str]] | None = None) -> FastAPI:
    """Build the service around an immutable transfer system."""
    app = FastAPI(title="restyle", version="0.1.0")
    exemplar_sets = dict(exemplar_sets or {})
    config_hash = config.config_hash()
    model_id = system.model_id

    @app.exception_handler(RequestValidationError)
    async def on_schema_error(request: Request, exc: RequestValidationError):
        errors = [{"field": ".".join(str(p) for p in e["loc"] if p != "body"),
                   "message": e["msg"]} for e in exc.errors()]
        return JSONResponse(status_code=400, content={"errors": errors})

    @app.exception_handler(Exception)
    async def on_internal_error(request: Request, exc: Exception):
        logger.exception("request failed: %s", request.url.path)
        return JSONResponse(status_code=500, content={"error": "internal error"})

    def resolve_exemplars(body) -> list[str] | JSONResponse:
        has_inline = body.target_exemplars is not None
        has_set = body.exemplar_set_id is not None
        if has_inline == has_set:
            return _constraint_error(
                "target_exemplars",
                "provide exactly one of target_exemplars / exemplar_set_id")
        if has_set:
            if body.exemplar_set_id not in exemplar_sets:
                return _constraint_error("exemplar_set_id",
                                         f"unknown set {body.exemplar_set_id!r}")
            return exemplar_sets[body.exemplar_set_id]
        if not body.target_exemplars:
            return _constraint_error("target_exemplars",
                                     "exemplar list must be non-empty")
        return body.target_exemplars

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "model_id": model_id, "config_hash": config_hash}

    @app.post("/v1/embed")
    def embed_text(body: EmbedRequest):
        emb = system.embedder.embed(body.text)
        return {"embedder_id": emb.embedder_id, "dimension": emb.dimension,
                "values": emb.values.tolist()}

    @app.get("/v1/exemplar-sets")
    def list_exemplar_sets():
        return {"sets": [{"id": name, "size": len(texts),
                          "preview": texts[:3]}
                         for name, texts in sorted(exemplar_sets.items())]}

    @app.post("/v1/transfer")
    def do_transfer(body: TransferRequest):
        exemplars = resolve_exemplars(body)
        if isinstance(exemplars, JSONResponse):
            return exemplars
        lam = config.lam if body.lam is None else body.lam
        if not 0.0 <= lam <= 1.0:
            return _constraint_error("lam", "lam must lie in [0, 1]")
        rerank_k = config.rerank_k if body.rerank_k is None else body.rerank_k
        if rerank_k < 1:
            return _constraint_error("rerank_k", "rerank_k must be >= 1")
        top_p = config.gen.top_p if body.top_p is None else body.top_p
        if not 0.0 < top_p <= 1.0:
            return _constraint_error("top_p", "top_p must lie in (0, 1]")
        tau = config.gen.tau if body.tau is None else body.tau
        if tau <= 0:
            return _constraint_error("tau", "tau must be positive")

        t0 = time.perf_counter()
        result = system.transfer(body.source_text, exemplars, lam=lam,
                                 rerank_k=rerank_k, top_p=top_p, tau=tau,
                                 seed=body.seed if body.seed is not None else config.seed)
        elapsed_ms = (time.perf_counter() - t0) * 1000.0
        return {
            "output_text": result.output_text,
            "scores": result.scores.to_dict(),
            "candidates": [{"text": c.text, "scores": c.scores.to_dict(),
                            "rank": c.rank} for c in result.candidates],
            "timing_ms": elapsed_ms,
            "model_id": model_id,
        }

    @app.post("/v1/sweep")
    def do_sweep(body: SweepRequest):
        exemplars = resolve_exemplars(body)
        if isinstance(exemplars, JSONResponse):
            return exemplars
        grid = sorted(body.lam_grid)
        if any(not 0.0 <= l <= 1.0 for l in grid):
            return _constraint_error("lam_grid", "grid values must lie in [0, 1]")
        if not grid:
            return _constraint_error("lam_grid", "grid must be non-empty")
        seed = body.seed if body.seed is not None else config.seed
        rerank_k = body.rerank_k or 1

        from .metrics import sim, towards
        rows = []
        for lam in grid:
            result = system.transfer(body.source_text, exemplars, lam=lam,
                                     rerank_k=rerank_k, seed=seed)
            rows.append({
                "lam": lam,
                "output_text": result.output_text,
                "sim": sim(body.source_text, result.output_text),
                "towards": towards(exemplars, result.output_text,
                                   system.embedder),
            })
        return {"rows": rows, "model_id": model_id}

    static_dir = config.service.static_dir
    if static_dir and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="studio")
    return app


def serve(config: PipelineConfig, checkpoint_path, bind_address: str | None = None):
    """Load the checkpoint and run the service until interrupted.

    RESTYLE_CHECKPOINT and RESTYLE_BIND environment variables override the
    checkpoint path and bind address.
    """
    import os

    import uvicorn

    from .model import Checkpoint

    checkpoint_path = os.environ.get("RESTYLE_CHECKPOINT", checkpoint_path)
    bind_address = os.environ.get("RESTYLE_BIND", bind_address)
    ckpt = Checkpoint.load(checkpoint_path)
    system = TransferSystem(ckpt, config.build_embedder(),
                            rerank_k=config.rerank_k, lam=config.lam,
                            top_p=config.gen.top_p, tau=config.gen.tau,
                            seed=config.seed)
    sets = {}
    if config.service.exemplar_dir:
        sets = load_exemplar_sets(config.service.exemplar_dir)
    app = create_app(system, config, sets)
    host, _, port = (bind_address or config.service.bind_address).partition(":")
    uvicorn.run(app, host=host, port=int(port or 8000), log_level="info")
