"""Aggregate pipeline configuration with the standard defaults.

One config object carries every numeric knob used anywhere in the
pipeline; its hash is embedded in emitted artifacts for provenance.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .model import ModelConfig, TrainSettings
from .neutralizer import ParaphraseSettings
from .pipeline import FilterSettings, GenSettings
from .style_space import (DEFAULT_DIM, FeatureStyleEmbedder,
                          default_style_embedder, heldout_style_embedder)


@dataclass
class CorpusSettings:
    per_author: int = 10
    max_tokens: int = 60
    fractions: tuple = (0.90, 0.05, 0.05)


@dataclass
class EvalSettings:
    n_source_authors: int = 15
    n_target_authors: int = 15
    texts_per_author: int = 16
    num_examples: int = 16
    exemplar_min_proba: float = 0.95
    timing_examples: int = 200


@dataclass
class TokenizerSettings:
    kind: str = "bpe"
    vocab_size: int = 512


@dataclass
class ServiceSettings:
    bind_address: str = "127.0.0.1:8000"
    static_dir: str | None = None
    exemplar_dir: str | None = None


@dataclass
class PipelineConfig:
    seed: int = 0
    embedder: str = "stylo-768-v1"
    eval_embedder: str = "stylo-768-eval-v1"
    embed_dim: int = DEFAULT_DIM
    sim_scorer: str = "content-words-v1"
    sim_secondary_scorer: str = "chargram-v1"
    fluency_scorer: str = "char5gram-v1"
    rerank_k: int = 1
    lam: float = 1.0
    paraphrase: ParaphraseSettings = field(default_factory=ParaphraseSettings)
    gen: GenSettings = field(default_factory=GenSettings)
    filter: FilterSettings = field(default_factory=FilterSettings)
    model: ModelConfig = field(default_factory=lambda: ModelConfig(vocab_size=512))
    train: TrainSettings = field(default_factory=TrainSettings)
    corpus: CorpusSettings = field(default_factory=CorpusSettings)
    eval: EvalSettings = field(default_factory=EvalSettings)
    tokenizer: TokenizerSettings = field(default_factory=TokenizerSettings)
    service: ServiceSettings = field(default_factory=ServiceSettings)
    paths: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def unpack(value):
            if dataclasses.is_dataclass(value) and not isinstance(value, type):
                return {k: unpack(v) for k, v in dataclasses.asdict(value).items()}
            if isinstance(value, tuple):
                return list(value)
            if isinstance(value, dict):
                return {k: unpack(v) for k, v in value.items()}
            return value
        return {f.name: unpack(getattr(self, f.name))
                for f in dataclasses.fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        nested = {
            "paraphrase": ParaphraseSettings, "gen": GenSettings,
            "filter": FilterSettings, "model": ModelConfig,
            "train": TrainSettings, "corpus": CorpusSettings,
            "eval": EvalSettings, "tokenizer": TokenizerSettings,
            "service": ServiceSettings,
        }
        kwargs = {}
        for name, factory in nested.items():
            if name in d:
                val = d.pop(name)
                if name == "filter" and "link_regexes" in val:
                    val["link_regexes"] = tuple(val["link_regexes"])
                if name == "corpus" and "fractions" in val:
                    val["fractions"] = tuple(val["fractions"])
                kwargs[name] = factory(**val)
        kwargs.update(d)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        if path.suffix == ".toml":
            try:
                import tomllib  # Python >= 3.11
            except ImportError:  # pragma: no cover - depends on interpreter
                raise RuntimeError(
                    "TOML configs need Python 3.11+; use JSON instead")
            data = tomllib.loads(text)
        else:
            data = json.loads(text)
        return cls.from_dict(data)

    def save(self, path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True),
            encoding="utf-8")

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]

    def build_embedder(self) -> FeatureStyleEmbedder:
        return self._embedder_by_id(self.embedder)

    def build_eval_embedder(self) -> FeatureStyleEmbedder:
        return self._embedder_by_id(self.eval_embedder)

    def _embedder_by_id(self, embedder_id: str) -> FeatureStyleEmbedder:
        if embedder_id == "stylo-768-v1":
            return default_style_embedder(self.embed_dim)
        if embedder_id == "stylo-768-eval-v1":
            return heldout_style_embedder(self.embed_dim)
        raise ValueError(f"unknown embedder id {embedder_id!r}")
