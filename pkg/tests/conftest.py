"""Shared fixtures.

The session-scoped toy_pipeline fixture runs the full pipeline once
(reconstruction training, pair generation, self-distillation) on the
synthetic two-style corpus; the heavyweight tests and the acceptance suite
all share it.
"""

from dataclasses import dataclass

import pytest
import torch

torch.set_num_threads(2)

from restyle.corpus import AuthorCorpus, split_by_author
from restyle.evalharness import family_of_author, make_two_style_corpus
from restyle.model import (BpeTokenizer, Checkpoint, ModelConfig,
                           TrainSettings, train_reconstruction)
from restyle.neutralizer import ParaphraseSettings
from restyle.pipeline import (FilterSettings, GenSettings, PairGenResult,
                              build_recon_dataset, generate_pair_dataset,
                              self_distill)
from restyle.style_space import (FeatureStyleEmbedder, default_style_embedder,
                                 heldout_style_embedder)


@dataclass
class ToyPipeline:
    corpus: AuthorCorpus
    train: AuthorCorpus
    val: AuthorCorpus
    test: AuthorCorpus
    embedder: FeatureStyleEmbedder
    eval_embedder: FeatureStyleEmbedder
    recon: Checkpoint
    pair_result: PairGenResult
    distilled: Checkpoint
    build_seconds: float = 0.0

    def probe_texts(self, family: str, limit: int) -> list[str]:
        texts = []
        for author in self.test.author_ids:
            if family_of_author(author) == family:
                texts.extend(self.test.texts_for(author))
        return texts[:limit]

    def exemplars(self, family: str, n: int = 10) -> list[str]:
        authors = [a for a in self.test.author_ids
                   if family_of_author(a) == family]
        texts = []
        for author in authors:
            texts.extend(self.test.texts_for(author))
            if len(texts) >= n:
                break
        return texts[:n]


RECON_STEPS = 2500
PAIR_COUNT = 2000
DISTILL_STEPS = 2500


def pytest_runtest_logreport(report):
    """One visible PASS/FAIL line per acceptance criterion."""
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[1].removeprefix("Test")
        status = "PASS" if report.passed else "FAIL"
        print(f"\nACCEPTANCE {name}: {status}", flush=True)


@pytest.fixture(scope="session")
def toy_pipeline() -> ToyPipeline:
    import time
    t0 = time.perf_counter()
    corpus = make_two_style_corpus(n_authors=200, texts_per_author=10, seed=0)
    train, val, test = split_by_author(corpus, (0.90, 0.05, 0.05), seed=0)
    embedder = default_style_embedder()

    data = build_recon_dataset(train, embedder,
                               ParaphraseSettings(n_samples=2, seed=0))
    val_data = build_recon_dataset(val.with_split("train"), embedder,
                                   ParaphraseSettings(n_samples=1, seed=1))
    texts = [r.text for r in train.records] + [p for p, _, _ in data]
    tokenizer = BpeTokenizer.train(texts, vocab_size=1400)
    config = ModelConfig(vocab_size=tokenizer.vocab_size, hidden_dim=96,
                         embed_dim=768, n_layers_enc=2, n_layers_dec=2,
                         n_heads=4, max_len=32, dropout=0.1, ffn_dim=256,
                         seed=0)
    settings = TrainSettings(learning_rate=5e-4, batch_size=32, grad_accum=1,
                             warmup_steps=200, total_steps=RECON_STEPS,
                             seed=0, val_interval=500)
    recon = train_reconstruction(Checkpoint.fresh(config, tokenizer), data,
                                 settings, val_dataset=val_data)

    pair_result = generate_pair_dataset(
        recon, train, PAIR_COUNT, GenSettings(seed=0), FilterSettings(),
        seed=11, embedder=embedder)
    n_val = max(1, len(pair_result.pairs) // 10)
    distill_settings = TrainSettings(learning_rate=3e-4, batch_size=32,
                                     grad_accum=1, warmup_steps=100,
                                     total_steps=DISTILL_STEPS, seed=0,
                                     val_interval=250)
    distilled = self_distill(recon, pair_result.pairs[n_val:],
                             distill_settings,
                             val_pairs=pair_result.pairs[:n_val])

    return ToyPipeline(corpus=corpus, train=train, val=val, test=test,
                       embedder=embedder,
                       eval_embedder=heldout_style_embedder(),
                       recon=recon, pair_result=pair_result,
                       distilled=distilled,
                       build_seconds=time.perf_counter() - t0)
