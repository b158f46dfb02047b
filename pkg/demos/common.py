"""Shared setup for the demo scripts: a small trained checkpoint, cached on
disk so the later demos start instantly once demo 04 has run."""

from pathlib import Path

import torch

torch.set_num_threads(2)

from restyle import (BpeTokenizer, Checkpoint, ModelConfig, ParaphraseSettings,
                     TrainSettings, build_recon_dataset,
                     default_style_embedder, split_by_author,
                     train_reconstruction)
from restyle.evalharness import make_two_style_corpus

ARTIFACTS = Path(__file__).parent / "_artifacts"


def demo_corpus():
    corpus = make_two_style_corpus(n_authors=120, texts_per_author=10, seed=0)
    return split_by_author(corpus, (0.85, 0.05, 0.10), seed=0)


def ensure_recon_checkpoint() -> Checkpoint:
    """Train (or reload) the small reconstruction model the demos share."""
    ckpt_dir = ARTIFACTS / "recon"
    if (ckpt_dir / "weights.pt").exists():
        return Checkpoint.load(ckpt_dir)

    print("training the demo reconstruction model (two minutes or so)...")
    train, val, _ = demo_corpus()
    embedder = default_style_embedder()
    data = build_recon_dataset(train, embedder,
                               ParaphraseSettings(n_samples=2, seed=0))
    val_data = build_recon_dataset(val.with_split("train"), embedder,
                                   ParaphraseSettings(n_samples=1, seed=1))
    texts = [r.text for r in train.records] + [p for p, _, _ in data]
    tokenizer = BpeTokenizer.train(texts, vocab_size=1200)
    config = ModelConfig(vocab_size=tokenizer.vocab_size, hidden_dim=96,
                         embed_dim=768, n_layers_enc=2, n_layers_dec=2,
                         n_heads=4, max_len=32, dropout=0.1, ffn_dim=256,
                         seed=0)
    settings = TrainSettings(learning_rate=5e-4, batch_size=32, grad_accum=1,
                             warmup_steps=150, total_steps=2200, seed=0,
                             val_interval=400)
    ckpt = train_reconstruction(Checkpoint.fresh(config, tokenizer), data,
                                settings, val_dataset=val_data)
    ckpt.save(ckpt_dir)
    return ckpt
