"""Loading, sampling, and splitting author-keyed corpora.

The corpus layer is where every run starts: JSONL in, per-author length
filtering and subsampling, then author-disjoint train/val/test splits.
"""

import tempfile
from pathlib import Path

from restyle import (load_corpus, sample_author_pairs, sample_author_texts,
                     save_corpus, split_by_author)
from restyle.evalharness import make_two_style_corpus

# Two synthetic style families stand in for a real author corpus: half the
# authors shout in caps with exclamation runs, half trail off in ellipses.
corpus = make_two_style_corpus(n_authors=30, texts_per_author=12, seed=7)
print(f"{corpus.n_authors} authors, {len(corpus)} texts")
print("a shouting author:", corpus.texts_for("shout000")[0])
print("a mellow author:  ", corpus.texts_for("mellow000")[0])

# Round-trip through the JSONL interchange format.
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "corpus.jsonl"
    save_corpus(corpus, path)
    reloaded = load_corpus(path)
    print(f"\nround-trip: {len(reloaded)} records, "
          f"tokenizer={reloaded.tokenizer_id}")

# Per-author sampling mirrors the ingestion defaults: keep at most ten
# texts per author and drop anything longer than sixty tokens.
sampled = sample_author_texts(reloaded, per_author=10, max_tokens=60, seed=0)
print(f"after sampling: {len(sampled)} records "
      f"(max {max(r.token_count for r in sampled.records)} tokens)")

# Splits are author-disjoint; the remainder after floor allocation goes to
# train, and holdout authors are guaranteed to stay out of train.
train, val, test = split_by_author(sampled, (0.90, 0.05, 0.05), seed=0,
                                   holdout_authors={"shout003"})
print(f"\nsplit sizes: train={train.n_authors} val={val.n_authors} "
      f"test={test.n_authors} authors")
print("holdout shout003 in train?", "shout003" in train.authors)

# Unique ordered author pairs drive the pair-generation stage.
pairs = sample_author_pairs(train, n=5, seed=3)
print("\nsample author pairs:")
for src, tgt in pairs:
    print(f"  {src} -> {tgt}")
