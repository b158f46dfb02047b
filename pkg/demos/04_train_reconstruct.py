"""Reconstruction training: rebuild originals from (paraphrase, embedding).

The model never sees the original text on its input side; everything it
knows about the target surface form arrives through the style embedding
prepended to the encoder input.
"""

from common import demo_corpus, ensure_recon_checkpoint

from restyle import default_style_embedder, greedy_decode, normalize_text

ckpt = ensure_recon_checkpoint()
print(f"checkpoint stage={ckpt.metadata['stage']} steps={ckpt.step} "
      f"model_id={ckpt.model_id()}")
print("validation history:", [(s, round(v, 3)) for s, v in ckpt.val_history])

embedder = default_style_embedder()
_, _, test = demo_corpus()

print("\nreconstructions from neutral inputs (held-out authors):")
for author in test.author_ids[:4]:
    original = test.texts_for(author)[0]
    neutral = normalize_text(original, collapse_elongation=True)
    rebuilt = greedy_decode(ckpt, neutral, embedder.embed(original))
    print(f"  original: {original}")
    print(f"  neutral:  {neutral}")
    print(f"  rebuilt:  {rebuilt}\n")

# The embedding carries the style: same neutral input, two different
# author embeddings, two different surface forms.
shout_author = next(a for a in test.author_ids if a.startswith("shout"))
mellow_author = next(a for a in test.author_ids if a.startswith("mellow"))
shout_emb = embedder.embed(test.texts_for(shout_author)[0])
mellow_emb = embedder.embed(test.texts_for(mellow_author)[0])
neutral = "the quick fox watches my garden today"
print("one neutral input, two conditioning embeddings:")
print("  shout : ", greedy_decode(ckpt, neutral, shout_emb))
print("  mellow: ", greedy_decode(ckpt, neutral, mellow_emb))
