"""Style-neutral paraphrasing: the input side of reconstruction training.

The rule-based neutralizer strips casing, exclamation runs, emoticons,
elongation, and contractions, then varies samples through seeded synonym
substitutions. top_p / tau / beam are recorded for external adapters but
inert here.
"""

from restyle import (ParaphraseSettings, default_style_embedder,
                     neutrality_score, normalize_text, paraphrase)

original = "OMG the BIG dog can't STOP barking at my gardennn!!! :)"
print("original:   ", original)
print("normalized: ", normalize_text(original))

settings = ParaphraseSettings(n_samples=5, seed=0)
samples = paraphrase(original, settings)
print(f"\n{settings.n_samples} paraphrases (seeded variation):")
for s in samples:
    print("  -", s)

# Neutrality quantifies how far each paraphrase moved in style space.
embedder = default_style_embedder()
print("\nneutrality scores (0 = same style as the original):")
for s in samples:
    print(f"  {neutrality_score(original, s, embedder):.3f}  {s}")

# Determinism: the same settings always produce the same paraphrases.
again = paraphrase(original, settings)
print("\nsame seed reproduces the list exactly:", samples == again)

# A different seed explores different substitutions.
other = paraphrase(original, ParaphraseSettings(n_samples=5, seed=99))
print("different seed changes the list:     ", samples != other)
