"""Evaluation protocols: Copy baselines, authorship tables, and the
interpolation sweep that traces the strength/meaning trade-off."""

from common import ensure_recon_checkpoint

from restyle import TransferSystem, default_style_embedder, heldout_style_embedder
from restyle.evalharness import (evaluate_authorship, interpolation_sweep,
                                 make_two_style_eval_split, timing_report)

eval_embedder = heldout_style_embedder()

# Copy baselines on the calibration split: copying the source scores zero
# transfer, copying a target exemplar scores zero meaning - both pin the
# ends of the metric scales.
split = make_two_style_eval_split(n_source=4, n_target=4, texts_per_author=8,
                                  seed=1)
report = evaluate_authorship(None, split, eval_embedder)
print("copy-baseline calibration:")
print(report.markdown_table())

# A real system on a small split (the demo reconstruction checkpoint).
ckpt = ensure_recon_checkpoint()
system = TransferSystem(ckpt, default_style_embedder(), mode="recon",
                        rerank_k=3, seed=0)
report = evaluate_authorship(system, split, eval_embedder,
                             max_texts_per_direction=2)
print("\nwith the demo reconstruction model (rerank 3):")
print(report.markdown_table())
print("timing:", {k: round(v, 4) for k, v in report.timing.items()})

# The interpolation sweep: conditioning strength against meaning. Rows are
# CSV-ready for any plotting tool.
from common import demo_corpus

_, _, test = demo_corpus()
mellow = [a for a in test.author_ids if a.startswith("mellow")]
shout = [a for a in test.author_ids if a.startswith("shout")]
inputs = [t for a in mellow for t in test.texts_for(a)][:15]
exemplars = test.texts_for(shout[0])[:8]

table = interpolation_sweep(system, inputs, exemplars,
                            [0.0, 0.25, 0.5, 0.75, 1.0],
                            eval_embedder=eval_embedder, seed=5)
print("\ninterpolation sweep (recon system):")
print(table.to_csv())

# Wall-clock statistics, warmup excluded.
timing = timing_report(lambda text: system(text, exemplars), inputs,
                       device_note="demo cpu")
print("timing report:", {k: round(v, 4) if isinstance(v, float) else v
                         for k, v in timing.to_dict().items()})
