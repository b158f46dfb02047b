"""Pipeline stages: reconstruction data prep, pair generation with rerank
and filtering, self-distillation, and production transfer inference."""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field, replace, asdict
from pathlib import Path
from random import Random

from .corpus import AuthorCorpus, sample_author_pairs
from .metrics import ScoreVector, away, towards, sim, sim_secondary, rerank_score
from .model import Checkpoint, TrainSettings, fine_tune_distill, generate
from .neutralizer import ParaphraseSettings, paraphrase
from .style_space import StyleEmbedder, StyleEmbedding, interpolate, mean_pool

logger = logging.getLogger(__name__)

DEFAULT_LINK_PATTERNS = (
    r"https?://", r"\bwww\.", r"\bftp://", r"\[[^\]]*\]\([^)]*\)",
)


def _mix(seed: int, i: int) -> int:
    return (seed * 6_364_136_223_846_793_005 + i * 1_442_695_040_888_963_407 + 11) \
        & 0x7FFFFFFFFFFFFFFF


# --------------------------------------------------------------------------
# domain types
# --------------------------------------------------------------------------

@dataclass
class TransferCandidate:
    source_text: str
    paraphrase_used: str | None
    target_exemplars: list[str]
    output_text: str
    scores: ScoreVector


@dataclass
class TransferPair:
    source_text: str
    pooled_target_embedding: StyleEmbedding
    target_exemplars: list[str]
    output_text: str
    scores: ScoreVector
    provenance: dict = field(default_factory=dict)


@dataclass
class ScoredCandidate:
    text: str
    scores: ScoreVector
    rank: int


@dataclass
class FilterSettings:
    min_meaning_primary: float = 0.7
    min_meaning_secondary: float = 0.7
    away_floor: float = 0.9
    towards_floor: float = 0.30
    drop_identical: bool = True
    link_regexes: tuple = DEFAULT_LINK_PATTERNS
    conjunctive_style_rule: bool = True


@dataclass
class GenSettings:
    n_paraphrases: int = 5
    target_texts_min: int = 4
    target_texts_max: int = 8
    top_p: float = 0.80
    tau: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_paraphrases < 1:
            raise ValueError("n_paraphrases must be >= 1")
        if not 1 <= self.target_texts_min <= self.target_texts_max:
            raise ValueError("need 1 <= target_texts_min <= target_texts_max")


@dataclass
class FilterStats:
    candidates_generated: int = 0
    dropped_identical: int = 0
    dropped_link: int = 0
    dropped_meaning: int = 0
    dropped_style: int = 0
    candidates_kept: int = 0
    pairs_kept: int = 0
    pairs_without_survivors: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class PairGenResult:
    pairs: list[TransferPair]
    stats: FilterStats


@dataclass
class TransferResult:
    output_text: str
    scores: ScoreVector
    candidates: list[ScoredCandidate]


# --------------------------------------------------------------------------
# scoring
# --------------------------------------------------------------------------

def score_candidate(source_text: str, output_text: str, target_exemplars,
                    embedder: StyleEmbedder, fluency=None) -> ScoreVector:
    """Score one output against its source and target exemplars.

    Away is measured from the source text, Towards against the same
    exemplar set used for conditioning; both meaning scores land in aux for
    the filter cascade.
    """
    primary = sim(source_text, output_text)
    secondary = sim_secondary(source_text, output_text)
    return ScoreVector(
        away=away([source_text], output_text, embedder),
        towards=towards(target_exemplars, output_text, embedder),
        sim=primary,
        fluency=fluency(output_text) if fluency is not None else None,
        aux={"meaning_primary": primary, "meaning_secondary": secondary},
    )


# --------------------------------------------------------------------------
# stage 1: reconstruction data
# --------------------------------------------------------------------------

def build_recon_dataset(corpus: AuthorCorpus, embedder: StyleEmbedder,
                        settings: ParaphraseSettings):
    """(paraphrase, style embedding, original) triples for reconstruction.

    The embedding is always computed on the original text, one triple per
    sampled paraphrase. Records labeled val/test are refused; pass the
    train corpus (or an unlabeled toy corpus).
    """
    if not corpus.records:
        raise ValueError("empty corpus")
    if any(r.split in ("val", "test") for r in corpus.records):
        raise ValueError("build_recon_dataset expects train-split records only")
    dataset = []
    for idx, rec in enumerate(corpus.records):
        emb = embedder.embed(rec.text)
        per_record = replace(settings, seed=_mix(settings.seed, idx))
        for para in paraphrase(rec.text, per_record):
            dataset.append((para, emb, rec.text))
    return dataset


# --------------------------------------------------------------------------
# stage 2: candidate generation, filtering, selection
# --------------------------------------------------------------------------

def generate_candidates(ckpt: Checkpoint, pair, corpus: AuthorCorpus,
                        gen: GenSettings, embedder: StyleEmbedder,
                        paraphrase_settings: ParaphraseSettings | None = None,
                        max_len: int | None = None) -> list[TransferCandidate]:
    """Produce one scored candidate per paraphrase for a (source, target) pair.

    Per paraphrase, k in [target_texts_min, target_texts_max] target texts
    are sampled (all available when the author has fewer), mean-pooled, and
    used to condition a single sampled output.
    """
    src_author, tgt_author = pair
    src_texts = corpus.texts_for(src_author)
    tgt_texts = corpus.texts_for(tgt_author)

    rng = Random(gen.seed)
    source_text = src_texts[rng.randrange(len(src_texts))]
    psettings = paraphrase_settings or ParaphraseSettings()
    psettings = replace(psettings, n_samples=gen.n_paraphrases,
                        seed=_mix(gen.seed, 1))
    paraphrases = paraphrase(source_text, psettings)

    candidates = []
    for j, para in enumerate(paraphrases):
        k = rng.randint(gen.target_texts_min, gen.target_texts_max)
        if len(tgt_texts) <= k:
            exemplars = list(tgt_texts)
        else:
            exemplars = rng.sample(tgt_texts, k)
        pooled = mean_pool([embedder.embed(t) for t in exemplars])
        output = generate(ckpt, para, pooled, top_p=gen.top_p, tau=gen.tau,
                          n=1, seed=_mix(gen.seed, 100 + j), max_len=max_len)[0]
        if not output.strip():
            output = para  # degenerate decode; keep the cascade well-defined
        candidates.append(TransferCandidate(
            source_text=source_text,
            paraphrase_used=para,
            target_exemplars=exemplars,
            output_text=output,
            scores=score_candidate(source_text, output, exemplars, embedder),
        ))
    return candidates


def _ws_normal(text: str) -> str:
    return " ".join(text.split())


def filter_candidates(candidates, f: FilterSettings,
                      stats: FilterStats | None = None) -> list[TransferCandidate]:
    """Apply the drop cascade; survivors keep their input order.

    Rules fire in order per candidate: (1) identical-to-source output or a
    hallucinated link, (2) either meaning score under its floor, (3) the
    style rule (conjunctive by default: away < floor AND towards < floor).
    """
    link_res = [re.compile(p) for p in f.link_regexes]
    survivors = []
    for cand in candidates:
        try:
            meaning1 = cand.scores.aux["meaning_primary"]
            meaning2 = cand.scores.aux["meaning_secondary"]
        except KeyError as exc:
            raise ValueError(f"candidate missing meaning score {exc}") from exc

        if f.drop_identical and _ws_normal(cand.output_text) == _ws_normal(cand.source_text):
            if stats:
                stats.dropped_identical += 1
            continue
        if any(r.search(cand.output_text) and not r.search(cand.source_text)
               for r in link_res):
            if stats:
                stats.dropped_link += 1
            continue
        if meaning1 < f.min_meaning_primary or meaning2 < f.min_meaning_secondary:
            if stats:
                stats.dropped_meaning += 1
            continue
        s = cand.scores
        if f.conjunctive_style_rule:
            style_drop = s.away < f.away_floor and s.towards < f.towards_floor
        else:
            style_drop = s.away < f.away_floor or s.towards < f.towards_floor
        if style_drop:
            if stats:
                stats.dropped_style += 1
            continue
        survivors.append(cand)
    if stats:
        stats.candidates_kept += len(survivors)
    return survivors


def select_best(candidates) -> TransferCandidate:
    """Argmax of the rerank score; ties go to the lowest index."""
    candidates = list(candidates)
    if not candidates:
        raise ValueError("select_best on an empty candidate list")
    return max(candidates, key=lambda c: rerank_score(c.scores))


def generate_pair_dataset(ckpt: Checkpoint, corpus: AuthorCorpus, n_pairs: int,
                          gen: GenSettings, f: FilterSettings, seed: int,
                          embedder: StyleEmbedder,
                          paraphrase_settings: ParaphraseSettings | None = None,
                          max_len: int | None = None) -> PairGenResult:
    """Run sample pairs -> generate -> filter -> select over n_pairs authors.

    Each author pair gets a seed derived from (seed, pair index), so results
    are byte-reproducible end to end and independent pairs could be
    evaluated concurrently and merged in index order.
    """
    author_pairs = sample_author_pairs(corpus, n_pairs, seed)
    stats = FilterStats()
    pairs: list[TransferPair] = []
    for i, (src, tgt) in enumerate(author_pairs):
        gen_i = replace(gen, seed=_mix(seed, i))
        candidates = generate_candidates(ckpt, (src, tgt), corpus, gen_i,
                                         embedder, paraphrase_settings, max_len)
        stats.candidates_generated += len(candidates)
        survivors = filter_candidates(candidates, f, stats)
        if not survivors:
            stats.pairs_without_survivors += 1
            continue
        best = select_best(survivors)
        all_tgt_texts = corpus.texts_for(tgt)
        pooled_all = mean_pool([embedder.embed(t) for t in all_tgt_texts])
        pairs.append(TransferPair(
            source_text=best.source_text,
            pooled_target_embedding=pooled_all,
            target_exemplars=all_tgt_texts,
            output_text=best.output_text,
            scores=best.scores,
            provenance={
                "source_author": src,
                "target_author": tgt,
                "pair_index": i,
                "gen": asdict(gen_i),
                "sampled_exemplars": len(best.target_exemplars),
                "model_id": ckpt.metadata.get("model_id", ckpt.model_id()),
                "embedder_id": embedder.embedder_id,
            },
        ))
    stats.pairs_kept = len(pairs)
    logger.info("pair generation: %s", stats.to_dict())
    return PairGenResult(pairs=pairs, stats=stats)


def save_pairs_jsonl(pairs, path) -> None:
    """Write transfer pairs in the interchange JSONL schema."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(json.dumps({
                "source_text": p.source_text,
                "target_exemplars": p.target_exemplars,
                "output_text": p.output_text,
                "scores": p.scores.to_dict(),
                "provenance": p.provenance,
            }, sort_keys=True, ensure_ascii=False) + "\n")


def load_pairs_jsonl(path, embedder: StyleEmbedder) -> list[TransferPair]:
    """Reload pairs, recomputing pooled embeddings from the stored exemplars."""
    pairs = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            exemplars = obj["target_exemplars"]
            pairs.append(TransferPair(
                source_text=obj["source_text"],
                pooled_target_embedding=mean_pool(
                    [embedder.embed(t) for t in exemplars]),
                target_exemplars=exemplars,
                output_text=obj["output_text"],
                scores=ScoreVector.from_dict(obj["scores"]),
                provenance=obj.get("provenance", {}),
            ))
    return pairs


# --------------------------------------------------------------------------
# stage 3: self-distillation
# --------------------------------------------------------------------------

def self_distill(ckpt: Checkpoint, pairs, settings: TrainSettings,
                 val_pairs=None) -> Checkpoint:
    """Fine-tune the reconstruction model on its own filtered pairs.

    Delegates the optimization to the model module and records lineage:
    which checkpoint and pair dataset produced the distilled weights.
    """
    distilled = fine_tune_distill(ckpt, pairs, settings, val_pairs)
    distilled.metadata.update({
        "parent_model_id": ckpt.model_id(),
        "distill_pair_count": len(list(pairs)),
    })
    return distilled


# --------------------------------------------------------------------------
# production inference
# --------------------------------------------------------------------------

def transfer(ckpt: Checkpoint, source_text: str, target_exemplars,
             embedder: StyleEmbedder, *, lam: float = 1.0, rerank_k: int = 1,
             top_p: float = 0.80, tau: float = 1.0, seed: int = 0,
             mode: str | None = None, max_len: int | None = None,
             fluency=None,
             paraphrase_settings: ParaphraseSettings | None = None) -> TransferResult:
    """Restyle source_text toward the exemplars' pooled style.

    The conditioning embedding interpolates between the source text's own
    embedding and the pooled exemplar embedding by lam. In distilled mode
    the model conditions directly on the source text; in recon mode each of
    the rerank_k candidates reconstructs from its own paraphrase. The
    winner is the rerank-score argmax; all candidates come back ranked.
    """
    target_exemplars = list(target_exemplars)
    if not target_exemplars:
        raise ValueError("target_exemplars must be non-empty")
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lam must lie in [0, 1], got {lam!r}")
    if rerank_k < 1:
        raise ValueError("rerank_k must be >= 1")
    if mode is None:
        mode = "recon" if ckpt.metadata.get("stage") == "recon" else "distilled"
    if mode not in ("recon", "distilled"):
        raise ValueError(f"unknown transfer mode {mode!r}")

    pooled = mean_pool([embedder.embed(t) for t in target_exemplars])
    conditioning = interpolate(embedder.embed(source_text), pooled, lam)

    if mode == "recon":
        psettings = paraphrase_settings or ParaphraseSettings()
        psettings = replace(psettings, n_samples=rerank_k, seed=_mix(seed, 7))
        inputs = paraphrase(source_text, psettings)
    else:
        inputs = [source_text] * rerank_k

    outputs = []
    for i, inp in enumerate(inputs):
        out = generate(ckpt, inp, conditioning, top_p=top_p, tau=tau, n=1,
                       seed=_mix(seed, i), max_len=max_len)[0]
        outputs.append(out if out.strip() else inp)

    scored = [(out, score_candidate(source_text, out, target_exemplars,
                                    embedder, fluency))
              for out in outputs]
    order = sorted(range(len(scored)),
                   key=lambda i: (-rerank_score(scored[i][1]), i))
    candidates = [ScoredCandidate(text=scored[i][0], scores=scored[i][1],
                                  rank=r + 1)
                  for r, i in enumerate(order)]
    return TransferResult(output_text=candidates[0].text,
                          scores=candidates[0].scores,
                          candidates=candidates)


class TransferSystem:
    """Callable wrapper binding a checkpoint, embedder, and default options.

    Evaluation harnesses call instances with (source_text, exemplars) and
    may override lam/seed/rerank_k per call; embedder_id exposes the rerank
    embedder for held-out-metric enforcement.
    """

    def __init__(self, ckpt: Checkpoint, embedder: StyleEmbedder, *,
                 lam: float = 1.0, rerank_k: int = 1, top_p: float = 0.80,
                 tau: float = 1.0, seed: int = 0, mode: str | None = None,
                 max_len: int | None = None,
                 paraphrase_settings: ParaphraseSettings | None = None):
        self.ckpt = ckpt
        self.embedder = embedder
        self.defaults = dict(lam=lam, rerank_k=rerank_k, top_p=top_p, tau=tau,
                             seed=seed, mode=mode, max_len=max_len,
                             paraphrase_settings=paraphrase_settings)

    @property
    def embedder_id(self) -> str:
        return self.embedder.embedder_id

    @property
    def model_id(self) -> str:
        return self.ckpt.metadata.get("model_id") or self.ckpt.model_id()

    def transfer(self, source_text: str, target_exemplars, **overrides) -> TransferResult:
        opts = {**self.defaults, **overrides}
        return transfer(self.ckpt, source_text, target_exemplars,
                        self.embedder, **opts)

    def __call__(self, source_text: str, target_exemplars, **overrides) -> str:
        return self.transfer(source_text, target_exemplars, **overrides).output_text
