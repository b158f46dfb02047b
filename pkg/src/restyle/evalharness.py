"""Evaluation protocols: authorship transfer tables, attribute transfer
tables, interpolation sweeps, Copy baselines, and timing reports.

Also houses the synthetic two-style corpus used for calibration: two
disjoint style families rendered from shared (or deliberately disjoint)
content templates, so the Copy-baseline rows are analytically forced.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import statistics
import time
from dataclasses import dataclass, field
from random import Random

import numpy as np

from .corpus import AuthorCorpus, TextRecord, count_tokens
from .metrics import away, towards, sim, style_joint, joint_eval, FluencyModel
from .style_space import StyleEmbedder, default_style_embedder

logger = logging.getLogger(__name__)

# --------------------------------------------------------------------------
# synthetic two-style corpus
# --------------------------------------------------------------------------

_NOUNS = (
    "robot machine cat dog hound fox wizard pirate garden yard river stream "
    "mountain peak teacher tutor story tale window forest woods dragon painter "
    "bridge market engine motor library wagon cart boat ship road path song "
    "tune box crate lantern kettle castle tower farmer baker violin drum "
    "puzzle ladder mirror candle anchor compass barrel hammer saddle helmet "
    "meadow valley harbor island temple statue parrot falcon turtle rabbit"
).split()
_ADJS = (
    "big large small little quick fast slow happy glad sad bright shiny dark "
    "gloomy quiet silent loud noisy strange odd gentle mild brave bold clever "
    "smart lazy idle cold chilly old ancient new fresh tidy neat warm toasty "
    "tiny minuscule pretty lovely rich wealthy narrow steep rusty dusty golden "
    "silver purple crooked smooth rough hollow sturdy fancy plain curious calm"
).split()
_VERBS = (
    "paints colors builds constructs watches observes fixes repairs finds "
    "locates likes enjoys moves shifts starts begins stops halts helps assists "
    "follows trails sees notices makes creates takes grabs shows displays "
    "keeps holds needs requires wants desires cleans scrubs carries hauls "
    "guards protects paddles rows lifts drags sketches welds stacks sorts "
    "mends tunes rides steers chases greets visits admires borrows returns"
).split()
_ADVS = (
    "slowly gradually quickly rapidly quietly softly loudly noisily gently "
    "calmly often daily today early proudly bravely neatly badly poorly "
    "easily readily eagerly warily twice soon later downtown upstream "
    "outside indoors nearby"
).split()

_TEMPLATES = (
    "the {adj} {noun} {verb} the {noun2} {adv}",
    "my {adj} {noun} {verb} the {adj2} {noun2}",
    "that {noun} {verb} a {adj} {noun2} {adv}",
    "a {adj} {noun} near the {noun2} {verb} {adv}",
    "the {noun} {verb} the {adj} {noun2}",
    "one {adj} {noun} {verb} my {noun2} {adv}",
)

STYLE_FAMILIES = ("shout", "mellow")


def render_style(text: str, family: str) -> str:
    """Apply a style family's surface form to neutral lowercase text.

    Shouting uppercases, elongates the final word's last letter, and piles
    on exclamation marks; the mellow family trails off in an ellipsis. The
    elongation gives strong shout-ward transfers a small, honest meaning
    cost (the surface word changes), so the strength/meaning trade-off is
    observable on the toy corpus.
    """
    if family == "shout":
        out = text.upper()
        if out and out[-1].isalpha():
            out += out[-1] * 2
        return out + "!!!"
    if family == "mellow":
        return text + "..."
    raise ValueError(f"unknown style family {family!r}")


def family_of_author(author_id: str) -> str:
    for fam in STYLE_FAMILIES:
        if author_id.startswith(fam):
            return fam
    raise ValueError(f"author {author_id!r} carries no style family prefix")


def classify_style_family(text: str) -> str:
    """Held-out heuristic style classifier (never used for reranking).

    Shouting is detected by the uppercase share of alphabetic characters;
    everything else is the mellow family.
    """
    alpha = [c for c in text if c.isalpha()]
    if alpha and sum(1 for c in alpha if c.isupper()) / len(alpha) >= 0.5:
        return "shout"
    return "mellow"


def _half(pool, which: int):
    mid = len(pool) // 2
    return pool[:mid] if which == 0 else pool[mid:]


def _render_template(rng: Random, nouns, adjs, verbs, advs) -> str:
    tpl = rng.choice(_TEMPLATES)
    n1 = rng.choice(nouns)
    n2 = rng.choice([n for n in nouns if n != n1] or nouns)
    a1 = rng.choice(adjs)
    a2 = rng.choice([a for a in adjs if a != a1] or adjs)
    return tpl.format(noun=n1, noun2=n2, adj=a1, adj2=a2,
                      verb=rng.choice(verbs), adv=rng.choice(advs))


def make_two_style_corpus(n_authors: int = 200, texts_per_author: int = 10,
                          seed: int = 0, split_content_pools: bool = False,
                          author_prefix: str = "") -> AuthorCorpus:
    """Synthetic corpus with two disjoint style families.

    Authors alternate between the shout family (uppercase + exclamations)
    and the mellow family (lowercase + ellipsis). With split_content_pools,
    shout authors draw content words from one half of each vocabulary pool
    and mellow authors from the other, making cross-family content
    disjoint (used for Copy-baseline calibration).
    """
    rng = Random(seed)
    records = []
    per_family = {}
    for k in range(n_authors):
        family = STYLE_FAMILIES[k % 2]
        idx = per_family.get(family, 0)
        per_family[family] = idx + 1
        author = f"{family}{author_prefix}{idx:03d}"
        if split_content_pools:
            which = 0 if family == "shout" else 1
            nouns, adjs = _half(_NOUNS, which), _half(_ADJS, which)
            verbs, advs = _half(_VERBS, which), _half(_ADVS, which)
        else:
            nouns, adjs, verbs, advs = _NOUNS, _ADJS, _VERBS, _ADVS
        seen = set()
        while len(seen) < texts_per_author:
            base = _render_template(rng, nouns, adjs, verbs, advs)
            styled = render_style(base, family)
            if styled in seen:
                continue
            seen.add(styled)
            records.append(TextRecord(author_id=author, text=styled,
                                      token_count=count_tokens(styled)))
    return AuthorCorpus.from_records(records)


# --------------------------------------------------------------------------
# evaluation splits and reports
# --------------------------------------------------------------------------

EVAL_SPLIT_NAMES = ("random", "single", "diverse", "custom")


@dataclass
class EvalSplit:
    name: str
    corpus: AuthorCorpus
    source_authors: list[str]
    target_authors: list[str]
    texts_per_author: int = 16

    def __post_init__(self):
        if self.name not in EVAL_SPLIT_NAMES:
            raise ValueError(f"split name must be one of {EVAL_SPLIT_NAMES}")

    @property
    def n_directions(self) -> int:
        return len(self.source_authors) * len(self.target_authors)

    @property
    def n_transformations(self) -> int:
        return self.n_directions * self.texts_per_author


def make_two_style_eval_split(n_source: int = 15, n_target: int = 15,
                              texts_per_author: int = 16,
                              seed: int = 1) -> EvalSplit:
    """Calibration split: shout sources, mellow targets, disjoint content."""
    corpus = make_two_style_corpus(
        n_authors=2 * max(n_source, n_target),
        texts_per_author=texts_per_author, seed=seed,
        split_content_pools=True, author_prefix="e")
    shout = [a for a in corpus.author_ids if family_of_author(a) == "shout"]
    mellow = [a for a in corpus.author_ids if family_of_author(a) == "mellow"]
    return EvalSplit(name="custom", corpus=corpus,
                     source_authors=shout[:n_source],
                     target_authors=mellow[:n_target],
                     texts_per_author=texts_per_author)


@dataclass
class EvalReport:
    rows: list[dict]
    aggregates: dict
    config: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    _METRICS = ("away", "towards", "sim", "joint", "acc", "fluency")

    def recompute_aggregates(self) -> dict:
        """Aggregate means recomputed from the row table (for cross-checks)."""
        out: dict = {}
        for row in self.rows:
            bucket = out.setdefault(row["system"], {})
            for m in self._METRICS:
                if m in row:
                    bucket.setdefault(m, []).append(row[m])
        return {
            system: {m: float(np.mean(v)) for m, v in metrics.items()}
            for system, metrics in out.items()
        }

    def to_json(self) -> str:
        return json.dumps({"aggregates": self.aggregates, "config": self.config,
                           "timing": self.timing, "rows": self.rows},
                          sort_keys=True, indent=2)

    def to_jsonl(self) -> str:
        """One scored transfer per line, ready for downstream tooling."""
        return "\n".join(json.dumps(row, sort_keys=True) for row in self.rows)

    def to_csv(self) -> str:
        if not self.rows:
            return ""
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=sorted({k for r in self.rows
                                                        for k in r}))
        writer.writeheader()
        writer.writerows(self.rows)
        return buf.getvalue()

    def markdown_table(self) -> str:
        metrics = [m for m in self._METRICS
                   if any(m in v for v in self.aggregates.values())]
        lines = ["| system | " + " | ".join(metrics) + " |",
                 "|" + "---|" * (len(metrics) + 1)]
        for system, vals in self.aggregates.items():
            cells = [f"{vals[m]:.2f}" if m in vals else "-" for m in metrics]
            lines.append(f"| {system} | " + " | ".join(cells) + " |")
        return "\n".join(lines)


# --------------------------------------------------------------------------
# authorship evaluation
# --------------------------------------------------------------------------

def evaluate_authorship(system, split: EvalSplit, eval_embedder: StyleEmbedder,
                        include_copy_baselines: bool = True,
                        max_texts_per_direction: int | None = None,
                        seed: int = 0) -> EvalReport:
    """Score a transfer system over every (source, target, text) triple.

    Away/Towards/Sim use the held-out eval embedder; the rerank embedder is
    refused (embedder_id equality) to keep reranking and evaluation from
    sharing a representation. Copy-source and Copy-target baseline rows are
    included by default. Pass system=None to run baselines only.
    """
    if system is not None and getattr(system, "embedder_id", None) == eval_embedder.embedder_id:
        raise ValueError(
            "evaluation embedder must differ from the system's rerank embedder")

    corpus = split.corpus
    rows: list[dict] = []
    durations: list[float] = []

    def add_row(name, src_author, tgt_author, text_idx, source_text, output,
                src_texts, exemplars):
        a = away(src_texts, output, eval_embedder)
        t = towards(exemplars, output, eval_embedder)
        s = sim(source_text, output)
        rows.append({
            "system": name, "source_author": src_author,
            "target_author": tgt_author, "text_index": text_idx,
            "away": a, "towards": t, "sim": s,
            "joint": style_joint(a, t, s),
        })

    for src_author in split.source_authors:
        src_texts = corpus.texts_for(src_author)[: split.texts_per_author]
        for tgt_author in split.target_authors:
            exemplars = corpus.texts_for(tgt_author)[: split.texts_per_author]
            limit = max_texts_per_direction or len(src_texts)
            for ti, source_text in enumerate(src_texts[:limit]):
                if include_copy_baselines:
                    add_row("copy_src", src_author, tgt_author, ti, source_text,
                            source_text, src_texts, exemplars)
                    add_row("copy_tgt", src_author, tgt_author, ti, source_text,
                            exemplars[ti % len(exemplars)], src_texts, exemplars)
                if system is not None:
                    t0 = time.perf_counter()
                    output = system(source_text, exemplars,
                                    seed=(seed * 7 + ti) & 0x7FFFFFFF)
                    durations.append(time.perf_counter() - t0)
                    add_row("system", src_author, tgt_author, ti, source_text,
                            output, src_texts, exemplars)

    report = EvalReport(rows=rows, aggregates={}, config={
        "split": split.name,
        "n_source_authors": len(split.source_authors),
        "n_target_authors": len(split.target_authors),
        "texts_per_author": split.texts_per_author,
        "eval_embedder": eval_embedder.embedder_id,
    })
    report.aggregates = report.recompute_aggregates()
    if durations:
        report.timing = {
            "n": len(durations),
            "mean_s": statistics.fmean(durations),
            "median_s": statistics.median(durations),
        }
    return report


# --------------------------------------------------------------------------
# attribute evaluation
# --------------------------------------------------------------------------

class LogisticStyleClassifier:
    """Logistic regression over style-embedding features.

    Plays the internal exemplar-selection role; evaluation accuracy must
    come from a different, held-out callable.
    """

    def __init__(self, embedder: StyleEmbedder | None = None,
                 iterations: int = 300, lr: float = 2.0):
        self.embedder = embedder or default_style_embedder()
        self.iterations = iterations
        self.lr = lr
        self._w = None

    def fit(self, texts, labels) -> "LogisticStyleClassifier":
        X = np.stack([self.embedder.embed(t).values for t in texts])
        X = np.hstack([X, np.ones((len(X), 1))])
        y = np.asarray(labels, dtype=np.float64)
        w = np.zeros(X.shape[1])
        for _ in range(self.iterations):
            p = 1.0 / (1.0 + np.exp(-X @ w))
            w -= self.lr * X.T @ (p - y) / len(y)
        self._w = w
        return self

    def predict_proba(self, text: str) -> float:
        if self._w is None:
            raise RuntimeError("classifier is not fitted")
        x = np.append(self.embedder.embed(text).values, 1.0)
        return float(1.0 / (1.0 + np.exp(-x @ self._w)))

    def predict(self, text: str) -> int:
        return int(self.predict_proba(text) >= 0.5)


def select_exemplars(texts, classifier: LogisticStyleClassifier,
                     target_label: int, num_examples: int,
                     min_proba: float = 0.95) -> list[str]:
    """Top-confidence texts of the target class with probability > min_proba."""
    scored = []
    for t in texts:
        p = classifier.predict_proba(t)
        conf = p if target_label == 1 else 1.0 - p
        if conf > min_proba:
            scored.append((conf, t))
    scored.sort(key=lambda pair: (-pair[0], pair[1]))
    if len(scored) < num_examples:
        logger.warning("only %d exemplars above confidence %.2f (wanted %d)",
                       len(scored), min_proba, num_examples)
    return [t for _, t in scored[:num_examples]]


def evaluate_attribute(system, formal_set, informal_set, accuracy_fn,
                       num_examples: int = 16, seed: int = 0,
                       max_eval_per_direction: int | None = None,
                       fluency_model: FluencyModel | None = None) -> EvalReport:
    """Two-direction attribute transfer evaluation (label 1 = formal).

    Exemplars come from an internal logistic classifier's most confident
    texts (probability > 0.95); accuracy_fn must be a held-out classifier
    returning the label of a text. Joint is the per-example geometric mean
    of accuracy, sim, and fluency, then averaged.
    """
    formal_set, informal_set = list(formal_set), list(informal_set)
    if not formal_set or not informal_set:
        raise ValueError("both attribute sets must be non-empty")
    internal = LogisticStyleClassifier().fit(
        formal_set + informal_set,
        [1] * len(formal_set) + [0] * len(informal_set))
    if accuracy_fn is internal.predict:
        raise ValueError("accuracy_fn must be held out from exemplar selection")
    fluency_model = fluency_model or FluencyModel(formal_set + informal_set)

    directions = (
        ("to_formal", informal_set, formal_set, 1),
        ("to_informal", formal_set, informal_set, 0),
    )
    rows: list[dict] = []
    for name, sources, pool, target_label in directions:
        exemplars = select_exemplars(pool, internal, target_label, num_examples)
        if not exemplars:
            raise ValueError(f"no confident exemplars for direction {name}")
        limit = max_eval_per_direction or len(sources)
        for ti, source_text in enumerate(sources[:limit]):
            output = system(source_text, exemplars,
                            seed=(seed * 13 + ti) & 0x7FFFFFFF)
            acc = 1.0 if accuracy_fn(output) == target_label else 0.0
            s = sim(source_text, output)
            fl = fluency_model(output)
            rows.append({
                "system": "system", "direction": name, "text_index": ti,
                "acc": acc, "sim": s, "fluency": fl,
                "joint": joint_eval(acc, s, fl),
            })

    aggregates: dict = {}
    for scope in ("overall", "to_formal", "to_informal"):
        sel = [r for r in rows if scope == "overall" or r["direction"] == scope]
        if sel:
            aggregates[scope] = {m: float(np.mean([r[m] for r in sel]))
                                 for m in ("acc", "sim", "fluency", "joint")}
    return EvalReport(rows=rows, aggregates=aggregates, config={
        "num_examples": num_examples,
        "n_formal": len(formal_set), "n_informal": len(informal_set),
    })


# --------------------------------------------------------------------------
# interpolation sweeps
# --------------------------------------------------------------------------

@dataclass
class SweepTable:
    rows: list[dict]

    def to_csv(self) -> str:
        buf = io.StringIO()
        names = sorted({k for r in self.rows for k in r})
        writer = csv.DictWriter(buf, fieldnames=names)
        writer.writeheader()
        writer.writerows(self.rows)
        return buf.getvalue()

    def column(self, name: str) -> list:
        return [r[name] for r in self.rows]


def interpolation_sweep(system, inputs, target_exemplars, lam_grid,
                        eval_embedder: StyleEmbedder | None = None,
                        accuracy_fn=None, seed: int = 0) -> SweepTable:
    """Mean metrics at each interpolation strength over a fixed input probe.

    Seeds are fixed per (input, lam-independent) so only lam varies between
    grid points.
    """
    lam_grid = list(lam_grid)
    if any(not 0.0 <= l <= 1.0 for l in lam_grid):
        raise ValueError("lam grid values must lie in [0, 1]")
    if sorted(lam_grid) != lam_grid:
        raise ValueError("lam grid must be sorted ascending")
    eval_embedder = eval_embedder or default_style_embedder()
    inputs = list(inputs)
    exemplars = list(target_exemplars)

    rows = []
    for lam in lam_grid:
        sims, towards_vals, accs = [], [], []
        for ti, text in enumerate(inputs):
            output = system(text, exemplars, lam=lam,
                            seed=(seed * 31 + ti) & 0x7FFFFFFF)
            sims.append(sim(text, output))
            towards_vals.append(towards(exemplars, output, eval_embedder))
            if accuracy_fn is not None:
                accs.append(float(accuracy_fn(output)))
        row = {"lam": lam, "mean_sim": float(np.mean(sims)),
               "mean_towards": float(np.mean(towards_vals))}
        if accs:
            row["mean_acc"] = float(np.mean(accs))
        rows.append(row)
    return SweepTable(rows=rows)


# --------------------------------------------------------------------------
# timing
# --------------------------------------------------------------------------

@dataclass
class TimingReport:
    seconds: list[float]
    device_note: str
    warmup: int

    @property
    def n(self) -> int:
        return len(self.seconds)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "median_s": statistics.median(self.seconds),
            "mean_s": statistics.fmean(self.seconds),
            "min_s": min(self.seconds),
            "max_s": max(self.seconds),
            "device_note": self.device_note,
            "warmup_excluded": self.warmup,
        }


def timing_report(system, inputs, device_note: str,
                  warmup: int = 3) -> TimingReport:
    """Wall-clock seconds per call, batch size 1, warmup iterations excluded."""
    inputs = list(inputs)
    if not inputs:
        raise ValueError("timing_report requires at least one input")
    for i in range(min(warmup, len(inputs))):
        system(inputs[i])
    seconds = []
    for text in inputs:
        t0 = time.perf_counter()
        system(text)
        seconds.append(time.perf_counter() - t0)
    return TimingReport(seconds=seconds, device_note=device_note, warmup=warmup)
