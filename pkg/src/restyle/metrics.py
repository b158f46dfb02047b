"""Automatic scores: Away, Towards, Sim, Fluency, and the aggregate means.

The meaning and fluency scorers are deterministic corpus-fit stand-ins;
external scorers can be slotted in behind the same signatures.
"""

from __future__ import annotations

import math
import re
from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass, field

from .neutralizer import normalize_text
from .style_space import StyleEmbedder, cosine, mean_pool

_WORD_RE = re.compile(r"[a-z']+")

_STOPWORDS = frozenset(
    "the a an and or but if then because so of to in on at for with from by "
    "as is are was were be been am do does did not no this that these those "
    "it its he she they we you i my your his her their our me him them us "
    "what which who when where how there here will would can could should "
    "have has had am one near".split()
)


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


@dataclass
class ScoreVector:
    """One candidate's automatic scores; aux holds named auxiliary scores."""

    away: float
    towards: float
    sim: float
    fluency: float | None = None
    aux: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("away", "towards", "sim"):
            v = getattr(self, name)
            if not math.isfinite(v) or not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v!r} outside [0, 1]")
        if self.fluency is not None and not 0.0 <= self.fluency <= 1.0:
            raise ValueError(f"fluency={self.fluency!r} outside [0, 1]")
        for k, v in self.aux.items():
            if not math.isfinite(v):
                raise ValueError(f"aux score {k!r} is non-finite")

    def to_dict(self) -> dict:
        d = {"away": self.away, "towards": self.towards, "sim": self.sim}
        if self.fluency is not None:
            d["fluency"] = self.fluency
        if self.aux:
            d["aux"] = dict(sorted(self.aux.items()))
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScoreVector":
        return cls(away=d["away"], towards=d["towards"], sim=d["sim"],
                   fluency=d.get("fluency"), aux=dict(d.get("aux", {})))


def _centroid(texts, embedder: StyleEmbedder):
    return mean_pool([embedder.embed(t) for t in texts])


#: Cosine deadband absorbed by both style scores. Residual feature overlap
#: between unrelated styles (shared word statistics, hash collisions) sits
#: below this floor, so a copied source scores exactly 0 Towards and a
#: copied exemplar exactly 1 Away against a disjoint style.
STYLE_SCORE_FLOOR = 0.05


def away(source_texts, output: str, embedder: StyleEmbedder,
         s_floor: float = STYLE_SCORE_FLOOR) -> float:
    """Normalized style distance of output from the source centroid.

    (1 - cos) rescaled by 1/(1 - s_floor) and clamped: 0 when the output's
    embedding aligns with the source centroid direction, 1 once the cosine
    drops below s_floor.
    """
    source_texts = list(source_texts)
    if not source_texts or not output.strip():
        raise ValueError("away requires non-empty source texts and output")
    c = cosine(embedder.embed(output), _centroid(source_texts, embedder))
    return _clamp01((1.0 - c) / (1.0 - s_floor))


def towards(target_texts, output: str, embedder: StyleEmbedder,
            t_floor: float = STYLE_SCORE_FLOOR) -> float:
    """Floored, rescaled cosine to the target centroid.

    (cos - t_floor)/(1 - t_floor) clamped to [0, 1]: a copy of the full
    exemplar set scores exactly 1, a style-orthogonal output exactly 0.
    """
    target_texts = list(target_texts)
    if not target_texts or not output.strip():
        raise ValueError("towards requires non-empty target texts and output")
    c = cosine(embedder.embed(output), _centroid(target_texts, embedder))
    return _clamp01((c - t_floor) / (1.0 - t_floor))


def _content_counts(text: str) -> Counter:
    words = _WORD_RE.findall(normalize_text(text))
    content = [w for w in words if w not in _STOPWORDS]
    return Counter(content if content else words)


def _counter_cosine(a: Counter, b: Counter) -> float:
    if not a or not b:
        return 0.0
    dot = sum(a[k] * b[k] for k in a.keys() & b.keys())
    na2 = sum(v * v for v in a.values())
    nb2 = sum(v * v for v in b.values())
    # Single sqrt over the integer product keeps identical vectors at 1.0.
    return dot / math.sqrt(na2 * nb2)


def sim(source: str, output: str) -> float:
    """Meaning preservation: cosine over normalized content-word count vectors.

    Case- and punctuation-insensitive; 1.0 for surface variants sharing all
    content words, 0.0 for disjoint content vocabularies.
    """
    if not source.strip() or not output.strip():
        raise ValueError("sim requires non-empty texts")
    a = _content_counts(source)
    b = _content_counts(output)
    if not a and not b:
        return 1.0 if normalize_text(source) == normalize_text(output) else 0.0
    return _clamp01(_counter_cosine(a, b))


def _trigram_counts(text: str) -> Counter:
    t = normalize_text(text)
    padded = f"\x02\x02{t}\x03\x03"
    return Counter(padded[i:i + 3] for i in range(len(padded) - 2))


def sim_secondary(source: str, output: str) -> float:
    """Second meaning score over character trigrams, mapped to [0, 1] via (x+1)/2.

    Plays the role of an independent second meaning check in the filter
    cascade; an external sentence-embedding scorer applies the same map.
    """
    if not source.strip() or not output.strip():
        raise ValueError("sim_secondary requires non-empty texts")
    c = _counter_cosine(_trigram_counts(source), _trigram_counts(output))
    return _clamp01((c + 1.0) / 2.0)


class FluencyModel:
    """Character 5-gram language model fit on a reference corpus.

    The fluency score of a text is the percentile of its mean per-character
    log-likelihood among the training texts, mapped to [0, 1]. The raw mean
    negative log-likelihood is exposed as a perplexity-style diagnostic.
    """

    ORDER = 5
    _ALPHA = 0.1
    _WEIGHTS = (0.05, 0.10, 0.15, 0.25, 0.45)  # orders 1..5

    def __init__(self, texts):
        texts = [t for t in texts if t and t.strip()]
        if not texts:
            raise ValueError("FluencyModel requires non-empty training texts")
        self._counts: list[dict[str, Counter]] = [dict() for _ in range(self.ORDER)]
        alphabet: set[str] = set()
        for t in texts:
            s = self._prep(t)
            alphabet.update(s)
            for k in range(1, self.ORDER + 1):
                table = self._counts[k - 1]
                for i in range(len(s) - k + 1):
                    ctx, ch = s[i:i + k - 1], s[i + k - 1]
                    table.setdefault(ctx, Counter())[ch] += 1
        self._vocab = len(alphabet) + 1  # +1 for unseen characters
        self._reference = sorted(self._loglik(t) for t in texts)

    @staticmethod
    def _prep(text: str) -> str:
        return "\x02" * (FluencyModel.ORDER - 1) + text.strip() + "\x03"

    def _char_prob(self, ctx: str, ch: str) -> float:
        p = 0.0
        for k in range(1, self.ORDER + 1):
            table = self._counts[k - 1]
            c = table.get(ctx[len(ctx) - (k - 1):] if k > 1 else "", Counter())
            p += self._WEIGHTS[k - 1] * (c[ch] + self._ALPHA) / (
                sum(c.values()) + self._ALPHA * self._vocab)
        return p

    def _loglik(self, text: str) -> float:
        s = self._prep(text)
        total = 0.0
        n = 0
        for i in range(self.ORDER - 1, len(s)):
            total += math.log(self._char_prob(s[i - self.ORDER + 1:i], s[i]))
            n += 1
        return total / max(1, n)

    def mean_nll(self, text: str) -> float:
        """Mean negative log-likelihood per character (lower = more fluent)."""
        if not text or not text.strip():
            raise ValueError("fluency requires non-empty text")
        return -self._loglik(text)

    def score(self, text: str) -> float:
        """Percentile of the text's log-likelihood among training texts."""
        if not text or not text.strip():
            raise ValueError("fluency requires non-empty text")
        ll = self._loglik(text)
        return bisect_right(self._reference, ll) / len(self._reference)

    __call__ = score


def rerank_score(s: ScoreVector) -> float:
    """Nested geometric mean G(G(away, towards), sim) used for reranking."""
    return style_joint(s.away, s.towards, s.sim)


def style_joint(away_v: float, towards_v: float, sim_v: float) -> float:
    """G(G(Away, Towards), Sim): the per-example style-transfer aggregate."""
    for name, v in (("away", away_v), ("towards", towards_v), ("sim", sim_v)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name}={v!r} outside [0, 1]")
    return math.sqrt(math.sqrt(away_v * towards_v) * sim_v)


def joint_eval(accuracy: float, s: float, fl: float) -> float:
    """Geometric mean of accuracy, meaning, and fluency for attribute transfer."""
    for name, v in (("accuracy", accuracy), ("sim", s), ("fluency", fl)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name}={v!r} outside [0, 1]")
    return (accuracy * s * fl) ** (1.0 / 3.0)
