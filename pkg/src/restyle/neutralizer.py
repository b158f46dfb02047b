"""Style-neutral paraphrasing via deterministic rewrite rules.

Neutralization strips style markers (casing, exclamatory punctuation,
emoticons, contractions) while keeping every content word; sample-to-sample
variety comes from seeded synonym substitutions and occasional clause
reordering. An adapter seat lets an external neural paraphraser slot in
behind the same contract.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from random import Random
from typing import Protocol

from .style_space import StyleEmbedder, cosine

#: Probability that an eligible word is replaced by its lexicon entry.
SYNONYM_SUB_PROB = 0.35
#: Probability that two clauses joined by a conjunction swap places.
CLAUSE_REORDER_PROB = 0.2

_CONTRACTIONS = {
    "can't": "cannot", "won't": "will not", "shan't": "shall not",
    "ain't": "is not", "let's": "let us", "y'all": "you all",
    "it's": "it is", "that's": "that is", "what's": "what is",
    "there's": "there is", "here's": "here is", "he's": "he is",
    "she's": "she is", "who's": "who is", "how's": "how is",
    "ma'am": "madam", "o'clock": "oclock",
}
_SUFFIX_RULES = (
    ("n't", " not"), ("'re", " are"), ("'ll", " will"),
    ("'ve", " have"), ("'m", " am"), ("'d", " would"),
)

_EMOTICON_RE = re.compile(
    r"(?:^|(?<=\s))(?:[:;=8xX][-'o^]?[)(\[\]dDpP/\\|oO3*]+|<3|\^_\^|[tT]_[tT])(?=\s|$)"
)
_WS_RE = re.compile(r"\s+")
_ELLIPSIS_RE = re.compile(r"\.{2,}|…")
_TERMINAL_PUNCT_RE = re.compile(r"[.!?,;:]+$")
_PUNCT_EDGE = ".,;:!?()\"'"


@dataclass(frozen=True)
class ParaphraseSettings:
    """Sampling knobs; defaults follow the pipeline's standard values.

    For the rule-based neutralizer top_p/tau/beam are recorded but inert;
    external adapters receive them verbatim.
    """

    top_p: float = 0.80
    tau: float = 1.5
    beam: int = 8
    n_samples: int = 5
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.top_p <= 1.0:
            raise ValueError("top_p must lie in (0, 1]")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.beam < 1 or self.n_samples < 1:
            raise ValueError("beam and n_samples must be >= 1")


class ExternalParaphraser(Protocol):
    """Adapter seat for a neural paraphrase model; same contract as paraphrase()."""

    def paraphrase(self, text: str, settings: ParaphraseSettings) -> list[str]: ...


@lru_cache(maxsize=1)
def synonym_table() -> dict[str, str]:
    """The bundled two-column substitution lexicon."""
    table: dict[str, str] = {}
    data = resources.files("restyle.data").joinpath("synonyms.txt").read_text("utf-8")
    for line in data.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            continue
        table.setdefault(parts[0], parts[1])
    return table


def expand_contractions(text: str) -> str:
    """Expand common lowercase contractions word by word."""
    out = []
    for tok in text.split():
        lead = tok[: len(tok) - len(tok.lstrip(_PUNCT_EDGE))]
        trail = tok[len(tok.rstrip(_PUNCT_EDGE)):]
        core = tok[len(lead): len(tok) - len(trail)] if trail else tok[len(lead):]
        if core in _CONTRACTIONS:
            core = _CONTRACTIONS[core]
        else:
            for suffix, repl in _SUFFIX_RULES:
                if core.endswith(suffix) and len(core) > len(suffix):
                    core = core[: -len(suffix)] + repl
                    break
        out.append(lead + core + trail)
    return " ".join(out)


_ALPHA_RUN_RE = re.compile(r"([a-z])\1{2,}")


def normalize_text(text: str, collapse_elongation: bool = False) -> str:
    """Strip style markers: the shared neutral form used across the pipeline.

    Lowercases, removes emoticons and exclamation marks, collapses ellipsis
    runs, expands contractions, strips the terminal punctuation cluster, and
    normalizes whitespace. Letter elongation ("sooo") is collapsed only when
    requested: paraphrasing treats it as a style marker, while the meaning
    scorers keep it as a surface difference.
    """
    t = _WS_RE.sub(" ", text.strip())
    t = _EMOTICON_RE.sub(" ", t)
    t = t.lower()
    t = expand_contractions(t)
    t = t.replace("!", " ")
    t = _ELLIPSIS_RE.sub(" ", t)
    if collapse_elongation:
        t = _ALPHA_RUN_RE.sub(r"\1", t)
    t = _WS_RE.sub(" ", t).strip()
    t = _TERMINAL_PUNCT_RE.sub("", t).strip()
    return t


def _mix(seed: int, i: int) -> int:
    return (seed * 1_000_003 + i * 7_919 + 12_289) & 0x7FFFFFFFFFFFFFFF


def _vary(base: str, rng: Random) -> str:
    table = synonym_table()
    words = base.split()
    out = []
    for w in words:
        lead = w[: len(w) - len(w.lstrip(_PUNCT_EDGE))]
        trail = w[len(w.rstrip(_PUNCT_EDGE)):]
        core = w[len(lead): len(w) - len(trail)] if trail else w[len(lead):]
        if core in table and rng.random() < SYNONYM_SUB_PROB:
            core = table[core]
        out.append(lead + core + trail)
    text = " ".join(out)

    for conj in (" and ", " but "):
        if conj in text:
            left, right = text.split(conj, 1)
            if (len(left.split()) >= 3 and len(right.split()) >= 3
                    and rng.random() < CLAUSE_REORDER_PROB):
                text = right + conj.rstrip() + " " + left
            break
    return text


def paraphrase(text: str, settings: ParaphraseSettings) -> list[str]:
    """Produce n_samples style-neutral paraphrases of text.

    Every output is the normalized form of the input with seeded synonym
    substitutions (and occasional clause reordering); no tokens outside the
    source plus the substitution lexicon are ever introduced.
    """
    if not text or not text.strip():
        raise ValueError("cannot paraphrase empty text")
    base = normalize_text(text, collapse_elongation=True)
    if not base:
        raise ValueError("text is empty after neutralization")
    return [_vary(base, Random(_mix(settings.seed, i)))
            for i in range(settings.n_samples)]


def paraphrase_with(adapter: ExternalParaphraser | None, text: str,
                    settings: ParaphraseSettings) -> list[str]:
    """Dispatch to an external paraphraser when configured, else the default."""
    if adapter is None:
        return paraphrase(text, settings)
    return adapter.paraphrase(text, settings)


def neutrality_score(original: str, paraphrase_text: str,
                     embedder: StyleEmbedder) -> float:
    """Normalized style distance (1 - cos)/2 between original and paraphrase."""
    if not original.strip() or not paraphrase_text.strip():
        raise ValueError("neutrality_score requires non-empty texts")
    c = cosine(embedder.embed(original), embedder.embed(paraphrase_text))
    return (1.0 - c) / 2.0
