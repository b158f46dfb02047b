"""Style embeddings and the vector operations on them.

The default embedder is a training-free stylometric feature extractor so
the whole pipeline stays deterministic; adapters for external neural
embedders implement the same interface.
"""

from __future__ import annotations

import re
import zlib
from dataclasses import dataclass, field
from statistics import fmean, pstdev
from typing import Protocol, runtime_checkable

import numpy as np

DEFAULT_DIM = 768

_PUNCT_CLASSES = "!?.,;:'\"-()*"

_FUNCTION_WORDS = (
    "the a an and or but if then because so of to in on at for with from by "
    "as is are was were be been am do does did not no this that these those "
    "it its he she they we you i my your his her their our me him them us "
    "what which who when where how there here"
).split()

_EMOTICON_RE = re.compile(
    r"(?:[:;=8xX][-'o^]?[)(\[\]dDpP/\\|oO3*]|<3|\^_\^|t_t|T_T)"
)

_WORD_RE = re.compile(r"[A-Za-z']+")
_ELONGATION_RE = re.compile(r"(.)\1\1+")
_EXCLAIM_RUN_RE = re.compile(r"!{2,}")
_ELLIPSIS_RE = re.compile(r"\.{2,}|…")
_CONTRACTION_RE = re.compile(r"[A-Za-z]'[A-Za-z]")

_N_PUNCT = len(_PUNCT_CLASSES)
_N_SHAPE = 6
_N_WORDSTAT = 4
_N_MARKER = 4
_N_FUNC = len(_FUNCTION_WORDS)
_FIXED_DIMS = _N_PUNCT + _N_SHAPE + _N_WORDSTAT + _N_MARKER + _N_FUNC


@dataclass(frozen=True)
class StyleEmbedding:
    """A fixed-dimension style vector tagged with its producing embedder."""

    values: np.ndarray
    embedder_id: str

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("embedding values must be a 1-D vector")
        if not np.all(np.isfinite(arr)):
            raise ValueError("embedding contains non-finite entries")
        object.__setattr__(self, "values", arr)

    @property
    def dimension(self) -> int:
        return self.values.shape[0]

    def to_json(self) -> dict:
        return {"embedder_id": self.embedder_id, "values": self.values.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "StyleEmbedding":
        return cls(values=np.asarray(obj["values"], dtype=np.float64),
                   embedder_id=obj["embedder_id"])


@runtime_checkable
class StyleEmbedder(Protocol):
    """Anything that maps text to a StyleEmbedding of a fixed dimension."""

    embedder_id: str
    dimension: int

    def embed(self, text: str) -> StyleEmbedding: ...


@dataclass
class FeatureStyleEmbedder:
    """Deterministic stylometric embedder.

    Concatenates weighted feature blocks (punctuation class frequencies,
    casing/shape ratios, word statistics, marker counts, function-word
    frequencies, hashed character trigrams) and L2-normalizes the result.
    The trigram bucket count absorbs whatever is left of ``dimension`` after
    the fixed blocks, so the output dimension is exactly ``dimension``.
    """

    dimension: int = DEFAULT_DIM
    embedder_id: str = "stylo-768-v1"
    hash_salt: int = 101
    w_punct: float = 1.0
    w_shape: float = 1.0
    w_wordstat: float = 0.05
    w_marker: float = 0.8
    w_func: float = 0.25
    w_trigram: float = 0.15
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.dimension <= _FIXED_DIMS:
            raise ValueError(
                f"dimension must exceed {_FIXED_DIMS} to leave room for trigrams")
        self._n_buckets = self.dimension - _FIXED_DIMS

    def embed(self, text: str) -> StyleEmbedding:
        if not text or not text.strip():
            raise ValueError("cannot embed empty text")
        cached = self._cache.get(text)
        if cached is None:
            cached = self._features(text)
            cached.setflags(write=False)
            if len(self._cache) < 65536:
                self._cache[text] = cached
        return StyleEmbedding(values=cached, embedder_id=self.embedder_id)

    # feature extraction ---------------------------------------------------

    def _features(self, text: str) -> np.ndarray:
        n_chars = len(text)
        words = _WORD_RE.findall(text)
        n_words = max(1, len(words))

        # Profile over punctuation classes (not per-char density), so the
        # block is invariant to text length for a fixed punctuation habit.
        punct = np.zeros(_N_PUNCT)
        n_punct = sum(text.count(ch) for ch in _PUNCT_CLASSES)
        if n_punct:
            for i, ch in enumerate(_PUNCT_CLASSES):
                punct[i] = text.count(ch) / n_punct

        alpha = [c for c in text if c.isalpha()]
        n_alpha = max(1, len(alpha))
        shape = np.zeros(_N_SHAPE)
        shape[0] = sum(1 for c in alpha if c.isupper()) / n_alpha
        shape[1] = sum(1 for w in words if len(w) > 1 and w.isupper()) / n_words
        shape[2] = sum(1 for w in words if w.istitle()) / n_words
        shape[3] = sum(1 for c in text if c.isdigit()) / n_chars
        shape[4] = len(_ELONGATION_RE.findall(text)) / n_words
        shape[5] = sum(1 for c in alpha if c.islower()) / n_alpha

        wordstat = np.zeros(_N_WORDSTAT)
        if words:
            lengths = [len(w) for w in words]
            wordstat[0] = min(1.0, fmean(lengths) / 10.0)
            wordstat[1] = min(1.0, pstdev(lengths) / 10.0) if len(lengths) > 1 else 0.0
            wordstat[2] = min(1.0, len(words) / 20.0)
            wordstat[3] = len({w.lower() for w in words}) / n_words

        marker = np.zeros(_N_MARKER)
        marker[0] = len(_CONTRACTION_RE.findall(text)) / n_words
        marker[1] = len(_EMOTICON_RE.findall(text)) / n_words
        marker[2] = min(1.0, len(_EXCLAIM_RUN_RE.findall(text)) / 2.0)
        marker[3] = min(1.0, len(_ELLIPSIS_RE.findall(text)) / 2.0)

        # Case-sensitive on purpose: casing is part of the style signal.
        func = np.zeros(_N_FUNC)
        tokens = text.split()
        bare = [t.strip(_PUNCT_CLASSES) for t in tokens]
        for i, fw in enumerate(_FUNCTION_WORDS):
            func[i] = bare.count(fw) / n_words
        norm = np.linalg.norm(func)
        if norm > 0:
            func /= norm

        tri = np.zeros(self._n_buckets)
        padded = f"\x02\x02{text}\x03\x03"
        for i in range(len(padded) - 2):
            gram = padded[i:i + 3]
            bucket = (zlib.crc32(gram.encode("utf-8")) ^ self.hash_salt) % self._n_buckets
            tri[bucket] += 1.0
        tri /= np.linalg.norm(tri)

        vec = np.concatenate([
            self.w_punct * punct,
            self.w_shape * shape,
            self.w_wordstat * wordstat,
            self.w_marker * marker,
            self.w_func * func,
            self.w_trigram * tri,
        ])
        return vec / np.linalg.norm(vec)


def default_style_embedder(dimension: int = DEFAULT_DIM) -> FeatureStyleEmbedder:
    """The embedder used for conditioning and reranking."""
    return FeatureStyleEmbedder(dimension=dimension)


def heldout_style_embedder(dimension: int = DEFAULT_DIM) -> FeatureStyleEmbedder:
    """A differently-parameterized embedder reserved for evaluation.

    Kept distinct from the rerank embedder (different id, hash salt, and
    block weights) so evaluation never scores with the exact representation
    the pipeline reranked on.
    """
    return FeatureStyleEmbedder(
        dimension=dimension,
        embedder_id="stylo-768-eval-v1",
        hash_salt=90001,
        w_punct=0.9,
        w_shape=1.1,
        w_wordstat=0.06,
        w_marker=0.7,
        w_func=0.3,
        w_trigram=0.16,
    )


def embed(embedder: StyleEmbedder, text: str) -> StyleEmbedding:
    """Functional form of ``embedder.embed(text)``."""
    return embedder.embed(text)


def _check_compatible(embeddings) -> None:
    first = embeddings[0]
    for e in embeddings[1:]:
        if e.embedder_id != first.embedder_id:
            raise ValueError(
                f"mixed embedder ids: {first.embedder_id!r} vs {e.embedder_id!r}")
        if e.dimension != first.dimension:
            raise ValueError("mixed embedding dimensions")


def mean_pool(embeddings) -> StyleEmbedding:
    """Component-wise mean of same-embedder embeddings. Not re-normalized."""
    embeddings = list(embeddings)
    if not embeddings:
        raise ValueError("mean_pool of an empty list")
    _check_compatible(embeddings)
    stacked = np.stack([e.values for e in embeddings])
    return StyleEmbedding(values=stacked.mean(axis=0),
                          embedder_id=embeddings[0].embedder_id)


def interpolate(source: StyleEmbedding, target: StyleEmbedding, lam: float) -> StyleEmbedding:
    """Linear blend (1-lam)*source + lam*target."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lam must lie in [0, 1], got {lam!r}")
    _check_compatible([source, target])
    return StyleEmbedding(
        values=(1.0 - lam) * source.values + lam * target.values,
        embedder_id=source.embedder_id,
    )


def cosine(a: StyleEmbedding, b: StyleEmbedding) -> float:
    """Cosine similarity; raises on zero vectors or dimension mismatch."""
    if a.dimension != b.dimension:
        raise ValueError("dimension mismatch")
    na = np.linalg.norm(a.values)
    nb = np.linalg.norm(b.values)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine undefined for zero vectors")
    return float(np.dot(a.values, b.values) / (na * nb))
