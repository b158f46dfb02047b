"""Author-keyed text corpora: JSONL ingestion, per-author sampling, author-disjoint splits."""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from random import Random

logger = logging.getLogger(__name__)

#: Identifier of the tokenizer used for token_count fields, recorded so
#: corpora stay self-describing when counts were produced elsewhere.
TOKENIZER_ID = "ws-punct-v1"

_TOKEN_RE = re.compile(r"[A-Za-z0-9_']+|[^\w\s]")

SPLITS = ("train", "val", "test", "unassigned")


def count_tokens(text: str) -> int:
    """Count tokens under the default whitespace-plus-punctuation tokenizer."""
    return len(_TOKEN_RE.findall(text))


@dataclass(frozen=True)
class TextRecord:
    author_id: str
    text: str
    token_count: int
    split: str = "unassigned"

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("record text is empty after trimming")
        if self.token_count < 0:
            raise ValueError("token_count must be nonnegative")
        if self.split not in SPLITS:
            raise ValueError(f"unknown split {self.split!r}")


@dataclass
class LoadReport:
    """Counts of lines seen, skipped, and deduplicated during a load."""

    total_lines: int = 0
    valid: int = 0
    malformed: int = 0
    duplicates: int = 0


@dataclass
class AuthorCorpus:
    """Ordered records plus an author -> record-position index.

    Immutable by convention after construction; all sampling operations
    return new corpora.
    """

    records: list[TextRecord]
    authors: dict[str, list[int]] = field(default_factory=dict)
    tokenizer_id: str = TOKENIZER_ID
    load_report: LoadReport | None = None

    def __post_init__(self):
        if not self.authors:
            self.authors = self._build_index(self.records)

    @staticmethod
    def _build_index(records) -> dict[str, list[int]]:
        index: dict[str, list[int]] = {}
        for pos, rec in enumerate(records):
            index.setdefault(rec.author_id, []).append(pos)
        return index

    @classmethod
    def from_records(cls, records, tokenizer_id: str = TOKENIZER_ID,
                     load_report: LoadReport | None = None) -> "AuthorCorpus":
        """Build a corpus, dropping byte-identical (author, text) duplicates."""
        seen: set[tuple[str, str]] = set()
        kept = []
        dupes = 0
        for rec in records:
            key = (rec.author_id, rec.text)
            if key in seen:
                dupes += 1
                continue
            seen.add(key)
            kept.append(rec)
        if dupes:
            logger.warning("dropped %d duplicate (author, text) records", dupes)
            if load_report is not None:
                load_report.duplicates += dupes
        return cls(records=kept, tokenizer_id=tokenizer_id, load_report=load_report)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def author_ids(self) -> list[str]:
        return sorted(self.authors)

    @property
    def n_authors(self) -> int:
        return len(self.authors)

    def records_for(self, author_id: str) -> list[TextRecord]:
        if author_id not in self.authors:
            raise KeyError(f"unknown author {author_id!r}")
        return [self.records[i] for i in self.authors[author_id]]

    def texts_for(self, author_id: str) -> list[str]:
        return [r.text for r in self.records_for(author_id)]

    def subset(self, author_ids, split: str | None = None) -> "AuthorCorpus":
        """New corpus restricted to the given authors, optionally relabeling split."""
        wanted = set(author_ids)
        records = []
        for rec in self.records:
            if rec.author_id in wanted:
                records.append(rec if split is None else replace(rec, split=split))
        return AuthorCorpus(records=records, tokenizer_id=self.tokenizer_id)

    def with_split(self, split: str) -> "AuthorCorpus":
        """Relabel every record's split (used when reloading split manifests)."""
        return AuthorCorpus(
            records=[replace(r, split=split) for r in self.records],
            tokenizer_id=self.tokenizer_id,
        )


def load_corpus(path, format: str = "jsonl") -> AuthorCorpus:
    """Load an author-keyed corpus from a JSONL file.

    Each line must be a JSON object with string fields ``author_id`` and
    ``text``. Malformed lines are skipped and counted in the returned
    corpus's ``load_report``; duplicate (author_id, text) pairs are
    deduplicated with a warning count. Raises if the file is missing or
    yields zero valid records.
    """
    if format != "jsonl":
        raise ValueError(f"unsupported corpus format {format!r}")
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"corpus file not found: {path}")

    report = LoadReport()
    records = []
    with path.open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            report.total_lines += 1
            try:
                obj = json.loads(line)
                author = obj["author_id"]
                text = obj["text"]
                if not isinstance(author, str) or not isinstance(text, str):
                    raise TypeError("author_id and text must be strings")
                rec = TextRecord(
                    author_id=author,
                    text=text,
                    token_count=count_tokens(text),
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                report.malformed += 1
                continue
            records.append(rec)
            report.valid += 1

    if report.malformed:
        logger.warning("skipped %d malformed lines in %s", report.malformed, path)
    if not records:
        raise ValueError(f"zero valid records in {path}")
    corpus = AuthorCorpus.from_records(records, load_report=report)
    report.valid = len(corpus.records)
    return corpus


def save_corpus(corpus: AuthorCorpus, path) -> None:
    """Write a corpus as JSONL, one object per line, including split labels."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for rec in corpus.records:
            fh.write(json.dumps(
                {"author_id": rec.author_id, "text": rec.text, "split": rec.split},
                sort_keys=True, ensure_ascii=False) + "\n")


def sample_author_texts(corpus: AuthorCorpus, per_author: int, max_tokens: int,
                        seed: int) -> AuthorCorpus:
    """Length-filter then uniformly subsample each author's records.

    Records with token_count > max_tokens are removed first; each remaining
    author keeps min(per_author, available) records, sampled uniformly
    without replacement. Authors left empty are dropped. Deterministic in
    seed.
    """
    if per_author < 1:
        raise ValueError("per_author must be >= 1")
    if max_tokens < 1:
        raise ValueError("max_tokens must be >= 1")

    rng = Random(seed)
    kept_positions: list[int] = []
    for author in sorted(corpus.authors):
        eligible = [i for i in corpus.authors[author]
                    if corpus.records[i].token_count <= max_tokens]
        if not eligible:
            continue
        if len(eligible) > per_author:
            eligible = sorted(rng.sample(eligible, per_author))
        kept_positions.extend(eligible)

    kept_positions.sort()
    records = [corpus.records[i] for i in kept_positions]
    if not records:
        logger.warning("sample_author_texts produced an empty corpus")
    return AuthorCorpus(records=records, tokenizer_id=corpus.tokenizer_id)


def split_by_author(corpus: AuthorCorpus, fractions, seed: int,
                    holdout_authors=frozenset()):
    """Split a corpus into (train, val, test) with author-disjoint assignment.

    Sizes follow floor allocation on author counts with the remainder going
    to train. Authors named in holdout_authors never land in train; if they
    outnumber the val+test allocation, val/test grow to absorb them.
    """
    f = tuple(float(x) for x in fractions)
    if len(f) != 3 or any(x < 0 for x in f):
        raise ValueError("fractions must be three nonnegative reals")
    if abs(sum(f) - 1.0) > 1e-9:
        raise ValueError(f"fractions must sum to 1, got {sum(f)!r}")

    holdout = set(holdout_authors)
    authors = sorted(corpus.authors)
    rng = Random(seed)
    rng.shuffle(authors)

    n = len(authors)
    n_val = int(f[1] * n)
    n_test = int(f[2] * n)
    n_train = n - n_val - n_test

    non_hold = [a for a in authors if a not in holdout]
    hold = [a for a in authors if a in holdout]

    train_authors = non_hold[:n_train]
    rest = non_hold[n_train:] + hold
    # When holdouts overflow val+test, exclusion from train wins over sizes.
    if len(train_authors) < n_train:
        n_deficit = n_train - len(train_authors)
        logger.warning("holdout authors overflow val/test by %d; "
                       "train shrinks accordingly", n_deficit)
    val_authors = rest[:n_val]
    test_authors = rest[n_val:]

    return (
        corpus.subset(train_authors, split="train"),
        corpus.subset(val_authors, split="val"),
        corpus.subset(test_authors, split="test"),
    )


def sample_author_pairs(corpus: AuthorCorpus, n: int, seed: int) -> list[tuple[str, str]]:
    """Sample n unique ordered (source, target) author pairs, source != target."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return []
    authors = sorted(corpus.authors)
    a = len(authors)
    if a < 2:
        raise ValueError("need at least 2 authors to form pairs")
    max_pairs = a * (a - 1)
    if n > max_pairs:
        raise ValueError(f"n={n} exceeds the {max_pairs} possible unique pairs")

    rng = Random(seed)
    if n > max_pairs // 2:
        all_pairs = [(s, t) for s in authors for t in authors if s != t]
        return rng.sample(all_pairs, n)

    chosen: set[tuple[str, str]] = set()
    pairs: list[tuple[str, str]] = []
    while len(pairs) < n:
        s = authors[rng.randrange(a)]
        t = authors[rng.randrange(a)]
        if s == t or (s, t) in chosen:
            continue
        chosen.add((s, t))
        pairs.append((s, t))
    return pairs
