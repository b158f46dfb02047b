"""Embedding-conditioned encoder-decoder.

A style vector is projected into the model's hidden space and prepended to
the input token embeddings; the decoder is trained to reconstruct target
text by cross-entropy. Generation uses temperature-scaled nucleus sampling
with per-candidate seeded streams.
"""

from __future__ import annotations

import copy
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn

from .style_space import StyleEmbedding

logger = logging.getLogger(__name__)

PAD, BOS, EOS, UNK = 0, 1, 2, 3
_SPECIALS = ["<pad>", "<bos>", "<eos>", "<unk>"]
_EOW = "</w>"


def _mix_seed(seed: int, i: int) -> int:
    return (seed * 2_654_435_761 + i * 40_503 + 97) & 0x7FFFFFFFFFFFFFFF


# --------------------------------------------------------------------------
# tokenizers
# --------------------------------------------------------------------------

class CharTokenizer:
    """Character-level tokenizer over a fixed alphabet."""

    kind = "char"

    def __init__(self, alphabet):
        self.alphabet = sorted(set(alphabet))
        self._to_id = {c: i + len(_SPECIALS) for i, c in enumerate(self.alphabet)}
        self._to_char = {i: c for c, i in self._to_id.items()}

    @classmethod
    def train(cls, texts) -> "CharTokenizer":
        chars = set()
        for t in texts:
            chars.update(t)
        return cls(chars)

    @property
    def vocab_size(self) -> int:
        return len(_SPECIALS) + len(self.alphabet)

    def encode(self, text: str) -> list[int]:
        return [self._to_id.get(c, UNK) for c in text]

    def decode(self, ids) -> str:
        return "".join(self._to_char.get(i, "") for i in ids
                       if i not in (PAD, BOS, EOS, UNK))

    def to_json(self) -> dict:
        return {"kind": self.kind, "alphabet": self.alphabet}

    @classmethod
    def from_json(cls, obj: dict) -> "CharTokenizer":
        return cls(obj["alphabet"])


class BpeTokenizer:
    """Small learned byte-pair tokenizer over whitespace-split words.

    Merges are learned greedily on word counts with lexicographic
    tie-breaking, so training is deterministic for a fixed corpus.
    """

    kind = "bpe"

    def __init__(self, alphabet, merges):
        self.alphabet = sorted(set(alphabet))
        self.merges = [tuple(m) for m in merges]
        symbols = list(_SPECIALS) + self.alphabet + [_EOW]
        symbols += [a + b for a, b in self.merges]
        self._to_id: dict[str, int] = {}
        for s in symbols:
            if s not in self._to_id:
                self._to_id[s] = len(self._to_id)
        self._to_sym = {i: s for s, i in self._to_id.items()}
        self._ranks = {pair: r for r, pair in enumerate(self.merges)}
        self._word_cache: dict[str, list[int]] = {}

    @classmethod
    def train(cls, texts, vocab_size: int = 512) -> "BpeTokenizer":
        words: dict[tuple[str, ...], int] = {}
        alphabet: set[str] = set()
        for t in texts:
            for w in t.split():
                alphabet.update(w)
                key = tuple(w) + (_EOW,)
                words[key] = words.get(key, 0) + 1

        n_base = len(_SPECIALS) + len(alphabet) + 1
        merges: list[tuple[str, str]] = []
        work = dict(words)
        while n_base + len(merges) < vocab_size:
            pair_counts: dict[tuple[str, str], int] = {}
            for word, cnt in work.items():
                for i in range(len(word) - 1):
                    p = (word[i], word[i + 1])
                    pair_counts[p] = pair_counts.get(p, 0) + cnt
            if not pair_counts:
                break
            best = min(pair_counts.items(), key=lambda kv: (-kv[1], kv[0]))
            if best[1] < 2:
                break
            pair = best[0]
            merges.append(pair)
            merged = pair[0] + pair[1]
            new_work: dict[tuple[str, ...], int] = {}
            for word, cnt in work.items():
                out = []
                i = 0
                while i < len(word):
                    if i < len(word) - 1 and (word[i], word[i + 1]) == pair:
                        out.append(merged)
                        i += 2
                    else:
                        out.append(word[i])
                        i += 1
                key = tuple(out)
                new_work[key] = new_work.get(key, 0) + cnt
            work = new_work
        return cls(alphabet, merges)

    @property
    def vocab_size(self) -> int:
        return len(self._to_id)

    def _encode_word(self, word: str) -> list[int]:
        cached = self._word_cache.get(word)
        if cached is not None:
            return cached
        syms = [c if c in self._to_id else None for c in word] + [_EOW]
        syms = [s if s is not None else "<unk>" for s in syms]
        while len(syms) > 1:
            best_rank, best_i = None, None
            for i in range(len(syms) - 1):
                r = self._ranks.get((syms[i], syms[i + 1]))
                if r is not None and (best_rank is None or r < best_rank):
                    best_rank, best_i = r, i
            if best_i is None:
                break
            syms = syms[:best_i] + [syms[best_i] + syms[best_i + 1]] + syms[best_i + 2:]
        ids = [self._to_id.get(s, UNK) for s in syms]
        if len(self._word_cache) < 65536:
            self._word_cache[word] = ids
        return ids

    def encode(self, text: str) -> list[int]:
        ids: list[int] = []
        for w in text.split():
            ids.extend(self._encode_word(w))
        return ids

    def decode(self, ids) -> str:
        parts = []
        for i in ids:
            if i in (PAD, BOS, EOS, UNK):
                continue
            parts.append(self._to_sym.get(i, ""))
        return "".join(parts).replace(_EOW, " ").strip()

    def to_json(self) -> dict:
        return {"kind": self.kind, "alphabet": self.alphabet,
                "merges": [list(m) for m in self.merges]}

    @classmethod
    def from_json(cls, obj: dict) -> "BpeTokenizer":
        return cls(obj["alphabet"], [tuple(m) for m in obj["merges"]])


def tokenizer_from_json(obj: dict):
    if obj["kind"] == "char":
        return CharTokenizer.from_json(obj)
    if obj["kind"] == "bpe":
        return BpeTokenizer.from_json(obj)
    raise ValueError(f"unknown tokenizer kind {obj['kind']!r}")


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

@dataclass
class ModelConfig:
    vocab_size: int
    hidden_dim: int = 512
    embed_dim: int = 768
    n_layers_enc: int = 2
    n_layers_dec: int = 2
    n_heads: int = 8
    max_len: int = 64
    dropout: float = 0.1
    ffn_dim: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.hidden_dim % self.n_heads:
            raise ValueError("hidden_dim must be divisible by n_heads")
        for name in ("vocab_size", "hidden_dim", "embed_dim",
                     "n_layers_enc", "n_layers_dec", "n_heads", "max_len"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)


@dataclass
class TrainSettings:
    learning_rate: float = 1e-5
    batch_size: int = 16
    grad_accum: int = 4
    weight_decay: float = 0.01
    schedule: str = "constant"
    warmup_steps: int = 2000
    total_steps: int = 1000
    seed: int = 0
    val_interval: int = 500

    def __post_init__(self):
        if self.schedule != "constant":
            raise ValueError("only the constant schedule is supported")
        if self.batch_size < 1 or self.grad_accum < 1 or self.total_steps < 0:
            raise ValueError("batch_size/grad_accum must be >= 1, total_steps >= 0")


def _sinusoid(max_len: int, dim: int) -> torch.Tensor:
    pos = torch.arange(max_len, dtype=torch.float32).unsqueeze(1)
    div = torch.exp(torch.arange(0, dim, 2, dtype=torch.float32)
                    * (-math.log(10000.0) / dim))
    pe = torch.zeros(max_len, dim)
    pe[:, 0::2] = torch.sin(pos * div)
    pe[:, 1::2] = torch.cos(pos * div[: (dim + 1) // 2])
    return pe


class ConditionedSeq2Seq(nn.Module):
    """Transformer encoder-decoder with a prepended projected style slot."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        torch.manual_seed(cfg.seed)
        ffn = cfg.ffn_dim or 4 * cfg.hidden_dim
        self.tok_emb = nn.Embedding(cfg.vocab_size, cfg.hidden_dim, padding_idx=PAD)
        self.style_proj = nn.Linear(cfg.embed_dim, cfg.hidden_dim)
        enc_layer = nn.TransformerEncoderLayer(
            cfg.hidden_dim, cfg.n_heads, ffn, cfg.dropout,
            batch_first=True, norm_first=True)
        self.encoder = nn.TransformerEncoder(enc_layer, cfg.n_layers_enc,
                                             enable_nested_tensor=False)
        dec_layer = nn.TransformerDecoderLayer(
            cfg.hidden_dim, cfg.n_heads, ffn, cfg.dropout,
            batch_first=True, norm_first=True)
        self.decoder = nn.TransformerDecoder(dec_layer, cfg.n_layers_dec)
        self.out = nn.Linear(cfg.hidden_dim, cfg.vocab_size)
        self.register_buffer("pos", _sinusoid(cfg.max_len + 2, cfg.hidden_dim))

    def project_and_prepend(self, style: torch.Tensor,
                            token_embeddings: torch.Tensor) -> torch.Tensor:
        """Prepend the projected style vector; token embeddings pass unchanged."""
        if style.shape[-1] != self.cfg.embed_dim:
            raise ValueError(
                f"style dimension {style.shape[-1]} != embed_dim {self.cfg.embed_dim}")
        proj = self.style_proj(style)
        return torch.cat([proj.unsqueeze(-2), token_embeddings], dim=-2)

    def encode(self, src_ids: torch.Tensor, style: torch.Tensor):
        emb = self.tok_emb(src_ids)
        x = self.project_and_prepend(style, emb)
        x = x + self.pos[: x.size(1)]
        pad_col = torch.zeros(src_ids.size(0), 1, dtype=torch.bool,
                              device=src_ids.device)
        mem_mask = torch.cat([pad_col, src_ids == PAD], dim=1)
        return self.encoder(x, src_key_padding_mask=mem_mask), mem_mask

    def decode(self, tgt_in: torch.Tensor, memory: torch.Tensor,
               memory_mask: torch.Tensor) -> torch.Tensor:
        L = tgt_in.size(1)
        emb = self.tok_emb(tgt_in) + self.pos[:L]
        causal = torch.triu(torch.ones(L, L, dtype=torch.bool,
                                       device=tgt_in.device), diagonal=1)
        h = self.decoder(emb, memory, tgt_mask=causal,
                         tgt_key_padding_mask=(tgt_in == PAD),
                         memory_key_padding_mask=memory_mask)
        return self.out(h)

    def forward(self, src_ids, style, tgt_in):
        memory, mem_mask = self.encode(src_ids, style)
        return self.decode(tgt_in, memory, mem_mask)


# --------------------------------------------------------------------------
# checkpoints
# --------------------------------------------------------------------------

@dataclass
class Checkpoint:
    """Model weights plus everything needed to reproduce them."""

    model: ConditionedSeq2Seq
    config: ModelConfig
    tokenizer: CharTokenizer | BpeTokenizer
    step: int = 0
    val_history: list = field(default_factory=list)
    train_log: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @classmethod
    def fresh(cls, config: ModelConfig, tokenizer) -> "Checkpoint":
        if tokenizer.vocab_size != config.vocab_size:
            raise ValueError("config.vocab_size must match the tokenizer")
        return cls(model=ConditionedSeq2Seq(config), config=config,
                   tokenizer=tokenizer, metadata={"stage": "fresh"})

    def model_id(self) -> str:
        h = hashlib.sha256(json.dumps(self.config.to_dict(), sort_keys=True).encode())
        for name, tensor in sorted(self.model.state_dict().items()):
            h.update(name.encode())
            h.update(tensor.detach().cpu().numpy().tobytes())
        return h.hexdigest()[:12]

    def save(self, directory) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        meta = {
            "model": self.config.to_dict(),
            "step": self.step,
            "val_history": self.val_history,
            "metadata": {**self.metadata, "model_id": self.model_id()},
        }
        (directory / "config.json").write_text(
            json.dumps(meta, indent=2, sort_keys=True), encoding="utf-8")
        (directory / "tokenizer.json").write_text(
            json.dumps(self.tokenizer.to_json(), sort_keys=True), encoding="utf-8")
        torch.save(self.model.state_dict(), directory / "weights.pt")
        with (directory / "train_log.jsonl").open("w", encoding="utf-8") as fh:
            for row in self.train_log:
                fh.write(json.dumps(row, sort_keys=True) + "\n")

    @classmethod
    def load(cls, directory) -> "Checkpoint":
        directory = Path(directory)
        meta = json.loads((directory / "config.json").read_text(encoding="utf-8"))
        config = ModelConfig.from_dict(meta["model"])
        tokenizer = tokenizer_from_json(
            json.loads((directory / "tokenizer.json").read_text(encoding="utf-8")))
        model = ConditionedSeq2Seq(config)
        state = torch.load(directory / "weights.pt", map_location="cpu",
                           weights_only=True)
        model.load_state_dict(state)
        train_log = []
        log_path = directory / "train_log.jsonl"
        if log_path.exists():
            with log_path.open(encoding="utf-8") as fh:
                train_log = [json.loads(line) for line in fh if line.strip()]
        return cls(model=model, config=config, tokenizer=tokenizer,
                   step=meta["step"], val_history=[tuple(v) for v in meta["val_history"]],
                   train_log=train_log, metadata=meta["metadata"])


# --------------------------------------------------------------------------
# training
# --------------------------------------------------------------------------

def _encode_examples(ckpt: Checkpoint, examples):
    """Tokenize (input_text, style_values, target_text) triples."""
    cfg = ckpt.config
    enc = []
    for input_text, style_values, target_text in examples:
        style = np.asarray(style_values, dtype=np.float32)
        if style.shape != (cfg.embed_dim,):
            raise ValueError(
                f"style dimension {style.shape} != ({cfg.embed_dim},)")
        src = ckpt.tokenizer.encode(input_text)[: cfg.max_len - 1]
        tgt = [BOS] + ckpt.tokenizer.encode(target_text)[: cfg.max_len - 2] + [EOS]
        enc.append((src, style, tgt))
    return enc


def _collate(batch):
    max_src = max(len(b[0]) for b in batch)
    max_tgt = max(len(b[2]) for b in batch)
    src = torch.full((len(batch), max_src), PAD, dtype=torch.long)
    tgt = torch.full((len(batch), max_tgt), PAD, dtype=torch.long)
    style = torch.zeros(len(batch), batch[0][1].shape[0])
    for i, (s, v, t) in enumerate(batch):
        src[i, : len(s)] = torch.tensor(s, dtype=torch.long)
        tgt[i, : len(t)] = torch.tensor(t, dtype=torch.long)
        style[i] = torch.from_numpy(v)
    return src, style, tgt


def _eval_loss(model, encoded, batch_size) -> float:
    loss_fn = nn.CrossEntropyLoss(ignore_index=PAD, reduction="sum")
    model.eval()
    total, n_tokens = 0.0, 0
    with torch.no_grad():
        for i in range(0, len(encoded), batch_size):
            src, style, tgt = _collate(encoded[i: i + batch_size])
            logits = model(src, style, tgt[:, :-1])
            labels = tgt[:, 1:]
            total += loss_fn(logits.reshape(-1, logits.size(-1)),
                             labels.reshape(-1)).item()
            n_tokens += int((labels != PAD).sum())
    model.train()
    return total / max(1, n_tokens)


def _train_loop(ckpt: Checkpoint, examples, settings: TrainSettings,
                val_examples=None, select_best_val: bool = False,
                stage: str = "recon") -> Checkpoint:
    if not examples:
        raise ValueError("training dataset is empty")
    encoded = _encode_examples(ckpt, examples)
    val_encoded = _encode_examples(ckpt, val_examples) if val_examples else None

    model = copy.deepcopy(ckpt.model)
    model.train()
    torch.manual_seed(settings.seed)
    opt = torch.optim.AdamW(model.parameters(), lr=settings.learning_rate,
                            weight_decay=settings.weight_decay)
    loss_fn = nn.CrossEntropyLoss(ignore_index=PAD)
    rng = np.random.default_rng(settings.seed)

    def batches():
        while True:
            order = rng.permutation(len(encoded))
            for i in range(0, len(order), settings.batch_size):
                idx = order[i: i + settings.batch_size]
                if len(idx):
                    yield [encoded[j] for j in idx]

    stream = batches()
    val_history = list(ckpt.val_history)
    train_log = list(ckpt.train_log)
    best_state, best_loss, best_step = None, math.inf, None

    def run_validation(step):
        nonlocal best_state, best_loss, best_step
        if val_encoded is None:
            return
        vloss = _eval_loss(model, val_encoded, settings.batch_size)
        val_history.append((ckpt.step + step, vloss))
        train_log.append({"step": ckpt.step + step, "val_loss": vloss})
        if select_best_val and vloss < best_loss:
            best_loss, best_step = vloss, ckpt.step + step
            best_state = copy.deepcopy(model.state_dict())

    last_loss = None
    for step in range(1, settings.total_steps + 1):
        lr = settings.learning_rate * min(
            1.0, step / settings.warmup_steps) if settings.warmup_steps else settings.learning_rate
        for group in opt.param_groups:
            group["lr"] = lr
        opt.zero_grad()
        accum_loss = 0.0
        for _ in range(settings.grad_accum):
            src, style, tgt = _collate(next(stream))
            logits = model(src, style, tgt[:, :-1])
            loss = loss_fn(logits.reshape(-1, logits.size(-1)),
                           tgt[:, 1:].reshape(-1))
            if not torch.isfinite(loss):
                raise RuntimeError(
                    f"non-finite loss at step {ckpt.step + step} "
                    f"(lr={lr:g}, batch_size={src.size(0)})")
            (loss / settings.grad_accum).backward()
            accum_loss += loss.item() / settings.grad_accum
        opt.step()
        last_loss = accum_loss
        if step % 50 == 0 or step == settings.total_steps:
            train_log.append({"step": ckpt.step + step, "train_loss": accum_loss})
        if settings.val_interval and step % settings.val_interval == 0:
            run_validation(step)

    if settings.total_steps and (not settings.val_interval
                                 or settings.total_steps % settings.val_interval):
        run_validation(settings.total_steps)
    if select_best_val and best_state is not None:
        model.load_state_dict(best_state)

    metadata = {**ckpt.metadata, "stage": stage,
                "trained_steps": settings.total_steps,
                "final_train_loss": last_loss}
    if best_step is not None:
        metadata["selected_step"] = best_step
        metadata["selected_val_loss"] = best_loss
    return Checkpoint(model=model, config=ckpt.config, tokenizer=ckpt.tokenizer,
                      step=ckpt.step + settings.total_steps,
                      val_history=val_history, train_log=train_log,
                      metadata=metadata)


def train_reconstruction(ckpt: Checkpoint, dataset, settings: TrainSettings,
                         val_dataset=None) -> Checkpoint:
    """Train to reconstruct originals from (paraphrase, style embedding) pairs.

    dataset rows are (paraphrase, StyleEmbedding, original). Deterministic
    for a fixed seed on a single device.
    """
    examples = [(p, e.values if isinstance(e, StyleEmbedding) else e, o)
                for p, e, o in dataset]
    val = None
    if val_dataset:
        val = [(p, e.values if isinstance(e, StyleEmbedding) else e, o)
               for p, e, o in val_dataset]
    return _train_loop(ckpt, examples, settings, val, select_best_val=False,
                       stage="recon")


def fine_tune_distill(ckpt: Checkpoint, pairs, settings: TrainSettings,
                      val_pairs=None) -> Checkpoint:
    """Fine-tune on filtered transfer pairs, conditioning on raw source text.

    Each pair must carry source_text, pooled_target_embedding, output_text.
    The returned checkpoint holds the weights with the lowest validation
    loss when a validation set is given.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("no transfer pairs to fine-tune on")
    to_example = lambda p: (p.source_text, p.pooled_target_embedding.values,
                            p.output_text)
    examples = [to_example(p) for p in pairs]
    val = [to_example(p) for p in val_pairs] if val_pairs else None
    return _train_loop(ckpt, examples, settings, val, select_best_val=True,
                       stage="distilled")


# --------------------------------------------------------------------------
# generation
# --------------------------------------------------------------------------

def nucleus_sample(logits: torch.Tensor, top_p: float, tau: float,
                   generator: torch.Generator) -> int:
    """Sample one token id from the smallest prefix of probability >= top_p.

    The temperature-scaled distribution is sorted descending, truncated at
    the first index whose cumulative mass reaches top_p, renormalized, and
    sampled by inverse CDF.
    """
    if not 0.0 < top_p <= 1.0:
        raise ValueError("top_p must lie in (0, 1]")
    if tau <= 0:
        raise ValueError("tau must be positive")
    probs = torch.softmax(logits.to(torch.float64) / tau, dim=-1)
    sorted_probs, sorted_idx = torch.sort(probs, descending=True)
    csum = torch.cumsum(sorted_probs, dim=-1)
    k = int(torch.searchsorted(csum, torch.tensor(top_p, dtype=torch.float64))) + 1
    k = min(k, sorted_probs.numel())
    kept = sorted_probs[:k]
    cdf = torch.cumsum(kept / kept.sum(), dim=-1)
    u = torch.rand((), generator=generator, dtype=torch.float64)
    pick = int(torch.searchsorted(cdf, u, right=True))
    pick = min(pick, k - 1)
    return int(sorted_idx[pick])


def generate(ckpt: Checkpoint, input_text: str, style: StyleEmbedding,
             top_p: float = 0.80, tau: float = 1.0, n: int = 1, seed: int = 0,
             max_len: int | None = None) -> list[str]:
    """Sample n outputs for one (input text, style embedding) pair.

    Candidate i is a pure function of (seed, i): adding candidates never
    changes earlier ones.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    cfg = ckpt.config
    max_len = max_len or cfg.max_len
    model = ckpt.model
    model.eval()

    src_ids = ckpt.tokenizer.encode(input_text)[: cfg.max_len - 1]
    src = torch.tensor([src_ids], dtype=torch.long)
    style_t = torch.tensor(np.asarray(style.values, dtype=np.float32)).unsqueeze(0)
    with torch.no_grad():
        memory, mem_mask = model.encode(src, style_t)
        memory = memory.expand(n, -1, -1).contiguous()
        mem_mask = mem_mask.expand(n, -1).contiguous()

        gens = [torch.Generator().manual_seed(_mix_seed(seed, i)) for i in range(n)]
        rows: list[list[int]] = [[BOS] for _ in range(n)]
        done = [False] * n
        for _ in range(max_len):
            if all(done):
                break
            width = max(len(r) for r in rows)
            tgt = torch.full((n, width), PAD, dtype=torch.long)
            for i, r in enumerate(rows):
                tgt[i, : len(r)] = torch.tensor(r, dtype=torch.long)
            logits = model.decode(tgt, memory, mem_mask)
            for i in range(n):
                if done[i]:
                    continue
                tok = nucleus_sample(logits[i, len(rows[i]) - 1], top_p, tau, gens[i])
                rows[i].append(tok)
                if tok == EOS:
                    done[i] = True
    return [ckpt.tokenizer.decode(r) for r in rows]


def greedy_decode(ckpt: Checkpoint, input_text: str, style: StyleEmbedding,
                  max_len: int | None = None) -> str:
    """Deterministic argmax decode, used for conditioning probes."""
    cfg = ckpt.config
    max_len = max_len or cfg.max_len
    model = ckpt.model
    model.eval()
    src = torch.tensor([ckpt.tokenizer.encode(input_text)[: cfg.max_len - 1]],
                       dtype=torch.long)
    style_t = torch.tensor(np.asarray(style.values, dtype=np.float32)).unsqueeze(0)
    row = [BOS]
    with torch.no_grad():
        memory, mem_mask = model.encode(src, style_t)
        for _ in range(max_len):
            tgt = torch.tensor([row], dtype=torch.long)
            logits = model.decode(tgt, memory, mem_mask)
            tok = int(torch.argmax(logits[0, -1]))
            row.append(tok)
            if tok == EOS:
                break
    return ckpt.tokenizer.decode(row)
