"""Command-line entry point: one subcommand per pipeline stage.

Every subcommand is a thin shell over the library; running the library
functions with the same config reproduces CLI outputs byte for byte.
Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import corpus as corpus_mod
from .config import PipelineConfig
from .evalharness import (EvalSplit, LogisticStyleClassifier,
                          evaluate_attribute, evaluate_authorship,
                          interpolation_sweep, make_two_style_eval_split,
                          timing_report)
from .model import (BpeTokenizer, CharTokenizer, Checkpoint,
                    train_reconstruction)
from .pipeline import (TransferSystem, build_recon_dataset,
                       generate_pair_dataset, load_pairs_jsonl,
                       save_pairs_jsonl, self_distill)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise _UsageError(message)


def _read_texts(path) -> list[str]:
    """Texts from a JSONL file (objects with "text" or bare strings)."""
    texts = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if path and str(path).endswith(".jsonl"):
                obj = json.loads(line)
                texts.append(obj if isinstance(obj, str) else obj["text"])
            else:
                texts.append(line)
    if not texts:
        raise ValueError(f"no texts in {path}")
    return texts


def _load_config(args) -> PipelineConfig:
    cfg = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    if args.seed is not None:
        cfg.seed = args.seed
        cfg.gen = replace(cfg.gen, seed=args.seed)
        cfg.paraphrase = replace(cfg.paraphrase, seed=args.seed)
        cfg.train = replace(cfg.train, seed=args.seed)
    return cfg


def _build_parser() -> _Parser:
    parser = _Parser(prog="restyle",
                     description="embedding-conditioned text restyling pipeline")
    sub = parser.add_subparsers(dest="command")

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="pipeline config file (JSON or TOML)")
        p.add_argument("--seed", type=int, help="override the config seed")
        return p

    p = add("prepare-corpus", "load, per-author sample, and split a corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--outdir", required=True)

    p = add("build-recon-data", "emit (paraphrase, original) training rows")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)

    p = add("train-recon", "train the reconstruction model")
    p.add_argument("--data", required=True)
    p.add_argument("--val-data")
    p.add_argument("--outdir", required=True)

    p = add("gen-pairs", "generate, rerank, and filter transfer pairs")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--n-pairs", type=int, required=True)
    p.add_argument("--out", required=True)

    p = add("distill", "self-distill on a filtered pair dataset")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--outdir", required=True)
    p.add_argument("--val-frac", type=float, default=0.1)

    p = add("transfer", "restyle one text toward exemplars")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--text", required=True)
    p.add_argument("--exemplars", required=True)
    p.add_argument("--rerank-k", type=int)
    p.add_argument("--lam", type=float)

    p = add("evaluate", "run an evaluation protocol")
    p.add_argument("protocol", choices=["authorship", "attribute"])
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--corpus", help="evaluation corpus (authorship)")
    p.add_argument("--toy", action="store_true",
                   help="use the synthetic two-style evaluation split")
    p.add_argument("--formal", help="formal text file (attribute)")
    p.add_argument("--informal", help="informal text file (attribute)")
    p.add_argument("--max-texts", type=int)
    p.add_argument("--out")

    p = add("sweep", "interpolation sweep over a lam grid")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--inputs", required=True)
    p.add_argument("--exemplars", required=True)
    p.add_argument("--grid", default="0,0.25,0.5,0.75,1.0")
    p.add_argument("--out")

    p = add("timing", "wall-clock statistics over repeated transfers")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--inputs", required=True)
    p.add_argument("--exemplars", required=True)
    p.add_argument("--device-note", default="cpu")

    p = add("serve", "run the local HTTP inference service")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--bind")

    return parser


def _system(cfg: PipelineConfig, checkpoint_path) -> TransferSystem:
    ckpt = Checkpoint.load(checkpoint_path)
    return TransferSystem(ckpt, cfg.build_embedder(), rerank_k=cfg.rerank_k,
                          lam=cfg.lam, top_p=cfg.gen.top_p, tau=cfg.gen.tau,
                          seed=cfg.seed)


def _cmd_prepare_corpus(cfg, args):
    loaded = corpus_mod.load_corpus(args.input)
    sampled = corpus_mod.sample_author_texts(
        loaded, cfg.corpus.per_author, cfg.corpus.max_tokens, cfg.seed)
    train, val, test = corpus_mod.split_by_author(
        sampled, cfg.corpus.fractions, cfg.seed)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for name, part in (("train", train), ("val", val), ("test", test)):
        corpus_mod.save_corpus(part, outdir / f"{name}.jsonl")
    report = loaded.load_report
    (outdir / "manifest.json").write_text(json.dumps({
        "config_hash": cfg.config_hash(),
        "tokenizer_id": loaded.tokenizer_id,
        "malformed": report.malformed if report else 0,
        "duplicates": report.duplicates if report else 0,
        "authors": {"train": train.n_authors, "val": val.n_authors,
                    "test": test.n_authors},
    }, indent=2, sort_keys=True), encoding="utf-8")
    print(f"wrote splits to {outdir} "
          f"({train.n_authors}/{val.n_authors}/{test.n_authors} authors)")
    return 0


def _cmd_build_recon_data(cfg, args):
    part = corpus_mod.load_corpus(args.corpus).with_split("train")
    embedder = cfg.build_embedder()
    dataset = build_recon_dataset(part, embedder, cfg.paraphrase)
    with Path(args.out).open("w", encoding="utf-8") as fh:
        for para, _emb, orig in dataset:
            fh.write(json.dumps({
                "paraphrase": para, "original": orig,
                "embedder_id": embedder.embedder_id,
                "config_hash": cfg.config_hash(),
            }, sort_keys=True, ensure_ascii=False) + "\n")
    print(f"wrote {len(dataset)} rows to {args.out}")
    return 0


def _load_recon_rows(path, embedder):
    rows = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                rows.append((obj["paraphrase"],
                             embedder.embed(obj["original"]),
                             obj["original"]))
    return rows


def _cmd_train_recon(cfg, args):
    embedder = cfg.build_embedder()
    data = _load_recon_rows(args.data, embedder)
    val = _load_recon_rows(args.val_data, embedder) if args.val_data else None
    texts = [orig for _, _, orig in data] + [p for p, _, _ in data]
    if cfg.tokenizer.kind == "char":
        tok = CharTokenizer.train(texts)
    else:
        tok = BpeTokenizer.train(texts, vocab_size=cfg.tokenizer.vocab_size)
    model_cfg = replace(cfg.model, vocab_size=tok.vocab_size)
    ckpt = Checkpoint.fresh(model_cfg, tok)
    trained = train_reconstruction(ckpt, data, cfg.train, val_dataset=val)
    trained.metadata["config_hash"] = cfg.config_hash()
    trained.save(args.outdir)
    print(f"saved reconstruction checkpoint to {args.outdir} "
          f"(steps={trained.step}, model_id={trained.model_id()})")
    return 0


def _cmd_gen_pairs(cfg, args):
    ckpt = Checkpoint.load(args.checkpoint)
    part = corpus_mod.load_corpus(args.corpus)
    embedder = cfg.build_embedder()
    result = generate_pair_dataset(
        ckpt, part, args.n_pairs, cfg.gen, cfg.filter, cfg.seed, embedder,
        paraphrase_settings=cfg.paraphrase)
    save_pairs_jsonl(result.pairs, args.out)
    stats_path = Path(args.out).with_suffix(".stats.json")
    stats_path.write_text(json.dumps(
        {**result.stats.to_dict(), "config_hash": cfg.config_hash()},
        indent=2, sort_keys=True), encoding="utf-8")
    print(f"kept {len(result.pairs)}/{args.n_pairs} pairs -> {args.out}")
    return 0


def _cmd_distill(cfg, args):
    ckpt = Checkpoint.load(args.checkpoint)
    pairs = load_pairs_jsonl(args.pairs, cfg.build_embedder())
    n_val = max(1, int(len(pairs) * args.val_frac)) if len(pairs) > 1 else 0
    val_pairs = pairs[:n_val] or None
    train_pairs = pairs[n_val:] or pairs
    distilled = self_distill(ckpt, train_pairs, cfg.train, val_pairs=val_pairs)
    distilled.metadata["config_hash"] = cfg.config_hash()
    distilled.save(args.outdir)
    print(f"saved distilled checkpoint to {args.outdir} "
          f"(model_id={distilled.model_id()})")
    return 0


def _cmd_transfer(cfg, args):
    system = _system(cfg, args.checkpoint)
    exemplars = _read_texts(args.exemplars)
    overrides = {}
    if args.rerank_k is not None:
        overrides["rerank_k"] = args.rerank_k
    if args.lam is not None:
        overrides["lam"] = args.lam
    result = system.transfer(args.text, exemplars, **overrides)
    for cand in result.candidates:
        print(json.dumps({"rank": cand.rank, "text": cand.text,
                          "scores": cand.scores.to_dict()},
                         sort_keys=True, ensure_ascii=False))
    return 0


def _cmd_evaluate(cfg, args):
    system = _system(cfg, args.checkpoint)
    if args.protocol == "authorship":
        if args.toy:
            split = make_two_style_eval_split(
                cfg.eval.n_source_authors, cfg.eval.n_target_authors,
                cfg.eval.texts_per_author, seed=cfg.seed + 1)
        elif args.corpus:
            part = corpus_mod.load_corpus(args.corpus)
            authors = part.author_ids
            half = len(authors) // 2
            split = EvalSplit(name="custom", corpus=part,
                              source_authors=authors[:half],
                              target_authors=authors[half:],
                              texts_per_author=cfg.eval.texts_per_author)
        else:
            raise ValueError("authorship evaluation needs --corpus or --toy")
        report = evaluate_authorship(system, split, cfg.build_eval_embedder(),
                                     max_texts_per_direction=args.max_texts,
                                     seed=cfg.seed)
    else:
        if not (args.formal and args.informal):
            raise ValueError("attribute evaluation needs --formal and --informal")
        formal = _read_texts(args.formal)
        informal = _read_texts(args.informal)
        heldout = LogisticStyleClassifier(
            embedder=cfg.build_eval_embedder()).fit(
                formal + informal, [1] * len(formal) + [0] * len(informal))
        report = evaluate_attribute(system, formal, informal, heldout.predict,
                                    num_examples=cfg.eval.num_examples,
                                    seed=cfg.seed,
                                    max_eval_per_direction=args.max_texts)
    print(report.markdown_table())
    if args.out:
        Path(args.out).write_text(report.to_json(), encoding="utf-8")
        print(f"wrote report to {args.out}")
    return 0


def _cmd_sweep(cfg, args):
    system = _system(cfg, args.checkpoint)
    grid = [float(x) for x in args.grid.split(",") if x.strip()]
    inputs = _read_texts(args.inputs)
    exemplars = _read_texts(args.exemplars)
    table = interpolation_sweep(system, inputs, exemplars, grid,
                                eval_embedder=cfg.build_eval_embedder(),
                                seed=cfg.seed)
    csv_text = table.to_csv()
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8")
        print(f"wrote sweep to {args.out}")
    else:
        print(csv_text, end="")
    return 0


def _cmd_timing(cfg, args):
    system = _system(cfg, args.checkpoint)
    inputs = _read_texts(args.inputs)
    exemplars = _read_texts(args.exemplars)
    report = timing_report(lambda text: system(text, exemplars),
                           inputs, args.device_note)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0


def _cmd_serve(cfg, args):
    from .service import serve
    serve(cfg, args.checkpoint, bind_address=args.bind)
    return 0


_HANDLERS = {
    "prepare-corpus": _cmd_prepare_corpus,
    "build-recon-data": _cmd_build_recon_data,
    "train-recon": _cmd_train_recon,
    "gen-pairs": _cmd_gen_pairs,
    "distill": _cmd_distill,
    "transfer": _cmd_transfer,
    "evaluate": _cmd_evaluate,
    "sweep": _cmd_sweep,
    "timing": _cmd_timing,
    "serve": _cmd_serve,
}


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return 1
    if not args.command:
        parser.print_usage(sys.stderr)
        return 1
    try:
        cfg = _load_config(args)
        return _HANDLERS[args.command](cfg, args)
    except KeyboardInterrupt:
        return 2
    except Exception as exc:  # any runtime failure maps to exit 2
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:  # console_scripts entry point
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
