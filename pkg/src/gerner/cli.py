"""Command line front-end: ``gerner <subcommand> ...``."""
from __future__ import annotations

import argparse
import logging
import os
import sys

from . import adapters, conll
from .embeddings import (EmbedConfig, embedding_meta, save_embeddings, train_embeddings,
                         load_embeddings, read_meta)
from .evaluate import evaluate, read_merged
from .experiment import (check_variant, read_experiment, run_experiment, transform_corpus,
                         write_corpus)
from .normalize import Variant, normalize_stream
from .tagger import TrainConfig, load_model, save_model, tag, train_tagger

log = logging.getLogger("gerner")


def _columns(text: str) -> list[str]:
    return [c.strip() for c in text.split(",")]


def cmd_convert(args):
    src, _, dst = args.scheme.partition(":")
    if (src, dst) != ("iob1", "bio"):
        raise SystemExit(f"unsupported conversion {args.scheme!r} (only iob1:bio)")
    corpus = conll.read_conll(args.input, args.columns)
    out = conll.Corpus([s.with_tags(conll.iob1_to_bio(s.tags)) for s in corpus.sentences])
    with open(args.output, "w", encoding="utf-8") as fh:
        conll.write_conll(out, args.columns, fh)


def cmd_adapt(args):
    data = adapters.adapt_manifest(adapters.read_manifest(args.manifest))
    os.makedirs(args.out_dir, exist_ok=True)
    for part in ("train", "dev", "test"):
        parts = getattr(data, part)
        if parts:
            merged = adapters.merge_datasets(parts)
            write_corpus(merged, os.path.join(args.out_dir, f"{part}.conll"))
            print(f"{part}: {len(merged)} sentences")


def cmd_split(args):
    corpus = conll.read_conll(args.input, args.columns)
    parts = adapters.split_dataset(corpus, adapters.SplitSpec.parse(args.ratio))
    for name, part in zip(("train", "dev", "test"), parts):
        with open(f"{args.prefix}.{name}.conll", "w", encoding="utf-8") as fh:
            conll.write_conll(part, args.columns, fh)
        print(f"{name}: {len(part)} sentences")


def cmd_merge(args):
    parts = []
    for item in args.inputs:
        path, _, label = item.partition("=")
        parts.append((conll.read_conll(path, args.columns), label or os.path.basename(path)))
    merged = adapters.merge_datasets(parts)
    with open(args.output, "w", encoding="utf-8") as fh:
        conll.write_conll(merged, args.columns, fh)
    print(f"merged: {len(merged)} sentences")


def cmd_normalize(args):
    with open(args.input, "rb") as src, open(args.output, "w", encoding="utf-8") as dst:
        for line in normalize_stream(src, args.mode, args.variant):
            dst.write(line + "\n")


def cmd_embed(args):
    cfg = EmbedConfig(dim=args.dim, window=args.window, min_count=args.min_count,
                      negatives=args.negatives, epochs=args.epochs, initial_lr=args.lr,
                      mode=args.mode, seed=args.seed, workers=args.workers)
    table = train_embeddings(args.corpus, cfg)
    save_embeddings(table, args.output, embedding_meta(cfg, args.variant, args.corpus))
    print(f"vocabulary: {len(table.vocab)} tokens, dim {table.dim}, banks {table.n_banks}")


def cmd_train(args):
    variant = Variant(args.variant) if args.variant else None
    train = transform_corpus(conll.read_conll(args.train, args.columns), variant)
    dev = transform_corpus(conll.read_conll(args.dev, args.columns), variant) if args.dev else None
    emb = None
    if args.embeddings:
        if variant is not None:
            check_variant(read_meta(args.embeddings), variant, args.embeddings)
        emb = load_embeddings(args.embeddings)
    cfg = TrainConfig(epochs=args.epochs, dropout=args.dropout, lr=args.lr, seed=args.seed,
                      char_dim=args.char_dim, word_dim=args.word_dim, hidden_dim=args.hidden_dim,
                      cap_feature=args.cap_feature, update_embeddings=not args.freeze_embeddings)
    params = train_tagger(train, dev, emb, cfg, progress=sys.stdout)
    params.config["variant"] = args.variant
    params.config["columns"] = args.columns
    save_model(params, args.model)


def cmd_tag(args):
    params = load_model(args.model)
    columns = args.columns or params.config.get("columns") or ["form", "ne"]
    if "ne" not in columns:
        columns = list(columns) + ["ne"]
    corpus = conll.read_conll(args.input, columns)
    shown = transform_corpus(corpus, params.config.get("variant"))
    out = conll.Corpus([orig.with_tags(tag(s, params))
                        for orig, s in zip(corpus.sentences, shown.sentences)])
    with open(args.output, "w", encoding="utf-8") as fh:
        conll.write_conll(out, columns, fh)


def cmd_eval(args):
    if args.merged:
        with open(args.merged, "rb") as fh:
            pred, gold = read_merged(fh)
    else:
        if not (args.pred and args.gold):
            raise SystemExit("eval needs --merged FILE or PRED GOLD")
        pred = conll.read_conll(args.pred, args.columns)
        gold = conll.read_conll(args.gold, args.columns)
    sys.stdout.write(evaluate(pred, gold).format())


def cmd_experiment(args):
    spec = read_experiment(args.spec)
    if args.seeds:
        spec.seeds = [int(s) for s in args.seeds.split(",")]
    if args.jobs:
        spec.jobs = args.jobs
    if args.output:
        spec.output = args.output
    aggregates = run_experiment(spec)
    for name, agg in aggregates.items():
        print(f"{name}: {agg.format()}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gerner", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", metavar="command")
    cols = dict(type=_columns, default=["form", "ne"],
                help="comma-separated column roles (form, lemma, pos, ne, _)")

    s = sub.add_parser("convert", help="convert a tag scheme")
    s.add_argument("--scheme", required=True, help="e.g. iob1:bio")
    s.add_argument("--columns", **cols)
    s.add_argument("input")
    s.add_argument("output")
    s.set_defaults(func=cmd_convert)

    s = sub.add_parser("adapt", help="harmonize the datasets of a manifest")
    s.add_argument("manifest")
    s.add_argument("out_dir")
    s.set_defaults(func=cmd_adapt)

    s = sub.add_parser("split", help="contiguous train/dev/test split")
    s.add_argument("--ratio", default="80/10/10")
    s.add_argument("--columns", **cols)
    s.add_argument("input")
    s.add_argument("prefix")
    s.set_defaults(func=cmd_split)

    s = sub.add_parser("merge", help="concatenate harmonized corpora")
    s.add_argument("--columns", **cols)
    s.add_argument("output")
    s.add_argument("inputs", nargs="+", metavar="PATH[=LABEL]")
    s.set_defaults(func=cmd_merge)

    s = sub.add_parser("normalize", help="build an embedding corpus variant")
    s.add_argument("--mode", choices=("raw", "annotated"), default="raw")
    s.add_argument("--variant", choices=[v.value for v in Variant], default="lower")
    s.add_argument("input")
    s.add_argument("output")
    s.set_defaults(func=cmd_normalize)

    s = sub.add_parser("embed", help="train skip-gram embeddings")
    s.add_argument("--dim", type=int, default=100)
    s.add_argument("--window", type=int, default=8)
    s.add_argument("--min-count", type=int, default=4)
    s.add_argument("--negatives", type=int, default=5)
    s.add_argument("--epochs", type=int, default=5)
    s.add_argument("--lr", type=float, default=0.025)
    s.add_argument("--mode", choices=("skipgram", "structured"), default="structured")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--variant", choices=[v.value for v in Variant], default="lower",
                   help="variant the corpus was normalized with (recorded in the sidecar)")
    s.add_argument("corpus")
    s.add_argument("output")
    s.set_defaults(func=cmd_embed)

    s = sub.add_parser("train", help="train the biLSTM-CRF tagger")
    s.add_argument("--train", required=True)
    s.add_argument("--dev")
    s.add_argument("--embeddings")
    s.add_argument("--model", required=True)
    s.add_argument("--columns", **cols)
    s.add_argument("--variant", choices=[v.value for v in Variant])
    s.add_argument("--epochs", type=int, default=100)
    s.add_argument("--dropout", type=float, default=0.5)
    s.add_argument("--lr", type=float, default=0.005)
    s.add_argument("--char-dim", type=int, default=25)
    s.add_argument("--word-dim", type=int, default=100)
    s.add_argument("--hidden-dim", type=int, default=25)
    s.add_argument("--cap-feature", action="store_true")
    s.add_argument("--freeze-embeddings", action="store_true")
    s.add_argument("--seed", type=int, default=1)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("tag", help="tag a CoNLL file")
    s.add_argument("--model", required=True)
    s.add_argument("--columns", type=_columns)
    s.add_argument("input")
    s.add_argument("output")
    s.set_defaults(func=cmd_tag)

    s = sub.add_parser("eval", help="entity-level precision/recall/F1")
    s.add_argument("--merged", help="file whose last two columns are gold and predicted tags")
    s.add_argument("--columns", **cols)
    s.add_argument("pred", nargs="?")
    s.add_argument("gold", nargs="?")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("experiment", help="run a multi-seed experiment from an INI spec")
    s.add_argument("spec")
    s.add_argument("--seeds", help="comma-separated seeds overriding the spec")
    s.add_argument("--jobs", type=int)
    s.add_argument("--output", help="output directory overriding the spec")
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (ValueError, OSError) as exc:
        print(f"gerner {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
