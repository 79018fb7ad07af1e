"""Multi-seed experiment runner: adapt datasets, apply the token variant,
obtain embeddings, train one tagger per seed, score every test set."""
from __future__ import annotations

import configparser
import csv
import io
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

from .adapters import adapt_manifest, merge_datasets, read_manifest
from .conll import Corpus, Sentence, Token, write_conll
from .embeddings import (EmbedConfig, embedding_meta, load_embeddings, read_meta,
                         save_embeddings, train_embeddings)
from .evaluate import EvalReport, aggregate_runs, evaluate
from .normalize import AnnotatedToken, Variant, apply_variant, normalize_stream
from .tagger import TrainConfig, save_model, tag, train_tagger

log = logging.getLogger(__name__)


class ExperimentError(ValueError):
    pass


def transform_corpus(corpus: Corpus, variant: Variant | str | None) -> Corpus:
    """Replace every form by its variant rendering; tags are untouched."""
    if variant is None:
        return corpus
    out = []
    for sent in corpus.sentences:
        toks = [AnnotatedToken(t.form, t.lemma, t.pos) for t in sent.tokens]
        forms = apply_variant(toks, variant)
        out.append(Sentence(tuple(Token(f, t.ne_tag, t.lemma, t.pos)
                                  for f, t in zip(forms, sent.tokens))))
    return Corpus(out, corpus.provenance)


def check_variant(meta: dict | None, variant: Variant, path) -> None:
    if meta is None:
        log.warning("%s has no metadata sidecar; variant consistency not checked", path)
        return
    if meta.get("variant") != variant.value:
        raise ExperimentError(f"embeddings {path} were built for variant {meta.get('variant')!r}, "
                              f"experiment uses {variant.value!r}")


@dataclass
class ExperimentSpec:
    manifest: str
    variant: Variant
    output: str
    seeds: list[int] = field(default_factory=lambda: [1, 2, 3, 4, 5, 6])
    jobs: int = 1
    embeddings_path: str | None = None
    embed_corpus: str | None = None
    embed_input: str = "annotated"
    embed_config: EmbedConfig | None = None
    tagger: TrainConfig = field(default_factory=TrainConfig)
    name: str = "experiment"

    @property
    def embeddings_label(self) -> str:
        if self.embeddings_path:
            return os.path.basename(self.embeddings_path)
        if self.embed_corpus:
            return os.path.basename(self.embed_corpus)
        return "random"

    @property
    def features_label(self) -> str:
        return self.variant.value + ("+cap" if self.tagger.cap_feature else "")


def _typed(cls, section, exclude=()):
    kwargs = {}
    for f in fields(cls):
        key = f.name
        if key in exclude or key not in section:
            continue
        raw = section[key]
        default = f.default
        if isinstance(default, bool):
            kwargs[key] = section.getboolean(key)
        elif isinstance(default, int):
            kwargs[key] = int(raw)
        elif isinstance(default, float):
            kwargs[key] = float(raw)
        elif key == "word_hidden":
            kwargs[key] = int(raw)
        else:
            kwargs[key] = raw
    return kwargs


def read_experiment(path) -> ExperimentSpec:
    """Parse an experiment INI file ([experiment], [embeddings], [tagger])."""
    cp = configparser.ConfigParser(interpolation=None)
    with open(path, encoding="utf-8") as fh:
        cp.read_file(fh)
    if "experiment" not in cp:
        raise ExperimentError(f"{path}: missing [experiment] section")
    base = os.path.dirname(os.path.abspath(path))
    rel = lambda p: p if os.path.isabs(p) else os.path.join(base, p)
    ex = cp["experiment"]
    for key in ("manifest", "variant", "output"):
        if key not in ex:
            raise ExperimentError(f"{path}: [experiment] needs {key!r}")
    spec = ExperimentSpec(manifest=rel(ex["manifest"]), variant=Variant(ex["variant"]),
                          output=rel(ex["output"]), jobs=ex.getint("jobs", 1),
                          name=ex.get("name", os.path.splitext(os.path.basename(path))[0]))
    if "seeds" in ex:
        spec.seeds = [int(s) for s in ex["seeds"].replace(",", " ").split()]
    if "embeddings" in cp:
        em = cp["embeddings"]
        if "path" in em:
            spec.embeddings_path = rel(em["path"])
        elif "corpus" in em:
            spec.embed_corpus = rel(em["corpus"])
            spec.embed_input = em.get("input", "annotated")
            spec.embed_config = EmbedConfig(**_typed(EmbedConfig, em))
        else:
            raise ExperimentError(f"{path}: [embeddings] needs 'path' or 'corpus'")
    if "tagger" in cp:
        spec.tagger = TrainConfig(**_typed(TrainConfig, cp["tagger"], exclude=("seed",)))
    if spec.embed_config is not None and spec.embed_config.dim != spec.tagger.word_dim:
        raise ExperimentError("embedding dim and tagger word_dim differ")
    return spec


def _prepare_embeddings(spec: ExperimentSpec):
    if spec.embeddings_path:
        check_variant(read_meta(spec.embeddings_path), spec.variant, spec.embeddings_path)
        return load_embeddings(spec.embeddings_path)
    if spec.embed_corpus is None:
        return None
    norm_path = os.path.join(spec.output, "embedding_corpus.txt")
    with open(spec.embed_corpus, "rb") as src, open(norm_path, "w", encoding="utf-8") as dst:
        for line in normalize_stream(src, spec.embed_input, spec.variant):
            dst.write(line + "\n")
    table = train_embeddings(norm_path, spec.embed_config)
    out = os.path.join(spec.output, "embeddings.txt")
    save_embeddings(table, out, embedding_meta(spec.embed_config, spec.variant.value, norm_path))
    return load_embeddings(out)


def _run_seed(args):
    seed, train, dev, tests, embeddings, config, variant, outdir = args
    os.makedirs(outdir, exist_ok=True)
    cfg = TrainConfig(**{**config.to_dict(), "seed": seed})
    with open(os.path.join(outdir, "train.log"), "w", encoding="utf-8") as logf:
        params = train_tagger(train, dev, embeddings, cfg, progress=logf)
    params.config["variant"] = variant
    save_model(params, os.path.join(outdir, "model.bin"))
    reports = {}
    for name, gold in tests.items():
        pred = Corpus([s.with_tags(tag(s, params)) for s in gold.sentences])
        rep = evaluate(pred, gold)
        reports[name] = rep
        with open(os.path.join(outdir, f"eval_{name}.txt"), "w", encoding="utf-8") as fh:
            fh.write(rep.format())
    return seed, reports


def run_experiment(spec: ExperimentSpec) -> dict:
    """Run every seed; returns ``{test_name: RunAggregate}`` and writes reports."""
    os.makedirs(spec.output, exist_ok=True)
    data = adapt_manifest(read_manifest(spec.manifest))
    if not data.train:
        raise ExperimentError("manifest provides no training data")
    train = transform_corpus(merge_datasets(data.train), spec.variant)
    dev = transform_corpus(merge_datasets(data.dev), spec.variant) if data.dev else None
    tests = {name: transform_corpus(c, spec.variant) for c, name in data.test}
    if len(tests) > 1:
        tests["all"] = transform_corpus(merge_datasets(data.test), spec.variant)
    embeddings = _prepare_embeddings(spec)

    jobs = [(seed, train, dev, tests, embeddings, spec.tagger, spec.variant.value,
             os.path.join(spec.output, f"seed{seed}")) for seed in spec.seeds]
    if spec.jobs > 1:
        with ProcessPoolExecutor(spec.jobs) as pool:
            results = list(pool.map(_run_seed, jobs))
    else:
        results = [_run_seed(j) for j in jobs]

    per_test: dict[str, list[EvalReport]] = {name: [] for name in tests}
    for _, reports in sorted(results, key=lambda r: r[0]):
        for name, rep in reports.items():
            per_test[name].append(rep)
    aggregates = {name: aggregate_runs(reps) for name, reps in per_test.items() if reps}
    _write_reports(spec, aggregates)
    return aggregates


def _write_reports(spec: ExperimentSpec, aggregates: dict):
    with open(os.path.join(spec.output, "aggregate.txt"), "w", encoding="utf-8") as fh:
        for name, agg in aggregates.items():
            fh.write(f"{name}: {agg.format()} seeds={','.join(map(str, spec.seeds))}\n")
    rows = [(name, spec.embeddings_label, spec.features_label, agg.mean, agg.stdev, agg.max)
            for name, agg in aggregates.items()]
    with open(os.path.join(spec.output, "scores.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["data", "embeddings", "features", "f1_mean", "f1_stdev", "f1_max"])
        for r in rows:
            w.writerow([r[0], r[1], r[2], f"{r[3]:.2f}", f"{r[4]:.2f}", f"{r[5]:.2f}"])
    with open(os.path.join(spec.output, "scores.txt"), "w", encoding="utf-8") as fh:
        fh.write(format_table(rows))


def format_table(rows) -> str:
    header = ("Data", "Embeddings", "Features", "F-score", "Stdev", "Max")
    cells = [header] + [(r[0], r[1], r[2], f"{r[3]:.2f}", f"{r[4]:.2f}", f"{r[5]:.2f}") for r in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(len(header))]
    buf = io.StringIO()
    for c in cells:
        buf.write("  ".join(v.ljust(w) for v, w in zip(c, widths)).rstrip() + "\n")
    return buf.getvalue()


def write_corpus(corpus: Corpus, path):
    cols = ["form"]
    toks = [t for s in corpus.sentences for t in s.tokens]
    if toks and all(t.lemma is not None for t in toks):
        cols.append("lemma")
    if toks and all(t.pos is not None for t in toks):
        cols.append("pos")
    cols.append("ne")
    with open(path, "w", encoding="utf-8") as fh:
        write_conll(corpus, cols, fh)
    return cols
