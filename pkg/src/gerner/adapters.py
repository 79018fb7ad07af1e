"""Per-dataset harmonization: nested-entity policies, label mapping,
train/dev/test splitting and merging into one training corpus.

Sources are described in an INI manifest, one section per source::

    [tuebadz]
    path = tuebadz.conll
    columns = _, form, _, ne, ne2
    scheme = iob1
    nested = longest
    mapping = GPE:LOC, OTH:MISC
    role = split:80/10/10
"""
from __future__ import annotations

import configparser
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .conll import (ConllError, Corpus, EntitySpan, Sentence, Token, bio_to_spans,
                    iob1_to_bio, iter_rows, spans_to_bio, split_tag, validate_bio)

HARMONIZED = frozenset({"PER", "LOC", "ORG", "MISC"})
DOCSTART = "-DOCSTART-"


class AdapterError(ValueError):
    pass


@dataclass
class LayeredAnnotation:
    sentence: Sentence
    layers: list[list[EntitySpan]]


@dataclass(frozen=True)
class SplitSpec:
    train: float = 0.8
    dev: float = 0.1
    test: float = 0.1

    def __post_init__(self):
        for r in (self.train, self.dev, self.test):
            if not 0 < r < 1:
                raise AdapterError(f"split fraction {r} not in (0, 1)")
        if not math.isclose(self.train + self.dev + self.test, 1.0, abs_tol=1e-9):
            raise AdapterError("split fractions must sum to 1")

    @classmethod
    def parse(cls, text: str) -> "SplitSpec":
        """``"80/10/10"`` -> SplitSpec(0.8, 0.1, 0.1)."""
        parts = [float(p) for p in text.split("/")]
        if len(parts) != 3:
            raise AdapterError(f"bad split ratio {text!r}")
        total = sum(parts)
        return cls(*(p / total for p in parts))


def _check_layer(layer: Sequence[EntitySpan], k: int):
    ordered = sorted(layer)
    for a, b in zip(ordered, ordered[1:]):
        if b.start <= a.end:
            raise AdapterError(f"overlapping spans {tuple(a)} and {tuple(b)} in layer {k}")


def filter_nested_longest(ann: LayeredAnnotation) -> list[EntitySpan]:
    """Keep, for every covered token, the longest span covering it.

    Candidates are visited longest first; equal lengths prefer the outer
    layer, then the leftmost start.  A candidate is kept if it does not
    overlap anything already kept.
    """
    candidates = []
    for k, layer in enumerate(ann.layers):
        _check_layer(layer, k)
        for span in layer:
            candidates.append((-(span.end - span.start + 1), k, span.start, span))
    candidates.sort(key=lambda c: c[:3])
    kept: list[EntitySpan] = []
    for *_, span in candidates:
        if all(span.end < s.start or s.end < span.start for s in kept):
            kept.append(span)
    return sorted(kept)


def select_top_level(ann: LayeredAnnotation) -> list[EntitySpan]:
    if not ann.layers:
        raise AdapterError("annotation has no layers")
    _check_layer(ann.layers[0], 0)
    return sorted(ann.layers[0])


def map_labels(corpus: Corpus, mapping: dict[str, str]) -> Corpus:
    def remap(tag: str) -> str:
        prefix, cat = split_tag(tag)
        if cat is None:
            return tag
        try:
            return f"{prefix}-{mapping[cat]}"
        except KeyError:
            raise AdapterError(f"no mapping for category {cat!r}") from None

    sents = [s.with_tags([remap(t) for t in s.tags]) for s in corpus.sentences]
    return Corpus(sents, corpus.provenance)


def split_sizes(n: int, spec: SplitSpec) -> tuple[int, int, int]:
    test = math.floor(n * spec.test + 1e-9)
    dev = math.floor(n * spec.dev + 1e-9)
    return n - dev - test, dev, test


def split_dataset(corpus: Corpus, spec: SplitSpec = SplitSpec()) -> tuple[Corpus, Corpus, Corpus]:
    """Contiguous order-preserving train/dev/test split."""
    n = len(corpus)
    if n == 0:
        raise AdapterError("cannot split an empty corpus")
    n_train, n_dev, n_test = split_sizes(n, spec)
    if min(n_train, n_dev, n_test) <= 0:
        raise AdapterError(f"split of {n} sentences leaves an empty part "
                           f"({n_train}/{n_dev}/{n_test})")
    cuts = [0, n_train, n_train + n_dev, n]
    prov = corpus.provenance
    return tuple(Corpus(corpus.sentences[a:b], None if prov is None else prov[a:b])
                 for a, b in zip(cuts, cuts[1:]))


def check_harmonized(corpus: Corpus, label: str = "corpus"):
    for i, sent in enumerate(corpus.sentences):
        tags = sent.tags
        if validate_bio(tags):
            raise AdapterError(f"{label}: sentence {i} is not valid BIO")
        for span in bio_to_spans(tags):
            if span.category not in HARMONIZED:
                raise AdapterError(f"{label}: sentence {i} has unharmonized category "
                                   f"{span.category!r}")


def merge_datasets(parts: Iterable[tuple[Corpus, str]]) -> Corpus:
    sentences: list[Sentence] = []
    provenance: list[str | None] = []
    for corpus, label in parts:
        check_harmonized(corpus, label)
        sentences.extend(corpus.sentences)
        provenance.extend([label] * len(corpus))
    return Corpus(sentences, provenance)


# --------------------------------------------------------------------------
# manifest-driven adaptation

@dataclass
class SourceConfig:
    name: str
    path: str
    columns: list[str]
    scheme: str = "bio"
    nested: str = "none"
    mapping: dict[str, str] = field(default_factory=dict)
    role: str = "train"

    @property
    def split(self) -> SplitSpec | None:
        if self.role.startswith("split:"):
            return SplitSpec.parse(self.role[len("split:"):])
        return None


def parse_mapping(text: str) -> dict[str, str]:
    mapping = {}
    for pair in filter(None, (p.strip() for p in text.split(","))):
        src, sep, dst = pair.partition(":")
        if not sep or not src.strip() or not dst.strip():
            raise AdapterError(f"bad mapping entry {pair!r}")
        mapping[src.strip()] = dst.strip()
    return mapping


def read_manifest(path) -> list[SourceConfig]:
    cp = configparser.ConfigParser(interpolation=None)
    with open(path, encoding="utf-8") as fh:
        cp.read_file(fh)
    base = os.path.dirname(os.path.abspath(path))
    sources = []
    for name in cp.sections():
        sec = cp[name]
        if "path" not in sec or "columns" not in sec:
            raise AdapterError(f"manifest section [{name}] needs 'path' and 'columns'")
        src = SourceConfig(
            name=name,
            path=os.path.join(base, sec["path"]),
            columns=[c.strip() for c in sec["columns"].split(",")],
            scheme=sec.get("scheme", "bio").lower(),
            nested=sec.get("nested", "none").lower(),
            mapping=parse_mapping(sec.get("mapping", "")),
            role=sec.get("role", "train").strip(),
        )
        if src.scheme not in ("bio", "iob1"):
            raise AdapterError(f"[{name}]: unknown scheme {src.scheme!r}")
        if src.nested not in ("none", "top_level", "longest"):
            raise AdapterError(f"[{name}]: unknown nested policy {src.nested!r}")
        if src.role not in ("train", "dev", "test"):
            src.split  # validates
        sources.append(src)
    return sources


def _ne_columns(columns: Sequence[str]) -> list[int]:
    idx = [i for i, c in enumerate(columns) if c == "ne" or (c.startswith("ne") and c[2:].isdigit())]
    return sorted(idx, key=lambda i: 0 if columns[i] == "ne" else int(columns[i][2:]))


def adapt_lines(lines: Iterable, src: SourceConfig) -> Corpus:
    """Turn raw lines of one source into a harmonized BIO corpus."""
    cols = src.columns
    if "form" not in cols:
        raise AdapterError(f"[{src.name}]: columns must include 'form'")
    ne_idx = _ne_columns(cols)
    if not ne_idx:
        raise AdapterError(f"[{src.name}]: columns must include 'ne'")
    if len(ne_idx) > 1 and src.nested == "none":
        raise AdapterError(f"[{src.name}]: several NE columns need nested=top_level|longest")
    pick = {"lemma": cols.index("lemma") if "lemma" in cols else None,
            "pos": cols.index("pos") if "pos" in cols else None}
    form_i = cols.index("form")
    sentences = []
    for block in iter_rows(lines):
        tokens = []
        layers_tags: list[list[str]] = [[] for _ in ne_idx]
        for lineno, fields in block:
            if len(fields) < len(cols):
                raise ConllError(f"{src.path}: line {lineno}: expected {len(cols)} fields, "
                                 f"got {len(fields)}")
            tokens.append(Token(fields[form_i], "O",
                                fields[pick["lemma"]] if pick["lemma"] is not None else None,
                                fields[pick["pos"]] if pick["pos"] is not None else None))
            for k, i in enumerate(ne_idx):
                layers_tags[k].append(fields[i])
        if tokens[0].form == DOCSTART:
            continue
        if src.scheme == "iob1":
            layers_tags = [iob1_to_bio(t) for t in layers_tags]
        sent = Sentence(tuple(tokens))
        layers = [bio_to_spans(t) for t in layers_tags]
        if src.nested == "longest":
            spans = filter_nested_longest(LayeredAnnotation(sent, layers))
        else:
            spans = select_top_level(LayeredAnnotation(sent, layers))
        sentences.append(sent.with_tags(spans_to_bio(spans, len(sent))))
    corpus = Corpus(sentences)
    if src.mapping:
        cats = {s.category for sent in sentences for s in bio_to_spans(sent.tags)}
        full = {c: c for c in cats if c in HARMONIZED}
        full.update(src.mapping)
        corpus = map_labels(corpus, full)
    check_harmonized(corpus, src.name)
    return corpus


def adapt_source(src: SourceConfig) -> Corpus:
    with open(src.path, "rb") as fh:
        return adapt_lines(fh, src)


@dataclass
class AdaptedData:
    train: list[tuple[Corpus, str]] = field(default_factory=list)
    dev: list[tuple[Corpus, str]] = field(default_factory=list)
    test: list[tuple[Corpus, str]] = field(default_factory=list)

    def merged(self, part: str) -> Corpus:
        return merge_datasets(getattr(self, part))


def adapt_manifest(sources: Sequence[SourceConfig], loader=adapt_source) -> AdaptedData:
    """Adapt every source and route it (or its split parts) by role."""
    data = AdaptedData()
    for src in sources:
        corpus = loader(src)
        split = src.split
        if split is not None:
            tr, dv, te = split_dataset(corpus, split)
            data.train.append((tr, src.name))
            data.dev.append((dv, src.name))
            data.test.append((te, src.name))
        else:
            getattr(data, src.role).append((corpus, src.name))
    return data
