"""Skip-gram embeddings with negative sampling.

Two modes are supported: plain skip-gram (one shared output matrix) and
structured skip-gram, which keeps a separate output matrix for every
relative context position in the window.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Iterator

import numpy as np

log = logging.getLogger(__name__)

LR_FLOOR = 1e-4
POWER = 0.75


class EmbeddingError(ValueError):
    pass


@dataclass
class Vocabulary:
    entries: list[tuple[str, int]] = field(default_factory=list)
    min_count: int = 1

    def __post_init__(self):
        self.index = {tok: i for i, (tok, _) in enumerate(self.entries)}
        if len(self.index) != len(self.entries):
            raise EmbeddingError("duplicate token in vocabulary")

    def __len__(self):
        return len(self.entries)

    def __contains__(self, tok):
        return tok in self.index

    @property
    def tokens(self) -> list[str]:
        return [t for t, _ in self.entries]

    @property
    def counts(self) -> np.ndarray:
        return np.array([c for _, c in self.entries], dtype=np.int64)


@dataclass
class EmbedConfig:
    dim: int = 100
    window: int = 8
    min_count: int = 4
    negatives: int = 5
    epochs: int = 5
    initial_lr: float = 0.025
    mode: str = "structured"
    seed: int = 1
    workers: int = 1

    def __post_init__(self):
        if self.dim < 1 or self.window < 1 or self.negatives < 1 or self.epochs < 1:
            raise EmbeddingError("dim, window, negatives and epochs must be >= 1")
        if self.initial_lr <= 0:
            raise EmbeddingError("initial_lr must be positive")
        if self.mode not in ("skipgram", "structured"):
            raise EmbeddingError(f"unknown mode {self.mode!r}")
        if self.workers < 1:
            raise EmbeddingError("workers must be >= 1")


@dataclass
class EmbeddingTable:
    vocab: Vocabulary
    input_vectors: np.ndarray
    # (banks, |V|, dim); absent for tables loaded from text
    output_vectors: np.ndarray | None = None
    window: int | None = None
    epoch_losses: list[float] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.input_vectors.shape[1]

    @property
    def n_banks(self) -> int:
        return 0 if self.output_vectors is None else self.output_vectors.shape[0]

    def __getitem__(self, tok: str) -> np.ndarray:
        return self.input_vectors[self.vocab.index[tok]]

    def get(self, tok: str):
        i = self.vocab.index.get(tok)
        return None if i is None else self.input_vectors[i]


# --------------------------------------------------------------------------
# corpus access

def _lines(corpus) -> Iterator[str]:
    if isinstance(corpus, (str, os.PathLike)):
        with open(corpus, encoding="utf-8") as fh:
            yield from fh
    else:
        yield from corpus


def build_vocab(corpus, min_count: int = 4) -> Vocabulary:
    counts: Counter[str] = Counter()
    for line in _lines(corpus):
        counts.update(line.split())
    # Counter keeps first-occurrence order, and sorted() is stable
    entries = sorted(((t, c) for t, c in counts.items() if c >= min_count),
                     key=lambda e: -e[1])
    return Vocabulary(entries, min_count)


def build_negative_table(vocab: Vocabulary) -> np.ndarray:
    """Unigram distribution raised to the 3/4 power, normalized."""
    if len(vocab) == 0:
        raise EmbeddingError("cannot sample negatives from an empty vocabulary")
    weights = vocab.counts.astype(np.float64) ** POWER
    return weights / weights.sum()


def sample_negatives(cdf: np.ndarray, rng: np.random.Generator, size) -> np.ndarray:
    idx = np.searchsorted(cdf, rng.random(size), side="right")
    return np.minimum(idx, len(cdf) - 1)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _log_sigmoid(x):
    return -np.logaddexp(0.0, -x)


def sgns_pair_loss(center_vec, context_vec, negative_vecs=()):
    """Negative-sampling loss of one (center, context) pair.

    Returns ``(loss, (d_center, d_context, d_negatives))`` where
    ``d_negatives`` has one row per negative.
    """
    v = np.asarray(center_vec, dtype=np.float64)
    u = np.asarray(context_vec, dtype=np.float64)
    negs = np.asarray(negative_vecs, dtype=np.float64).reshape(-1, v.shape[0]) \
        if len(negative_vecs) else np.zeros((0, v.shape[0]))
    if v.ndim != 1 or u.shape != v.shape or negs.shape[1] != v.shape[0]:
        raise EmbeddingError("vector dimensions do not match")
    pos = u @ v
    neg = negs @ v
    loss = -_log_sigmoid(pos) - _log_sigmoid(-neg).sum()
    g_pos = _sigmoid(pos) - 1.0
    g_neg = _sigmoid(neg)
    d_center = g_pos * u + g_neg @ negs
    d_context = g_pos * v
    d_negs = g_neg[:, None] * v[None, :]
    return float(loss), (d_center, d_context, d_negs)


def bank_index(offset: int, window: int) -> int:
    """Output bank for relative position ``offset`` (never 0)."""
    return offset + window if offset < 0 else offset + window - 1


def _encode(corpus, vocab: Vocabulary) -> Iterator[np.ndarray]:
    index = vocab.index
    for line in _lines(corpus):
        ids = [index[t] for t in line.split() if t in index]
        if ids:
            yield np.array(ids, dtype=np.int64)


class _Trainer:
    def __init__(self, vocab: Vocabulary, config: EmbedConfig):
        self.vocab = vocab
        self.config = config
        rng = np.random.default_rng(config.seed)
        v, d = len(vocab), config.dim
        self.syn0 = (rng.random((v, d)) - 0.5) / d
        banks = 2 * config.window if config.mode == "structured" else 1
        self.syn1 = np.zeros((banks, v, d))
        self.cdf = np.cumsum(build_negative_table(vocab))
        self.cdf[-1] = 1.0
        self.total_words = int(vocab.counts.sum()) * config.epochs
        self.processed = 0

    def lr(self) -> float:
        frac = 1.0 - self.processed / (self.total_words + 1)
        return self.config.initial_lr * max(LR_FLOOR, frac)

    def train_sentence(self, ids: np.ndarray, rng: np.random.Generator) -> tuple[float, int]:
        cfg = self.config
        w, k = cfg.window, cfg.negatives
        structured = cfg.mode == "structured"
        n = len(ids)
        loss, pairs = 0.0, 0
        for pos in range(n):
            lo, hi = max(0, pos - w), min(n, pos + w + 1)
            offsets = np.array([o for o in range(lo - pos, hi - pos) if o != 0], dtype=np.int64)
            if not len(offsets):
                self.processed += 1
                continue
            ctx = ids[pos + offsets]
            banks = (np.where(offsets < 0, offsets + w, offsets + w - 1) if structured
                     else np.zeros(len(offsets), dtype=np.int64))
            negs = sample_negatives(self.cdf, rng, (len(offsets), k))
            lr = self.lr()
            center = ids[pos]
            v = self.syn0[center]
            u_pos = self.syn1[banks, ctx]                      # (m, d)
            u_neg = self.syn1[banks[:, None], negs]            # (m, k, d)
            s_pos = u_pos @ v
            s_neg = u_neg @ v
            loss += float(-_log_sigmoid(s_pos).sum() - _log_sigmoid(-s_neg).sum())
            pairs += len(offsets)
            g_pos = _sigmoid(s_pos) - 1.0
            g_neg = _sigmoid(s_neg)
            d_center = g_pos @ u_pos + np.einsum("mk,mkd->d", g_neg, u_neg)
            np.add.at(self.syn1, (banks, ctx), -lr * g_pos[:, None] * v)
            np.add.at(self.syn1, (np.repeat(banks, k), negs.ravel()),
                      -lr * g_neg.ravel()[:, None] * v)
            self.syn0[center] -= lr * d_center
            self.processed += 1
        return loss, pairs

    def run_epoch(self, corpus, epoch: int) -> float:
        cfg = self.config
        if cfg.workers == 1:
            rng = np.random.default_rng([cfg.seed, epoch])
            loss = pairs = 0
            for ids in _encode(corpus, self.vocab):
                l, p = self.train_sentence(ids, rng)
                loss += l
                pairs += p
            return loss / max(pairs, 1)
        # lock-free shared updates; results are not reproducible
        sents = list(_encode(corpus, self.vocab))
        totals = [[0.0, 0] for _ in range(cfg.workers)]

        def work(wid):
            rng = np.random.default_rng([cfg.seed, epoch, wid])
            for ids in sents[wid::cfg.workers]:
                l, p = self.train_sentence(ids, rng)
                totals[wid][0] += l
                totals[wid][1] += p

        threads = [threading.Thread(target=work, args=(i,)) for i in range(cfg.workers)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        return sum(t[0] for t in totals) / max(sum(t[1] for t in totals), 1)


def train_embeddings(corpus, config: EmbedConfig, vocab: Vocabulary | None = None) -> EmbeddingTable:
    """Train embeddings on a re-iterable corpus (path or list of lines)."""
    if vocab is None:
        vocab = build_vocab(corpus, config.min_count)
    if len(vocab) == 0:
        raise EmbeddingError("empty vocabulary")
    trainer = _Trainer(vocab, config)
    losses = []
    for epoch in range(config.epochs):
        avg = trainer.run_epoch(corpus, epoch)
        losses.append(avg)
        log.info("epoch=%d loss=%.6f lr=%.6g", epoch + 1, avg, trainer.lr())
    return EmbeddingTable(vocab, trainer.syn0, trainer.syn1, config.window, losses)


# --------------------------------------------------------------------------
# text format

def _fmt(x: float) -> str:
    return repr(float(f"{x:.9g}"))


def save_embeddings(table: EmbeddingTable, path, meta: dict | None = None):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(table.vocab)} {table.dim}\n")
        for tok, row in zip(table.vocab.tokens, table.input_vectors):
            fh.write(tok + " " + " ".join(_fmt(x) for x in row) + "\n")
    if meta is not None:
        write_meta(path, meta)


def load_embeddings(path) -> EmbeddingTable:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2 or not all(h.isdigit() for h in header):
            raise EmbeddingError(f"{path}: malformed header {' '.join(header)!r}")
        n, d = int(header[0]), int(header[1])
        if d < 1:
            raise EmbeddingError(f"{path}: dimension must be positive")
        tokens, rows = [], np.empty((n, d))
        seen = set()
        for line in fh:
            parts = line.rstrip("\n").split(" ")
            if not parts or parts == [""]:
                continue
            if len(tokens) >= n:
                raise EmbeddingError(f"{path}: more rows than the header's {n}")
            if len(parts) != d + 1:
                raise EmbeddingError(f"{path}: row {len(tokens) + 1} has {len(parts) - 1} values, expected {d}")
            if parts[0] in seen:
                raise EmbeddingError(f"{path}: duplicate token {parts[0]!r}")
            seen.add(parts[0])
            rows[len(tokens)] = [float(x) for x in parts[1:]]
            tokens.append(parts[0])
        if len(tokens) != n:
            raise EmbeddingError(f"{path}: header announces {n} rows, found {len(tokens)}")
    vocab = Vocabulary([(t, 0) for t in tokens], 0)
    return EmbeddingTable(vocab, rows)


def meta_path(path) -> str:
    return os.fspath(path) + ".meta.json"


def write_meta(path, meta: dict):
    with open(meta_path(path), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)


def read_meta(path) -> dict | None:
    try:
        with open(meta_path(path), encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        return None


def corpus_hash(corpus) -> str:
    h = hashlib.sha256()
    for line in _lines(corpus):
        h.update(line.rstrip("\n").encode("utf-8") + b"\n")
    return h.hexdigest()


def embedding_meta(config: EmbedConfig, variant: str, corpus) -> dict:
    meta = {k: v for k, v in asdict(config).items() if k in ("dim", "window", "min_count", "mode")}
    meta.update(variant=variant, corpus_hash=corpus_hash(corpus))
    return meta
