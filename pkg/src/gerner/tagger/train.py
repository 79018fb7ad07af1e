from __future__ import annotations

import logging
from collections import Counter
from typing import Callable, TextIO

import numpy as np

from ..conll import Corpus, bio_to_spans, validate_bio
from ..evaluate import evaluate_tags
from .model import (Sparse, TaggerError, TaggerParams, TrainConfig, grad_norm, init_params,
                    loss_and_grads, tag)

log = logging.getLogger(__name__)


def label_set(*corpora: Corpus) -> list[str]:
    """``O`` followed by B-/I- tags of every category seen, sorted by category."""
    cats = set()
    for corpus in corpora:
        for sent in corpus.sentences:
            cats.update(s.category for s in bio_to_spans(sent.tags))
    labels = ["O"]
    for c in sorted(cats):
        labels += [f"B-{c}", f"I-{c}"]
    return labels


def _check_bio(corpus: Corpus, name: str):
    for i, sent in enumerate(corpus.sentences):
        if validate_bio(sent.tags):
            raise TaggerError(f"{name} sentence {i} is not valid BIO")


def score(params: TaggerParams, corpus: Corpus) -> float:
    if not len(corpus):
        return 0.0
    return evaluate_tags((tag(s, params), s.tags) for s in corpus.sentences).f1


def sgd_step(params: TaggerParams, grads: dict, lr: float, clip: float,
             frozen_words: np.ndarray | None = None):
    norm = grad_norm(grads)
    scale = lr * (clip / norm if clip and norm > clip else 1.0)
    for name, g in grads.items():
        if isinstance(g, Sparse):
            rows, vals = g
            if name == "word_emb" and frozen_words is not None:
                keep = ~frozen_words[rows]
                rows, vals = rows[keep], vals[keep]
            params.arrays[name][rows] -= scale * vals
        else:
            params.arrays[name] -= scale * g


def train_tagger(train: Corpus, dev: Corpus | None, embeddings=None,
                 config: TrainConfig | None = None,
                 progress: TextIO | None = None,
                 on_epoch: Callable[[int, float, float], None] | None = None) -> TaggerParams:
    """Single-sentence SGD; returns the parameters of the best dev-F1 epoch.

    Without a dev corpus the training corpus is used for selection.
    One line ``epoch=<k> train_loss=<x> dev_f1=<y>`` per epoch goes to
    ``progress`` and the module logger.
    """
    config = config or TrainConfig()
    if not len(train):
        raise TaggerError("empty training corpus")
    dev = dev if dev is not None and len(dev) else train
    _check_bio(train, "train")
    _check_bio(dev, "dev")
    if embeddings is not None and embeddings.dim != config.word_dim:
        raise TaggerError(f"embedding dimension {embeddings.dim} does not match "
                          f"word_dim {config.word_dim}")
    rng = np.random.default_rng(config.seed)

    counts = Counter(t.form for s in train.sentences for t in s.tokens)
    words = list(counts)
    if embeddings is not None:
        seen = set(words)
        words += [w for w in embeddings.vocab.tokens if w not in seen]
    chars = sorted({c for w in counts for c in w})
    labels = label_set(train, dev)
    params = init_params(words, chars, labels, config, rng, embeddings)

    frozen = None
    if embeddings is not None and not config.update_embeddings:
        frozen = np.array([w in embeddings.vocab for w in params.words])
    # training singletons that have no pretrained vector teach the UNK row
    singleton = np.array([counts.get(w, 0) == 1 and (embeddings is None or w not in embeddings.vocab)
                          for w in params.words])

    data = [(s.forms, np.array([params.label_index[t] for t in s.tags]),
             params.word_ids(s.forms)) for s in train.sentences]
    din = params["wf_W"].shape[1]
    p = config.dropout
    best, best_f1 = params.copy(), -1.0
    for epoch in range(1, config.epochs + 1):
        total = 0.0
        for k in rng.permutation(len(data)):
            forms, gold, wid = data[k]
            if config.unk_replace > 0:
                wid = np.where(singleton[wid] & (rng.random(len(wid)) < config.unk_replace), 0, wid)
            drop = (rng.random((len(forms), din)) >= p) / (1.0 - p) if p > 0 else None
            loss, grads = loss_and_grads(params, forms, gold, drop, wid)
            total += loss
            sgd_step(params, grads, config.lr, config.clip, frozen)
        f1 = score(params, dev)
        line = f"epoch={epoch} train_loss={total / len(data):.6f} dev_f1={f1:.2f}"
        log.info(line)
        if progress is not None:
            print(line, file=progress, flush=True)
        if on_epoch is not None:
            on_epoch(epoch, total / len(data), f1)
        if f1 > best_f1:
            best, best_f1 = params.copy(), f1
            best.config["best_epoch"] = epoch
            best.config["best_dev_f1"] = f1
        if best_f1 >= 100.0:
            # later epochs can never replace a perfect score
            break
    return best
