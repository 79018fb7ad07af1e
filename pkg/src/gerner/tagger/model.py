"""Char-biLSTM + word-biLSTM + CRF tagger: parameters, forward pass and
hand-derived gradients.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from ..conll import Sentence
from . import crf
from .lstm import lstm_backward, lstm_forward

UNK = "<UNK>"
CAP_DIM = 4


class TaggerError(ValueError):
    pass


@dataclass
class TrainConfig:
    epochs: int = 100
    batch_size: int = 1
    dropout: float = 0.5
    lr: float = 0.005
    seed: int = 1
    update_embeddings: bool = True
    cap_feature: bool = False
    char_dim: int = 25
    word_dim: int = 100
    word_hidden: int | None = None   # defaults to word_dim
    hidden_dim: int = 25
    clip: float = 5.0
    unk_replace: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.dropout < 1.0:
            raise TaggerError("dropout must lie in [0, 1)")
        if self.lr <= 0:
            raise TaggerError("lr must be positive")
        if self.batch_size != 1:
            raise TaggerError("only batch size 1 is supported")
        if self.word_hidden is None:
            self.word_hidden = self.word_dim

    def to_dict(self) -> dict:
        return asdict(self)


def cap_pattern(word: str) -> int:
    """0 all-lower, 1 all-caps, 2 initial capital, 3 anything else."""
    if word.lower() == word:
        return 0
    if word.upper() == word:
        return 1
    if word[0].isupper() and word[1:].lower() == word[1:]:
        return 2
    return 3


@dataclass
class TaggerParams:
    arrays: dict[str, np.ndarray]
    words: list[str]
    chars: list[str]
    labels: list[str]
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        self.word_index = {w: i for i, w in enumerate(self.words)}
        self.char_index = {c: i for i, c in enumerate(self.chars)}
        self.label_index = {t: i for i, t in enumerate(self.labels)}

    def __getitem__(self, name) -> np.ndarray:
        return self.arrays[name]

    @property
    def cap_feature(self) -> bool:
        return bool(self.config.get("cap_feature", False))

    def copy(self) -> "TaggerParams":
        return TaggerParams({k: v.copy() for k, v in self.arrays.items()},
                            list(self.words), list(self.chars), list(self.labels),
                            dict(self.config))

    def word_ids(self, forms: Sequence[str]) -> np.ndarray:
        get = self.word_index.get
        return np.array([get(w, 0) for w in forms], dtype=np.int64)

    def char_ids(self, word: str) -> list[int]:
        if not word:
            raise TaggerError("cannot encode an empty word")
        get = self.char_index.get
        return [get(c, 0) for c in word]


def _uniform(rng, shape, scale):
    return rng.uniform(-scale, scale, size=shape)


def _glorot(rng, rows, cols):
    return _uniform(rng, (rows, cols), np.sqrt(6.0 / (rows + cols)))


def init_params(words: Sequence[str], chars: Sequence[str], labels: Sequence[str],
                config: TrainConfig, rng: np.random.Generator,
                pretrained=None) -> TaggerParams:
    """Randomly initialise all tensors.

    ``words`` and ``chars`` must not contain the UNK entry; it is prepended
    at index 0.  Rows of words found in ``pretrained`` (an EmbeddingTable)
    are copied from it.
    """
    dc, dw, hw, hd = config.char_dim, config.word_dim, config.word_hidden, config.hidden_dim
    L = len(labels)
    words = [UNK] + [w for w in words if w != UNK]
    chars = [UNK] + [c for c in chars if c != UNK]
    din = dw + 2 * dc + (CAP_DIM if config.cap_feature else 0)
    a = {
        "char_emb": _uniform(rng, (len(chars), dc), np.sqrt(3.0 / dc)),
        "word_emb": _uniform(rng, (len(words), dw), np.sqrt(3.0 / dw)),
    }
    for pre, d_in, h in (("cf", dc, dc), ("cb", dc, dc), ("wf", din, hw), ("wb", din, hw)):
        a[pre + "_W"] = _glorot(rng, 4 * h, d_in)
        a[pre + "_U"] = _glorot(rng, 4 * h, h)
        a[pre + "_b"] = np.zeros(4 * h)
    a["hid_W"] = _glorot(rng, hd, 2 * hw)
    a["hid_b"] = np.zeros(hd)
    a["out_W"] = _glorot(rng, L, hd)
    a["out_b"] = np.zeros(L)
    a["trans"] = np.zeros((L + 2, L + 2))
    if pretrained is not None:
        if pretrained.dim != dw:
            raise TaggerError(f"embedding dimension {pretrained.dim} does not match word_dim {dw}")
        for i, w in enumerate(words):
            vec = pretrained.get(w)
            if vec is not None:
                a["word_emb"][i] = vec
    return TaggerParams(a, list(words), list(chars), list(labels), config.to_dict())


class Sparse(NamedTuple):
    """Row-sparse gradient of an embedding table (unique, sorted rows)."""
    rows: np.ndarray
    values: np.ndarray

    @classmethod
    def accumulate(cls, idx, values):
        rows, inv = np.unique(idx, return_inverse=True)
        out = np.zeros((len(rows), values.shape[1]))
        np.add.at(out, inv, values)
        return cls(rows, out)

    def dense(self, shape):
        d = np.zeros(shape)
        d[self.rows] = self.values
        return d


# --------------------------------------------------------------------------
# forward

def _char_batch(params: TaggerParams, forms: Sequence[str]):
    ids = [params.char_ids(w) for w in forms]
    lengths = np.array([len(x) for x in ids])
    T, B = int(lengths.max()), len(ids)
    fw = np.zeros((T, B), dtype=np.int64)
    bw = np.zeros((T, B), dtype=np.int64)
    for j, seq in enumerate(ids):
        fw[:len(seq), j] = seq
        bw[:len(seq), j] = seq[::-1]
    mask = np.arange(T)[:, None] < lengths[None, :]
    return fw, bw, mask


def encode_chars_batch(params: TaggerParams, forms: Sequence[str]):
    """Char representations (B, 2*d_c) for all words, plus a backward cache."""
    fw_ids, bw_ids, mask = _char_batch(params, forms)
    emb = params["char_emb"]
    out_f, cache_f = lstm_forward(emb[fw_ids], mask, params["cf_W"], params["cf_U"], params["cf_b"])
    out_b, cache_b = lstm_forward(emb[bw_ids], mask, params["cb_W"], params["cb_U"], params["cb_b"])
    rep = np.concatenate([out_f[-1], out_b[-1]], axis=1)
    return rep, (fw_ids, bw_ids, cache_f, cache_b, out_f.shape)


def encode_chars(word: str, params: TaggerParams) -> np.ndarray:
    """Final forward state and final backward state over the characters."""
    return encode_chars_batch(params, [word])[0][0]


def word_input(params: TaggerParams, forms: Sequence[str]):
    wid = params.word_ids(forms)
    chars, ccache = encode_chars_batch(params, forms)
    parts = [params["word_emb"][wid], chars]
    if params.cap_feature:
        caps = np.zeros((len(forms), CAP_DIM))
        caps[np.arange(len(forms)), [cap_pattern(w) for w in forms]] = 1.0
        parts.append(caps)
    return np.concatenate(parts, axis=1), wid, ccache


def forward(params: TaggerParams, forms: Sequence[str], drop_mask: np.ndarray | None = None,
            word_ids: np.ndarray | None = None):
    """Emission scores (N, L) and the cache needed by ``backward``.

    ``drop_mask`` is multiplied into the word-level input (already scaled
    for inverted dropout).  ``word_ids`` overrides the vocabulary lookup.
    """
    if not forms:
        raise TaggerError("cannot encode an empty sentence")
    x, wid, ccache = word_input(params, forms)
    if word_ids is not None:
        wid = np.asarray(word_ids, dtype=np.int64)
        x[:, :params["word_emb"].shape[1]] = params["word_emb"][wid]
    if drop_mask is not None:
        x = x * drop_mask
    n = len(forms)
    mask = np.ones((n, 1), dtype=bool)
    hf, cache_f = lstm_forward(x[:, None, :], mask, params["wf_W"], params["wf_U"], params["wf_b"])
    hb, cache_b = lstm_forward(x[::-1, None, :], mask, params["wb_W"], params["wb_U"], params["wb_b"])
    hw = np.concatenate([hf[:, 0], hb[::-1, 0]], axis=1)
    hid = np.tanh(hw @ params["hid_W"].T + params["hid_b"])
    em = hid @ params["out_W"].T + params["out_b"]
    cache = (wid, ccache, drop_mask, cache_f, cache_b, hw, hid)
    return em, cache


def encode_sentence(sentence: Sentence | Sequence[str], params: TaggerParams,
                    dropout_active: bool = False, rng: np.random.Generator | None = None):
    forms = sentence.forms if isinstance(sentence, Sentence) else list(sentence)
    drop = None
    p = params.config.get("dropout", 0.0)
    if dropout_active and p > 0:
        rng = rng if rng is not None else np.random.default_rng()
        din = params["wf_W"].shape[1]
        drop = (rng.random((len(forms), din)) >= p) / (1.0 - p)
    return forward(params, forms, drop)[0]


# --------------------------------------------------------------------------
# backward

def backward(params: TaggerParams, cache, d_em: np.ndarray) -> dict:
    wid, ccache, drop_mask, cache_f, cache_b, hw, hid = cache
    g = {}
    g["out_W"] = d_em.T @ hid
    g["out_b"] = d_em.sum(axis=0)
    d_hid = d_em @ params["out_W"]
    d_pre = d_hid * (1.0 - hid * hid)
    g["hid_W"] = d_pre.T @ hw
    g["hid_b"] = d_pre.sum(axis=0)
    d_hw = d_pre @ params["hid_W"]
    H = params["wf_U"].shape[1]
    dx_f, g["wf_W"], g["wf_U"], g["wf_b"] = lstm_backward(d_hw[:, None, :H], cache_f)
    dx_b, g["wb_W"], g["wb_U"], g["wb_b"] = lstm_backward(d_hw[::-1, None, H:], cache_b)
    dx = dx_f[:, 0] + dx_b[::-1, 0]
    if drop_mask is not None:
        dx = dx * drop_mask
    dw = params["word_emb"].shape[1]
    dc = params["cf_U"].shape[1]
    g["word_emb"] = Sparse.accumulate(wid, dx[:, :dw])
    d_chars = dx[:, dw:dw + 2 * dc]

    fw_ids, bw_ids, cache_cf, cache_cb, shape = ccache
    d_out = np.zeros(shape)
    d_out[-1] = d_chars[:, :dc]
    dxf, g["cf_W"], g["cf_U"], g["cf_b"] = lstm_backward(d_out, cache_cf)
    d_out = np.zeros(shape)
    d_out[-1] = d_chars[:, dc:]
    dxb, g["cb_W"], g["cb_U"], g["cb_b"] = lstm_backward(d_out, cache_cb)
    cdim = params["char_emb"].shape[1]
    g["char_emb"] = Sparse.accumulate(np.concatenate([fw_ids.ravel(), bw_ids.ravel()]),
                                      np.concatenate([dxf.reshape(-1, cdim), dxb.reshape(-1, cdim)]))
    return g


def loss_and_grads(params: TaggerParams, forms: Sequence[str], gold: Sequence[int],
                   drop_mask: np.ndarray | None = None, word_ids=None):
    """CRF negative log-likelihood of ``gold`` and gradients for every tensor."""
    em, cache = forward(params, forms, drop_mask, word_ids)
    loss, d_em, d_tr = crf.crf_neg_log_likelihood(em, params["trans"], gold)
    g = backward(params, cache, d_em)
    g["trans"] = d_tr
    return loss, g


def grad_norm(grads: dict) -> float:
    total = 0.0
    for v in grads.values():
        arr = v.values if isinstance(v, Sparse) else v
        total += float(np.sum(arr * arr))
    return float(np.sqrt(total))


# --------------------------------------------------------------------------
# inference

def decode_mask(params: TaggerParams) -> np.ndarray:
    mask = getattr(params, "_decode_mask", None)
    if mask is None:
        mask = crf.bio_constraints(params.labels)
        params._decode_mask = mask
    return mask


def tag(sentence: Sentence | Sequence[str], params: TaggerParams) -> list[str]:
    """Constrained Viterbi tags for one sentence; always valid BIO."""
    em = encode_sentence(sentence, params, dropout_active=False)
    path = crf.viterbi_decode(em, params["trans"] + decode_mask(params))
    return [params.labels[i] for i in path]
