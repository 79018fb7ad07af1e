"""Linear-chain CRF over emission scores.

``transitions`` is an ``(L+2, L+2)`` matrix indexed ``[from, to]``; row
``L`` is the virtual START state and column ``L+1`` the STOP state.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from ..conll import split_tag


class CRFError(ValueError):
    pass


def _check(emissions: np.ndarray, transitions: np.ndarray) -> tuple[int, int]:
    if emissions.ndim != 2 or emissions.shape[0] == 0:
        raise CRFError("emissions must be a non-empty N x L matrix")
    n, L = emissions.shape
    if transitions.shape != (L + 2, L + 2):
        raise CRFError(f"transitions must be {(L + 2, L + 2)}, got {transitions.shape}")
    return n, L


def _forward(emissions, transitions):
    n, L = emissions.shape
    trans = transitions[:L, :L]
    alpha = np.empty((n, L))
    alpha[0] = transitions[L, :L] + emissions[0]
    for i in range(1, n):
        alpha[i] = logsumexp(alpha[i - 1][:, None] + trans, axis=0) + emissions[i]
    return alpha


def crf_log_partition(emissions, transitions) -> float:
    emissions = np.asarray(emissions, dtype=np.float64)
    transitions = np.asarray(transitions, dtype=np.float64)
    _, L = _check(emissions, transitions)
    alpha = _forward(emissions, transitions)
    return float(logsumexp(alpha[-1] + transitions[:L, L + 1]))


def path_score(emissions, transitions, path: Sequence[int]) -> float:
    emissions = np.asarray(emissions, dtype=np.float64)
    n, L = emissions.shape
    path = list(path)
    score = transitions[L, path[0]] + transitions[path[-1], L + 1]
    score += emissions[np.arange(n), path].sum()
    for a, b in zip(path, path[1:]):
        score += transitions[a, b]
    return float(score)


def crf_neg_log_likelihood(emissions, transitions, gold: Sequence[int]):
    """Return ``(loss, d_emissions, d_transitions)`` for one gold path.

    The gradients are expected counts under the model minus gold counts.
    """
    emissions = np.asarray(emissions, dtype=np.float64)
    transitions = np.asarray(transitions, dtype=np.float64)
    n, L = _check(emissions, transitions)
    gold = np.asarray(gold, dtype=np.int64)
    if gold.shape != (n,) or gold.min() < 0 or gold.max() >= L:
        raise CRFError("gold path has invalid length or label index")
    start, stop = L, L + 1
    trans = transitions[:L, :L]

    alpha = _forward(emissions, transitions)
    beta = np.empty((n, L))
    beta[-1] = transitions[:L, stop]
    for i in range(n - 2, -1, -1):
        beta[i] = logsumexp(trans + (emissions[i + 1] + beta[i + 1])[None, :], axis=1)
    log_z = float(logsumexp(alpha[-1] + beta[-1]))

    d_em = np.exp(alpha + beta - log_z)
    d_tr = np.zeros_like(transitions)
    d_tr[start, :L] = d_em[0]
    d_tr[:L, stop] = d_em[-1]
    for i in range(1, n):
        pair = alpha[i - 1][:, None] + trans + (emissions[i] + beta[i])[None, :] - log_z
        d_tr[:L, :L] += np.exp(pair)

    d_em[np.arange(n), gold] -= 1.0
    d_tr[start, gold[0]] -= 1.0
    d_tr[gold[-1], stop] -= 1.0
    np.subtract.at(d_tr, (gold[:-1], gold[1:]), 1.0)

    loss = log_z - path_score(emissions, transitions, gold)
    return max(loss, 0.0), d_em, d_tr


def viterbi_decode(emissions, transitions) -> list[int]:
    """Best path; ties resolve to the lowest label index at each step."""
    emissions = np.asarray(emissions, dtype=np.float64)
    transitions = np.asarray(transitions, dtype=np.float64)
    n, L = _check(emissions, transitions)
    trans = transitions[:L, :L]
    delta = transitions[L, :L] + emissions[0]
    back = np.empty((n, L), dtype=np.int64)
    for i in range(1, n):
        cand = delta[:, None] + trans
        back[i] = np.argmax(cand, axis=0)
        delta = cand[back[i], np.arange(L)] + emissions[i]
    last = int(np.argmax(delta + transitions[:L, L + 1]))
    path = [last]
    for i in range(n - 1, 0, -1):
        last = int(back[i, last])
        path.append(last)
    return path[::-1]


def bio_constraints(labels: Sequence[str]) -> np.ndarray:
    """Additive transition mask forbidding successions invalid under BIO."""
    L = len(labels)
    mask = np.zeros((L + 2, L + 2))
    parsed = [split_tag(t) for t in labels]
    for j, (prefix, cat) in enumerate(parsed):
        if prefix != "I":
            continue
        mask[L, j] = -np.inf
        for i, (p_prev, c_prev) in enumerate(parsed):
            if p_prev == "O" or c_prev != cat:
                mask[i, j] = -np.inf
    return mask
