import math

import numpy as np
import pytest

from gerner.conll import validate_bio
from gerner.tagger.crf import (CRFError, bio_constraints, crf_log_partition,
                               crf_neg_log_likelihood, path_score, viterbi_decode)
from oracles import all_paths, brute_log_partition, brute_viterbi, num_grad, rel_error


def random_instance(rng, integer=False, min_labels=1):
    n, L = rng.integers(1, 6), rng.integers(min_labels, 7)
    if integer:
        return (rng.integers(-2, 3, size=(n, L)).astype(float),
                rng.integers(-2, 3, size=(L + 2, L + 2)).astype(float))
    return rng.normal(size=(n, L)) * 2, rng.normal(size=(L + 2, L + 2))


def test_partition_small_cases():
    assert crf_log_partition(np.zeros((1, 2)), np.zeros((4, 4))) == pytest.approx(math.log(2), abs=1e-12)
    assert crf_log_partition(np.zeros((2, 2)), np.zeros((4, 4))) == pytest.approx(math.log(4), abs=1e-12)


def test_partition_and_viterbi_match_enumeration():
    rng = np.random.default_rng(0)
    for k in range(300):
        em, tr = random_instance(rng, integer=k % 3 == 0)
        assert abs(crf_log_partition(em, tr) - brute_log_partition(em, tr)) < 1e-9
        assert viterbi_decode(em, tr) == brute_viterbi(em, tr)


def test_partition_dominates_and_normalizes():
    rng = np.random.default_rng(1)
    for _ in range(50):
        em, tr = random_instance(rng)
        log_z = crf_log_partition(em, tr)
        scores = [path_score(em, tr, p) for p in all_paths(*em.shape)]
        assert max(scores) <= log_z + 1e-12
        assert sum(math.exp(s - log_z) for s in scores) == pytest.approx(1.0, abs=1e-9)


def test_empty_input_errors():
    with pytest.raises(CRFError):
        crf_log_partition(np.zeros((0, 2)), np.zeros((4, 4)))
    with pytest.raises(CRFError):
        viterbi_decode(np.zeros((0, 2)), np.zeros((4, 4)))


def test_nll_values():
    loss, _, _ = crf_neg_log_likelihood(np.zeros((1, 2)), np.zeros((4, 4)), [0])
    assert loss == pytest.approx(math.log(2))
    em = np.array([[50.0, 0, 0], [0, 50.0, 0]])
    loss, _, _ = crf_neg_log_likelihood(em, np.zeros((5, 5)), [0, 1])
    assert loss < 1e-15
    loss, _, _ = crf_neg_log_likelihood(np.ones((3, 1)), np.ones((3, 3)), [0, 0, 0])
    assert loss == 0.0
    with pytest.raises(CRFError):
        crf_neg_log_likelihood(np.zeros((2, 2)), np.zeros((4, 4)), [0, 2])


def test_nll_nonnegative():
    rng = np.random.default_rng(2)
    for _ in range(200):
        em, tr = random_instance(rng)
        gold = rng.integers(0, em.shape[1], size=em.shape[0])
        assert crf_neg_log_likelihood(em, tr, gold)[0] >= 0


def test_nll_gradient():
    rng = np.random.default_rng(3)
    for _ in range(30):
        # with one label every gradient is identically zero
        em, tr = random_instance(rng, min_labels=2)
        gold = rng.integers(0, em.shape[1], size=em.shape[0])
        _, d_em, d_tr = crf_neg_log_likelihood(em, tr, gold)
        f = lambda: crf_neg_log_likelihood(em, tr, gold)[0]
        assert rel_error(num_grad(f, em), d_em) < 1e-6
        assert rel_error(num_grad(f, tr), d_tr) < 1e-6


def test_viterbi_simple_cases():
    em = np.array([[0.0, 2.0, 1.0], [3.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    assert viterbi_decode(em, np.zeros((5, 5))) == [1, 0, 2]
    assert viterbi_decode(np.zeros((4, 3)), np.zeros((5, 5))) == [0, 0, 0, 0]


def test_constrained_decoding_is_valid_bio():
    labels = ["O", "B-PER", "I-PER", "B-LOC", "I-LOC"]
    mask = bio_constraints(labels)
    rng = np.random.default_rng(4)
    for _ in range(300):
        n = rng.integers(1, 8)
        em = rng.normal(size=(n, 5)) * 3
        em[:, [2, 4]] += 2  # push towards I- tags
        tr = rng.normal(size=(7, 7))
        path = viterbi_decode(em, tr + mask)
        assert validate_bio([labels[i] for i in path]) == []
