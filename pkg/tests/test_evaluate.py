import random

import pytest

from gerner.conll import Corpus, Sentence, Token, spans_to_bio, EntitySpan as S
from gerner.evaluate import (EvalError, aggregate_runs, evaluate, evaluate_tags, read_merged)
from oracles import decode_conlleval, prf, span_counts

TAGS = ["O", "O", "B-PER", "I-PER", "B-LOC", "I-LOC", "B-ORG", "I-ORG", "I-MISC"]


def corpus_from(tag_seqs, forms=None):
    return Corpus([Sentence(tuple(Token(f"w{i}", t) for i, t in enumerate(tags))) for tags in tag_seqs])


def test_perfect():
    tags = [["B-PER", "I-PER", "O", "B-LOC"]]
    r = evaluate(corpus_from(tags), corpus_from(tags))
    assert (r.precision, r.recall, r.f1) == (100.0, 100.0, 100.0)


def test_half_recall():
    gold = spans_to_bio([S(0, 1, "PER"), S(3, 3, "LOC")], 4)
    pred = spans_to_bio([S(0, 1, "PER")], 4)
    r = evaluate(corpus_from([pred]), corpus_from([gold]))
    assert (r.overall.tp, r.overall.fp, r.overall.fn) == (1, 0, 1)
    assert r.precision == 100.0 and r.recall == 50.0
    assert f"{r.f1:.2f}" == "66.67"


def test_boundary_error():
    r = evaluate(corpus_from([["B-PER", "O"]]), corpus_from([["B-PER", "I-PER"]]))
    assert (r.overall.tp, r.overall.fp, r.overall.fn) == (0, 1, 1)
    assert r.f1 == 0.0


def test_structure_mismatch():
    a = corpus_from([["O", "O"]])
    b = Corpus([Sentence((Token("x", "O"), Token("w1", "O")))])
    with pytest.raises(EvalError, match="sentence 0"):
        evaluate(a, b)
    with pytest.raises(EvalError):
        evaluate(a, corpus_from([["O", "O"], ["O"]]))


def random_pair(rng):
    n = rng.randint(1, 12)
    gold = [rng.choice(TAGS) for _ in range(n)]
    pred = [g if rng.random() < 0.6 else rng.choice(TAGS) for g in gold]
    return pred, gold


def test_differential_against_span_oracle():
    rng = random.Random(0)
    for _ in range(300):
        pairs = [random_pair(rng) for _ in range(rng.randint(1, 6))]
        r = evaluate_tags(pairs)
        counts = span_counts([p for p, _ in pairs], [g for _, g in pairs], decode_conlleval)
        for cat, (tp, fp, fn) in counts.items():
            c = r.categories[cat]
            assert (c.tp, c.fp, c.fn) == (tp, fp, fn)
        tot = tuple(sum(v[i] for v in counts.values()) for i in range(3))
        o = r.overall
        assert (o.tp, o.fp, o.fn) == tot
        for a, b in zip((r.precision, r.recall, r.f1), prf(*tot)):
            assert abs(a - b) <= 1e-12


def test_permutation_invariance():
    rng = random.Random(1)
    pairs = [random_pair(rng) for _ in range(20)]
    r1 = evaluate_tags(pairs)
    rng.shuffle(pairs)
    r2 = evaluate_tags(pairs)
    assert r1.key_values() == r2.key_values()


def test_relabel_category_keeps_totals():
    rng = random.Random(2)
    pairs = [random_pair(rng) for _ in range(20)]
    ren = lambda seq: [t.replace("PER", "NEWCAT") for t in seq]
    r1 = evaluate_tags(pairs)
    r2 = evaluate_tags([(ren(p), ren(g)) for p, g in pairs])
    o1, o2 = r1.overall, r2.overall
    assert o1.tp + o1.fp + o1.fn == o2.tp + o2.fp + o2.fn


def test_accuracy_and_format():
    r = evaluate(corpus_from([["B-PER", "O"]]), corpus_from([["B-PER", "I-PER"]]))
    assert r.accuracy == 50.0
    text = r.format()
    assert text.startswith("processed 2 tokens with 1 phrases; found: 1 phrases; correct: 0.")
    assert "accuracy:  50.00%" in text and "f1=0.00" in text


def test_read_merged():
    text = "Merkel PER B-PER B-PER\nsagte V O B-PER\n\nBerlin N B-LOC B-LOC\n"
    pred, gold = read_merged(text.splitlines(True))
    r = evaluate(pred, gold)
    assert (r.overall.tp, r.overall.fp, r.overall.fn) == (2, 1, 0)
    pred2, gold2 = read_merged(["B-PER O\n", "I-PER O\n"])
    assert evaluate(pred2, gold2).overall.fn == 1


def test_aggregate():
    a = aggregate_runs([80.0, 82.0, 84.0])
    assert a.mean == 82.0 and a.max == 84.0 and a.stdev == pytest.approx(2.0)
    assert aggregate_runs([77.5]).stdev == 0.0
    assert aggregate_runs([83.0, 83.0]).stdev == 0.0
    with pytest.raises(EvalError):
        aggregate_runs([])
