import random

import pytest
from hypothesis import given, settings, strategies as st

from gerner.conll import (ConllError, Corpus, EntitySpan, Sentence, Token, Violation,
                          bio_to_spans, iob1_to_bio, parse_conll, spans_to_bio,
                          validate_bio, write_conll)
from oracles import decode_bio_strict, decode_iob1


def test_parse_minimal():
    c = parse_conll("Kleine B-MISC\nKinder I-MISC\n\n", ("form", "ne"))
    assert len(c) == 1
    assert c.sentences[0].forms == ["Kleine", "Kinder"]
    assert c.sentences[0].tags == ["B-MISC", "I-MISC"]


def test_parse_four_columns():
    c = parse_conll("Klein Klein ADJA B-MISC\n", ("form", "lemma", "pos", "ne"))
    assert c.sentences[0].tokens[0] == Token(form="Klein", lemma="Klein", pos="ADJA", ne_tag="B-MISC")


def test_parse_empty():
    assert len(parse_conll("")) == 0


def test_parse_tabs_comments_blank_runs():
    text = "# comment\nA\tB-PER\nB  I-PER\n\n\n\n# x\nC O\n"
    c = parse_conll(text)
    assert [s.forms for s in c] == [["A", "B"], ["C"]]


def test_parse_short_line_reports_line_number():
    with pytest.raises(ConllError, match="line 2"):
        parse_conll("A O\nB\n", ("form", "ne"))


def test_parse_rejects_invalid_utf8():
    with pytest.raises(ConllError, match="UTF-8"):
        parse_conll(b"A O\n\xff\xfe O\n")


def test_parse_ignores_underscore_column():
    c = parse_conll("1 Haus NN O\n", ("_", "form", "pos", "ne"))
    assert c.sentences[0].tokens[0] == Token("Haus", "O", None, "NN")


def test_write_canonical():
    c = Corpus([Sentence((Token("Haus", "O"),))])
    assert write_conll(c) == "Haus O\n\n"
    assert write_conll(Corpus()) == ""


def test_write_missing_column_names_position():
    c = Corpus([Sentence((Token("a", "O", "a", "X"), Token("b", "O")))])
    with pytest.raises(ConllError, match="sentence 0, token 1"):
        write_conll(c, ("form", "lemma", "ne"))


word = st.text(alphabet="abcÄöüßXYZ.-,0123", min_size=1, max_size=6)
tag = st.sampled_from(["O", "B-PER", "I-PER", "B-LOC", "I-LOC", "B-OTH"])
token = st.builds(Token, form=word, ne_tag=tag, lemma=word, pos=st.sampled_from(["NN", "NE", "$."]))
corpora = st.lists(st.lists(token, min_size=1, max_size=6), max_size=5).map(
    lambda ss: Corpus([Sentence(tuple(s)) for s in ss]))


@settings(max_examples=200)
@given(corpora)
def test_round_trip(c):
    cols = ("form", "lemma", "pos", "ne")
    text = write_conll(c, cols)
    back = parse_conll(text, cols)
    assert back == c
    assert write_conll(back, cols) == text


@pytest.mark.parametrize("tags, expected", [
    (["I-PER", "I-PER", "O"], ["B-PER", "I-PER", "O"]),
    (["O", "O", "O"], ["O", "O", "O"]),
    (["I-LOC", "B-LOC", "I-LOC"], ["B-LOC", "B-LOC", "I-LOC"]),
])
def test_iob1_to_bio(tags, expected):
    out = iob1_to_bio(tags)
    assert out == expected
    assert decode_bio_strict(out) == decode_iob1(tags)


def test_iob1_to_bio_rejects_bare_prefix():
    with pytest.raises(ConllError):
        iob1_to_bio(["B"])
    with pytest.raises(ConllError):
        iob1_to_bio(["X-PER"])


def random_iob1(rng, n):
    """Well-formed IOB1: B-X only directly after a token of type X."""
    tags = []
    for i in range(n):
        prev = tags[-1] if tags else "O"
        r = rng.random()
        if r < 0.35:
            tags.append("O")
        elif prev != "O" and r < 0.55:
            tags.append("B-" + prev[2:])
        else:
            tags.append("I-" + rng.choice(["PER", "LOC", "ORG"]))
    return tags


def test_iob1_conversion_random():
    rng = random.Random(3)
    for _ in range(2000):
        tags = random_iob1(rng, rng.randint(0, 10))
        out = iob1_to_bio(tags)
        assert validate_bio(out) == []
        assert decode_bio_strict(out) == decode_iob1(tags)


@pytest.mark.parametrize("tags, spans", [
    (["B-PER", "I-PER", "O", "B-LOC"], [(0, 1, "PER"), (3, 3, "LOC")]),
    (["O", "O"], []),
    (["B-ORG", "B-ORG"], [(0, 0, "ORG"), (1, 1, "ORG")]),
    (["O", "I-PER", "I-PER"], [(1, 2, "PER")]),
    (["B-PER", "I-LOC"], [(0, 0, "PER"), (1, 1, "LOC")]),
])
def test_bio_to_spans(tags, spans):
    assert bio_to_spans(tags) == [EntitySpan(*s) for s in spans]


@pytest.mark.parametrize("spans, n, tags", [
    ([(0, 1, "PER")], 3, ["B-PER", "I-PER", "O"]),
    ([], 2, ["O", "O"]),
    ([(0, 0, "ORG"), (1, 1, "ORG")], 2, ["B-ORG", "B-ORG"]),
])
def test_spans_to_bio(spans, n, tags):
    assert spans_to_bio([EntitySpan(*s) for s in spans], n) == tags
    assert bio_to_spans(tags) == [EntitySpan(*s) for s in spans]


def test_spans_to_bio_errors():
    with pytest.raises(ConllError, match="overlap"):
        spans_to_bio([EntitySpan(0, 1, "PER"), EntitySpan(1, 2, "LOC")], 3)
    with pytest.raises(ConllError, match="range"):
        spans_to_bio([EntitySpan(0, 3, "PER")], 3)


@pytest.mark.parametrize("tags, violations", [
    (["O", "I-PER"], [Violation(1, "orphan-I")]),
    (["B-PER", "I-LOC"], [Violation(1, "type-switch-I")]),
    (["B-PER", "I-PER"], []),
    (["B-PER", "FOO"], [Violation(1, "unknown-label")]),
    (["I-PER"], [Violation(0, "orphan-I")]),
])
def test_validate_bio(tags, violations):
    assert validate_bio(tags) == violations


lenient_tags = st.lists(st.sampled_from(["O", "B-PER", "I-PER", "B-LOC", "I-LOC"]), max_size=12)


@given(lenient_tags)
def test_spans_round_trip_canonicalizes(tags):
    spans = bio_to_spans(tags)
    canon = spans_to_bio(spans, len(tags))
    assert validate_bio(canon) == []
    assert bio_to_spans(canon) == spans
    assert all(a.end < b.start for a, b in zip(spans, spans[1:]))


@given(st.lists(st.tuples(st.integers(0, 9), st.integers(0, 3), st.sampled_from(["PER", "LOC"])),
                max_size=5))
def test_spans_to_bio_output_validates(raw):
    spans, used = [], set()
    for s, ln, cat in raw:
        cells = set(range(s, s + ln + 1))
        if max(cells) < 12 and not cells & used:
            used |= cells
            spans.append(EntitySpan(s, s + ln, cat))
    tags = spans_to_bio(spans, 12)
    assert validate_bio(tags) == []
    assert bio_to_spans(tags) == sorted(spans)
