import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from gerner.conll import Corpus, Sentence, Token  # noqa: E402

DATA = os.path.join(os.path.dirname(__file__), "..", "src", "gerner", "data")

ENTITIES = {
    "PER": [["Angela", "Merkel"], ["Goethe"], ["Helmut", "Kohl"], ["Schiller"]],
    "LOC": [["Berlin"], ["Frankfurt", "am", "Main"], ["Hamburg"]],
    "ORG": [["Siemens"], ["Deutsche", "Bahn"], ["Bundestag"]],
    "MISC": [["Deutsch"], ["Oktoberfest"]],
}
FILLER = ["der", "die", "und", "besuchte", "in", "mit", "heute", "sagte", "gestern", "das"]


def synthetic_corpus(n=50, seed=7):
    """Sentences where every name always carries the same entity label and
    mentions are separated by at least one O token."""
    rng = np.random.default_rng(seed)
    cats = sorted(ENTITIES)
    sents = []
    for _ in range(n):
        toks, prev_ent = [], False
        for _ in range(rng.integers(3, 8)):
            if not prev_ent and rng.random() < 0.35:
                cat = cats[rng.integers(len(cats))]
                name = ENTITIES[cat][rng.integers(len(ENTITIES[cat]))]
                toks += [Token(w, ("B-" if j == 0 else "I-") + cat) for j, w in enumerate(name)]
                prev_ent = True
            else:
                toks.append(Token(FILLER[rng.integers(len(FILLER))], "O"))
                prev_ent = False
        sents.append(Sentence(tuple(toks)))
    return Corpus(sents)


@pytest.fixture(scope="session")
def overfit_corpus():
    return synthetic_corpus()


@pytest.fixture
def sample_path():
    return os.path.join(DATA, "sample.conll")


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
