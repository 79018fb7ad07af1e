"""Embedding-corpus normalization.

Raw text gets its punctuation split off and is lowercased; pre-annotated
text (token, lemma, POS columns) is rewritten into one of the lemma
variants.  Everything is streamed line by line.
"""
from __future__ import annotations

import enum
import unicodedata
from typing import Iterable, Iterator, NamedTuple, Sequence

from .conll import iter_rows


class NormalizeError(ValueError):
    pass


class Variant(str, enum.Enum):
    LOWER = "lower"
    LEMMA = "lemma"
    LEMMA_LOWER = "lemma_lower"
    LEMMAPOS = "lemmapos"
    LEMMAPOS_LOWER = "lemmapos_lower"

    @property
    def needs_lemma(self) -> bool:
        return self is not Variant.LOWER

    @property
    def needs_pos(self) -> bool:
        return self in (Variant.LEMMAPOS, Variant.LEMMAPOS_LOWER)


class AnnotatedToken(NamedTuple):
    form: str
    lemma: str | None = None
    pos: str | None = None


# symbols common in German web text that are not in a P* category
_EXTRA_PUNCT = set("$€£¥%&+*=<>|~^°§©®™")


def is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P") or ch in _EXTRA_PUNCT


def _peel(token: str) -> list[str]:
    head, tail = [], []
    i, j = 0, len(token)
    while i < j and is_punct(token[i]):
        head.append(token[i])
        i += 1
    while j > i and is_punct(token[j - 1]):
        tail.append(token[j - 1])
        j -= 1
    core = [token[i:j]] if i < j else []
    return head + core + tail[::-1]


def separate_punctuation(line: str) -> list[str]:
    """Split a sentence on whitespace and detach leading/trailing punctuation.

    >>> separate_punctuation("Kleine Kinder sind mutiger.")
    ['Kleine', 'Kinder', 'sind', 'mutiger', '.']
    >>> separate_punctuation("3.5 (Frankfurt)")
    ['3.5', '(', 'Frankfurt', ')']
    """
    out: list[str] = []
    for tok in line.split():
        out.extend(_peel(tok))
    return out


def apply_variant(tokens: Sequence[AnnotatedToken], variant: Variant | str) -> list[str]:
    variant = Variant(variant)
    out = []
    for i, tok in enumerate(tokens):
        if variant is Variant.LOWER:
            out.append(tok.form.lower())
            continue
        if not tok.lemma:
            raise NormalizeError(f"token {i} ({tok.form!r}) has no lemma, needed for {variant.value}")
        lemma = tok.lemma.lower() if variant.value.endswith("_lower") else tok.lemma
        if variant.needs_pos:
            if not tok.pos:
                raise NormalizeError(f"token {i} ({tok.form!r}) has no POS tag, needed for {variant.value}")
            lemma = f"{lemma}_{tok.pos}"
        out.append(lemma)
    return out


def normalize_stream(lines: Iterable[str | bytes], mode: str = "raw",
                     variant: Variant | str = Variant.LOWER) -> Iterator[str]:
    """Yield one normalized sentence per input sentence (without newline).

    ``raw`` mode reads one sentence per line; ``annotated`` mode reads
    form/lemma/pos columns with blank lines between sentences.
    """
    variant = Variant(variant)
    if mode == "raw":
        if variant is not Variant.LOWER:
            raise NormalizeError(f"raw input supports only the 'lower' variant, not {variant.value!r}")
        for line in lines:
            if isinstance(line, bytes):
                line = line.decode("utf-8")
            toks = separate_punctuation(line)
            if toks:
                yield " ".join(t.lower() for t in toks)
    elif mode == "annotated":
        for block in iter_rows(lines):
            toks = []
            for lineno, fields in block:
                if len(fields) < 3 and variant is not Variant.LOWER:
                    raise NormalizeError(f"line {lineno}: expected form, lemma and pos columns")
                toks.append(AnnotatedToken(*fields[:3]))
            yield " ".join(apply_variant(toks, variant))
    else:
        raise NormalizeError(f"unknown mode {mode!r}")
